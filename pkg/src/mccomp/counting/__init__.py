from .bruteforce import BruteForceLimitError, count_bruteforce
from .ddnnf import DdnnfError, DecisionDnnf, compile_ddnnf, count_on_ddnnf
from .search import (ComponentCache, ComponentKey, ResourceExhausted, SearchLimits, check_sat, count,
                     count_value)

__all__ = [
    "BruteForceLimitError", "ComponentCache", "ComponentKey", "DdnnfError", "DecisionDnnf",
    "ResourceExhausted", "SearchLimits", "check_sat", "compile_ddnnf", "count", "count_bruteforce",
    "count_on_ddnnf", "count_value",
]
