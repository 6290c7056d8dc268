"""Reports the true count plus one."""
import sys

from mccomp.cnf_io import load_instance
from mccomp.core import CountResult
from mccomp.counting import count_value
from mccomp.solver_output import write_solver_output

inst = load_instance(sys.argv[1])
value = count_value(inst) + 1
sys.stdout.write(write_solver_output(CountResult.from_count(inst.kind, value)))
