"""Model counting competition toolkit: MC-2021 formats, exact counters,
instance generators, benchmark selection, judging and a solver harness."""

__version__ = "0.1.0"
FORMAT_REVISION = "MC-2021 format"
