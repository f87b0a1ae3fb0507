"""Decision support for public safety power shut-offs.

Builds and solves the risk-aware de-energization MILP, the benchmark
threshold heuristics, and the trade-off sweeps behind the operator
console. See README.md for the CLI and HTTP service entry points.
"""

__version__ = "0.1.0"
