from ._pottsrf import (
    __version__,
    cluster_trials,
    project_simplex,
    segment,
    solve_graph,
    three_circles,
)

__all__ = [
    "__version__",
    "cluster_trials",
    "project_simplex",
    "segment",
    "solve_graph",
    "three_circles",
]
