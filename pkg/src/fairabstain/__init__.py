"""Fair abstention with no harm: post-processing a binary classifier into
abstain/flip decisions under group fairness, abstention-rate and no-harm
constraints, then distilling those decisions into surrogate models."""

from fairabstain.data import Dataset, GroupStats, gen_synthetic, group_stats, load_csv, split, write_csv
from fairabstain.cells import CellCounts, CellKey, CellTable, DecisionVector, build_cells
from fairabstain.solver import ConstraintSpec, IpSolution, brute_force_solve, solve, verify_solution

__version__ = "0.1.0"

__all__ = [
    "CellCounts",
    "CellKey",
    "CellTable",
    "ConstraintSpec",
    "Dataset",
    "DecisionVector",
    "GroupStats",
    "IpSolution",
    "brute_force_solve",
    "build_cells",
    "gen_synthetic",
    "group_stats",
    "load_csv",
    "solve",
    "split",
    "verify_solution",
    "write_csv",
]
