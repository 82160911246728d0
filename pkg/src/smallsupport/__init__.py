"""Small-support powers of permutations, with applications to Latin squares and Steiner designs."""

from .lemma import WitnessReport, best_witness, max_alpha, min_support_bruteforce, weighted_average_W, witness_power
from .perm_core import (
    CycleStructure,
    FactoredInteger,
    Permutation,
    cycle_decomposition,
    order_factored,
    points_in_cycles_divisible_by,
    power,
    support,
)

__version__ = "0.1.0"

__all__ = [
    "CycleStructure",
    "FactoredInteger",
    "Permutation",
    "WitnessReport",
    "best_witness",
    "cycle_decomposition",
    "max_alpha",
    "min_support_bruteforce",
    "order_factored",
    "points_in_cycles_divisible_by",
    "power",
    "support",
    "weighted_average_W",
    "witness_power",
]
