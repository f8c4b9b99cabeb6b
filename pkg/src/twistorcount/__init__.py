"""Counting primitive isotropic lattice vectors against twistor-plane seminorms."""

from .counting import CountTable, count_table, fit_exponent, weighted_count
from .enumeration import EnumRecord, IsotropicSet, brute_force_oracle, enumerate_isotropic
from .k3 import elliptic_fibrations, fibration_report, slag_fibrations
from .lattice import GramLattice, build_diagonal_lattice, build_k3_lattice
from .orbits import Isometry, hyperbolic_splitting, map_between, reduce_to_standard
from .plane import TwistorPlane, axis_plane, make_plane, random_exact_plane, random_plane
from .sphere import WeightFunction, funk_eigenvalue, weyl_sums
from .tamagawa import constant_report, orthogonal_group_order, zeta

__all__ = [
    "CountTable", "EnumRecord", "GramLattice", "Isometry", "IsotropicSet", "TwistorPlane", "WeightFunction",
    "axis_plane", "brute_force_oracle", "build_diagonal_lattice", "build_k3_lattice", "constant_report",
    "count_table", "elliptic_fibrations", "enumerate_isotropic", "fibration_report", "fit_exponent",
    "funk_eigenvalue", "hyperbolic_splitting", "make_plane", "map_between", "orthogonal_group_order",
    "random_exact_plane", "random_plane", "reduce_to_standard", "slag_fibrations", "weighted_count",
    "weyl_sums", "zeta",
]
__version__ = "0.1.0"
