"""Period map, foliation graphs and wall asymptotics for real genus-2 curves
w**2 = (x**2 - 1)(x - e1)(x - conj e1)(x - e2)(x - conj e2)."""

from .abelian import DistinguishedDifferential, eta, normalize, period, width
from .asymptotics import (Displacement, WallExpansion, alpha_beta, cusp_exponent, d_eta_e,
                          expansion_data, predict_displacement, verify_theorem)
from .cells import CellCoordinates, CriticalSet, GraphType, critical_points
from .coordinates import classify, continue_path, find_wall, forward, inverse
from .curve import BranchDivisor, PlanePath, continue_w, sextic
from .estimators import PeriodMapInverse, PeriodMapTransformer
from .foliation import TracedGraph, build_graph, trace_trajectory
from .render import render_svg

__version__ = "0.1.0"

__all__ = [
    "BranchDivisor", "PlanePath", "sextic", "continue_w",
    "DistinguishedDifferential", "normalize", "period", "eta", "width",
    "CriticalSet", "GraphType", "CellCoordinates", "critical_points",
    "classify", "forward", "inverse", "find_wall", "continue_path",
    "TracedGraph", "trace_trajectory", "build_graph", "render_svg",
    "WallExpansion", "Displacement", "alpha_beta", "d_eta_e", "expansion_data",
    "predict_displacement", "verify_theorem", "cusp_exponent",
    "PeriodMapTransformer", "PeriodMapInverse",
]
