"""Sketch-accelerated k-means++ seeding with local search."""

from .algo import (
    CostTrajectory,
    SeedingConfig,
    baseline_seeding,
    brute_force_best_swap,
    fast_seeding,
    local_search_step,
)
from .dataset import GenSpec, PointSet, exact_cost, generate, load_points, save_points
from .oracle import DistanceOracle, OracleError
from .sketch import SketchSpec, SketchedSet, jl_dimension, project, sketch_sq_dist

__version__ = "0.1.0"

__all__ = [
    "CostTrajectory",
    "DistanceOracle",
    "GenSpec",
    "OracleError",
    "PointSet",
    "SeedingConfig",
    "SketchSpec",
    "SketchedSet",
    "baseline_seeding",
    "brute_force_best_swap",
    "exact_cost",
    "fast_seeding",
    "generate",
    "jl_dimension",
    "load_points",
    "local_search_step",
    "project",
    "save_points",
    "sketch_sq_dist",
]
