"""Constructive solutions of div u = mu for atomic measure data on CSG domains."""

from .config import Experiment, ExperimentConfig, load_shipped, shipped_experiments
from .geometry import Ball, Box, Difference, DomainPair, Intersection, Union, normalize
from .kernel import Bump, QuadConfig, kernel_G, kernel_G_batch
from .measure import AdmissiblePair, DiscreteMeasure, omega_weight, riesz_potential, weight_w0
from .paths import build_path_system, geodesic_distance, path, radius_profile
from .solver import FieldEvaluator, sample_field, solve, weighted_sup
from .whitney import decompose

__version__ = "0.1.0"
