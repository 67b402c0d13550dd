"""Computational toolkit for Lipschitz-free spaces over finite pointed metric spaces."""

from ._config import DEFAULT_TOL, Tolerances
from .classify import (ClassificationReport, CrossCheck, LensScan, builtin_slices,
                       classify_connectable, classify_daugavet_element,
                       classify_daugavet_molecule, delta_ball_test, delta_slice_test,
                       lens_diameter_scan, length_space_test)
from .corpus import EXAMPLE_NAMES, ExampleSpec, example_space
from .elements import FreeElement, LipschitzFunction, Molecule, molecule
from .exceptions import (BoundViolation, DomainError, LipfreeError, MetricStructureError,
                         SolverError)
from .freespace import (NormResult, distance, free_norm, is_distance_two_pair,
                        is_extreme_molecule, make_slice, slice_min_separation,
                        sum_norm_lower_bound_check)
from .lipschitz import (construct_far_function, extend_with_slack, f_xy, lipschitz_constant,
                        locality_profile, mcshane_extend, plateau)
from .lp import LinearProgram, TransportationInstance, solve_lp, solve_transportation
from .metric import (EmbeddedPointSet, FiniteMetricSpace, is_connectable, lens, metric_segment,
                     mid_set, trivial_segment_pairs, validate_metric)

__version__ = "0.1.0"
