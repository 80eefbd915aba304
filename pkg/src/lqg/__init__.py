"""Desk-scale Liouville quantum gravity toolkit.

Lattice Gaussian free field samplers, Liouville first passage percolation
metrics with geodesics and annulus distances, the multiplicative-chaos area
measure, exponent estimators, and reproducible experiment harnesses.
"""

__version__ = "0.1.0"

from ._kernel import BACKEND as KERNEL_BACKEND
from .errors import (ConfigError, DegenerateAnnulusError, InvalidFieldError,
                     InvalidParameterError, LqgError, OutOfBoundsError,
                     ResolutionError, UnreachableTargetError)
from .field import (BumpSpec, FieldGrid, FieldKind, MollifiedField,
                    add_bump, add_constant, circle_average, constant_field,
                    custom_field, mollify, sample_discrete_gff,
                    sample_wn_field, smooth_plateau, whole_plane_covariance)
from .lfpp import (AnnulusSpec, Connectivity, DistanceMap, GeodesicPath,
                   LfppMetric, across_distance, around_distance, build_metric,
                   crossing_distance, distance_map, edge_cost, geodesic,
                   internal_distance, metric_ball)
from .gmc import (MeasureGrid, MomentReport, mass_of, measure,
                  moment_estimate, refinement_diagnostic)
from .exponents import (ExponentFit, KpzResult, ParameterTriple, box_dimension,
                        cover_counts, default_dimension,
                        dimension_table_from_points, estimate_a_eps, fit_Q,
                        kpz, parameter_triple, xi_to_gamma)
from .experiments import (ConfluenceReport, ThickPointMap, annulus_event,
                          ball_raster, confluence_stat, thick_point_map)
from .rng import child_seeds, mix64
