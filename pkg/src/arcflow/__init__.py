"""Area-preserving curve shortening flow with free Neumann boundary on a convex support.

Simulates the normal-velocity flow (kappa - kappa_bar) nu for open curves
whose endpoints slide along a fixed convex curve with perpendicular
contact, monitors the conserved and monotone quantities of the problem,
and provides the rescaling tools used to analyze blowups of the plain
curve shortening flow.
"""

from .curve import (CurvatureSamples, DiscreteCurve, arclength_table, curvature,
                    curve_from_json, curve_to_json, node_normals, node_tangents,
                    polyline_length, resample_uniform, rotated, scaled,
                    segment_lengths, self_intersects, total_turning, translated)
from .diagnostics import (DensityProbe, DiagnosticsRecord, chord_region_convex,
                          enclosed_area, gaussian_density, index)
from .errors import (DomainError, InvalidCurveError, InvalidInputError,
                     InvalidSupportError)
from .flow import (AREA_PRESERVING, CSF, AdmissibilityReport, FlowConfig,
                   FlowState, check_admissibility, flow_curvature, kappa_bar,
                   run, step, velocity)
from .initial import attach_endpoints, orthogonal_arc, perturbed_arc
from .rescaling import (ArcFit, BlowupSample, RescaledFrame, SingularityReport,
                        classify_singularity, estimate_blowup_time,
                        fit_circular_arc, grim_reaper, hamilton_rescale,
                        parabolic_rescale, self_shrinker_residual)
from .support import (BoundaryLift, CircleSupport, EllipseSupport, SupportCurve,
                      SupportMetrics, TableSupport, advance_lift,
                      support_from_config)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
