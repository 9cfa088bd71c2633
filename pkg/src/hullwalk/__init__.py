"""Random walks that avoid the convex hull of their recent history.

The walker in R^d steps uniformly on the unit ball (or sphere) at its
current position, conditioned so that the segment to the new position stays
clear of the convex hull of the last k positions together with the origin.
This package simulates the process, its sphere and homogeneous (cylinder)
variants, and the regeneration structure that makes it ballistic, and
estimates its speed and limiting direction.
"""

from .angle_chain import (SPEED_BALL_2_1, SPEED_SPHERE_2_1, local_drift,
                          simulate_chain, speed_2_1, stationary_cdf,
                          stationary_law, stationary_pdf, t_map)
from .engine import (RunResult, StepStats, WalkConfig, WalkState, advance,
                     propose_rejection, run, run_replicas,
                     sample_step_direct_2d)
from .errors import (DegenerateConfiguration, InsufficientRenewals,
                     InsufficientSamples, InvalidInput, SamplerStall,
                     SplitSamplerError, UnsupportedDimension)
from .estimators import (DirectionSample, KSweepRow, RenewalCrossCheck,
                         SpeedEstimate, crosscheck_renewal_speed,
                         direction_stats, drift_profile, k_sweep,
                         speed_estimate)
from .geometry import (Arc, ConeGenerators, admissible_point,
                       admissible_sector_2d, cone_contains)
from .renewal import (BallChain, GapSurvival, GoodGeometryParams,
                      RenewalRecord, SplitRunResult, collect_renewals,
                      good_geometry, run_split, split_step_block)
from .traceio import (SummaryDocument, TraceRecord, read_summary, read_trace,
                      write_summary, write_trace)

__version__ = "0.1.0"
