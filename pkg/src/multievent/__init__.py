"""Multiple-events panel event studies of policy effects.

Builds a country-by-date panel from policy schedules, case counts, mobility
and covariates, constructs single- and multiple-event regression designs
(event-time dummies or intensity-weighted event terms, with optional controls
for concurrent policies), and estimates them by least squares with
cluster-robust standard errors.
"""

__version__ = "0.1.0"

from .design import Controls, DesignProblem, EstimationSpec, Variant, build_design, s_pi
from .estimator import (EventStudyResult, FitResult, cluster_robust_cov, estimate,
                        fit_least_squares, normal_equations_solve)
from .panel import (CountryCovariates, EpiSeries, MobilityCategory, MobilitySeries, Panel,
                    PanelRow, PolicyKind, PolicySchedule, Region, build_panel,
                    concurrent_mean_intensity, event_time)
from .transforms import OutcomeKind, ihs, log_prevalence_lag, moving_average, outcome_value
