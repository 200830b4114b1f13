"""Spanning numbers of orbit metrics and an explicit skew-product example.

Modules follow the workflow: ``metrics`` and ``systems`` define the
orbit metrics and the example maps, ``covering`` estimates spanning
numbers, ``schedule`` and ``cocycle`` build the tent skew product,
``oracle``, ``certify`` and ``cells`` check its properties, and
``harness`` runs declarative experiments.
"""
from .diophantine import ContinuedFractionAlpha, NearestOrbitPoint, nearest_orbit_point, orbit_interval_count
from .metrics import (METRIC_KINDS, CirclePoint, MetricProfiles, OrbitMetricTriple, Torus2Point,
                      circle_dist, metric_profile, metric_profile_batch, orbit_metrics, torus2_dist)
from .systems import (Doubling, DynamicalSystem, HorizonOverflow, ProductBernoulliRotations, Rotation,
                      SkewProduct, StepSystem, appendix_system, perturbed_system, skew_step, tbeta_step)
from .covering import (ComplexityProfile, MemoryBudgetExceeded, ProfileRow, SampleSet, SpanEstimate,
                       boundedness_verdict, greedy_span, grid_for_radius, low_discrepancy, measure_span,
                       measure_sample, orbit_empirical, packing_number, span_profile, uniform_grid)
from .schedule import DepthInfeasible, LevelParams, ParameterSchedule, build_schedule
from .cocycle import CocycleFunction, CocyclePath, birkhoff_sum, mean_path_gap
from .oracle import (WitnessReport, check_lemma_small, check_lemma_zero_sum, first_escape,
                     minimality_probe, nonequicontinuity_witness, nonunique_ergodicity_witness,
                     tbeta_witness, tent_probe_sample)
from .certify import ScheduleAudit, check_schedule
from .cells import CoverFamily, CoverPlan, build_cover, build_cover_plan, verify_cover

__version__ = "0.1.0"

__all__ = [
    "ContinuedFractionAlpha", "NearestOrbitPoint", "nearest_orbit_point", "orbit_interval_count",
    "METRIC_KINDS", "CirclePoint", "Torus2Point", "OrbitMetricTriple", "MetricProfiles",
    "circle_dist", "torus2_dist", "orbit_metrics", "metric_profile", "metric_profile_batch",
    "DynamicalSystem", "Rotation", "Doubling", "ProductBernoulliRotations", "SkewProduct",
    "StepSystem", "HorizonOverflow", "appendix_system", "perturbed_system", "skew_step", "tbeta_step",
    "SampleSet", "SpanEstimate", "ProfileRow", "ComplexityProfile", "MemoryBudgetExceeded",
    "uniform_grid", "grid_for_radius", "low_discrepancy", "measure_sample", "orbit_empirical",
    "greedy_span", "packing_number", "span_profile", "measure_span", "boundedness_verdict",
    "ParameterSchedule", "LevelParams", "DepthInfeasible", "build_schedule",
    "CocycleFunction", "CocyclePath", "birkhoff_sum", "mean_path_gap",
    "WitnessReport", "first_escape", "check_lemma_zero_sum", "check_lemma_small",
    "nonequicontinuity_witness", "nonunique_ergodicity_witness", "tbeta_witness",
    "minimality_probe", "tent_probe_sample", "ScheduleAudit", "check_schedule",
    "CoverPlan", "CoverFamily", "build_cover_plan", "build_cover", "verify_cover",
]
