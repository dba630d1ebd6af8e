"""Conditional and classical extreme value limit models: measures, estimators and diagnostics."""

from . import diagnostics, estimators, margins, measures, norming, scenarios, transforms
from .diagnostics import classify, probe, run_check, scan
from .estimators import ScaledTailEstimator, TailEstimate
from .margins import gev_tail, inverse_marginal_transform, marginal_transform, support_interval
from .measures import LimitMeasure
from .norming import NormalizingQuadruple, check_equivalence, profile_regular_variation, quadruple
from .scenarios import get_scenario, register_builtin_scenarios, scenario_ids
from .transforms import cev_pair_from_mevt, mevt_from_cev_pair, plan_standardization, pushforward_standardized

__version__ = "0.1.0"

__all__ = [
    "diagnostics", "estimators", "margins", "measures", "norming", "scenarios", "transforms",
    "classify", "probe", "run_check", "scan", "ScaledTailEstimator", "TailEstimate", "gev_tail",
    "inverse_marginal_transform", "marginal_transform", "support_interval", "LimitMeasure",
    "NormalizingQuadruple", "check_equivalence", "profile_regular_variation", "quadruple", "get_scenario",
    "register_builtin_scenarios", "scenario_ids", "cev_pair_from_mevt", "mevt_from_cev_pair",
    "plan_standardization", "pushforward_standardized", "__version__",
]
