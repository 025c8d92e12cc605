"""Regression-based researcher reputation scoring with a data-sharing
incentive, plus a deterministic contract/oracle ledger simulation."""

from .bibliometrics import (AuthorRecord, CareerStats, PaperRecord,
                            compute_career_length, compute_h_index,
                            derive_career_stats)
from .regression import (FEATURE_AUGMENTED, FEATURE_BASE, REFERENCE_WEIGHTS,
                         FeatureVector, ModelConfig, ModelState,
                         delta_statistics, fit_batch, reference_preset, predict,
                         update_online)
from .scoring import (MODE_LITERAL, MODE_SHARE_BONUS, OutlierScaling,
                      ScoreBreakdown, calibrate_share_weight, compute_epsilon,
                      compute_phi, scale_beta, score)
from .ledger import (LedgerConfig, LedgerEntry, LedgerState, OracleFulfillment,
                     ScoreRequest, apply_fulfillment, genesis, replay,
                     submit_request, verify_chain)
from .estimator import ScienceIndexModel

__version__ = "0.1.0"

__all__ = [
    "AuthorRecord", "CareerStats", "PaperRecord", "compute_career_length",
    "compute_h_index", "derive_career_stats",
    "FEATURE_AUGMENTED", "FEATURE_BASE", "REFERENCE_WEIGHTS", "FeatureVector",
    "ModelConfig", "ModelState", "delta_statistics", "fit_batch",
    "reference_preset", "predict", "update_online",
    "MODE_LITERAL", "MODE_SHARE_BONUS", "OutlierScaling", "ScoreBreakdown",
    "calibrate_share_weight", "compute_epsilon", "compute_phi", "scale_beta",
    "score",
    "LedgerConfig", "LedgerEntry", "LedgerState", "OracleFulfillment",
    "ScoreRequest", "apply_fulfillment", "genesis", "replay",
    "submit_request", "verify_chain",
    "ScienceIndexModel",
]
