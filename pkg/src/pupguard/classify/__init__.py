"""One-class novelty detectors trained on legitimate samples only."""

from .iforest import IsoForestModel, iforest_fit, iforest_score
from .lof import LofModel, lof_fit, lof_score
from .ocsvm import KktReport, OcSvmModel, check_kkt, ocsvm_fit, ocsvm_score
from .serialize import load_model, load_model_file, save_model, save_model_file
from .verdict import Prediction, Verdict, decision_and, make_verdict

__all__ = [
    "IsoForestModel",
    "KktReport",
    "LofModel",
    "OcSvmModel",
    "Prediction",
    "Verdict",
    "check_kkt",
    "decision_and",
    "iforest_fit",
    "iforest_score",
    "load_model",
    "load_model_file",
    "lof_fit",
    "lof_score",
    "make_verdict",
    "ocsvm_fit",
    "ocsvm_score",
    "save_model",
    "save_model_file",
]
