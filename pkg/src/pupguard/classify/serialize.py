"""Versioned JSON serialization for the three detector families.

Documents: {"format_version": 1, "family": "ocsvm"|"iforest"|"lof",
"params": {...}} with all numbers in decimal form -- human-diffable and
language-portable. Field names are part of the on-disk contract.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import ConfigError
from .iforest import IsoForestModel
from .lof import LofModel
from .ocsvm import OcSvmModel

FORMAT_VERSION = 1


def save_model(model) -> dict:
    if isinstance(model, OcSvmModel):
        family, params = "ocsvm", {
            "support_vectors": model.support_vectors.tolist(),
            "alphas": model.alphas.tolist(),
            "support_indices": model.support_indices.tolist(),
            "rho": model.rho,
            "gamma": model.gamma,
            "nu": model.nu,
            "n_train": model.n_train,
            "kkt_residual": model.kkt_residual,
        }
    elif isinstance(model, IsoForestModel):
        family, params = "iforest", {
            "trees": list(model.trees),
            "psi": model.psi,
            "n_train": model.n_train,
            "seed": model.seed,
            "dim": model.dim,
            "threshold": model.threshold,
        }
    elif isinstance(model, LofModel):
        family, params = "lof", {
            "train_points": model.train_points.tolist(),
            "k": model.k,
            "k_distances": model.k_distances.tolist(),
            "neighbors": model.neighbors.tolist(),
            "lrd": model.lrd.tolist(),
            "threshold": model.threshold,
        }
    else:
        raise TypeError(f"not a serializable model: {type(model).__name__}")
    return {"format_version": FORMAT_VERSION, "family": family, "params": params}


def _require(params: dict, field: str):
    if field not in params:
        raise ConfigError(f"model document missing field {field!r}")
    return params[field]


def load_model(doc: dict):
    if doc.get("format_version") != FORMAT_VERSION:
        raise ConfigError(
            f"unsupported model format_version {doc.get('format_version')!r}"
        )
    family = doc.get("family")
    params = doc.get("params")
    if not isinstance(params, dict):
        raise ConfigError("model document missing field 'params'")
    if family == "ocsvm":
        return OcSvmModel(
            support_vectors=np.asarray(_require(params, "support_vectors"), dtype=np.float64),
            alphas=np.asarray(_require(params, "alphas"), dtype=np.float64),
            support_indices=np.asarray(_require(params, "support_indices"), dtype=np.int64),
            rho=float(_require(params, "rho")),
            gamma=float(_require(params, "gamma")),
            nu=float(_require(params, "nu")),
            n_train=int(_require(params, "n_train")),
            kkt_residual=float(_require(params, "kkt_residual")),
        )
    if family == "iforest":
        return IsoForestModel(
            trees=tuple(_require(params, "trees")),
            psi=int(_require(params, "psi")),
            n_train=int(_require(params, "n_train")),
            seed=int(_require(params, "seed")),
            dim=int(_require(params, "dim")),
            threshold=float(_require(params, "threshold")),
        )
    if family == "lof":
        return LofModel(
            train_points=np.asarray(_require(params, "train_points"), dtype=np.float64),
            k=int(_require(params, "k")),
            k_distances=np.asarray(_require(params, "k_distances"), dtype=np.float64),
            neighbors=np.asarray(_require(params, "neighbors"), dtype=np.int64),
            lrd=np.asarray(_require(params, "lrd"), dtype=np.float64),
            threshold=float(_require(params, "threshold")),
        )
    raise ConfigError(f"unknown model family {family!r}")


def save_model_file(model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(save_model(model), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model_file(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return load_model(doc)
