"""Fitting and applying the full detection pipeline.

Everything fitted (timing statistics, principal components, per-dimension
scalers, detector parameters) derives from the training set exclusively;
scoring never mutates the fitted state. A fitted pipeline round-trips
through a single JSON bundle file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import classify
from .classify import Verdict, decision_and, make_verdict
from .config import PipelineConfig, config_from_dict, config_to_dict
from .dataset import Dataset, Label, PressPair, press_interval
from .errors import ConfigError, ProtocolError
from .features import (
    EmbeddingTable,
    PcaModel,
    load_embeddings,
    pair_features,
    pca_fit,
    pca_transform,
)
from .fusion import FeatureScaler, fit_scaler, fuse_concat, fuse_cross
from .preprocess import (
    Polarity,
    TimingStandardizer,
    fit_timing,
    otsu_threshold,
    segment,
)

BUNDLE_VERSION = 1


def _image_preprocess(cfg: PipelineConfig):
    if not cfg.otsu_segment or cfg.extractor == "embedding":
        return None
    return lambda img: segment(img, otsu_threshold(img), Polarity.DARK_FOREGROUND)


def _needs_scaler(family: str) -> bool:
    # distance-based detectors need comparable coordinate scales; the
    # isolation forest splits per-dimension and is scale-free
    return family in ("ocsvm", "lof")


def _fit_family(family: str, X: np.ndarray, cfg: PipelineConfig):
    if family == "ocsvm":
        return classify.ocsvm_fit(X, nu=cfg.nu, gamma=cfg.gamma, tol=cfg.tol)
    if family == "iforest":
        return classify.iforest_fit(
            X, trees=cfg.trees, psi=cfg.psi, seed=cfg.seed,
            threshold=cfg.iforest_threshold,
        )
    if family == "lof":
        return classify.lof_fit(X, k=cfg.lof_k, threshold=cfg.lof_threshold)
    raise ConfigError(f"unknown classifier family {family!r}")


@dataclass(frozen=True)
class PipelineModel:
    """A fully fitted pipeline, ready to score press pairs."""

    config: PipelineConfig
    timing: TimingStandardizer
    pca: PcaModel | None
    scalers: dict[str, FeatureScaler | None]
    models: dict[str, object]  # {"fused": m} or {"image": m, "timing": m}
    embeddings: EmbeddingTable | None = None

    def channels(self) -> tuple[str, ...]:
        return tuple(self.models)


def _image_matrix(ds: Dataset, cfg: PipelineConfig, pca, embeddings) -> np.ndarray:
    preprocess = _image_preprocess(cfg)
    return np.array(
        [
            pair_features(
                pair,
                extractor=cfg.extractor,
                pca=pca,
                embeddings=embeddings,
                lbp_grid=cfg.lbp_grid,
                preprocess=preprocess,
            )
            for pair in ds
        ]
    )


def _fuse_matrix(X: np.ndarray, t_star: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    if cfg.fusion == "concat":
        return np.hstack([X, t_star[:, None]])
    if cfg.fusion == "cross":
        return X * (t_star + cfg.cross_offset)[:, None]
    if cfg.fusion == "none":
        return X
    if cfg.fusion == "timing_only":
        return t_star[:, None]
    raise ConfigError(f"unknown fusion scheme {cfg.fusion!r}")


def fit_pipeline(train: Dataset, cfg: PipelineConfig) -> PipelineModel:
    """Fit every stage on legitimate training pairs.

    Attack-labeled pairs are refused: the detectors are one-class by
    construction and must never see coerced samples.
    """
    cfg = cfg.validate()
    if len(train) < 2:
        raise ProtocolError("need at least 2 training pairs")
    for pair in train:
        if pair.label is Label.ATTACK:
            raise ProtocolError(
                f"training pair {pair.pair_id} is attack-labeled; "
                "one-class training requires normal data only"
            )
    embeddings = load_embeddings(cfg.embedding_file) if cfg.extractor == "embedding" else None

    intervals = [press_interval(p) for p in train]
    timing = fit_timing(intervals)
    t_star = timing.standardize_many(intervals)

    X_raw = _image_matrix(train, cfg, None, embeddings)
    pca = None
    if cfg.pca_k is not None:
        k = min(cfg.pca_k, X_raw.shape[0] - 1, X_raw.shape[1])
        pca = pca_fit(X_raw, k)
        X_img = pca_transform(pca, X_raw)
    else:
        X_img = X_raw

    scalers: dict[str, FeatureScaler | None] = {}
    models: dict[str, object] = {}
    if cfg.decision_fusion:
        image_family, timing_family = cfg.channel_families()
        for name, matrix, family in (
            ("image", X_img, image_family),
            ("timing", t_star[:, None], timing_family),
        ):
            scaler = (
                fit_scaler(matrix)
                if cfg.standardize_fused and _needs_scaler(family)
                else None
            )
            fit_X = scaler.transform(matrix) if scaler else matrix
            scalers[name] = scaler
            models[name] = _fit_family(family, fit_X, cfg)
    else:
        fused = _fuse_matrix(X_img, t_star, cfg)
        scaler = (
            fit_scaler(fused)
            if cfg.standardize_fused and _needs_scaler(cfg.classifier)
            else None
        )
        fit_X = scaler.transform(fused) if scaler else fused
        scalers["fused"] = scaler
        models["fused"] = _fit_family(cfg.classifier, fit_X, cfg)
    return PipelineModel(cfg, timing, pca, scalers, models, embeddings)


def _pair_vectors(pm: PipelineModel, pair: PressPair) -> dict[str, np.ndarray]:
    cfg = pm.config
    t_star = pm.timing.standardize(press_interval(pair))
    vec = pair_features(
        pair,
        extractor=cfg.extractor,
        pca=pm.pca,
        embeddings=pm.embeddings,
        lbp_grid=cfg.lbp_grid,
        preprocess=_image_preprocess(cfg),
    )
    if cfg.decision_fusion:
        out = {"image": vec, "timing": np.array([t_star])}
    elif cfg.fusion == "concat":
        out = {"fused": fuse_concat(vec, t_star, pair.pair_id).values}
    elif cfg.fusion == "cross":
        out = {"fused": fuse_cross(vec, t_star, cfg.cross_offset, pair.pair_id).values}
    elif cfg.fusion == "none":
        out = {"fused": vec}
    else:  # timing_only
        out = {"fused": np.array([t_star])}
    for name, x in out.items():
        scaler = pm.scalers.get(name)
        if scaler is not None:
            out[name] = scaler.transform(x)
    return out


def score_pair(pm: PipelineModel, pair: PressPair) -> Verdict:
    """Fused verdict for one press pair."""
    vectors = _pair_vectors(pm, pair)
    if pm.config.decision_fusion:
        image_v = make_verdict(pm.models["image"], vectors["image"], pair.pair_id)
        timing_v = make_verdict(pm.models["timing"], vectors["timing"], pair.pair_id)
        return decision_and(image_v, timing_v)
    return make_verdict(pm.models["fused"], vectors["fused"], pair.pair_id)


def score_dataset(pm: PipelineModel, ds: Dataset) -> dict[str, list[Verdict]]:
    """All verdicts for a dataset, keyed by channel plus the final 'fused'."""
    out: dict[str, list[Verdict]] = {name: [] for name in pm.models}
    if pm.config.decision_fusion:
        out["fused"] = []
    for pair in ds:
        vectors = _pair_vectors(pm, pair)
        channel_verdicts = {
            name: make_verdict(pm.models[name], vectors[name], pair.pair_id)
            for name in pm.models
        }
        for name, v in channel_verdicts.items():
            out[name].append(v)
        if pm.config.decision_fusion:
            out["fused"].append(
                decision_and(channel_verdicts["image"], channel_verdicts["timing"])
            )
    return out


# ---------------------------------------------------------------------------
# Bundle serialization (trained pipeline -> one JSON file)


def save_bundle(pm: PipelineModel, path: str) -> None:
    doc = {
        "format_version": BUNDLE_VERSION,
        "kind": "pupguard-bundle",
        "config": config_to_dict(pm.config),
        "timing": {"mu": pm.timing.mu, "sigma": pm.timing.sigma},
        "pca": None
        if pm.pca is None
        else {
            "mean": pm.pca.mean.tolist(),
            "components": pm.pca.components.tolist(),
            "explained_variance": pm.pca.explained_variance.tolist(),
            "rank_deficient": pm.pca.rank_deficient,
        },
        "scalers": {
            name: None
            if scaler is None
            else {"mean": scaler.mean.tolist(), "scale": scaler.scale.tolist()}
            for name, scaler in pm.scalers.items()
        },
        "models": {name: classify.save_model(m) for name, m in pm.models.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_bundle(path: str) -> PipelineModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if doc.get("format_version") != BUNDLE_VERSION or doc.get("kind") != "pupguard-bundle":
        raise ConfigError(f"{path}: not a pupguard model bundle")
    for field in ("config", "timing", "models"):
        if field not in doc:
            raise ConfigError(f"{path}: bundle missing field {field!r}")
    cfg = config_from_dict(doc["config"])
    timing = TimingStandardizer(
        float(doc["timing"]["mu"]), float(doc["timing"]["sigma"])
    )
    pca = None
    if doc.get("pca") is not None:
        p = doc["pca"]
        pca = PcaModel(
            mean=np.asarray(p["mean"], dtype=np.float64),
            components=np.asarray(p["components"], dtype=np.float64),
            explained_variance=np.asarray(p["explained_variance"], dtype=np.float64),
            rank_deficient=bool(p["rank_deficient"]),
        )
    scalers = {
        name: None
        if s is None
        else FeatureScaler(
            np.asarray(s["mean"], dtype=np.float64),
            np.asarray(s["scale"], dtype=np.float64),
        )
        for name, s in doc.get("scalers", {}).items()
    }
    models = {name: classify.load_model(m) for name, m in doc["models"].items()}
    embeddings = (
        load_embeddings(cfg.embedding_file) if cfg.extractor == "embedding" else None
    )
    return PipelineModel(cfg, timing, pca, scalers, models, embeddings)
