"""Pipeline configuration: the knobs behind every experiment axis.

Configs load from a flat ``key = value`` text file (``#`` comments allowed,
chosen for diff-ability in experiment logs); command-line flags override
file values. All defaults live here.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError

EXTRACTORS = ("lbp", "hog", "embedding")
FUSIONS = ("concat", "cross", "none", "timing_only")
CLASSIFIERS = ("ocsvm", "iforest", "lof")


@dataclass(frozen=True)
class PipelineConfig:
    extractor: str = "lbp"
    embedding_file: str | None = None
    lbp_grid: int = 1
    otsu_segment: bool = True
    pca_k: int | None = 32  # capped at min(n-1, d) when fitting
    fusion: str = "cross"
    cross_offset: float = 0.0
    standardize_fused: bool = True
    classifier: str = "ocsvm"
    decision_fusion: bool = False
    image_classifier: str | None = None  # decision-fusion channels default
    timing_classifier: str | None = None  # to `classifier`
    nu: float = 0.1
    gamma: float | str = "auto"
    tol: float = 1e-6
    trees: int = 100
    psi: int | None = None  # min(256, n) when fitting
    iforest_threshold: float = 0.5
    lof_k: int | None = None  # min(20, n-1) when fitting
    lof_threshold: float = 1.5
    seed: int = 0

    def validate(self) -> "PipelineConfig":
        if self.extractor not in EXTRACTORS:
            raise ConfigError(f"extractor must be one of {EXTRACTORS}")
        if self.fusion not in FUSIONS:
            raise ConfigError(f"fusion must be one of {FUSIONS}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"classifier must be one of {CLASSIFIERS}")
        if self.extractor == "embedding" and not self.embedding_file:
            raise ConfigError("extractor=embedding requires embedding_file")
        for name in ("image_classifier", "timing_classifier"):
            value = getattr(self, name)
            if value is not None and value not in CLASSIFIERS:
                raise ConfigError(f"{name} must be one of {CLASSIFIERS}")
        if not 0 < self.nu <= 1:
            raise ConfigError("nu must lie in (0, 1]")
        return self

    def channel_families(self) -> tuple[str, str]:
        """(image, timing) classifier families for decision fusion."""
        return (
            self.image_classifier or self.classifier,
            self.timing_classifier or self.classifier,
        )


_FIELD_TYPES = {f.name: f for f in fields(PipelineConfig)}

_BOOL_FIELDS = {"otsu_segment", "standardize_fused", "decision_fusion"}
_INT_FIELDS = {"lbp_grid", "trees", "seed"}
_OPTIONAL_INT_FIELDS = {"pca_k", "psi", "lof_k"}
_FLOAT_FIELDS = {"cross_offset", "nu", "tol", "iforest_threshold", "lof_threshold"}
_STR_FIELDS = {"extractor", "fusion", "classifier"}
_OPTIONAL_STR_FIELDS = {"embedding_file", "image_classifier", "timing_classifier"}


def _coerce(key: str, raw: str):
    if key in _BOOL_FIELDS:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if key in _INT_FIELDS:
        return int(raw)
    if key in _OPTIONAL_INT_FIELDS:
        return None if raw.lower() == "none" else int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key == "gamma":
        return "auto" if raw.lower() == "auto" else float(raw)
    if key in _STR_FIELDS:
        return raw
    if key in _OPTIONAL_STR_FIELDS:
        return None if raw.lower() == "none" else raw
    raise ConfigError(f"unknown configuration key {key!r}")


def parse_config_text(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = base or PipelineConfig()
    updates = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        try:
            updates[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {line_no}: {key}: {exc}") from exc
    return replace(cfg, **updates).validate()


def load_config(path: str, base: PipelineConfig | None = None) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)


def config_to_dict(cfg: PipelineConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(PipelineConfig)}


def config_from_dict(doc: dict) -> PipelineConfig:
    unknown = set(doc) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    return PipelineConfig(**doc).validate()
