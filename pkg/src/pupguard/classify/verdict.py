"""Per-attempt verdicts and decision-level fusion.

A verdict's score is its normality margin (>= 0 iff predicted normal), a
common scale across the three detector families so that the fused verdict
can report the weaker of the two margins. Decision fusion is a logical AND:
the attempt is normal only if both channels say so.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Prediction(enum.Enum):
    NORMAL = "normal"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class Verdict:
    pair_id: str
    score: float  # normality margin; >= 0 iff prediction is NORMAL
    prediction: Prediction


# a sample exactly on the boundary is normal for every detector family;
# margins this close to zero are boundary ties up to float noise
BOUNDARY_EPS = 1e-12


def make_verdict(model, x, pair_id: str) -> Verdict:
    """Score a sample with any fitted detector (via its decision_margin)."""
    margin = model.decision_margin(x)
    prediction = (
        Prediction.NORMAL if margin >= -BOUNDARY_EPS else Prediction.ANOMALOUS
    )
    return Verdict(pair_id, margin, prediction)


def decision_and(image_verdict: Verdict, timing_verdict: Verdict) -> Verdict:
    """Normal iff both channels are normal; score is the weaker margin."""
    if image_verdict.pair_id != timing_verdict.pair_id:
        raise ValueError(
            f"pair_id mismatch: {image_verdict.pair_id!r} vs "
            f"{timing_verdict.pair_id!r}"
        )
    both_normal = (
        image_verdict.prediction is Prediction.NORMAL
        and timing_verdict.prediction is Prediction.NORMAL
    )
    return Verdict(
        image_verdict.pair_id,
        min(image_verdict.score, timing_verdict.score),
        Prediction.NORMAL if both_normal else Prediction.ANOMALOUS,
    )
