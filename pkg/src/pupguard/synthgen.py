"""Synthetic press-pair generator.

Substitutes for human-subject capture at desk scale: ridge-textured press
images (an oriented sinusoid under a seeded smoothly-varying orientation
field, masked by a radial contact footprint) plus per-subject inter-press
interval models. Attack pairs perturb either the timing channel or the
second image, never both, controlled by ``channel_mix`` so the two factors
can be ablated independently.

Everything is a pure function of (parameters, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import (
    CANONICAL_SIZE,
    CaptureInstant,
    Dataset,
    GrayImage,
    Label,
    PressPair,
    load_dataset,
    parse_timestamp,
    write_dataset,
)

# press footprint: contact = exp(-(r/R)^4); R keeps the blob inside the
# frame for center offsets up to ~40 px so centroid shifts track offsets
PRESS_RADIUS = 28.0
PRESS_DEPTH = 150.0  # intensity drop per unit pressure at full contact
RIDGE_FLOOR = 0.1  # fraction of depth applied in valleys (keeps blob visible)
NOISE_SIGMA = 0.05 * 255.0

# natural jitter of a relaxed press
NORMAL_OFFSET_MAX = 5.0
NORMAL_ROTATION_MAX = 10.0
NORMAL_PRESSURE_JITTER = (0.9, 1.1)

_T1_BASE = parse_timestamp("20240301080000.000000")

_GRID_Y, _GRID_X = (g.astype(np.float64) for g in np.mgrid[0:CANONICAL_SIZE, 0:CANONICAL_SIZE])


@dataclass(frozen=True)
class SubjectProfile:
    """Per-subject ridge texture and habitual press timing."""

    ridge_frequency: float  # cycles per pixel, ~0.08-0.15
    ridge_orientation_field_seed: int
    base_interval_mean: float  # seconds
    base_interval_std: float  # seconds
    base_pressure: float  # (0, 1]

    def __post_init__(self):
        if self.base_interval_std <= 0:
            raise ValueError("base_interval_std must be positive")
        if self.base_interval_mean <= 3 * self.base_interval_std:
            raise ValueError("base_interval_mean must exceed 3x the std")
        if not 0 < self.base_pressure <= 1:
            raise ValueError("base_pressure must lie in (0, 1]")


@dataclass(frozen=True)
class AttackParams:
    """Coercion model: how far an attack deviates per channel.

    ``channel_mix`` is the fraction of attacks that are anomalous in timing
    only; the rest are anomalous in the second image only.
    """

    interval_shift_sigmas: float = 4.0
    pressure_gain: float = 0.4  # multiplicative, 0.4 -> +40%
    center_offset_px: float = 20.0
    rotation_deg: float = 25.0
    smear_length_px: int = 6
    channel_mix: float = 0.5

    def __post_init__(self):
        if min(
            self.interval_shift_sigmas,
            self.pressure_gain,
            self.center_offset_px,
            self.rotation_deg,
            self.smear_length_px,
        ) < 0:
            raise ValueError("perturbation magnitudes must be non-negative")
        if not 0 <= self.channel_mix <= 1:
            raise ValueError("channel_mix must lie in [0, 1]")
        if (
            max(
                self.interval_shift_sigmas,
                self.pressure_gain,
                self.center_offset_px,
                self.rotation_deg,
                self.smear_length_px,
            )
            == 0
        ):
            raise ValueError("an attack profile needs at least one perturbation > 0")


@dataclass(frozen=True)
class Press:
    """One press action as the generator sees it."""

    pressure: float = 1.0
    center_offset: tuple[float, float] = (0.0, 0.0)
    rotation: float = 0.0
    smear: int = 0


def gen_fingerprint_image(
    profile: SubjectProfile, press: Press, rng_seed: int
) -> GrayImage:
    """Render one synthetic press image, 160x160 uint8.

    Higher pressure darkens the contact region (strictly lower mean
    intensity); the contact footprint is centered at image-center + offset;
    the ridge pattern is rotated about that center; smear applies a
    directional box blur of the given length along the rotated x-axis.
    Deterministic for fixed inputs.
    """
    if not 0 < press.pressure <= 2:
        raise ValueError("pressure must lie in (0, 2]")
    n = CANONICAL_SIZE
    yy, xx = _GRID_Y, _GRID_X
    cx = (n - 1) / 2.0 + press.center_offset[0]
    cy = (n - 1) / 2.0 + press.center_offset[1]

    a = math.radians(press.rotation)
    xr = math.cos(a) * (xx - cx) - math.sin(a) * (yy - cy)
    yr = math.sin(a) * (xx - cx) + math.cos(a) * (yy - cy)

    # harder presses flatten the fingertip: the footprint widens gently with
    # force, then balloons once the pulp is compressed past its soft range
    radius = PRESS_RADIUS * (
        1.0
        + 0.35 * (press.pressure - 1.0)
        + 1.5 * max(0.0, press.pressure - 1.12)
    )

    field_rng = np.random.default_rng(profile.ridge_orientation_field_seed)
    a0 = field_rng.uniform(0.0, math.pi)
    coeffs = field_rng.normal(0.0, 0.6, size=5)
    phase = field_rng.uniform(0.0, 2.0 * math.pi)
    u, v = xr / 80.0, yr / 80.0
    theta = (
        a0
        + coeffs[0] * u
        + coeffs[1] * v
        + coeffs[2] * u * u
        + coeffs[3] * u * v
        + coeffs[4] * v * v
    )
    ridge = np.sin(
        2.0 * math.pi * profile.ridge_frequency * (xr * np.cos(theta) + yr * np.sin(theta))
        + phase
    )
    ridge01 = 0.5 + 0.5 * ridge  # 1 = valley, 0 = ridge trough

    r2 = ((xx - cx) ** 2 + (yy - cy) ** 2) / radius**2
    contact = np.exp(-(r2**2))
    depth = PRESS_DEPTH * press.pressure
    img = 255.0 - contact * depth * (RIDGE_FLOOR + (1.0 - RIDGE_FLOOR) * (1.0 - ridge01))

    if press.smear > 0:
        acc = np.zeros_like(img)
        for s in range(press.smear + 1):
            dy = int(round(s * math.sin(a)))
            dx = int(round(s * math.cos(a)))
            acc += _shift_edge(img, dy, dx)
        img = acc / (press.smear + 1)

    # sensor noise appears only where skin touches; the idle background
    # stays clean white, so the darkness centroid tracks the press center
    noise_rng = np.random.default_rng(rng_seed)
    img = img + contact * noise_rng.normal(0.0, NOISE_SIGMA, size=img.shape)
    return GrayImage(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def _shift_edge(img: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Translate with edge replication (no wrap-around)."""
    n = img.shape[0]
    ys = np.clip(np.arange(n) - dy, 0, n - 1)
    xs = np.clip(np.arange(n) - dx, 0, n - 1)
    return img[np.ix_(ys, xs)]


def _finger_profile(profile: SubjectProfile, finger: int) -> SubjectProfile:
    # two different fingers of the same subject: distinct orientation fields
    return replace(
        profile,
        ridge_orientation_field_seed=profile.ridge_orientation_field_seed * 2 + finger,
    )


def _natural_press(rng: np.random.Generator, profile: SubjectProfile) -> Press:
    angle = rng.uniform(0.0, 2.0 * math.pi)
    radius = rng.uniform(0.0, NORMAL_OFFSET_MAX)
    return Press(
        pressure=profile.base_pressure * rng.uniform(*NORMAL_PRESSURE_JITTER),
        center_offset=(radius * math.cos(angle), radius * math.sin(angle)),
        rotation=rng.uniform(-NORMAL_ROTATION_MAX, NORMAL_ROTATION_MAX),
        smear=0,
    )


def _attack_press(
    rng: np.random.Generator, profile: SubjectProfile, attack: AttackParams
) -> Press:
    angle = rng.uniform(0.0, 2.0 * math.pi)
    sign = 1.0 if rng.uniform() < 0.5 else -1.0
    return Press(
        pressure=min(profile.base_pressure * (1.0 + attack.pressure_gain), 2.0),
        center_offset=(
            attack.center_offset_px * math.cos(angle),
            attack.center_offset_px * math.sin(angle),
        ),
        rotation=sign * attack.rotation_deg,
        smear=attack.smear_length_px,
    )


def _sample_interval(
    rng: np.random.Generator, profile: SubjectProfile, shift_sigmas: float = 0.0
) -> float:
    mean = profile.base_interval_mean + shift_sigmas * profile.base_interval_std
    return max(rng.normal(mean, profile.base_interval_std), 1e-6)


def gen_press_pair(
    profile: SubjectProfile,
    attack: AttackParams | None,
    rng_seed: int,
    pair_id: str = "pair",
    subject_id: str = "subject",
) -> PressPair:
    """Generate one labeled press pair.

    Normal mode: interval from the subject's habit model, both presses with
    natural jitter, two different fingers. Attack mode: with probability
    ``channel_mix`` only the interval shifts; otherwise only the second
    press carries the full image perturbation.
    """
    ss = np.random.SeedSequence(rng_seed)
    rng_flow, seed_img1, seed_img2 = ss.spawn(3)
    rng = np.random.default_rng(rng_flow)

    press1 = _natural_press(rng, profile)
    press2 = _natural_press(rng, profile)
    shift = 0.0
    if attack is not None:
        if rng.uniform() < attack.channel_mix:
            shift = attack.interval_shift_sigmas
        else:
            press2 = _attack_press(rng, profile, attack)
    interval_s = _sample_interval(rng, profile, shift)

    img1 = gen_fingerprint_image(
        _finger_profile(profile, 1), press1, int(seed_img1.generate_state(1)[0])
    )
    img2 = gen_fingerprint_image(
        _finger_profile(profile, 2), press2, int(seed_img2.generate_state(1)[0])
    )
    t1 = CaptureInstant(
        _T1_BASE.micros_since_epoch + int(rng.integers(0, 86_400_000_000))
    )
    t2 = CaptureInstant(t1.micros_since_epoch + int(round(interval_s * 1e6)))
    label = Label.LEGITIMATE if attack is None else Label.ATTACK
    return PressPair(
        pair_id,
        subject_id,
        GrayImage(img1.pixels, source_id=f"{pair_id}_1"),
        GrayImage(img2.pixels, source_id=f"{pair_id}_2"),
        t1,
        t2,
        label,
    )


def make_profiles(n_subjects: int, seed: int) -> list[SubjectProfile]:
    """Distinct per-subject profiles, deterministic per seed.

    Subjects share a similar habitual tempo (the protocol asks for a
    continuous, natural double press) so the pooled standardizer keeps
    per-subject deviations visible; textures differ per subject.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5EED)))
    profiles = []
    for i in range(n_subjects):
        profiles.append(
            SubjectProfile(
                ridge_frequency=rng.uniform(0.11, 0.15),
                ridge_orientation_field_seed=int(rng.integers(0, 2**31)) * 100 + i,
                base_interval_mean=rng.uniform(1.68, 1.72),
                base_interval_std=rng.uniform(0.14, 0.16),
                base_pressure=rng.uniform(0.85, 1.0),
            )
        )
    return profiles


def gen_dataset(
    n_normal: int,
    n_attack: int,
    n_subjects: int,
    attack: AttackParams,
    seed: int,
    out_dir: str,
    profile_seed: int | None = None,
) -> Dataset:
    """Write a labeled synthetic dataset directory and return it loaded.

    Subjects rotate round-robin over pairs; outputs (manifest included) are
    byte-identical for identical arguments. ``profile_seed`` pins the
    subject population independently of the pair randomness, so a training
    set and a test set can share subjects (the enrolled-user protocol)
    without sharing any pairs.
    """
    if n_normal < 0 or n_attack < 0:
        raise ValueError("pair counts must be non-negative")
    if n_subjects < 1:
        raise ValueError("need at least one subject")
    profiles = make_profiles(
        n_subjects, seed if profile_seed is None else profile_seed
    )
    pair_seeds = np.random.SeedSequence((seed, 0xA77AC)).spawn(n_normal + n_attack)
    pairs = []
    for i in range(n_normal + n_attack):
        is_attack = i >= n_normal
        pairs.append(
            gen_press_pair(
                profiles[i % n_subjects],
                attack if is_attack else None,
                int(pair_seeds[i].generate_state(1)[0]),
                # the seed prefix keeps ids (and image stems) unique across
                # datasets, so one embedding file can cover train and test
                pair_id=f"d{seed}p{i:05d}",
                subject_id=f"s{i % n_subjects:03d}",
            )
        )
    ds = Dataset(tuple(pairs))
    write_dataset(ds, out_dir)
    return load_dataset(out_dir)
