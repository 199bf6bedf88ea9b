"""On-disk dataset format, capture timestamps, press pairs and splits.

A dataset directory looks like::

    dataset/
      manifest.csv   # header: pair_id,subject_id,img1,img2,t1,t2,label
      images/*.pgm   # P5, 160x160, maxval 255

Timestamps use the textual format ``yyyymmddHHMMSS.xxxxxx`` (six fractional
digits, microsecond resolution) and are treated as naive local time; only
differences between the two instants of a pair are ever consumed, so absolute
epoch alignment does not matter.
"""

from __future__ import annotations

import csv
import enum
import math
import os
import re
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .errors import DatasetError, TimestampError

CANONICAL_SIZE = 160

MANIFEST_NAME = "manifest.csv"
MANIFEST_HEADER = ["pair_id", "subject_id", "img1", "img2", "t1", "t2", "label"]

_EPOCH = datetime(1970, 1, 1)
_TS_RE = re.compile(r"^(\d{4})(\d{2})(\d{2})(\d{2})(\d{2})(\d{2})\.(\d{6})$")


class Label(enum.Enum):
    LEGITIMATE = "legit"
    ATTACK = "attack"
    UNLABELED = ""


@dataclass(frozen=True)
class CaptureInstant:
    """A capture moment, in integer microseconds since the epoch."""

    micros_since_epoch: int

    def __post_init__(self):
        if self.micros_since_epoch < 0:
            raise TimestampError("capture instant before epoch", field="year")

    def __sub__(self, other: "CaptureInstant") -> int:
        """Signed difference in microseconds."""
        return self.micros_since_epoch - other.micros_since_epoch

    def format(self) -> str:
        dt = _EPOCH + timedelta(microseconds=self.micros_since_epoch)
        return dt.strftime("%Y%m%d%H%M%S") + ".%06d" % dt.microsecond


def parse_timestamp(text: str) -> CaptureInstant:
    """Parse ``yyyymmddHHMMSS.xxxxxx`` into a :class:`CaptureInstant`.

    Formatting the result reproduces the input byte for byte. Malformed input
    raises :class:`TimestampError` naming the offending field.
    """
    m = _TS_RE.match(text)
    if m is None:
        raise TimestampError(
            f"timestamp {text!r} does not match yyyymmddHHMMSS.xxxxxx",
            field="format",
        )
    year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
    micros = int(m.group(7))
    for name, value, lo, hi in (
        ("year", year, 1970, 9999),
        ("month", month, 1, 12),
        ("hour", hour, 0, 23),
        ("minute", minute, 0, 59),
        ("second", second, 0, 59),
    ):
        if not lo <= value <= hi:
            raise TimestampError(
                f"timestamp {text!r}: {name} {value} out of range [{lo}, {hi}]",
                field=name,
            )
    try:
        dt = datetime(year, month, day, hour, minute, second)
    except ValueError:
        # the civil calendar rejects the day (month length, leap years)
        raise TimestampError(
            f"timestamp {text!r}: day {day} invalid for {year}-{month:02d}",
            field="day",
        ) from None
    total = (dt - _EPOCH) // timedelta(microseconds=1) + micros
    return CaptureInstant(total)


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image; ``pixels`` is a row-major (height, width) array."""

    pixels: np.ndarray
    source_id: str | None = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.dtype != np.uint8:
            raise ValueError("GrayImage expects a 2-D uint8 array")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class PressPair:
    """One authentication attempt: two presses plus their capture instants."""

    pair_id: str
    subject_id: str
    first: GrayImage
    second: GrayImage
    t1: CaptureInstant
    t2: CaptureInstant
    label: Label = Label.UNLABELED


@dataclass(frozen=True)
class Dataset:
    pairs: tuple[PressPair, ...]
    source_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def labels(self) -> dict[str, Label]:
        return {p.pair_id: p.label for p in self.pairs}


def press_interval(pair: PressPair) -> float:
    """Inter-press interval in real seconds (microsecond resolution)."""
    delta = pair.t2 - pair.t1
    if delta < 0:
        raise DatasetError(
            f"pair {pair.pair_id}: t2 precedes t1 (data corruption?)"
        )
    return delta / 1e6


# ---------------------------------------------------------------------------
# PGM (P5) image files


def read_pgm(path: str) -> GrayImage:
    """Read a binary (P5) PGM file with maxval 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        m = re.compile(rb"\s*(?:#[^\n]*\n)*\s*(\S+)").match(data, pos)
        if m is None:
            raise DatasetError(f"{path}: truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise DatasetError(f"{path}: not a binary PGM (P5) file")
    try:
        width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError:
        raise DatasetError(f"{path}: non-numeric PGM header") from None
    if maxval != 255:
        raise DatasetError(f"{path}: unsupported maxval {maxval} (expected 255)")
    raster = data[pos + 1 : pos + 1 + width * height]
    if len(raster) != width * height:
        raise DatasetError(f"{path}: raster truncated")
    px = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    stem = os.path.splitext(os.path.basename(path))[0]
    return GrayImage(px.copy(), source_id=stem)


def write_pgm(path: str, image: GrayImage | np.ndarray) -> None:
    px = image.pixels if isinstance(image, GrayImage) else np.asarray(image)
    if px.dtype != np.uint8 or px.ndim != 2:
        raise ValueError("write_pgm expects a 2-D uint8 array")
    h, w = px.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(px.tobytes())


# ---------------------------------------------------------------------------
# Manifest loading


def load_dataset(dir_path: str) -> Dataset:
    """Load a dataset directory; every manifest row becomes one press pair.

    Row order is preserved. Images are validated to 160x160 8-bit. All
    failures report the offending manifest row number (header = row 1).
    """
    manifest = os.path.join(dir_path, MANIFEST_NAME)
    if not os.path.isfile(manifest):
        raise DatasetError(f"missing {MANIFEST_NAME} in {dir_path}")
    pairs: list[PressPair] = []
    seen_ids: set[str] = set()
    with open(manifest, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{manifest}: empty file", row=1) from None
        if header != MANIFEST_HEADER:
            raise DatasetError(
                f"{manifest}: bad header {header!r}, expected {MANIFEST_HEADER!r}",
                row=1,
            )
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise DatasetError(
                    f"{manifest}: row {row_no} has {len(row)} fields", row=row_no
                )
            pair_id, subject_id, img1, img2, t1_text, t2_text, label_text = row
            if pair_id in seen_ids:
                raise DatasetError(
                    f"{manifest}: row {row_no}: duplicate pair_id {pair_id!r}",
                    row=row_no,
                )
            seen_ids.add(pair_id)
            try:
                t1 = parse_timestamp(t1_text)
                t2 = parse_timestamp(t2_text)
            except TimestampError as exc:
                raise DatasetError(
                    f"{manifest}: row {row_no}: {exc}", row=row_no
                ) from exc
            if t2 - t1 < 0:
                raise DatasetError(
                    f"{manifest}: row {row_no}: t2 precedes t1", row=row_no
                )
            try:
                label = Label(label_text)
            except ValueError:
                raise DatasetError(
                    f"{manifest}: row {row_no}: unknown label {label_text!r}",
                    row=row_no,
                ) from None
            images = []
            for rel in (img1, img2):
                path = os.path.join(dir_path, rel)
                if not os.path.isfile(path):
                    raise DatasetError(
                        f"{manifest}: row {row_no}: missing image {path}",
                        row=row_no,
                    )
                try:
                    img = read_pgm(path)
                except DatasetError as exc:
                    raise DatasetError(
                        f"{manifest}: row {row_no}: {exc}", row=row_no
                    ) from exc
                if img.width != CANONICAL_SIZE or img.height != CANONICAL_SIZE:
                    raise DatasetError(
                        f"{manifest}: row {row_no}: {path} is "
                        f"{img.width}x{img.height}, expected "
                        f"{CANONICAL_SIZE}x{CANONICAL_SIZE}",
                        row=row_no,
                    )
                images.append(img)
            pairs.append(
                PressPair(pair_id, subject_id, images[0], images[1], t1, t2, label)
            )
    return Dataset(tuple(pairs), source_dir=dir_path)


def write_dataset(ds: Dataset, dir_path: str) -> None:
    """Write a dataset directory in the manifest + PGM layout."""
    images_dir = os.path.join(dir_path, "images")
    os.makedirs(images_dir, exist_ok=True)
    with open(
        os.path.join(dir_path, MANIFEST_NAME), "w", newline="", encoding="utf-8"
    ) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for pair in ds.pairs:
            rel1 = f"images/{pair.pair_id}_1.pgm"
            rel2 = f"images/{pair.pair_id}_2.pgm"
            write_pgm(os.path.join(dir_path, rel1), pair.first)
            write_pgm(os.path.join(dir_path, rel2), pair.second)
            writer.writerow(
                [
                    pair.pair_id,
                    pair.subject_id,
                    rel1,
                    rel2,
                    pair.t1.format(),
                    pair.t2.format(),
                    pair.label.value,
                ]
            )


# ---------------------------------------------------------------------------
# Splits


def split_dataset(
    ds: Dataset,
    train_fraction: float,
    seed: int,
    by_subject: bool = False,
) -> tuple[Dataset, Dataset]:
    """Deterministic train/eval split.

    A seeded uniform shuffle is computed once per seed and the training set is
    a prefix of it, so smaller fractions are nested inside larger ones
    (0.2 of the data is a subset of the 0.4 split for the same seed).

    ``by_subject`` keeps every subject's pairs on one side of the split; the
    prefix is then taken over shuffled subjects and the training size matches
    the requested fraction only approximately.
    """
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train_fraction {train_fraction} outside (0, 1]")
    if len(ds) == 0:
        raise ValueError("cannot split an empty dataset")
    rng = np.random.default_rng(seed)
    n_train = int(math.floor(train_fraction * len(ds) + 0.5))
    if by_subject:
        subjects = sorted({p.subject_id for p in ds.pairs})
        order = [subjects[i] for i in rng.permutation(len(subjects))]
        counts = {s: sum(1 for p in ds.pairs if p.subject_id == s) for s in subjects}
        train_subjects: set[str] = set()
        total = 0
        for s in order:
            if total >= n_train:
                break
            train_subjects.add(s)
            total += counts[s]
        train = [p for p in ds.pairs if p.subject_id in train_subjects]
        hold = [p for p in ds.pairs if p.subject_id not in train_subjects]
        return Dataset(tuple(train), ds.source_dir), Dataset(tuple(hold), ds.source_dir)
    perm = rng.permutation(len(ds))
    train_idx = set(perm[:n_train].tolist())
    train = [p for i, p in enumerate(ds.pairs) if i in train_idx]
    hold = [p for i, p in enumerate(ds.pairs) if i not in train_idx]
    return Dataset(tuple(train), ds.source_dir), Dataset(tuple(hold), ds.source_dir)
