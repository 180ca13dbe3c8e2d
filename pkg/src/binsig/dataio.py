"""Trial datasets: in-memory model, TRL1 binary serialization, CSV import and
a seeded synthetic generator.

TRL1 layout (little-endian): magic ``TRL1``, version u32, n_trials u32,
n_ch u32, n_s u32, n_cl u32, sample_rate f64, then per trial a label u32
followed by n_ch * n_s samples as f32 in channel-major order.  Samples are
f32 on disk and f64 in memory; loaders quantize through f32 so write/read
round-trips are bit-exact.  ``Dataset.metadata`` is an in-memory annotation
map and is not persisted (TRL1 has no metadata section); equality ignores it.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

TRL_MAGIC = b"TRL1"
TRL_VERSION = 1
_HEADER = struct.Struct("<4sIIIIId")


class FormatError(Exception):
    """Malformed or truncated on-disk data; the CLI maps this to exit code 2."""


@dataclass
class Trial:
    """One labeled multichannel recording, samples shaped (n_ch, n_s)."""

    samples: np.ndarray
    label: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise ValueError("samples must be 2-d (channels x samples)")
        if self.samples.shape[0] < 1:
            raise ValueError("need at least one channel")
        if self.samples.shape[1] < 2:
            raise ValueError("need at least two samples per channel")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")
        if self.label < 0:
            raise ValueError("label must be non-negative")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trial):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.samples, other.samples)


@dataclass
class Dataset:
    """A list of equally-shaped trials plus the label-space size."""

    trials: list[Trial]
    n_cl: int
    sample_rate: float
    n_ch: int = 0
    n_s: int = 0
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_cl < 1:
            raise ValueError("n_cl must be at least 1")
        if not self.sample_rate > 0.0:
            raise ValueError("sample_rate must be positive")
        if self.trials:
            shape = self.trials[0].samples.shape
            for t in self.trials:
                if t.samples.shape != shape:
                    raise ValueError("all trials must share one shape")
                if t.label >= self.n_cl:
                    raise ValueError("trial label out of range")
            self.n_ch, self.n_s = shape
        else:
            if self.n_ch < 0 or self.n_s < 0:
                raise ValueError("shape fields must be non-negative")

    def __len__(self) -> int:
        return len(self.trials)

    def labels(self) -> np.ndarray:
        return np.array([t.label for t in self.trials], dtype=np.int64)

    def classes_present(self) -> set[int]:
        return {t.label for t in self.trials}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.n_cl == other.n_cl
            and self.sample_rate == other.sample_rate
            and self.n_ch == other.n_ch
            and self.n_s == other.n_s
            and self.trials == other.trials
        )


def write_dataset(ds: Dataset, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                TRL_MAGIC,
                TRL_VERSION,
                len(ds.trials),
                ds.n_ch,
                ds.n_s,
                ds.n_cl,
                ds.sample_rate,
            )
        )
        for t in ds.trials:
            fh.write(struct.pack("<I", t.label))
            fh.write(np.ascontiguousarray(t.samples, dtype="<f4").tobytes())


def read_dataset(path: str) -> Dataset:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError("truncated header")
    magic, version, n_trials, n_ch, n_s, n_cl, sample_rate = _HEADER.unpack_from(raw, 0)
    if magic != TRL_MAGIC:
        raise FormatError("bad magic")
    if version != TRL_VERSION:
        raise FormatError("unsupported version %d" % version)
    if n_trials > 0 and (n_ch < 1 or n_s < 2):
        raise FormatError("invalid trial shape in header")
    if n_cl < 1:
        raise FormatError("invalid class count")
    if not sample_rate > 0.0 or not np.isfinite(sample_rate):
        raise FormatError("invalid sample rate")
    trial_bytes = 4 + 4 * n_ch * n_s
    expected = _HEADER.size + n_trials * trial_bytes
    if len(raw) != expected:
        raise FormatError("file size mismatch (expected %d bytes, got %d)" % (expected, len(raw)))
    trials = []
    off = _HEADER.size
    for _ in range(n_trials):
        (label,) = struct.unpack_from("<I", raw, off)
        off += 4
        if label >= n_cl:
            raise FormatError("trial label out of range")
        flat = np.frombuffer(raw, dtype="<f4", count=n_ch * n_s, offset=off)
        off += 4 * n_ch * n_s
        samples = flat.astype(np.float64).reshape(n_ch, n_s)
        if not np.all(np.isfinite(samples)):
            raise FormatError("non-finite sample values")
        trials.append(Trial(samples=samples, label=int(label)))
    return Dataset(
        trials=trials, n_cl=int(n_cl), sample_rate=float(sample_rate),
        n_ch=int(n_ch), n_s=int(n_s),
    )


def import_csv(path: str, n_ch: int, sample_rate: float) -> Dataset:
    """Import rows of ``label, samples...`` with channel-major sample order.

    The label column must be a non-negative integer; the class count is
    inferred as max(label) + 1.  Sample values are quantized through f32 to
    match the on-disk precision.
    """
    if n_ch < 1:
        raise ValueError("n_ch must be at least 1")
    if not sample_rate > 0.0:
        raise ValueError("sample_rate must be positive")
    trials = []
    width = None
    with open(path, "r", newline="") as fh:
        for row_idx, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if width is None:
                width = len(row)
                if (width - 1) % n_ch != 0 or width - 1 < 2 * n_ch:
                    raise ValueError(
                        "row width %d does not fit %d channels" % (width, n_ch)
                    )
            elif len(row) != width:
                raise ValueError("row %d width differs from first row" % row_idx)
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise ValueError("non-numeric cell in row %d" % row_idx) from None
            label = values[0]
            if label != int(label) or label < 0:
                raise ValueError("label in row %d must be a non-negative integer" % row_idx)
            n_s = (width - 1) // n_ch
            samples = (
                np.asarray(values[1:], dtype=np.float32)
                .astype(np.float64)
                .reshape(n_ch, n_s)
            )
            trials.append(Trial(samples=samples, label=int(label)))
    if not trials:
        raise ValueError("no data rows in %s" % path)
    n_cl = max(t.label for t in trials) + 1
    return Dataset(trials=trials, n_cl=n_cl, sample_rate=float(sample_rate))


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic SPD-class generator."""

    n_cl: int = 4
    n_ch: int = 8
    n_s: int = 250
    trials_per_class: int = 24
    sample_rate: float = 250.0
    class_separation: float = 1.0
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_cl < 1:
            raise ValueError("n_cl must be at least 1")
        if self.n_ch < 1:
            raise ValueError("n_ch must be at least 1")
        if self.n_s < 2:
            raise ValueError("n_s must be at least 2")
        if self.trials_per_class < 0:
            raise ValueError("trials_per_class must be non-negative")
        if not self.sample_rate > 0.0:
            raise ValueError("sample_rate must be positive")
        if self.class_separation < 0.0:
            raise ValueError("class_separation must be non-negative")
        if not self.noise_scale > 0.0:
            raise ValueError("noise_scale must be positive")


_EIGENVALUE_FLOOR = 0.05


def _draw_class_covariances(rng: np.random.Generator, spec: SynthSpec) -> list[np.ndarray]:
    out = []
    for _ in range(spec.n_cl):
        p = rng.standard_normal((spec.n_ch, spec.n_ch))
        p = (p + p.T) / (2.0 * np.sqrt(spec.n_ch))
        sigma = np.eye(spec.n_ch) + spec.class_separation * p
        vals, vecs = np.linalg.eigh(sigma)
        vals = np.clip(vals, _EIGENVALUE_FLOOR, None)
        sigma = (vecs * vals) @ vecs.T
        out.append((sigma + sigma.T) / 2.0)
    return out


def _structure_rng(spec: SynthSpec) -> np.random.Generator:
    # The class structure plays the role of a recording subject: it is keyed
    # by (n_cl, n_ch, class_separation) and deliberately not by seed, so
    # datasets generated from different seeds (e.g. a train/test session
    # pair) sample the same ground-truth classes.
    sep_bits = int(np.float64(spec.class_separation).view(np.uint64))
    return np.random.default_rng(
        np.random.SeedSequence([spec.n_cl, spec.n_ch, sep_bits])
    )


def class_covariances(spec: SynthSpec) -> list[np.ndarray]:
    """The ground-truth per-class SPD matrices the generator samples from."""
    return _draw_class_covariances(_structure_rng(spec), spec)


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Deterministic synthetic dataset of Gaussian trials.

    Each class c draws a ground-truth SPD matrix (identity plus a
    class_separation-scaled random symmetric perturbation, eigenvalue-floored)
    and emits trials whose columns are i.i.d. zero-mean Gaussian samples with
    covariance noise_scale * Sigma_c.  The class matrices depend only on
    (n_cl, n_ch, class_separation), so different seeds act as independent
    recording sessions of one synthetic subject.  Trials are interleaved
    round-robin over classes; two calls with an equal spec produce identical
    datasets.
    """
    rng = np.random.default_rng(spec.seed)
    sigmas = _draw_class_covariances(_structure_rng(spec), spec)
    chols = [np.linalg.cholesky(spec.noise_scale * s) for s in sigmas]
    trials = []
    for _ in range(spec.trials_per_class):
        for c in range(spec.n_cl):
            z = rng.standard_normal((spec.n_ch, spec.n_s))
            samples = (chols[c] @ z).astype(np.float32).astype(np.float64)
            trials.append(Trial(samples=samples, label=c))
    return Dataset(
        trials=trials,
        n_cl=spec.n_cl,
        sample_rate=spec.sample_rate,
        n_ch=spec.n_ch,
        n_s=spec.n_s,
    )
