"""End-to-end fit / predict / evaluate orchestration.

Fit: optional crop, filter bank, per-band covariances, per-band geometric
mean references, tangent-space features, then one of three back ends:

  svm_float      linear SVM on the raw real features (reference backend);
                 weights are quantized to float16 storage precision at fit
                 time so a saved and reloaded model predicts identically
  svm_binarized  features go through the configured random projection (or a
                 componentwise Heaviside when projection is disabled), the
                 SVM trains on the bipolar-mapped bits, and the weights
                 collapse to packed Hamming prototypes
  binmem         the first `shots` encoded trials of each class, in dataset
                 order, are written to a key-value memory

Everything is deterministic for a fixed (config, dataset): threads only
distribute independent per-trial or per-class work.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import accounting, modelio, svm
from .dataio import Dataset, FormatError, Trial
from .filterbank import BandSpec, FilterBank, apply_bank, design_bank
from .memory import DEFAULT_BETA, KeyValueMemory, classify, write_support
from .projection import (
    KIND_SPARSE,
    BinaryVector,
    ProjectionSpec,
    heaviside_bits,
    project_binarize,
)
from .spd import (
    ReferenceSet,
    SpdMatrix,
    covariance,
    fit_reference,
    n_feature_pairs,
    riemannian_features,
)

BACKENDS = ("svm_float", "svm_binarized", "binmem")


@dataclass(frozen=True)
class ProjectionParams:
    """Projection configuration; the feature count is bound at fit time."""

    kind: str = KIND_SPARSE
    dim: int = 100_000
    sparsity: float = 0.9
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    backend: str = "svm_binarized"
    bands: tuple[BandSpec, ...] | None = None
    alpha: float = 0.1
    projection: ProjectionParams | None = ProjectionParams()
    reg_c: float = 1.0
    beta: float = DEFAULT_BETA
    shots: int = 8
    crop: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(
                "unknown backend %r (choose from %s)" % (self.backend, ", ".join(BACKENDS))
            )
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.reg_c <= 0.0:
            raise ValueError("reg_c must be positive")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.crop is not None:
            start, length = self.crop
            if start < 0 or length < 2:
                raise ValueError("crop needs start >= 0 and length >= 2")


@dataclass
class FittedModel:
    backend: str
    n_cl: int
    n_ch: int
    sample_rate: float
    alpha: float
    crop: tuple[int, int] | None
    bank: FilterBank
    refs: ReferenceSet
    projection: ProjectionSpec | None
    classifier: svm.SvmModel | svm.BinarizedSvm | KeyValueMemory

    def __post_init__(self) -> None:
        self._inv_sqrts = None

    @property
    def n_features(self) -> int:
        return self.bank.n_bands * n_feature_pairs(self.n_ch)

    def inv_sqrts(self) -> list[np.ndarray]:
        if self._inv_sqrts is None:
            self._inv_sqrts = self.refs.inv_sqrts()
        return self._inv_sqrts


def _crop_samples(samples: np.ndarray, crop: tuple[int, int] | None) -> np.ndarray:
    if crop is None:
        return samples
    start, length = crop
    if start + length > samples.shape[1]:
        raise ValueError(
            "crop (%d, %d) exceeds trial length %d" % (start, length, samples.shape[1])
        )
    return samples[:, start : start + length]


def _band_covariances(
    bank: FilterBank, samples: np.ndarray, alpha: float
) -> list[SpdMatrix]:
    filtered = apply_bank(bank, samples)
    return [covariance(filtered[b], alpha) for b in range(bank.n_bands)]


def trial_features(model: FittedModel, samples: np.ndarray) -> np.ndarray:
    """Tangent-space feature vector for one trial's raw samples."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] != model.n_ch:
        raise ValueError(
            "feature dimension mismatch (expected %d channels, got %d)"
            % (model.n_ch, samples.shape[0] if samples.ndim == 2 else -1)
        )
    samples = _crop_samples(samples, model.crop)
    covs = _band_covariances(model.bank, samples, model.alpha)
    return riemannian_features(covs, model.inv_sqrts())


def encode_features(model: FittedModel, feats: np.ndarray) -> BinaryVector:
    """Binary embedding of a feature vector: projection when configured,
    otherwise the componentwise Heaviside of the raw features."""
    if model.projection is not None:
        return project_binarize(model.projection, feats)
    return heaviside_bits(feats)


def _map_ordered(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def fit(config: PipelineConfig, train: Dataset, threads: int = 1) -> FittedModel:
    """Train a model bundle; deterministic given (config, train)."""
    if len(train.trials) == 0:
        raise ValueError("training set is empty")
    n_cl = train.n_cl
    if n_cl < 2:
        raise ValueError("need at least two classes")
    labels = train.labels()
    present = set(int(v) for v in labels)
    missing = [c for c in range(n_cl) if c not in present]
    if missing:
        raise ValueError("class %d missing from training data" % missing[0])

    bank = design_bank(config.bands, train.sample_rate)
    cropped = [_crop_samples(t.samples, config.crop) for t in train.trials]

    def covs_for(samples: np.ndarray) -> list[SpdMatrix]:
        return _band_covariances(bank, samples, config.alpha)

    per_trial_covs = _map_ordered(covs_for, cropped, threads)
    per_band_covs = [
        [trial_covs[b] for trial_covs in per_trial_covs]
        for b in range(bank.n_bands)
    ]
    refs = fit_reference(per_band_covs)
    inv_sqrts = refs.inv_sqrts()

    def feats_for(trial_covs: list[SpdMatrix]) -> np.ndarray:
        return riemannian_features(trial_covs, inv_sqrts)

    feats = np.stack(_map_ordered(feats_for, per_trial_covs, threads))
    n_f = feats.shape[1]

    proj = None
    if config.projection is not None and config.backend != "svm_float":
        p = config.projection
        proj = ProjectionSpec(
            kind=p.kind, dim=p.dim, n_features=n_f, sparsity=p.sparsity, seed=p.seed
        )

    if config.backend == "svm_float":
        # Train on unit-norm rows so every trial constrains the margin
        # equally (the bipolar paths have constant-norm features by
        # construction).  Decisions are scale-invariant, so prediction
        # still consumes raw features.
        norms = np.linalg.norm(feats, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("degenerate training trial (zero feature vector)")
        model = svm.train_linear_svm(
            feats / norms, labels, n_cl, reg_c=config.reg_c, threads=threads
        )
        # Snap to storage precision so a saved model reloads bit-identically.
        snapped = model.weights.astype("<f2").astype(np.float64)
        classifier: object = replace(model, weights=snapped)
    else:
        if proj is not None:
            encoded = _map_ordered(
                lambda f: project_binarize(proj, f), list(feats), threads
            )
        else:
            encoded = [heaviside_bits(f) for f in feats]
        if config.backend == "svm_binarized":
            bipolar = np.stack([e.to_bipolar() for e in encoded])
            trained = svm.train_bipolar_svm(
                bipolar, labels, n_cl, reg_c=config.reg_c, threads=threads
            )
            classifier = svm.binarize_svm(trained)
        else:
            keys = []
            key_labels = []
            for c in range(n_cl):
                idx = [i for i, v in enumerate(labels) if int(v) == c]
                if len(idx) < config.shots:
                    raise ValueError(
                        "class %d has %d trials, need %d shots"
                        % (c, len(idx), config.shots)
                    )
                for i in idx[: config.shots]:
                    keys.append(encoded[i])
                    key_labels.append(c)
            classifier = write_support(
                keys, np.asarray(key_labels), n_cl, beta=config.beta
            )

    return FittedModel(
        backend=config.backend,
        n_cl=n_cl,
        n_ch=train.n_ch,
        sample_rate=train.sample_rate,
        alpha=config.alpha,
        crop=config.crop,
        bank=bank,
        refs=refs,
        projection=proj,
        classifier=classifier,
    )


def predict_trial(model: FittedModel, trial: Trial | np.ndarray) -> int:
    samples = trial.samples if isinstance(trial, Trial) else trial
    feats = trial_features(model, samples)
    if model.backend == "svm_float":
        return svm.decide_float(model.classifier, feats)[0]
    encoded = encode_features(model, feats)
    if model.backend == "svm_binarized":
        return svm.decide_binary(model.classifier, encoded)[0]
    return classify(model.classifier, encoded)[0]


def predict_dataset(model: FittedModel, data: Dataset, threads: int = 1) -> np.ndarray:
    preds = _map_ordered(
        lambda t: predict_trial(model, t), list(data.trials), threads
    )
    return np.asarray(preds, dtype=np.int64)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    per_class: np.ndarray  # per-class accuracy, NaN for absent classes
    confusion: np.ndarray  # rows true class, columns predicted
    predictions: np.ndarray
    cost: accounting.CostReport

    def to_dict(self) -> dict:
        per_class = [
            None if np.isnan(v) else v for v in self.per_class.tolist()
        ]
        return {
            "accuracy": self.accuracy,
            "per_class": per_class,
            "confusion": self.confusion.tolist(),
            "predictions": self.predictions.tolist(),
            "n_trials": int(self.predictions.size),
            "cost": self.cost.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def cost_report(model: FittedModel, n_s: int) -> accounting.CostReport:
    """Per-inference cost of a fitted model on trials of n_s samples."""
    n_b = model.bank.n_bands
    front = accounting.macs_riemannian(model.n_ch, n_s, n_b)
    stages = [
        accounting.CostStage(
            "bandpass filter", front["filter"], accounting.footprint_filter(n_b),
            "5 MACs per biquad per sample; float16 coefficients",
        ),
        accounting.CostStage(
            "covariance", front["covariance"], 0, "upper triangle, n_s MACs per entry",
        ),
        accounting.CostStage(
            "whitening", front["whitening"],
            accounting.footprint_reference_matrices(model.n_ch, n_b),
            "2*n_ch^2 per band (reference constant); packed float16 references",
        ),
        accounting.CostStage(
            "matrix logarithm", front["logm"], 0,
            "EVD-complexity estimate round(26/3*n_ch^3) per band",
        ),
    ]
    if model.projection is not None:
        p = model.projection
        stages.append(
            accounting.CostStage(
                "projection",
                accounting.macs_projection(p.dim, p.n_features, p.sparsity),
                accounting.footprint_projection(),
                "rematerialized from the 32-bit seed",
            )
        )
    cls = model.classifier
    if model.backend == "svm_float":
        stages.append(
            accounting.CostStage(
                "classification",
                accounting.macs_linear_svm(cls.n_features, cls.n_cl),
                accounting.footprint_float_weights(cls.n_cl * cls.n_features),
                "one inner product per class; float16 weights",
            )
        )
    elif model.backend == "svm_binarized":
        stages.append(
            accounting.CostStage(
                "classification",
                accounting.macs_hamming_classify(cls.dim, cls.n_cl, 0),
                accounting.footprint_binary(cls.n_cl * cls.dim),
                "Hamming argmin over packed prototypes",
            )
        )
    else:
        stages.append(
            accounting.CostStage(
                "classification",
                accounting.macs_hamming_classify(cls.dim, cls.n_keys, cls.n_keys),
                accounting.footprint_binary(cls.n_keys * cls.dim),
                "key-memory attention plus one readout MAC per key",
            )
        )
    return accounting.CostReport(
        title="fitted pipeline (%s)" % model.backend, stages=tuple(stages)
    )


def evaluate(model: FittedModel, test: Dataset, threads: int = 1) -> EvalReport:
    if len(test.trials) == 0:
        raise ValueError("empty evaluation set")
    preds = predict_dataset(model, test, threads)
    labels = test.labels()
    n_cl = model.n_cl
    if labels.max() >= n_cl:
        raise ValueError("test labels exceed the model's class count")
    confusion = np.zeros((n_cl, n_cl), dtype=np.int64)
    for t, p in zip(labels, preds):
        confusion[int(t), int(p)] += 1
    row_totals = confusion.sum(axis=1)
    per_class = np.full(n_cl, np.nan)
    nonzero = row_totals > 0
    per_class[nonzero] = np.diag(confusion)[nonzero] / row_totals[nonzero]
    accuracy = float(np.trace(confusion)) / float(len(test.trials))
    n_s = model.crop[1] if model.crop is not None else test.n_s
    return EvalReport(
        accuracy=accuracy,
        per_class=per_class,
        confusion=confusion,
        predictions=preds,
        cost=cost_report(model, n_s),
    )


def save_model(model: FittedModel, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(modelio.MDL_MAGIC)
        modelio._write_u32(fh, modelio.MDL_VERSION)
        modelio._write_u8(fh, modelio.BACKEND_CODES[model.backend])
        modelio._write_u32(fh, model.n_cl)
        modelio._write_u32(fh, model.n_ch)
        modelio._write_f64(fh, model.sample_rate)
        modelio._write_f64(fh, model.alpha)
        if model.crop is None:
            modelio._write_u8(fh, 0)
        else:
            modelio._write_u8(fh, 1)
            modelio._write_u32(fh, model.crop[0])
            modelio._write_u32(fh, model.crop[1])
        modelio._write_u32(fh, model.bank.n_bands)
        for band in model.bank.bands:
            modelio._write_f64(fh, band.low_hz)
            modelio._write_f64(fh, band.high_hz)
        for ref in model.refs.refs:
            modelio.write_reference(fh, ref)
        modelio.write_projection_spec(fh, model.projection)
        if model.backend == "binmem":
            modelio.write_memory_payload(fh, model.classifier)
        else:
            modelio.write_svm_payload(fh, model.classifier)


def load_model(path: str) -> FittedModel:
    """Rebuild a FittedModel from an MDL1 file.

    Filter coefficients are re-derived from the stored band edges, and the
    projection is rematerialized from its seed.  Reference convergence
    diagnostics are not persisted; loaded references report converged.
    """
    with open(path, "rb") as fh:
        magic = modelio._read_exact(fh, len(modelio.MDL_MAGIC), "magic")
        if magic != modelio.MDL_MAGIC:
            raise FormatError("bad model magic %r" % magic)
        version = modelio._read_u32(fh, "version")
        if version != modelio.MDL_VERSION:
            raise FormatError("unsupported model version %d" % version)
        code = modelio._read_u8(fh, "backend")
        if code not in modelio.BACKEND_NAMES:
            raise FormatError("unknown backend code %d" % code)
        backend = modelio.BACKEND_NAMES[code]
        n_cl = modelio._read_u32(fh, "class count")
        n_ch = modelio._read_u32(fh, "channel count")
        sample_rate = modelio._read_f64(fh, "sample rate")
        alpha = modelio._read_f64(fh, "alpha")
        if n_cl < 2 or n_ch < 1:
            raise FormatError("invalid model dimensions")
        if not np.isfinite(sample_rate) or sample_rate <= 0.0:
            raise FormatError("invalid sample rate")
        if not np.isfinite(alpha) or alpha <= 0.0:
            raise FormatError("invalid alpha")
        crop = None
        crop_flag = modelio._read_u8(fh, "crop flag")
        if crop_flag == 1:
            start = modelio._read_u32(fh, "crop start")
            length = modelio._read_u32(fh, "crop length")
            crop = (start, length)
        elif crop_flag != 0:
            raise FormatError("bad crop flag %d" % crop_flag)
        n_bands = modelio._read_u32(fh, "band count")
        if n_bands < 1:
            raise FormatError("invalid band count")
        bands = []
        for _ in range(n_bands):
            low = modelio._read_f64(fh, "band low")
            high = modelio._read_f64(fh, "band high")
            try:
                bands.append(BandSpec(low_hz=low, high_hz=high))
            except ValueError as exc:
                raise FormatError(str(exc)) from exc
        try:
            bank = design_bank(tuple(bands), sample_rate)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
        refs = []
        for _ in range(n_bands):
            ref = modelio.read_reference(fh)
            if ref.n != n_ch:
                raise FormatError("reference size does not match channel count")
            refs.append(ref)
        projection = modelio.read_projection_spec(fh)
        if backend == "binmem":
            classifier: object = modelio.read_memory_payload(fh)
        else:
            classifier = modelio.read_svm_payload(fh)
        trailing = fh.read(1)
        if trailing:
            raise FormatError("trailing bytes after model payload")

    n_f = n_bands * n_feature_pairs(n_ch)
    if projection is not None and projection.n_features != n_f:
        raise FormatError("projection feature count does not match bands")
    expected_dim = projection.dim if projection is not None else n_f
    if backend == "svm_float":
        if classifier.n_cl != n_cl or classifier.n_features != n_f:
            raise FormatError("classifier shape does not match header")
    elif backend == "svm_binarized":
        if classifier.n_cl != n_cl or classifier.dim != expected_dim:
            raise FormatError("classifier shape does not match header")
    else:
        if classifier.n_cl != n_cl or classifier.dim != expected_dim:
            raise FormatError("classifier shape does not match header")

    return FittedModel(
        backend=backend,
        n_cl=n_cl,
        n_ch=n_ch,
        sample_rate=sample_rate,
        alpha=alpha,
        crop=crop,
        bank=bank,
        refs=ReferenceSet(refs=tuple(refs), converged=tuple(True for _ in refs)),
        projection=projection,
        classifier=classifier,
    )
