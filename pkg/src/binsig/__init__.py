"""Binarized Riemannian biosignal classification.

Covariance features on the SPD manifold (whitening against a geometric-mean
reference, matrix logarithm, norm-preserving half-vectorization), sparse
bipolar random projection into Hamming space, and three classifier backends:
a float linear SVM reference, a binarized SVM with prototype matching, and a
few-shot binary key-value memory.

Hot kernels are numba-compiled when numba is importable; set BINSIG_NO_NUMBA=1
to force the pure-numpy fallbacks.
"""

from .accounting import CostReport, CostStage, preset_report
from .dataio import (
    Dataset,
    FormatError,
    SynthSpec,
    Trial,
    generate_synthetic,
    import_csv,
    read_dataset,
    write_dataset,
)
from .filterbank import BandSpec, FilterBank, apply_bank, design_bank
from .memory import KeyValueMemory, attend, classify, readout, softabs, write_support
from .pipeline import (
    EvalReport,
    FittedModel,
    PipelineConfig,
    ProjectionParams,
    cost_report,
    evaluate,
    fit,
    load_model,
    predict_dataset,
    predict_trial,
    save_model,
)
from .projection import (
    BinaryVector,
    ProjectionSpec,
    cosine_from_hamming,
    hamming,
    heaviside_bits,
    project_binarize,
)
from .spd import ReferenceSet, SpdMatrix, fit_reference, riemannian_features
from .svm import (
    BinarizedSvm,
    SvmModel,
    binarize_svm,
    decide_binary,
    decide_float,
    train_bipolar_svm,
    train_linear_svm,
)

__version__ = "0.1.0"

__all__ = [
    "BandSpec",
    "BinarizedSvm",
    "BinaryVector",
    "CostReport",
    "CostStage",
    "Dataset",
    "EvalReport",
    "FilterBank",
    "FittedModel",
    "FormatError",
    "KeyValueMemory",
    "PipelineConfig",
    "ProjectionParams",
    "ProjectionSpec",
    "ReferenceSet",
    "SpdMatrix",
    "SvmModel",
    "SynthSpec",
    "Trial",
    "apply_bank",
    "attend",
    "binarize_svm",
    "classify",
    "cosine_from_hamming",
    "cost_report",
    "decide_binary",
    "decide_float",
    "design_bank",
    "evaluate",
    "fit",
    "fit_reference",
    "generate_synthetic",
    "hamming",
    "heaviside_bits",
    "import_csv",
    "load_model",
    "predict_dataset",
    "predict_trial",
    "preset_report",
    "project_binarize",
    "read_dataset",
    "riemannian_features",
    "save_model",
    "softabs",
    "train_bipolar_svm",
    "train_linear_svm",
    "write_dataset",
    "write_support",
]
