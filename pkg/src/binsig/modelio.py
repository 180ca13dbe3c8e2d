"""Binary model-bundle serialization.

A fitted model is stored as one little-endian MDL1 container:

  magic "MDL1", version u32, backend u8 (0 float SVM, 1 binarized SVM,
  2 key-value memory), n_cl u32, n_ch u32, sample_rate f64, alpha f64,
  crop flag u8 (+ start u32 + length u32 when set),
  n_bands u32, then per band low f64 + high f64 (coefficients are
  re-derived on load), then per band a reference blob: n u32 + packed
  lower-triangle f64 (n*(n+1)/2 values),
  projection flag u8 (+ kind u8 0 sparse/1 dense, d u32, n_f u32,
  sparsity f64, seed u32 when set),
  then one classifier payload:

  BSVM1: magic "BSVM1", mode u8 (0 float16 weight rows, 1 packed
  prototypes), d u32, n_cl u32, then either n_cl*d float16 values or
  n_cl * ceil(d/64) u64 words.

  BMEM1: magic "BMEM1", d u32, n_cl u32, key count u32, packed keys
  (count * ceil(d/64) u64 words), labels u32 each, beta f64.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .dataio import FormatError
from .memory import KeyValueMemory
from .projection import (
    KIND_DENSE,
    KIND_SPARSE,
    BinaryVector,
    ProjectionSpec,
    pack_rows,
)
from .spd import SpdMatrix
from .svm import BinarizedSvm, SvmModel

MDL_MAGIC = b"MDL1"
SVM_MAGIC = b"BSVM1"
MEM_MAGIC = b"BMEM1"
MDL_VERSION = 1

BACKEND_CODES = {"svm_float": 0, "svm_binarized": 1, "binmem": 2}
BACKEND_NAMES = {v: k for k, v in BACKEND_CODES.items()}

_KIND_CODES = {KIND_SPARSE: 0, KIND_DENSE: 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError("truncated model file while reading %s" % what)
    return buf


def _write_u32(fh: BinaryIO, v: int) -> None:
    fh.write(struct.pack("<I", v))


def _read_u32(fh: BinaryIO, what: str) -> int:
    return struct.unpack("<I", _read_exact(fh, 4, what))[0]


def _write_u8(fh: BinaryIO, v: int) -> None:
    fh.write(struct.pack("<B", v))


def _read_u8(fh: BinaryIO, what: str) -> int:
    return struct.unpack("<B", _read_exact(fh, 1, what))[0]


def _write_f64(fh: BinaryIO, v: float) -> None:
    fh.write(struct.pack("<d", v))


def _read_f64(fh: BinaryIO, what: str) -> float:
    return struct.unpack("<d", _read_exact(fh, 8, what))[0]


def write_svm_payload(fh: BinaryIO, model: SvmModel | BinarizedSvm) -> None:
    fh.write(SVM_MAGIC)
    if isinstance(model, SvmModel):
        _write_u8(fh, 0)
        _write_u32(fh, model.n_features)
        _write_u32(fh, model.n_cl)
        fh.write(np.ascontiguousarray(model.weights, dtype="<f2").tobytes())
    else:
        _write_u8(fh, 1)
        _write_u32(fh, model.dim)
        _write_u32(fh, model.n_cl)
        fh.write(np.ascontiguousarray(pack_rows(list(model.prototypes)), dtype="<u8").tobytes())


def read_svm_payload(fh: BinaryIO) -> SvmModel | BinarizedSvm:
    magic = _read_exact(fh, len(SVM_MAGIC), "classifier magic")
    if magic != SVM_MAGIC:
        raise FormatError("bad classifier magic %r" % magic)
    mode = _read_u8(fh, "classifier mode")
    d = _read_u32(fh, "classifier dim")
    n_cl = _read_u32(fh, "classifier class count")
    if d < 1 or n_cl < 2:
        raise FormatError("invalid classifier dimensions")
    if mode == 0:
        raw = _read_exact(fh, 2 * n_cl * d, "weight rows")
        w = np.frombuffer(raw, dtype="<f2").astype(np.float64).reshape(n_cl, d)
        if not np.all(np.isfinite(w)):
            raise FormatError("non-finite weights in model file")
        return SvmModel(
            weights=w,
            reg_c=float("nan"),
            gaps=np.full(n_cl, np.nan),
            epochs=np.zeros(n_cl, dtype=np.int64),
        )
    if mode == 1:
        words = (d + 63) // 64
        raw = _read_exact(fh, 8 * n_cl * words, "prototype words")
        packed = np.frombuffer(raw, dtype="<u8").reshape(n_cl, words)
        protos = tuple(
            BinaryVector(dim=d, words=packed[i].copy()) for i in range(n_cl)
        )
        return BinarizedSvm(prototypes=protos)
    raise FormatError("unknown classifier mode %d" % mode)


def write_memory_payload(fh: BinaryIO, mem: KeyValueMemory) -> None:
    fh.write(MEM_MAGIC)
    _write_u32(fh, mem.dim)
    _write_u32(fh, mem.n_cl)
    _write_u32(fh, mem.n_keys)
    fh.write(np.ascontiguousarray(mem.keys, dtype="<u8").tobytes())
    fh.write(np.ascontiguousarray(mem.labels, dtype="<u4").tobytes())
    _write_f64(fh, mem.beta)


def read_memory_payload(fh: BinaryIO) -> KeyValueMemory:
    magic = _read_exact(fh, len(MEM_MAGIC), "memory magic")
    if magic != MEM_MAGIC:
        raise FormatError("bad memory magic %r" % magic)
    d = _read_u32(fh, "memory dim")
    n_cl = _read_u32(fh, "memory class count")
    count = _read_u32(fh, "key count")
    if d < 1 or n_cl < 2:
        raise FormatError("invalid memory dimensions")
    words = (d + 63) // 64
    raw = _read_exact(fh, 8 * count * words, "packed keys")
    keys = np.frombuffer(raw, dtype="<u8").reshape(count, words).copy()
    raw = _read_exact(fh, 4 * count, "key labels")
    labels = np.frombuffer(raw, dtype="<u4").astype(np.int64)
    beta = _read_f64(fh, "beta")
    if labels.size and labels.max() >= n_cl:
        raise FormatError("key label out of range")
    if not np.isfinite(beta) or beta <= 0.0:
        raise FormatError("invalid beta")
    try:
        return KeyValueMemory(dim=d, n_cl=n_cl, beta=beta, keys=keys, labels=labels)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_projection_spec(fh: BinaryIO, spec: ProjectionSpec | None) -> None:
    if spec is None:
        _write_u8(fh, 0)
        return
    _write_u8(fh, 1)
    _write_u8(fh, _KIND_CODES[spec.kind])
    _write_u32(fh, spec.dim)
    _write_u32(fh, spec.n_features)
    _write_f64(fh, spec.sparsity)
    _write_u32(fh, spec.seed)


def read_projection_spec(fh: BinaryIO) -> ProjectionSpec | None:
    flag = _read_u8(fh, "projection flag")
    if flag == 0:
        return None
    if flag != 1:
        raise FormatError("bad projection flag %d" % flag)
    kind_code = _read_u8(fh, "projection kind")
    if kind_code not in _KIND_NAMES:
        raise FormatError("unknown projection kind %d" % kind_code)
    dim = _read_u32(fh, "projection dim")
    n_f = _read_u32(fh, "projection feature count")
    sparsity = _read_f64(fh, "projection sparsity")
    seed = _read_u32(fh, "projection seed")
    try:
        return ProjectionSpec(
            kind=_KIND_NAMES[kind_code],
            dim=dim,
            n_features=n_f,
            sparsity=sparsity,
            seed=seed,
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_reference(fh: BinaryIO, ref: SpdMatrix) -> None:
    _write_u32(fh, ref.n)
    fh.write(np.ascontiguousarray(ref.packed, dtype="<f8").tobytes())


def read_reference(fh: BinaryIO) -> SpdMatrix:
    n = _read_u32(fh, "reference size")
    if n < 1:
        raise FormatError("invalid reference size")
    count = n * (n + 1) // 2
    raw = _read_exact(fh, 8 * count, "reference triangle")
    packed = np.frombuffer(raw, dtype="<f8").copy()
    if not np.all(np.isfinite(packed)):
        raise FormatError("non-finite reference matrix")
    return SpdMatrix(n=n, packed=packed)
