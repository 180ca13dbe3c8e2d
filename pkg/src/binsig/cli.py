"""Command-line surface: synthesis, import, training, evaluation, sweeps, costs.

Exit codes: 0 on success, 1 on a validation problem (bad flags, inconsistent
config, malformed values), 2 on an I/O problem (missing or corrupt files).
Human-readable text goes to stdout; JSON and CSV are written only when asked
for with explicit flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

from . import accounting, pipeline
from .dataio import (
    Dataset,
    FormatError,
    SynthSpec,
    generate_synthetic,
    import_csv,
    read_dataset,
    write_dataset,
)
from .filterbank import BandSpec
from .projection import KIND_DENSE, KIND_SPARSE


def _parse_kv_file(path: str) -> dict[str, str]:
    """Read a plain key=value config file; '#' starts a comment line."""
    out: dict[str, str] = {}
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("%s line %d: expected key=value" % (path, lineno))
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not key:
                raise ValueError("%s line %d: empty key" % (path, lineno))
            if key in out:
                raise ValueError("%s line %d: duplicate key %r" % (path, lineno, key))
            out[key] = value
    return out


def _convert(key: str, value: str, kind):
    try:
        return kind(value)
    except ValueError:
        raise ValueError(
            "key %r: cannot parse %r as %s" % (key, value, kind.__name__)
        ) from None


_SYNTH_KEYS = {
    "n_cl": int,
    "n_ch": int,
    "n_s": int,
    "trials_per_class": int,
    "sample_rate": float,
    "class_separation": float,
    "noise_scale": float,
    "seed": int,
}


def synth_spec_from_file(path: str) -> SynthSpec:
    kv = _parse_kv_file(path)
    fields = {}
    for key, value in kv.items():
        if key not in _SYNTH_KEYS:
            raise ValueError(
                "unknown synth key %r (choose from %s)"
                % (key, ", ".join(sorted(_SYNTH_KEYS)))
            )
        fields[key] = _convert(key, value, _SYNTH_KEYS[key])
    return SynthSpec(**fields)


def _parse_bands(text: str) -> tuple[BandSpec, ...]:
    """Parse 'low:high,low:high,...' into band edges."""
    bands = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        low, colon, high = part.partition(":")
        if not colon:
            raise ValueError("band %r: expected low:high in Hz" % part)
        bands.append(
            BandSpec(
                low_hz=_convert("bands", low, float),
                high_hz=_convert("bands", high, float),
            )
        )
    if not bands:
        raise ValueError("bands value is empty")
    return tuple(bands)


_CONFIG_KEYS = (
    "backend",
    "bands",
    "alpha",
    "reg_c",
    "beta",
    "shots",
    "crop",
    "projection",
    "proj_kind",
    "proj_dim",
    "proj_sparsity",
    "proj_seed",
)

_PROJ_KINDS = {"sparse": KIND_SPARSE, "dense": KIND_DENSE}


def pipeline_config_from_file(path: str | None) -> pipeline.PipelineConfig:
    """Build a PipelineConfig from a key=value file (defaults when path is None)."""
    kv = _parse_kv_file(path) if path is not None else {}
    for key in kv:
        if key not in _CONFIG_KEYS:
            raise ValueError(
                "unknown config key %r (choose from %s)"
                % (key, ", ".join(_CONFIG_KEYS))
            )
    fields: dict[str, object] = {}
    if "backend" in kv:
        fields["backend"] = kv["backend"]
    if "bands" in kv:
        fields["bands"] = _parse_bands(kv["bands"])
    for key, kind in (("alpha", float), ("reg_c", float), ("beta", float), ("shots", int)):
        if key in kv:
            fields[key] = _convert(key, kv[key], kind)
    if "crop" in kv:
        start, colon, length = kv["crop"].partition(":")
        if not colon:
            raise ValueError("crop: expected start:length in samples")
        fields["crop"] = (
            _convert("crop", start, int),
            _convert("crop", length, int),
        )
    proj_keys = [k for k in kv if k.startswith("proj_")]
    if kv.get("projection", "").lower() in ("none", "off"):
        if proj_keys:
            raise ValueError("projection=none conflicts with %s" % ", ".join(proj_keys))
        fields["projection"] = None
    else:
        proj_fields: dict[str, object] = {}
        if "proj_kind" in kv:
            name = kv["proj_kind"]
            if name not in _PROJ_KINDS:
                raise ValueError(
                    "proj_kind %r (choose from %s)" % (name, ", ".join(_PROJ_KINDS))
                )
            proj_fields["kind"] = _PROJ_KINDS[name]
        if "proj_dim" in kv:
            proj_fields["dim"] = _convert("proj_dim", kv["proj_dim"], int)
        if "proj_sparsity" in kv:
            proj_fields["sparsity"] = _convert(
                "proj_sparsity", kv["proj_sparsity"], float
            )
        if "proj_seed" in kv:
            proj_fields["seed"] = _convert("proj_seed", kv["proj_seed"], int)
        if proj_fields or "projection" in kv:
            fields["projection"] = pipeline.ProjectionParams(**proj_fields)
    return pipeline.PipelineConfig(**fields)


def _load_dataset(path: str) -> Dataset:
    return read_dataset(path)


def cmd_synth(args) -> int:
    spec = synth_spec_from_file(args.spec) if args.spec else SynthSpec()
    ds = generate_synthetic(spec)
    write_dataset(ds, args.out)
    print(
        "wrote %d trials (%d classes, %d channels, %d samples) to %s"
        % (len(ds), ds.n_cl, ds.trials[0].samples.shape[0], ds.trials[0].samples.shape[1], args.out)
    )
    return 0


def cmd_import(args) -> int:
    ds = import_csv(args.csv, n_ch=args.nch, sample_rate=args.fs)
    write_dataset(ds, args.out)
    print("imported %d trials (%d classes) to %s" % (len(ds), ds.n_cl, args.out))
    return 0


def cmd_fit(args) -> int:
    config = pipeline_config_from_file(args.config)
    train = _load_dataset(args.train)
    model = pipeline.fit(config, train, threads=args.threads)
    pipeline.save_model(model, args.out)
    print(
        "fit %s backend on %d trials (%d features) -> %s"
        % (model.backend, len(train), model.n_features, args.out)
    )
    return 0


def cmd_predict(args) -> int:
    model = pipeline.load_model(args.model)
    data = _load_dataset(args.data)
    preds = pipeline.predict_dataset(model, data, threads=args.threads)
    for p in preds:
        print(int(p))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"predictions": [int(p) for p in preds]}, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_eval(args) -> int:
    model = pipeline.load_model(args.model)
    test = _load_dataset(args.test)
    report = pipeline.evaluate(model, test, threads=args.threads)
    print("accuracy %.4f on %d trials" % (report.accuracy, len(test)))
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json())
            fh.write("\n")
    return 0


def cmd_sweep(args) -> int:
    dims = []
    for part in args.dims.split(","):
        part = part.strip()
        if part:
            dims.append(_convert("dims", part, int))
    if not dims:
        raise ValueError("dims list is empty")
    if args.seeds < 1:
        raise ValueError("seeds must be at least 1")
    base = synth_spec_from_file(args.spec) if args.spec else SynthSpec(
        class_separation=0.24
    )
    rows = []
    for d in dims:
        for s in range(args.seeds):
            train = generate_synthetic(replace(base, seed=2 * s))
            test = generate_synthetic(replace(base, seed=2 * s + 1))
            config = pipeline.PipelineConfig(
                backend="svm_binarized",
                reg_c=args.reg_c,
                projection=pipeline.ProjectionParams(
                    dim=d, sparsity=args.sparsity, seed=s
                ),
            )
            model = pipeline.fit(config, train, threads=args.threads)
            acc = pipeline.evaluate(model, test, threads=args.threads).accuracy
            rows.append((d, s, acc))
            print("d=%d seed=%d accuracy=%.4f" % (d, s, acc))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "seed", "accuracy"])
            for d, s, acc in rows:
                writer.writerow([d, s, "%.6f" % acc])
        print("wrote %d rows to %s" % (len(rows), args.out))
    return 0


def _cost_report(args) -> accounting.CostReport:
    if args.preset and args.model:
        raise ValueError("give either --preset or --model, not both")
    if args.preset:
        return accounting.preset_report(args.preset)
    if args.model:
        model = pipeline.load_model(args.model)
        return pipeline.cost_report(model, n_s=args.ns)
    raise ValueError("need --preset NAME or --model FILE")


def cmd_macs(args) -> int:
    report = _cost_report(args)
    if args.json:
        print(report.to_json())
    else:
        print(report.to_text())
        print("total MACs: %d" % report.total_macs)
    return 0


def cmd_footprint(args) -> int:
    report = _cost_report(args)
    if args.json:
        print(report.to_json())
    else:
        print(report.to_text())
        print("total: %s kB (%d bytes)" % (report.total_kb, report.total_footprint_bytes))
    return 0


def _add_threads(p) -> None:
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binsig",
        description="Binarized Riemannian biosignal classification toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", help="key=value synthesis spec file (defaults used if omitted)")
    p.add_argument("--out", required=True, help="output dataset path (.trl)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("import", help="convert a CSV of labeled trials")
    p.add_argument("--csv", required=True, help="input CSV (label, samples...)")
    p.add_argument("--nch", type=int, required=True, help="channel count")
    p.add_argument("--fs", type=float, required=True, help="sample rate in Hz")
    p.add_argument("--out", required=True, help="output dataset path (.trl)")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("fit", help="train a model")
    p.add_argument("--config", help="key=value pipeline config file")
    p.add_argument("--train", required=True, help="training dataset (.trl)")
    p.add_argument("--out", required=True, help="output model path (.mdl)")
    _add_threads(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict labels with a saved model")
    p.add_argument("--model", required=True, help="model file (.mdl)")
    p.add_argument("--data", required=True, help="dataset to classify (.trl)")
    p.add_argument("--json", help="also write predictions to this JSON file")
    _add_threads(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a saved model on labeled data")
    p.add_argument("--model", required=True, help="model file (.mdl)")
    p.add_argument("--test", required=True, help="labeled dataset (.trl)")
    p.add_argument("--json", help="write the full report to this JSON file")
    _add_threads(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="projection-dimension sweep on synthetic data")
    p.add_argument("--dims", required=True, help="comma-separated projection dims")
    p.add_argument("--seeds", type=int, default=10, help="seed count (default 10)")
    p.add_argument("--spec", help="key=value synthesis spec file")
    p.add_argument("--sparsity", type=float, default=0.9, help="projection sparsity")
    p.add_argument("--reg-c", type=float, default=1.0, dest="reg_c", help="SVM C")
    p.add_argument("--out", help="write (d, seed, accuracy) CSV here")
    _add_threads(p)
    p.set_defaults(func=cmd_sweep)

    for name, fn in (("macs", cmd_macs), ("footprint", cmd_footprint)):
        p = sub.add_parser(name, help="print a cost report (MACs and memory)")
        p.add_argument(
            "--preset",
            help="frozen preset name (%s)" % ", ".join(sorted(accounting.PRESETS)),
        )
        p.add_argument("--model", help="compute the report for a saved model")
        p.add_argument("--ns", type=int, default=250, help="samples per trial for MAC counts")
        p.add_argument("--json", action="store_true", help="emit JSON instead of text")
        p.set_defaults(func=fn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract reserves 2 for I/O.
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except FormatError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
