"""Command-line entry points: analyze, ingest-wdbc, simulate.

``analyze`` runs one procedure on a prediction CSV (header
``label,<test names...>``, binary cells meaning test-positive) and writes
decisions plus region plot data.  ``ingest-wdbc`` converts the UCI breast
cancer file (569 rows: id, diagnosis M/B, 30 features) into such a CSV by
thresholding selected features.  ``simulate`` runs a JSON-configured
scenario grid through the simulation harness; the config schema is
``GRID_SCHEMA`` below (scenarios with a generator discriminated by
``type``: ``lfc`` or ``biomarker``).

Exit codes: 0 success, 2 usage/config/data error, 3 numerical failure.
All randomness honors ``--seed``; the fixed default is 1729, never
wall-clock.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from .datagen import BiomarkerScenario, InfeasibleCorrelationError, LfcScenario
from .estimation import DEFAULT_PSEUDO_COUNT, summarize
from .model import HypothesisSpec, StudyData, ValidationError, validate_study
from .numerics import SingularMatrixError
from .procedures import (
    DEFAULT_SEED,
    Calibration,
    MethodKind,
    MethodSpec,
    WildWeights,
    apply_method,
)
from .regions import RegionKind, build_regions, write_region_csv
from .simharness import ScenarioSpec, SimulationError, run_grid, write_results_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_WDBC_BASES = (
    "radius", "texture", "perimeter", "area", "smoothness",
    "compactness", "concavity", "concave_points", "symmetry", "fractal_dimension",
)
WDBC_FEATURES = tuple(
    f"{base}_{suffix}" for suffix in ("mean", "se", "worst") for base in _WDBC_BASES
)
WDBC_ROWS = 569
WDBC_COLUMNS = 32

SCENARIO_A_FEATURES = ("area_worst", "compactness_worst", "concavity_worst")
SCENARIO_A_QUANTILES = (0.3, 0.4, 0.5, 0.6, 0.7)
SCENARIO_A_FIXED_AREA_THRESHOLD = 700.0


# ---------------------------------------------------------------------------
# Prediction CSV <-> StudyData
# ---------------------------------------------------------------------------

def load_prediction_csv(path) -> StudyData:
    """StudyData from a ``label,<test...>`` CSV of binary predictions.

    Correctness is derived from label vs prediction: diseased subjects
    (label 1) are correct when predicted positive, non-diseased when
    predicted negative.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if not header or header[0].strip() != "label":
            raise ValidationError(
                f"{path}: first header column must be 'label', got {header[:1] or 'nothing'}"
            )
        names = [h.strip() for h in header[1:]]
        if not names:
            raise ValidationError(f"{path}: no test columns after the label column")
        rows1, rows0 = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(names) + 1:
                raise ValidationError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(names) + 1}"
                )
            try:
                values = [int(cell) for cell in row]
            except ValueError as exc:
                raise ValidationError(f"{path}: row {lineno}: {exc}") from None
            label, preds = values[0], values[1:]
            if label not in (0, 1):
                raise ValidationError(f"{path}: row {lineno}: label must be 0 or 1, got {label}")
            bad = [j for j, v in enumerate(preds) if v not in (0, 1)]
            if bad:
                raise ValidationError(
                    f"{path}: row {lineno}: non-binary prediction in column "
                    f"{names[bad[0]]!r} (value {preds[bad[0]]})"
                )
            if label == 1:
                rows1.append(preds)
            else:
                rows0.append([1 - v for v in preds])
    if not rows1 or not rows0:
        raise ValidationError(
            f"{path}: both label groups must be present, got {len(rows1)} diseased "
            f"and {len(rows0)} non-diseased rows"
        )
    return validate_study(
        StudyData(
            q1=np.array(rows1, dtype=np.uint8),
            q0=np.array(rows0, dtype=np.uint8),
            test_names=tuple(names),
        )
    )


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _method_from_args(args) -> MethodSpec:
    return MethodSpec(
        kind=MethodKind(args.method),
        b_boot=args.b_boot,
        mc_draws=args.mc_draws,
        wild_weights=WildWeights(args.wild_weights),
        calibration=Calibration(args.calibration),
        seed=args.seed,
    )


def analyze(
    data: StudyData,
    hyp: HypothesisSpec,
    method: MethodSpec,
    pseudo_count: float = DEFAULT_PSEUDO_COUNT,
):
    """Run one procedure and assemble the analysis payload plus regions."""
    summary = summarize(data, hyp, pseudo_count=pseudo_count)
    result = apply_method(data, summary, hyp, method)
    comparison = build_regions(summary, result, hyp, RegionKind.COMPARISON)
    confidence = build_regions(summary, result, hyp, RegionKind.CONFIDENCE)
    payload = {
        "config": {
            "se0": hyp.se0,
            "sp0": hyp.sp0,
            "alpha": hyp.alpha,
            "method": method.label,
            "b_boot": method.b_boot,
            "mc_draws": method.mc_draws,
            "wild_weights": method.wild_weights.value,
            "calibration": method.calibration.value,
            "seed": method.seed,
            "pseudo_count": pseudo_count,
        },
        "n1": data.n1,
        "n0": data.n0,
        "m": data.m,
        "tests": list(data.test_names),
        "se_hat": [round(float(v), 6) for v in summary.se_hat],
        "sp_hat": [round(float(v), 6) for v in summary.sp_hat],
        "c_comparison": round(result.c_comparison, 6),
        "c_confidence": round(result.c_confidence, 6),
        "reject": [bool(v) for v in result.reject],
        "p_adj": [round(float(v), 6) for v in result.p_adj],
        "rejections": int(np.sum(result.reject)),
        "rejected_tests": [
            name for name, rej in zip(data.test_names, result.reject) if rej
        ],
        "lower_comparison_se": [round(float(v), 6) for v in comparison.lower_se],
        "lower_comparison_sp": [round(float(v), 6) for v in comparison.lower_sp],
        "lower_confidence_se": [round(float(v), 6) for v in confidence.lower_se],
        "lower_confidence_sp": [round(float(v), 6) for v in confidence.lower_sp],
    }
    return payload, summary, result, comparison, confidence


def _cmd_analyze(args) -> int:
    hyp = HypothesisSpec(se0=args.se0, sp0=args.sp0, alpha=args.alpha)
    data = load_prediction_csv(args.data)
    method = _method_from_args(args)
    payload, summary, result, comparison, confidence = analyze(
        data, hyp, method, pseudo_count=args.pseudo_count
    )
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "analysis.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    kinds = {
        "comparison": (comparison,),
        "confidence": (confidence,),
        "both": (comparison, confidence),
    }[args.regions]
    for regions in kinds:
        with open(out_dir / f"regions_{regions.kind.value}.csv", "w") as fh:
            write_region_csv(regions, summary, fh)
    print(
        f"analyzed {data.m} tests (n1={data.n1}, n0={data.n0}) with {method.label}: "
        f"rejections: {payload['rejections']}"
    )
    for name in payload["rejected_tests"]:
        print(f"  rejected: {name}")
    print(f"results written to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ingest-wdbc
# ---------------------------------------------------------------------------

def read_wdbc(path):
    """Parse the UCI wdbc.data layout: (labels, features) arrays.

    Expects exactly 569 rows and 32 comma-separated columns (id, diagnosis,
    30 real features) with no header.  Labels map M to 1 and B to 0.
    """
    labels, rows = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != WDBC_COLUMNS:
                raise ValidationError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {WDBC_COLUMNS}"
                )
            diagnosis = row[1].strip()
            if diagnosis not in ("M", "B"):
                raise ValidationError(
                    f"{path}: row {lineno}: diagnosis must be 'M' or 'B', got {diagnosis!r}"
                )
            try:
                rows.append([float(v) for v in row[2:]])
            except ValueError as exc:
                raise ValidationError(f"{path}: row {lineno}: {exc}") from None
            labels.append(1 if diagnosis == "M" else 0)
    if len(rows) != WDBC_ROWS:
        raise ValidationError(f"{path}: expected {WDBC_ROWS} rows, got {len(rows)}")
    return np.array(labels, dtype=np.uint8), np.array(rows, dtype=float)


@dataclass(frozen=True)
class WdbcIngestSpec:
    """Feature/threshold selection for the WDBC ingestion.

    Tests predict diseased when ``feature > threshold``.  ``thresholds``
    maps feature name to an explicit list; features without an entry get
    the ``quantiles`` of their empirical distribution, except that the
    ``area_worst`` threshold closest to 700 is fixed to exactly 700 (the
    only threshold stated exactly for the shipped biomarker-assessment
    configuration).
    """

    features: tuple = SCENARIO_A_FEATURES
    thresholds: dict = field(default_factory=dict)
    quantiles: tuple = SCENARIO_A_QUANTILES

    def __post_init__(self):
        unknown = [f for f in tuple(self.features) + tuple(self.thresholds) if f not in WDBC_FEATURES]
        if unknown:
            raise ValidationError(
                f"unknown feature name(s) {unknown}; valid names: {', '.join(WDBC_FEATURES)}"
            )


def resolve_thresholds(spec: WdbcIngestSpec, features_matrix: np.ndarray) -> dict:
    """Per-feature threshold lists, resolved against the data distribution."""
    resolved = {}
    for feat in spec.features:
        if feat in spec.thresholds:
            resolved[feat] = [float(t) for t in spec.thresholds[feat]]
            continue
        col = features_matrix[:, WDBC_FEATURES.index(feat)]
        ths = [float(np.quantile(col, q)) for q in spec.quantiles]
        if feat == "area_worst":
            nearest = int(np.argmin([abs(t - SCENARIO_A_FIXED_AREA_THRESHOLD) for t in ths]))
            ths[nearest] = SCENARIO_A_FIXED_AREA_THRESHOLD
        resolved[feat] = ths
    return resolved


def ingest_wdbc(spec: WdbcIngestSpec, labels: np.ndarray, features_matrix: np.ndarray):
    """(column names, label vector, binary prediction matrix) for the ingest CSV."""
    thresholds = resolve_thresholds(spec, features_matrix)
    names, columns = [], []
    for feat in spec.features:
        col = features_matrix[:, WDBC_FEATURES.index(feat)]
        for t in thresholds[feat]:
            names.append(f"{feat}_gt_{t:g}")
            columns.append((col > t).astype(np.uint8))
    return names, labels, np.column_stack(columns)


def _cmd_ingest_wdbc(args) -> int:
    thresholds = {}
    for item in args.thresholds or []:
        if "=" not in item:
            raise ValidationError(
                f"--thresholds expects feature=v1,v2,... got {item!r}"
            )
        feat, _, values = item.partition("=")
        thresholds[feat.strip()] = [float(v) for v in values.split(",") if v.strip()]
    spec = WdbcIngestSpec(
        features=tuple(f.strip() for f in args.features.split(",") if f.strip()),
        thresholds=thresholds,
        quantiles=tuple(float(q) for q in args.quantiles.split(",") if q.strip()),
    )
    labels, matrix = read_wdbc(args.input)
    names, labels, predictions = ingest_wdbc(spec, labels, matrix)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + names)
        for label, row in zip(labels, predictions):
            writer.writerow([int(label)] + [int(v) for v in row])
    print(
        f"ingested {labels.size} rows ({int(labels.sum())} cases, "
        f"{int(labels.size - labels.sum())} controls) into {len(names)} test columns"
    )
    print(f"written to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

_HYPOTHESIS_SCHEMA = {
    "type": "object",
    "required": ["se0", "sp0"],
    "additionalProperties": False,
    "properties": {
        "se0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "sp0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
    },
}

_METHOD_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": [k.value for k in MethodKind]},
        "b_boot": {"type": "integer", "minimum": 100},
        "mc_draws": {"type": "integer", "minimum": 10000},
        "wild_weights": {"enum": [w.value for w in WildWeights]},
        "calibration": {"enum": [c.value for c in Calibration]},
        "seed": {"type": "integer", "minimum": 0},
    },
}

_GENERATOR_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "required": ["type", "m", "se0", "sp0", "n1", "n0"],
            "additionalProperties": False,
            "properties": {
                "type": {"const": "lfc"},
                "m": {"type": "integer", "minimum": 1},
                "se0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "sp0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "rho_se": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "rho_sp": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "b": {"type": "array", "items": {"enum": [0, 1]}},
                "n1": {"type": "integer", "minimum": 1},
                "n0": {"type": "integer", "minimum": 1},
            },
        },
        {
            "type": "object",
            "required": ["type", "auc", "assignments", "n1", "n0"],
            "additionalProperties": False,
            "properties": {
                "type": {"const": "biomarker"},
                "auc": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number", "exclusiveMinimum": 0.5, "exclusiveMaximum": 1},
                },
                "rho0": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "rho1": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "assignments": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "array",
                        "minItems": 2,
                        "maxItems": 2,
                        "prefixItems": [{"type": "integer", "minimum": 0}, {"type": "number"}],
                    },
                },
                "n1": {"type": "integer", "minimum": 1},
                "n0": {"type": "integer", "minimum": 1},
            },
        },
    ]
}

GRID_SCHEMA = {
    "type": "object",
    "required": ["scenarios"],
    "additionalProperties": False,
    "properties": {
        "scenarios": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "n_sim", "hypothesis", "generator", "methods"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "n_sim": {"type": "integer", "minimum": 1},
                    "base_seed": {"type": "integer", "minimum": 0},
                    "hypothesis": _HYPOTHESIS_SCHEMA,
                    "generator": _GENERATOR_SCHEMA,
                    "methods": {"type": "array", "minItems": 1, "items": _METHOD_SCHEMA},
                },
            },
        }
    },
}


def _validate_grid_config(config) -> list:
    import jsonschema

    validator = jsonschema.Draft202012Validator(GRID_SCHEMA)
    errors = []
    for err in sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path)):
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        errors.append(f"{pointer}: {err.message}")
    return errors


def _generator_from_json(obj):
    if obj["type"] == "lfc":
        return LfcScenario(
            m=obj["m"],
            se0=obj["se0"],
            sp0=obj["sp0"],
            rho_se=obj.get("rho_se", 0.0),
            rho_sp=obj.get("rho_sp", 0.0),
            b=tuple(obj["b"]) if "b" in obj else None,
            n1=obj["n1"],
            n0=obj["n0"],
        )
    return BiomarkerScenario(
        auc=tuple(obj["auc"]),
        rho0=obj.get("rho0", 0.0),
        rho1=obj.get("rho1", 0.0),
        assignments=tuple((k, c) for k, c in obj["assignments"]),
        n1=obj["n1"],
        n0=obj["n0"],
    )


def _method_from_json(obj) -> MethodSpec:
    return MethodSpec(
        kind=MethodKind(obj["kind"]),
        b_boot=obj.get("b_boot", 2000),
        mc_draws=obj.get("mc_draws", 100_000),
        wild_weights=WildWeights(obj.get("wild_weights", "rademacher")),
        calibration=Calibration(obj.get("calibration", "binding")),
        seed=obj.get("seed", DEFAULT_SEED),
    )


def load_grid_config(path, default_seed: int = DEFAULT_SEED) -> list:
    """ScenarioSpecs from a JSON grid config; raises ValidationError on violations."""
    with open(path) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from None
    errors = _validate_grid_config(config)
    if errors:
        raise ValidationError(f"{path}: schema violations:\n  " + "\n  ".join(errors))
    specs = []
    for scen in config["scenarios"]:
        hyp_obj = scen["hypothesis"]
        specs.append(
            ScenarioSpec(
                generator=_generator_from_json(scen["generator"]),
                hyp=HypothesisSpec(
                    se0=hyp_obj["se0"], sp0=hyp_obj["sp0"], alpha=hyp_obj.get("alpha", 0.025)
                ),
                methods=tuple(_method_from_json(mobj) for mobj in scen["methods"]),
                n_sim=scen["n_sim"],
                base_seed=scen.get("base_seed", default_seed),
                label=scen["label"],
            )
        )
    return specs


def effective_config(specs) -> dict:
    """The grid config with every default resolved, for provenance."""
    out = []
    for spec in specs:
        gen = spec.generator
        if isinstance(gen, LfcScenario):
            gen_obj = {
                "type": "lfc", "m": gen.m, "se0": gen.se0, "sp0": gen.sp0,
                "rho_se": gen.rho_se, "rho_sp": gen.rho_sp, "b": list(gen.b),
                "n1": gen.n1, "n0": gen.n0,
            }
        else:
            gen_obj = {
                "type": "biomarker", "auc": list(gen.auc), "rho0": gen.rho0,
                "rho1": gen.rho1, "assignments": [list(a) for a in gen.assignments],
                "n1": gen.n1, "n0": gen.n0,
            }
        out.append(
            {
                "label": spec.label,
                "n_sim": spec.n_sim,
                "base_seed": spec.base_seed,
                "hypothesis": {"se0": spec.hyp.se0, "sp0": spec.hyp.sp0, "alpha": spec.hyp.alpha},
                "generator": gen_obj,
                "methods": [
                    {
                        "kind": m.kind.value, "b_boot": m.b_boot, "mc_draws": m.mc_draws,
                        "wild_weights": m.wild_weights.value,
                        "calibration": m.calibration.value, "seed": m.seed,
                    }
                    for m in spec.methods
                ],
            }
        )
    return {"scenarios": out}


def _cmd_simulate(args) -> int:
    specs = load_grid_config(args.config, default_seed=args.seed)
    print(json.dumps(effective_config(specs), indent=2))
    summaries = run_grid(specs, parallelism=args.jobs, csv_path=args.out)
    if args.out is None:
        write_results_csv(summaries, sys.stdout)
    else:
        print(f"results written to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from pathlib import Path

    parser = argparse.ArgumentParser(
        prog="coprimary",
        description="Multiplicity-adjusted co-primary sensitivity/specificity inference",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze a binary prediction CSV")
    p.add_argument("--data", required=True, help="CSV with header label,<test names...>")
    p.add_argument("--se0", type=float, required=True, help="minimal acceptable sensitivity")
    p.add_argument("--sp0", type=float, required=True, help="minimal acceptable specificity")
    p.add_argument("--alpha", type=float, default=0.025, help="one-sided level (default 0.025)")
    p.add_argument(
        "--method", default="maxt", choices=[k.value for k in MethodKind],
        help="multiple comparison procedure (default maxt)",
    )
    p.add_argument("--b-boot", type=int, default=2000, help="bootstrap replicates (default 2000)")
    p.add_argument("--mc-draws", type=int, default=100_000, help="MVN draws for maxt (default 1e5)")
    p.add_argument(
        "--wild-weights", default="rademacher", choices=[w.value for w in WildWeights],
    )
    p.add_argument(
        "--calibration", default="binding", choices=[c.value for c in Calibration],
        help="comparison critical value calibration (default binding)",
    )
    p.add_argument("--pseudo-count", type=float, default=DEFAULT_PSEUDO_COUNT)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--regions", default="both", choices=["comparison", "confidence", "both"])
    p.add_argument("--out-dir", type=Path, default=Path("coprimary_out"))
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("ingest-wdbc", help="threshold WDBC features into binary tests")
    p.add_argument("--input", required=True, help="path to wdbc.data (UCI layout)")
    p.add_argument("--output", required=True, help="output prediction CSV path")
    p.add_argument(
        "--features", default=",".join(SCENARIO_A_FEATURES),
        help="comma-separated feature names (default the three biomarker-assessment features)",
    )
    p.add_argument(
        "--thresholds", action="append", metavar="FEATURE=V1,V2,...",
        help="explicit thresholds for a feature (repeatable); others use quantiles",
    )
    p.add_argument(
        "--quantiles", default=",".join(str(q) for q in SCENARIO_A_QUANTILES),
        help="quantile levels for default thresholds",
    )
    p.set_defaults(func=_cmd_ingest_wdbc)

    p = sub.add_parser("simulate", help="run a JSON-configured scenario grid")
    p.add_argument("--config", required=True, help="grid config JSON path")
    p.add_argument("--out", default=None, help="results CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="parallel scenario processes")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="default base seed")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (SingularMatrixError, InfeasibleCorrelationError, SimulationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
