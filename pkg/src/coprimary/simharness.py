"""Scenario-grid simulation harness with FWER/power aggregation.

Each repetition generates one synthetic study and applies every requested
method to that same dataset.  A family-wise error event means at least one
true-null test was rejected; a (disjunctive) power event means at least one
false-null test was rejected.  Per-repetition seeds derive from the base
seed, a scenario hash and the repetition index, so extending a grid never
perturbs existing scenarios.
"""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .datagen import BiomarkerScenario, LfcScenario, generate, scenario_truth
from .estimation import DEFAULT_PSEUDO_COUNT, summarize
from .model import HypothesisSpec, ValidationError, null_truth_vector, validate_study
from .numerics import derive_seed
from .procedures import MethodSpec, apply_method, with_rep_seed

logger = logging.getLogger(__name__)

FAILURE_BUDGET = 0.01


class SimulationError(RuntimeError):
    """More than the tolerated share of repetitions failed."""


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation scenario: generator, hypotheses, methods and size."""

    generator: object
    hyp: HypothesisSpec
    methods: tuple
    n_sim: int
    base_seed: int
    label: str

    def __post_init__(self):
        if not isinstance(self.generator, (LfcScenario, BiomarkerScenario)):
            raise ValidationError(f"unknown generator type: {type(self.generator)!r}")
        object.__setattr__(self, "methods", tuple(self.methods))
        if len(self.methods) == 0:
            raise ValidationError("at least one method is required")
        if self.n_sim < 1:
            raise ValidationError(f"n_sim must be >= 1, got {self.n_sim}")


@dataclass(frozen=True)
class MethodSummary:
    """Aggregated estimates for one method within one scenario."""

    method: MethodSpec
    fwer: float | None
    fwer_mc_se: float | None
    power: float | None
    power_mc_se: float | None
    rejections_per_test: np.ndarray
    runtime_s: float


@dataclass(frozen=True)
class SimulationSummary:
    """Scenario-level results: per-method FWER/power with Monte-Carlo error."""

    label: str
    n_sim: int
    n1: int
    n0: int
    m: int
    n_true_nulls: int
    n_false_nulls: int
    methods: tuple
    n_failures: int
    runtime_s: float


def scenario_key(spec: ScenarioSpec) -> int:
    """Stable 64-bit hash of the scenario's generative content.

    Labels and method lists are excluded: scenarios that generate the same
    data see the same per-repetition datasets, and adding scenarios to a
    grid never perturbs existing ones.
    """
    payload = repr((spec.generator, spec.hyp)).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def count_events(reject: np.ndarray, null_true: np.ndarray) -> tuple:
    """(FWER event, power event) for one repetition's rejection vector.

    The FWER event is any rejection among true nulls; the power event any
    rejection among false nulls.  Events are None when the corresponding
    null subset is empty.
    """
    reject = np.asarray(reject, dtype=bool)
    null_true = np.asarray(null_true, dtype=bool)
    fwer_event = bool(np.any(reject & null_true)) if np.any(null_true) else None
    power_event = bool(np.any(reject & ~null_true)) if np.any(~null_true) else None
    return fwer_event, power_event


def _proportion(events: list) -> tuple:
    if not events:
        return None, None
    p = float(np.mean(events))
    return p, float(np.sqrt(p * (1.0 - p) / len(events)))


def run_scenario(spec: ScenarioSpec, pseudo_count: float = DEFAULT_PSEUDO_COUNT) -> SimulationSummary:
    """Run one scenario; pure function of the spec (including base_seed).

    Every method sees the identical StudyData within a repetition.
    Repetition seeds derive from (base_seed, scenario hash, repetition);
    each method's resampling seed additionally mixes in its position, so a
    MethodSpec's own ``seed`` only governs one-shot analyses, never the
    harness stream.  Failed repetitions are counted and the run aborts once
    more than 1% fail.
    """
    truth = scenario_truth(spec.generator)
    null_true = null_truth_vector(truth, spec.hyp)
    key = scenario_key(spec)
    m = truth.m

    fwer_events = {i: [] for i in range(len(spec.methods))}
    power_events = {i: [] for i in range(len(spec.methods))}
    rejections = {i: np.zeros(m, dtype=np.int64) for i in range(len(spec.methods))}
    runtimes = {i: 0.0 for i in range(len(spec.methods))}
    failures = 0
    allowed_failures = int(FAILURE_BUDGET * spec.n_sim)
    t_start = time.perf_counter()
    n1 = n0 = None

    for rep in range(spec.n_sim):
        rep_seed = derive_seed(spec.base_seed, key, rep)
        try:
            data = validate_study(generate(spec.generator, rep_seed))
            if logger.isEnabledFor(logging.DEBUG):
                fingerprint = hashlib.blake2b(
                    data.q1.tobytes() + data.q0.tobytes(), digest_size=8
                ).hexdigest()
                logger.debug("scenario %r rep %d dataset %s", spec.label, rep, fingerprint)
            summary = summarize(data, spec.hyp, pseudo_count=pseudo_count)
            n1, n0 = data.n1, data.n0
            for i, method in enumerate(spec.methods):
                t0 = time.perf_counter()
                result = apply_method(
                    data, summary, spec.hyp, with_rep_seed(method, derive_seed(rep_seed, i))
                )
                runtimes[i] += time.perf_counter() - t0
                fwer_event, power_event = count_events(result.reject, null_true)
                if fwer_event is not None:
                    fwer_events[i].append(fwer_event)
                if power_event is not None:
                    power_events[i].append(power_event)
                rejections[i] += result.reject.astype(np.int64)
        except Exception:
            failures += 1
            logger.exception("repetition %d of scenario %r failed", rep, spec.label)
            if failures > allowed_failures:
                raise SimulationError(
                    f"scenario {spec.label!r}: {failures} failed repetitions exceed "
                    f"the {FAILURE_BUDGET:.0%} budget of n_sim={spec.n_sim}"
                )

    method_summaries = []
    for i, method in enumerate(spec.methods):
        fwer, fwer_se = _proportion(fwer_events[i])
        power, power_se = _proportion(power_events[i])
        counts = rejections[i]
        counts.flags.writeable = False
        method_summaries.append(
            MethodSummary(
                method=method,
                fwer=fwer,
                fwer_mc_se=fwer_se,
                power=power,
                power_mc_se=power_se,
                rejections_per_test=counts,
                runtime_s=runtimes[i],
            )
        )
    if n1 is None:
        raise SimulationError(f"scenario {spec.label!r}: every repetition failed")
    return SimulationSummary(
        label=spec.label,
        n_sim=spec.n_sim,
        n1=n1,
        n0=n0,
        m=m,
        n_true_nulls=int(np.sum(null_true)),
        n_false_nulls=int(np.sum(~null_true)),
        methods=tuple(method_summaries),
        n_failures=failures,
        runtime_s=time.perf_counter() - t_start,
    )


def summary_csv_rows(summary: SimulationSummary) -> list:
    """Rows of the results CSV: label,method,metric,estimate,mc_se,n_sim,n,n1,n0,m."""
    rows = []
    for ms in summary.methods:
        for metric, est, se in (
            ("fwer", ms.fwer, ms.fwer_mc_se),
            ("power", ms.power, ms.power_mc_se),
        ):
            if est is None:
                continue
            rows.append(
                f"{summary.label},{ms.method.label},{metric},{est:.6f},{se:.6f},"
                f"{summary.n_sim},{summary.n1 + summary.n0},{summary.n1},{summary.n0},{summary.m}"
            )
    return rows


RESULTS_CSV_HEADER = "label,method,metric,estimate,mc_se,n_sim,n,n1,n0,m"


def write_results_csv(summaries, fh) -> None:
    fh.write(RESULTS_CSV_HEADER + "\n")
    for summary in summaries:
        for row in summary_csv_rows(summary):
            fh.write(row + "\n")


def _run_scenario_worker(spec: ScenarioSpec, pseudo_count: float) -> SimulationSummary:
    """Pool target: limit BLAS threads so parallel workers do not oversubscribe."""
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return run_scenario(spec, pseudo_count=pseudo_count)
    with threadpool_limits(limits=1):
        return run_scenario(spec, pseudo_count=pseudo_count)


def run_grid(specs, parallelism: int = 1, csv_path=None, pseudo_count: float = DEFAULT_PSEUDO_COUNT):
    """Run a list of scenarios, optionally in parallel processes.

    Results are identical to sequential execution regardless of
    ``parallelism`` because :func:`run_scenario` is a pure function of its
    spec.  Completed scenarios are appended to ``csv_path`` as they finish
    (partial results survive a crash); on success the file is rewritten in
    input order.  Per-scenario errors are isolated and re-raised together
    at the end, labeled.
    """
    specs = list(specs)
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        raise ValidationError(f"duplicate scenario labels: {dupes}")
    if parallelism < 1:
        raise ValidationError(f"parallelism must be >= 1, got {parallelism}")
    if not specs:
        return []

    results: dict = {}
    errors: dict = {}

    def _persist(i, summary):
        if csv_path is None:
            return
        mode = "a" if results else "w"
        with open(csv_path, mode) as fh:
            if mode == "w":
                fh.write(RESULTS_CSV_HEADER + "\n")
            for row in summary_csv_rows(summary):
                fh.write(row + "\n")

    done = 0
    if parallelism == 1:
        for i, spec in enumerate(specs):
            try:
                summary = run_scenario(spec, pseudo_count=pseudo_count)
            except Exception as exc:  # isolate per-scenario failures
                errors[spec.label] = exc
                logger.error("scenario %r failed: %s", spec.label, exc)
                continue
            _persist(i, summary)
            results[i] = summary
            done += 1
            logger.info("scenario %r done (%d/%d)", spec.label, done, len(specs))
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = {
                pool.submit(_run_scenario_worker, spec, pseudo_count): i
                for i, spec in enumerate(specs)
            }
            for fut in as_completed(futures):
                i = futures[fut]
                try:
                    summary = fut.result()
                except Exception as exc:
                    errors[specs[i].label] = exc
                    logger.error("scenario %r failed: %s", specs[i].label, exc)
                    continue
                _persist(i, summary)
                results[i] = summary
                done += 1
                logger.info("scenario %r done (%d/%d)", specs[i].label, done, len(specs))

    if errors:
        details = "; ".join(f"{label}: {exc}" for label, exc in sorted(errors.items()))
        raise SimulationError(f"{len(errors)} scenario(s) failed: {details}")

    ordered = [results[i] for i in range(len(specs))]
    if csv_path is not None:
        with open(csv_path, "w") as fh:
            write_results_csv(ordered, fh)
    return ordered
