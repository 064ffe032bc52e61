"""Vanishing surveys over ranges of twist conductors.

Records are appended to a CSV one conductor at a time. After each conductor a
checkpoint (last completed conductor, CSV byte length, running summary) is
written atomically, so an interrupted run resumes to a byte-identical file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import multiprocessing
import os
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .curve import CurveData, an_table, get_curve
from .dirichlet import ConductorFactorization, enumerate_classes, enumerate_conductors
from .lvalue import SPLITS, AfeParams, LValueError, TwistEvaluator, TwistRecord, truncation_length
from .rmt import RmtModel, growth_classification, heuristic_cumulative, heuristic_sum

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "k", "m", "class_id", "char_spec", "t", "re_L", "im_L", "n_coords", "residual", "vanishing",
)
CHECKPOINT_VERSION = 1
SPLIT_SAMPLE_RATE = 100  # one split self-test per this many classes

EXIT_OK = 0
EXIT_PRECISION = 2
EXIT_CONFIG = 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SurveyConfig:
    curve: str
    k: int
    X_max: int
    out: str
    checkpoint: str | None = None
    eps: float = 1e-10
    coprime_only: bool = True
    jobs: int = 1
    include_k_squared: bool = True
    catalogue: str | None = None

    def __post_init__(self):
        if self.X_max < 3:
            raise ConfigError("X_max must be at least 3")
        if not 0 < self.eps <= 1e-6:
            raise ConfigError("eps must lie in (0, 1e-6]")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")

    def fingerprint(self) -> str:
        """Hash of every setting that affects the output bytes."""
        keys = ("curve", "k", "X_max", "eps", "coprime_only", "include_k_squared", "catalogue")
        blob = json.dumps({k: getattr(self, k) for k in keys}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def dyadic_window(m: int) -> int:
    """Index j of the window [2^j, 2^{j+1}) containing m."""
    return m.bit_length() - 1


@dataclass
class SurveySummary:
    curve: str
    k: int
    X_max: int
    include_k_squared: bool
    coprime_only: bool
    conductors: int = 0
    classes: int = 0
    vanishing_classes: int = 0
    max_residual: float = 0.0
    max_imag: float = 0.0
    split_checks: int = 0
    split_max_diff: float = 0.0
    window_classes: dict[str, int] = field(default_factory=dict)
    window_vanishing: dict[str, int] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    @property
    def vanishing_characters(self) -> int:
        return (self.k - 1) * self.vanishing_classes

    @property
    def characters(self) -> int:
        return (self.k - 1) * self.classes

    @property
    def error_count(self) -> int:
        return len(self.errors)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["vanishing_characters"] = self.vanishing_characters
        d["characters"] = self.characters
        d["error_count"] = self.error_count
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SurveySummary:
        names = cls.__dataclass_fields__
        return cls(**{k: v for k, v in d.items() if k in names})

    def add(self, result: ConductorResult) -> None:
        self.conductors += 1
        key = str(dyadic_window(result.m))
        for rec in result.records:
            self.classes += 1
            self.window_classes[key] = self.window_classes.get(key, 0) + 1
            if rec.vanishing:
                self.vanishing_classes += 1
                self.window_vanishing[key] = self.window_vanishing.get(key, 0) + 1
            self.max_residual = max(self.max_residual, rec.residual)
            self.max_imag = max(self.max_imag, rec.max_imag)
        for diff in result.split_diffs:
            self.split_checks += 1
            self.split_max_diff = max(self.split_max_diff, diff)
        self.errors.extend(result.errors)


@dataclass
class ConductorResult:
    m: int
    records: list[TwistRecord]
    errors: list[str]
    split_diffs: list[float]


# -- per-conductor work ---------------------------------------------------

_WORKER: dict = {}


def _init_worker(curve: CurveData, table, params: AfeParams) -> None:
    _WORKER["evaluator"] = TwistEvaluator(curve, table, params)


def _split_sampled(label: str) -> bool:
    return zlib.crc32(label.encode()) % SPLIT_SAMPLE_RATE == 0


def evaluate_conductor(evaluator: TwistEvaluator, k: int, fac: ConductorFactorization) -> ConductorResult:
    records, errors, diffs = [], [], []
    for cls in enumerate_classes(k, fac):
        try:
            records.append(evaluator.record(cls))
        except LValueError as exc:
            errors.append(f"{cls.representative.label}: {exc}")
            continue
        if _split_sampled(cls.representative.label):
            eps = evaluator.params.eps
            a, b = (evaluator.conjugate_values(cls.representative, AfeParams(eps, A)) for A in SPLITS)
            diffs.append(max(abs(x - y) for x, y in zip(a, b)))
    return ConductorResult(fac.m, records, errors, diffs)


def _worker_task(task: tuple[int, ConductorFactorization]) -> ConductorResult:
    k, fac = task
    return evaluate_conductor(_WORKER["evaluator"], k, fac)


# -- CSV ------------------------------------------------------------------


def format_rows(rec: TwistRecord) -> list[list[str]]:
    coords = ";".join(str(c) for c in rec.element.coords)
    rows = []
    for t, lt in enumerate(rec.l_values, start=1):
        rows.append([
            str(rec.k), str(rec.m), str(rec.class_id), rec.char_label, str(t),
            repr(lt.real), repr(lt.imag), coords, repr(rec.residual),
            "1" if rec.vanishing else "0",
        ])
    return rows


def _csv_text(rows: Iterable[Iterable[str]]) -> bytes:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().encode()


class _CsvWriter:
    def __init__(self, path: Path, truncate_to: int | None):
        if truncate_to is None:
            self.fh = open(path, "wb")
            self.fh.write(_csv_text([CSV_COLUMNS]))
        else:
            self.fh = open(path, "r+b")
            self.fh.truncate(truncate_to)
            self.fh.seek(truncate_to)

    def write(self, result: ConductorResult) -> int:
        self.fh.write(_csv_text(row for rec in result.records for row in format_rows(rec)))
        self.fh.flush()
        os.fsync(self.fh.fileno())
        return self.fh.tell()

    def close(self) -> None:
        self.fh.close()


def _write_json_atomic(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


# -- driver ---------------------------------------------------------------


@dataclass
class SurveyResult:
    summary: SurveySummary
    completed: bool
    resumed_from: int | None

    @property
    def exit_code(self) -> int:
        return EXIT_PRECISION if self.summary.errors else EXIT_OK


def survey_conductors(config: SurveyConfig, curve: CurveData) -> list[ConductorFactorization]:
    # without the coprime filter, shared-factor conductors surface as recorded errors
    coprime_to = curve.conductor if config.coprime_only else 1
    return list(enumerate_conductors(config.k, config.X_max, coprime_to, config.include_k_squared))


def table_size(curve: CurveData, config: SurveyConfig) -> int:
    """Coefficients needed for every conductor up to X_max, the eps/100 retry and the split self-test."""
    return max(
        truncation_length(config.X_max, curve.conductor, config.eps / 100.0),
        truncation_length(config.X_max, curve.conductor, config.eps, SPLITS[1]),
    )


def run_survey(
    config: SurveyConfig,
    stop_after: int | None = None,
    on_record: Callable[[TwistRecord], None] | None = None,
) -> SurveyResult:
    """Run (or resume) a survey; ``stop_after`` halts after that many new conductors."""
    curve = get_curve(config.curve, config.catalogue)
    out = Path(config.out)
    ckpt = Path(config.checkpoint) if config.checkpoint else None

    summary = SurveySummary(
        curve=curve.label, k=config.k, X_max=config.X_max,
        include_k_squared=config.include_k_squared, coprime_only=config.coprime_only,
    )
    last_m = 0
    truncate_to = None
    resumed_from = None
    if ckpt is not None and ckpt.exists() and out.exists():
        state = json.loads(ckpt.read_text())
        if state.get("version") != CHECKPOINT_VERSION or state.get("fingerprint") != config.fingerprint():
            raise ConfigError(f"checkpoint {ckpt} belongs to a different survey configuration")
        if state.get("done"):
            return SurveyResult(SurveySummary.from_dict(state["summary"]), True, state["last_m"])
        last_m = state["last_m"]
        truncate_to = state["csv_bytes"]
        summary = SurveySummary.from_dict(state["summary"])
        resumed_from = last_m
        logger.info("resuming after m=%d", last_m)

    todo = [f for f in survey_conductors(config, curve) if f.m > last_m]
    if stop_after is not None:
        todo_run = todo[:stop_after]
    else:
        todo_run = todo

    params = AfeParams(config.eps)
    table = an_table(curve, table_size(curve, config))
    evaluator = TwistEvaluator(curve, table, params)

    writer = _CsvWriter(out, truncate_to)
    try:
        for result in _results(evaluator, config.k, todo_run, config.jobs):
            if on_record is not None:
                for rec in result.records:
                    on_record(rec)
            summary.add(result)
            size = writer.write(result)
            if ckpt is not None:
                _write_json_atomic(ckpt, {
                    "version": CHECKPOINT_VERSION,
                    "fingerprint": config.fingerprint(),
                    "last_m": result.m,
                    "csv_bytes": size,
                    "done": False,
                    "summary": summary.to_dict(),
                })
    finally:
        writer.close()

    completed = len(todo_run) == len(todo)
    if completed:
        if ckpt is not None:
            _write_json_atomic(ckpt, {
                "version": CHECKPOINT_VERSION,
                "fingerprint": config.fingerprint(),
                "last_m": todo[-1].m if todo else last_m,
                "csv_bytes": out.stat().st_size,
                "done": True,
                "summary": summary.to_dict(),
            })
        _write_json_atomic(out.with_name(out.name + ".summary.json"), summary.to_dict())
    return SurveyResult(summary, completed, resumed_from)


def _results(
    evaluator: TwistEvaluator, k: int, facs: list[ConductorFactorization], jobs: int
) -> Iterable[ConductorResult]:
    if jobs == 1 or len(facs) < 2:
        for fac in facs:
            yield evaluate_conductor(evaluator, k, fac)
        return
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(
        jobs, initializer=_init_worker, initargs=(evaluator.curve, evaluator.table, evaluator.params)
    ) as pool:
        # imap keeps conductor order, so output bytes do not depend on jobs
        yield from pool.imap(_worker_task, [(k, f) for f in facs])


# -- reading surveys back -------------------------------------------------


def read_survey_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected CSV columns {reader.fieldnames}")
        return list(reader)


def observed_windows(rows: list[dict]) -> tuple[int, dict[int, int], dict[int, int]]:
    """k and per-window (classes, vanishing classes) from survey CSV rows (t = 1 rows)."""
    ks = {int(r["k"]) for r in rows}
    if len(ks) > 1:
        raise ConfigError("survey CSV mixes several orders")
    classes: dict[int, int] = {}
    vanishing: dict[int, int] = {}
    for r in rows:
        if r["t"] != "1":
            continue
        j = dyadic_window(int(r["m"]))
        classes[j] = classes.get(j, 0) + 1
        if r["vanishing"] == "1":
            vanishing[j] = vanishing.get(j, 0) + 1
    return (ks.pop() if ks else 0), classes, vanishing


# -- predictions ----------------------------------------------------------

PREDICT_COLUMNS = ("k", "X", "N", "sum", "classification", "C_E", "aE_half")
WINDOW_COLUMNS = (
    "window_lo", "window_hi", "observed_vanishing_classes", "observed_vanishing_characters",
    "heuristic_characters",
)


def predict_report(
    k: int,
    X: int,
    model: RmtModel | None = None,
    observed: list[dict] | None = None,
    coprime_to: int = 1,
    include_k_squared: bool = True,
) -> dict:
    """Heuristic expected count and regime; with survey rows, a per-window comparison."""
    model = model or RmtModel(k, X)
    total, regime = heuristic_sum(k, X, model, coprime_to, include_k_squared)
    report = {
        "summary": {
            "k": k, "X": X, "N": model.N, "sum": total, "classification": regime,
            "C_E": model.C_E, "aE_half": model.aE_half,
        },
        "windows": [],
    }
    if observed is not None:
        ko, _, vanishing = observed_windows(observed)
        if ko and ko != k:
            raise ConfigError(f"observed survey has k={ko}, report asked for k={k}")
        top = dyadic_window(X)
        edges = [2**j for j in range(0, top + 1)] + [X]
        cum = heuristic_cumulative(k, edges, model, coprime_to, include_k_squared)
        for j in range(top + 1):
            lo, hi = 2**j, min(2 ** (j + 1) - 1, X)
            v = vanishing.get(j, 0)
            report["windows"].append({
                "window_lo": lo, "window_hi": hi,
                "observed_vanishing_classes": v,
                "observed_vanishing_characters": v * (k - 1),
                "heuristic_characters": float(cum[j + 1] - cum[j]),
            })
    return report


def write_report_csv(report: dict, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(PREDICT_COLUMNS)
    s = report["summary"]
    w.writerow([s[c] if not isinstance(s[c], float) else repr(s[c]) for c in PREDICT_COLUMNS])
    if report["windows"]:
        w.writerow([])
        w.writerow(WINDOW_COLUMNS)
        for row in report["windows"]:
            w.writerow([row[c] if not isinstance(row[c], float) else repr(row[c]) for c in WINDOW_COLUMNS])


__all__ = [
    "CSV_COLUMNS",
    "ConfigError",
    "SurveyConfig",
    "SurveyResult",
    "SurveySummary",
    "growth_classification",
    "predict_report",
    "read_survey_csv",
    "run_survey",
]
