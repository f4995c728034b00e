"""Seeded Monte Carlo experiment runner: capacity ratio vs interconnection
bandwidth for each processing method.

Determinism contract: every trial derives its generators from
``SeedSequence([master_seed, cell_index, trial_index, stream])`` where
``cell_index`` enumerates the (L, T, SNR) grid of the spec and ``stream``
is a fixed slot per purpose (channel draw, combining module draw, one per
randomized method).  Results are therefore bit-identical for a fixed spec
regardless of worker count or scheduling, and each method's numbers do
not change when other methods are added to or removed from the run.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baseline as baseline_mod
from .model import SystemConfig, capacity_ratio, sample_channel
from .optim import OptimOptions, optimize
from .wax import CombiningModule, effective_transform

METHODS = ("proposed", "baseline", "unconstrained", "random")

WORKERS_ENV_VAR = "WAXSIM_WORKERS"

CSV_HEADER = (
    "method,L,T,snr_db,mean_ratio,std_ratio,n_trials,lossless_fraction,mean_iters"
)

# threshold on the capacity ratio above which a non-iterative method's
# trial is counted as lossless (the proposed method uses its own flag)
LOSSLESS_RATIO_TOL = 1e-6

_STREAM_CHANNEL = 0
_STREAM_COMBINER = 1
_STREAM_PROPOSED = 2
_STREAM_RANDOM = 3


@dataclass(frozen=True)
class ExperimentSpec:
    """One full sweep: the cell grid, trial count, seeding, and methods."""

    m: int
    k: int
    l_values: tuple[int, ...]
    t_range: tuple[int, int]
    snr_db_values: tuple[float, ...]
    trials: int
    master_seed: int
    methods: tuple[str, ...] = METHODS
    fix_a_across_trials: bool = False
    optim: OptimOptions = field(default_factory=OptimOptions)

    def __post_init__(self):
        object.__setattr__(self, "l_values", tuple(int(x) for x in self.l_values))
        object.__setattr__(self, "t_range", tuple(int(x) for x in self.t_range))
        object.__setattr__(
            self, "snr_db_values", tuple(float(x) for x in self.snr_db_values)
        )
        object.__setattr__(self, "methods", tuple(self.methods))
        t_lo, t_hi = self.t_range
        if not (self.k <= t_lo <= t_hi <= self.m):
            raise ValueError(
                f"t_range {self.t_range} must lie within [K, M] = "
                f"[{self.k}, {self.m}]"
            )
        for l in self.l_values:
            if self.m % l != 0 or not (1 <= l <= self.k):
                raise ValueError(f"L={l} must divide M={self.m} and satisfy L <= K")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be a nonnegative integer")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")

    def cells(self) -> tuple[tuple[int, int, float], ...]:
        """The (L, T, snr_db) grid in deterministic sweep order."""
        t_lo, t_hi = self.t_range
        return tuple(
            (l, t, snr_db)
            for l in self.l_values
            for t in range(t_lo, t_hi + 1)
            for snr_db in self.snr_db_values
        )


@dataclass(frozen=True)
class TrialOutcome:
    """Per-method results of one paired trial (same channel, same A)."""

    l: int
    t: int
    snr_db: float
    trial_index: int
    ratios: dict[str, float | None]
    lossless: dict[str, bool]
    iters: dict[str, int]
    skipped: tuple[str, ...]
    n_degenerate_blocks: int


@dataclass(frozen=True)
class SweepRow:
    method: str
    l: int
    t: int
    snr_db: float
    mean_ratio: float
    std_ratio: float
    n_trials: int
    lossless_fraction: float
    mean_iters: float


@dataclass(frozen=True)
class SweepResult:
    """Aggregated rows plus diagnostics: ``skipped`` lists
    (method, L, T, snr_db, count) for cells where trials were excluded."""

    spec: ExperimentSpec
    rows: tuple[SweepRow, ...]
    skipped: tuple[tuple[str, int, int, float, int], ...] = ()


def _stream_rng(
    master_seed: int, cell_index: int, trial_index: int, stream: int
) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, cell_index, trial_index, stream])
    )


def run_trial(
    spec: ExperimentSpec, l: int, t: int, snr_db: float, trial_index: int
) -> TrialOutcome:
    """One paired trial of the requested methods on a shared (H, A) draw.

    The unconstrained method is skipped (ratio None) when its solution
    contains a numerically singular block; the baseline projection falls
    back to a valid projection for such blocks and is never skipped.
    """
    cell_index = spec.cells().index((l, t, float(snr_db)))
    snr = 10.0 ** (snr_db / 10.0)
    cfg = SystemConfig(m=spec.m, k=spec.k, l=l, t=t, snr=snr)

    ch = sample_channel(cfg, _stream_rng(spec.master_seed, cell_index, trial_index, _STREAM_CHANNEL))
    if spec.fix_a_across_trials:
        a_rng = np.random.default_rng(
            np.random.SeedSequence([spec.master_seed, cell_index, _STREAM_COMBINER])
        )
    else:
        a_rng = _stream_rng(spec.master_seed, cell_index, trial_index, _STREAM_COMBINER)
    a = CombiningModule.sample(cfg, a_rng)

    sol = None
    if "baseline" in spec.methods or "unconstrained" in spec.methods:
        sol = baseline_mod.solve_unconstrained(ch, a, cfg)

    ratios: dict[str, float | None] = {}
    lossless: dict[str, bool] = {}
    iters: dict[str, int] = {}
    skipped: list[str] = []
    n_degenerate = len(sol.degenerate_blocks()) if sol is not None else 0

    for method in spec.methods:
        if method == "proposed":
            res = optimize(
                ch,
                a,
                cfg,
                spec.optim,
                _stream_rng(spec.master_seed, cell_index, trial_index, _STREAM_PROPOSED),
            )
            g = effective_transform(res.w, a)
            ratios[method] = capacity_ratio(ch, g, snr)
            lossless[method] = res.lossless
            iters[method] = res.total_sweeps
        elif method == "unconstrained":
            if n_degenerate > 0:
                ratios[method] = None
                lossless[method] = False
                iters[method] = 0
                skipped.append(method)
            else:
                g = baseline_mod.unconstrained_transform(sol, a)
                r = capacity_ratio(ch, g, snr)
                ratios[method] = r
                lossless[method] = r > 1.0 - LOSSLESS_RATIO_TOL
                iters[method] = 0
        elif method == "baseline":
            w = baseline_mod.project_to_unitary_blocks(sol)
            r = capacity_ratio(ch, effective_transform(w, a), snr)
            ratios[method] = r
            lossless[method] = r > 1.0 - LOSSLESS_RATIO_TOL
            iters[method] = 0
        elif method == "random":
            w = baseline_mod.random_isotropic_filter(
                cfg, _stream_rng(spec.master_seed, cell_index, trial_index, _STREAM_RANDOM)
            )
            r = capacity_ratio(ch, effective_transform(w, a), snr)
            ratios[method] = r
            lossless[method] = r > 1.0 - LOSSLESS_RATIO_TOL
            iters[method] = 0

    return TrialOutcome(
        l=l,
        t=t,
        snr_db=snr_db,
        trial_index=trial_index,
        ratios=ratios,
        lossless=lossless,
        iters=iters,
        skipped=tuple(skipped),
        n_degenerate_blocks=n_degenerate,
    )


def _run_trial_task(args) -> TrialOutcome:
    spec, l, t, snr_db, trial_index = args
    return run_trial(spec, l, t, snr_db, trial_index)


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    return max(1, workers)


def run_sweep(spec: ExperimentSpec, workers: int | None = None) -> SweepResult:
    """Run the full (L, T, SNR) x trials grid and aggregate per-cell stats.

    ``workers`` > 1 distributes trials over processes; the aggregation
    collects all outcomes first and reduces them in deterministic cell
    order, so the result is identical for any worker count (override via
    the WAXSIM_WORKERS environment variable when not given).
    """
    workers = _resolve_workers(workers)
    cells = spec.cells()
    tasks = [
        (spec, l, t, snr_db, trial_index)
        for (l, t, snr_db) in cells
        for trial_index in range(spec.trials)
    ]
    if workers == 1:
        outcomes = [_run_trial_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (8 * workers))
            outcomes = list(pool.map(_run_trial_task, tasks, chunksize=chunk))

    by_cell: dict[tuple[int, int, float], list[TrialOutcome]] = {c: [] for c in cells}
    for outcome in outcomes:
        by_cell[(outcome.l, outcome.t, outcome.snr_db)].append(outcome)

    rows: list[SweepRow] = []
    skipped: list[tuple[str, int, int, float, int]] = []
    for cell in cells:
        l, t, snr_db = cell
        cell_outcomes = sorted(by_cell[cell], key=lambda o: o.trial_index)
        for method in spec.methods:
            vals = [
                o.ratios[method] for o in cell_outcomes if o.ratios[method] is not None
            ]
            flags = [
                o.lossless[method] for o in cell_outcomes if o.ratios[method] is not None
            ]
            its = [
                o.iters[method] for o in cell_outcomes if o.ratios[method] is not None
            ]
            n = len(vals)
            n_skipped = len(cell_outcomes) - n
            if n_skipped:
                skipped.append((method, l, t, snr_db, n_skipped))
            rows.append(
                SweepRow(
                    method=method,
                    l=l,
                    t=t,
                    snr_db=snr_db,
                    mean_ratio=float(np.mean(vals)) if n else math.nan,
                    std_ratio=float(np.std(vals)) if n else math.nan,
                    n_trials=n,
                    lossless_fraction=float(np.mean(flags)) if n else math.nan,
                    mean_iters=float(np.mean(its)) if n else math.nan,
                )
            )
    return SweepResult(spec=spec, rows=tuple(rows), skipped=tuple(skipped))


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def render(result: SweepResult, format: str = "csv") -> str:
    """Serialize a sweep result; numbers carry 12 significant digits."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in result.rows:
            writer.writerow(
                [
                    r.method,
                    r.l,
                    r.t,
                    _fmt(r.snr_db),
                    _fmt(r.mean_ratio),
                    _fmt(r.std_ratio),
                    r.n_trials,
                    _fmt(r.lossless_fraction),
                    _fmt(r.mean_iters),
                ]
            )
        return buf.getvalue()
    if format == "json":
        payload = {
            "spec": asdict(result.spec),
            "rows": [asdict(r) for r in result.rows],
            "skipped_trials": [list(s) for s in result.skipped],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {format!r} (expected 'csv' or 'json')")


def emit(result: SweepResult, format: str, path) -> str:
    """Write the rendered result to ``path`` and return the path."""
    text = render(result, format)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write sweep output to {path}: {e}") from e
    return str(path)
