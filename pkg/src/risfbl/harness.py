"""Seeded Monte Carlo sweeps, CSV output and per-point aggregation."""
from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ao import baseline_random_phase, baseline_shannon, random_phase, run_alternating, utopia_points
from .beamform import coupling_set, mrt_precoders, total_fbl_rate
from .channel import corrupt_csi, derive_seed, sample_channels
from .config import ConfigError, SystemConfig

log = logging.getLogger(__name__)

SWEEPS = ("alpha", "ris_elements", "power", "csi_rho")
VARIANTS = ("optimized", "random_phase")
CSV_HEADER = ["sweep", "realization", "seed", "variant", "L_fbl", "L_shannon", "m_total", "m_rounded",
              "mu", "iters", "runtime_ms"]
NUMERIC_COLUMNS = ["L_fbl", "L_shannon", "m_total", "m_rounded", "mu", "iters", "runtime_ms"]


@dataclass(frozen=True)
class TrialRecord:
    sweep_value: float
    realization_index: int
    seed: int
    variant: str
    L_total_fbl: float
    L_total_shannon: float
    m_total: float
    m_total_rounded: int
    mu_final: float
    iterations: int
    runtime_ms: float
    error: str = ""  # non-empty for a failed trial; numeric fields are then NaN

    @property
    def ok(self) -> bool:
        return not self.error

    def sort_key(self):
        return (self.sweep_value, self.realization_index, VARIANTS.index(self.variant))


def sweep_config(config: SystemConfig, sweep: str, value) -> SystemConfig:
    """The configuration at one sweep point. Raises ConfigError on bad values."""
    if sweep == "alpha":
        return config.replace(alpha=float(value))
    if sweep == "ris_elements":
        if float(value) != int(value):
            raise ConfigError(f"ris_elements: sweep value {value} is not an integer")
        return config.replace(ris_elements=int(value))
    if sweep == "power":
        return config.replace(p_total=float(value))
    if sweep == "csi_rho":
        return config.replace(csi_rho=float(value))
    raise ConfigError(f"sweep: unknown sweep {sweep!r}, expected one of {SWEEPS}")


def _failed(value, r, seed, variant, err):
    nan = float("nan")
    return TrialRecord(float(value), r, seed, variant, nan, nan, nan, 0, nan, 0, nan,
                       error=f"{type(err).__name__}: {err}")


def _evaluate(config, true_channels, value, r, seed, variant, report, elapsed):
    # allocations are found on the (possibly corrupted) estimate and scored on the truth
    alloc = report.final_allocation
    w = report.precoders if config.precode_on_estimate else mrt_precoders(true_channels, alloc.phase)
    cpl = coupling_set(true_channels, w)
    l_fbl, _ = total_fbl_rate(alloc, cpl, config, mode="exact", clamp=True)
    l_sh = baseline_shannon(config, true_channels, alloc, precoders=w)
    return TrialRecord(
        sweep_value=float(value), realization_index=r, seed=seed, variant=variant,
        L_total_fbl=l_fbl, L_total_shannon=l_sh, m_total=report.m_total,
        m_total_rounded=int(report.rounded_blocklength.sum()), mu_final=report.mu,
        iterations=report.iterations, runtime_ms=1e3 * elapsed,
    )


def run_trial(config: SystemConfig, value, realization: int, seed: int, baseline: bool = True) -> list:
    """Both variants on one channel realization. Failures come back as records."""
    out = []
    try:
        channels = sample_channels(config, seed)
        estimate = corrupt_csi(channels, config.csi_rho, seed)
    except Exception as err:  # noqa: BLE001 - recorded, never fatal
        return [_failed(value, realization, seed, v, err) for v in (VARIANTS if baseline else VARIANTS[:1])]

    t0 = time.perf_counter()
    try:
        utopia = utopia_points(config, estimate, seed)
        report = run_alternating(config, estimate, seed=seed, utopia=utopia)
        out.append(_evaluate(config, channels, value, realization, seed, "optimized", report,
                             time.perf_counter() - t0))
    except Exception as err:  # noqa: BLE001
        log.warning("optimized trial failed (value=%s, realization=%d): %s", value, realization, err)
        out.append(_failed(value, realization, seed, "optimized", err))

    if baseline:
        t0 = time.perf_counter()
        try:
            theta = random_phase(config.ris_elements, seed)
            utopia = utopia_points(config, estimate, seed, phase=theta)
            report = baseline_random_phase(config, estimate, seed=seed, utopia=utopia, phase=theta)
            out.append(_evaluate(config, channels, value, realization, seed, "random_phase", report,
                                 time.perf_counter() - t0))
        except Exception as err:  # noqa: BLE001
            log.warning("baseline trial failed (value=%s, realization=%d): %s", value, realization, err)
            out.append(_failed(value, realization, seed, "random_phase", err))
    return out


def _run_task(args):
    return run_trial(*args)


def run_sweep(config: SystemConfig, sweep: str, values, realizations: int, base_seed: int = 0,
              baseline: bool = True, jobs: int = 1) -> list:
    """Run every (value, realization) trial and return the sorted records.

    The channel seed of a trial is ``derive_seed(base_seed, value_index, realization)``.
    Trials are independent, so ``jobs > 1`` farms them out to worker
    processes without changing the result.
    """
    values = list(values)
    if not values:
        raise ValueError("values must be nonempty")
    if realizations < 1:
        raise ValueError(f"realizations must be >= 1, got {realizations}")
    configs = [sweep_config(config, sweep, v) for v in values]

    tasks = [(cfg, v, r, derive_seed(base_seed, i, r), baseline)
             for i, (cfg, v) in enumerate(zip(configs, values)) for r in range(realizations)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        batches = [_run_task(t) for t in tasks]
    records = [rec for batch in batches for rec in batch]
    return sorted(records, key=TrialRecord.sort_key)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def write_csv(records, path, timings: bool = False) -> None:
    """Successful trials, one row each, sorted by (sweep value, realization, variant).

    ``runtime_ms`` is written as 0 unless ``timings`` is set, since wall
    time would otherwise make repeated runs differ byte for byte.
    """
    rows = sorted((r for r in records if r.ok), key=TrialRecord.sort_key)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                _fmt(r.sweep_value), r.realization_index, r.seed, r.variant,
                _fmt(r.L_total_fbl), _fmt(r.L_total_shannon), _fmt(r.m_total), r.m_total_rounded,
                _fmt(r.mu_final), r.iterations, _fmt(r.runtime_ms if timings else 0.0),
            ])


def write_failures(records, path) -> int:
    failed = sorted((r for r in records if not r.ok), key=TrialRecord.sort_key)
    if not failed:
        return 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sweep", "realization", "seed", "variant", "error"])
        for r in failed:
            writer.writerow([_fmt(r.sweep_value), r.realization_index, r.seed, r.variant, r.error])
    return len(failed)


def _columns(rec: TrialRecord) -> dict:
    return {"L_fbl": rec.L_total_fbl, "L_shannon": rec.L_total_shannon, "m_total": rec.m_total,
            "m_rounded": rec.m_total_rounded, "mu": rec.mu_final, "iters": rec.iterations,
            "runtime_ms": rec.runtime_ms}


def standard_error(x) -> float:
    """Sample standard deviation over sqrt(n); NaN for fewer than two samples."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float("nan")
    return float(np.std(x, ddof=1) / math.sqrt(x.size))


def aggregate(records) -> list:
    """Mean and standard error of every numeric column per (sweep value, variant).

    Returns a list of dicts ordered by value then variant; failed trials are skipped.
    """
    groups: dict = {}
    for rec in records:
        if rec.ok:
            groups.setdefault((rec.sweep_value, rec.variant), []).append(_columns(rec))
    out = []
    for (value, variant) in sorted(groups, key=lambda g: (g[0], VARIANTS.index(g[1]))):
        rows = groups[(value, variant)]
        entry = {"sweep": value, "variant": variant, "n": len(rows)}
        for col in NUMERIC_COLUMNS:
            data = [row[col] for row in rows]
            entry[f"{col}_mean"] = float(np.mean(data))
            entry[f"{col}_stderr"] = standard_error(data)
        out.append(entry)
    return out


def aggregate_header() -> list:
    cols = ["sweep", "variant", "n"]
    for col in NUMERIC_COLUMNS:
        cols += [f"{col}_mean", f"{col}_stderr"]
    return cols


def write_aggregate_csv(summary, path, timings: bool = False) -> None:
    """Per-point summary; runtime columns are zeroed unless ``timings`` (see write_csv)."""
    header = aggregate_header()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for entry in summary:
            row = []
            for c in header:
                if c in ("variant", "n"):
                    row.append(entry[c])
                elif c.startswith("runtime_ms") and not timings:
                    row.append(_fmt(0.0))
                else:
                    row.append(_fmt(entry[c]))
            writer.writerow(row)


def read_aggregate_csv(path) -> list:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            entry = {k: (v if k == "variant" else int(v) if k == "n" else float(v)) for k, v in row.items()}
            out.append(entry)
    return out


def series(summary, variant: str, column: str):
    """(values, means, stderrs) of one column for one variant, sorted by value."""
    rows = sorted((e for e in summary if e["variant"] == variant), key=lambda e: e["sweep"])
    return (np.array([e["sweep"] for e in rows]),
            np.array([e[f"{column}_mean"] for e in rows]),
            np.array([e[f"{column}_stderr"] for e in rows]))


def output_paths(out_dir, sweep: str) -> dict:
    out = Path(out_dir)
    return {"trials": out / f"trials_{sweep}.csv", "summary": out / f"summary_{sweep}.csv",
            "failures": out / f"failures_{sweep}.csv", "figure": out / f"{sweep}.png"}
