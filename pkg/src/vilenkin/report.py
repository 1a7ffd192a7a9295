"""Run manifests, verification summaries, timing reports and curve files.

Every JSON report embeds the manifest that produced it.  Serialisation is
canonical (sorted keys, fixed float repr), so equal manifests and equal thread
counts give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, SpecMismatchError
from .group import GroupSpec, make_group
from .identities import (
    KERNEL_CHECKS,
    CheckResult,
    check_convolution,
    check_fast_transform,
    check_orthonormality,
    check_partition,
)
from .kernels import kernel_tables
from .system import Signal, forward_fast, forward_naive
from .summability import DivergenceReport, StrongSumReport

DEFAULT_TOLERANCES = {"kernel": 1e-10, "decomposition": 1e-9, "transform": 1e-9, "convolution": 1e-9}
BENCH_SIZES = (256, 1024, 4096)


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the clock for reproducible builds and reruns
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class RunManifest:
    command: str
    group: dict
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    tolerances: dict = field(default_factory=dict)
    tool_version: str = field(default_factory=tool_version)
    timestamp: str = field(default_factory=_timestamp)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "RunManifest":
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"malformed manifest: {exc}") from exc

    @property
    def spec(self) -> GroupSpec:
        return make_group(self.group["m"], self.group["N"])


def load_manifest(path: str | Path) -> RunManifest:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    if isinstance(data, dict) and "manifest" in data:
        data = data["manifest"]
    if not isinstance(data, dict):
        raise ConfigError(f"manifest {path} is not a JSON object")
    return RunManifest.from_json(data)


def _clean(obj):
    """Convert numpy scalars and arrays, tuples and non-string keys into plain JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


# -- verification ---------------------------------------------------------------


def truncate_to(spec: GroupSpec, max_M: int) -> GroupSpec:
    """Largest truncation of ``spec`` with ``M_N <= max_M``."""
    if max_M < 2:
        raise ConfigError(f"max_M must be at least 2, got {max_M}")
    N = max(n for n in range(spec.N + 1) if spec.M[n] <= max_M)
    if N == 0:
        raise ConfigError(f"first radix {spec.m[0]} already exceeds max_M={max_M}")
    return make_group(spec.m[:N], N)


def verify_suite(spec: GroupSpec, tables=None, seed: int = 0, tolerances: dict | None = None) -> list[Callable[[], CheckResult]]:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    jobs: list[Callable[[], CheckResult]] = [
        lambda: check_partition(spec),
        lambda: check_orthonormality(spec, tol["kernel"]),
        lambda: check_fast_transform(spec, seed, tol["transform"]),
    ]
    for name, fn in KERNEL_CHECKS.items():
        t = tol["decomposition"] if name.startswith("fejer_digit") else tol["kernel"]
        jobs.append(lambda fn=fn, t=t: fn(spec, tables, tol=t))
    jobs.append(lambda: check_convolution(spec, seed, n_signals=5, n_max=min(64, spec.size), tol=tol["convolution"]))
    return jobs


def run_checks(jobs: Sequence[Callable[[], CheckResult]], threads: int = 1) -> list[CheckResult]:
    """Run checks on a pool; results keep the submission order."""
    if threads <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


def run_verify_all(spec: GroupSpec, max_M: int = 1296, tables=None, seed: int = 0, threads: int = 1,
                   tolerances: dict | None = None, manifest: RunManifest | None = None) -> tuple[dict, int]:
    """Exhaustive identity scans on the truncation of ``spec`` below ``max_M``.

    Returns the summary and the exit code (0 iff every check passes).
    """
    spec = truncate_to(spec, max_M)
    if tables is not None and tables[0].shape != (spec.size, spec.size):
        raise SpecMismatchError("injected kernel tables do not match the truncated group")
    if tables is None:
        tables = kernel_tables(spec)
    results = run_checks(verify_suite(spec, tables, seed, tolerances), threads)
    ok = all(r.passed for r in results)
    summary = {
        "group": spec.to_json(),
        "checks": [r.to_json() for r in results],
        "failed": [r.name for r in results if not r.passed],
        "status": "pass" if ok else "fail",
    }
    if manifest is not None:
        summary["manifest"] = manifest.to_json()
    return summary, 0 if ok else 1


# -- benchmark --------------------------------------------------------------------


def _median_time(fn: Callable[[], object], repetitions: int) -> float:
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_group(pattern: Sequence[int], size: int) -> GroupSpec:
    """Cyclic extension of ``pattern`` truncated at the largest M_N <= size."""
    m, M = [], 1
    while M * pattern[len(m) % len(pattern)] <= size:
        M *= pattern[len(m) % len(pattern)]
        m.append(pattern[len(m) % len(pattern)])
    if not m:
        raise ConfigError(f"no truncation of {list(pattern)} fits in {size} cosets")
    return make_group(m)


def run_bench(pattern: Sequence[int] = (2,), repetitions: int = 3, sizes: Sequence[int] = BENCH_SIZES,
              seed: int = 0, manifest: RunManifest | None = None) -> dict:
    """Median wall time of the naive and fast forward transforms per group size."""
    if repetitions < 3:
        raise ConfigError(f"repetitions must be at least 3, got {repetitions}")
    rng = np.random.default_rng(seed)
    rows = []
    for size in sizes:
        spec = bench_group(pattern, size)
        f = Signal(spec, rng.standard_normal(spec.size) + 1j * rng.standard_normal(spec.size))
        dev = float(np.abs(forward_fast(f).coeffs - forward_naive(f).coeffs).max())
        t_naive = _median_time(lambda: forward_naive(f), repetitions)
        t_fast = _median_time(lambda: forward_fast(f), repetitions)
        rows.append({"size": spec.size, "m": list(spec.m), "naive_s": t_naive, "fast_s": t_fast,
                     "speedup": t_naive / t_fast if t_fast > 0 else float("inf"), "max_deviation": dev})
    largest = rows[-1]
    out = {"repetitions": repetitions, "rows": rows,
           "fast_below_naive_at_largest": largest["fast_s"] < largest["naive_s"]}
    if manifest is not None:
        out["manifest"] = manifest.to_json()
    return out


# -- curves ---------------------------------------------------------------------------


CURVE_COLUMNS = ("n", "term", "partial_sum", "block_id")


def _write_curve_rows(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for n, term, ps, bid in rows:
            w.writerow([int(n), repr(float(term)), repr(float(ps)), int(bid)])


def emit_curves(report: StrongSumReport | DivergenceReport, path: str | Path, manifest: RunManifest | None = None,
                extra: dict | None = None) -> list[Path]:
    """Write curve CSVs and a JSON summary into the directory ``path``.

    Strong-sum reports give ``t1.csv`` (curves stacked, ``block_id`` = atom
    index) and ``t1.json``; divergence reports give ``t2.csv`` (``block_id`` =
    order of the enclosing block, -1 outside) and ``blocks.json``.  A path
    ending in ``.csv`` names the curve file itself; the summary goes next to it.
    """
    out = Path(path)
    csv_name = None
    if out.suffix == ".csv":
        out, csv_name = out.parent, out.name
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    base = {"manifest": manifest.to_json()} if manifest is not None else {}
    base.update(extra or {})
    if isinstance(report, StrongSumReport):
        rows = []
        for i, c in enumerate(report.curves):
            rows += [(n, t, s, i) for n, t, s in zip(c.n, c.term, c.partial_sum)]
        csv_path = out / (csv_name or "t1.csv")
        _write_curve_rows(csv_path, rows)
        summary = {**base, "p": report.p, "n_max": report.n_max, "c_p": report.sup,
                   "argmax_atom": report.argmax_atom, "sup_per_atom": report.sup_per_atom,
                   "log_power": report.log_power, "log_convention": report.log_convention}
        return [csv_path, write_json(out / "t1.json", summary)]
    if isinstance(report, DivergenceReport):
        c = report.curve
        csv_path = out / (csv_name or "t2.csv")
        _write_curve_rows(csv_path, zip(c.n, c.term, c.partial_sum, c.block_id))
        summary = {**base, "restrict_A02": report.restrict_A02, "block_increments": report.blocks,
                   "lower_bound_constants": report.lower_bound_constants,
                   "final_partial_sum": float(c.partial_sum[-1]) if len(c.n) else 0.0}
        return [csv_path, write_json(out / "blocks.json", summary)]
    raise TypeError(f"cannot emit curves for {type(report).__name__}")
