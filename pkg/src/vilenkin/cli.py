"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a numeric check fails, 2 for
configuration or usage errors.  Each run writes a JSON report that embeds its
manifest; ``replay --manifest report.json`` re-executes it.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ConfigError, HypothesisViolationError, SelectionFailureError, VilenkinError
from .group import load_group
from .kernels import dirichlet, fejer, kernel_l1_norm, kernel_l1_sup
from .identities import KERNEL_CHECKS
from .report import DEFAULT_TOLERANCES, RunManifest, emit_curves, load_manifest, run_bench, run_checks
from .report import run_verify_all, truncate_to, write_json
from .spaces import atom_from_entry, atom_suite_entries
from .system import Signal, forward, inverse, read_signal, read_spectrum, write_signal, write_spectrum
from .summability import (
    CounterexampleSpec,
    StrongSumReport,
    build_counterexample,
    divergence_sum,
    expected_coefficients,
    log_power,
    parse_phi,
    select_alphas,
    split_scan,
    strong_sum_curve,
    verify_counterexample_decomposition,
)

COUNTEREXAMPLE_TOLERANCES = {"split": 1e-9, "split_consistency": 1e-6, "decomposition": 1e-9}


# -- handlers: each takes a manifest and an output directory, returns an exit code ----


def do_transform(man: RunManifest, out: Path) -> int:
    spec = man.spec
    prm = man.parameters
    if prm.get("inverse"):
        if not prm.get("input"):
            raise ConfigError("--inverse needs --input with a spectrum CSV")
        s = read_spectrum(prm["input"], spec)
        f = inverse(s)
        name = prm.get("csv") or "signal.csv"
        write_signal(out / name, f)
        result = {"direction": "inverse", "output": name}
    else:
        if prm.get("input"):
            f = read_signal(prm["input"], spec)
        else:
            rng = np.random.default_rng(man.seed)
            f = Signal(spec, rng.standard_normal(spec.size) + 1j * rng.standard_normal(spec.size))
            write_signal(out / "signal.csv", f)
        s = forward(f, naive=bool(prm.get("naive")))
        name = prm.get("csv") or "spectrum.csv"
        write_spectrum(out / name, s)
        back = inverse(s)
        result = {"direction": "forward", "output": name,
                  "roundtrip_error": float(np.abs(back.values - f.values).max())}
    write_json(out / "transform.json", {"manifest": man.to_json(), **result})
    return 0


def do_kernels(man: RunManifest, out: Path) -> int:
    spec = man.spec
    prm = man.parameters
    rows = []
    for n in prm["n"]:
        for kind, fn in (("dirichlet", dirichlet), ("fejer", fejer)):
            if prm["kind"] not in ("both", kind):
                continue
            table = fn(n, spec)
            name = prm.get("csv") or f"{kind}_{n}.csv"
            write_signal(out / name, table.signal)
            row = {"kind": kind, "n": n, "file": name}
            if kind == "fejer":
                row["l1_norm"] = kernel_l1_norm(n, spec)
            rows.append(row)
    report = {"manifest": man.to_json(), "kernels": rows}
    if prm.get("l1_sup"):
        sup, arg = kernel_l1_sup(spec)
        report["fejer_l1_sup"] = {"sup": sup, "argmax_n": arg}
    write_json(out / "kernels.json", report)
    return 0


def do_verify_lemmas(man: RunManifest, out: Path) -> int:
    spec = truncate_to(man.spec, man.parameters["max_M"])
    names = man.parameters["checks"] or list(KERNEL_CHECKS)
    unknown = sorted(set(names) - set(KERNEL_CHECKS))
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; choose from {sorted(KERNEL_CHECKS)}")
    tol = {**DEFAULT_TOLERANCES, **man.tolerances}
    jobs = [lambda fn=KERNEL_CHECKS[n], t=(tol["decomposition"] if n.startswith("fejer_digit") else tol["kernel"]): fn(spec, tol=t)
            for n in names]
    results = run_checks(jobs, man.threads)
    ok = all(r.passed for r in results)
    write_json(out / man.parameters.get("report", "lemmas.json"), {"manifest": man.to_json(), "group": spec.to_json(),
                                      "checks": [r.to_json() for r in results],
                                      "status": "pass" if ok else "fail"})
    return 0 if ok else 1


def do_verify_all(man: RunManifest, out: Path) -> int:
    summary, code = run_verify_all(man.spec, man.parameters["max_M"], seed=man.seed, threads=man.threads,
                                   tolerances=man.tolerances, manifest=man)
    write_json(out / "verify_all.json", summary)
    return code


def do_theorem1(man: RunManifest, out: Path) -> int:
    spec = man.spec
    prm = man.parameters
    p = prm["p"]
    atoms = [atom_from_entry(e, spec) for e in prm["atoms"]]
    n_max = prm["nmax"] or spec.size
    with ThreadPoolExecutor(max_workers=max(1, man.threads)) as pool:
        curves = list(pool.map(lambda a: strong_sum_curve(a.signal, p, n_max), atoms))
    sups = [float(np.nanmax(c.normalized)) for c in curves]
    i = int(np.argmax(sups))
    report = StrongSumReport(p, n_max, curves, sups, sups[i], i, log_power(p))
    emit_curves(report, out / prm["csv"], man)
    return 0


def do_theorem2(man: RunManifest, out: Path) -> int:
    spec = man.spec
    prm = man.parameters
    tol = {**COUNTEREXAMPLE_TOLERANCES, **man.tolerances}
    p, phi = prm["p"], parse_phi(prm["phi"])
    A = prm["A"] or spec.N
    sel = select_alphas(p, phi, spec, prm["summand_cap"], prm["total_cap"])
    cex = build_counterexample(CounterexampleSpec(p, phi, tuple(sel.orders), A), spec)
    dec = verify_counterexample_decomposition(cex, tol["decomposition"])
    expect = expected_coefficients(cex)
    coeff_err = float(np.abs(cex.spectrum.coeffs - expect).max() / max(1.0, np.abs(expect).max()))
    atom_bad = {t: a.violations() for t, a in zip(cex.orders, cex.atoms) if a.violations()}
    splits = split_scan(cex, tol["split"], tol["split_consistency"])
    failed_splits = [s.alpha for s in splits if not s.passed]
    div = divergence_sum(cex, p, phi, restrict_A02=prm["restrict_A02"])
    inc = [div.blocks[t] for t in cex.orders if t in div.blocks]
    checks = {
        "atoms_valid": not atom_bad,
        "decomposition": dec.holds,
        "coefficients": coeff_err <= tol["decomposition"],
        "split_scan": not failed_splits,
        "at_least_three_blocks": len(inc) >= 3,
        "increments_increasing": all(b > a for a, b in zip(inc, inc[1:])),
    }
    extra = {
        "selection": {"orders": sel.orders, "growth": sel.growth, "summands": sel.summands,
                      "rejected": sel.rejected, "partial_sum": sel.partial_sum},
        "decomposition": {"max_level_error": dec.max_error, "hp_power": dec.hp_power,
                          "sum_abs_p": dec.sum_abs_p, "ratio": dec.ratio},
        "coefficient_error": coeff_err,
        "atom_violations": atom_bad,
        "split": {"scanned": len(splits), "failed_alphas": failed_splits[:20],
                  "max_abs_I": max((s.max_abs_I for s in splits), default=0.0),
                  "max_abs_II1": max((s.max_abs_II1 for s in splits), default=0.0),
                  "min_II2_ratio": min((s.min_II2_ratio for s in splits), default=float("nan")),
                  "max_split_error": max((s.max_split_error for s in splits), default=0.0)},
        "checks": checks,
        "status": "pass" if all(checks.values()) else "fail",
    }
    emit_curves(div, out / prm["csv"], man, extra)
    return 0 if all(checks.values()) else 1


def do_bench(man: RunManifest, out: Path) -> int:
    report = run_bench(man.spec.m, man.parameters["repetitions"], man.parameters["sizes"], man.seed, man)
    write_json(out / "bench.json", report)
    ok = report["fast_below_naive_at_largest"] and all(r["max_deviation"] <= 1e-9 for r in report["rows"])
    return 0 if ok else 1


HANDLERS = {
    "transform": do_transform,
    "kernels": do_kernels,
    "verify-lemmas": do_verify_lemmas,
    "verify-all": do_verify_all,
    "theorem1": do_theorem1,
    "theorem2": do_theorem2,
    "bench": do_bench,
}


# -- argument parsing ---------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="2*8", help="JSON file {m, N} or inline radices such as '2,3,4' or '2*10'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--tol", type=float, default=None, help="override every tolerance of the command")

    parser = argparse.ArgumentParser(prog="vilenkin", description="Vilenkin-Fourier analysis and verification suites")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="forward or inverse transform of a CSV signal")
    p.add_argument("--in", "--input", dest="input", help="signal CSV (spectrum CSV with --inverse)")
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--naive", action="store_true")

    p = sub.add_parser("kernels", parents=[common], help="tabulate Dirichlet and Fejer kernels")
    p.add_argument("--n", type=_int_list, default=[1])
    p.add_argument("--dump", choices=["D", "K", "both"], default="both", help="Dirichlet, Fejer or both")
    p.add_argument("--l1-sup", action="store_true", help="also report sup_n of the Fejer kernel L1 norm")

    p = sub.add_parser("verify-lemmas", parents=[common], help="exhaustive scans of the kernel identities")
    p.add_argument("--checks", type=lambda s: [c for c in s.split(",") if c], default=[])
    p.add_argument("--max-M", type=int, default=1296)
    p.add_argument("--report", default="lemmas.json")

    p = sub.add_parser("verify-all", parents=[common], help="every identity scan; exit 0 iff all pass")
    p.add_argument("--max-M", type=int, default=1296)

    p = sub.add_parser("theorem1", parents=[common], help="weighted strong-summability sums over an atom suite")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--atoms", help="JSON list of {support_base, depth, p, seed[, resolution]}")
    p.add_argument("--suite-size", type=int, default=50)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--nmax", type=int, default=None)

    p = sub.add_parser("theorem2", parents=[common], help="divergence counterexample and its checks")
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--phi", default="pow:0.75")
    p.add_argument("--A", type=int, default=None)
    p.add_argument("--summand-cap", type=float, default=1.0)
    p.add_argument("--total-cap", type=float, default=10.0)
    p.add_argument("--all-n", action="store_true", help="sum over every n instead of A_{0,2}")

    p = sub.add_parser("bench", parents=[common], help="naive versus fast transform timings")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--sizes", type=_int_list, default=[256, 1024, 4096])

    p = sub.add_parser("replay", help="re-run the command recorded in a report or manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=".")
    return parser


def _split_out(out: str, default_csv: str) -> tuple[Path, str]:
    path = Path(out)
    if path.suffix == ".csv":
        return path.parent, path.name
    return path, default_csv


def manifest_from_args(args: argparse.Namespace) -> tuple[RunManifest, Path]:
    """Resolve command-line arguments into a self-contained manifest and an output directory."""
    spec = load_group(args.group)
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    out = Path(args.out)
    c = args.command
    if c == "transform":
        out, name = _split_out(args.out, "")
        params = {"input": args.input, "inverse": args.inverse, "naive": args.naive, "csv": name}
    elif c == "kernels":
        out, name = _split_out(args.out, "")
        kind = {"D": "dirichlet", "K": "fejer", "both": "both"}[args.dump]
        if name and (len(args.n) != 1 or kind == "both"):
            raise ConfigError("a CSV --out path needs a single --n and --dump D or K")
        params = {"n": args.n, "kind": kind, "l1_sup": args.l1_sup, "csv": name}
    elif c == "verify-lemmas":
        params = {"checks": args.checks, "max_M": args.max_M, "report": args.report}
    elif c == "verify-all":
        params = {"max_M": args.max_M}
    elif c == "theorem1":
        if args.atoms:
            try:
                entries = json.loads(Path(args.atoms).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read atom suite {args.atoms}: {exc}") from exc
        else:
            if args.suite_size < 1:
                raise ConfigError("--suite-size must be positive")
            entries = atom_suite_entries(spec.N, args.suite_size, args.p, args.seed, args.resolution, spec.m)
        out, name = _split_out(args.out, "t1.csv")
        params = {"p": args.p, "atoms": entries, "nmax": args.nmax, "csv": name}
    elif c == "theorem2":
        out, name = _split_out(args.out, "t2.csv")
        params = {"p": args.p, "phi": args.phi, "A": args.A, "summand_cap": args.summand_cap,
                  "total_cap": args.total_cap, "restrict_A02": not args.all_n, "csv": name}
        parse_phi(args.phi)
    elif c == "bench":
        if args.repetitions < 3:
            raise ConfigError(f"--repetitions must be at least 3, got {args.repetitions}")
        params = {"repetitions": args.repetitions, "sizes": args.sizes}
    else:
        raise ConfigError(f"unknown command {c!r}")
    tolerances = {}
    if args.tol is not None:
        keys = COUNTEREXAMPLE_TOLERANCES if c == "theorem2" else DEFAULT_TOLERANCES
        tolerances = {k: args.tol for k in keys}
    man = RunManifest(c, spec.to_json(), params, args.seed, args.threads, tolerances)
    return man, out


def execute(man: RunManifest, out: Path) -> int:
    if man.command not in HANDLERS:
        raise ConfigError(f"manifest names unknown command {man.command!r}")
    out.mkdir(parents=True, exist_ok=True)
    return HANDLERS[man.command](man, out)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            man, out = load_manifest(args.manifest), Path(args.out)
        else:
            man, out = manifest_from_args(args)
        return execute(man, out)
    except (HypothesisViolationError, SelectionFailureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (VilenkinError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
