"""Command-line entry point: ``qudit-lab <command> [options]``.

Every report is a JSON object ``{config, version, results, flags, residuals,
payload_sha256}`` (or CSV).  Runs with the same configuration produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .conjugation_channel import (
    conjugation_fidelity,
    estimation_bound,
    optimal_conjugator,
    random_channel,
    validate_channel,
)
from .covariant_povm import REFERENCE_NAMES, completeness_residual, positivity_margin, reference_operator
from .fidelity_engine import table1, table1_csv
from .povm_sampler import simulate
from .rng import RngStream
from .seed_optimizer import OptimizerConfig, optimize, verify_result
from .selftest import run_selftest
from .symmetric_space import bose_dim

DEFAULT_SEED = 0x5EEDC0DE
DEFAULT_SAMPLES = 100_000
SEED_ENV = "QUDIT_LAB_SEED"

PSI_PERP_FLAG = (
    "psi_perp: the printed conjugate-pair operator violates the completeness trace "
    "conditions (Tr a0 != d^2, Tr[a0 SWAP] != d); F_perp is reported from its closed form only"
)
PROBABILISTIC_FLAG = (
    "conjugate case: F_perp matches the optimal probabilistic strategy; the deterministic "
    "optimum attainable under exact completeness is F_local"
)


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed_value(text: str) -> int:
    return int(text, 0)


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    return int(env, 0) if env else DEFAULT_SEED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed_value, default=None, help=f"root RNG seed (env {SEED_ENV})")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="qudit-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[common], help="closed-form fidelity table with MC confirmation")
    p.add_argument("--d-list", type=_int_list, default=[2, 3, 4, 5, 6, 11, 17])
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="MC samples per cell (0 disables)")

    p = sub.add_parser("optimize", parents=[common], help="optimise the covariant seed family")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--case", choices=("parallel", "conjugate"), required=True)
    p.add_argument("--restarts", type=int, default=20)

    p = sub.add_parser("bound", parents=[common], help="conjugation bound, optimal channel and fuzzing")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--fuzz", type=int, default=0, help="number of random channels to test")
    p.add_argument("--kraus-count", type=int, default=None)

    p = sub.add_parser("simulate", parents=[common], help="rejection-sample the covariant POVM")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--case", choices=("parallel", "conjugate"), required=True)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed-op", choices=REFERENCE_NAMES, default=None)

    sub.add_parser("selftest", parents=[common], help="identity and residual suites")
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("out",)}
    return dict(sorted(cfg.items()))


def _cmd_table1(args, rng):
    if any(d < 2 for d in args.d_list):
        raise UsageError("every d in --d-list must be >= 2")
    rows = table1(args.d_list, mc_samples=args.samples, rng=rng)
    flags = [f for r in rows for f in r.flags] + [PSI_PERP_FLAG]
    residuals = {}
    for r in rows:
        if r.mc:
            for key, mc in r.mc.items():
                exact = getattr(r, "f_parallel" if key == "F_parallel" else "f_local")
                residuals[f"mc_{key}_d{r.d}_zscore"] = (mc["mean"] - exact) / mc["stderr"]
    return [r.to_dict() for r in rows], flags, residuals, True, table1_csv(rows)


def _cmd_optimize(args, rng):
    if args.d < 2 or args.d > 12:
        raise UsageError("optimize supports 2 <= d <= 12")
    cfg = OptimizerConfig(restarts=args.restarts, seed=rng.seed)
    res = optimize(args.d, args.case, cfg)
    rep = verify_result(res)
    results = res.to_dict()
    results["verification"] = {"checks": rep.checks, "printed_inequality_slack": rep.printed_inequality_slack}
    flags = [PROBABILISTIC_FLAG] if args.case == "conjugate" else []
    residuals = {
        "min_eig": res.min_eig,
        "trace_residual": res.completeness_residuals[0],
        "swap_residual": res.completeness_residuals[1],
    }
    return results, flags, residuals, rep.passed, None


def _fuzz_one(d, n, k, root):
    return conjugation_fidelity(random_channel(d, n, k, root))


def _cmd_bound(args, rng):
    d, n = args.d, args.n
    if d < 2 or n < 1:
        raise UsageError("bound needs d >= 2 and N >= 1")
    if d ** (n + 1) > 4096:
        raise UsageError(f"d^(N+1) = {d ** (n + 1)} exceeds the dense size limit 4096")
    bound = estimation_bound(d, n)
    opt = optimal_conjugator(d, n)
    f_opt = conjugation_fidelity(opt)
    tp, cp = validate_channel(opt)
    results = {"bound": bound, "optimal_channel_fidelity": f_opt, "optimal_kraus_count": len(opt.kraus)}
    residuals = {"optimal_tp": tp, "optimal_cp": cp, "saturation_gap": abs(f_opt - bound)}
    ok = abs(f_opt - bound) <= 1e-9 and tp <= 1e-10
    if args.fuzz:
        kc = args.kraus_count or bose_dim(d, n)
        if d * kc < bose_dim(d, n):
            raise UsageError(f"--kraus-count must be at least {-(-bose_dim(d, n) // d)}")
        streams = [rng.split(k) for k in range(args.fuzz)]
        with ThreadPoolExecutor(max(1, args.threads)) as pool:
            fids = list(pool.map(lambda s: _fuzz_one(d, n, kc, s), streams))
        results.update({"fuzz_count": args.fuzz, "fuzz_kraus_count": kc, "max_fuzzed_fidelity": max(fids)})
        residuals["max_fuzz_excess"] = max(fids) - bound
        ok = ok and max(fids) <= bound + 1e-9
    return results, [], residuals, ok, None


def _cmd_simulate(args, rng):
    if args.d < 2 or args.d > 12:
        raise UsageError("simulate supports 2 <= d <= 12")
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    name = args.seed_op or ("case_one_opt" if args.case == "parallel" else "psi_local")
    seed = reference_operator(name, args.d)
    margin = positivity_margin(seed, args.case)
    if margin < -1e-10:
        raise UsageError(f"{name} is not a valid POVM seed for the {args.case} case (min eigenvalue {margin:.3e})")
    r_tr, r_sw, _ = completeness_residual(seed, trials=0)
    if max(r_tr, r_sw) > 1e-8:
        raise UsageError(PSI_PERP_FLAG if name == "psi_perp" else f"{name} violates completeness")
    res = simulate(seed, args.case, args.d, args.samples, rng, threads=args.threads)
    results = res.to_dict()
    results["seed_operator"] = name
    return results, [], {"min_eig": margin, "trace_residual": r_tr, "swap_residual": r_sw}, True, None


def _cmd_selftest(args, rng):
    checks = run_selftest(rng.seed)
    results = [{"name": c.name, "residual": c.residual, "tol": c.tol, "passed": c.passed} for c in checks]
    return results, [], {c.name: c.residual for c in checks}, all(c.passed for c in checks), None


COMMANDS = {
    "table1": _cmd_table1,
    "optimize": _cmd_optimize,
    "bound": _cmd_bound,
    "simulate": _cmd_simulate,
    "selftest": _cmd_selftest,
}


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render(report: dict, fmt: str, table_csv: str | None = None) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    if table_csv is not None:
        return table_csv
    rows: list = []
    _flatten("", {k: v for k, v in report.items() if k != "payload_sha256"}, rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in rows:
        if isinstance(v, (bool, np.bool_)):
            v = bool(v)
        elif isinstance(v, (float, np.floating)):
            v = repr(float(v))
        w.writerow([k, v])
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed is None:
        args.seed = _default_seed()
    rng = RngStream(args.seed)
    try:
        results, flags, residuals, ok, table_csv = COMMANDS[args.command](args, rng)
    except (UsageError, ValueError) as exc:
        print(f"qudit-lab {args.command}: {exc}", file=sys.stderr)
        return 2
    payload = {
        "config": _config(args),
        "version": __version__,
        "results": results,
        "flags": flags,
        "residuals": residuals,
        "passed": ok,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_json_default)
    payload["payload_sha256"] = hashlib.sha256(canonical.encode()).hexdigest()
    text = render(payload, args.format, table_csv)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 2


def main(argv=None) -> int:
    return run(argv)
