"""Command-line interface.

Commands
--------
``generate``   write a random max-affine instance with a known minimizer
``run``        run a method on an instance and write a line-oriented trace
``adversary``  build the hard instance for a trace prefix, with a certificate
``verify``     check an instance or trace file
``selfplay``   certify subgame perfection at a checkpoint on a seeded instance
``bench``      batch runs over seeded random instances, columnar output

Exit codes: 0 success, 1 input error, 2 check failure, 3 solver nonconvergence.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import io
from .adversary import (
    NoHardInstanceError,
    build_klm_hard,
    build_spppa_hard,
    hard_records,
    selfplay,
    verify_tightness,
    verify_zero_chain,
)
from .core import ConvergenceError
from .maxaffine import FirstOrderData, interpolation_check, random_instance
from .methods import (
    ProxTrace,
    as_schedule,
    run_klm,
    run_oppa,
    run_spppa,
    run_subgradient,
)
from .plansolve import InfeasibleHistoryError, dual_residuals, solve_klm_plan, solve_spppa_plan

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_SOLVER = 0, 1, 2, 3

DEFAULT_TOLS = {
    "monotonicity": 1e-7,
    "psi_monotonicity": 1e-9,
    "interpolation": 1e-7,
    "tightness": 1e-7,
    "zero_chain": 1e-8,
    "duality": 1e-6,
    "selfplay": 1e-6,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _schedule_arg(text: str | None):
    if text is None:
        return None
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse --L {text!r}") from None
    return vals[0] if len(vals) == 1 else vals


def _parse_tols(extra: list[str]) -> dict:
    tols = dict(DEFAULT_TOLS)
    k = 0
    while k < len(extra):
        arg = extra[k]
        if not arg.startswith("--tol."):
            raise UsageError(f"unrecognized argument {arg!r}")
        name, eq, val = arg[len("--tol."):].partition("=")
        if not eq:
            if k + 1 >= len(extra):
                raise UsageError(f"{arg} needs a value")
            k += 1
            val = extra[k]
        if name not in tols:
            raise UsageError(f"unknown tolerance {name!r}; known: {', '.join(sorted(tols))}")
        try:
            tols[name] = float(val)
        except ValueError:
            raise UsageError(f"tolerance {name!r} must be a number") from None
        k += 1
    return tols


def _emit(obj) -> None:
    sys.stdout.write(io.dumps(obj) + "\n")


def _load_instance(path: str) -> dict:
    try:
        return io.instance_from_dict(io.loads(io.read_text(path)))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot read instance {path!r}: {exc}") from None


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(args, tols) -> int:
    rng = np.random.default_rng(args.seed)
    inst = random_instance(rng, args.dim, args.pieces, args.M or 1.0, args.R or 1.0)
    d = io.instance_to_dict(inst.F, inst.x0, args.M or 1.0, args.R or 1.0, inst.x_star, inst.f_star)
    text = io.dumps(d) + "\n"
    if args.out:
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _instance_for_run(args) -> dict:
    if args.instance:
        return _load_instance(args.instance)
    rng = np.random.default_rng(args.seed)
    inst = random_instance(rng, args.dim, args.pieces, args.M or 1.0, args.R or 1.0)
    return {"F": inst.F, "x0": inst.x0, "M": args.M or 1.0, "R": args.R or 1.0,
            "minimizer": inst.x_star, "f_star": inst.f_star}


def _run_trace_lines(args, data, timing: bool) -> tuple[list[str], dict]:
    F, x0, f_star = data["F"], data["x0"], data["f_star"]
    M = args.M if args.M is not None else data["M"]
    R = args.R if args.R is not None else data["R"]
    N = args.N
    algo = args.algorithm
    header = {"type": "header", "algorithm": algo, "N": N, "x0": x0, "f_star": f_star,
              "minimizer": data["minimizer"], "memory": args.memory, "format": 1}
    t0 = time.perf_counter()
    lines = []

    def stamp(rec):
        if timing:
            rec["wall_time"] = time.perf_counter() - t0
        return rec

    if algo in ("subgradient", "klm"):
        if algo == "klm" and (M is None or R is None):
            raise UsageError("klm needs M and R (flags or instance fields)")
        header.update(M=M, R=R)
        if algo == "klm":
            tr = run_klm(F.oracle(args.policy), x0, M, R, N)
        else:
            if args.step is not None:
                steps = args.step
            elif M is not None and R is not None:
                steps = R / (M * np.sqrt(N + 1))
            else:
                steps = 1.0 / np.sqrt(N + 1)
            header["step"] = steps
            tr = run_subgradient(F.oracle(args.policy), x0, steps, N)
        for n in range(N + 1):
            rec = {"type": "iteration", "n": n, "x": tr.x[n], "f": tr.f[n], "g": tr.g[n],
                   "guarantee": tr.theta[n], "f_half": tr.f_half[n]}
            if f_star is not None:
                rec["gap"] = tr.f[n] - f_star
            lines.append(io.dumps_line(stamp(rec)))
        summary = {"type": "summary", "status": "completed", "iterations": N,
                   "output": tr.x[N], "f_output": tr.f[N],
                   "guarantee_0": tr.theta[0], "final_guarantee": tr.theta[N]}
        if algo == "klm":
            summary["theta_0"] = tr.theta[0]
        if f_star is not None:
            summary["final_gap"] = tr.f[N] - f_star
    elif algo in ("oppa", "spppa"):
        Ls = as_schedule(_schedule_arg(args.L), N)
        header["L"] = Ls
        if algo == "oppa":
            tr = run_oppa(F.prox_oracle(), x0, Ls, N)
        else:
            tr = run_spppa(F.prox_oracle(), x0, Ls, N, memory=args.memory)
        for n in range(tr.n_iter):
            rec = {"type": "iteration", "n": n, "x": tr.x[n], "y": tr.y[n], "f": tr.f[n],
                   "g": tr.g[n], "tau": tr.tau[n], "z": tr.z[n], "m": int(tr.m[n]),
                   "guarantee": tr.psi[n], "L": Ls[n]}
            if tr.tau_prime is not None:
                rec["tau_prime"] = tr.tau_prime[n]
            if f_star is not None:
                rec["gap"] = tr.f[n] - f_star
            lines.append(io.dumps_line(stamp(rec)))
        exact = tr.status == "exact-minimizer"
        summary = {"type": "summary", "status": tr.status, "iterations": tr.n_iter - 1,
                   "output": tr.output, "f_output": tr.f_output,
                   "guarantee_0": tr.psi[0], "psi_0": tr.psi[0],
                   "final_guarantee": 0.0 if exact else tr.psi[-1]}
        if f_star is not None:
            summary["final_gap"] = tr.f_output - f_star
            if data["minimizer"] is not None:
                r0 = 0.5 * float(np.sum((x0 - data["minimizer"]) ** 2))
                if r0 > 0:
                    summary["normalized_gap"] = summary["final_gap"] / r0
    else:
        raise UsageError(f"unknown algorithm {algo!r}")
    if timing:
        summary["wall_time"] = time.perf_counter() - t0
    return [io.dumps_line(header)] + lines + [io.dumps_line(summary)], summary


def cmd_run(args, tols) -> int:
    data = _instance_for_run(args)
    lines, summary = _run_trace_lines(args, data, args.timing)
    text = "\n".join(lines) + "\n"
    if args.out:
        io.write_atomic(args.out, text)
        _emit(summary)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# adversary
# ---------------------------------------------------------------------------

def _trace_arrays(rows, key, dim=None):
    return np.array([np.asarray(r[key], dtype=float) for r in rows])


def _prox_trace_from_rows(header, rows) -> ProxTrace:
    N = int(header["N"])
    X, Y, G, Z = (_trace_arrays(rows, k) for k in ("x", "y", "g", "z"))
    f = np.array([float(r["f"]) for r in rows])
    tau = np.array([float(r["tau"]) for r in rows])
    m = np.array([int(r["m"]) for r in rows])
    psi = np.array([np.nan if r["guarantee"] is None else float(r["guarantee"]) for r in rows])
    Ls = as_schedule(header["L"], N)
    return ProxTrace(X, Y, f, G, tau, Z, m, psi, Ls, N, header["algorithm"])


def _history_violation(rep, n_records) -> str:
    return "history fails interpolation: " + rep.describe(n_records)


def _certificate(inst, tols) -> dict:
    flavor = inst.flavor
    rep = interpolation_check(hard_records(inst), require_lipschitz=flavor == "klm")
    scale = max(1.0, float(np.max(np.abs(inst.F.values))))
    tight = verify_tightness(inst, rtol=tols["tightness"])
    zc = verify_zero_chain(inst, tol=tols["zero_chain"])
    interp_ok = rep.min_Q >= -tols["interpolation"] * scale and (
        rep.min_S is None or rep.min_S >= -tols["interpolation"] * scale)
    return {
        "flavor": flavor, "n": inst.n, "N": inst.N,
        "certified_gap": inst.certified_gap, "guarantee": inst.guarantee,
        "f_star": inst.f_star,
        "interpolation": {"passed": bool(interp_ok), "min_Q": rep.min_Q, "min_S": rep.min_S},
        "tightness": {"passed": tight.passed, "residuals": tight.residuals, "tol": tight.tol},
        "zero_chain": {"passed": zc.passed, "max_residual": zc.max_residual, "tol": zc.tol},
        "passed": bool(interp_ok and tight.passed and zc.passed),
    }


def cmd_adversary(args, tols) -> int:
    try:
        header, rows, _ = io.read_trace(args.trace)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read trace {args.trace!r}: {exc}") from None
    n, N = args.checkpoint, int(header["N"])
    algo = header["algorithm"]
    flavor = args.flavor or ("klm" if algo in ("klm", "subgradient") else "spppa")
    if not 0 <= n <= N:
        raise UsageError(f"checkpoint {n} outside [0, {N}]")
    if n > len(rows):
        raise UsageError(f"trace has only {len(rows)} iterations")
    x0 = np.asarray(header["x0"], dtype=float)
    if flavor == "klm":
        M = args.M if args.M is not None else header.get("M")
        R = args.R if args.R is not None else header.get("R")
        if M is None or R is None:
            raise UsageError("klm flavor needs M and R")
        d = x0.size
        hist = FirstOrderData(_trace_arrays(rows[:n], "x").reshape(n, d),
                              [r["f"] for r in rows[:n]],
                              _trace_arrays(rows[:n], "g").reshape(n, d), M=M)
        if n:
            rep = interpolation_check(hist, require_lipschitz=True)
            if not rep.valid:
                print(_history_violation(rep, n), file=sys.stderr)
                return EXIT_CHECK
            plan = solve_klm_plan(hist, x0, M, R, N, check=False)
        else:
            plan = None
        inst = build_klm_hard(hist, plan, x0, M, R, N)
    elif flavor == "spppa":
        if "y" not in rows[0]:
            raise UsageError("spppa flavor needs a proximal trace")
        tr = _prox_trace_from_rows(header, rows)
        if n:
            hist = FirstOrderData(tr.y[:n], tr.f[:n], tr.g[:n])
            rep = interpolation_check(hist)
            if not rep.valid:
                print(_history_violation(rep, n), file=sys.stderr)
                return EXIT_CHECK
            plan = solve_spppa_plan(tr.inputs(n))
            if plan.status == "unbounded":
                print("optimizer already found; no hard instance", file=sys.stderr)
                _emit({"status": "exact-minimizer", "n": n, "certified_gap": 0.0})
                return EXIT_CHECK
        else:
            plan = None
        inst = build_spppa_hard(tr, n, plan, tr.L, N, x0=x0)
    else:
        raise UsageError(f"unknown flavor {flavor!r}")
    cert = _certificate(inst, tols)
    if args.out:
        io.write_atomic(args.out, io.dumps(io.hard_to_dict(inst, cert)) + "\n")
    _emit(cert)
    return EXIT_OK if cert["passed"] else EXIT_CHECK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

INSTANCE_CHECKS = ("interpolation", "tightness", "zero-chain")
TRACE_CHECKS = ("interpolation", "monotonicity", "duality")


def _verify_instance(d, checks, tols) -> list[dict]:
    results = []
    hard = "hard" in d
    if hard:
        try:
            inst = io.hard_from_dict(d)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed hard instance: {exc}") from None
        base = {"F": inst.F, "M": inst.M, "minimizer": inst.minimizer, "f_star": inst.f_star}
    else:
        base = io.instance_from_dict(d)
    F = base["F"]
    for check in checks:
        if check == "interpolation":
            data = hard_records(inst) if hard else FirstOrderData(
                F.anchors, F.values, F.slopes,
                x_star=base["minimizer"] if base["f_star"] is not None else None,
                f_star=base["f_star"] if base["minimizer"] is not None else None, M=base["M"])
            rep = interpolation_check(data, require_lipschitz=base["M"] is not None)
            scale = max(1.0, float(np.max(np.abs(F.values))))
            tol = tols["interpolation"] * scale
            ok = rep.min_Q >= -tol and (rep.min_S is None or rep.min_S >= -tol)
            results.append({"check": "interpolation", "passed": bool(ok),
                            "detail": rep.describe(len(data)), "min_Q": rep.min_Q,
                            "min_S": rep.min_S})
        elif check == "tightness":
            if not hard:
                raise UsageError("tightness needs a hard instance file")
            rep = verify_tightness(inst, rtol=tols["tightness"])
            results.append({"check": "tightness", "passed": rep.passed,
                            "violations": rep.violations, "residuals": rep.residuals})
        elif check == "zero-chain":
            if not hard:
                raise UsageError("zero-chain needs a hard instance file")
            rep = verify_zero_chain(inst, tol=tols["zero_chain"])
            results.append({"check": "zero-chain", "passed": rep.passed,
                            "max_residual": rep.max_residual})
        else:
            raise UsageError(f"check {check!r} does not apply to instance files")
    return results


def _verify_trace(path, checks, tols) -> list[dict]:
    try:
        header, rows, _ = io.read_trace(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read trace {path!r}: {exc}") from None
    results = []
    algo = header["algorithm"]
    prox = algo in ("oppa", "spppa")
    for check in checks:
        if check == "monotonicity":
            gs = [r.get("guarantee") for r in rows]
            gs = [np.nan if v is None else float(v) for v in gs]
            if prox:
                tol = tols["psi_monotonicity"] * (gs[0] if gs else 1.0)
            else:
                tol = tols["monotonicity"] * float(header.get("M") or 1.0) * float(header.get("R") or 1.0)
            bad = [k + 1 for k in range(len(gs) - 1)
                   if np.isfinite(gs[k]) and np.isfinite(gs[k + 1]) and gs[k + 1] > gs[k] + tol]
            results.append({"check": "monotonicity", "passed": not bad, "increases_at": bad})
        elif check == "interpolation":
            key = "y" if prox else "x"
            k = len(rows)
            data = FirstOrderData(_trace_arrays(rows, key).reshape(k, -1), [r["f"] for r in rows],
                                  _trace_arrays(rows, "g").reshape(k, -1),
                                  M=None if prox else header.get("M"))
            rep = interpolation_check(data, require_lipschitz=data.M is not None)
            results.append({"check": "interpolation", "passed": rep.valid,
                            "detail": rep.describe(k), "min_Q": rep.min_Q, "min_S": rep.min_S})
        elif check == "duality":
            if algo != "spppa":
                results.append({"check": "duality", "passed": True, "detail": "not applicable"})
                continue
            tr = _prox_trace_from_rows(header, rows)
            worst = 0.0
            for n in range(1, tr.n_iter):
                inputs = tr.inputs(n, header.get("memory"))
                plan = solve_spppa_plan(inputs)
                if plan.status != "optimal":
                    continue
                r1, r2 = dual_residuals(plan, inputs, relative=True)
                primal = plan.tau_prime
                dual = float(plan.w @ plan.w) / (2.0 * plan.xi)
                worst = max(worst, abs(primal - dual) / primal, r1, r2)
            results.append({"check": "duality", "passed": worst <= tols["duality"],
                            "max_relative_residual": worst})
        else:
            raise UsageError(f"check {check!r} does not apply to trace files")
    return results


def cmd_verify(args, tols) -> int:
    try:
        text = io.read_text(args.file)
    except OSError as exc:
        raise UsageError(f"cannot read {args.file!r}: {exc}") from None
    try:
        d = io.loads(text)
        is_trace = not (isinstance(d, dict) and "kind" in d)
    except ValueError:
        is_trace = True
    requested = [c.strip() for c in args.checks.split(",")] if args.checks else None
    if is_trace:
        results = _verify_trace(args.file, requested or list(TRACE_CHECKS), tols)
    else:
        if requested is None:
            requested = list(INSTANCE_CHECKS) if "hard" in d else ["interpolation"]
        results = _verify_instance(d, requested, tols)
    ok = all(r["passed"] for r in results)
    _emit({"passed": ok, "results": results})
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# selfplay / bench
# ---------------------------------------------------------------------------

def cmd_selfplay(args, tols) -> int:
    if args.checkpoint < 0 or args.checkpoint > args.N:
        raise UsageError(f"checkpoint {args.checkpoint} outside [0, {args.N}]")
    try:
        rep = selfplay(args.algorithm, args.checkpoint, args.N, seed=args.seed, dim=args.dim,
                       n_pieces=args.pieces, M=args.M or 1.0, R=args.R or 1.0,
                       L=_schedule_arg(args.L) if args.L else 1.0, opponent=args.opponent,
                       rtol=tols["selfplay"])
    except NoHardInstanceError as exc:
        _emit({"passed": False, "discrepancies": [str(exc)]})
        return EXIT_CHECK
    _emit(rep.summary())
    return EXIT_OK if rep.passed else EXIT_CHECK


def _int_list(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


def cmd_bench(args, tols) -> int:
    dims = _int_list(args.dims)
    Ns = _int_list(args.Ns)
    algos = ["klm", "spppa"] if args.algorithm == "both" else [args.algorithm]
    cols = ["instance", "algorithm", "dim", "N", "final_gap", "guarantee_N", "guarantee_0",
            "ratio", "oppa_bound", "status"]
    out = ["\t".join(cols)]
    M, R = args.M or 1.0, args.R or 1.0
    Lval = _schedule_arg(args.L) if args.L else 1.0
    errors = 0
    for k in range(args.count):
        for d in dims:
            for N in Ns:
                rng = np.random.default_rng([args.seed, k, d, N])
                inst = random_instance(rng, d, args.pieces, M, R)
                for algo in algos:
                    try:
                        if algo == "klm":
                            tr = run_klm(inst.F.oracle(), inst.x0, M, R, N)
                            gap = inst.F(tr.x[-1]) - inst.f_star
                            row = [gap, tr.theta[-1], tr.theta[0], tr.theta[-1] / tr.theta[0],
                                   float("nan"), "completed"]
                        else:
                            tr = run_spppa(inst.F.prox_oracle(), inst.x0, Lval, N)
                            r0 = 0.5 * float(np.sum((inst.x0 - inst.x_star) ** 2))
                            gap = tr.f_output - inst.f_star
                            psiN = 0.0 if tr.status != "completed" else tr.psi[-1]
                            row = [gap, psiN * r0, tr.psi[0] * r0, psiN / tr.psi[0],
                                   tr.psi[0] * r0, tr.status]
                    except (ConvergenceError, ValueError) as exc:
                        errors += 1
                        row = [float("nan")] * 5 + [f"error:{type(exc).__name__}"]
                    vals = [str(k), algo, str(d), str(N)]
                    vals += [io.dumps_line(float(v)) for v in row[:5]] + [row[5]]
                    out.append("\t".join(vals))
    text = "\n".join(out) + "\n"
    if args.out:
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if errors:
        print(f"{errors} run(s) failed", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_problem_args(p, N_default=None):
    p.add_argument("--N", type=int, default=N_default, required=N_default is None)
    p.add_argument("--M", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--L", help="prox parameter: constant or comma-separated list")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=6)
    p.add_argument("--pieces", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subgameopt", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=6)
    p.add_argument("--pieces", type=int, default=8)
    p.add_argument("--M", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--out")

    p = sub.add_parser("run", help="run a method and write a trace")
    p.add_argument("--algorithm", required=True, choices=["subgradient", "klm", "oppa", "spppa"])
    p.add_argument("--instance", help="instance file; a seeded random instance when omitted")
    _add_problem_args(p)
    p.add_argument("--memory", type=int)
    p.add_argument("--step", type=float, help="constant step for the subgradient method")
    p.add_argument("--policy", default="lowest", choices=["lowest", "anchor"])
    p.add_argument("--timing", action="store_true", help="record wall-clock times")
    p.add_argument("--out")

    p = sub.add_parser("adversary", help="build the hard instance for a trace prefix")
    p.add_argument("--trace", required=True)
    p.add_argument("--checkpoint", type=int, required=True)
    p.add_argument("--flavor", choices=["klm", "spppa"])
    p.add_argument("--M", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check an instance or trace file")
    p.add_argument("file")
    p.add_argument("--checks", help="comma list of: interpolation, monotonicity, tightness, "
                                    "zero-chain, duality")

    p = sub.add_parser("selfplay", help="certify subgame perfection at a checkpoint")
    p.add_argument("--algorithm", required=True, choices=["klm", "spppa"])
    p.add_argument("--checkpoint", type=int, required=True)
    _add_problem_args(p)
    p.add_argument("--opponent")

    p = sub.add_parser("bench", help="batch runs over random instances")
    p.add_argument("--algorithm", default="klm", choices=["klm", "spppa", "both"])
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--dims", default="6")
    p.add_argument("--N", dest="Ns", default="5", help="comma list of horizons")
    p.add_argument("--pieces", type=int, default=8)
    p.add_argument("--M", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--L")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


COMMANDS = {
    "generate": cmd_generate,
    "run": cmd_run,
    "adversary": cmd_adversary,
    "verify": cmd_verify,
    "selfplay": cmd_selfplay,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        tols = _parse_tols(extra)
        return COMMANDS[args.command](args, tols)
    except UsageError as exc:
        print(f"subgameopt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleHistoryError as exc:
        print(f"subgameopt: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ConvergenceError as exc:
        print(f"subgameopt: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"subgameopt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
