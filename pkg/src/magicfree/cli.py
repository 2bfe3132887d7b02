"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 solver failure, 3 certificate FAIL.
Grid points run on a worker pool (``--workers`` or ``MAGICFREE_WORKERS``,
default CPU count); records are always written in grid order.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CERT = 0, 1, 2, 3
CSV_COLUMNS = ["d", "n", "delta", "p", "class", "ensemble", "fidelity", "baseline",
               "gap_to_baseline", "solver_gap", "status", "iterations", "seconds"]
WORKERS_ENV = "MAGICFREE_WORKERS"


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive endpoints) or a comma list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            return [float(x) for x in np.linspace(float(start), float(stop), count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected start:stop:count or a comma list") from None


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return max(1, args.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _pool_map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# instance sweeps


def _solve_record(job):
    from .purification import PurificationInstance, baseline_fidelity
    from .sdp import solve_fidelity

    inst_args, tol, timing, extended = job
    inst = PurificationInstance(**inst_args)
    t0 = time.perf_counter()
    f, rep = solve_fidelity(inst, tol=tol, extended=extended)
    base = baseline_fidelity(inst)
    return {
        "d": inst.d, "n": inst.n, "delta": inst.delta, "p": inst.p,
        "class": inst.op_class, "ensemble": inst.ensemble.label,
        "fidelity": f, "baseline": base, "gap_to_baseline": f - base,
        "solver_gap": rep.gap, "status": rep.status, "iterations": rep.iterations,
        "seconds": round(time.perf_counter() - t0, 3) if timing else 0.0,
    }


def _resolve_ensemble(name: str, d: int | None):
    from .purification import builtin_ensemble, load_ensemble

    if name in ("fig2-qubit", "fig2-qutrit", "haar"):
        return builtin_ensemble(name, d)
    if not os.path.exists(name):
        raise ConfigError(f"ensemble {name!r} is neither a built-in name nor an existing file")
    return load_ensemble(name)


def _deltas(args) -> list[float]:
    if args.delta is not None:
        return [args.delta]
    return parse_grid(args.delta_grid)


def _run_sweep(args, instances) -> int:
    from .purification import PurificationInstance

    jobs = []
    for kw in instances:
        inst = PurificationInstance(**kw)  # validate everything before any compute
        if inst.op_class == "CSPO" and inst.n >= 3 and not args.extended:
            raise ConfigError("CSPO with three copies needs the four-qubit stabilizer set; pass --extended")
        jobs.append((kw, args.tol, not args.no_timing, args.extended))
    if args.dump_conic:
        from .conic import dump_conic
        from .sdp import build_primal
        dump_conic(build_primal(PurificationInstance(**instances[0]), extended=args.extended),
                   args.dump_conic)
    records = _pool_map(_solve_record, jobs, _workers(args))
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for rec in records:
            out.write(json.dumps(rec) + "\n")
    finally:
        if args.out:
            out.close()
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(records)
    failed = [r for r in records if r["status"] != "Optimal"]
    for r in failed:
        print(f"solver failure: delta={r['delta']} p={r['p']} class={r['class']} status={r['status']}",
              file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_universal(args) -> int:
    from .purification import Ensemble

    insts = [dict(d=args.d, n=args.copies, delta=delta, p=p, ensemble=Ensemble.haar(args.d),
                  op_class=args.op_class)
             for delta in _deltas(args) for p in args.p]
    return _run_sweep(args, insts)


def cmd_ensemble(args) -> int:
    ens = _resolve_ensemble(args.ensemble, args.d)
    d = ens.d
    if args.d is not None and args.d != d:
        raise ConfigError(f"--d {args.d} does not match ensemble dimension {d}")
    cls = args.op_class or ("CSPO" if d == 2 else "CPWP")
    classes = [cls] + (["CPTN"] if args.compare and cls.upper() != "CPTN" else [])
    insts = [dict(d=d, n=args.copies, delta=delta, p=p, ensemble=ens, op_class=c)
             for delta in _deltas(args) for p in args.p for c in classes]
    return _run_sweep(args, insts)


# --------------------------------------------------------------------------
# certificates


def _certify_one(job):
    from .certificates import (build_cpwp_certificate, build_cspo_certificate,
                               verify_cpwp_certificate, verify_cspo_certificate)

    theorem, d, delta = job
    if theorem == "cpwp":
        rep = verify_cpwp_certificate(build_cpwp_certificate(d, delta))
    else:
        rep = verify_cspo_certificate(build_cspo_certificate(delta))
    return rep.passed, rep.to_text()


def cmd_certify(args) -> int:
    from .phase_space import check_odd_prime

    if args.theorem == "cpwp":
        try:
            check_odd_prime(args.d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    deltas = parse_grid(args.delta_grid) if args.delta_grid else list(np.linspace(0, 1, args.grid))
    if any(not 0 <= x <= 1 for x in deltas):
        raise ConfigError("delta values must lie in [0, 1]")
    results = _pool_map(_certify_one, [(args.theorem, args.d, x) for x in deltas], _workers(args))
    for _, text in results:
        print(text)
    ok = all(r[0] for r in results)
    print(f"certify {args.theorem}: {sum(r[0] for r in results)}/{len(results)} grid points pass")
    return EXIT_OK if ok else EXIT_CERT


def cmd_nogo(args) -> int:
    from .certificates import no_go_verdict
    from .purification import Ensemble, PurificationInstance

    deltas = _deltas(args)
    for x in deltas:
        for p in args.p:
            PurificationInstance(args.d, args.copies, x, p, Ensemble.haar(args.d), args.op_class)
    if args.op_class == "CSPO" and args.copies >= 3 and not args.extended:
        raise ConfigError("CSPO with three copies needs the four-qubit stabilizer set; pass --extended")
    table = no_go_verdict(args.d, args.copies, deltas, args.p, args.op_class, tol=args.tol,
                          extended=args.extended)
    print(table.to_text())
    if any(c.status != "Optimal" for c in table.cells):
        return EXIT_SOLVER
    return EXIT_OK if table.confirmed else EXIT_CERT


# --------------------------------------------------------------------------
# tools


def load_state_file(path):
    """State file: ``{"d": .., "states": [[[re, im], ..], ..]}`` or ``{"d": .., "density": [[[re, im], ..], ..]}``."""
    from .purification import load_ensemble

    with open(path) as fh:
        data = json.load(fh)
    if "density" in data:
        d = int(data["d"])
        rho = np.array([[complex(re, im) for re, im in row] for row in data["density"]])
        if rho.shape != (d, d):
            raise ConfigError(f"density matrix must be {d}x{d}")
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise ConfigError("density matrix is not Hermitian")
        return [rho]
    ens = load_ensemble(path)
    return [np.outer(v, v.conj()) for v in ens.states]


def cmd_robustness(args) -> int:
    from .stabilizer import robustness_of_state

    for k, rho in enumerate(load_state_file(args.state)):
        n = int(round(np.log2(rho.shape[0])))
        if 2**n != rho.shape[0] or not 1 <= n <= 3:
            raise ConfigError(f"state {k}: robustness needs a 1-3 qubit state")
        res = robustness_of_state(rho)
        print(json.dumps({"state": k, "robustness": res.value, "status": res.status}))
        if res.status != "Optimal":
            return EXIT_SOLVER
    return EXIT_OK


def cmd_enumerate_stab(args) -> int:
    from .stabilizer import enumerate_stabilizer_states

    try:
        stab = enumerate_stabilizer_states(args.qubits, extended=args.extended)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    stab.dump(args.out)
    print(f"wrote {len(stab)} stabilizer states on {args.qubits} qubits to {args.out}")
    return EXIT_OK


def cmd_wigner(args) -> int:
    from .phase_space import PhasePointBasis, wigner_of_state

    try:
        basis = PhasePointBasis(args.d, 1)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for k, rho in enumerate(load_state_file(args.state)):
        if rho.shape[0] % args.d:
            raise ConfigError(f"state {k} does not live on copies of C^{args.d}")
        sites = int(round(np.log(rho.shape[0]) / np.log(args.d)))
        w = wigner_of_state(rho, PhasePointBasis(args.d, sites) if sites > 1 else basis)
        print(f"# state {k}: d={args.d} sites={sites}; rows a1, columns a2" + (" (flattened)" if sites > 1 else ""))
        table = w.values.reshape(-1, args.d)
        for row in table:
            print(" ".join(f"{x:+.10f}" for x in row))
    return EXIT_OK


# --------------------------------------------------------------------------


def _add_sweep_options(sp, need_class=True):
    sp.add_argument("--copies", type=int, default=2, help="number of noisy copies n")
    if need_class:
        sp.add_argument("--class", dest="op_class", type=str.upper, choices=["CPTN", "CPWP", "CSPO"],
                        required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--delta", type=float, help="single noise value")
    g.add_argument("--delta-grid", default="0:0.99:21", help="start:stop:count (default 0:0.99:21)")
    sp.add_argument("--p", type=float, nargs="+", default=[1.0], help="success probabilities")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--out", help="JSON-lines output file (default stdout)")
    sp.add_argument("--csv", help="optional CSV table")
    sp.add_argument("--workers", type=int, help=f"worker processes (env {WORKERS_ENV})")
    sp.add_argument("--no-timing", action="store_true", help="write seconds=0 for reproducible records")
    sp.add_argument("--dump-conic", help="write the first program in CONIC v1 text form")
    sp.add_argument("--extended", action="store_true",
                    help="allow the four-qubit stabilizer set (CSPO with three copies)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="magicfree", description="Purification fidelities under free operations.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("universal", help="Haar-universal fidelity sweeps")
    sp.add_argument("--d", type=int, required=True)
    _add_sweep_options(sp)
    sp.set_defaults(func=cmd_universal)

    sp = sub.add_parser("ensemble", help="fidelity for a discrete ensemble")
    sp.add_argument("--ensemble", required=True, help="fig2-qubit, fig2-qutrit, haar or a JSON file")
    sp.add_argument("--d", type=int)
    sp.add_argument("--compare", action="store_true", help="also emit unrestricted (CPTN) records")
    sp.add_argument("--class", dest="op_class", type=str.upper, choices=["CPTN", "CPWP", "CSPO"])
    _add_sweep_options(sp, need_class=False)
    sp.set_defaults(func=cmd_ensemble)

    sp = sub.add_parser("certify", help="verify the analytic dual certificates")
    sp.add_argument("--theorem", choices=["cpwp", "cspo"], required=True)
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--grid", type=int, default=21, help="number of delta points on [0, 1]")
    sp.add_argument("--delta-grid", help="explicit start:stop:count grid")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("nogo", help="solve universal programs and compare with lambda0")
    sp.add_argument("--d", type=int, required=True)
    _add_sweep_options(sp)
    sp.set_defaults(func=cmd_nogo)

    sp = sub.add_parser("robustness", help="robustness of magic of qubit states")
    sp.add_argument("--state", required=True)
    sp.set_defaults(func=cmd_robustness)

    sp = sub.add_parser("enumerate-stab", help="dump all pure stabilizer states")
    sp.add_argument("--qubits", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--extended", action="store_true", help="allow four qubits")
    sp.set_defaults(func=cmd_enumerate_stab)

    sp = sub.add_parser("wigner", help="discrete Wigner function of states")
    sp.add_argument("--state", required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.set_defaults(func=cmd_wigner)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"magicfree {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
