"""Command-line entry point.

Subcommands: ``verify``, ``purify``, ``omega``, ``circuit``, ``schur``,
``qft``, ``weingarten``, ``learn``, ``bounds``. Reports are JSON (CSV for
``learn``) and always include the seed, so every run is replayable.

Exit codes: 0 pass, 1 check failure, 2 usage error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

import numpy as np

from . import __version__
from .channels import random_kraus_channel, superoperator_to_choi
from .learning import (
    TomographyConfig,
    distinguishing_bound_check,
    learn_channel,
    packing_log_cardinality,
)
from .schur import schur_transform, sn_qft
from .serialize import matrix_to_json
from .superchannel import (
    PurificationSpec,
    SuperchannelSpec,
    choi_consistency_check,
    instance_equality_report,
    omega_explicit,
    pad_kraus,
    random_purification_apply,
    dilation_conversion_check,
    twirled_purification_power,
)
from .symrep import dim_irrep_unitary, partitions, weingarten_table, young_orthogonal_matrix
from .tensor import (
    InstanceTooLargeError,
    all_permutations,
    compose,
    cycle_type,
    inverse,
    permutation_unitary,
    random_density,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_CAP = 3


def _emit(doc: dict[str, Any], out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _check_doc(name: str, deviation: float, tolerance: float) -> dict[str, Any]:
    return {
        "name": name,
        "max_deviation": deviation,
        "tolerance": tolerance,
        "pass": bool(deviation <= tolerance),
    }


def _report(params: dict[str, Any], checks: list[dict[str, Any]], seed: int) -> dict[str, Any]:
    return {
        "params": params,
        "seed": seed,
        "checks": checks,
        "max_deviation": max((c["max_deviation"] for c in checks), default=0.0),
        "tolerance": min((c["tolerance"] for c in checks), default=0.0),
        "pass": all(c["pass"] for c in checks),
    }


def _random_channel(args) -> Any:
    rng = np.random.default_rng(args.seed)
    return random_kraus_channel(args.da, args.db, args.r, rng)


def cmd_purify(args) -> dict[str, Any]:
    spec = PurificationSpec(args.da, args.n)
    rng = np.random.default_rng(args.seed)
    checks = []
    dev_prop = 0.0
    for _ in range(5):
        rho = random_density(args.da, rng)
        rho_n = rho
        for _ in range(args.n - 1):
            rho_n = np.kron(rho_n, rho)
        lhs = random_purification_apply(spec, rho_n)
        rhs = twirled_purification_power(spec, rho)
        dev_prop = max(dev_prop, float(np.max(np.abs(lhs - rhs))))
    checks.append(_check_doc("purification_property", dev_prop, args.tol))
    dev_tp = 0.0
    for _ in range(20):
        x = random_density(args.da**args.n, rng)
        out = random_purification_apply(spec, x)
        dev_tp = max(dev_tp, abs(float(np.trace(out).real) - float(np.trace(x).real)))
    checks.append(_check_doc("trace_preservation", dev_tp, 1e-10))
    return _report({"subcommand": "purify", "d_a": args.da, "n": args.n}, checks, args.seed)


def cmd_omega(args) -> dict[str, Any]:
    SuperchannelSpec(args.n, args.da, args.db, args.r)
    ch = _random_channel(args)
    report = instance_equality_report(ch, args.n, args.r, tol_equality=args.tol)
    checks = [_check_doc(c.name, c.max_deviation, c.tolerance) for c in report.checks[1:]]
    j = superoperator_to_choi(omega_explicit(pad_kraus(ch, args.r), args.n, args.r))
    checks.append(_check_doc("choi_positivity", max(-j.min_eigenvalue(), 0.0), 1e-9))
    checks.append(_check_doc("trace_preservation", j.tp_deviation(), 1e-10))
    params = {"subcommand": "omega", "n": args.n, "d_a": args.da, "d_b": args.db, "r": args.r}
    return _report(params, checks, args.seed)


def cmd_circuit(args) -> dict[str, Any]:
    SuperchannelSpec(args.n, args.da, args.db, args.r)
    ch = _random_channel(args)
    report = instance_equality_report(ch, args.n, args.r, tol_equality=args.tol)
    checks = [_check_doc(c.name, c.max_deviation, c.tolerance) for c in report.checks]
    params = {"subcommand": "circuit", "n": args.n, "d_a": args.da, "d_b": args.db, "r": args.r}
    return _report(params, checks, args.seed)


def _representation_checks(n: int, d: int, tol: float) -> list[dict[str, Any]]:
    basis = schur_transform(d, n)
    u = basis.matrix
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(d**n))))
    for k in range(n - 1):
        sigma = tuple(range(k)) + (k + 1, k) + tuple(range(k + 2, n))
        expected = np.zeros((d**n, d**n))
        offset = 0
        for lam in partitions(n):
            mult = dim_irrep_unitary(d, lam)
            if mult == 0:
                continue
            block = np.kron(young_orthogonal_matrix(lam, sigma), np.eye(mult))
            expected[offset : offset + len(block), offset : offset + len(block)] = block
            offset += len(block)
        rotated = u.conj().T @ permutation_unitary(sigma, d) @ u
        dev = max(dev, float(np.max(np.abs(rotated - expected))))
    qft = sn_qft(n).matrix
    qft_dev = float(np.max(np.abs(qft.conj().T @ qft - np.eye(qft.shape[0]))))
    uniform = np.full(qft.shape[0], 1.0 / np.sqrt(qft.shape[0]), dtype=complex)
    trivial = np.zeros(qft.shape[0])
    trivial[0] = 1.0
    qft_dev = max(qft_dev, float(np.max(np.abs(qft @ uniform - trivial))))
    perms = all_permutations(n)
    gram = np.array(
        [
            [float(d) ** len(cycle_type(compose(inverse(s), t))) for t in perms]
            for s in perms
        ]
    )
    pinv = np.linalg.pinv(gram)
    table = weingarten_table(n, d)
    wg_dev = max(
        abs(pinv[i, j] - table(compose(inverse(s), t)))
        for i, s in enumerate(perms)
        for j, t in enumerate(perms)
    )
    return [
        _check_doc("schur_intertwining", dev, tol),
        _check_doc("qft_identities", qft_dev, 1e-10),
        _check_doc("weingarten_vs_gram", wg_dev, 1e-10),
    ]


def _verify_point(n: int, da: int, db: int, r: int, seed: int, tol: float, samples: int) -> dict[str, Any]:
    SuperchannelSpec(n, da, db, r)
    rng = np.random.default_rng(seed)
    ch = random_kraus_channel(da, db, r, rng)
    checks = []
    report = instance_equality_report(ch, n, r, tol_equality=tol)
    checks.extend(_check_doc(c.name, c.max_deviation, c.tolerance) for c in report.checks)
    spec = PurificationSpec(da, n)
    purify_dev = 0.0
    for _ in range(3):
        rho = random_density(da, rng)
        rho_n = rho
        for _ in range(n - 1):
            rho_n = np.kron(rho_n, rho)
        lhs = random_purification_apply(spec, rho_n)
        rhs = twirled_purification_power(spec, rho)
        purify_dev = max(purify_dev, float(np.max(np.abs(lhs - rhs))))
    checks.append(_check_doc("purification_property", purify_dev, tol))
    if r == da * db:
        choi = choi_consistency_check(ch, n, tolerance=tol)
        checks.append(_check_doc(choi.name, choi.max_deviation, choi.tolerance))
    checks.extend(_representation_checks(n, max(da, db, r), tol))
    if samples > 0:
        stmt = dilation_conversion_check(
            ch, n, r, trials=4, samples=samples, rng=np.random.default_rng(seed + 1)
        )
        checks.append(_check_doc("dilation_gauge_independence", stmt.gauge_deviation, tol))
        checks.append(_check_doc("monte_carlo_z_score", stmt.max_z_score, 3.0))
    return _report({"n": n, "d_a": da, "d_b": db, "r": r}, checks, seed)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",")]


def cmd_verify(args) -> dict[str, Any]:
    points = [
        (n, da, db, r)
        for n in _int_list(args.n)
        for da in _int_list(args.da)
        for db in _int_list(args.db)
        for r in _int_list(args.r)
    ]
    reports = []
    for idx, (n, da, db, r) in enumerate(points):
        if r * db < da:  # no trace-preserving channel with these parameters
            reports.append(
                {"params": {"n": n, "d_a": da, "d_b": db, "r": r}, "skipped": True, "pass": True}
            )
            continue
        point_seed = args.seed if len(points) == 1 else int(
            np.random.SeedSequence([args.seed, idx]).generate_state(1)[0]
        )
        reports.append(_verify_point(n, da, db, r, point_seed, args.tol, args.samples))
    doc = {
        "params": {"subcommand": "verify", "n": args.n, "d_a": args.da, "d_b": args.db, "r": args.r},
        "seed": args.seed,
        "points": reports,
        "max_deviation": max((p.get("max_deviation", 0.0) for p in reports), default=0.0),
        "tolerance": args.tol,
        "pass": all(p["pass"] for p in reports),
    }
    return doc


def cmd_schur(args) -> dict[str, Any]:
    basis = schur_transform(args.d, args.n)
    doc = matrix_to_json(basis.matrix, shape=(args.d,) * args.n)
    doc["labels"] = [[list(lam), i, alpha] for lam, i, alpha in basis.labels]
    return doc


def cmd_qft(args) -> dict[str, Any]:
    basis = sn_qft(args.n)
    doc = matrix_to_json(basis.matrix)
    doc["labels"] = [[list(lam), i, j] for lam, i, j in basis.labels]
    return doc


def cmd_weingarten(args) -> dict[str, Any]:
    table = weingarten_table(args.n, args.d)
    return {
        "n": args.n,
        "d": args.d,
        "values": {",".join(map(str, ct)): val for ct, val in table.values.items()},
    }


def cmd_learn(args) -> str:
    shots_list = [int(s) for s in args.shots.split(",")]
    lines = ["shots,choi_distance,dilation_distance,seed"]
    rng = np.random.default_rng(args.seed)
    truth = random_kraus_channel(args.da, args.db, args.r, rng)
    bases = args.bases if args.bases else (args.da * args.db * args.r) ** 2
    for shots in shots_list:
        cfg = TomographyConfig(shots=shots, bases=bases, seed=args.seed)
        result = learn_channel(truth, args.r, cfg)
        lines.append(
            f"{shots},{result.choi_distance!r},{result.dilation_distance!r},{args.seed}"
        )
    return "\n".join(lines)


def cmd_bounds(args) -> dict[str, Any]:
    doc: dict[str, Any] = {"params": {"d_a": args.da, "d_b": args.db, "r": args.r}, "seed": args.seed}
    if args.m is not None:
        report = distinguishing_bound_check(args.m, args.n, args.da, args.db, args.r)
        doc["distinguishing"] = {
            "m": str(args.m),
            "n": args.n,
            "sym_count": str(report.sym_count),
            "lhs": report.lhs,
            "rhs": report.rhs,
            "pass": report.passed,
            "n_min": report.n_min,
        }
    if args.epsilon is not None:
        interval = packing_log_cardinality(
            args.da, args.db, args.r, args.epsilon, args.c1, args.c2
        )
        doc["packing"] = {
            "epsilon": args.epsilon,
            "lower": interval.lower,
            "upper": interval.upper,
            "dim_count": str(interval.dim_count),
            "sandwich_ok": interval.sandwich_ok,
        }
    doc["pass"] = True
    return doc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stinesim", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_dims=True):
        if with_dims:
            p.add_argument("--n", type=int, default=2)
            p.add_argument("--da", type=int, default=2)
            p.add_argument("--db", type=int, default=2)
            p.add_argument("--r", type=int, default=2)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="equality suites over a parameter grid")
    p.add_argument("--n", default="2", help="copy counts, comma separated")
    p.add_argument("--da", default="2", help="input dimensions, comma separated")
    p.add_argument("--db", default="2", help="output dimensions, comma separated")
    p.add_argument("--r", default="2", help="rank promises, comma separated")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.add_argument("--samples", type=int, default=10000)
    p.set_defaults(fn=cmd_verify)

    for name, fn in [("omega", cmd_omega), ("circuit", cmd_circuit)]:
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("purify")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--da", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_purify)

    p = sub.add_parser("schur")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_schur, seed=0)

    p = sub.add_parser("qft")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_qft, seed=0)

    p = sub.add_parser("weingarten")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_weingarten, seed=0)

    p = sub.add_parser("learn")
    p.add_argument("--da", type=int, default=2)
    p.add_argument("--db", type=int, default=2)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--shots", default="0", help="comma-separated shot counts; 0 = exact")
    p.add_argument("--bases", type=int, default=0, help="0 = smallest admissible frame")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("bounds")
    p.add_argument("--da", type=int, required=True)
    p.add_argument("--db", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="hypothesis count")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_bounds)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.fn(args)
    except InstanceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(result, str):
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(result + "\n")
        else:
            print(result)
        return EXIT_PASS
    _emit(result, args.out)
    return EXIT_PASS if result.get("pass", True) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
