"""Command-line interface.

Every subcommand reads tuple/matrix JSON files, runs one construction, and
emits a certificate ``{theorem, inputs, residuals, tolerances, iterations,
depth, pass}``.  Exit codes: 0 success, 2 invalid input, 3 numerical failure
(including a certificate that does not pass).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bcl, cross, serialize, toeplitz, updown
from .errors import InputError, NotCommuting, NotContraction, NumericalError, TupleInvalid, UnknownFixture
from .matcore import adj, opnorm
from .tuples import FAMILIES, commutator_residual, is_adjoint_pure, product_contraction, random_commuting_tuple

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class _Inputs:
    """Loads files once and remembers their content hashes."""

    def __init__(self):
        self.hashes: dict[str, str] = {}

    def _load(self, label: str, path):
        try:
            obj, raw = serialize.load_json(path)
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from None
        self.hashes[label] = serialize.content_hash(raw)
        return obj

    def tuple(self, label: str, path):
        obj = self._load(label, path)
        try:
            return serialize.obj_to_tuple(obj, where=str(path))
        except (NotCommuting, NotContraction, TupleInvalid) as exc:
            raise InputError(f"{path}: {exc}") from None

    def matrix(self, label: str, path, rows=None, cols=None):
        M = serialize.obj_to_matrix(self._load(label, path), where=str(path))
        if (rows is not None and M.shape[0] != rows) or (cols is not None and M.shape[1] != cols):
            raise InputError(f"{path}: shape {M.shape} does not fit the tuple(s)")
        return M


def _certificate(theorem, inputs, residuals, tolerances, passed, iterations=0, depth=None) -> dict:
    return {
        "theorem": theorem,
        "inputs": dict(inputs.hashes),
        "residuals": serialize.jsonable(residuals),
        "tolerances": serialize.jsonable(tolerances),
        "iterations": int(iterations),
        "depth": depth,
        "pass": bool(passed),
    }


# --- subcommands ------------------------------------------------------------

def cmd_check(args, inp):
    T = inp.tuple("tuple", args.tuple)
    res = {"commutator": commutator_residual(T), "max_norm": max(opnorm(A) for A in T)}
    summary = {"n": T.n, "dim": T.dim, "adjoint_pure": is_adjoint_pure(T)}
    if args.X:
        X = inp.matrix("X", args.X, T.dim, T.dim)
        res["toeplitz_residual"] = toeplitz.toeplitz_residual(X, T, T)
        if res["toeplitz_residual"] <= toeplitz.TOEPLITZ_TOL * max(1.0, opnorm(X)):
            label = "toeplitz"
            sc = toeplitz.structure_checks(X, T)
            res["structure"] = sc["max_residual"]
        else:
            label = updown.classify(X, T, args.max_iter)
        summary["class"] = label
    cert = _certificate("toeplitz-classification", inp, res, {"order": updown.ORDER_TOL, "tail": updown.TAIL_TOL},
                        True)
    return cert, {}, summary


def cmd_solve(args, inp):
    S = inp.tuple("S", args.S)
    T = inp.tuple("T", args.T) if args.T else S
    space = toeplitz.solution_space(S, T)
    arts = {f"basis_{j}": X for j, X in enumerate(space.basis)}
    cert = _certificate("solution-space", inp, {"residual": space.residual}, {"rank": toeplitz.RANK_TOL},
                        space.residual <= 1e-8)
    return cert, arts, {"dim": space.dim}


def cmd_qt(args, inp):
    T = inp.tuple("tuple", args.tuple)
    Q, stages, delta = toeplitz.qt_with_info(T, args.tol, args.max_iter)
    P = product_contraction(T)
    Q2 = Q @ Q
    res = {"fixed_point": opnorm(Q2 - adj(P) @ Q2 @ P), "last_delta": delta, "projection": opnorm(Q2 - Q)}
    cert = _certificate("canonical-qt", inp, res, {"tol": args.tol}, res["fixed_point"] <= 10 * args.tol, stages)
    return cert, {"Q": Q}, {"rank": int(np.linalg.matrix_rank(Q, tol=1e-8)) if Q.size else 0}


def cmd_extend(args, inp):
    T = inp.tuple("tuple", args.tuple)
    pe = toeplitz.canonical_isometric_pe(T, min(args.tol, 1e-12), args.max_iter)
    Q = toeplitz.compute_qt(T, min(args.tol, 1e-12), args.max_iter)
    res = {
        "intertwining": pe.intertwining_residual(T),
        "isometry": pe.isometry_residual(),
        "gram": opnorm(adj(pe.J) @ pe.J - Q @ Q),
    }
    arts = {"J": pe.J}
    arts.update({f"V_{i + 1}": V for i, V in enumerate(pe.V)})
    cert = _certificate("canonical-isometric-pseudo-extension", inp, res, {"tol": 1e-8},
                        max(res.values()) <= 1e-8)
    return cert, arts, {"K_dim": pe.K_dim}


def cmd_factorize(args, inp):
    T = inp.tuple("tuple", args.tuple)
    R = inp.matrix("R", args.R, T.dim, T.dim)
    pe = toeplitz.factorize_positive(R, T, args.tol)
    res = {
        "gram": opnorm(adj(pe.J) @ pe.J - R),
        "intertwining": pe.intertwining_residual(T),
        "isometry": pe.isometry_residual(),
    }
    arts = {"J": pe.J}
    arts.update({f"V_{i + 1}": V for i, V in enumerate(pe.V)})
    cert = _certificate("positive-toeplitz-factorization", inp, res, {"tol": args.tol},
                        max(res.values()) <= 10 * args.tol)
    return cert, arts, {"K_dim": pe.K_dim}


def cmd_decompose(args, inp):
    T = inp.tuple("tuple", args.tuple)
    X = inp.matrix("X", args.X, T.dim, T.dim)
    dec = updown.decompose(X, T, min(args.tol, 1e-12), args.max_iter)
    cert = _certificate("upper-lower-decomposition", inp, dec.residuals,
                        {"order": updown.ORDER_TOL, "tail": updown.TAIL_TOL}, True, dec.stages)
    return cert, {"U": dec.U, "N": dec.N}, {"orientation": dec.orientation}


def cmd_bcl(args, inp):
    T = inp.tuple("tuple", args.tuple)
    N = inp.matrix("N", args.N, T.dim, T.dim)
    if T.n == 2:
        result = bcl.construct_pair(N, T, args.depth)
    elif T.n >= 3:
        result = bcl.construct_tuple(N, T, args.depth)
    else:
        raise InputError("bcl needs a tuple with at least two operators")
    res = {k: v for k, v in result.residuals.items() if k not in ("lift", "pass", "depth", "E_dim")}
    arts = {"Pi": result.Pi}
    for i, p in enumerate(result.pencils):
        arts[f"pencil_{i + 1}_A"] = p.A
        arts[f"pencil_{i + 1}_B"] = p.B
    tolerances = {"pencil": bcl.PENCIL_TOL, "tail_target": bcl.TAIL_TARGET, "depth_cap": bcl.K_MAX}
    cert = _certificate(result.theorem, inp, res, tolerances, result.residuals["pass"], depth=result.depth)
    return cert, arts, {"E_dim": result.E_dim}


def cmd_cesaro(args, inp):
    S = inp.tuple("S", args.S)
    T = inp.tuple("T", args.T)
    X = inp.matrix("X", args.X, S.dim, T.dim)
    Y, c = cross.cesaro_toeplitz(X, S, T, args.tol, args.m_max)
    res = {"delta": c.delta, "residual": c.residual, "norm_excess": opnorm(Y) - opnorm(X)}
    cert = _certificate("banach-limit-averaging", inp, res, {"tol": args.tol, "m_max": args.m_max},
                        res["norm_excess"] <= args.tol, c.stages)
    return cert, {"Y": Y}, {"m_final": c.m_final}


def cmd_correspond(args, inp):
    S = inp.tuple("S", args.S)
    T = inp.tuple("T", args.T)
    rep = cross.canonical_correspondence(S, T)
    res = {k: v for k, v in rep.items() if k not in ("pass", "degenerate", "solution_dim", "lifted_dim")}
    cert = _certificate("canonical-correspondence", inp, res, {"angle": 1e-7, "norm": 1e-6}, rep["pass"])
    return cert, {}, {"solution_dim": rep["solution_dim"], "lifted_dim": rep["lifted_dim"],
                      "degenerate": rep["degenerate"]}


# --- fixtures ---------------------------------------------------------------

def coordinate_projections(l: int = 5, m: int = 2, k: int = 3, a=None):
    """T_1 keeps e_1..e_k, T_2 keeps e_m..e_l, X_a = sum a_i e_i e_i* over m <= i <= k."""
    if not 1 < m <= k < l:
        raise InputError(f"need 1 < m <= k < l, got l={l}, m={m}, k={k}")
    if a is None:
        a = list(range(m, k + 1))
    if len(a) != k - m + 1 or any(x < 0 for x in a):
        raise InputError(f"a needs {k - m + 1} nonnegative entries")
    T1 = np.diag([1.0 if i < k else 0.0 for i in range(l)])
    T2 = np.diag([0.0 if i < m - 1 else 1.0 for i in range(l)])
    X = np.zeros((l, l))
    for i, ai in zip(range(m - 1, k), a):
        X[i, i] = ai
    return [T1, T2], X


def scaled_diagonal_pair(a: float = 0.5, r: float = 1.0, s: float = 1.0, t: float = 1.0):
    """T_1 = diag(a, a, 0), T_2 = diag(0, 1, 1), N = diag(r, s, t)."""
    if not 0 < a < 1 or min(r, s, t) < 0:
        raise InputError("need 0 < a < 1 and r, s, t >= 0")
    return [np.diag([a, a, 0.0]), np.diag([0.0, 1.0, 1.0])], np.diag([r, s, t])


FIXTURES = ("coordinate-projections", "scaled-diagonal-pair", "random")


def cmd_fixtures(args, inp):
    if args.name == "coordinate-projections":
        ops, X = coordinate_projections(args.l, args.m, args.k, args.a)
        files = {"tuple": serialize.tuple_to_obj(ops, ["T_1", "T_2"]), "X": serialize.matrix_to_obj(X)}
    elif args.name == "scaled-diagonal-pair":
        ops, N = scaled_diagonal_pair(args.scale, args.r, args.s, args.t)
        files = {"tuple": serialize.tuple_to_obj(ops, ["T_1", "T_2"]), "N": serialize.matrix_to_obj(N)}
    elif args.name == "random":
        T = random_commuting_tuple(args.dim, args.n, args.family, args.seed)
        files = {"tuple": serialize.tuple_to_obj(T, [f"T_{i + 1}" for i in range(T.n)])}
    else:
        raise UnknownFixture(f"unknown fixture {args.name!r}; expected one of {FIXTURES}")
    return None, files, {"files": sorted(files)}


# --- driver -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--max-iter", type=int, default=10_000)
    common.add_argument("--depth", default="auto", help="truncation depth or 'auto'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", choices=("json", "text"), default="text")
    common.add_argument("--out-dir", type=Path, default=None, help="write artifacts and certificate.json here")

    parser = argparse.ArgumentParser(prog="toeplitz-tuples", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate a tuple, classify an operator")
    p.add_argument("tuple")
    p.add_argument("X", nargs="?")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="basis of the solution space T(S, T)")
    p.add_argument("S")
    p.add_argument("T", nargs="?")
    p.set_defaults(func=cmd_solve)

    for name, func, helptext in (("qt", cmd_qt, "the operator Q_T"),
                                 ("extend", cmd_extend, "canonical isometric pseudo-extension")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("tuple")
        p.set_defaults(func=func)

    p = sub.add_parser("factorize", parents=[common], help="R = J*J with J T_i = V_i J")
    p.add_argument("tuple")
    p.add_argument("R")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("decompose", parents=[common], help="X = U -/+ N")
    p.add_argument("tuple")
    p.add_argument("X")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bcl", parents=[common], help="transfer-function model of a pure lower N")
    p.add_argument("tuple")
    p.add_argument("N")
    p.set_defaults(func=cmd_bcl)

    p = sub.add_parser("cesaro", parents=[common], help="average X onto T(S, T)")
    p.add_argument("S")
    p.add_argument("T")
    p.add_argument("X")
    p.add_argument("--m-max", type=int, default=cross.M_MAX)
    p.set_defaults(func=cmd_cesaro)

    p = sub.add_parser("correspond", parents=[common], help="T(S, T) versus J_S* T(W, V) J_T")
    p.add_argument("S")
    p.add_argument("T")
    p.set_defaults(func=cmd_correspond)

    p = sub.add_parser("fixtures", parents=[common], help="write fixture files")
    p.add_argument("name")
    p.add_argument("--l", type=int, default=5)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--a", type=float, nargs="+", default=None, help="diagonal weights a_m..a_k")
    p.add_argument("--scale", type=float, default=0.5, help="the parameter a of the scaled pair")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--family", choices=FAMILIES, default="joint-diagonal")
    p.set_defaults(func=cmd_fixtures)
    return parser


def _parse_depth(value):
    if value == "auto":
        return "auto"
    try:
        depth = int(value)
    except ValueError:
        raise InputError(f"--depth must be an integer or 'auto', got {value!r}") from None
    if depth < 1:
        raise InputError("--depth must be at least 1")
    return depth


def _emit_text(summary: dict, cert: dict | None, stream) -> None:
    for key in sorted(summary):
        print(f"{key}: {summary[key]}", file=stream)
    if cert is None:
        return
    print(f"theorem: {cert['theorem']}", file=stream)
    for key, val in sorted(cert["residuals"].items()):
        print(f"residual {key}: {val}", file=stream)
    if cert["depth"] is not None:
        print(f"depth: {cert['depth']}", file=stream)
    print(f"pass: {cert['pass']}", file=stream)


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        args.depth = _parse_depth(args.depth)
        cert, arts, summary = args.func(args, _Inputs())
    except InputError as exc:
        return _fail(args, exc, EXIT_INPUT, stdout)
    except NumericalError as exc:
        return _fail(args, exc, EXIT_NUMERIC, stdout)
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        for name, obj in arts.items():
            payload = obj if isinstance(obj, dict) else serialize.matrix_to_obj(obj)
            serialize.write_json(args.out_dir / f"{name}.json", payload)
        if cert is not None:
            serialize.write_json(args.out_dir / "certificate.json", cert)
    elif args.command == "fixtures":
        summary = {**summary, "content": arts}
    if args.output == "json":
        stdout.write(serialize.dumps({"summary": serialize.jsonable(summary), "certificate": cert}))
    else:
        _emit_text(summary, cert, stdout)
    if cert is not None and not cert["pass"]:
        return EXIT_NUMERIC
    return EXIT_OK


def _fail(args, exc, code: int, stdout) -> int:
    body = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if getattr(args, "output", "text") == "json":
        stdout.write(serialize.dumps(body))
    else:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
