"""Command line entry point: ``unitheta <command> ...``.

Every numeric command writes one JSON document to stdout with a
``manifest`` block.  Exit codes: 0 success, 1 a check failed, 2 usage,
3 validation, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import io
import json
import math
import platform
import sys
import time
from contextlib import redirect_stdout
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .fock import FockError
from .green import (
    CycleProximityError,
    DomainError,
    DomainPoint,
    ParameterRangeError,
    green_bruinier_closed,
    hejhal_poincare,
    key_text,
    theta_modularity,
    theta_psi,
    xi_kudla,
)
from .lattice import HermitianLattice, LatticeError, enumerate_vectors
from .special import ConvergenceError, PrecisionPolicy


class UsageError(Exception):
    pass


EXIT = {UsageError: 2, LatticeError: 3, DomainError: 3, ParameterRangeError: 3, FockError: 3,
        CycleProximityError: 3, ConvergenceError: 4}


# JSON with 17 significant digits ---------------------------------------------------


def _fmt(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(x, complex):
        return _fmt([x.real, x.imag])
    if isinstance(x, Fraction):
        return json.dumps(str(x))
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x)}")


def dumps(doc: Dict[str, Any]) -> str:
    return _fmt(doc)


@dataclass
class RunManifest:
    command: str
    params: Dict[str, Any]
    lattice_digest: Optional[str]
    precision_bits: int
    started: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat())
    t0: float = field(default_factory=time.perf_counter)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "lattice_digest": self.lattice_digest,
            "precision_bits": self.precision_bits,
            "versions": {"unitheta": __version__, "python": platform.python_version(), "numpy": np.__version__},
            "timestamp": {"started": self.started, "elapsed_s": time.perf_counter() - self.t0},
        }


# argument helpers ----------------------------------------------------------------


def _load_lattice(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise LatticeError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise LatticeError(f"{path} is not valid JSON: {exc}") from exc
    return HermitianLattice.from_json(data), hashlib.sha256(raw).hexdigest()


def _parse_tau(s: str) -> complex:
    try:
        u, v = (float(t) for t in s.split(","))
    except ValueError as exc:
        raise ParameterRangeError(f"--tau expects U,V, got {s!r}") from exc
    if v <= 0:
        raise ParameterRangeError("Im(tau) must be positive")
    return complex(u, v)


def _parse_h(s: str):
    if "," not in s and "/" not in s:
        try:
            return int(s)
        except ValueError as exc:
            raise ParameterRangeError(f"bad coset {s!r}") from exc
    try:
        return tuple(Fraction(t) for t in s.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterRangeError(f"bad coset {s!r}") from exc


def _parse_frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterRangeError(f"bad rational {s!r}") from exc


def _complex_matrix(data) -> np.ndarray:
    return np.array([[complex(e[0], e[1]) if isinstance(e, list) else complex(e) for e in row] for row in data])


def _parse_z(where: str, p: int, q: int, seed: int) -> DomainPoint:
    if where == "base":
        return DomainPoint.base(p, q)
    if where == "random":
        return DomainPoint.random(p, q, np.random.default_rng(seed))
    if where.startswith("geodesic:"):
        return DomainPoint.geodesic(p, q, float(where.split(":", 1)[1]))
    try:
        with open(where) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read point {where!r}: {exc}") from exc
    if "frame" in data:
        return DomainPoint.from_frame(p, q, _complex_matrix(data["frame"]))
    if "basis" in data:
        return DomainPoint.from_basis(p, _complex_matrix(data["basis"]))
    raise DomainError("point file needs a 'frame' or 'basis' entry")


# commands ----------------------------------------------------------------------


def cmd_verify_symbolic(a) -> int:
    from .weil import EXTRA_IDENTITIES, IDENTITIES

    table = {**IDENTITIES, **EXTRA_IDENTITIES}
    names = sorted(IDENTITIES) if a.identity == "all" else [a.identity]
    ok = True
    lines = []
    for p in range(1, a.p_max + 1):
        for q in range(1, a.q_max + 1):
            for name in names:
                rep = table[name](p, q)
                ok &= rep.holds
                lines.append(rep.line())
    if a.json:
        print(dumps({"value": {"lines": lines, "all_ok": ok}}))
    else:
        print("\n".join(lines))
    return 0 if ok else 1


def cmd_poly(a) -> int:
    from .schrodinger import check_polyexpl, compute_P

    doc: Dict[str, Any] = {}
    if a.alphas is not None or a.betas is not None:
        al = [int(t) for t in (a.alphas or "").split(",") if t]
        be = [int(t) for t in (a.betas or "").split(",") if t]
        doc["polynomial"] = compute_P(a.p, a.q, al, be).to_text()
    rep = check_polyexpl(a.p, a.q)
    doc["polyexpl"] = {"pairs": rep.pairs, "holds": rep.holds, "failures": rep.failures}
    print(dumps({"value": doc, "params": {"p": a.p, "q": a.q}}))
    return 0 if rep.holds else 1


def _emit(man: RunManifest, value, truncation=None) -> None:
    doc = {"value": value}
    if truncation is not None:
        doc["truncation"] = truncation
    doc["params"] = man.params
    doc["manifest"] = man.to_json()
    print(dumps(doc))


def cmd_lattice_info(a, man) -> int:
    L, digest = _load_lattice(a.lattice)
    man.lattice_digest = digest
    D = L.discriminant_group
    cosets = [{"index": i, "h": [str(x) for x in h], "norm_mod_2": str(D.value(i))} for i, h in enumerate(D.reps)]
    _emit(man, {"rank": L.n, "signature": list(L.signature), "field_disc": L.field.disc,
                "order": D.order, "invariants": D.invariants, "cosets": cosets})
    return 0


def cmd_enumerate(a, man) -> int:
    L, man.lattice_digest = _load_lattice(a.lattice)
    p, q = L.signature
    z = _parse_z(a.z, p, q, a.seed)
    h = _parse_h(a.h)
    from .green import _resolve_coset

    two_m = None if a.m is None else 2 * _parse_frac(a.m)
    E = enumerate_vectors(L, _resolve_coset(L, h), two_m, z.ginv, a.bound, a.workers)
    _emit(man, {"count": E.count, "coords": [[str(x) for x in c] for c in E.coords],
                "norms": [str(x) for x in E.norms]}, {"bound": a.bound, "tail_estimate": 0.0, "terms": E.count})
    return 0


def _green_doc(G):
    js = G.to_json()
    return js["coefficients"], js["truncation"]


def cmd_green_kudla(a, man) -> int:
    L, man.lattice_digest = _load_lattice(a.lattice)
    p, q = L.signature
    z = _parse_z(a.z, p, q, a.seed)
    G = xi_kudla(L, _parse_frac(a.m), _parse_h(a.h), a.w, z, a.bound, a.workers,
                 include_zero_term=a.zero_term, intro_factor=a.intro_factor)
    _emit(man, *_green_doc(G))
    return 0


def cmd_green_bruinier(a, man) -> int:
    L, man.lattice_digest = _load_lattice(a.lattice)
    p, q = L.signature
    where = f"geodesic:{a.geodesic_t}" if a.geodesic_t is not None else a.z
    z = _parse_z(where, p, q, a.seed)
    G = green_bruinier_closed(L, _parse_frac(a.m), _parse_h(a.h), a.s, z, a.bound, a.workers)
    _emit(man, *_green_doc(G))
    return 0


def cmd_theta(a, man) -> int:
    L, man.lattice_digest = _load_lattice(a.lattice)
    p, q = L.signature
    z = _parse_z(a.z, p, q, a.seed)
    T = theta_psi(L, _parse_tau(a.tau), z, a.bound, a.workers)
    js = T.to_json()
    _emit(man, {"cosets": js["cosets"], "weight": js["weight"]}, js["truncation"])
    return 0


def cmd_modularity(a, man) -> int:
    L, man.lattice_digest = _load_lattice(a.lattice)
    p, q = L.signature
    z = _parse_z(a.z, p, q, a.seed)
    rep = theta_modularity(L, a.gamma, _parse_tau(a.tau), z, a.bound, a.workers)
    _emit(man, {"gamma": a.gamma, "relative_error": rep.rel_error,
                "lhs": [list(r) for r in rep.lhs], "rhs": [list(r) for r in rep.rhs]},
          {"bound": a.bound})
    return 0


def cmd_poincare(a, man) -> int:
    L, man.lattice_digest = _load_lattice(a.lattice)
    P = hejhal_poincare(L, _parse_frac(a.m), _parse_h(a.h), a.s, _parse_tau(a.tau), a.cmax, workers=a.workers)
    _emit(man, {"cosets": list(P.values)}, {"bound": a.cmax, "tail_estimate": P.tail_estimate, "terms": P.terms})
    return 0


def cmd_accept(a) -> int:
    from .acceptance import run_acceptance

    report = run_acceptance(a.suite, bound=a.bound, seed=a.seed)
    for r in report:
        print(r.line(), file=sys.stderr)
    print(dumps({"value": {"criteria": [r.to_json() for r in report],
                           "all_pass": all(r.passed for r in report)}}))
    return 0 if all(r.passed for r in report) else 1


# parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="unitheta", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, lattice=True, z=True):
        if lattice:
            p.add_argument("lattice")
        if z:
            p.add_argument("--z", default="base", help="base | random | geodesic:T | frame.json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("verify-symbolic")
    p.add_argument("--p-max", type=int, default=2)
    p.add_argument("--q-max", type=int, default=2)
    p.add_argument("--identity", default="all",
                   choices=["main", "kinv", "weights", "lddc", "dc", "all"])
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("poly")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--alphas")
    p.add_argument("--betas")

    p = sub.add_parser("lattice-info")
    common(p, z=False)

    p = sub.add_parser("enumerate")
    common(p)
    p.add_argument("--h", default="0")
    p.add_argument("--m", help="enumerate <lambda,lambda> = 2m; omit for all norms")
    p.add_argument("--bound", type=float, required=True)

    p = sub.add_parser("theta")
    common(p)
    p.add_argument("--tau", required=True)
    p.add_argument("--bound", type=float, required=True)

    p = sub.add_parser("green-kudla")
    common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--h", default="0")
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--bound", type=float, required=True)
    p.add_argument("--zero-term", action="store_true")
    p.add_argument("--intro-factor", action="store_true")

    p = sub.add_parser("green-bruinier")
    common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--h", default="0")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--geodesic-t", type=float)
    p.add_argument("--bound", type=float, required=True)

    p = sub.add_parser("modularity")
    common(p)
    p.add_argument("--gamma", choices=["S", "T"], required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--bound", type=float, required=True)

    p = sub.add_parser("poincare")
    common(p, z=False)
    p.add_argument("--m", required=True)
    p.add_argument("--h", default="0")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--cmax", type=int, required=True)

    p = sub.add_parser("accept")
    p.add_argument("--suite", choices=["symbolic", "numeric", "all"], default="all")
    p.add_argument("--bound", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    return ap


COMMANDS = {
    "lattice-info": cmd_lattice_info,
    "enumerate": cmd_enumerate,
    "theta": cmd_theta,
    "green-kudla": cmd_green_kudla,
    "green-bruinier": cmd_green_bruinier,
    "modularity": cmd_modularity,
    "poincare": cmd_poincare,
}


def _error(kind: str, detail: str, code: int) -> int:
    print(dumps({"error": {"kind": kind, "detail": detail}}))
    return code


def dispatch(argv: Sequence[str]) -> int:
    try:
        a = build_parser().parse_args(list(argv))
        if a.command is None:
            raise UsageError("no command given")
        if a.command == "verify-symbolic":
            return cmd_verify_symbolic(a)
        if a.command == "poly":
            return cmd_poly(a)
        if a.command == "accept":
            return cmd_accept(a)
        params = {k: v for k, v in sorted(vars(a).items()) if k != "command"}
        man = RunManifest(a.command, params, None, PrecisionPolicy.from_env().bits)
        return COMMANDS[a.command](a, man)
    except tuple(EXIT) as exc:
        code = next(c for t, c in EXIT.items() if isinstance(exc, t))
        return _error(type(exc).__name__, str(exc), code)
    except (ValueError, ZeroDivisionError) as exc:
        return _error("ValidationError", str(exc), 3)
    except ArithmeticError as exc:
        return _error("NumericError", str(exc), 4)


def run_captured(argv: Sequence[str]) -> tuple:
    """(exit code, stdout text) of an in-process invocation."""
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = dispatch(argv)
    return code, buf.getvalue()


def main(argv: Optional[Sequence[str]] = None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
