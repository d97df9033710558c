"""Command line front-end (``btl``).

Symbols are read from JSON files in the interchange schema
``{"n": int, "coeffs": [{"k": int, "re": [[...]], "im": [[...]]}]}``.  Vector
arguments (certificates, ``Xi_2``) are square symbol files read column-wise.

Exit codes: 0 success, 2 usage error, 3 unreadable or malformed input,
4 dimension mismatch, 5 computation error.  Verdicts are reported in the
output, never through the exit code.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .criteria import (
    CRITERION_ZERO,
    EXACT_ZERO,
    commutator_criterion,
    normality_criterion,
    radial_scan,
    trace_defect_paths,
    zero_semicommutator_check,
)
from .decompose import semicommutator_certificates, theorem5_check, xi2
from .errors import (
    BlockToeplitzError,
    DimensionMismatch,
    SymbolFormatError,
)
from .hardy import max_abs, semicommutator
from .symbol import MatrixSymbol, adjoint, random_symbol, square_wave

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_DIMENSION = 4
EXIT_COMPUTE = 5


@dataclass
class JobSpec:
    """Validated parameters of one CLI invocation."""

    command: str
    inputs: list = field(default_factory=list)
    radii: list = field(default_factory=list)
    angles: int = 1
    tolerance: float = 1e-9
    out: str | None = None
    seed: int | None = None
    threads: int | None = None

    def __post_init__(self):
        if any(not (0.0 < r < 1.0) for r in self.radii):
            raise ValueError("radii must lie in (0, 1)")
        if self.angles < 1:
            raise ValueError("angle count must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerances must be positive")

    @property
    def angle_grid(self) -> list:
        return [2 * math.pi * k / self.angles for k in range(self.angles)]


# -- I/O -----------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "null"
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _fmt(obj) + "\n"


def read_symbol(path: str) -> MatrixSymbol:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SymbolFormatError(f"{path}: {exc}") from None
    return MatrixSymbol.from_dict(obj)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _columns(S: MatrixSymbol) -> list:
    return [[S.entry(i, j) for i in range(S.n)] for j in range(S.n)]


def _column(S: MatrixSymbol, j: int) -> list:
    if not 0 <= j < S.n:
        raise DimensionMismatch(f"column {j} out of range for a {S.n}x{S.n} symbol")
    return _columns(S)[j]


def _threads(arg: int | None) -> int | None:
    env = os.environ.get("BTL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SymbolFormatError(f"BTL_THREADS must be an integer, got {env!r}") from None
    return arg


def _radii(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}") from None


# -- commands ------------------------------------------------------------------------


def cmd_check_zero_semicommutator(args) -> int:
    F, G = read_symbol(args.F), read_symbol(args.G)
    chk = zero_semicommutator_check(F, G)
    out = chk.to_json()
    if chk.zero:
        out["certificates"] = [r.to_json() for r in semicommutator_certificates(F, G)]
    _emit(dumps(out), args.out)
    return EXIT_OK


def _commutator_verdict(F: MatrixSymbol, G: MatrixSymbol, rep) -> dict:
    # T_F T_G - T_G T_F = T_{FG - GF} + (T_GF - T_G T_F) - (T_FG - T_F T_G)
    scale = max(1.0, F.max_abs() * G.max_abs())
    a, b = semicommutator(G, F), semicommutator(F, G)
    m = max(a.shape[0], b.shape[0])
    diff = np.zeros((m, m), dtype=complex)
    diff[:a.shape[0], :a.shape[0]] += a
    diff[:b.shape[0], :b.shape[0]] -= b
    exact = max_abs(diff)
    commute = rep.residual <= EXACT_ZERO * scale and exact <= EXACT_ZERO * scale
    out = {
        "commute": bool(commute),
        "residual": rep.residual,
        "semicommutator_difference_max": exact,
        "criterion_norm": rep.norm,
        "criterion_zero": bool(rep.norm <= CRITERION_ZERO * scale),
    }
    return out


def cmd_check_zero_commutator(args) -> int:
    F, G = read_symbol(args.F), read_symbol(args.G)
    rep = commutator_criterion(F, G, 0.0)
    _emit(dumps(_commutator_verdict(F, G, rep)), args.out)
    return EXIT_OK


def cmd_check_normal(args) -> int:
    F = read_symbol(args.F)
    rep = normality_criterion(F, 0.0)
    out = _commutator_verdict(F, adjoint(F), rep)
    out["normal"] = out.pop("commute")
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    job = JobSpec("scan", [args.F, args.G], args.radii, args.angles, out=args.out,
                  threads=_threads(args.threads))
    F = read_symbol(args.F)
    G = read_symbol(args.G) if args.G else None
    if args.mode != "normality" and G is None:
        raise SymbolFormatError(f"mode {args.mode!r} needs a second symbol file")
    table = radial_scan(F, G, job.radii, job.angle_grid, mode=args.mode, threads=job.threads)
    _emit(table.to_csv(), job.out)
    return EXIT_OK


def _parse_z(z):
    return None if z is None else complex(z[0], z[1])


def cmd_certificate(args) -> int:
    Fv, Gv = read_symbol(args.f), read_symbol(args.g)
    g = _column(Gv, args.g_column)
    z = _parse_z(args.z)
    if z is not None:
        f = _column(Fv, args.f_column if args.f_column is not None else 0)
        res = xi2(f, g, z)
        out = res.to_json()
    else:
        f_list = _columns(Fv) if args.f_column is None else [_column(Fv, args.f_column)]
        out = theorem5_check(f_list, g).to_json()
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_xi2(args) -> int:
    Fv, Gv = read_symbol(args.f), read_symbol(args.g)
    f = _column(Fv, args.f_column)
    g = _column(Gv, args.g_column)
    perms = args.permutations
    if perms is not None and perms != "all":
        perms = int(perms)
    res = xi2(f, g, complex(args.z[0], args.z[1]), method=args.method,
              permutations=perms, seed=args.seed)
    _emit(dumps(res.to_json()), args.out)
    return EXIT_OK


def cmd_trace_identity(args) -> int:
    job = JobSpec("trace-identity", [args.F, args.G], args.radii, args.angles,
                  tolerance=args.tol, out=args.out)
    F, G = read_symbol(args.F), read_symbol(args.G)
    worst = 0.0
    points = 0
    for r in job.radii:
        for t in job.angle_grid:
            p, q = trace_defect_paths(F, G, r * complex(math.cos(t), math.sin(t)))
            denom = max(abs(p), abs(q))
            worst = max(worst, abs(p - q) / denom if denom > 0 else 0.0)
            points += 1
    out = {"points": points, "max_relative_disagreement": worst,
           "within_tolerance": bool(worst <= job.tolerance)}
    _emit(dumps(out), job.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.degree < 0 or args.n < 1:
        raise ValueError("need degree >= 0 and n >= 1")
    if args.kind == "squarewave":
        S = square_wave(args.degree, args.n, args.shift)
    elif args.kind == "random":
        S = random_symbol(args.n, args.degree, args.degree, np.random.default_rng(args.seed))
    else:
        S = random_symbol(args.n, args.degree, 0, np.random.default_rng(args.seed))
    _emit(dumps(S.to_dict()), args.out)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="btl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def out_opt(sp):
        sp.add_argument("--out", help="output file (default: stdout)")

    sp = sub.add_parser("check-zero-semicommutator", help="is T_FG = T_F T_G?")
    sp.add_argument("F"); sp.add_argument("G"); out_opt(sp)
    sp.set_defaults(func=cmd_check_zero_semicommutator)

    sp = sub.add_parser("check-zero-commutator", help="is T_F T_G = T_G T_F?")
    sp.add_argument("F"); sp.add_argument("G"); out_opt(sp)
    sp.set_defaults(func=cmd_check_zero_commutator)

    sp = sub.add_parser("check-normal", help="is T_F normal?")
    sp.add_argument("F"); out_opt(sp)
    sp.set_defaults(func=cmd_check_normal)

    sp = sub.add_parser("scan", help="criterion norms on a polar grid (CSV)")
    sp.add_argument("F"); sp.add_argument("G", nargs="?")
    sp.add_argument("--mode", choices=["semicommutator", "commutator", "normality"],
                    default="semicommutator")
    sp.add_argument("--radii", type=_radii, default=[0.5, 0.9, 0.99])
    sp.add_argument("--angles", type=int, default=8, help="number of equispaced angles")
    sp.add_argument("--threads", type=int, default=None)
    out_opt(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("certificate", help="certificate for a vanishing Hankel-product sum")
    sp.add_argument("f"); sp.add_argument("g")
    sp.add_argument("--f-column", type=int, default=None,
                    help="use only this column of f (default: every column)")
    sp.add_argument("--g-column", "--column", dest="g_column", type=int, default=0)
    sp.add_argument("--z", type=float, nargs=2, metavar=("RE", "IM"),
                    help="minimise Xi_2 at this point instead")
    out_opt(sp)
    sp.set_defaults(func=cmd_certificate)

    sp = sub.add_parser("xi2", help="minimise Xi_2 at a disk point")
    sp.add_argument("f"); sp.add_argument("g")
    sp.add_argument("--z", type=float, nargs=2, metavar=("RE", "IM"), required=True)
    sp.add_argument("--f-column", type=int, default=0)
    sp.add_argument("--g-column", type=int, default=0)
    sp.add_argument("--method", choices=["socp", "subgradient"], default="socp")
    sp.add_argument("--permutations", default=None,
                    help="'all' (n <= 8) or a number of random permutations to try")
    sp.add_argument("--seed", type=int, default=None)
    out_opt(sp)
    sp.set_defaults(func=cmd_xi2)

    sp = sub.add_parser("trace-identity", help="two-route trace agreement on a grid")
    sp.add_argument("F"); sp.add_argument("G")
    sp.add_argument("--radii", type=_radii, default=[0.3, 0.6, 0.9])
    sp.add_argument("--angles", type=int, default=4)
    sp.add_argument("--tol", type=float, default=1e-9)
    out_opt(sp)
    sp.set_defaults(func=cmd_trace_identity)

    sp = sub.add_parser("generate", help="write a symbol file")
    sp.add_argument("--kind", choices=["squarewave", "random", "analytic"], required=True)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--shift", type=float, default=0.0, help="square-wave jump position")
    out_opt(sp)
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DimensionMismatch as exc:
        print(f"btl: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except SymbolFormatError as exc:
        print(f"btl: bad input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (BlockToeplitzError, ArithmeticError) as exc:
        print(f"btl: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"btl: invalid argument: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    raise SystemExit(main())
