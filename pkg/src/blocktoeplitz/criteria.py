"""Poisson-extension criteria for Hankel products, commutators and normality.

For a disk point ``z`` the semi-commutator ``T_FG - T_F T_G = H_{F*}^* H_G`` is
tested through the criterion matrix

    [|(F_+)^* - (F_+)^*(z)|^2(z)]^{1/2} [|G_- - G_-(z)|^2(z)]^{1/2}

whose squared Frobenius norm is the trace of ``T^* T`` for the rank-one defect
operator ``T``.  Commutators reduce to a semi-commutator of ``2n x 2n``
symbols, ``B = [[F, -G], [0, 0]]`` and ``C = [[G, 0], [F, 0]]``, since
``T_B T_C - T_{BC}`` carries ``T_F T_G - T_G T_F`` in its corner block.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InconsistencyError
from .hardy import max_abs, rank_one_defect, semicommutator
from .symbol import (
    MatrixSymbol,
    adjoint,
    as_point,
    block,
    cross_ext,
    ext_factors,
    mod_sq_ext,
    split,
)

__all__ = [
    "EXACT_ZERO",
    "CRITERION_ZERO",
    "psd_sqrt",
    "factor_sqrt",
    "CriterionReport",
    "CommutatorReport",
    "ZeroCheck",
    "ScanTable",
    "criterion",
    "hankel_product_criterion",
    "trace_defect",
    "trace_defect_paths",
    "commutator_criterion",
    "normality_criterion",
    "zero_semicommutator_check",
    "radial_scan",
]

#: Max-abs threshold for structurally zero coefficient arithmetic.
EXACT_ZERO = 1e-12
#: Threshold for a vanishing criterion norm (two roots and a product).
CRITERION_ZERO = 1e-10
#: Relative agreement demanded between the two trace routes.
TRACE_RTOL = 1e-9


def psd_sqrt(M: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix by eigendecomposition.

    Eigenvalues in ``[-1e-12 * max(1, |M|), 0)`` are roundoff and clamped to 0.

    Raises
    ------
    InconsistencyError
        If ``M`` is not Hermitian or has a clearly negative eigenvalue; both
        mean the factor was assembled incorrectly.
    """
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, max_abs(M))
    if max_abs(M - M.conj().T) > 1e-10 * scale:
        raise InconsistencyError("factor is not Hermitian")
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    if w.size and w.min() < -1e-12 * scale:
        raise InconsistencyError(f"factor has negative eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def _complex_nested(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


@dataclass(frozen=True)
class CriterionReport:
    """Criterion data at one disk point.

    Attributes
    ----------
    z : complex
    left_factor, right_factor : ndarray
        Hermitian PSD ``n x n`` factors.
    criterion : ndarray
        ``left_factor^{1/2} @ right_factor^{1/2}``.
    norm : float
        Spectral norm of ``criterion``.
    trace_value : float
        Squared Frobenius norm of ``criterion``, which equals
        ``tr(left_factor @ right_factor)``.
    """

    z: complex
    left_factor: np.ndarray
    right_factor: np.ndarray
    criterion: np.ndarray
    norm: float
    trace_value: float

    def to_json(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "norm": self.norm,
            "trace": self.trace_value,
            "left_factor": _complex_nested(self.left_factor),
            "right_factor": _complex_nested(self.right_factor),
            "criterion": _complex_nested(self.criterion),
        }


def factor_sqrt(phi: np.ndarray) -> np.ndarray:
    """``(phi phi^*)^{1/2}`` from the thin SVD of the factor ``phi``.

    Singular values of ``phi`` are accurate to roundoff, so directions where
    ``phi phi^*`` vanishes stay at roundoff level in the root instead of the
    square root of roundoff.
    """
    if phi.size == 0:
        return np.zeros((phi.shape[0], phi.shape[0]), dtype=complex)
    u, s, _ = np.linalg.svd(phi, full_matrices=False)
    return (u * s) @ u.conj().T


def _report(z, left, right, phi_l, phi_r) -> CriterionReport:
    # the factors must reproduce the closed-form PSD matrices
    for M, phi in ((left, phi_l), (right, phi_r)):
        scale = max(1.0, max_abs(M))
        if max_abs(phi @ phi.conj().T - M) > 1e-9 * scale:
            raise InconsistencyError("PSD factor does not reproduce its matrix")
        psd_sqrt(M)  # Hermitian / PSD sanity check
    crit = factor_sqrt(phi_l) @ factor_sqrt(phi_r)
    norm = float(np.linalg.norm(crit, 2)) if crit.size else 0.0
    trace = float(np.sum(np.abs(crit) ** 2))
    return CriterionReport(z, left, right, crit, norm, trace)


def _check_pair(F: MatrixSymbol, G: MatrixSymbol):
    if F.n != G.n:
        raise DimensionMismatch(f"block sizes differ: {F.n} vs {G.n}")


def criterion(F: MatrixSymbol, G: MatrixSymbol, z) -> CriterionReport:
    """Criterion for the semi-commutator ``T_FG - T_F T_G`` at ``z``.

    The left factor is ``|(F_+)^* - (F_+)^*(z)|^2(z)`` and the right factor
    ``|G_- - G_-(z)|^2(z)``.
    """
    _check_pair(F, G)
    z = as_point(z)
    return _single(adjoint(split(F).plus), split(G).minus, z)


def _single(Ml: MatrixSymbol, Mr: MatrixSymbol, z) -> CriterionReport:
    (phi_l,), (phi_r,) = ext_factors([Ml], z), ext_factors([Mr], z)
    return _report(z, mod_sq_ext(Ml, z), mod_sq_ext(Mr, z), phi_l, phi_r)


def hankel_product_criterion(F: MatrixSymbol, G: MatrixSymbol, z) -> CriterionReport:
    """Criterion for the Hankel product ``H_F^* H_G`` at ``z``.

    Factors are ``|F_- - F_-(z)|^2(z)`` and ``|G_- - G_-(z)|^2(z)``; this is the
    other orientation, ``criterion(F, G, z)`` equals
    ``hankel_product_criterion(F*, G, z)``.
    """
    _check_pair(F, G)
    z = as_point(z)
    return _single(split(F).minus, split(G).minus, z)


def _trace_scale(F: MatrixSymbol, G: MatrixSymbol) -> float:
    sf = sum(float(np.abs(a).sum()) for a in F.coeffs.values())
    sg = sum(float(np.abs(a).sum()) for a in G.coeffs.values())
    return (sf * sg) ** 2


def trace_defect_paths(F: MatrixSymbol, G: MatrixSymbol, z) -> tuple[float, float]:
    """Both evaluations of ``trace(T^* T)`` for the semi-commutator defect.

    Returns
    -------
    poisson : float
        ``tr[|(F*)_- - (F*)_-(z)|^2(z) |G_- - G_-(z)|^2(z)]``.
    gram : float
        Hilbert-Schmidt norm squared of the rank-one block operator
        ``(sum_j H_{(F*)_ji} k_z ⊗ H_{g_jk} k_z)_{ik}`` from Gram matrices.
    """
    _check_pair(F, G)
    z = as_point(z)
    Fs = adjoint(F)
    poisson = float(np.trace(mod_sq_ext(split(Fs).minus, z) @ mod_sq_ext(split(G).minus, z)).real)
    gram = rank_one_defect(Fs, G, z).hs_norm_sq()
    return poisson, gram


def trace_defect(F: MatrixSymbol, G: MatrixSymbol, z) -> float:
    """``trace(T^* T)`` of the rank-one defect of ``H_{F*}^* H_G`` at ``z``.

    Computed through Poisson extensions and checked against the independent
    Gram-matrix route.

    Raises
    ------
    InconsistencyError
        If the routes differ by more than ``1e-9`` relative.
    """
    poisson, gram = trace_defect_paths(F, G, z)
    atol = 1e-15 * _trace_scale(F, G)
    if abs(poisson - gram) > TRACE_RTOL * max(abs(poisson), abs(gram)) + atol:
        raise InconsistencyError(
            f"trace routes disagree: poisson={poisson!r}, gram={gram!r}")
    return max(poisson, 0.0)


@dataclass(frozen=True)
class CommutatorReport:
    """Criterion of the ``2n x 2n`` reduction plus the symbol residual.

    ``residual`` is the max-abs coefficient of ``FG - GF``; ``report`` is the
    criterion of ``(B, C)``.
    """

    report: CriterionReport
    residual: float

    @property
    def norm(self) -> float:
        return self.report.norm

    def to_json(self) -> dict:
        out = self.report.to_json()
        out["residual"] = self.residual
        return out


def _commutator_factors(Xp, Yp, Gm, Fm, z):
    """Block factors for ``B = [[F, -G], [0, 0]]``, ``C = [[G, 0], [F, 0]]``.

    ``Xp``, ``Yp`` stand for ``(F_+)^*`` and ``(G_+)^*``; ``Gm``, ``Fm`` for
    ``G_-`` and ``F_-``.  Only the centred symbols matter, so any symbols
    differing from these by constants give the same factors.
    """
    left = np.block([
        [cross_ext(Xp, Xp, z), -cross_ext(Xp, Yp, z)],
        [-cross_ext(Yp, Xp, z), cross_ext(Yp, Yp, z)],
    ])
    right = np.block([
        [cross_ext(Gm, Gm, z), cross_ext(Gm, Fm, z)],
        [cross_ext(Fm, Gm, z), cross_ext(Fm, Fm, z)],
    ])
    # stacked factors give the same blocks: [[phi_X], [-phi_Y]] and [[phi_G], [phi_F]]
    px, py = ext_factors([Xp, Yp], z)
    pg, pf = ext_factors([Gm, Fm], z)
    phi_l = np.vstack([px, -py])
    phi_r = np.vstack([pg, pf])
    return (0.5 * (left + left.conj().T), 0.5 * (right + right.conj().T), phi_l, phi_r)


def _stacked(F: MatrixSymbol, G: MatrixSymbol):
    B = block([[F, -G], [None, None]])
    C = block([[G, None], [F, None]])
    return B, C


def _verify_assembly(left, right, F, G, z):
    B, C = _stacked(F, G)
    dl = mod_sq_ext(adjoint(split(B).plus), z)
    dr = mod_sq_ext(split(C).minus, z)
    scale = max(1.0, max_abs(dl), max_abs(dr))
    err = max(max_abs(left - dl), max_abs(right - dr))
    if err > EXACT_ZERO * scale:
        raise InconsistencyError(f"block assembly differs from stacked symbols by {err:.3e}")


def commutator_criterion(F: MatrixSymbol, G: MatrixSymbol, z) -> CommutatorReport:
    """Criterion for ``T_F T_G - T_G T_F`` via the ``(B, C)`` reduction.

    The factors are assembled blockwise from :func:`cross_ext` and checked
    against :func:`mod_sq_ext` applied to the stacked ``B`` and ``C``.
    """
    _check_pair(F, G)
    z = as_point(z)
    fs, gs = split(F), split(G)
    left, right, phi_l, phi_r = _commutator_factors(
        adjoint(fs.plus), adjoint(gs.plus), gs.minus, fs.minus, z)
    _verify_assembly(left, right, F, G, z)
    residual = (F @ G - G @ F).max_abs()
    return CommutatorReport(_report(z, left, right, phi_l, phi_r), residual)


def normality_criterion(F: MatrixSymbol, z) -> CommutatorReport:
    """Commutator criterion for ``T_F`` and ``T_{F*}``.

    With ``G = F*`` the centred parts simplify to ``(G_+)^* ~ F_-`` and
    ``G_- ~ (F_+)^*``, so only ``F_-`` and ``(F_+)^*`` enter.
    ``residual`` is the max-abs coefficient of ``FF^* - F^*F``.
    """
    z = as_point(z)
    fs = split(F)
    Xp, Fm = adjoint(fs.plus), fs.minus
    left, right, phi_l, phi_r = _commutator_factors(Xp, Fm, Xp, Fm, z)
    _verify_assembly(left, right, F, adjoint(F), z)
    Fa = adjoint(F)
    residual = (F @ Fa - Fa @ F).max_abs()
    return CommutatorReport(_report(z, left, right, phi_l, phi_r), residual)


@dataclass(frozen=True)
class ZeroCheck:
    """Verdict on ``T_FG = T_F T_G`` from the exact and criterion routes.

    Attributes
    ----------
    zero : bool
        Exact route: max-abs of the semi-commutator matrix is negligible.
    semicommutator_max : float
    criterion_norm : float
        Criterion norm at ``z = 0``.
    consistent : bool
        Whether the two routes agree at their thresholds.  Disagreement is
        only tolerated when both quantities sit below ``1e-8 * scale``.
    report : CriterionReport
    """

    zero: bool
    semicommutator_max: float
    criterion_norm: float
    consistent: bool
    report: CriterionReport = field(repr=False)

    def to_json(self) -> dict:
        return {
            "zero": self.zero,
            "semicommutator_max": self.semicommutator_max,
            "criterion_norm": self.criterion_norm,
            "consistent": self.consistent,
        }


def zero_semicommutator_check(F: MatrixSymbol, G: MatrixSymbol) -> ZeroCheck:
    """Decide whether ``T_FG - T_F T_G`` vanishes.

    The verdict is the exact route (finite Hankel product).  The criterion
    norm at ``z = 0`` must agree; thresholds scale with
    ``max(1, |F|_max |G|_max)``.

    Raises
    ------
    InconsistencyError
        If the routes contradict each other outside the grey band.
    """
    _check_pair(F, G)
    scale = max(1.0, F.max_abs() * G.max_abs())
    smax = max_abs(semicommutator(F, G))
    rep = criterion(F, G, 0.0)
    zero = smax <= EXACT_ZERO * scale
    crit_zero = rep.norm <= CRITERION_ZERO * scale
    consistent = zero == crit_zero
    if not consistent and max(smax, rep.norm) > 1e-8 * scale:
        raise InconsistencyError(
            f"exact route gives max-abs {smax:.3e} but criterion norm is {rep.norm:.3e}")
    return ZeroCheck(zero, smax, rep.norm, consistent, rep)


@dataclass(frozen=True)
class ScanTable:
    """Rows ``(r, theta, norm, trace)`` ordered by ``(r, theta)``."""

    rows: tuple

    def to_csv(self) -> str:
        lines = ["r,theta,norm,trace"]
        lines += [",".join(f"{v:.17g}" for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def column(self, name: str) -> np.ndarray:
        idx = ("r", "theta", "norm", "trace").index(name)
        return np.array([row[idx] for row in self.rows], dtype=float)


_MODES = ("semicommutator", "commutator", "normality")


def _scan_point(F, G, r, theta, mode):
    z = r * complex(np.cos(theta), np.sin(theta))
    if mode == "semicommutator":
        rep = criterion(F, G, z)
    elif mode == "commutator":
        rep = commutator_criterion(F, G, z).report
    else:
        rep = normality_criterion(F, z).report
    return (float(r), float(theta), rep.norm, rep.trace_value)


def radial_scan(F: MatrixSymbol, G: MatrixSymbol | None, radii, angles,
                mode: str = "semicommutator", threads: int | None = None) -> ScanTable:
    """Criterion norms and traces on a polar grid.

    Parameters
    ----------
    F, G : MatrixSymbol
        ``G`` is ignored (and may be ``None``) in ``"normality"`` mode.
    radii, angles : sequence of float
        Grid; every radius must lie in ``[0, 1)``.
    mode : {"semicommutator", "commutator", "normality"}
    threads : int, optional
        Worker count; defaults to the CPU count.  Rows are independent and
        the output order is by ``(r, theta)`` whatever the scheduling.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown scan mode {mode!r}; expected one of {_MODES}")
    radii = [float(r) for r in radii]
    angles = [float(t) for t in angles]
    if any(not (0.0 <= r < 1.0) for r in radii):
        raise ValueError("scan radii must lie in [0, 1)")
    if mode != "normality":
        if G is None:
            raise ValueError(f"mode {mode!r} needs two symbols")
        _check_pair(F, G)
    grid = sorted((r, t) for r in radii for t in angles)
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(grid) <= 1:
        rows = [_scan_point(F, G, r, t, mode) for r, t in grid]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda p: _scan_point(F, G, p[0], p[1], mode), grid))
    return ScanTable(tuple(rows))
