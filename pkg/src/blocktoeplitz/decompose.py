"""Certificates for vanishing sums of rank-one operators and Hankel products.

A certificate for vectors ``f_1, ..., f_m`` and ``g`` in ``H^n`` is a pair
``(A, R)`` with ``A`` in the entrywise unit ball and ``R`` a permutation
matrix such that

    (R - A) f_k = 0  for every k,        A^* R g = 0.

With ``F_k``, ``G`` the ``n x dim H`` matrices whose rows are the vectors,
``sum_i f_ki ⊗ g_i = F_k^T conj(G) = F_k^T R^T conj(R G)``, and the first
condition turns this into ``F_k^T A^T conj(R G) = F_k^T conj(A^* R G) = 0``.
So a certificate witnesses the vanishing sum.  At ``R = I`` the conditions
read ``(I - A) f_k = 0`` and ``A^* g = 0``.

The same pair lifted to symbols certifies that ``sum_i H_{f_ki}^* H_{g_i}``
vanishes, and the ``Xi_2`` functional measures how far a disk point is from
admitting such a pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotZeroInstance, PremiseViolation
from .hardy import hankel_matrix, max_abs
from .symbol import MatrixSymbol, adjoint, as_point, mod_sq_ext, split

__all__ = [
    "Certificate",
    "Theorem5Result",
    "SubproblemResult",
    "XiResult",
    "prop4_solve",
    "theorem5_check",
    "semicommutator_certificates",
    "convex_subproblem",
    "xi_objective",
    "xi2",
]

#: Relative tolerance on the vanishing of ``sum_i f_ki ⊗ g_i``.
PREMISE_RTOL = 1e-9
#: Relative tolerance on certificate residuals.
RESIDUAL_RTOL = 1e-9
#: Allowed excess of ``|A_ij|`` over 1.
UNIT_BALL_SLACK = 1e-12
MAX_EXHAUSTIVE_N = 8


def _perm_matrix(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=int)
    R = np.zeros((perm.size, perm.size))
    R[np.arange(perm.size), perm] = 1.0
    return R


def _residuals(A, R, f, g):
    """``(|(R - A) f_k|_F for k, |A^* R g|_F)`` for stacked vectors."""
    D = R - A
    rf = tuple(float(np.linalg.norm(D @ fk)) for fk in f)
    rg = float(np.linalg.norm(A.conj().T @ (R @ g)))
    return rf, rg


@dataclass(frozen=True)
class Certificate:
    """A pair ``(A, R)`` with residual norms.

    Attributes
    ----------
    A : ndarray, shape (n, n)
        Complex matrix, every entry of modulus at most one.
    perm : ndarray of int
        ``R[i, perm[i]] = 1``.
    residual_f : tuple of float
        ``|(R - A) f_k|`` for each ``k``.
    residual_g : float
        ``|A^* R g|``.
    method : str
        Which construction produced the pair.
    """

    A: np.ndarray
    perm: np.ndarray
    residual_f: tuple
    residual_g: float
    method: str = "pivot"

    @property
    def R(self) -> np.ndarray:
        return _perm_matrix(self.perm)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def in_unit_ball(self, slack: float = UNIT_BALL_SLACK) -> bool:
        return bool(np.abs(self.A).max(initial=0.0) <= 1.0 + slack)

    def recompute(self, f, g) -> tuple[tuple, float]:
        """Residuals of this pair on vectors ``f`` (m, n, d) and ``g`` (n, d)."""
        f, g = _as_vectors(f, g)
        return _residuals(self.A, self.R, f, g)

    def verify(self, f, g, tol: float | None = None) -> bool:
        """Unit-ball membership and residuals within ``tol``.

        The default tolerance is ``1e-9`` times the larger input norm.
        """
        f, g = _as_vectors(f, g)
        if tol is None:
            tol = RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(f)), float(np.linalg.norm(g)))
        rf, rg = _residuals(self.A, self.R, f, g)
        return self.in_unit_ball() and max(rf, default=0.0) <= tol and rg <= tol

    def to_json(self) -> dict:
        return {
            "A": [[[float(x.real), float(x.imag)] for x in row] for row in self.A],
            "R": [int(p) for p in self.perm],
            "residual_f": [float(r) for r in self.residual_f],
            "residual_g": float(self.residual_g),
            "method": self.method,
        }


def _as_vectors(f, g):
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if g.ndim == 1:
        g = g[:, None]
    if f.ndim == 2:
        f = f[None]
    if f.ndim != 3 or g.ndim != 2:
        raise DimensionMismatch("expected f of shape (m, n, d) and g of shape (n, d)")
    if f.shape[1] != g.shape[0] or f.shape[2] != g.shape[1]:
        raise DimensionMismatch(f"f has shape {f.shape}, g has shape {g.shape}")
    return f, g


def _pivot_assembly(f: np.ndarray, g: np.ndarray, gtol: float):
    """Inductive construction on the largest ``g_j``.

    With ``j`` maximising ``|g_j|`` and ``a_i = <g_i, g_j> / <g_j, g_j>``, the
    vanishing sum splits as ``(f_j + sum_i conj(a_i) f_i) ⊗ g_j`` plus a sum
    over ``i != j`` with ``g_i' = g_i - a_i g_j``, which is orthogonal to
    ``g_j``.  Both parts vanish, so the problem recurses on ``n - 1`` indices
    and the first row of ``A_0`` expresses ``f_j`` through the others.

    Returns ``(A0, sigma)`` with ``(I - A0) f[:, sigma] = 0`` and
    ``A0^* g[sigma] = 0``.
    """
    n = g.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex), []
    norms = np.linalg.norm(g, axis=1)
    if norms.max() <= gtol:
        return np.eye(n, dtype=complex), list(range(n))
    j = int(np.argmax(norms))  # first maximiser
    alpha = (g @ g[j].conj()) / norms[j] ** 2
    rest = [i for i in range(n) if i != j]
    g_rest = g[rest] - np.outer(alpha[rest], g[j])
    A1, omega = _pivot_assembly(f[:, rest], g_rest, gtol)
    order = [rest[o] for o in omega]
    A0 = np.zeros((n, n), dtype=complex)
    A0[0, 1:] = -(alpha[order].conj() @ A1)
    A0[1:, 1:] = A1
    return A0, [j] + order


def _range_projector(M: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the column space of ``M``."""
    n = M.shape[0]
    if M.size == 0:
        return np.zeros((n, n), dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((n, n), dtype=complex)
    r = int((s > s[0] * max(M.shape) * np.finfo(float).eps).sum())
    u = u[:, :r]
    return u @ u.conj().T


def prop4_solve(f, g) -> Certificate:
    """Certificate ``(A, R)`` for a vanishing family of rank-one sums.

    Parameters
    ----------
    f : array_like, shape (m, n, d)
        ``f[k, i]`` is the element ``f_ki`` of ``C^d``.
    g : array_like, shape (n, d)

    The inductive pivot construction is tried first.  Its first row can leave
    the unit ball when the pivot coefficients combine badly; in that case (or
    if its residuals are off) the orthogonal projector onto the span of the
    ``f`` data is used instead, with ``R = I``.  That projector fixes every
    ``f_k``, kills ``g`` because the premise makes the two spans orthogonal,
    and has entries bounded by one.

    Raises
    ------
    PremiseViolation
        If some ``sum_i f_ki ⊗ g_i`` is not negligible; ``index`` is that
        ``k`` and ``norm`` its Frobenius norm.
    """
    f, g = _as_vectors(f, g)
    m, n, d = f.shape
    gnorm = float(np.linalg.norm(g))
    for k in range(m):
        S = f[k].T @ g.conj()  # sum_i f_ki g_i^H
        s = float(np.linalg.norm(S))
        if s > PREMISE_RTOL * float(np.linalg.norm(f[k])) * gnorm:
            raise PremiseViolation(f"rank-one sum {k} does not vanish (norm {s:.3e})", k, s)

    scale = max(1.0, float(np.linalg.norm(f)), gnorm)
    tol = RESIDUAL_RTOL * scale
    gtol = 1e-12 * gnorm

    A0, sigma = _pivot_assembly(f, g, gtol)
    perm = np.asarray(sigma, dtype=int)
    A = A0 @ _perm_matrix(perm)
    rf, rg = _residuals(A, _perm_matrix(perm), f, g)
    cert = Certificate(A, perm, rf, rg, "pivot")
    if cert.in_unit_ball() and max(rf, default=0.0) <= tol and rg <= tol:
        return cert

    eye = np.arange(n)
    candidates = []
    for method, P in (
        ("projection", _range_projector(f.transpose(1, 0, 2).reshape(n, m * d))),
        ("co-projection", np.eye(n) - _range_projector(g)),
    ):
        rf, rg = _residuals(P, np.eye(n), f, g)
        candidates.append((max(max(rf, default=0.0), rg), Certificate(P, eye, rf, rg, method)))
    candidates.append((max(max(cert.residual_f, default=0.0), cert.residual_g)
                       if cert.in_unit_ball() else np.inf, cert))
    return min(candidates, key=lambda c: c[0])[1]


# -- symbol level ---------------------------------------------------------------


def _check_vector(v, name):
    v = list(v)
    if not v:
        raise DimensionMismatch(f"{name} is empty")
    for s in v:
        if not isinstance(s, MatrixSymbol) or s.n != 1:
            raise DimensionMismatch(f"{name} must contain scalar symbols")
    return v


def _combine(M: np.ndarray, v: Sequence[MatrixSymbol]) -> list:
    """Symbol vector ``M v``."""
    out = []
    for row in M:
        acc = MatrixSymbol(1)
        for c, s in zip(row, v):
            if c != 0:
                acc = acc + complex(c) * s
        out.append(acc)
    return out


def _minus_vector(v, D):
    """Coefficients of ``v_i`` at ``conj(w)**(j+1)``, ``j < D``: ``H_{v_i} 1``."""
    return np.array([s.stack(-D, -1)[::-1, 0, 0] for s in v])


@dataclass(frozen=True)
class Theorem5Result:
    """Certificate for ``sum_i H_{f_ki}^* H_{g_i} = 0`` and its symbol-level check.

    ``verified`` is true when the certificate is in the unit ball and every
    negative-frequency coefficient of ``(R - A) f_k`` and ``A^* R g`` is at most
    ``1e-12`` times the input scale; ``membership_max`` is the largest one.
    """

    cert: Certificate
    verified: bool
    hankel_max: float
    membership_max: float

    def to_json(self) -> dict:
        return {
            "certificate": self.cert.to_json(),
            "verified": self.verified,
            "hankel_max": self.hankel_max,
            "membership_max": self.membership_max,
        }


def theorem5_check(f_list, g) -> Theorem5Result:
    """Certificate for a vanishing finite sum of Hankel products.

    Parameters
    ----------
    f_list : sequence of sequences of MatrixSymbol
        ``m`` vectors of ``n`` scalar symbols.
    g : sequence of MatrixSymbol
        ``n`` scalar symbols.

    The sums ``sum_i H_{f_ki}^* H_{g_i}`` are formed exactly.  When they vanish
    the vectors ``H_{f_ki} 1`` and ``H_{g_i} 1`` (the anti-analytic
    coefficients) feed :func:`prop4_solve`, and the resulting pair is checked
    at symbol level: ``(R - A) f_k`` and ``A^* R g`` must be analytic.

    Raises
    ------
    NotZeroInstance
        If some Hankel sum is not negligible.
    """
    g = _check_vector(g, "g")
    f_list = [_check_vector(f, "f") for f in f_list]
    n = len(g)
    if any(len(f) != n for f in f_list):
        raise DimensionMismatch("every f_k must have as many entries as g")
    D = max([s.deg_minus for s in g] + [s.deg_minus for f in f_list for s in f] + [1])
    scale = max([1.0] + [s.max_abs() for s in g] + [s.max_abs() for f in f_list for s in f])

    hg = [hankel_matrix(s).padded(D) for s in g]
    hankel_max = 0.0
    for k, f in enumerate(f_list):
        total = sum(hankel_matrix(a).padded(D).conj().T @ b for a, b in zip(f, hg))
        norm = max_abs(total)
        hankel_max = max(hankel_max, norm)
        if norm > 1e-12 * scale ** 2:
            raise NotZeroInstance(f"Hankel sum {k} does not vanish (max-abs {norm:.3e})", k, norm)

    fv = np.array([_minus_vector(f, D) for f in f_list]).reshape(len(f_list), n, D)
    gv = _minus_vector(g, D)
    cert = prop4_solve(fv, gv)

    R, A = cert.R, cert.A
    member = 0.0
    for f in f_list:
        member = max(member, *(split(x).minus.max_abs() for x in _combine(R - A, f)))
    member = max(member, *(split(y).minus.max_abs() for y in _combine(A.conj().T @ R, g)))
    verified = cert.in_unit_ball() and member <= 1e-12 * scale
    return Theorem5Result(cert, verified, hankel_max, member)


def semicommutator_certificates(F: MatrixSymbol, G: MatrixSymbol) -> list:
    """One :func:`theorem5_check` result per column ``j`` of ``G``.

    Column ``j`` of ``H_{F*}^* H_G`` is ``sum_i H_{(F*)_ia}^* H_{G_ij}`` over
    the columns ``a`` of ``F*``, so ``f_a`` is column ``a`` of ``F*`` and ``g``
    is column ``j`` of ``G``.
    """
    if F.n != G.n:
        raise DimensionMismatch(f"block sizes differ: {F.n} vs {G.n}")
    n = F.n
    Fs = adjoint(F)
    f_list = [[Fs.entry(i, a) for i in range(n)] for a in range(n)]
    return [theorem5_check(f_list, [G.entry(i, j) for i in range(n)]) for j in range(n)]


# -- Xi_2 ---------------------------------------------------------------------------


def _gram_factor(v: Sequence[MatrixSymbol], z: complex) -> tuple[np.ndarray, np.ndarray]:
    """Gram matrix ``[<H_{v_a} k_z, H_{v_b} k_z>]`` and a square-root factor.

    The Gram matrix is ``|V_- - V_-(z)|^2(z)`` for the symbol ``V`` whose first
    column is ``v``; ``V_f`` satisfies ``V_f V_f^* = Gram``.
    """
    n = len(v)
    entries = [[s if c == 0 else None for c in range(n)] for s in (split(x).minus for x in v)]
    gram = mod_sq_ext(MatrixSymbol.from_entries(entries), z)
    w, U = np.linalg.eigh(gram)
    if w.size and w.min() < -1e-12 * max(1.0, max_abs(gram)):
        raise ArithmeticError(f"Gram matrix has negative eigenvalue {w.min():.3e}")
    return gram, U * np.sqrt(np.clip(w, 0.0, None))


def xi_objective(A: np.ndarray, R: np.ndarray, Vf: np.ndarray, Vg: np.ndarray) -> float:
    """``sum_i |((R - A) V_f)_i| + sum_i |(A^* R V_g)_i|`` over rows ``i``."""
    x = np.linalg.norm((R - A) @ Vf, axis=1).sum()
    y = np.linalg.norm(A.conj().T @ R @ Vg, axis=1).sum()
    return float(x + y)


@dataclass(frozen=True)
class SubproblemResult:
    """Minimiser of the ``Xi_2`` objective for a fixed permutation."""

    A: np.ndarray
    value: float
    iterations: int
    converged: bool
    method: str


def _project_unit_ball(A: np.ndarray) -> np.ndarray:
    mod = np.abs(A)
    return np.where(mod > 1.0, A / np.maximum(mod, 1e-300), A)


def _subgradient(R, Vf, Vg, A0, iterations):
    A = A0.copy()
    best, bestA = xi_objective(A, R, Vf, Vg), A.copy()
    for t in range(1, iterations + 1):
        X = (R - A) @ Vf
        nx = np.linalg.norm(X, axis=1)
        gx = -np.divide(X, nx[:, None], out=np.zeros_like(X), where=nx[:, None] > 0) @ Vf.conj().T
        Y = Vg.conj().T @ (R.T @ A)  # column c of Y is (A^* R V_g)_c^*
        ny = np.linalg.norm(Y, axis=0)
        gy = (R @ Vg) @ np.divide(Y, ny[None, :], out=np.zeros_like(Y), where=ny[None, :] > 0)
        A = _project_unit_ball(A - (gx + gy) / np.sqrt(t))
        val = xi_objective(A, R, Vf, Vg)
        if val < best:
            best, bestA = val, A.copy()
    return bestA, best


def _socp(R, Vf, Vg):
    import cvxpy as cp

    n = R.shape[0]
    A = cp.Variable((n, n), complex=True)
    obj = cp.sum(cp.norm((R - A) @ Vf, 2, axis=1)) + cp.sum(cp.norm(A.H @ (R @ Vg), 2, axis=1))
    prob = cp.Problem(cp.Minimize(obj), [cp.abs(A) <= 1])
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        prob.solve(solver=cp.SCS, eps=1e-10, max_iters=100000)
    its = int(getattr(prob.solver_stats, "num_iters", 0) or 0)
    ok = prob.status == cp.OPTIMAL and A.value is not None
    if A.value is None:
        return None, its, False
    return _project_unit_ball(np.asarray(A.value, dtype=complex)), its, ok


def convex_subproblem(R, Vf, Vg, method: str = "socp", warm_start=None,
                      iterations: int = 500) -> SubproblemResult:
    """Minimise the ``Xi_2`` objective over the entrywise unit ball, ``R`` fixed.

    Parameters
    ----------
    R : ndarray
        Permutation matrix.
    Vf, Vg : ndarray
        Factors of the Gram matrices of the ``f`` and ``g`` data.
    method : {"socp", "subgradient"}
        ``"socp"`` solves the second-order cone program with an interior
        point method; ``"subgradient"`` runs projected subgradient descent
        with step ``1 / sqrt(t)`` and entrywise modulus clamping.
    warm_start : ndarray, optional
        Extra candidate (and subgradient start).

    ``A = 0`` and ``A = R`` are always evaluated, so the value never exceeds
    the two trivial bounds.
    """
    R = np.asarray(R, dtype=complex)
    n = R.shape[0]
    cands = [np.zeros((n, n), dtype=complex), R.copy()]
    if warm_start is not None:
        cands.append(_project_unit_ball(np.asarray(warm_start, dtype=complex)))
    if method == "socp":
        A, its, ok = _socp(R, Vf, Vg)
        if A is not None:
            cands.append(A)
    elif method == "subgradient":
        start = min(cands, key=lambda a: xi_objective(a, R, Vf, Vg))
        A, _ = _subgradient(R, Vf, Vg, start, iterations)
        cands.append(A)
        its, ok = iterations, False
    else:
        raise ValueError(f"unknown method {method!r}")
    vals = [xi_objective(a, R, Vf, Vg) for a in cands]
    i = int(np.argmin(vals))
    if method == "subgradient":
        ok = vals[i] <= 1e-12
    elif vals[i] <= 1e-12:
        ok = True
    return SubproblemResult(cands[i], vals[i], its, ok, method)


@dataclass(frozen=True)
class XiResult:
    """Value of ``Xi_2(z)`` with its minimising pair.

    ``cert.residual_f`` holds ``sum_i |H_{x_i} k_z|`` for ``x = (R - A) f`` and
    ``cert.residual_g`` holds ``sum_i |H_{y_i} k_z|`` for ``y = A^* R g``.
    ``bound_f`` and ``bound_g`` are the objective at ``A = 0`` and ``A = R``.
    """

    z: complex
    value: float
    cert: Certificate
    iterations: int
    converged: bool
    bound_f: float = field(default=0.0)
    bound_g: float = field(default=0.0)

    def to_json(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "value": self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "bound_f": self.bound_f,
            "bound_g": self.bound_g,
            "certificate": self.cert.to_json(),
        }


def _permutation_list(n, permutations, rng):
    if permutations is None:
        return [tuple(range(n))]
    if isinstance(permutations, str):
        if permutations != "all":
            raise ValueError(f"unknown permutation mode {permutations!r}")
        if n > MAX_EXHAUSTIVE_N:
            raise ValueError(
                f"exhaustive search over {n}! permutations refused for n > {MAX_EXHAUSTIVE_N}; "
                "pass a sample count instead")
        return list(itertools.permutations(range(n)))
    if isinstance(permutations, (int, np.integer)):
        rng = np.random.default_rng(rng)
        out = [tuple(range(n))]
        out += [tuple(int(i) for i in rng.permutation(n)) for _ in range(int(permutations))]
        return out
    out = [tuple(int(i) for i in p) for p in permutations]
    for p in out:
        if sorted(p) != list(range(n)):
            raise ValueError(f"{p} is not a permutation of range({n})")
    return out


def xi2(f, g, z, method: str = "socp", warm_start: Certificate | None = None,
        permutations=None, seed=None, iterations: int = 500) -> XiResult:
    """``Xi_2(z)``: the smallest total Hankel-on-kernel norm over pairs ``(A, R)``.

    Minimises ``sum_i |H_{x_i} k_z| + sum_i |H_{y_i} k_z|`` with
    ``x = (R - A) f`` and ``y = A^* R g``.  Each norm is the root of a
    quadratic form in a row of ``R - A`` (or ``A^* R``) with the Gram matrix
    of the functions ``H_{f_i} k_z``, which is available in closed form.

    Parameters
    ----------
    f, g : sequence of MatrixSymbol
        Vectors of ``n`` scalar symbols.
    z : complex or DiskPoint
    method : {"socp", "subgradient"}
        Inner solver, see :func:`convex_subproblem`.
    warm_start : Certificate, optional
        Evaluated as an extra candidate.
    permutations : None, "all", int or sequence, optional
        Replacing ``A`` by ``R A`` maps the problem at ``R`` onto the problem
        at ``R = I`` (rows are only reordered and ``A^* R = (R^T A)^*``), so by
        default only ``R = I`` is solved.  ``"all"`` enumerates every
        permutation (``n <= 8``), an integer samples that many, and a
        sequence lists them explicitly; useful for checking the invariance.
    """
    f = _check_vector(f, "f")
    g = _check_vector(g, "g")
    if len(f) != len(g):
        raise DimensionMismatch(f"f has {len(f)} entries, g has {len(g)}")
    z = as_point(z)
    n = len(f)
    _, Vf = _gram_factor(f, z)
    _, Vg = _gram_factor(g, z)
    eye = np.eye(n)
    bound_f = xi_objective(np.zeros((n, n)), eye, Vf, Vg)
    bound_g = xi_objective(eye, eye, Vf, Vg)

    best = None
    total_its = 0
    all_ok = True
    for perm in _permutation_list(n, permutations, seed):
        R = _perm_matrix(perm)
        ws = None
        if warm_start is not None:
            # the warm start's own frame is mapped onto this R
            ws = R @ warm_start.R.T @ warm_start.A
        sub = convex_subproblem(R, Vf, Vg, method=method, warm_start=ws, iterations=iterations)
        total_its += sub.iterations
        all_ok &= sub.converged
        if best is None or sub.value < best[0].value:
            best = (sub, np.asarray(perm))
    sub, perm = best
    value = sub.value
    if value > min(bound_f, bound_g) + 1e-12 * max(1.0, bound_f, bound_g):
        raise ArithmeticError("Xi_2 value exceeds a trivial bound")
    R = _perm_matrix(perm)
    rf = float(np.linalg.norm((R - sub.A) @ Vf, axis=1).sum())
    rg = float(np.linalg.norm(sub.A.conj().T @ R @ Vg, axis=1).sum())
    cert = Certificate(sub.A, perm, (rf,), rg, f"xi2-{method}")
    return XiResult(z, value, cert, total_its, sub.converged if permutations is None else all_ok,
                    bound_f, bound_g)
