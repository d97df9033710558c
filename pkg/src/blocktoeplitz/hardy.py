"""Finite models of Hardy-space operators for polynomial symbols.

Conventions
-----------
* ``H^2(C^n)`` has the orthonormal basis ``w**k e_i`` (``k >= 0``); block
  matrices are indexed by ``k`` with ``n x n`` blocks.
* The complement ``L^2 ⊖ H^2`` has basis ``conj(w)**(j+1) e_i`` (``j >= 0``), so
  the Hankel matrix of ``F`` has block ``(j, k)`` equal to ``A_{-(j+k+1)}``.
* For a trigonometric polynomial the Hankel matrix is finite: it vanishes
  outside the leading ``deg_minus x deg_minus`` blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .symbol import MatrixSymbol, adjoint, as_point, poisson_ext, split

__all__ = [
    "ToeplitzSection",
    "FiniteHankel",
    "KernelVec",
    "KernelHankelVec",
    "RankOneSum",
    "RankOneDefect",
    "toeplitz_section",
    "hankel_matrix",
    "semicommutator",
    "kernel_vec",
    "hankel_on_kernel",
    "rank_one_defect",
    "mobius_coeffs",
    "max_abs",
]


def max_abs(a) -> float:
    """Largest entry modulus; ``0.0`` for an empty array."""
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


@dataclass(frozen=True)
class ToeplitzSection:
    """Leading ``N x N`` block section of ``T_F``; block ``(i, j)`` is ``A_{i-j}``."""

    N: int
    n: int
    data: np.ndarray

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.n
        return self.data[i * n:(i + 1) * n, j * n:(j + 1) * n]


@dataclass(frozen=True)
class FiniteHankel:
    """Exact block Hankel matrix of ``H_F``; block ``(j, k)`` is ``A_{-(j+k+1)}``."""

    n: int
    d: int
    data: np.ndarray

    def padded(self, D: int) -> np.ndarray:
        """The same operator compressed to ``D`` blocks on each side (``D >= d``)."""
        if D < self.d:
            raise ValueError(f"cannot truncate a Hankel of order {self.d} to {D}")
        out = np.zeros((D * self.n, D * self.n), dtype=complex)
        m = self.d * self.n
        out[:m, :m] = self.data
        return out


def toeplitz_section(F: MatrixSymbol, N: int) -> ToeplitzSection:
    """The ``(N n) x (N n)`` compression of ``T_F`` to ``span{w**k : k < N}``."""
    if N < 1:
        raise ValueError("section order must be at least 1")
    n = F.n
    stack = F.stack(-(N - 1), N - 1)
    idx = np.subtract.outer(np.arange(N), np.arange(N)) + (N - 1)
    data = stack[idx].transpose(0, 2, 1, 3).reshape(N * n, N * n)
    return ToeplitzSection(N, n, data)


def hankel_matrix(F: MatrixSymbol) -> FiniteHankel:
    """Exact finite matrix of ``H_F h = (I - P)(F h)``.

    Row block ``j`` is the ``conj(w)**(j+1)`` output coefficient, column block
    ``k`` the ``w**k`` input; only ``k < deg_minus`` can be non-zero.  An
    analytic symbol gives an empty (``0 x 0``) matrix.
    """
    n, d = F.n, F.deg_minus
    if d == 0:
        return FiniteHankel(n, 0, np.zeros((0, 0), dtype=complex))
    stack = F.stack(-d, -1)  # stack[m] holds A_{m - d}
    jk = np.add.outer(np.arange(d), np.arange(d))  # j + k
    mask = jk + 1 <= d
    blocks = np.zeros((d, d, n, n), dtype=complex)
    blocks[mask] = stack[d - (jk[mask] + 1)]
    return FiniteHankel(n, d, blocks.transpose(0, 2, 1, 3).reshape(d * n, d * n))


def semicommutator(F: MatrixSymbol, G: MatrixSymbol) -> np.ndarray:
    """Exact matrix of ``T_{FG} - T_F T_G = H_{F*}^* H_G``.

    The operator vanishes outside ``span{w**k : k < D} ⊗ C^n`` with
    ``D = max(deg_minus(F*), deg_minus(G))``; that compression is returned
    (at least one block, so the result is never empty).
    """
    if F.n != G.n:
        raise DimensionMismatch(f"block sizes differ: {F.n} vs {G.n}")
    hf = hankel_matrix(adjoint(F))
    hg = hankel_matrix(G)
    D = max(hf.d, hg.d, 1)
    return hf.padded(D).conj().T @ hg.padded(D)


@dataclass(frozen=True)
class KernelVec:
    """Truncated coefficients of the normalised reproducing kernel ``k_z``."""

    z: complex
    N: int
    coeffs: np.ndarray

    def norm_sq(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)


def kernel_vec(z, N: int) -> KernelVec:
    """First ``N`` Taylor coefficients ``sqrt(1 - |z|^2) conj(z)**k`` of ``k_z``."""
    z = as_point(z)
    if N < 1:
        raise ValueError("kernel length must be at least 1")
    c = np.sqrt(1.0 - abs(z) ** 2) * np.conj(z) ** np.arange(N)
    return KernelVec(z, N, c)


@dataclass(frozen=True)
class KernelHankelVec:
    """The vector ``u * k_z`` in ``L^2 ⊖ H^2``, stored as the scalar symbol ``u``.

    Inner products use the closed form ``<u k_z, v k_z> = (u conj(v))(z)``
    (``|k_z|^2`` is the Poisson kernel), so nothing is truncated.
    """

    symbol: MatrixSymbol
    z: complex

    def inner(self, other: "KernelHankelVec") -> complex:
        if other.z != self.z:
            raise ValueError("vectors are attached to different kernels")
        prod = self.symbol @ other.symbol.adjoint()
        return complex(poisson_ext(prod, self.z)[0, 0])

    def norm_sq(self) -> float:
        return max(self.inner(self).real, 0.0)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def combine(self, c: complex, other: "KernelHankelVec") -> "KernelHankelVec":
        """``self + c * other``."""
        return KernelHankelVec(self.symbol + c * other.symbol, self.z)


def hankel_on_kernel(f: MatrixSymbol, z) -> KernelHankelVec:
    """``H_f k_z = (f_- - f_-(z)) k_z`` for a scalar symbol ``f``."""
    if f.n != 1:
        raise DimensionMismatch("hankel_on_kernel takes a scalar symbol")
    z = as_point(z)
    minus = split(f).minus
    return KernelHankelVec(minus.shift_constant(poisson_ext(minus, z)), z)


@dataclass(frozen=True)
class RankOneSum:
    """``sum_i left[i] ⊗ right[i]`` where ``(x ⊗ y) h = <h, y> x``."""

    left: tuple
    right: tuple

    def __post_init__(self):
        if len(self.left) != len(self.right):
            raise ValueError("left and right families must have equal length")

    def apply(self, h: KernelHankelVec) -> KernelHankelVec:
        out = KernelHankelVec(MatrixSymbol(1), h.z)
        for u, v in zip(self.left, self.right):
            out = out.combine(h.inner(v), u)
        return out

    def left_gram(self) -> np.ndarray:
        """``G[a, b] = <left[a], left[b]>``."""
        return _gram(self.left)

    def right_gram(self) -> np.ndarray:
        return _gram(self.right)

    def hs_norm_sq(self) -> float:
        """Squared Hilbert-Schmidt norm ``sum_{a,b} <x_b, x_a> <y_a, y_b>``."""
        return _hs(self.left_gram(), self.right_gram())


def _gram(vs) -> np.ndarray:
    m = len(vs)
    g = np.zeros((m, m), dtype=complex)
    for a in range(m):
        for b in range(a, m):
            g[a, b] = vs[a].inner(vs[b])
            g[b, a] = np.conj(g[a, b])
    return g


def _hs(left_gram, right_gram) -> float:
    # sum_{a,b} L[b, a] R[a, b] = sum(L.T * R)
    return float(np.sum(left_gram.T * right_gram).real)


@dataclass(frozen=True)
class RankOneDefect:
    """``n x n`` operator matrix whose ``(i, k)`` entry is a :class:`RankOneSum`."""

    n: int
    blocks: tuple

    def block(self, i: int, k: int) -> RankOneSum:
        return self.blocks[i][k]

    def hs_norm_sq(self) -> float:
        """``trace(T^* T)`` assembled from the Gram matrices of the families."""
        lg = [self.blocks[i][0].left_gram() for i in range(self.n)]
        rg = [self.blocks[0][k].right_gram() for k in range(self.n)]
        return sum(_hs(lg[i], rg[k]) for i in range(self.n) for k in range(self.n))


def rank_one_defect(F: MatrixSymbol, G: MatrixSymbol, z) -> RankOneDefect:
    """Rank-one model of ``H_F^* H_G - T_Φz^* H_F^* H_G T_Φz``.

    Block ``(i, k)`` is ``sum_j H_{f_ji} k_z ⊗ H_{g_jk} k_z``.
    """
    if F.n != G.n:
        raise DimensionMismatch(f"block sizes differ: {F.n} vs {G.n}")
    z = as_point(z)
    n = F.n
    hf = [[hankel_on_kernel(F.entry(j, i), z) for i in range(n)] for j in range(n)]
    hg = [[hankel_on_kernel(G.entry(j, k), z) for k in range(n)] for j in range(n)]
    blocks = tuple(
        tuple(
            RankOneSum(tuple(hf[j][i] for j in range(n)), tuple(hg[j][k] for j in range(n)))
            for k in range(n)
        )
        for i in range(n)
    )
    return RankOneDefect(n, blocks)


def mobius_coeffs(z, N: int) -> MatrixSymbol:
    """Taylor polynomial of degree ``N`` of ``phi_z(w) = (z - w) / (1 - conj(z) w)``.

    ``phi_z(w) = z - (1 - |z|^2) sum_{k >= 1} conj(z)**(k-1) w**k``; the sup-norm
    of the discarded tail is at most ``(1 - |z|^2) |z|**N / (1 - |z|)``.
    """
    z = as_point(z)
    if N < 0:
        raise ValueError("truncation order must be non-negative")
    c = {0: z}
    scale = 1.0 - abs(z) ** 2
    for k in range(1, N + 1):
        c[k] = -scale * np.conj(z) ** (k - 1)
    return MatrixSymbol.scalar(c)
