"""Matrix-valued trigonometric polynomials and their harmonic extensions.

A symbol is ``F(w) = sum_k A_k w**k`` on the unit circle, with finitely many
non-zero ``n x n`` complex coefficients.  Coefficients are stored as a dense
stack over the frequency window ``[k_min, k_max]`` so that arithmetic is
vectorised; the public mapping view (:attr:`MatrixSymbol.coeffs`) only lists
the non-zero ones.

Harmonic extensions are closed form::

    F(z) = sum_{k >= 0} A_k z**k + sum_{k < 0} A_k conj(z)**|k|

and the "modulus squared" extensions ``|M - M(z)|^2(z)`` are evaluated through
the moment matrix of the Poisson measure, ``int w**k conj(w)**l dP_z``, so no
quadrature is involved anywhere in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, SymbolFormatError

__all__ = [
    "ZERO_TOL",
    "MatrixSymbol",
    "DiskPoint",
    "SplitSymbol",
    "as_point",
    "evaluate",
    "adjoint",
    "multiply",
    "split",
    "poisson_ext",
    "mod_sq_ext",
    "cross_ext",
    "ext_factors",
    "block",
    "random_symbol",
    "square_wave",
]

#: Coefficient matrices with max-abs entry below this are dropped.
ZERO_TOL = 1e-15


class MatrixSymbol:
    """Matrix-valued Laurent polynomial ``sum_k A_k w**k``.

    Parameters
    ----------
    n : int
        Block size.
    coeffs : mapping of int to array_like, optional
        Frequency ``k`` to ``n x n`` coefficient ``A_k``.  Missing keys mean
        zero.  Coefficients below :data:`ZERO_TOL` (max-abs) are discarded.

    Instances are immutable; all arithmetic returns new symbols.
    """

    __slots__ = ("_n", "_kmin", "_data")

    def __init__(self, n: int, coeffs: Mapping[int, object] | None = None):
        n = int(n)
        if n < 1:
            raise ValueError(f"block size must be positive, got {n}")
        coeffs = dict(coeffs or {})
        if not coeffs:
            self._set(n, 0, np.zeros((0, n, n), dtype=complex))
            return
        ks = [int(k) for k in coeffs]
        kmin, kmax = min(ks), max(ks)
        data = np.zeros((kmax - kmin + 1, n, n), dtype=complex)
        for k, a in coeffs.items():
            a = np.asarray(a, dtype=complex)
            if a.ndim == 0 and n == 1:
                a = a.reshape(1, 1)
            if a.shape != (n, n):
                raise DimensionMismatch(
                    f"coefficient at k={k} has shape {a.shape}, expected {(n, n)}")
            data[int(k) - kmin] += a
        self._set(n, kmin, data)

    @classmethod
    def _from_stack(cls, n, kmin, data):
        obj = cls.__new__(cls)
        obj._set(n, kmin, np.array(data, dtype=complex))
        return obj

    def _set(self, n, kmin, data):
        # canonical form: zero negligible blocks, trim the window
        if data.shape[0]:
            small = np.abs(data).reshape(data.shape[0], -1).max(axis=1) < ZERO_TOL
            data[small] = 0
            keep = np.flatnonzero(~small)
            if keep.size == 0:
                data = data[:0]
                kmin = 0
            else:
                data = data[keep[0]:keep[-1] + 1]
                kmin = kmin + int(keep[0])
        else:
            kmin = 0
        data.setflags(write=False)
        self._n = n
        self._kmin = kmin
        self._data = data

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "MatrixSymbol":
        return cls(n)

    @classmethod
    def constant(cls, a) -> "MatrixSymbol":
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        return cls(a.shape[0], {0: a})

    @classmethod
    def monomial(cls, k: int, a) -> "MatrixSymbol":
        """``a * w**k`` for a matrix (or scalar) ``a``."""
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        return cls(a.shape[0], {k: a})

    @classmethod
    def scalar(cls, coeffs: Mapping[int, complex]) -> "MatrixSymbol":
        """Scalar (``n = 1``) symbol from a frequency-to-number mapping."""
        return cls(1, {k: np.array([[c]], dtype=complex) for k, c in coeffs.items()})

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence["MatrixSymbol | None"]]) -> "MatrixSymbol":
        """Assemble an ``n x n`` symbol from scalar symbols (``None`` is zero)."""
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise DimensionMismatch("entry table must be square")
        out = {}
        for i, row in enumerate(entries):
            for j, e in enumerate(row):
                if e is None:
                    continue
                if e.n != 1:
                    raise DimensionMismatch("entries must be scalar symbols")
                for k, a in e.coeffs.items():
                    out.setdefault(k, np.zeros((n, n), dtype=complex))[i, j] = a[0, 0]
        return cls(n, out)

    # -- basic views ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def coeffs(self) -> dict[int, np.ndarray]:
        """Non-zero coefficients keyed by frequency (read-only arrays)."""
        return {self._kmin + i: a for i, a in enumerate(self._data) if np.any(a)}

    @property
    def frequencies(self) -> list[int]:
        return sorted(self.coeffs)

    @property
    def kmin(self) -> int:
        return self._kmin

    @property
    def kmax(self) -> int:
        return self._kmin + self._data.shape[0] - 1

    @property
    def deg_plus(self) -> int:
        return max(0, self.kmax) if self._data.shape[0] else 0

    @property
    def deg_minus(self) -> int:
        return max(0, -self._kmin) if self._data.shape[0] else 0

    @property
    def is_zero(self) -> bool:
        return self._data.shape[0] == 0

    @property
    def is_analytic(self) -> bool:
        return self.deg_minus == 0

    def stack(self, kmin: int, kmax: int) -> np.ndarray:
        """Dense coefficient stack over ``kmin..kmax`` (zero padded)."""
        out = np.zeros((kmax - kmin + 1, self._n, self._n), dtype=complex)
        if self._data.shape[0] == 0:
            return out
        lo = max(kmin, self._kmin)
        hi = min(kmax, self.kmax)
        if lo <= hi:
            out[lo - kmin:hi - kmin + 1] = self._data[lo - self._kmin:hi - self._kmin + 1]
        return out

    def coefficient(self, k: int) -> np.ndarray:
        i = k - self._kmin
        if 0 <= i < self._data.shape[0]:
            return self._data[i].copy()
        return np.zeros((self._n, self._n), dtype=complex)

    def entry(self, i: int, j: int) -> "MatrixSymbol":
        """The scalar symbol in position ``(i, j)``."""
        return MatrixSymbol._from_stack(1, self._kmin, self._data[:, i:i + 1, j:j + 1])

    def max_abs(self) -> float:
        return float(np.abs(self._data).max()) if self._data.size else 0.0

    # -- algebra --------------------------------------------------------------

    def __call__(self, theta):
        return evaluate(self, theta)

    def adjoint(self) -> "MatrixSymbol":
        if self.is_zero:
            return self
        data = np.conj(self._data[::-1]).transpose(0, 2, 1)
        return MatrixSymbol._from_stack(self._n, -self.kmax, data)

    def _check(self, other):
        if not isinstance(other, MatrixSymbol):
            return NotImplemented
        if other.n != self._n:
            raise DimensionMismatch(f"block sizes differ: {self._n} vs {other.n}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo, hi = min(self._kmin, other.kmin), max(self.kmax, other.kmax)
        return MatrixSymbol._from_stack(self._n, lo, self.stack(lo, hi) + other.stack(lo, hi))

    def __neg__(self):
        return MatrixSymbol._from_stack(self._n, self._kmin, -self._data)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, MatrixSymbol):
            return NotImplemented
        return MatrixSymbol._from_stack(self._n, self._kmin, complex(c) * self._data)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return MatrixSymbol(self._n)
        a, b = self._data, other._data
        out = np.zeros((a.shape[0] + b.shape[0] - 1, self._n, self._n), dtype=complex)
        for p in range(a.shape[0]):
            out[p:p + b.shape[0]] += a[p] @ b
        return MatrixSymbol._from_stack(self._n, self._kmin + other.kmin, out)

    def shift_constant(self, c) -> "MatrixSymbol":
        """``F - c`` for a constant matrix ``c``."""
        return self - MatrixSymbol.constant(np.broadcast_to(c, (self._n, self._n)))

    def split(self) -> "SplitSymbol":
        return split(self)

    # -- comparison / display -------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, MatrixSymbol):
            return NotImplemented
        return (self._n == other.n and self._kmin == other.kmin
                and np.array_equal(self._data, other._data))

    def __hash__(self):
        return hash((self._n, self._kmin, self._data.tobytes()))

    def allclose(self, other: "MatrixSymbol", atol: float = 1e-12) -> bool:
        if other.n != self._n:
            return False
        return (self - other).max_abs() <= atol

    def __repr__(self):
        return (f"MatrixSymbol(n={self._n}, support=[{-self.deg_minus}, {self.deg_plus}], "
                f"terms={len(self.coeffs)})")

    # -- interchange ------------------------------------------------------------

    def to_dict(self) -> dict:
        """Interchange form ``{"n": ..., "coeffs": [{"k", "re", "im"}, ...]}``."""
        return {
            "n": self._n,
            "coeffs": [
                {"k": k, "re": a.real.tolist(), "im": a.imag.tolist()}
                for k, a in sorted(self.coeffs.items())
            ],
        }

    @classmethod
    def from_dict(cls, obj) -> "MatrixSymbol":
        try:
            n = obj["n"]
            terms = obj["coeffs"]
        except (TypeError, KeyError) as exc:
            raise SymbolFormatError(f"symbol object needs 'n' and 'coeffs': {exc}") from None
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise SymbolFormatError(f"'n' must be a positive integer, got {n!r}")
        if not isinstance(terms, list):
            raise SymbolFormatError("'coeffs' must be a list")
        out = {}
        for t in terms:
            try:
                k = t["k"]
                re = np.asarray(t["re"], dtype=float)
                im = np.asarray(t.get("im", np.zeros((n, n))), dtype=float)
            except (TypeError, KeyError, ValueError) as exc:
                raise SymbolFormatError(f"malformed coefficient entry: {exc}") from None
            if not isinstance(k, int) or isinstance(k, bool):
                raise SymbolFormatError(f"frequency must be an integer, got {k!r}")
            if re.shape != (n, n) or im.shape != (n, n):
                raise SymbolFormatError(f"coefficient at k={k} is not {n}x{n}")
            if k in out:
                raise SymbolFormatError(f"duplicate frequency k={k}")
            out[k] = re + 1j * im
        return cls(n, out)


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk."""

    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not math.isfinite(z.real) or not math.isfinite(z.imag) or abs(z) >= 1:
            raise ValueError(f"point {z} is not in the open unit disk")
        object.__setattr__(self, "z", z)

    def __complex__(self):
        return self.z

    @classmethod
    def polar(cls, r: float, theta: float) -> "DiskPoint":
        return cls(r * complex(math.cos(theta), math.sin(theta)))


def as_point(z) -> complex:
    """Validate ``z`` as a disk point and return it as a Python complex."""
    if isinstance(z, DiskPoint):
        return z.z
    return DiskPoint(z).z


@dataclass(frozen=True)
class SplitSymbol:
    """Analytic part (frequencies >= 0) and co-analytic part (< 0)."""

    plus: MatrixSymbol
    minus: MatrixSymbol

    def reconstruct(self) -> MatrixSymbol:
        return self.plus + self.minus


def evaluate(F: MatrixSymbol, theta):
    """Value of ``F`` at ``exp(i theta)``; vectorised over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if F.is_zero:
        return np.zeros(theta.shape + (F.n, F.n), dtype=complex)
    ks = np.arange(F.kmin, F.kmax + 1)
    phase = np.exp(1j * np.multiply.outer(theta, ks))
    return np.tensordot(phase, F.stack(F.kmin, F.kmax), axes=([-1], [0]))


def adjoint(F: MatrixSymbol) -> MatrixSymbol:
    """Pointwise conjugate transpose: ``(F*)_k = (A_{-k})^H``."""
    return F.adjoint()


def multiply(F: MatrixSymbol, G: MatrixSymbol) -> MatrixSymbol:
    """Pointwise product ``FG`` (Cauchy convolution of the coefficients)."""
    return F @ G


def split(F: MatrixSymbol) -> SplitSymbol:
    """``F = F_+ + F_-`` with the constant term kept in ``F_+``."""
    if F.is_zero:
        return SplitSymbol(F, F)
    plus = MatrixSymbol._from_stack(F.n, 0, F.stack(0, max(F.kmax, 0)))
    if F.kmin < 0:
        minus = MatrixSymbol._from_stack(F.n, F.kmin, F.stack(F.kmin, -1))
    else:
        minus = MatrixSymbol(F.n)
    return SplitSymbol(plus, minus)


def _ext_weights(ks, z):
    """Harmonic extension of ``w**k`` at ``z`` for every ``k`` in ``ks``."""
    ks = np.asarray(ks)
    pos = np.power(z, np.maximum(ks, 0))
    neg = np.power(np.conj(z), np.maximum(-ks, 0))
    return np.where(ks >= 0, pos, neg)


def poisson_ext(F: MatrixSymbol, z) -> np.ndarray:
    """Harmonic (Poisson) extension ``F(z)`` of a symbol, entrywise."""
    z = as_point(z)
    if F.is_zero:
        return np.zeros((F.n, F.n), dtype=complex)
    ks = np.arange(F.kmin, F.kmax + 1)
    return np.tensordot(_ext_weights(ks, z), F.stack(F.kmin, F.kmax), axes=(0, 0))


def _centered(M: MatrixSymbol, z: complex) -> MatrixSymbol:
    return M - MatrixSymbol.constant(poisson_ext(M, z))


def cross_ext(M1: MatrixSymbol, M2: MatrixSymbol, z) -> np.ndarray:
    """``((M1 - M1(z)) (M2 - M2(z))^*)(z)``, the mixed modulus extension.

    Evaluated as ``sum_{k,l} C_k m_{k-l} D_l^H`` where ``C``, ``D`` are the
    coefficients of the centred symbols and ``m_j`` is the harmonic extension
    of ``w**j`` (the Poisson moment).
    """
    z = as_point(z)
    if M1.n != M2.n:
        raise DimensionMismatch(f"block sizes differ: {M1.n} vs {M2.n}")
    c1, c2 = _centered(M1, z), _centered(M2, z)
    if c1.is_zero or c2.is_zero:
        return np.zeros((M1.n, M1.n), dtype=complex)
    k1 = np.arange(c1.kmin, c1.kmax + 1)
    k2 = np.arange(c2.kmin, c2.kmax + 1)
    moments = _ext_weights(np.subtract.outer(k1, k2), z)
    a = c1.stack(c1.kmin, c1.kmax)
    b = c2.stack(c2.kmin, c2.kmax)
    return np.einsum("kab,kl,lcb->ac", a, moments, np.conj(b), optimize=True)


def mod_sq_ext(M: MatrixSymbol, z) -> np.ndarray:
    """``|M - M(z)|^2(z)`` with the convention ``|A|^2 = A A^*``.

    The result is Hermitian positive semi-definite; it is symmetrised to remove
    roundoff asymmetry.
    """
    out = cross_ext(M, M, z)
    return 0.5 * (out + out.conj().T)


def ext_factors(Ms: Sequence[MatrixSymbol], z) -> list[np.ndarray]:
    """Factors ``Phi_i`` with ``Phi_i Phi_j^* = cross_ext(M_i, M_j, z)``.

    All factors live on one frequency window ``K`` (the union of the centred
    supports): ``Phi_i = [C_k]_k (S ⊗ I)`` where ``S S^* = [m_{k-l}]`` is a
    square root of the Poisson moment matrix.  Working with factors keeps
    products such as ``Phi_i^* Phi_j`` accurate to roundoff, whereas square
    roots of the assembled PSD matrices lose half the digits near zero.
    """
    z = as_point(z)
    if not Ms:
        return []
    n = Ms[0].n
    if any(M.n != n for M in Ms):
        raise DimensionMismatch("all symbols must share one block size")
    cs = [_centered(M, z) for M in Ms]
    live = [c for c in cs if not c.is_zero]
    if not live:
        return [np.zeros((n, n), dtype=complex) for _ in Ms]
    lo = min(c.kmin for c in live)
    hi = max(c.kmax for c in live)
    ks = np.arange(lo, hi + 1)
    moments = _ext_weights(np.subtract.outer(ks, ks), z)
    lam, V = np.linalg.eigh(0.5 * (moments + moments.conj().T))
    S = V * np.sqrt(np.clip(lam, 0.0, None))
    return [np.einsum("kab,kp->apb", c.stack(lo, hi), S).reshape(n, -1) for c in cs]


def block(rows: Sequence[Sequence[MatrixSymbol | None]]) -> MatrixSymbol:
    """Assemble a block symbol; ``None`` entries are zero blocks.

    All blocks must share one block size, which is read from the first
    non-``None`` entry.
    """
    p = len(rows)
    if any(len(r) != p for r in rows):
        raise DimensionMismatch("block layout must be square")
    sizes = {b.n for r in rows for b in r if b is not None}
    if len(sizes) != 1:
        raise DimensionMismatch(f"blocks must share one size, got {sorted(sizes)}")
    n = sizes.pop()
    present = [b for r in rows for b in r if b is not None and not b.is_zero]
    if not present:
        return MatrixSymbol(p * n)
    lo = min(b.kmin for b in present)
    hi = max(b.kmax for b in present)
    data = np.zeros((hi - lo + 1, p * n, p * n), dtype=complex)
    for i, r in enumerate(rows):
        for j, b in enumerate(r):
            if b is not None:
                data[:, i * n:(i + 1) * n, j * n:(j + 1) * n] = b.stack(lo, hi)
    return MatrixSymbol._from_stack(p * n, lo, data)


def random_symbol(n: int, deg_plus: int, deg_minus: int, rng=None) -> MatrixSymbol:
    """Symbol with i.i.d. standard complex Gaussian coefficients on its window."""
    rng = np.random.default_rng(rng)
    size = (deg_plus + deg_minus + 1, n, n)
    data = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)
    return MatrixSymbol._from_stack(n, -deg_minus, data)


def square_wave(degree: int, n: int = 1, shift: float = 0.0) -> MatrixSymbol:
    """Fourier truncation of ``sign(sin(theta - shift)) * I_n``.

    Only odd harmonics appear: ``A_{+-k} = +-2 / (i pi k) * exp(-+ i k shift)``,
    i.e. ``4 / (pi k)`` on ``sin(k (theta - shift))``.  Jumps sit at
    ``theta = shift`` and ``shift + pi``.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    eye = np.eye(n)
    coeffs = {}
    for k in range(1, degree + 1, 2):
        c = 2.0 / (1j * math.pi * k)
        coeffs[k] = c * np.exp(-1j * k * shift) * eye
        coeffs[-k] = -c * np.exp(1j * k * shift) * eye
    return MatrixSymbol(n, coeffs)
