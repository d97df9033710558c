import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from blocktoeplitz import (
    DiskPoint,
    MatrixSymbol,
    SymbolFormatError,
    adjoint,
    cross_ext,
    evaluate,
    mod_sq_ext,
    multiply,
    poisson_ext,
    random_symbol,
    split,
    square_wave,
)
from blocktoeplitz.errors import DimensionMismatch
from blocktoeplitz.symbol import ZERO_TOL, block


def _random_point(rng, rmax=0.9):
    return rmax * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())


# -- construction and canonical form ---------------------------------------------------


def test_canonical_form_drops_negligible_coefficients():
    F = MatrixSymbol(2, {3: np.eye(2) * ZERO_TOL / 2, -1: np.eye(2), 0: np.zeros((2, 2))})
    assert F.frequencies == [-1]
    assert (F.deg_plus, F.deg_minus) == (0, 1)


def test_zero_symbol():
    Z = MatrixSymbol.zero(3)
    assert Z.is_zero and Z.is_analytic
    assert Z.deg_plus == Z.deg_minus == 0
    assert np.allclose(Z(0.3), np.zeros((3, 3)))


def test_bad_block_size_rejected():
    with pytest.raises(ValueError):
        MatrixSymbol(0)
    with pytest.raises(DimensionMismatch):
        MatrixSymbol(2, {0: np.eye(3)})


def test_coefficients_are_read_only(rng):
    F = random_symbol(2, 2, 2, rng)
    with pytest.raises(ValueError):
        F.coeffs[0][0, 0] = 5


def test_disk_point_rejects_boundary():
    for z in (1.0, 1j, -0.6 - 0.8j, 2.0, complex("nan")):
        with pytest.raises(ValueError):
            DiskPoint(z)
    assert complex(DiskPoint.polar(0.5, np.pi)) == pytest.approx(-0.5)


# -- eval --------------------------------------------------------------------------------


def test_eval_identity_shift():
    F = MatrixSymbol.monomial(1, np.eye(2))
    assert np.allclose(evaluate(F, 0.0), np.eye(2))


def test_eval_conj_w_at_pi(wbar):
    assert evaluate(wbar, np.pi)[0, 0] == pytest.approx(-1)


def test_eval_matches_fft_reconstruction(rng):
    F = random_symbol(3, 4, 3, rng)
    N = 4 * (4 + 3 + 1)
    c = oracles.fft_coefficients(F, N)
    for k in range(-3, 5):
        assert np.allclose(c[k], F.coefficient(k), atol=1e-13)
    theta = 2 * np.pi * 5 / N
    direct = sum(a * np.exp(1j * k * theta) for k, a in c.items())
    assert np.allclose(evaluate(F, theta), direct, atol=1e-12)


def test_eval_vectorised(rng):
    F = random_symbol(2, 3, 1, rng)
    th = np.linspace(0, 2 * np.pi, 7)
    stacked = evaluate(F, th)
    assert stacked.shape == (7, 2, 2)
    for t, v in zip(th, stacked):
        assert np.allclose(v, evaluate(F, t))


# -- adjoint -----------------------------------------------------------------------------


def test_adjoint_of_shift(w, wbar):
    I = np.eye(2)
    assert adjoint(MatrixSymbol.monomial(1, I)) == MatrixSymbol.monomial(-1, I)
    assert adjoint(w) == wbar


def test_adjoint_fixes_hermitian_constant():
    H = np.array([[2.0, 1 - 1j], [1 + 1j, -1.0]])
    F = MatrixSymbol.constant(H)
    assert adjoint(F) == F


def test_adjoint_pointwise(rng):
    F = random_symbol(3, 3, 2, rng)
    Fa = adjoint(F)
    for t in np.linspace(0, 2 * np.pi, 16, endpoint=False):
        assert np.allclose(evaluate(Fa, t), evaluate(F, t).conj().T, atol=1e-13)
    assert adjoint(Fa) == F


# -- multiply ----------------------------------------------------------------------------


def test_multiply_w_wbar_is_one(w, wbar):
    assert multiply(w, wbar) == MatrixSymbol.scalar({0: 1.0})


def test_multiply_cancellation_pair(cancel_pair):
    F, G = cancel_pair
    assert multiply(F, G).is_zero


def test_multiply_pointwise(rng):
    F, G = random_symbol(2, 3, 2, rng), random_symbol(2, 1, 4, rng)
    P = multiply(F, G)
    for t in np.linspace(0, 2 * np.pi, 16, endpoint=False):
        assert np.allclose(evaluate(P, t), evaluate(F, t) @ evaluate(G, t), atol=1e-12)


def test_multiply_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        multiply(random_symbol(2, 1, 1, rng), random_symbol(3, 1, 1, rng))


# -- split -------------------------------------------------------------------------------


def test_split_basic(w, wbar):
    s = split(w + wbar)
    assert s.plus == w and s.minus == wbar


def test_split_analytic_and_constant(rng):
    F = random_symbol(2, 3, 0, rng)
    assert split(F).minus.is_zero
    C = MatrixSymbol.constant(np.eye(2))
    s = split(C)
    assert s.plus == C and s.minus.is_zero


def test_split_reconstructs(rng):
    F = random_symbol(3, 2, 4, rng)
    s = split(F)
    assert s.reconstruct() == F
    assert s.plus.kmin >= 0 and s.minus.kmax < 0


# -- poisson_ext -------------------------------------------------------------------------


def test_poisson_analytic_and_constant(w):
    assert poisson_ext(w, 0.3 - 0.2j)[0, 0] == pytest.approx(0.3 - 0.2j)
    assert poisson_ext(MatrixSymbol.scalar({0: 1}), 0.7j)[0, 0] == pytest.approx(1)


def test_poisson_modulus_example(w, wbar):
    # |conj(w) - conj(z0)|^2 = 1 + |z0|^2 - conj(z0) w - z0 conj(w)
    z0 = 0.5
    h = MatrixSymbol.scalar({0: 1 + abs(z0) ** 2, 1: -np.conj(z0), -1: -z0})
    expected = oracles.poisson_quad(h, z0)[0, 0]
    assert expected == pytest.approx(0.75, abs=1e-12)
    assert poisson_ext(h, z0)[0, 0] == pytest.approx(expected, abs=1e-12)


def test_poisson_matches_quadrature(rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        F = random_symbol(n, int(rng.integers(0, 17)), int(rng.integers(0, 17)), rng)
        z = _random_point(rng, 0.95)
        ref = oracles.poisson_quad(F, z)
        got = poisson_ext(F, z)
        assert np.abs(got - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max())


def test_poisson_analytic_is_power_series(rng):
    F = random_symbol(2, 5, 0, rng)
    z = 0.4 + 0.3j
    direct = sum(a * z ** k for k, a in F.coeffs.items())
    assert np.allclose(poisson_ext(F, z), direct, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_poisson_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    F, G = random_symbol(2, 3, 3, rng), random_symbol(2, 2, 4, rng)
    z = _random_point(rng)
    lhs = poisson_ext(a * F + b * G, z)
    rhs = a * poisson_ext(F, z) + b * poisson_ext(G, z)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)


# -- mod_sq_ext / cross_ext --------------------------------------------------------------


def test_mod_sq_conj_w(wbar):
    assert oracles.cross_quad(wbar, wbar, 0.6)[0, 0] == pytest.approx(0.64, abs=1e-12)
    assert mod_sq_ext(wbar, 0.6)[0, 0] == pytest.approx(0.64, abs=1e-14)


def test_mod_sq_zero():
    assert np.array_equal(mod_sq_ext(MatrixSymbol.zero(2), 0.2), np.zeros((2, 2)))


def test_mod_sq_diag_at_origin(wbar):
    M = MatrixSymbol(2, {-1: np.diag([1, 0]), -2: np.diag([0, 1])})
    ref = oracles.cross_quad(M, M, 0.0)
    assert np.allclose(ref, np.eye(2), atol=1e-12)
    assert np.allclose(mod_sq_ext(M, 0.0), np.eye(2), atol=1e-14)


def test_mod_sq_hermitian_psd_and_matches_quadrature(rng):
    for _ in range(15):
        n = int(rng.integers(1, 4))
        M = random_symbol(n, int(rng.integers(0, 5)), int(rng.integers(0, 5)), rng)
        z = _random_point(rng)
        P = mod_sq_ext(M, z)
        assert np.array_equal(P, P.conj().T)
        assert np.linalg.eigvalsh(P).min() >= -1e-12
        assert np.allclose(P, oracles.cross_quad(M, M, z), atol=1e-10)


def test_cross_examples(wbar):
    w2 = MatrixSymbol.scalar({-2: 1})
    assert cross_ext(wbar, wbar, 0)[0, 0] == pytest.approx(1)
    assert oracles.cross_quad(wbar, w2, 0.0)[0, 0] == pytest.approx(0, abs=1e-13)
    assert cross_ext(wbar, w2, 0)[0, 0] == pytest.approx(0, abs=1e-15)


def test_cross_conjugate_symmetry(rng):
    for _ in range(10):
        M1, M2 = random_symbol(2, 2, 3, rng), random_symbol(2, 3, 2, rng)
        z = _random_point(rng)
        c12, c21 = cross_ext(M1, M2, z), cross_ext(M2, M1, z)
        assert np.allclose(c12, c21.conj().T, atol=1e-12)
        assert np.allclose(c12, oracles.cross_quad(M1, M2, z), atol=1e-10)
        assert np.allclose(cross_ext(M1, M1, z), mod_sq_ext(M1, z), atol=1e-14)


def test_cross_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        cross_ext(random_symbol(1, 1, 1, rng), random_symbol(2, 1, 1, rng), 0.1)


def test_block_assembly_of_commutator_factors(rng):
    """Blockwise cross extensions equal the extension of the stacked symbol."""
    for _ in range(10):
        n = int(rng.integers(1, 4))
        F, G = random_symbol(n, 3, 2, rng), random_symbol(n, 2, 3, rng)
        z = _random_point(rng)
        B = block([[F, -G], [None, None]])
        X, Y = adjoint(split(F).plus), adjoint(split(G).plus)
        direct = mod_sq_ext(adjoint(split(B).plus), z)
        blocks = np.block([[cross_ext(X, X, z), -cross_ext(X, Y, z)],
                           [-cross_ext(Y, X, z), cross_ext(Y, Y, z)]])
        assert np.abs(direct - blocks).max() <= 1e-12 * max(1, np.abs(direct).max())


# -- interchange ---------------------------------------------------------------------------


def test_json_round_trip(rng):
    F = random_symbol(3, 2, 2, rng)
    text = json.dumps(F.to_dict())
    assert MatrixSymbol.from_dict(json.loads(text)) == F


@pytest.mark.parametrize("bad", [
    {},
    {"n": 0, "coeffs": []},
    {"n": 1, "coeffs": {}},
    {"n": 1, "coeffs": [{"k": 0.5, "re": [[1]], "im": [[0]]}]},
    {"n": 2, "coeffs": [{"k": 0, "re": [[1]], "im": [[0]]}]},
    {"n": 1, "coeffs": [{"k": 0, "re": [[1]]}, {"k": 0, "re": [[2]]}]},
    [1, 2],
])
def test_json_rejects_malformed(bad):
    with pytest.raises(SymbolFormatError):
        MatrixSymbol.from_dict(bad)


# -- square wave ---------------------------------------------------------------------------


def test_square_wave_degree_one():
    s = square_wave(1)
    assert s.coefficient(1)[0, 0] == pytest.approx(2 / (1j * np.pi))
    assert s.coefficient(-1)[0, 0] == pytest.approx(-2 / (1j * np.pi))
    # 4/pi on the sine harmonic
    assert evaluate(s, np.pi / 2)[0, 0] == pytest.approx(4 / np.pi)


def test_square_wave_is_fourier_series_of_sign():
    s = square_wave(9, shift=0.7)
    N = 1 << 14
    th = oracles.grid(N)
    sign = np.sign(np.sin(th - 0.7))
    for k in range(-9, 10):
        ref = np.mean(sign * np.exp(-1j * k * th))
        assert s.coefficient(k)[0, 0] == pytest.approx(ref, abs=5e-4)
