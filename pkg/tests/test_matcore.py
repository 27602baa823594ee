import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birkhoffgap import sdpsolve
from birkhoffgap.errors import DimensionError, ParameterError, StructureError
from birkhoffgap.matcore import (
    DensityOperator,
    fidelity,
    kron,
    matrix_abs,
    partial_trace,
    psd_check,
    schatten_norm,
    trace_distance,
)

from conftest import random_density


def ketbra(i, d):
    m = np.zeros((d, d), dtype=complex)
    m[i, i] = 1.0
    return m


class TestMatrixAbs:
    def test_identity(self):
        assert np.allclose(matrix_abs(np.eye(3)), np.eye(3))

    def test_diagonal_modulus(self):
        m = np.diag([-2.0, 3.0j])
        assert np.allclose(matrix_abs(m), np.diag([2.0, 3.0]))

    def test_nilpotent(self):
        m = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(matrix_abs(m), np.diag([0.0, 1.0]))

    def test_non_square_raises(self):
        with pytest.raises(DimensionError):
            matrix_abs(np.ones((2, 3)))


class TestSchattenNorm:
    def test_trace_norm_identity(self):
        assert schatten_norm(np.eye(5), 1) == pytest.approx(5.0)

    def test_frobenius(self):
        assert schatten_norm(np.diag([3.0, 4.0]), 2) == pytest.approx(5.0)

    def test_operator_norm(self):
        assert schatten_norm(np.diag([3.0, 4.0]), np.inf) == pytest.approx(4.0)

    def test_p_below_one_raises(self):
        with pytest.raises(ParameterError):
            schatten_norm(np.eye(2), 0.5)

    def test_monotone_in_p(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            previous = np.inf
            for p in (1, 1.5, 2, 3, 7, np.inf):
                v = schatten_norm(m, p)
                assert v <= previous + 1e-10
                previous = v


class TestTraceDistance:
    def test_self(self):
        rho = random_density(np.random.default_rng(0), 3)
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure(self):
        assert trace_distance(ketbra(0, 2), ketbra(1, 2)) == pytest.approx(2.0)

    def test_pure_vs_mixed(self):
        assert trace_distance(ketbra(0, 2), np.eye(2) / 2) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            trace_distance(np.eye(2) / 2, np.eye(3) / 3)


class TestFidelity:
    def test_self(self):
        rho = random_density(np.random.default_rng(1), 4)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal(self):
        assert fidelity(ketbra(0, 2), ketbra(1, 2)) == pytest.approx(0.0, abs=1e-10)

    def test_pure_vs_mixed(self):
        assert fidelity(ketbra(0, 2), np.eye(2) / 2) == pytest.approx(1 / np.sqrt(2))


class TestPartialTrace:
    def test_product_input(self):
        rng = np.random.default_rng(2)
        rho = random_density(rng, 2).matrix
        sigma = random_density(rng, 3).matrix
        assert np.allclose(partial_trace(kron(rho, sigma), 2, 3, "A"), rho, atol=1e-12)
        assert np.allclose(partial_trace(kron(rho, sigma), 2, 3, "B"), sigma, atol=1e-12)

    def test_maximally_entangled_marginal(self):
        d = 3
        alpha = np.zeros(d * d, dtype=complex)
        for k in range(d):
            alpha[k * d + k] = 1.0
        marg = partial_trace(np.outer(alpha, alpha.conj()), d, d, "A")
        assert np.allclose(marg, np.eye(d))

    def test_identity(self):
        assert np.allclose(partial_trace(np.eye(4), 2, 2, "B"), 2 * np.eye(2))

    def test_trace_preserved(self):
        rng = np.random.default_rng(3)
        m = random_density(rng, 6).matrix
        assert np.trace(partial_trace(m, 2, 3, "A")) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(5), 2, 2, "A")


class TestKron:
    def test_identities(self):
        assert np.allclose(kron(np.eye(2), np.eye(3)), np.eye(6))

    def test_diag(self):
        assert np.allclose(kron(np.diag([1.0, 2.0]), np.eye(2)),
                           np.diag([1.0, 1.0, 2.0, 2.0]))

    def test_norm_multiplicative(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert schatten_norm(kron(a, b), np.inf) == pytest.approx(
            schatten_norm(a, np.inf) * schatten_norm(b, np.inf)
        )


class TestPsdCheck:
    def test_identity(self):
        assert psd_check(np.eye(4), 1e-9)

    def test_indefinite(self):
        assert not psd_check(np.diag([1.0, -0.5]), 1e-9)

    def test_rank_one_gram(self):
        assert psd_check(np.ones((2, 2)), 1e-9)

    def test_non_square(self):
        with pytest.raises(DimensionError):
            psd_check(np.ones((2, 3)), 1e-9)


class TestDensityOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(StructureError):
            DensityOperator(np.array([[0.5, 1.0], [0.0, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(StructureError):
            DensityOperator(np.eye(2))

    def test_rejects_negative(self):
        with pytest.raises(StructureError):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_rejects_nan(self):
        m = np.eye(2, dtype=complex) / 2
        m[0, 0] = np.nan
        with pytest.raises(StructureError):
            DensityOperator(m)


def test_fuchs_van_de_graaf():
    rng = np.random.default_rng(5)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        rho = random_density(rng, d, rank=int(rng.integers(1, d + 1)))
        sigma = random_density(rng, d, rank=int(rng.integers(1, d + 1)))
        dist = trace_distance(rho, sigma)
        f = fidelity(rho, sigma)
        assert 2 * (1 - f) <= dist + 1e-8
        assert dist <= 2 * np.sqrt(max(0.0, 1 - f * f)) + 1e-8


def test_trace_distance_matches_variational_sdp():
    rng = np.random.default_rng(6)
    for _ in range(4):
        d = int(rng.integers(2, 5))
        rho = random_density(rng, d)
        sigma = random_density(rng, d)
        sdp = sdpsolve.trace_norm_max(rho.matrix - sigma.matrix)
        assert abs(sdp.value - trace_distance(rho, sigma)) < 1e-6


def test_partial_trace_of_kron_property():
    rng = np.random.default_rng(7)
    for _ in range(20):
        da, db = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        rho = random_density(rng, da).matrix
        g = rng.normal(size=(db, db)) + 1j * rng.normal(size=(db, db))
        sigma = g @ g.conj().T
        out = partial_trace(kron(rho, sigma), da, db, "A")
        assert np.max(np.abs(out - rho * np.trace(sigma))) < 1e-12 * max(
            1.0, float(np.abs(np.trace(sigma)))
        )


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4),
       st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_schatten_two_vs_inf_hypothesis(re, im):
    m = np.array(re).reshape(2, 2) + 1j * np.array(im).reshape(2, 2)
    n2 = schatten_norm(m, 2)
    ninf = schatten_norm(m, np.inf)
    assert ninf <= n2 + 1e-9
    assert n2 <= np.sqrt(2) * ninf + 1e-9
