import numpy as np
import pytest

from birkhoffgap import catalog
from birkhoffgap.channels import (
    KrausChannel,
    adjoint,
    choi,
    generalized_choi,
    kraus_space_basis,
    tensor,
    validate,
)
from birkhoffgap.errors import DimensionError, PreconditionError, StructureError
from birkhoffgap.matcore import (
    DensityOperator,
    dagger,
    partial_trace,
    psd_check,
    schatten_norm,
    trace_distance,
)

from conftest import random_channel, random_density, random_unitary
from oracles import adjoint_inf_norm, one_norm_rank_one

PAULIS = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


class TestValidate:
    def test_identity(self):
        flags = validate(catalog.identity_channel(3))
        assert flags.tp and flags.unital
        assert flags.defect_tp < 1e-14 and flags.defect_unital < 1e-14

    def test_example1(self):
        flags = validate(catalog.example1())
        assert flags.tp and flags.unital

    def test_half_identity_defect(self):
        flags = validate(KrausChannel((np.eye(2) / 2,)))
        assert not flags.tp
        assert flags.defect_tp == pytest.approx(0.75)

    def test_empty_kraus_list(self):
        with pytest.raises(StructureError):
            KrausChannel(())


class TestApply:
    def test_identity(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert np.allclose(catalog.identity_channel(3).apply(x), x)

    def test_dephasing(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = catalog.dephasing_channel(2).apply(x)
        assert np.allclose(out, np.diag([1.0, 4.0]))

    def test_example1_unital(self):
        out = catalog.example1().apply(np.eye(4) / 4)
        assert np.allclose(out, np.eye(4) / 4, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            catalog.identity_channel(2).apply(np.eye(3))


class TestChoi:
    def test_identity(self):
        c = choi(catalog.identity_channel(2))
        alpha = np.array([1, 0, 0, 1], dtype=complex)
        assert np.allclose(c.matrix, np.outer(alpha, alpha))
        assert np.trace(c.matrix) == pytest.approx(2.0)

    def test_depolarizing(self):
        d = 3
        c = choi(catalog.depolarizing_channel(d))
        assert np.allclose(c.matrix, np.eye(d * d) / d, atol=1e-12)

    def test_difference_of_equal_channels(self):
        ch = random_channel(np.random.default_rng(1), 3, 2)
        assert np.allclose(choi(ch).matrix - choi(ch).matrix, 0.0)

    def test_choi_psd_and_tp_reduction(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            d = int(rng.integers(2, 5))
            ch = random_channel(rng, d, int(rng.integers(1, 4)))
            c = choi(ch)
            assert psd_check(c.matrix, 1e-9)
            red = partial_trace(c.matrix, ch.dim_out, ch.dim_in, "B")
            assert np.max(np.abs(red - np.eye(d))) < 1e-9

    def test_normalized_accessor(self):
        c = choi(catalog.identity_channel(3))
        assert np.trace(c.normalized()) == pytest.approx(1.0)


class TestAdjoint:
    def test_identity(self):
        adj = adjoint(catalog.identity_channel(2))
        assert np.allclose(adj.kraus[0], np.eye(2))

    def test_flags_swap(self):
        rng = np.random.default_rng(3)
        # non-unital TP channel: adjoint is unital, not TP
        ch = random_channel(rng, 3, 2)
        adj = adjoint(ch)
        assert validate(ch).tp
        assert validate(adj).unital

    def test_inner_product_duality(self):
        rng = np.random.default_rng(4)
        ch = random_channel(rng, 3, 3)
        adj = ch.adjoint()
        for _ in range(5):
            x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            lhs = np.trace(dagger(y) @ ch.apply(x))
            rhs = np.trace(dagger(adj.apply(y)) @ x)
            assert abs(lhs - rhs) < 1e-10


class TestTensor:
    def test_product_action(self):
        rng = np.random.default_rng(5)
        phi = random_channel(rng, 2, 2)
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        big = tensor(phi, catalog.identity_channel(3))
        assert np.allclose(big.apply(np.kron(x, y)), np.kron(phi.apply(x), y),
                           atol=1e-12)

    def test_unital_closed(self):
        rng = np.random.default_rng(6)
        a = KrausChannel(catalog.example1().kraus)
        b, _, _ = __import__("conftest").random_mixture_channel(rng, 2, 3)
        flags = validate(tensor(a, b))
        assert flags.tp and flags.unital

    def test_choi_trace(self):
        a = catalog.identity_channel(2)
        b = catalog.dephasing_channel(3)
        assert np.trace(choi(tensor(a, b)).matrix) == pytest.approx(6.0)


class TestKrausSpaceBasis:
    def test_duplicate_collapse(self):
        d = 3
        ch = KrausChannel((np.eye(d), np.eye(d)))
        basis = kraus_space_basis(ch)
        assert len(basis) == 1
        assert np.allclose(basis[0], np.eye(d) / np.sqrt(d))

    def test_example1_two_elements(self):
        basis = kraus_space_basis(catalog.example1())
        assert len(basis) == 2
        gram = np.array([[np.trace(dagger(a) @ b) for b in basis] for a in basis])
        assert np.allclose(gram, np.eye(2), atol=1e-12)

    def test_full_span(self):
        ch = KrausChannel(tuple(p / 2.0 for p in PAULIS))
        assert len(kraus_space_basis(ch)) == 4


class TestGeneralizedChoi:
    def test_standard_maximally_entangled(self):
        d = 2
        omega = np.zeros(d * d, dtype=complex)
        for k in range(d):
            omega[k * d + k] = 1.0 / np.sqrt(d)
        rho = DensityOperator.from_vector(omega)
        ch = random_channel(np.random.default_rng(7), d, 2)
        out = generalized_choi(ch, rho)
        # (I ⊗ Φ)(|Ω><Ω|) is the normalized Choi matrix with factors swapped
        swapped = out.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
        assert np.allclose(swapped, choi(ch).normalized(), atol=1e-12)

    def test_identity_channel_fixes_state(self):
        rng = np.random.default_rng(8)
        from birkhoffgap.channels import random_state_full_schmidt
        rho = random_state_full_schmidt(3, rng)
        out = generalized_choi(catalog.identity_channel(3), rho)
        assert np.allclose(out, rho.matrix, atol=1e-12)

    def test_distinct_paulis_distinguished(self):
        d = 2
        rng = np.random.default_rng(9)
        from birkhoffgap.channels import random_state_full_schmidt
        rho = random_state_full_schmidt(d, rng)
        outs = [generalized_choi(catalog.unitary_channel(p), rho) for p in PAULIS]
        for i in range(4):
            for j in range(i + 1, 4):
                assert schatten_norm(outs[i] - outs[j], 1) > 1e-8

    def test_low_schmidt_rank_rejected(self):
        product = np.zeros(4, dtype=complex)
        product[0] = 1.0
        rho = DensityOperator.from_vector(product)
        with pytest.raises(PreconditionError):
            generalized_choi(catalog.identity_channel(2), rho)

    def test_mixed_state_rejected(self):
        with pytest.raises(PreconditionError):
            generalized_choi(catalog.identity_channel(2),
                             DensityOperator.maximally_mixed(4))

    def test_injectivity_on_random_pairs(self):
        rng = np.random.default_rng(10)
        from birkhoffgap.channels import random_state_full_schmidt
        d = 2
        rho = random_state_full_schmidt(d, rng)
        for _ in range(50):
            a = random_channel(rng, d, int(rng.integers(1, 4)))
            b = random_channel(rng, d, int(rng.integers(1, 4)))
            gap = schatten_norm(choi(a).matrix - choi(b).matrix, 1)
            if gap < 1e-6:
                continue  # same channel sampled twice
            diff = generalized_choi(a, rho) - generalized_choi(b, rho)
            assert schatten_norm(diff, 1) >= 1e-8


def test_one_norm_duality_with_adjoint():
    rng = np.random.default_rng(11)
    for _ in range(3):
        d = int(rng.integers(2, 4))
        a = random_channel(rng, d, 2)
        b = random_channel(rng, d, 2)
        one = one_norm_rank_one(a, b, rng)
        inf = adjoint_inf_norm(a, b, rng)
        assert abs(one - inf) < 1e-3


def test_cp_norm_identity():
    rng = np.random.default_rng(12)
    for _ in range(5):
        d = int(rng.integers(2, 4))
        # random CP (not necessarily TP) map
        ops = tuple(0.7 * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
                    for _ in range(2))
        ch = KrausChannel(ops)
        bound = schatten_norm(ch.apply(np.eye(d)), np.inf)
        best = 0.0
        for _ in range(40):
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            x = g @ dagger(g)
            x = x / max(schatten_norm(x, np.inf), 1e-12)  # PSD contraction
            best = max(best, schatten_norm(ch.apply(x), np.inf))
            assert schatten_norm(ch.apply(x), np.inf) <= bound + 1e-6
        best = max(best, schatten_norm(ch.apply(np.eye(d)), np.inf))
        assert abs(best - bound) < 1e-6
