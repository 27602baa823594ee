"""Schur multipliers, Schur channels, the diagonal-unitary twirl, contraction
splitting and diagonal-unitary mixtures.

A Schur multiplier Φ_S maps X to the entrywise product S ∘ X.  Φ_S is a
channel iff S is PSD with unit diagonal (a "Schur channel"); such channels
are automatically unital.  Mixtures of diagonal-unitary conjugations have
Schur matrices Σ_k p_k u_k u_k† with unit-modulus phase vectors u_k.

For any Schur multiplier the diamond, trace, completely bounded and operator
norms coincide, so ``multiplier_norm`` (a small SDP over one 2d x 2d block)
evaluates the diamond norm of a multiplier difference without the full
channel-distance program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sdpsolve
from .channels import KrausChannel
from .errors import (
    DimensionError,
    ParameterError,
    PreconditionError,
    SolverError,
    StructureError,
)
from .matcore import as_matrix, dagger, herm_deviation, psd_check

PSD_TOL = 1e-9
DIAG_TOL = 1e-10
PHASE_TOL = 1e-12


@dataclass(frozen=True)
class SchurMatrix:
    """A square matrix S defining the Schur multiplier X -> S ∘ X."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "Schur matrix")
        if m.shape[0] != m.shape[1]:
            raise DimensionError("Schur matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _smat(s) -> np.ndarray:
    return s.matrix if isinstance(s, SchurMatrix) else as_matrix(s, "Schur matrix")


@dataclass(frozen=True)
class DiagonalUnitaryMixture:
    """Weights and diagonal phase vectors of an element of Λ_d."""

    weights: tuple
    phases: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w or len(w) != len(self.phases):
            raise ParameterError("weights and phases must be non-empty and matched")
        if min(w) < -PHASE_TOL or abs(sum(w) - 1.0) > PHASE_TOL:
            raise ParameterError("weights must form a probability vector")
        vecs = []
        d = None
        for v in self.phases:
            a = np.asarray(v, dtype=np.complex128).reshape(-1)
            d = a.size if d is None else d
            if a.size != d:
                raise DimensionError("all phase vectors must share the dimension")
            if np.max(np.abs(np.abs(a) - 1.0)) > PHASE_TOL:
                raise StructureError("phase entries must have unit modulus")
            vecs.append(a)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "phases", tuple(vecs))

    @property
    def dim(self) -> int:
        return self.phases[0].size


def schur_apply(s, x) -> np.ndarray:
    """Entrywise product S ∘ X."""
    sm = _smat(s)
    xm = as_matrix(x, "X")
    if sm.shape != xm.shape:
        raise DimensionError(f"dimension mismatch {sm.shape} vs {xm.shape}")
    return sm * xm


def is_schur_channel(s) -> bool:
    """PSD within 1e-9 with unit diagonal within 1e-10."""
    sm = _smat(s)
    if np.max(np.abs(np.diag(sm) - 1.0)) > DIAG_TOL:
        return False
    return psd_check(sm, PSD_TOL)


def schur_to_kraus(s) -> KrausChannel:
    """Kraus form of Φ_S for PSD S: operators Diag(a_k) from the scaled
    eigenvectors of S; the Kraus count is rank(S) (eigenvalues below
    1e-10 * max eigenvalue are dropped)."""
    sm = _smat(s)
    if not psd_check(sm, PSD_TOL):
        raise StructureError("Schur-to-Kraus factorization requires a PSD matrix")
    evals, vecs = np.linalg.eigh((sm + dagger(sm)) / 2.0)
    order = np.argsort(evals)[::-1]
    evals, vecs = evals[order], vecs[:, order]
    cut = max(evals.max(), 0.0) * 1e-10
    ops = []
    for lam, v in zip(evals, vecs.T):
        if lam > cut:
            ops.append(np.diag(np.sqrt(lam) * v))
    if not ops:
        ops = [np.zeros_like(sm)]
    return KrausChannel(tuple(ops))


def twirl(ch: KrausChannel) -> SchurMatrix:
    """Average of U†Φ(U · V)V† over independent Haar-random diagonal unitary
    pairs, evaluated in closed form: the integral collapses to diagonal
    extraction, giving the Schur multiplier with
    s'_ij = Σ_k (A_k)_ii (A_k)_jj^*.

    Fixes every Schur multiplier and maps CP maps to CP multipliers.
    """
    if ch.dim_in != ch.dim_out:
        raise DimensionError("twirl requires a square channel")
    diags = np.array([np.diag(a) for a in ch.kraus])
    return SchurMatrix(diags.T @ np.conj(diags))


def split_contraction(a):
    """Split a contraction |a| <= 1 as a = (v + w)/2 with |v| = |w| = 1.

    Canonical branch: v = e^{i(φ+θ)}, w = e^{i(φ−θ)} with φ = arg(a)
    (arg(0) := 0) and θ = arccos|a|.  Accepts scalars or arrays.
    """
    arr = np.asarray(a, dtype=np.complex128)
    mag = np.abs(arr)
    if np.any(mag > 1.0 + 1e-12):
        raise ParameterError("split_contraction requires |a| <= 1")
    mag = np.minimum(mag, 1.0)
    phi = np.angle(arr)
    theta = np.arccos(mag)
    v = np.exp(1j * (phi + theta))
    w = np.exp(1j * (phi - theta))
    if np.isscalar(a) or np.ndim(a) == 0:
        return complex(v), complex(w)
    return v, w


def mixture_from_twirl(components: Sequence) -> DiagonalUnitaryMixture:
    """Promote a weighted family of diagonal contraction vectors to a
    diagonal-unitary mixture by splitting each contraction entrywise; the
    output has twice the components at half the weights."""
    if not components:
        raise ParameterError("empty component list")
    weights = np.array([float(p) for p, _ in components])
    if weights.min() < -PHASE_TOL or abs(weights.sum() - 1.0) > PHASE_TOL:
        raise ParameterError("weights must form a probability vector")
    out_w = []
    out_p = []
    for (p, vec) in components:
        v, w = split_contraction(np.asarray(vec, dtype=np.complex128))
        out_w.extend([p / 2.0, p / 2.0])
        out_p.extend([v, w])
    return DiagonalUnitaryMixture(tuple(out_w), tuple(out_p))


def mixture_to_schur(m: DiagonalUnitaryMixture) -> SchurMatrix:
    """S with s_ij = Σ_k p_k u^(k)_i (u^(k)_j)^* (always a Schur channel)."""
    d = m.dim
    s = np.zeros((d, d), dtype=np.complex128)
    for p, u in zip(m.weights, m.phases):
        s += p * np.outer(u, np.conj(u))
    return SchurMatrix(s)


def mixture_as_channel(m: DiagonalUnitaryMixture) -> KrausChannel:
    """The mixture as a Kraus channel with operators sqrt(p_k) Diag(u_k)."""
    return KrausChannel(tuple(np.diag(np.sqrt(p) * u) for p, u in zip(m.weights, m.phases)))


def compress_block(m: DiagonalUnitaryMixture, j: int, d: int) -> DiagonalUnitaryMixture:
    """Keep entries [(j-1)d, jd) of each phase vector (block j is 1-based);
    the result is again a mixture of diagonal unitaries on dimension d."""
    dim = m.dim
    if d <= 0 or dim % d != 0:
        raise DimensionError(f"dimension {dim} is not divisible by block size {d}")
    nblocks = dim // d
    if not 1 <= j <= nblocks:
        raise ParameterError(f"block index {j} out of range 1..{nblocks}")
    lo = (j - 1) * d
    return DiagonalUnitaryMixture(
        m.weights, tuple(u[lo:lo + d] for u in m.phases)
    )


# ---------------------------------------------------------------------------
# Multiplier norm (= diamond norm for Schur multiplier differences)
# ---------------------------------------------------------------------------

@dataclass
class MultiplierNormResult:
    value: float
    p_block: np.ndarray
    q_block: np.ndarray
    grad: np.ndarray
    solution: sdpsolve.SdpSolution


def multiplier_norm(t) -> MultiplierNormResult:
    """Completely bounded norm of the Schur multiplier X -> T ∘ X.

    Solves  min t  s.t.  [[P, T], [T†, Q]] >= 0, diag P <= t, diag Q <= t;
    for Schur multipliers this equals the diamond, trace and operator norms,
    so it evaluates diamond distances between Schur channels cheaply.
    ``grad`` is the gradient of the value with respect to T (in the sense
    dV = Re<grad, dT>), read off the equality-constraint multipliers.
    """
    tm = _smat(t)
    d = tm.shape[0]
    two_d = 2 * d
    p_idx, q_idx, c1, c2, sym_index, asym_index = sdpsolve._herm_basis_index(two_d)

    def basis_mat(a):
        h = np.zeros((two_d, two_d), dtype=np.complex128)
        h[p_idx[a], q_idx[a]] += c1[a]
        h[q_idx[a], p_idx[a]] += c2[a]
        return h

    block_dims = [two_d, 1] + [1] * two_d
    cons = []
    sqrt2 = np.sqrt(2.0)
    none_tail = [None] * two_d
    for k in range(d):
        for j in range(d):
            cons.append((
                tuple([basis_mat(sym_index[k, d + j]), None] + none_tail),
                sqrt2 * float(np.real(tm[k, j])),
            ))
    for k in range(d):
        for j in range(d):
            cons.append((
                tuple([basis_mat(asym_index[k, d + j]), None] + none_tail),
                sqrt2 * float(np.imag(tm[k, j])),
            ))
    for i in range(two_d):
        e = np.zeros((two_d, two_d), dtype=np.complex128)
        e[i, i] = 1.0
        tail = [None] * two_d
        tail[i] = np.array([[1.0]], dtype=np.complex128)
        cons.append((tuple([e, -np.array([[1.0]], dtype=np.complex128)] + tail), 0.0))

    objective = tuple(
        [np.zeros((two_d, two_d), dtype=np.complex128),
         np.array([[-1.0]], dtype=np.complex128)] + [None] * two_d
    )
    problem = sdpsolve.SdpProblem(
        block_dims=tuple(block_dims), objective=objective, constraints=tuple(cons)
    )
    c0 = float(np.linalg.norm(tm, 2)) + 1.0
    start = tuple(
        [np.block([[c0 * np.eye(d), tm], [dagger(tm), c0 * np.eye(d)]]),
         np.array([[c0 + 1.0]], dtype=np.complex128)]
        + [np.array([[1.0]], dtype=np.complex128)] * two_d
    )
    sol = sdpsolve.solve(problem, start=start)
    if sol.status != "optimal":
        raise SolverError(f"multiplier-norm program did not converge: {sol.status}")
    value = max(0.0, -sol.primal)
    g = sol.blocks[0]
    grad = sqrt2 * (
        sol.y[:d * d].reshape(d, d) + 1j * sol.y[d * d:2 * d * d].reshape(d, d)
    )
    return MultiplierNormResult(
        value=value,
        p_block=g[:d, :d],
        q_block=g[d:, d:],
        grad=grad,
        solution=sol,
    )


# ---------------------------------------------------------------------------
# Gram factorizations
# ---------------------------------------------------------------------------

def gram_factorize(s, psd: bool = True):
    """Vectors realizing s_kj as inner products.

    PSD case: returns ξ_1..ξ_d (columns of the PSD square root) with
    <ξ_k|ξ_j> = s_kj; unit diagonal gives unit vectors.  Non-PSD case:
    returns (ξ, η) extracted from the optimal block of the multiplier-norm
    SDP, realizing the minimal max‖ξ‖·max‖η‖ factorization up to solver
    accuracy (~1e-7).
    """
    sm = _smat(s)
    d = sm.shape[0]
    if psd:
        if not psd_check(sm, PSD_TOL):
            raise StructureError("gram_factorize(psd=True) requires a PSD matrix")
        evals, vecs = np.linalg.eigh((sm + dagger(sm)) / 2.0)
        root = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ dagger(vecs)
        return [root[:, k] for k in range(d)]
    res = multiplier_norm(sm)
    g = np.block([
        [res.p_block, sm],
        [dagger(sm), res.q_block],
    ])
    evals, vecs = np.linalg.eigh((g + dagger(g)) / 2.0)
    f = (np.sqrt(np.clip(evals, 0.0, None))[:, None] * dagger(vecs))
    xis = [f[:, k] for k in range(d)]
    etas = [f[:, d + j] for j in range(d)]
    return xis, etas


def verify_gram_factorization(s, xis, etas=None, atol: float = 1e-8) -> bool:
    """Check that <ξ_k|η_j> reproduces s_kj entrywise within ``atol``."""
    sm = _smat(s)
    if etas is None:
        etas = xis
    gram = np.array([[np.vdot(x, e) for e in etas] for x in xis])
    return bool(np.max(np.abs(gram - sm)) <= atol)
