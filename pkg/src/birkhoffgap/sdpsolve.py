"""A small dense semidefinite-programming solver and the channel-distance
programs built on it.

The solver handles problems of the form

    maximize    sum_b <C_b, Y_b>
    subject to  sum_b <A_ib, Y_b> = rhs_i,   Y_b >= 0 (PSD),

with dense complex Hermitian blocks, using a primal-dual interior-point
iteration with Nesterov-Todd scaling and an adaptive centering parameter.
Hermitian blocks are handled natively (no real embedding): all scaling,
Cholesky and eigenvalue computations run over the complex field.

Hermitian matrices are flattened to real coordinate vectors in the
orthonormal basis {e_pp} ∪ {(e_pq+e_qp)/√2} ∪ {i(e_pq−e_qp)/√2}, so the
Schur complement system is real symmetric positive definite throughout.

The channel-distance program (``diamond_distance``) follows the standard
primal form

    maximize 2 Tr(J X)   s.t.   0 <= X <= I ⊗ rho,  Tr rho = 1,  rho >= 0,

where J is the UNNORMALIZED Choi matrix of the difference of the two
channels (output factor first), so the optimal value is the diamond-norm
distance in [0, 2].  Its Schur complement is assembled by a structured
O(n^4) routine (``_DiamondConstraints``) rather than per-constraint
products; a generic dense path (``_DenseConstraints``) serves every other
program and the cross-check tests.

Determinism: no randomization anywhere; identical inputs produce identical
iterates.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None

from .channels import KrausChannel, choi_of_difference
from .errors import DimensionError, ParameterError, PreconditionError, SolverError, StructureError
from .matcore import DensityOperator, as_matrix, dagger, herm_deviation

DEFAULT_GAP_TOL = 1e-6
DEFAULT_FEAS_TOL = 1e-7
DEFAULT_MAX_ITERATIONS = 200
STEP_FRACTION = 0.98


# ---------------------------------------------------------------------------
# Hermitian coordinate bases
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _herm_basis_index(n: int):
    """Index arrays describing the orthonormal Hermitian basis of C^{n x n}.

    Returns (P, Q, C1, C2, sym_index, asym_index) where basis element a is
    C1[a]*e_{P[a],Q[a]} + C2[a]*e_{Q[a],P[a]} and sym_index/asym_index map an
    ordered pair (p, q), p < q, to the basis position of its sym/asym element.
    """
    iu = np.triu_indices(n, 1)
    t = iu[0].size
    P = np.concatenate([np.arange(n), iu[0], iu[0]])
    Q = np.concatenate([np.arange(n), iu[1], iu[1]])
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    C1 = np.concatenate([
        np.ones(n, dtype=np.complex128),
        np.full(t, inv_sqrt2, dtype=np.complex128),
        np.full(t, 1j * inv_sqrt2, dtype=np.complex128),
    ])
    C2 = np.concatenate([
        np.zeros(n, dtype=np.complex128),
        np.full(t, inv_sqrt2, dtype=np.complex128),
        np.full(t, -1j * inv_sqrt2, dtype=np.complex128),
    ])
    sym_index = np.full((n, n), -1, dtype=np.intp)
    asym_index = np.full((n, n), -1, dtype=np.intp)
    sym_index[iu] = n + np.arange(t)
    asym_index[iu] = n + t + np.arange(t)
    return P, Q, C1, C2, sym_index, asym_index


@lru_cache(maxsize=None)
def _triu_cache(n: int):
    iu = np.triu_indices(n, 1)
    return iu[0], iu[1]


def hvec(m: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the orthonormal basis."""
    n = m.shape[0]
    if n == 1:
        return np.array([m[0, 0].real])
    r, c = _triu_cache(n)
    sqrt2 = np.sqrt(2.0)
    upper = m[r, c]
    return np.concatenate([
        np.real(np.diag(m)),
        sqrt2 * np.real(upper),
        sqrt2 * np.imag(upper),
    ])


def unhvec(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`hvec`."""
    if n == 1:
        return np.array([[v[0]]], dtype=np.complex128)
    r, c = _triu_cache(n)
    t = r.size
    m = np.zeros((n, n), dtype=np.complex128)
    np.fill_diagonal(m, v[:n])
    upper = (v[n:n + t] + 1j * v[n + t:n + 2 * t]) / np.sqrt(2.0)
    m[r, c] = upper
    m[c, r] = np.conj(upper)
    return m


@lru_cache(maxsize=None)
def _herm_basis_sparse(n: int):
    """Sparse basis-change T (n^2 x n^2): row a holds the e_pq coefficients
    of the Hermitian basis element H_a."""
    from scipy.sparse import csr_matrix

    P, Q, C1, C2, _, _ = _herm_basis_index(n)
    m = n * n
    rows, cols, data = [], [], []
    for a in range(m):
        rows.append(a)
        cols.append(P[a] * n + Q[a])
        data.append(C1[a])
        if C2[a] != 0:
            rows.append(a)
            cols.append(Q[a] * n + P[a])
            data.append(C2[a])
    t = csr_matrix((data, (rows, cols)), shape=(m, m), dtype=np.complex128)
    return t, t.conj().tocsr()


def herm_congruence_matrix(w: np.ndarray) -> np.ndarray:
    """Matrix of H -> W H W in hvec coordinates: K[a, b] = <H_a, W H_b W>.

    Uses the closed form <e_pq, W e_rs W> = W[p, r] * W[s, q]; cost O(n^4).
    PSD whenever W is PSD.
    """
    n = w.shape[0]
    if n == 1:
        return np.array([[np.real(w[0, 0]) ** 2]])
    t, t_conj = _herm_basis_sparse(n)
    # G[(p,q),(r,s)] = W[p,r] * W[s,q]
    g = (w[:, None, :, None] * w.T[None, :, None, :]).reshape(n * n, n * n)
    a1 = t_conj @ g                     # (m, n^2)
    k = np.real((t @ a1.T.copy()).T)    # a1 @ t.T via sparse-from-left
    return (k + k.T) / 2.0


# ---------------------------------------------------------------------------
# Problem containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SdpProblem:
    """maximize sum_b <objective_b, Y_b> over PSD blocks Y_b subject to the
    listed equality constraints (per-block Hermitian coefficients, real rhs).

    A ``None`` coefficient stands for a zero block.
    """

    block_dims: tuple
    objective: tuple
    constraints: tuple  # of (tuple of Optional[ndarray], float)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if any(d <= 0 for d in dims):
            raise DimensionError("block dimensions must be positive")
        obj = []
        for d, c in zip(dims, self.objective, strict=True):
            cm = np.zeros((d, d), dtype=np.complex128) if c is None else as_matrix(c)
            if cm.shape != (d, d):
                raise DimensionError("objective block shape mismatch")
            if herm_deviation(cm) > 1e-12:
                raise StructureError("objective blocks must be Hermitian within 1e-12")
            obj.append(cm)
        cons = []
        for coeffs, rhs in self.constraints:
            row = []
            for d, a in zip(dims, coeffs, strict=True):
                if a is None:
                    row.append(None)
                    continue
                am = as_matrix(a)
                if am.shape != (d, d):
                    raise DimensionError("constraint block shape mismatch")
                if herm_deviation(am) > 1e-12:
                    raise StructureError("constraint blocks must be Hermitian within 1e-12")
                row.append(am)
            cons.append((tuple(row), float(rhs)))
        total = sum(d * d for d in dims)
        if len(cons) > total:
            raise StructureError("more constraints than total squared block dimension")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "objective", tuple(obj))
        object.__setattr__(self, "constraints", tuple(cons))


@dataclass
class SdpSolution:
    status: str  # optimal | infeasible | max_iterations
    primal: float
    dual: float
    blocks: tuple
    y: np.ndarray
    gap: float
    iterations: int
    feas_primal: float
    feas_dual: float

    def diagnostics(self) -> dict:
        return {
            "status": self.status,
            "primal": self.primal,
            "dual": self.dual,
            "gap": self.gap,
            "iterations": self.iterations,
            "feas_primal": self.feas_primal,
            "feas_dual": self.feas_dual,
        }


# ---------------------------------------------------------------------------
# Constraint operators
# ---------------------------------------------------------------------------

class _DenseConstraints:
    """Generic constraint operator backed by an explicit real matrix over
    hvec coordinates."""

    def __init__(self, block_dims, constraints):
        self.block_dims = tuple(block_dims)
        self.m = len(constraints)
        self._slices = []
        off = 0
        for d in self.block_dims:
            self._slices.append(slice(off, off + d * d))
            off += d * d
        self.total = off
        amat = np.zeros((self.m, self.total))
        rhs = np.zeros(self.m)
        for i, (coeffs, r) in enumerate(constraints):
            rhs[i] = r
            for b, a in enumerate(coeffs):
                if a is not None:
                    amat[i, self._slices[b]] = hvec(a)
        self.amat = amat
        self.rhs = rhs

    def apply(self, blocks) -> np.ndarray:
        v = np.concatenate([hvec(y) for y in blocks])
        return self.amat @ v

    def adjoint(self, y) -> list:
        v = self.amat.T @ y
        return [
            unhvec(v[s], d) for s, d in zip(self._slices, self.block_dims)
        ]

    def schur_complement(self, ws) -> np.ndarray:
        m = np.zeros((self.m, self.m))
        for s, w in zip(self._slices, ws):
            a_b = self.amat[:, s]
            if not a_b.any():
                continue
            k_b = herm_congruence_matrix(w)
            m += a_b @ k_b @ a_b.T
        return m


class _DiamondConstraints:
    """Structured constraints of the channel-distance program.

    Blocks are (rho: d_in, X: D, S: D) with D = d_out*d_in; constraints are
    Tr rho = 1 followed by X + S - I ⊗ rho = 0 expressed in the Hermitian
    basis of the D-dimensional space.  The Schur complement is

        M = [[Tr W_rho^2,  -hvec(I ⊗ W_rho^2)^T            ],
             [   ...    ,  K(W_X) + K(W_S) + Λ K(W_rho) Λ^T]]

    with Λ the 0/1 lift of the input-space Hermitian basis into the
    output-block-diagonal positions of the D-space basis.
    """

    def __init__(self, d_out: int, d_in: int):
        self.d_out = d_out
        self.d_in = d_in
        self.D = d_out * d_in
        self.block_dims = (d_in, self.D, self.D)
        self.m = self.D * self.D + 1
        self.rhs = np.zeros(self.m)
        self.rhs[0] = 1.0
        # lift index map: big_index[k, small_a] in the D-space basis
        Ps, Qs, _, _, _, _ = _herm_basis_index(d_in)
        _, _, _, _, sym_big, asym_big = _herm_basis_index(self.D)
        n_small = d_in * d_in
        lift = np.zeros((d_out, n_small), dtype=np.intp)
        for k in range(d_out):
            for a in range(n_small):
                p, q = Ps[a] + k * d_in, Qs[a] + k * d_in
                if a < d_in:
                    lift[k, a] = p  # diagonal element index equals its position
                elif a < d_in + (d_in * (d_in - 1)) // 2:
                    lift[k, a] = sym_big[p, q]
                else:
                    lift[k, a] = asym_big[p, q]
        self._lift = lift

    def _trace_out(self, u: np.ndarray) -> np.ndarray:
        t = u.reshape(self.d_out, self.d_in, self.d_out, self.d_in)
        return np.einsum("kikj->ij", t)

    def apply(self, blocks) -> np.ndarray:
        rho, x, s = blocks
        r = x + s - np.kron(np.eye(self.d_out), rho)
        return np.concatenate([[np.real(np.trace(rho))], hvec(r)])

    def adjoint(self, y) -> list:
        u = unhvec(y[1:], self.D)
        rho_part = y[0] * np.eye(self.d_in) - self._trace_out(u)
        return [rho_part, u, u]

    def schur_complement(self, ws) -> np.ndarray:
        w_rho, w_x, w_s = ws
        m = np.zeros((self.m, self.m))
        core = herm_congruence_matrix(w_x) + herm_congruence_matrix(w_s)
        k_small = herm_congruence_matrix(w_rho)
        for k1 in range(self.d_out):
            for k2 in range(self.d_out):
                m[np.ix_(1 + self._lift[k1], 1 + self._lift[k2])] += k_small
        m[1:, 1:] += core
        w2 = w_rho @ w_rho
        border = -hvec(np.kron(np.eye(self.d_out), w2))
        m[0, 0] = np.real(np.trace(w2))
        m[0, 1:] = border
        m[1:, 0] = border
        return m

    def dense_constraints(self):
        """Explicit constraint list (for dumps and cross-check tests)."""
        D, d_in, d_out = self.D, self.d_in, self.d_out
        P, Q, C1, C2, _, _ = _herm_basis_index(D)
        rows = [((np.eye(d_in), None, None), 1.0)]
        for a in range(D * D):
            h = np.zeros((D, D), dtype=np.complex128)
            h[P[a], Q[a]] += C1[a]
            h[Q[a], P[a]] += C2[a]
            rows.append(((-self._trace_out(h), h, h), 0.0))
        return rows


# ---------------------------------------------------------------------------
# Interior-point core
# ---------------------------------------------------------------------------

def _chol(m: np.ndarray) -> np.ndarray:
    if m.shape[0] == 1:
        v = np.real(m[0, 0])
        if v <= 0:
            raise np.linalg.LinAlgError("non-positive scalar block")
        return np.array([[np.sqrt(v)]], dtype=np.complex128)
    return np.linalg.cholesky((m + dagger(m)) / 2.0)


def _nt_scaling(y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """The unique PSD W with W Z W = Y."""
    if y.shape[0] == 1:
        return np.array([[np.sqrt(np.real(y[0, 0]) / np.real(z[0, 0]))]],
                        dtype=np.complex128)
    lz = _chol(z)
    m1 = dagger(lz) @ y @ lz
    evals, q = np.linalg.eigh((m1 + dagger(m1)) / 2.0)
    evals = np.clip(evals, 1e-300, None)
    # W = Lz^{-dag} Q D^{1/2} Q^dag Lz^{-1}
    inner = (q * np.sqrt(evals)) @ dagger(q)
    t1 = solve_triangular(lz, inner, lower=True, trans="C", check_finite=False)
    w = solve_triangular(lz, dagger(t1), lower=True, trans="C", check_finite=False)
    return (w + dagger(w)) / 2.0


def _max_step(y: np.ndarray, dy: np.ndarray) -> float:
    """Largest alpha with Y + alpha*dY PSD (inf if unbounded)."""
    if y.shape[0] == 1:
        d = np.real(dy[0, 0])
        if d >= 0:
            return np.inf
        return -np.real(y[0, 0]) / d
    l = _chol(y)
    t1 = solve_triangular(l, dy, lower=True, check_finite=False)
    a = dagger(solve_triangular(l, dagger(t1), lower=True, check_finite=False))
    a = (a + dagger(a)) / 2.0
    lam_min = float(np.linalg.eigvalsh(a).min())
    if lam_min >= -1e-14:
        return np.inf
    return -1.0 / lam_min


def _solve_ipm(block_dims, c_blocks, op, b, start=None, *,
               max_iterations=DEFAULT_MAX_ITERATIONS, gap_tol=DEFAULT_GAP_TOL,
               feas_tol=DEFAULT_FEAS_TOL) -> SdpSolution:
    """Core iteration; maximization form with objective blocks ``c_blocks``."""
    # BLAS threading overhead dwarfs the work on small blocks; serialize there
    if threadpool_limits is not None and max(block_dims) <= 24:
        with threadpool_limits(limits=1):
            return _solve_ipm_inner(
                block_dims, c_blocks, op, b, start,
                max_iterations=max_iterations, gap_tol=gap_tol, feas_tol=feas_tol,
            )
    return _solve_ipm_inner(
        block_dims, c_blocks, op, b, start,
        max_iterations=max_iterations, gap_tol=gap_tol, feas_tol=feas_tol,
    )


def _solve_ipm_inner(block_dims, c_blocks, op, b, start=None, *,
                     max_iterations=DEFAULT_MAX_ITERATIONS, gap_tol=DEFAULT_GAP_TOL,
                     feas_tol=DEFAULT_FEAS_TOL) -> SdpSolution:
    dims = list(block_dims)
    chat = [-c for c in c_blocks]  # internal minimization form
    nu = sum(dims)
    scale_b = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    scale_c = max(1.0, max(float(np.max(np.abs(c))) if c.size else 0.0 for c in chat))

    if start is not None:
        ys = [np.array(m, dtype=np.complex128) for m in start]
    else:
        ys = [scale_b * np.eye(d, dtype=np.complex128) for d in dims]
    zs = [scale_c * np.eye(d, dtype=np.complex128) for d in dims]
    yvec = np.zeros(op.m)

    norm_b = 1.0 + float(np.linalg.norm(b))
    norm_c = 1.0 + float(np.sqrt(sum(np.linalg.norm(c) ** 2 for c in chat)))

    status = "max_iterations"
    it = 0
    pobj = dobj = gap = feas_p = feas_d = np.inf
    for it in range(1, max_iterations + 1):
        rp = b - op.apply(ys)
        adj = op.adjoint(yvec)
        rd = [ch - a - z for ch, a, z in zip(chat, adj, zs)]
        pobj = float(np.real(sum(np.vdot(ch, y) for ch, y in zip(chat, ys))))
        dobj = float(b @ yvec)
        mu = float(np.real(sum(np.vdot(y, z) for y, z in zip(ys, zs)))) / nu
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        feas_p = float(np.linalg.norm(rp)) / norm_b
        feas_d = float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rd))) / norm_c
        if gap <= gap_tol and feas_p <= feas_tol and feas_d <= feas_tol:
            status = "optimal"
            break
        if dobj > 1e9 * scale_b * scale_c and feas_p > 1e2 * feas_tol:
            status = "infeasible"
            break

        ws = [_nt_scaling(y, z) for y, z in zip(ys, zs)]
        m = op.schur_complement(ws)
        jitter = 1e-14 * max(1.0, float(np.trace(m)) / op.m)
        for attempt in range(4):
            try:
                cf = cho_factor(m + jitter * np.eye(op.m), lower=True)
                break
            except np.linalg.LinAlgError:
                jitter *= 1e3
        else:  # pragma: no cover - defensive
            status = "max_iterations"
            break

        z_inv = []
        for z in zs:
            if z.shape[0] == 1:
                z_inv.append(np.array([[1.0 / np.real(z[0, 0])]], dtype=np.complex128))
                continue
            lz = _chol(z)
            inv = solve_triangular(lz, np.eye(z.shape[0], dtype=np.complex128),
                                   lower=True, check_finite=False)
            z_inv.append(dagger(inv) @ inv)

        def newton(nu_target):
            rc = [nu_target * zi - y for zi, y in zip(z_inv, ys)]
            wrw = [w @ r @ w for w, r in zip(ws, rd)]
            rhs = rp - op.apply(rc) + op.apply(wrw)
            dy = cho_solve(cf, rhs)
            dadj = op.adjoint(dy)
            dz = [r - da for r, da in zip(rd, dadj)]
            dyb = [rc_b - w @ dz_b @ w for rc_b, w, dz_b in zip(rc, ws, dz)]
            dyb = [(d + dagger(d)) / 2.0 for d in dyb]
            dz = [(d + dagger(d)) / 2.0 for d in dz]
            return dy, dyb, dz

        # affine probe -> centering weight
        _, dyb_a, dz_a = newton(0.0)
        ap = min((_max_step(y, d) for y, d in zip(ys, dyb_a)), default=np.inf)
        ad = min((_max_step(z, d) for z, d in zip(zs, dz_a)), default=np.inf)
        ap = min(1.0, STEP_FRACTION * ap)
        ad = min(1.0, STEP_FRACTION * ad)
        mu_aff = float(np.real(sum(
            np.vdot(y + ap * dy_b, z + ad * dz_b)
            for y, dy_b, z, dz_b in zip(ys, dyb_a, zs, dz_a)
        ))) / nu
        sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu) ** 3))

        dy, dyb, dz = newton(sigma * mu)
        ap = min((_max_step(y, d) for y, d in zip(ys, dyb)), default=np.inf)
        ad = min((_max_step(z, d) for z, d in zip(zs, dz)), default=np.inf)
        ap = min(1.0, STEP_FRACTION * ap)
        ad = min(1.0, STEP_FRACTION * ad)
        for _ in range(30):
            ys_try = [y + ap * d for y, d in zip(ys, dyb)]
            zs_try = [z + ad * d for z, d in zip(zs, dz)]
            try:
                for t in ys_try:
                    _chol(t)
                for t in zs_try:
                    _chol(t)
                break
            except np.linalg.LinAlgError:
                ap *= 0.8
                ad *= 0.8
        ys = [(t + dagger(t)) / 2.0 for t in ys_try]
        zs = [(t + dagger(t)) / 2.0 for t in zs_try]
        yvec = yvec + ad * dy

    return SdpSolution(
        status=status,
        primal=-pobj,
        dual=-dobj,
        blocks=tuple(ys),
        y=yvec,
        gap=gap,
        iterations=it,
        feas_primal=feas_p,
        feas_dual=feas_d,
    )


def solve(problem: SdpProblem, start: Optional[Sequence[np.ndarray]] = None, *,
          max_iterations: int = DEFAULT_MAX_ITERATIONS,
          gap_tol: float = DEFAULT_GAP_TOL,
          feas_tol: float = DEFAULT_FEAS_TOL) -> SdpSolution:
    """Solve an explicit :class:`SdpProblem` (maximization form)."""
    op = _DenseConstraints(problem.block_dims, problem.constraints)
    return _solve_ipm(
        problem.block_dims, problem.objective, op, op.rhs, start,
        max_iterations=max_iterations, gap_tol=gap_tol, feas_tol=feas_tol,
    )


# ---------------------------------------------------------------------------
# Channel-distance programs
# ---------------------------------------------------------------------------

@dataclass
class DiamondResult:
    value: float
    rho: DensityOperator
    x: np.ndarray
    solution: SdpSolution = field(repr=False)


def _require_tp(ch: KrausChannel, name: str):
    if ch.flags.defect_tp > 1e-9:
        raise PreconditionError(
            f"{name} is not trace preserving (defect {ch.flags.defect_tp:.2e}); "
            "the distance program requires a difference of two quantum channels"
        )


def _diamond_setup(a: KrausChannel, b: KrausChannel):
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise DimensionError("channels must share dimensions")
    _require_tp(a, "first channel")
    _require_tp(b, "second channel")
    j = choi_of_difference(a, b)
    j = (j + dagger(j)) / 2.0
    d_in, d_out = a.dim_in, a.dim_out
    op = _DiamondConstraints(d_out, d_in)
    d = op.D
    c_blocks = (
        np.zeros((d_in, d_in), dtype=np.complex128),
        2.0 * j,
        np.zeros((d, d), dtype=np.complex128),
    )
    # analytic-center start of the slab 0 <= X <= I ⊗ (I/d): strictly feasible
    start = (
        np.eye(d_in, dtype=np.complex128) / d_in,
        np.eye(d, dtype=np.complex128) / (2.0 * d_in),
        np.eye(d, dtype=np.complex128) / (2.0 * d_in),
    )
    return j, op, c_blocks, start


def diamond_distance(a: KrausChannel, b: KrausChannel, *,
                     gap_tol: float = DEFAULT_GAP_TOL,
                     max_iterations: int = DEFAULT_MAX_ITERATIONS) -> DiamondResult:
    """Diamond-norm distance ||a - b||_diamond of two trace-preserving
    channels, with primal witnesses (rho, X); value in [0, 2]."""
    j, op, c_blocks, start = _diamond_setup(a, b)
    sol = _solve_ipm(
        op.block_dims, c_blocks, op, op.rhs, start,
        max_iterations=max_iterations, gap_tol=gap_tol,
    )
    if sol.status != "optimal":
        raise SolverError(f"diamond-norm program did not converge: {sol.status}")
    rho_raw = sol.blocks[0]
    rho_raw = (rho_raw + dagger(rho_raw)) / 2.0
    rho_raw = rho_raw / np.real(np.trace(rho_raw))
    return DiamondResult(
        value=max(0.0, sol.primal),
        rho=DensityOperator(rho_raw),
        x=sol.blocks[1],
        solution=sol,
    )


@dataclass
class DiamondCertificate:
    value: float
    y_matrix: np.ndarray
    margins: dict


def diamond_upper_certificate(a: KrausChannel, b: KrausChannel) -> DiamondCertificate:
    """A dual-feasible upper bound on the diamond distance.

    Returns (z, Y) with Y >= 2J, Y >= 0 and Tr_out(Y) <= z I, which anyone
    can re-verify independently of the solver (see
    :func:`verify_diamond_certificate`); z >= ||a-b||_diamond always.
    """
    j, op, c_blocks, start = _diamond_setup(a, b)
    sol = _solve_ipm(op.block_dims, c_blocks, op, op.rhs, start)
    if sol.status != "optimal":
        raise SolverError(f"diamond-norm program did not converge: {sol.status}")
    u = unhvec(sol.y[1:], op.D)
    y_mat = -(u + dagger(u)) / 2.0
    lam1 = float(np.linalg.eigvalsh(y_mat).min())
    lam2 = float(np.linalg.eigvalsh(y_mat - 2.0 * j).min())
    eps = max(0.0, -lam1, -lam2) + 1e-13
    y_mat = y_mat + eps * np.eye(op.D)
    tr_out = np.einsum("kikj->ij", y_mat.reshape(op.d_out, op.d_in, op.d_out, op.d_in))
    value = float(np.linalg.eigvalsh((tr_out + dagger(tr_out)) / 2.0).max())
    margins = verify_diamond_certificate(j, y_mat, value, op.d_out, op.d_in)
    return DiamondCertificate(value=value, y_matrix=y_mat, margins=margins)


def verify_diamond_certificate(j: np.ndarray, y_mat: np.ndarray, value: float,
                               d_out: int, d_in: int, tol: float = 1e-9) -> dict:
    """Check the three dual-feasibility conditions of an upper certificate."""
    y_mat = as_matrix(y_mat)
    lam_pos = float(np.linalg.eigvalsh((y_mat + dagger(y_mat)) / 2.0).min())
    diffm = y_mat - 2.0 * as_matrix(j)
    lam_dom = float(np.linalg.eigvalsh((diffm + dagger(diffm)) / 2.0).min())
    tr_out = np.einsum("kikj->ij", y_mat.reshape(d_out, d_in, d_out, d_in))
    lam_cap = value - float(np.linalg.eigvalsh((tr_out + dagger(tr_out)) / 2.0).max())
    return {
        "psd_margin": lam_pos,
        "dominates_choi_margin": lam_dom,
        "trace_cap_margin": lam_cap,
        "ok": lam_pos >= -tol and lam_dom >= -tol and lam_cap >= -tol,
    }


@dataclass
class TraceNormResult:
    value: float
    projector: np.ndarray
    solution: SdpSolution = field(repr=False)


def trace_norm_max(y: np.ndarray) -> TraceNormResult:
    """||Y||_1 = max_{0<=P<=I} 2 Tr(P Y) for traceless Hermitian Y, via the
    SDP; the returned projector is the spectral projection extracted from
    the optimal P."""
    ym = as_matrix(y, "Y")
    if ym.shape[0] != ym.shape[1]:
        raise DimensionError("Y must be square")
    if herm_deviation(ym) > 1e-10:
        raise PreconditionError("Y must be Hermitian within 1e-10")
    if abs(np.trace(ym)) > 1e-10:
        raise PreconditionError("Y must be traceless within 1e-10")
    n = ym.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    p_big, q_big, c1, c2, _, _ = _herm_basis_index(n)
    cons = []
    for a in range(n * n):
        h = np.zeros((n, n), dtype=np.complex128)
        h[p_big[a], q_big[a]] += c1[a]
        h[q_big[a], p_big[a]] += c2[a]
        cons.append(((h, h), float(np.real(np.trace(h)))))
    problem = SdpProblem(
        block_dims=(n, n),
        objective=(2.0 * ym, None),
        constraints=tuple(cons),
    )
    sol = solve(problem, start=(eye / 2.0, eye / 2.0))
    if sol.status != "optimal":
        raise SolverError(f"trace-norm program did not converge: {sol.status}")
    evals, vecs = np.linalg.eigh((sol.blocks[0] + dagger(sol.blocks[0])) / 2.0)
    keep = evals > 0.5
    proj = (vecs[:, keep]) @ dagger(vecs[:, keep])
    return TraceNormResult(value=max(0.0, sol.primal), projector=proj, solution=sol)


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------

def _fmt_matrix(m: np.ndarray) -> str:
    lines = []
    for row in m:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines)


def dump_problem(problem: SdpProblem, stream) -> None:
    """Write the assembled program in a simple text format (one block per
    section, row-major coefficients) for external cross-checking."""
    stream.write("sdp-dump 1\n")
    stream.write(f"blocks {len(problem.block_dims)}\n")
    stream.write("dims " + " ".join(str(d) for d in problem.block_dims) + "\n")
    stream.write("objective\n")
    for i, c in enumerate(problem.objective):
        stream.write(f"block {i}\n")
        stream.write(_fmt_matrix(c) + "\n")
    stream.write(f"constraints {len(problem.constraints)}\n")
    for j, (coeffs, rhs) in enumerate(problem.constraints):
        stream.write(f"constraint {j} rhs {rhs:.17g}\n")
        for i, a in enumerate(coeffs):
            if a is None:
                continue
            stream.write(f"block {i}\n")
            stream.write(_fmt_matrix(a) + "\n")
    stream.write("end\n")


def diamond_problem_dense(a: KrausChannel, b: KrausChannel) -> SdpProblem:
    """The channel-distance program as an explicit SdpProblem (small dims
    only; used for dumping and for cross-checking the structured path)."""
    j, op, c_blocks, _ = _diamond_setup(a, b)
    return SdpProblem(
        block_dims=op.block_dims,
        objective=c_blocks,
        constraints=tuple(op.dense_constraints()),
    )
