"""Distance bounds between a unital channel and the mixed-unitary channels.

The central quantity is the span gap

    c_phi(Φ) = min over L in span{A_k} of Tr(|L| - I)^2 / d,

a lower bound on the diamond distance from Φ to the convex hull of unitary
channels; it is zero exactly when the Kraus span contains a unitary, and it
survives tensoring with any Schur channel (so a Schur channel with positive
span gap violates the asymptotic Birkhoff property at every tensor power).

For Schur channels the module also certifies upper bounds on the distance
to mixtures of diagonal-unitary conjugations (``lambda_distance_upper``)
and assembles both into a sandwich report.  The remaining operations cover
single-shot discrimination (Helstrom), majorization checks, Birkhoff
decompositions of doubly stochastic matrices, and the constructive mixture
realizing Φ(ρ) = Σ p_k U_k ρ U_k† for unital channels at a fixed input.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import qr as _qr_pivoted
from scipy.optimize import linprog, minimize

from . import schur as schurmod
from . import sdpsolve
from .channels import KrausChannel, kraus_coefficients, kraus_space_basis
from .errors import (
    DimensionError,
    ParameterError,
    PreconditionError,
    StructureError,
)
from .matcore import (
    DensityOperator,
    as_matrix,
    dagger,
    fix_global_phase,
    polar_unitary,
    schatten_norm,
)
from .schur import (
    DiagonalUnitaryMixture,
    SchurMatrix,
    is_schur_channel,
    mixture_as_channel,
    mixture_to_schur,
    multiplier_norm,
    schur_to_kraus,
    split_contraction,
)

TRACE_BOUND_FACTOR = 1.0 + np.sqrt(2.0)  # compact search region Tr|L| <= (1+sqrt 2) d


def _max_threads() -> int:
    try:
        return max(1, int(os.environ.get("CHANNEL_GAUGE_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Span gap  c_phi
# ---------------------------------------------------------------------------

@dataclass
class CPhiResult:
    value: float
    l_matrix: np.ndarray
    coeffs: np.ndarray
    basis: list
    diagnostics: dict = field(default_factory=dict)


def cphi_objective(lam: np.ndarray, basis_stack: np.ndarray, d: int) -> float:
    """f(λ) = Σ_i (σ_i(L(λ)) - 1)^2 / d for L(λ) = Σ λ_i B_i."""
    l = np.tensordot(lam, basis_stack, axes=(0, 0))
    s = np.linalg.svd(l, compute_uv=False)
    return float(np.sum((s - 1.0) ** 2) / d)


def _value_grad(lam, basis_stack, d):
    l = np.tensordot(lam, basis_stack, axes=(0, 0))
    u, s, vh = np.linalg.svd(l)
    f = float(np.sum((s - 1.0) ** 2) / d)
    gmat = (2.0 / d) * (u * (s - 1.0)) @ vh
    g = np.einsum("kab,ab->k", np.conj(basis_stack), gmat)
    return f, g, s


def _rescaled(lam, basis_stack):
    """Exact minimization of f along the ray through λ (t* = Σσ / Σσ²)."""
    l = np.tensordot(lam, basis_stack, axes=(0, 0))
    s = np.linalg.svd(l, compute_uv=False)
    ssum, s2 = float(np.sum(s)), float(np.sum(s * s))
    if s2 <= 1e-300:
        return lam
    return lam * (ssum / s2)


def _descend(lam0, basis_stack, d, *, grad_iters=300, pattern_tol=1e-8):
    """Gradient descent with backtracking, then a pattern-search polish."""
    lam = _rescaled(np.array(lam0, dtype=np.complex128), basis_stack)
    f, g, _ = _value_grad(lam, basis_stack, d)
    step = 0.5
    for _ in range(grad_iters):
        gnorm2 = float(np.real(np.vdot(g, g)))
        if gnorm2 < 1e-24:
            break
        improved = False
        for _ in range(40):
            cand = _rescaled(lam - step * g, basis_stack)
            fc = cphi_objective(cand, basis_stack, d)
            if fc <= f - 1e-4 * step * gnorm2:
                improved = True
                break
            step *= 0.5
        if not improved or f - fc < 1e-15:
            break
        lam, f = cand, fc
        _, g, _ = _value_grad(lam, basis_stack, d)
        step = min(step * 2.0, 1.0)

    # pattern search over complex coordinate moves, batched through the SVD
    r = lam.size
    delta = 0.05
    eye = np.eye(r)
    while delta > pattern_tol:
        moves = np.concatenate([delta * eye, -delta * eye,
                                1j * delta * eye, -1j * delta * eye])
        cands = lam[None, :] + moves
        ls = np.tensordot(cands, basis_stack, axes=(1, 0))
        svals = np.linalg.svd(ls, compute_uv=False)
        fs = np.sum((svals - 1.0) ** 2, axis=1) / d
        best = int(np.argmin(fs))
        if fs[best] < f - 1e-15:
            lam = _rescaled(cands[best], basis_stack)
            f = cphi_objective(lam, basis_stack, d)
        else:
            delta *= 0.5
    return f, lam


def _canonical_key(lam):
    a = np.array(lam, dtype=np.complex128)
    nz = np.flatnonzero(np.abs(a) > 1e-12 * max(1.0, float(np.max(np.abs(a)))))
    if nz.size:
        a = a / (a[nz[0]] / abs(a[nz[0]]))
    return tuple(np.round(a.view(np.float64), 9))


def c_phi(ch: KrausChannel, *, n_starts: int = 32, seed: int = 0) -> CPhiResult:
    """Best multi-start local minimum of Tr(|L| - I)^2 / d over the Kraus span.

    The exact per-ray scale minimization keeps every iterate inside the
    compact region Tr|L| <= (1+sqrt 2) d, so the search covers the whole
    span.  Starts: ``n_starts`` seeded points on the coefficient sphere
    scaled to Tr|L|^2 = d, the pure basis directions, and the original Kraus
    operators.  Ties are broken by the lexicographically smallest
    coefficient vector after global-phase normalization.
    """
    if ch.dim_in != ch.dim_out:
        raise DimensionError("span gap requires a square channel")
    d = ch.dim_in
    basis = kraus_space_basis(ch)
    r = len(basis)
    basis_stack = np.array(basis)

    rng = np.random.default_rng(seed)
    starts = []
    for _ in range(n_starts):
        v = rng.normal(size=r) + 1j * rng.normal(size=r)
        starts.append(np.sqrt(d) * v / np.linalg.norm(v))
    for i in range(r):
        e = np.zeros(r, dtype=np.complex128)
        e[i] = np.sqrt(d)
        starts.append(e)
    for row in kraus_coefficients(ch, basis):
        nrm = np.linalg.norm(row)
        if nrm > 1e-12:
            starts.append(np.sqrt(d) * row / nrm)

    threads = _max_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: _descend(s, basis_stack, d), starts))
    else:
        results = [_descend(s, basis_stack, d) for s in starts]

    best_f, best_lam = min(results, key=lambda t: (t[0], _canonical_key(t[1])))
    l_best = np.tensordot(best_lam, basis_stack, axes=(0, 0))
    return CPhiResult(
        value=best_f,
        l_matrix=l_best,
        coeffs=best_lam,
        basis=basis,
        diagnostics={
            "n_starts": len(starts),
            "seed": seed,
            "span_rank": r,
            "threads": threads,
        },
    )


def unitary_in_span(ch: KrausChannel, tol: float) -> Optional[np.ndarray]:
    """The unitary polar factor of the span-gap minimizer when the gap is at
    most ``tol`` (i.e. a unitary lies in the Kraus span); absent otherwise."""
    res = c_phi(ch)
    if res.value > tol:
        return None
    u = polar_unitary(res.l_matrix)
    if schatten_norm(dagger(u) @ u - np.eye(ch.dim_in), np.inf) > np.sqrt(tol):
        return None
    return fix_global_phase(u)


def tensor_bound_report(phi: KrausChannel, schur_factor_dim: int, n: int, *,
                        seed: int = 0) -> float:
    """The span gap of ``phi`` as an n-independent lower bound on the
    distance from Ψ ⊗ phi^(⊗n) to the mixed-unitary channels, for any Schur
    factor Ψ of the given dimension.

    No recomputation on the tensor power is performed (the bound persists);
    the n > 1 claim requires ``phi`` itself to be a Schur channel.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if schur_factor_dim < 1:
        raise ParameterError("schur_factor_dim must be >= 1")
    if n > 1 and not phi.is_diagonal():
        raise PreconditionError(
            "the tensor-power bound requires a Schur channel (diagonal Kraus operators)"
        )
    return c_phi(phi, seed=seed).value


# ---------------------------------------------------------------------------
# Upper bound on the distance to diagonal-unitary mixtures
# ---------------------------------------------------------------------------

def _canonical_atom(u: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(u) > 0.5)
    ph = u[nz[0]] / abs(u[nz[0]]) if nz.size else 1.0
    return u / ph


def _phase_of(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    out = np.where(mag > 1e-12, v / np.where(mag > 1e-12, mag, 1.0), 1.0)
    return out.astype(np.complex128)


def _phase_sync(h: np.ndarray, u0: np.ndarray, iters: int = 25) -> np.ndarray:
    """Ascend u† H u over unit-modulus vectors by phase-projected power steps."""
    evals = np.linalg.eigvalsh(h)
    shift = max(0.0, -float(evals.min())) + 0.1 * max(1.0, float(np.abs(evals).max()))
    hp = h + shift * np.eye(h.shape[0])
    u = u0.copy()
    for _ in range(iters):
        u = _phase_of(hp @ u)
    return u


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = int(np.nonzero(cond)[0][-1])
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _ls_weights(sm: np.ndarray, atoms, w0: np.ndarray, iters: int = 400) -> np.ndarray:
    """Frobenius fit of Σ w_k u_k u_k† to S on the simplex (projected gradient)."""
    k = len(atoms)
    gram = np.abs(np.array([[np.vdot(a, b) for b in atoms] for a in atoms])) ** 2
    c = np.array([float(np.real(np.vdot(a, sm @ a))) for a in atoms])
    lip = max(float(np.linalg.eigvalsh(gram).max()), 1e-12)
    w = w0.copy()
    for _ in range(iters):
        w = _project_simplex(w - (gram @ w - c) / lip)
    return w


def _fit_joint(sm: np.ndarray, atoms0, w0: np.ndarray):
    """Joint L-BFGS fit of Σ w_k u_k u_k† to S over amplitudes and phases
    (unit-modulus atoms keep the diagonal consistent automatically)."""
    d = sm.shape[0]
    k = len(atoms0)
    x0 = np.concatenate([
        np.sqrt(np.maximum(np.asarray(w0, dtype=float), 1e-8)),
        np.concatenate([np.angle(a) for a in atoms0]),
    ])

    def qg(x):
        c = x[:k]
        us = np.exp(1j * x[k:].reshape(k, d))
        w = c * c
        r = sm - np.einsum("k,ki,kj->ij", w, us, us.conj())
        q = float(np.real(np.vdot(r, r)))
        gc = np.empty(k)
        gth = np.empty((k, d))
        for i in range(k):
            ru = r @ us[i]
            gc[i] = -4.0 * c[i] * float(np.real(np.vdot(us[i], ru)))
            gth[i] = 4.0 * w[i] * np.imag(us[i] * np.conj(ru))
        return q, np.concatenate([gc, gth.ravel()])

    res = minimize(qg, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 1500, "ftol": 1e-22, "gtol": 1e-16})
    c = res.x[:k]
    w = c * c
    total = w.sum()
    w = w / total if total > 0 else np.full(k, 1.0 / k)
    return w, [u for u in np.exp(1j * res.x[k:].reshape(k, d))], float(res.fun)


def _subspace_phase_atoms(t_res: np.ndarray, frame: np.ndarray):
    """Unit-modulus vectors in the column span of ``frame`` maximizing
    u† T u, from the diagonally constrained SDP relaxation (candidates are
    rank-one projections of the optimal moment matrix)."""
    d, r = frame.shape
    h = frame.conj().T @ ((t_res + dagger(t_res)) / 2.0) @ frame
    rows = np.array([sdpsolve.hvec(np.outer(frame[i].conj(), frame[i])) for i in range(d)])
    rank = int(np.linalg.matrix_rank(rows, tol=1e-10))
    _, _, piv = _qr_pivoted(rows.T, pivoting=True)
    idx = sorted(piv[:rank])
    cons = tuple(((np.outer(frame[i].conj(), frame[i]),), 1.0) for i in idx)
    problem = sdpsolve.SdpProblem(
        block_dims=(r,), objective=((h + dagger(h)) / 2.0,), constraints=cons
    )
    try:
        sol = sdpsolve.solve(problem)
    except Exception:
        return []
    if sol.status != "optimal":
        return []
    m = (sol.blocks[0] + dagger(sol.blocks[0])) / 2.0
    diag = np.real(np.einsum("ia,ab,ib->i", frame, m, frame.conj()))
    if np.max(np.abs(diag - 1.0)) > 1e-4:  # dropped constraints inconsistent
        return []
    evals, vecs = np.linalg.eigh(m)
    out = [_phase_of(frame @ vecs[:, -1])]
    if evals.size > 1 and evals[-2] > 1e-8:
        v1 = vecs[:, -1] * np.sqrt(max(evals[-1], 0.0))
        v2 = vecs[:, -2] * np.sqrt(evals[-2])
        out.append(_phase_of(frame @ (v1 + v2)))
        out.append(_phase_of(frame @ (v1 - v2)))
    return out


@dataclass
class LambdaUpperResult:
    value: float
    mixture: DiagonalUnitaryMixture
    diagnostics: dict = field(default_factory=dict)


def _mixture_gap_oracle(sm: np.ndarray, atoms, w: np.ndarray):
    """Diamond value of Φ_S minus the weighted mixture, with a subgradient in
    the weights (Schur-multiplier norm; equals the diamond norm here)."""
    t = sm - sum(wk * np.outer(u, np.conj(u)) for wk, u in zip(w, atoms))
    res = multiplier_norm(t)
    grad_t = (res.grad + dagger(res.grad)) / 2.0
    sub = np.array([-float(np.real(np.vdot(u, grad_t @ u))) for u in atoms])
    return res.value, sub, t, grad_t


def _kelley_weights(sm, atoms, w0, *, max_calls: int, tol: float):
    """Cutting-plane (LP) descent of the mixture gap over the weight simplex."""
    k = len(atoms)
    cuts = []
    w = w0.copy()
    best_w, best_v = w0.copy(), np.inf
    best_t = best_g = None
    lower = -np.inf
    calls = 0
    while calls < max_calls:
        v, g, t, gt = _mixture_gap_oracle(sm, atoms, w)
        calls += 1
        cuts.append((v - float(g @ w), g))
        if v < best_v:
            best_v, best_w, best_t, best_g = v, w.copy(), t, gt
        a_ub = np.array([np.concatenate([g, [-1.0]]) for _, g in cuts])
        b_ub = np.array([-c0 for c0, _ in cuts])
        res = linprog(
            c=np.concatenate([np.zeros(k), [1.0]]),
            A_ub=a_ub, b_ub=b_ub,
            A_eq=np.concatenate([np.ones(k), [0.0]])[None, :], b_eq=[1.0],
            bounds=[(0.0, 1.0)] * k + [(None, None)],
            method="highs",
        )
        if not res.success:
            break
        lower = max(lower, float(res.x[-1]))
        w = np.maximum(res.x[:k], 0.0)
        s = w.sum()
        w = w / s if s > 0 else w0.copy()
        if best_v - lower <= tol:
            break
    return best_w, best_v, best_t, best_g, calls


def lambda_distance_upper(s, budget: int = 12, *, seed: int = 0,
                          tol: float = 1e-5) -> LambdaUpperResult:
    """Certified upper bound on the diamond distance from a Schur channel to
    mixtures of diagonal-unitary conjugations.

    Alternates weight optimization over a growing family of diagonal
    unitaries (cutting-plane LP with the multiplier-norm SDP as the
    value/subgradient oracle, plus a Frobenius least-squares polish) with
    atom discovery: joint amplitude/phase fits of small mixtures to the
    target (multi-start L-BFGS), unit-modulus vectors in the residual's
    range from a diagonally constrained SDP relaxation, and phase-rounded
    residual eigenvectors.  The returned mixture certifies the bound: the
    value is the diamond distance between Φ_S and the mixture, recomputed
    by the full channel-distance program.
    """
    if budget < 1:
        raise ParameterError("budget must be >= 1")
    sm = schurmod._smat(s)
    if not is_schur_channel(sm):
        raise PreconditionError("lambda_distance_upper requires a Schur channel")
    d = sm.shape[0]
    rng = np.random.default_rng(seed)

    atoms = [np.ones(d, dtype=np.complex128)]

    def add_atom(u):
        cand = _canonical_atom(_phase_of(u))
        for a in atoms:
            if np.max(np.abs(a - cand)) < 1e-10:
                return False
        atoms.append(cand)
        return True

    if d == 2:
        v, w2 = split_contraction(complex(np.conj(sm[0, 1])))
        add_atom(np.array([1.0, v]))
        add_atom(np.array([1.0, w2]))
    s_evals, s_vecs = np.linalg.eigh((sm + dagger(sm)) / 2.0)
    for i in range(d):
        add_atom(s_vecs[:, d - 1 - i])
    for a in schur_to_kraus(sm).kraus:
        diagv = np.diag(a)
        va, wa = split_contraction(np.clip(np.abs(diagv), 0, 1) * np.exp(1j * np.angle(diagv)))
        add_atom(va)
        add_atom(wa)
    for _ in range(2):
        add_atom(np.exp(2j * np.pi * rng.random(d)))

    rank = int(np.sum(s_evals > 1e-10))
    frame = s_vecs[:, d - rank:][:, ::-1]

    oracle_calls = 0
    fit_restarts = 0
    w = np.zeros(len(atoms))
    w[0] = 1.0
    best_v, best_w, best_atoms = np.inf, w.copy(), list(atoms)
    rounds = 0
    for rounds in range(1, budget + 1):
        w_pad = np.zeros(len(atoms))
        w_pad[:best_w.size] = best_w
        w_ls = _ls_weights(sm, atoms, w_pad)
        w_opt, v_opt, t_res, g_res, calls = _kelley_weights(
            sm, atoms, w_ls, max_calls=max(6, 30 // budget + 6), tol=tol,
        )
        oracle_calls += calls
        if v_opt < best_v - 1e-12:
            best_v, best_w, best_atoms = v_opt, w_opt.copy(), list(atoms)
        if best_v <= tol:
            break

        grew = False
        # joint mixture fits: exact-membership detector and atom source for the LP
        best_fit = np.inf
        for _ in range(4):
            fit_restarts += 1
            kf = min(rank + fit_restarts % 3, 2 * d)
            atoms0 = [np.exp(2j * np.pi * rng.random(d)) for _ in range(kf)]
            wf, af, qf = _fit_joint(sm, atoms0, np.full(kf, 1.0 / kf))
            if qf < best_fit:
                best_fit = qf
                for u in af:
                    grew |= add_atom(u)
            if qf < 1e-22:
                break
        if t_res is not None:
            tev, tvec = np.linalg.eigh((t_res + dagger(t_res)) / 2.0)
            lead = tvec[:, int(np.argmax(np.abs(tev)))]
            grew |= add_atom(lead)
            grew |= add_atom(_phase_sync((t_res + dagger(t_res)) / 2.0, _phase_of(lead)))
            if rank < d:
                for u in _subspace_phase_atoms(t_res, frame):
                    grew |= add_atom(u)
        if g_res is not None:
            grew |= add_atom(_phase_sync(-g_res, np.ones(d, dtype=np.complex128)))
        grew |= add_atom(np.exp(2j * np.pi * rng.random(d)))
        if not grew:
            break

    keep = best_w > 1e-12
    if not np.any(keep):
        keep = np.zeros_like(best_w, dtype=bool)
        keep[0] = True
    weights = best_w[keep]
    weights = weights / weights.sum()
    mixture = DiagonalUnitaryMixture(
        tuple(weights), tuple(a for a, k in zip(best_atoms, keep) if k)
    )
    certificate = sdpsolve.diamond_distance(
        schur_to_kraus(sm), mixture_as_channel(mixture)
    )
    return LambdaUpperResult(
        value=certificate.value,
        mixture=mixture,
        diagnostics={
            "internal_estimate": best_v,
            "oracle_calls": oracle_calls,
            "fit_restarts": fit_restarts,
            "rounds": rounds,
            "n_atoms": len(mixture.weights),
            "certificate": certificate.solution.diagnostics(),
        },
    )


# ---------------------------------------------------------------------------
# Sandwich report
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    channel_id: str
    c_phi: float
    c_phi_coeffs: np.ndarray
    c_phi_minimizer: np.ndarray
    lambda_upper: Optional[float]
    mixture: Optional[DiagonalUnitaryMixture]
    conv_u_lower: float
    sandwich: dict
    diagnostics: dict

    def to_dict(self) -> dict:
        def cpx(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)]

        out = {
            "channel_id": self.channel_id,
            "c_phi": self.c_phi,
            "c_phi_coeffs": cpx(np.array(self.c_phi_coeffs)[None, :])[0],
            "c_phi_minimizer": cpx(self.c_phi_minimizer),
            "conv_u_lower": self.conv_u_lower,
            "sandwich": self.sandwich,
            "diagnostics": self.diagnostics,
        }
        out["lambda_upper"] = self.lambda_upper
        if self.mixture is not None:
            out["mixture"] = {
                "weights": list(self.mixture.weights),
                "phases": [cpx(np.array(u)[None, :])[0] for u in self.mixture.phases],
            }
        return out


def sandwich_report(s, *, budget: int = 12, seed: int = 0,
                    channel_id: str = "schur-channel",
                    lambda_lower: Optional[float] = None) -> BoundReport:
    """Lower bound (span gap) and certified upper bound (distance to a
    diagonal-unitary mixture) on the distance from a Schur channel to the
    mixed-unitary channels, with the half-factor sandwich recorded.

    The reported interval always satisfies lower <= upper + 1e-6; both ends
    bound D(Φ_S, Conv(U)): the span gap from below, the Λ-distance from
    above (Λ_d is a subset of the mixed-unitary channels).
    """
    sm = schurmod._smat(s)
    if not is_schur_channel(sm):
        raise PreconditionError("sandwich_report requires a Schur channel")
    ch = schur_to_kraus(sm)
    cp = c_phi(ch, seed=seed)
    lu = lambda_distance_upper(sm, budget=budget, seed=seed)
    lower = cp.value
    if lambda_lower is not None:
        lower = max(lower, 0.5 * lambda_lower)
    if lower > lu.value + 1e-6:
        raise StructureError(
            f"bound inversion: lower {lower} exceeds upper {lu.value}"
        )
    return BoundReport(
        channel_id=channel_id,
        c_phi=cp.value,
        c_phi_coeffs=cp.coeffs,
        c_phi_minimizer=cp.l_matrix,
        lambda_upper=lu.value,
        mixture=lu.mixture,
        conv_u_lower=lower,
        sandwich={"lower": lower, "upper": lu.value,
                  "half_lambda_upper_lower_bound": 0.5 * lu.value},
        diagnostics={
            "c_phi": cp.diagnostics,
            "lambda_upper": lu.diagnostics,
            "tolerances": {"sandwich_slack": 1e-6},
        },
    )


# ---------------------------------------------------------------------------
# Discrimination, majorization, Birkhoff, Uhlmann
# ---------------------------------------------------------------------------

def succ_probability(d_value: float) -> float:
    """Optimal equal-prior discrimination probability 1/2 + D/4 for a trace
    distance D in [0, 2]."""
    if not -1e-12 <= d_value <= 2.0 + 1e-12:
        raise ParameterError(f"trace distance {d_value} outside [0, 2]")
    return 0.5 + min(max(d_value, 0.0), 2.0) / 4.0


@dataclass
class HelstromResult:
    e0: np.ndarray
    e1: np.ndarray
    p_succ: float


def helstrom_measurement(rho0, rho1) -> HelstromResult:
    """The two-outcome measurement achieving 1/2 + ||rho0 - rho1||_1 / 4:
    E0 projects onto the nonnegative eigenspace of rho0 - rho1."""
    r0 = rho0.matrix if isinstance(rho0, DensityOperator) else as_matrix(rho0)
    r1 = rho1.matrix if isinstance(rho1, DensityOperator) else as_matrix(rho1)
    if r0.shape != r1.shape:
        raise DimensionError("states must share dimensions")
    diff = (r0 - r1 + dagger(r0 - r1)) / 2.0
    evals, vecs = np.linalg.eigh(diff)
    keep = evals >= 0.0
    e0 = vecs[:, keep] @ dagger(vecs[:, keep])
    e1 = np.eye(r0.shape[0]) - e0
    achieved = 0.5 * float(np.real(np.trace(r0 @ e0) + np.trace(r1 @ e1)))
    formula = 0.5 + 0.25 * schatten_norm(diff, 1)
    if abs(achieved - formula) > 1e-10:
        raise StructureError(
            f"measurement value {achieved} deviates from the trace-distance formula {formula}"
        )
    return HelstromResult(e0=e0, e1=e1, p_succ=achieved)


def majorize_check(x, y, atol: float = 1e-10) -> bool:
    """True iff x is majorized by y (partial sums of the decreasing
    rearrangements, with equal totals within 1e-9)."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise DimensionError("majorize_check requires equal-length vectors")
    if abs(xv.sum() - yv.sum()) > 1e-9:
        raise ParameterError("vector sums differ beyond 1e-9")
    px = np.cumsum(np.sort(xv)[::-1])
    py = np.cumsum(np.sort(yv)[::-1])
    return bool(np.all(px <= py + atol))


def _perfect_matching(support: np.ndarray) -> Optional[np.ndarray]:
    """Row -> column perfect matching on a boolean support (Kuhn's
    augmenting paths; deterministic)."""
    d = support.shape[0]
    match_col = np.full(d, -1, dtype=int)

    def try_row(r, visited):
        for c in range(d):
            if support[r, c] and not visited[c]:
                visited[c] = True
                if match_col[c] == -1 or try_row(match_col[c], visited):
                    match_col[c] = r
                    return True
        return False

    for r in range(d):
        if not try_row(r, np.zeros(d, dtype=bool)):
            return None
    perm = np.empty(d, dtype=int)
    for c in range(d):
        perm[match_col[c]] = c
    return perm


def birkhoff_decompose(m, atol: float = 1e-9) -> list:
    """Greedy Birkhoff decomposition of a doubly stochastic matrix into at
    most (d-1)^2 + 1 weighted permutations (reconstruction within 1e-8)."""
    a = np.real(as_matrix(m, "doubly stochastic matrix")).copy()
    d = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise DimensionError("matrix must be square")
    if a.min() < -1e-10:
        raise StructureError(f"negative entry {a.min():.3e}")
    if np.max(np.abs(a.sum(axis=0) - 1.0)) > atol or np.max(np.abs(a.sum(axis=1) - 1.0)) > atol:
        raise StructureError("row/column sums deviate from 1 beyond tolerance")
    a = np.clip(a, 0.0, None)
    terms = []
    max_terms = (d - 1) ** 2 + 1
    for _ in range(max_terms):
        if a.max() < 1e-10:
            break
        perm = _perfect_matching(a > 1e-12)
        if perm is None:
            raise StructureError("no positive-support perfect matching; input is not doubly stochastic within tolerance")
        w = float(a[np.arange(d), perm].min())
        p = np.zeros((d, d))
        p[np.arange(d), perm] = 1.0
        terms.append((w, p))
        a -= w * p
        a = np.clip(a, 0.0, None)
    return terms


def _t_transform_chain(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Doubly stochastic D with D y = x for x majorized by y (both sorted
    decreasingly), built from at most d-1 T-transforms."""
    d = x.size
    dm = np.eye(d)
    z = y.astype(float).copy()
    for _ in range(d + 1):
        diff = z - x
        if np.max(np.abs(diff)) <= 1e-12:
            break
        over = np.nonzero(diff > 1e-13)[0]
        if over.size == 0:
            break
        j = int(over[-1])
        under = np.nonzero(diff[j + 1:] < -1e-13)[0]
        if under.size == 0:
            break
        k = j + 1 + int(under[0])
        delta = min(z[j] - x[j], x[k] - z[k])
        t = 1.0 - delta / (z[j] - z[k])
        tr = np.eye(d)
        tr[j, j] = tr[k, k] = t
        tr[j, k] = tr[k, j] = 1.0 - t
        z = tr @ z
        dm = tr @ dm
    return dm


def _sorted_eigh(m: np.ndarray):
    """Eigenpairs sorted by decreasing eigenvalue with a deterministic
    phase/ordering convention for degenerate blocks."""
    evals, vecs = np.linalg.eigh((m + dagger(m)) / 2.0)
    order = np.argsort(-np.round(evals, 12), kind="stable")
    evals, vecs = evals[order], vecs[:, order]
    cols = []
    for i in range(vecs.shape[1]):
        cols.append(fix_global_phase(vecs[:, i][:, None]).ravel())
    return evals, np.array(cols).T


@dataclass
class UhlmannMixture:
    weights: list
    unitaries: list
    transfer_matrix: np.ndarray
    residual: float


def uhlmann_mixture(ch: KrausChannel, rho) -> UhlmannMixture:
    """Unitaries and weights with Σ p_k U_k ρ U_k† = Φ(ρ) for a unital
    trace-preserving channel (the fixed-input mixed-unitary realization).

    Built from the majorization spec(Φ(ρ)) ≺ spec(ρ): a T-transform chain
    gives a doubly stochastic matrix mapping the spectra, its Birkhoff
    decomposition gives permutations, and U_k = V P_k W† with W, V the
    eigenvector frames of ρ and Φ(ρ).  Reconstruction error <= 1e-8.
    """
    flags = ch.flags
    if flags.defect_tp > 1e-9 or flags.defect_unital > 1e-9:
        raise PreconditionError(
            "uhlmann_mixture requires a unital trace-preserving channel "
            f"(defects tp={flags.defect_tp:.2e}, unital={flags.defect_unital:.2e})"
        )
    rho_m = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho)
    out = ch.apply(rho_m)
    y_evals, w_frame = _sorted_eigh(rho_m)
    x_evals, v_frame = _sorted_eigh(out)
    if not majorize_check(x_evals, y_evals, atol=1e-8):
        raise PreconditionError(
            "output spectrum is not majorized by the input spectrum "
            "(signals a non-unital input)"
        )
    dm = _t_transform_chain(x_evals, y_evals)
    terms = birkhoff_decompose(dm, atol=1e-7)
    weights = [w for w, _ in terms]
    unitaries = [fix_global_phase(v_frame @ p @ dagger(w_frame)) for _, p in terms]
    recon = sum(w * (u @ rho_m @ dagger(u)) for w, u in zip(weights, unitaries))
    residual = float(np.max(np.abs(recon - out)))
    if residual > 1e-8:
        raise StructureError(f"mixture reconstruction residual {residual:.2e} exceeds 1e-8")
    return UhlmannMixture(
        weights=weights,
        unitaries=unitaries,
        transfer_matrix=dm,
        residual=residual,
    )
