"""Dense complex linear algebra shared by every other module.

Conventions
-----------
* Matrices are dense ``numpy`` arrays of ``complex128``; the array *is* the
  universal numeric carrier, validated at public boundaries.
* The trace distance carries NO factor 1/2, so ``trace_distance`` ranges over
  [0, 2] (orthogonal pure states are at distance 2).  Much of the literature
  divides by two; every value reported by this package uses the [0, 2]
  convention.
* ``kron`` follows the usual index ordering: (A ⊗ B)(x ⊗ y) = Ax ⊗ By with
  composite row index a * rows(B) + b.

Default tolerances: Hermiticity 1e-10 (max entrywise deviation), PSD 1e-9 on
the minimum eigenvalue, singular values below 1e-12 are treated as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError, StructureError

HERM_ATOL = 1e-10
PSD_EIG_TOL = 1e-9
SV_FLOOR = 1e-12


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a validated 2-D complex128 array (finite entries only)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise StructureError(f"{name} contains non-finite entries")
    return a


def _square(m, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def herm_deviation(m: np.ndarray) -> float:
    """Max entrywise deviation between M and its conjugate transpose."""
    a = np.asarray(m)
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def is_hermitian(m: np.ndarray, atol: float = HERM_ATOL) -> bool:
    return herm_deviation(_square(m)) <= atol


def psd_check(m, tol: float = PSD_EIG_TOL) -> bool:
    """True iff M is Hermitian within ``tol`` and min eigenvalue >= -tol."""
    a = _square(m)
    if herm_deviation(a) > tol:
        return False
    h = (a + dagger(a)) / 2.0
    evals = np.linalg.eigvalsh(h)
    return bool(evals.min() >= -tol) if evals.size else True


def matrix_abs(m) -> np.ndarray:
    """|M| = sqrt(M†M), via SVD; singular values below 1e-12 are zeroed."""
    a = _square(m)
    _, s, vh = np.linalg.svd(a)
    s = np.where(s < SV_FLOOR, 0.0, s)
    return dagger(vh) @ np.diag(s) @ vh


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def schatten_norm(m, p) -> float:
    """Schatten p-norm (sum of p-th powers of singular values)^(1/p).

    p = 1 is the trace norm, p = inf the operator norm; requires p >= 1.
    """
    if p != np.inf and p < 1:
        raise ParameterError(f"schatten_norm requires p >= 1, got {p}")
    s = singular_values(m)
    if s.size == 0:
        return 0.0
    if p == np.inf:
        return float(s.max())
    if p == 1:
        return float(s.sum())
    return float(np.sum(s ** p) ** (1.0 / p))


def kron(a, b) -> np.ndarray:
    """Kronecker product with composite index (i * rows(B) + j)."""
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def partial_trace(m, dim_a: int, dim_b: int, keep: str) -> np.ndarray:
    """Reduce an operator on A ⊗ B to the kept factor ('A' or 'B')."""
    a = _square(m)
    if dim_a <= 0 or dim_b <= 0:
        raise DimensionError("factor dimensions must be positive")
    if a.shape[0] != dim_a * dim_b:
        raise DimensionError(
            f"matrix dim {a.shape[0]} is not dim_a*dim_b = {dim_a * dim_b}"
        )
    t = a.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep in ("A", "a"):
        return np.einsum("ikjk->ij", t)
    if keep in ("B", "b"):
        return np.einsum("kikj->ij", t)
    raise ParameterError(f"keep must be 'A' or 'B', got {keep!r}")


def polar_unitary(m) -> np.ndarray:
    """Unitary factor of the polar decomposition M = U|M| (via SVD)."""
    a = _square(m)
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def fix_global_phase(m) -> np.ndarray:
    """Rescale by a unit scalar so the first nonzero entry (column-major over
    the first column, then onward) is real positive."""
    a = np.array(m, dtype=np.complex128)
    flat = a.T.reshape(-1)
    idx = np.flatnonzero(np.abs(flat) > 1e-12)
    if idx.size == 0:
        return a
    ph = flat[idx[0]] / abs(flat[idx[0]])
    return a / ph


@dataclass(frozen=True)
class DensityOperator:
    """A dim x dim density matrix, validated on construction.

    Hermitian within 1e-10 (entrywise), eigenvalues >= -1e-9, trace within
    1e-10 of one.
    """

    matrix: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        a = _square(self.matrix, "density operator")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "dim", a.shape[0])
        if herm_deviation(a) > HERM_ATOL:
            raise StructureError("density operator is not Hermitian within 1e-10")
        evals = np.linalg.eigvalsh((a + dagger(a)) / 2.0)
        if evals.min() < -PSD_EIG_TOL:
            raise StructureError(
                f"density operator has eigenvalue {evals.min():.3e} < -1e-9"
            )
        tr = float(np.real(np.trace(a)))
        if abs(tr - 1.0) > HERM_ATOL:
            raise StructureError(f"density operator trace {tr} is not 1 within 1e-10")

    @classmethod
    def from_vector(cls, psi) -> "DensityOperator":
        v = np.asarray(psi, dtype=np.complex128).reshape(-1)
        n = np.linalg.norm(v)
        if n < 1e-12:
            raise StructureError("state vector has zero norm")
        v = v / n
        return cls(np.outer(v, np.conj(v)))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)


def _density_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityOperator) else _square(rho, "state")


def trace_distance(rho, sigma) -> float:
    """||rho - sigma||_1, in [0, 2] (no factor 1/2; see module docstring)."""
    r, s = _density_matrix(rho), _density_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionError(f"dimension mismatch {r.shape} vs {s.shape}")
    return schatten_norm(r - s, 1)


def fidelity(rho, sigma) -> float:
    """F(rho, sigma) = Tr sqrt(rho^(1/2) sigma rho^(1/2)), in [0, 1]."""
    r, s = _density_matrix(rho), _density_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionError(f"dimension mismatch {r.shape} vs {s.shape}")
    evals, vecs = np.linalg.eigh((r + dagger(r)) / 2.0)
    sqrt_r = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ dagger(vecs)
    inner = sqrt_r @ s @ sqrt_r
    ev = np.linalg.eigvalsh((inner + dagger(inner)) / 2.0)
    val = float(np.sum(np.sqrt(np.clip(ev, 0.0, None))))
    return min(val, 1.0) if val <= 1.0 + 1e-9 else val
