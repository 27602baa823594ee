"""Kraus-form quantum channels, Choi matrices, adjoints and tensor products.

Choi convention: ``choi`` uses the UNNORMALIZED maximally entangled vector
|α⟩ = Σ_k |k⟩⊗|k⟩, i.e. J(Φ) = (Φ ⊗ I)(|α⟩⟨α|) with the output factor first,
so Tr J(Φ) = dim_in for a trace-preserving Φ.  ``ChoiMatrix.normalized``
divides by dim_in for discrimination formulas.

Channel equality is always decided through Choi matrices; Kraus lists are
never canonicalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import matcore
from .errors import DimensionError, PreconditionError, StructureError
from .matcore import DensityOperator, as_matrix, dagger, kron

TP_ATOL = 1e-9
BASIS_DROP_TOL = 1e-10
SCHMIDT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class ChannelFlags:
    tp: bool
    unital: bool
    defect_tp: float
    defect_unital: float


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive map Φ(X) = Σ_k A_k X A_k† (CP by construction)."""

    kraus: tuple

    def __post_init__(self):
        ops = tuple(as_matrix(a, "Kraus operator") for a in self.kraus)
        if not ops:
            raise StructureError("Kraus list must be non-empty")
        shape = ops[0].shape
        for a in ops[1:]:
            if a.shape != shape:
                raise DimensionError("all Kraus operators must share dimensions")
        object.__setattr__(self, "kraus", ops)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @cached_property
    def flags(self) -> ChannelFlags:
        return validate(self)

    def apply(self, x) -> np.ndarray:
        """Σ_k A_k X A_k†."""
        xm = as_matrix(x, "X")
        if xm.shape != (self.dim_in, self.dim_in):
            raise DimensionError(
                f"input must be {self.dim_in}x{self.dim_in}, got {xm.shape}"
            )
        out = np.zeros((self.dim_out, self.dim_out), dtype=np.complex128)
        for a in self.kraus:
            out += a @ xm @ dagger(a)
        return out

    def adjoint(self) -> "KrausChannel":
        """Hilbert-Schmidt adjoint, Kraus list {A_k†}."""
        return KrausChannel(tuple(dagger(a) for a in self.kraus))

    def tensor(self, other: "KrausChannel") -> "KrausChannel":
        """Kraus list {A_i ⊗ B_j} in lexicographic (i, j) order."""
        ops = tuple(kron(a, b) for a in self.kraus for b in other.kraus)
        return KrausChannel(ops)

    def is_diagonal(self, atol: float = 1e-10) -> bool:
        """True iff every Kraus operator is diagonal (i.e. Φ is a Schur channel
        candidate); diagonality of the list is representation independent."""
        if self.dim_in != self.dim_out:
            return False
        for a in self.kraus:
            if np.max(np.abs(a - np.diag(np.diag(a)))) > atol:
                return False
        return True


@dataclass(frozen=True)
class ChoiMatrix:
    dim_in: int
    dim_out: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "Choi matrix")
        d = self.dim_in * self.dim_out
        if m.shape != (d, d):
            raise DimensionError(f"Choi matrix must be {d}x{d}, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def normalized(self) -> np.ndarray:
        return self.matrix / self.dim_in


def validate(ch: KrausChannel) -> ChannelFlags:
    """Trace-preserving / unital flags with operator-norm defects from I."""
    acc_tp = sum(dagger(a) @ a for a in ch.kraus)
    acc_un = sum(a @ dagger(a) for a in ch.kraus)
    d_tp = matcore.schatten_norm(acc_tp - np.eye(ch.dim_in), np.inf)
    d_un = matcore.schatten_norm(acc_un - np.eye(ch.dim_out), np.inf)
    return ChannelFlags(
        tp=d_tp <= TP_ATOL, unital=d_un <= TP_ATOL, defect_tp=d_tp, defect_unital=d_un
    )


def apply_channel(ch: KrausChannel, x) -> np.ndarray:
    return ch.apply(x)


def choi(ch: KrausChannel) -> ChoiMatrix:
    """J(Φ) = Σ_k vec(A_k) vec(A_k)† with row-major vec (unnormalized |α⟩)."""
    d = ch.dim_in * ch.dim_out
    m = np.zeros((d, d), dtype=np.complex128)
    for a in ch.kraus:
        v = a.reshape(-1)
        m += np.outer(v, np.conj(v))
    return ChoiMatrix(dim_in=ch.dim_in, dim_out=ch.dim_out, matrix=m)


def choi_of_difference(a: KrausChannel, b: KrausChannel) -> np.ndarray:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise DimensionError("channels must share dimensions")
    return choi(a).matrix - choi(b).matrix


def adjoint(ch: KrausChannel) -> KrausChannel:
    return ch.adjoint()


def tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    return a.tensor(b)


def kraus_space_basis(ch: KrausChannel) -> list:
    """Orthonormal basis (Hilbert-Schmidt) of span{A_k} via Gram-Schmidt.

    Directions whose residual norm falls below 1e-10 are dropped, so the
    basis size equals the rank of the Gram matrix of the Kraus list.
    """
    basis = []
    for a in ch.kraus:
        v = a.astype(np.complex128).copy()
        for _ in range(2):  # one re-orthogonalization pass for stability
            for b in basis:
                v = v - np.trace(dagger(b) @ v) * b
        n = np.linalg.norm(v)
        if n > BASIS_DROP_TOL:
            basis.append(v / n)
    return basis


def kraus_coefficients(ch: KrausChannel, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Coordinates of each Kraus operator in an orthonormal basis (k x r)."""
    return np.array(
        [[np.trace(dagger(b) @ a) for b in basis] for a in ch.kraus],
        dtype=np.complex128,
    )


def schmidt_rank(psi: np.ndarray, dim_a: int, dim_b: int, tol: float = SCHMIDT_RANK_TOL) -> int:
    v = np.asarray(psi, dtype=np.complex128).reshape(dim_a, dim_b)
    s = np.linalg.svd(v, compute_uv=False)
    return int(np.sum(s > tol))


def generalized_choi(ch: KrausChannel, rho: DensityOperator) -> np.ndarray:
    """(I ⊗ Φ)(rho) for a bipartite pure rho on H ⊗ H with full Schmidt rank.

    Equal outputs imply equal channels (the map is injective for full-rank
    pure inputs); |Ω⟩⟨Ω| recovers the normalized Choi matrix.
    """
    d = ch.dim_in
    if ch.dim_out != d:
        raise DimensionError("generalized_choi requires a square channel")
    m = rho.matrix
    if m.shape != (d * d, d * d):
        raise DimensionError(f"state must live on a {d}x{d} bipartite space")
    evals, vecs = np.linalg.eigh(m)
    if evals[-1] < 1.0 - 1e-9 or np.sum(evals > 1e-9) != 1:
        raise PreconditionError("input state must be pure")
    psi = vecs[:, -1]
    if schmidt_rank(psi, d, d) < d:
        raise PreconditionError("input state must have full Schmidt rank")
    out = np.zeros_like(m)
    eye = np.eye(d)
    for a in ch.kraus:
        op = kron(eye, a)
        out += op @ m @ dagger(op)
    return out


def random_state_full_schmidt(d: int, rng) -> DensityOperator:
    """A pure bipartite state on d ⊗ d with full Schmidt rank (for tests/CLI)."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    u, s, vh = np.linalg.svd(g)
    s = np.linspace(1.0, 2.0, d)  # strictly positive, well separated
    mat = (u * s) @ vh
    psi = mat.reshape(-1)
    return DensityOperator.from_vector(psi)
