"""Built-in channels: the two counterexample Schur channels shipped with the
CLI plus standard constructions used across tests and examples.

``example1`` (d = 4, two diagonal Kraus operators) and ``example2`` (d = 6,
three diagonal Kraus operators built from fifth-root-of-unity phases) are
unital Schur channels whose Kraus spans contain no unitary, so their span
gap is strictly positive and persists under tensor powers; ``cmd_certify``
certifies them as counterexamples to the asymptotic Birkhoff property.
"""

from __future__ import annotations

import numpy as np

from .channels import KrausChannel
from .schur import SchurMatrix


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel((np.eye(d, dtype=np.complex128),))

def unitary_channel(u) -> KrausChannel:
    return KrausChannel((np.asarray(u, dtype=np.complex128),))

def dephasing_channel(d: int) -> KrausChannel:
    """Completely dephasing channel, Kraus {|k><k|}; kills off-diagonals."""
    ops = []
    for k in range(d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[k, k] = 1.0
        ops.append(e)
    return KrausChannel(tuple(ops))

def depolarizing_channel(d: int) -> KrausChannel:
    """X -> Tr(X) I / d via the d^2 normalized matrix units."""
    ops = []
    for k in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[k, j] = 1.0 / np.sqrt(d)
            ops.append(e)
    return KrausChannel(tuple(ops))


def example1() -> KrausChannel:
    """d = 4 Schur channel with Kraus Diag(1, 0, 1/sqrt2, 1/sqrt2) and
    Diag(0, 1, 1/sqrt2, -i/sqrt2); its Kraus span contains no unitary."""
    s = 1.0 / np.sqrt(2.0)
    e1 = np.diag(np.array([1.0, 0.0, s, s], dtype=np.complex128))
    e2 = np.diag(np.array([0.0, 1.0, s, -1j * s], dtype=np.complex128))
    return KrausChannel((e1, e2))


def example2() -> KrausChannel:
    """d = 6 Schur channel with Kraus Diag(1, I_5/sqrt5),
    Diag(0, sqrt(2/5) Z_5) and its adjoint, where Z_5 has the standard
    fifth-root-of-unity phases exp(2 pi i k / 5) (so Z_5^5 = I_5)."""
    omega = np.exp(2j * np.pi / 5.0)
    z5 = np.array([omega ** k for k in range(5)], dtype=np.complex128)
    e1 = np.diag(np.concatenate([[1.0 + 0j], np.full(5, 1.0 / np.sqrt(5.0))]))
    e2 = np.diag(np.concatenate([[0.0 + 0j], np.sqrt(2.0 / 5.0) * z5]))
    e3 = e2.conj().T
    return KrausChannel((e1, e2, e3))


def schur_matrix_of(ch: KrausChannel) -> SchurMatrix:
    """The Schur matrix S with s_ij = sum_k (A_k)_ii (A_k)_jj^* of a channel
    with diagonal Kraus operators."""
    diags = np.array([np.diag(a) for a in ch.kraus])
    return SchurMatrix(diags.T @ np.conj(diags))


BUILTIN_CHANNELS = {
    "example1": example1,
    "example2": example2,
}
