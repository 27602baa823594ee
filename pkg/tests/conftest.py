"""Shared deterministic samplers for the test suite."""

import numpy as np

from birkhoffgap.channels import KrausChannel
from birkhoffgap.matcore import DensityOperator


def random_unitary(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.real(np.trace(m)))


def random_channel(rng, d, k):
    """Haar-ish random channel with k Kraus operators (stacked isometry)."""
    g = rng.normal(size=(k * d, d)) + 1j * rng.normal(size=(k * d, d))
    q, _ = np.linalg.qr(g)
    return KrausChannel(tuple(q[i * d:(i + 1) * d, :] for i in range(k)))


def random_mixture_channel(rng, d, k):
    """Random mixture of unitary conjugations, as a channel plus parts."""
    w = rng.random(k) + 0.1
    w = w / w.sum()
    us = [random_unitary(rng, d) for _ in range(k)]
    ops = tuple(np.sqrt(wi) * ui for wi, ui in zip(w, us))
    return KrausChannel(ops), w, us


def random_schur_channel(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    s0 = g @ g.conj().T + 0.1 * np.eye(d)
    dg = np.diag(1.0 / np.sqrt(np.real(np.diag(s0))))
    return dg @ s0 @ dg


def random_traceless_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + g.conj().T) / 2.0
    return h - np.trace(h) / d * np.eye(d)
