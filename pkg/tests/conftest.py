"""Shared random-object generators for the test suite.

Everything is seeded explicitly so failures reproduce.
"""

import numpy as np
import pytest

from covertq.channels import PAULIS, QuantumChannel, WillieModel, apply_mat
from covertq.linops import DensityOperator


def random_density(dim: int, rng: np.random.Generator, floor: float = 0.0) -> DensityOperator:
    """Random full-support-biased state: Wishart normalized, optionally mixed
    with the maximally mixed state to keep eigenvalues off zero."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    if floor > 0.0:
        m = (1.0 - floor) * m + floor * np.eye(dim) / dim
    return DensityOperator(m)


def random_pure(dim: int, rng: np.random.Generator) -> DensityOperator:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return DensityOperator.from_vector(v)


def random_channel(
    d_in: int, d_out: int, kraus_count: int, rng: np.random.Generator
) -> QuantumChannel:
    """Random CPTP channel from a Haar-ish isometry: QR of a complex Gaussian
    gives orthonormal columns, whose blocks are exactly trace preserving."""
    g = rng.normal(size=(d_out * kraus_count, d_in)) + 1j * rng.normal(
        size=(d_out * kraus_count, d_in)
    )
    v, _ = np.linalg.qr(g)
    ops = tuple(v[i * d_out : (i + 1) * d_out, :] for i in range(kraus_count))
    return QuantumChannel(ops)


def random_willie_model(
    rng: np.random.Generator, dim: int = 2, floor: float = 0.1
) -> WillieModel:
    """Random warden model with full-rank innocent output, so the support
    condition holds automatically."""
    return WillieModel(
        rho0=random_density(dim, rng, floor=floor),
        rho_pi=random_density(dim, rng),
    )


def twirled_replaced_choi(ch: QuantumChannel) -> np.ndarray:
    """Oracle: Choi matrix (trace-1) of the full receiver map, built
    functionally. The map averages the four Pauli conjugations of (channel,
    keep the first-two-levels block, top up lost mass with the maximally
    mixed qubit)."""
    j = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[a, b] = 1.0
            acc = np.zeros((2, 2), dtype=complex)
            for p in PAULIS:
                out = apply_mat(ch, p @ e @ p.conj().T)
                blk = out[:2, :2]
                fail = np.trace(out) - np.trace(blk)
                acc += p.conj().T @ (blk + fail * np.eye(2) / 2) @ p / 4
            j[2 * a : 2 * a + 2, 2 * b : 2 * b + 2] = acc
    return j / 2


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
