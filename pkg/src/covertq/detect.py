"""The warden's optimal hypothesis test at exact small block lengths, and
end-to-end tomography of the simulated receiver path.

Detection is evaluated exactly (enumeration over weight classes) rather than
by sampled measurements: the optimal binary-test error is a closed function
of the two block states, so the exact route is both tighter and faster at
desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError, EstimationFailureError
from .linops import DIM_CAP, DensityOperator, tensor_power, trace_norm
from .channels import QuantumChannel, WillieModel
from .covert import qre
from .sparse import SparseSignalConfig, willie_state_exact
from .twirl import PauliDistribution, _twirl_branches


def max_exact_block(d: int) -> int:
    """Largest block length with d**n inside the dense cap (10 for qubit
    outputs, 6 for qutrits)."""
    if d < 2:
        raise ValueError(f"output dimension must be at least 2, got {d}")
    n = int(math.floor(math.log(DIM_CAP) / math.log(d) + 1e-9))
    return max(n, 1)


@dataclass(frozen=True)
class DetectionResult:
    """Exact warden-side figures at one block length."""

    n: int
    trace_distance: float
    p_e_willie: float
    qre_exact: float
    qre_budget: float
    covert_ok: bool

    def __post_init__(self):
        expected = 0.5 - 0.25 * self.trace_distance
        if abs(self.p_e_willie - expected) > 1e-9:
            raise ValueError("error probability inconsistent with trace distance")
        if self.covert_ok != (self.qre_exact <= self.qre_budget):
            raise ValueError("covertness flag inconsistent with divergences")


def detection_at_n(
    model: WillieModel, cfg: SparseSignalConfig, delta_qre: float
) -> DetectionResult:
    """Exact trace distance, optimal test error, and divergence of the
    warden's n-use state against the innocent product, with the covertness
    flag for the given budget.

    A support violation is reported through an infinite divergence (and a
    false flag) rather than an exception, since the trace-distance figures
    remain meaningful.
    """
    if delta_qre < 0:
        raise ValueError("budget must be nonnegative")
    n_max = max_exact_block(model.dim)
    if cfg.n > n_max:
        raise DimensionCapError(
            f"exact detection with d={model.dim} outputs is capped at n={n_max}; "
            f"got n={cfg.n}"
        )
    rho_n = willie_state_exact(model, cfg)
    prod_inn = DensityOperator(tensor_power(model.rho0.mat, cfg.n))
    td = trace_norm(rho_n.mat - prod_inn.mat)
    d_exact = qre(rho_n, prod_inn)
    return DetectionResult(
        n=cfg.n,
        trace_distance=td,
        p_e_willie=0.5 - 0.25 * td,
        qre_exact=d_exact,
        qre_budget=delta_qre,
        covert_ok=bool(d_exact <= delta_qre),
    )


def pipeline_tomography(ch: QuantumChannel, samples: int, seed: int) -> PauliDistribution:
    """Monte Carlo estimate of the effective per-slot Pauli error vector of
    the full receiver path: twirl, transmit, project with maximally mixed
    replacement on failure, untwirl, Bell-basis estimation.

    Converges to (1 - p_f) q_tw + p_f / 4 per component, the exact Pauli
    vector of the replaced-projection map; this coincides with
    ``compose_with_failure(q_tw, p_f)`` whenever p_f = 0 or the twirled
    weights are concentrated on the identity. Deterministic for a fixed
    seed.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    succ, outcome = _twirl_branches(ch)
    rng = np.random.default_rng(seed)
    js = rng.integers(0, 4, size=samples)
    fail = rng.random(samples) >= succ[js]
    # Replacement with the maximally mixed qubit makes the failure-branch
    # Bell outcome exactly uniform, whatever the reference side holds.
    rows = np.where(fail[:, None], 0.25, outcome[js])
    cdf = np.cumsum(rows, axis=1)
    r = rng.random(samples)
    m = (r[:, None] > cdf[:, :3]).sum(axis=1)
    counts = np.bincount(m, minlength=4).astype(float)
    if counts.sum() == 0:
        raise EstimationFailureError("no tomography samples recorded")
    return PauliDistribution.from_array(counts / counts.sum())
