"""Sparse signaling: weight sets, exact tails, exact warden states, and the
three-term divergence decomposition with its bounds.

Signal patterns are length-n binary strings; slot i carries the non-innocent
input when x_i = 1. Patterns are restricted to the weight set
A = {w : |q - w/n| <= vartheta}, sampled i.i.d. Bernoulli(q) conditioned on
membership. All sums over patterns collapse to sums over weight classes
because the conditioned distribution is permutation symmetric; the collapse
is exact, not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import gammaln

from .errors import DimensionCapError, EstimationFailureError, SupportViolationError
from .linops import DIM_CAP, SUPPORT_TOL, DensityOperator, eig_hermitian, trace_norm, tensor_power
from .channels import WillieModel
from .covert import LN2, chi2, qre, support_contained, vn_entropy


@dataclass(frozen=True)
class SparseSignalConfig:
    """Block length n, signal density q, and weight-set half-width vartheta."""

    n: int
    q: float
    vartheta: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"block length must be positive, got {self.n}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"signal density must lie in (0, 1), got {self.q}")
        if not 0.0 < self.vartheta <= 1.0:
            raise ValueError(f"weight tolerance must lie in (0, 1], got {self.vartheta}")
        if not self.weight_set():
            raise ValueError(
                f"weight set is empty for n={self.n}, q={self.q}, vartheta={self.vartheta}"
            )

    def weight_set(self) -> list[int]:
        """Admissible weights: w with |q - w/n| <= vartheta."""
        return [
            w
            for w in range(self.n + 1)
            if abs(self.q - w / self.n) <= self.vartheta + 1e-15
        ]


def _log_binom_pmf(n: int, w: np.ndarray, q: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return (
        gammaln(n + 1)
        - gammaln(w + 1)
        - gammaln(n - w + 1)
        + w * math.log(q)
        + (n - w) * math.log1p(-q)
    )


def weight_set_prob(cfg: SparseSignalConfig) -> float:
    """Exact probability that an i.i.d. Bernoulli(q) pattern lands in the
    weight set, via log-space binomial terms."""
    ws = np.array(cfg.weight_set())
    logs = _log_binom_pmf(cfg.n, ws, cfg.q)
    peak = np.max(logs)
    return float(min(1.0, math.exp(peak) * np.sum(np.exp(logs - peak))))


def chernoff_epsilon(cfg: SparseSignalConfig) -> float:
    """Chernoff tail bound 2 exp(-q n vartheta^2 / 3) on the weight-set
    complement (natural exponential)."""
    return 2.0 * math.exp(-cfg.q * cfg.n * cfg.vartheta**2 / 3.0)


def sample_patterns(cfg: SparseSignalConfig, seed: int, count: int) -> np.ndarray:
    """Sample ``count`` patterns, one per row, by rejection from the
    i.i.d. Bernoulli(q) law conditioned on the weight set. Deterministic for
    a fixed seed."""
    if count < 1:
        raise ValueError("need a positive sample count")
    p_a = weight_set_prob(cfg)
    if p_a < 1e-12:
        raise EstimationFailureError(
            f"weight set has probability {p_a:.3e}; rejection sampling is hopeless"
        )
    allowed = np.zeros(cfg.n + 1, dtype=bool)
    allowed[cfg.weight_set()] = True
    rng = np.random.default_rng(seed)
    out = np.empty((count, cfg.n), dtype=np.uint8)
    got = 0
    budget = int(math.ceil(50.0 * count / p_a)) + 1000
    drawn = 0
    while got < count:
        batch = min(max(1024, count), budget - drawn)
        if batch <= 0:
            raise EstimationFailureError("rejection sampling cap exceeded")
        x = (rng.random((batch, cfg.n)) < cfg.q).astype(np.uint8)
        drawn += batch
        keep = x[allowed[x.sum(axis=1)]]
        take = min(count - got, keep.shape[0])
        out[got : got + take] = keep[:take]
        got += take
    return out


def sample_pattern(cfg: SparseSignalConfig, seed: int) -> tuple[np.ndarray, int]:
    """One pattern and its weight."""
    x = sample_patterns(cfg, seed, 1)[0]
    return x, int(x.sum())


# ---------------------------------------------------------------------------
# Exact warden states
# ---------------------------------------------------------------------------


def _weight_class_sums(rho0: np.ndarray, rho_pi: np.ndarray, n: int) -> list[np.ndarray]:
    """Unweighted sums over all weight-w patterns of the n-fold products,
    indexed by w. Built with the two-term recursion that appends one slot at
    a time, so the cost stays polynomial in the output size."""
    d = rho0.shape[0]
    if d**n > DIM_CAP:
        raise DimensionCapError(
            f"warden dimension {d}**{n} exceeds the dense cap of {DIM_CAP}"
        )
    level = [np.ones((1, 1), dtype=np.complex128)]
    for _ in range(n):
        nxt = []
        for w in range(len(level) + 1):
            acc = None
            if w < len(level):
                acc = np.kron(level[w], rho0)
            if w > 0:
                term = np.kron(level[w - 1], rho_pi)
                acc = term if acc is None else acc + term
            nxt.append(acc)
        level = nxt
    return level


def _willie_state_matrix(model: WillieModel, cfg: SparseSignalConfig) -> np.ndarray:
    sums = _weight_class_sums(model.rho0.mat, model.rho_pi.mat, cfg.n)
    p_a = weight_set_prob(cfg)
    out = np.zeros_like(sums[0])
    for w in cfg.weight_set():
        out += cfg.q**w * (1.0 - cfg.q) ** (cfg.n - w) * sums[w]
    return out / p_a


def willie_state_exact(model: WillieModel, cfg: SparseSignalConfig) -> DensityOperator:
    """The warden's exact n-use output under transmission: the weight-set
    mixture of per-slot products of rho_pi (signal slots) and rho0
    (innocent slots)."""
    return DensityOperator(_willie_state_matrix(model, cfg))


# ---------------------------------------------------------------------------
# Divergence chain and decomposition
# ---------------------------------------------------------------------------


class BoundChain(NamedTuple):
    """Exact divergence, its product-state surrogate computed two ways, and
    the chi-square upper bound (all in bits)."""

    d_exact: float
    d_product: float
    d_single_scaled: float
    d_chi2_bound: float


def _mixed_single_use(model: WillieModel, q: float) -> DensityOperator:
    return DensityOperator((1.0 - q) * model.rho0.mat + q * model.rho_pi.mat)


def bound_chain(model: WillieModel, cfg: SparseSignalConfig) -> BoundChain:
    """Evaluate the covertness bound chain at one configuration.

    d_exact is the divergence of the exact warden state from the innocent
    product; d_product replaces the warden state with the n-fold power of
    the single-use mixture; d_single_scaled is n times the single-use
    divergence (equal to d_product by additivity); d_chi2_bound is
    q^2 n chi2(rho_pi || rho0) converted to bits, which upper-bounds both
    product forms.
    """
    if not support_contained(model.rho_pi, model.rho0):
        raise SupportViolationError(
            "support(rho_pi) is not contained in support(rho0)"
        )
    mix = _mixed_single_use(model, cfg.q)
    rho_n = willie_state_exact(model, cfg)
    prod_mix = DensityOperator(tensor_power(mix.mat, cfg.n))
    prod_inn = DensityOperator(tensor_power(model.rho0.mat, cfg.n))
    d_exact = qre(rho_n, prod_inn)
    d_product = qre(prod_mix, prod_inn)
    d_single = cfg.n * qre(mix, model.rho0)
    d_bound = cfg.q**2 * cfg.n * chi2(model.rho_pi, model.rho0) / LN2
    if abs(d_product - d_single) > 1e-9 * max(1.0, abs(d_single)):
        raise RuntimeError(
            f"additivity check failed: {d_product} vs {d_single}"
        )
    if d_single > d_bound + 1e-9:
        raise RuntimeError(
            f"chi-square bound violated: {d_single} > {d_bound}"
        )
    return BoundChain(d_exact, d_product, d_single, d_bound)


def binary_entropy(x: float) -> float:
    """Binary entropy in bits with the 0 log 0 = 0 convention."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"argument must be in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


@dataclass(frozen=True)
class DecompositionReport:
    """Exact three-term decomposition of the warden divergence and the
    closed-form bounds on its correction terms (all divergences in bits).

    ``qre_total`` equals ``term_product + term_entropy + term_cross`` up to
    round-off: the decomposition is an identity, not a bound. ``epsilon`` is
    half the trace distance between the product surrogate and the exact
    state; it obeys epsilon <= 1 - p(A) <= chernoff_bound. The entropy term
    obeys the entropy-continuity bound ``fannes_bound``; the cross term obeys
    the Hoelder bound ``holder_bound``, which is unavailable when rho0 is
    singular."""

    qre_total: float
    term_product: float
    term_entropy: float
    term_cross: float
    epsilon: float
    chernoff_bound: float
    fannes_bound: float
    holder_bound: Optional[float] = field(default=None)


def _log2_on_support(rho: np.ndarray) -> np.ndarray:
    vals, vecs = eig_hermitian(rho)
    safe = np.where(vals > SUPPORT_TOL, vals, 1.0)
    logs = np.where(vals > SUPPORT_TOL, np.log2(safe), 0.0)
    return (vecs * logs) @ vecs.conj().T


def decomposition_report(model: WillieModel, cfg: SparseSignalConfig) -> DecompositionReport:
    """Compute the decomposition terms exactly and check each bound.

    Raises ``RuntimeError`` if any mathematically guaranteed relation fails
    beyond round-off slack, since that indicates an implementation bug
    rather than a property of the model.
    """
    if not support_contained(model.rho_pi, model.rho0):
        raise SupportViolationError(
            "support(rho_pi) is not contained in support(rho0)"
        )
    n, d = cfg.n, model.dim
    mix = _mixed_single_use(model, cfg.q)
    rho_n = willie_state_exact(model, cfg)
    prod_mix = DensityOperator(tensor_power(mix.mat, n))
    prod_inn = DensityOperator(tensor_power(model.rho0.mat, n))

    qre_total = qre(rho_n, prod_inn)
    term_product = qre(prod_mix, prod_inn)
    term_entropy = vn_entropy(prod_mix) - vn_entropy(rho_n)
    # Cross term against log of the innocent product, built as the sum of
    # single-site log terms.
    log_site = _log2_on_support(model.rho0.mat)
    log_prod = log_site
    eye = np.eye(d, dtype=np.complex128)
    for _ in range(n - 1):
        log_prod = np.kron(log_prod, eye) + np.kron(
            np.eye(log_prod.shape[0], dtype=np.complex128), log_site
        )
    delta = prod_mix.mat - rho_n.mat
    term_cross = float(np.real(np.trace(delta @ log_prod)))

    epsilon = 0.5 * trace_norm(delta)
    p_abar = 1.0 - weight_set_prob(cfg)
    chern = chernoff_epsilon(cfg)
    fannes = epsilon * n * math.log2(d) + binary_entropy(min(1.0, epsilon))
    lam_min = float(np.min(np.linalg.eigvalsh(model.rho0.mat)))
    holder = (
        2.0 * epsilon * n * math.log2(1.0 / lam_min)
        if lam_min > SUPPORT_TOL
        else None
    )

    recon = term_product + term_entropy + term_cross
    if not math.isinf(qre_total) and abs(qre_total - recon) > 1e-7:
        raise RuntimeError(
            f"decomposition identity failed: {qre_total} vs {recon}"
        )
    if epsilon > p_abar + 1e-9:
        raise RuntimeError(f"data-processing step failed: {epsilon} > {p_abar}")
    if p_abar > chern + 1e-12:
        raise RuntimeError(f"tail bound failed: {p_abar} > {chern}")
    if abs(term_entropy) > fannes + 1e-9:
        raise RuntimeError(
            f"entropy-continuity bound failed: {term_entropy} vs {fannes}"
        )
    if holder is not None and abs(term_cross) > holder + 1e-9:
        raise RuntimeError(f"cross-term bound failed: {term_cross} vs {holder}")
    return DecompositionReport(
        qre_total=qre_total,
        term_product=term_product,
        term_entropy=term_entropy,
        term_cross=term_cross,
        epsilon=epsilon,
        chernoff_bound=chern,
        fannes_bound=fannes,
        holder_bound=holder,
    )
