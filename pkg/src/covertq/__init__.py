"""Covert qubit communication over noisy channels: exact small-system analysis.

Subpackage layout:

- ``linops``    dense complex linear algebra (tensor products, partial traces,
  Hermitian eigendecompositions, trace norms) and the validated density
  operator type
- ``channels``  Kraus-form channels, Choi matrices, complementary channels,
  standard builders, channel spec file I/O, and the warden-side model
- ``twirl``     qubit-subspace projection statistics, Pauli twirling of the
  conditional channel, and the combined Pauli error vector
- ``covert``    divergences (relative entropy, chi-square), detection-error
  and support relations, covertness constants and budgets, Gibbs states
- ``sparse``    sparse-signaling weight sets, exact tail probabilities,
  exact warden states at small n, and the divergence decomposition report
- ``rates``     hashing and distillation rates, throughput lower bounds
- ``detect``    exact hypothesis-test evaluation and pipeline tomography
- ``cli``       command-line front end (report, srl-curve, detect-sim,
  twirl-check)
"""

__version__ = "0.1.0"

_SUBMODULES = (
    "linops",
    "channels",
    "twirl",
    "covert",
    "sparse",
    "rates",
    "detect",
    "cli",
    "errors",
)


def __getattr__(name):
    # Lazy submodule access keeps `import covertq` cheap so the CLI can pin
    # BLAS thread counts before numpy loads.
    if name in _SUBMODULES:
        import importlib

        return importlib.import_module(f"covertq.{name}")
    raise AttributeError(f"module 'covertq' has no attribute {name!r}")
