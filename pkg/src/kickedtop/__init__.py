"""Quantum kicked top: symmetric-subspace and full qubit-space simulation.

Subpackages and modules
-----------------------
symmetric   dynamics in the ``N + 1`` dimensional Dicke subspace
full        ``2**N`` dimensional dynamics with coupling or field disorder
observables entanglement entropies, symmetric overlap, effective dimension
classical   classical top map, ensembles, noisy rotor and cat maps
models      closed-form growth curves and scikit-learn style fitters
spectral    quasienergies, unfolding and spacing statistics
runner      configuration, experiment drivers, result tables and the CLI
"""

__version__ = "0.1.0"
