"""qhahn: a numerical laboratory for the q-Hahn TASEP.

Exact parallel-update simulation of the particle system, the full set of
scaling coefficients and KPZ scaling-theory quantities, steepest-descent
diagnostics, Fredholm determinants (finite-time kernel and Tracy-Widom
limits), and a seeded experiment harness that verifies the Tracy-Widom
limit of the rescaled tagged-particle position at desk scale.
"""

__version__ = "0.1.0"

from .scaling import ModelParams, ScalingCoefficients, coefficients

__all__ = ["ModelParams", "ScalingCoefficients", "coefficients", "__version__"]
