"""Finite-size random point field laboratory.

Sampling of Gaussian beta ensembles with bulk and soft-edge scalings,
the Airy determinantal theory, compensated log-gas interaction algebra,
numerical evaluation of the tail and tightness conditions behind the
quasi-Gibbs property, and the associated interacting diffusion.
"""

__version__ = "0.1.0"
