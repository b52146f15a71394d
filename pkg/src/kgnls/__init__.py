"""Finite-truncation numerics for quasi-periodic tori of the cubic
Klein-Gordon equation in the large-speed regime and its Schrodinger limit.

Subpackages cover: weighted Fourier sequence spaces, sparse polynomial
Hamiltonians and their Poisson algebra, the quartic normal-form step,
frequency maps, small-divisor scans and measure estimation, the KAM
parameter cascade, and a Galerkin torus laboratory.
"""

__version__ = "0.1.0"
