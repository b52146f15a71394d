"""Truncated weighted Fourier sequence spaces.

Modes live on the symmetric index window ``j in {-M..M}``.  The linear
dispersion is ``lambda_j = c*sqrt(j^2 + c^2)``; with ``h = 1/c^2`` it splits
as ``lambda_j = 1/h + nu_j`` where ``nu_j = j^2/(1 + sqrt(1 + h j^2))``.
The mode weights are ``w_j = lambda_j / c^2 = sqrt(1 + j^2/c^2)``.

Norm convention: ``<j> := sqrt(1 + j^2)`` throughout (documented choice; the
bracket is only fixed up to equivalent rescalings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def lambda_freq(c: float, j: int | np.ndarray) -> float | np.ndarray:
    """Linear frequency c*sqrt(j^2 + c^2).  Even in j."""
    if c <= 0:
        raise ValueError(f"speed parameter must be positive, got c={c}")
    j = np.asarray(j, dtype=float)
    out = c * np.sqrt(j * j + c * c)
    return out.item() if out.ndim == 0 else out


def nu(h: float, j: int | np.ndarray) -> float | np.ndarray:
    """Shifted frequency j^2/(1 + sqrt(1 + h j^2)), so lambda_j = 1/h + nu_j.

    Satisfies 0 <= nu_j <= j^2/2 and |nu_j - j^2/2| <= h*j^4/2.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got h={h}")
    j = np.asarray(j, dtype=float)
    out = j * j / (1.0 + np.sqrt(1.0 + h * j * j))
    return out.item() if out.ndim == 0 else out


def bracket(j: int | np.ndarray) -> float | np.ndarray:
    """Japanese bracket <j> = sqrt(1 + j^2)."""
    j = np.asarray(j, dtype=float)
    out = np.sqrt(1.0 + j * j)
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class SpaceParams:
    """Parameters (a, p, beta) of the weighted sequence space, plus the
    truncation radius M."""

    a: float = 0.0
    p: float = 5.0  # any p > 9/2 is fine; 5 is the working default
    beta: float = 0.0
    M: int = 16

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("analyticity width a must be >= 0")
        if self.p <= 0.5:
            raise ValueError("Sobolev exponent p must exceed 1/2")
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError("weight exponent beta must lie in [0, 1]")
        if self.M < 1:
            raise ValueError("truncation M must be >= 1")


@dataclass(frozen=True)
class FrequencyTable:
    """Immutable per-(c, M) table of lambda_j, nu_j and weights w_j."""

    c: float
    M: int
    h: float = field(init=False)
    lam: np.ndarray = field(init=False)
    nu: np.ndarray = field(init=False)
    w: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("speed parameter c must be positive")
        if self.M < 1:
            raise ValueError("truncation M must be >= 1")
        h = 1.0 / (self.c * self.c)
        j = np.arange(-self.M, self.M + 1)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "lam", lambda_freq(self.c, j))
        object.__setattr__(self, "nu", nu(h, j))
        object.__setattr__(self, "w", np.sqrt(1.0 + h * j.astype(float) ** 2))
        self.lam.setflags(write=False)
        self.nu.setflags(write=False)
        self.w.setflags(write=False)

    def index(self, j: int) -> int:
        if abs(j) > self.M:
            raise IndexError(f"mode {j} outside truncation |j| <= {self.M}")
        return j + self.M

    def lam_at(self, j: int) -> float:
        return float(self.lam[self.index(j)])

    def nu_at(self, j: int) -> float:
        return float(self.nu[self.index(j)])

    def w_at(self, j: int) -> float:
        return float(self.w[self.index(j)])


@dataclass
class FourierState:
    """A truncated phase-space point (z, zbar) on |j| <= M.

    zbar is carried as an independent component; `real_representation`
    checks whether it is the conjugate of z (i.e. the state represents a
    real field).
    """

    z: np.ndarray
    zbar: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        self.zbar = np.asarray(self.zbar, dtype=complex)
        if self.z.shape != self.zbar.shape or self.z.ndim != 1:
            raise ValueError("z and zbar must be 1-d arrays of equal length")
        if len(self.z) % 2 != 1:
            raise ValueError("state length must be odd (modes -M..M)")

    @property
    def M(self) -> int:
        return (len(self.z) - 1) // 2

    @classmethod
    def zero(cls, M: int) -> "FourierState":
        n = 2 * M + 1
        return cls(np.zeros(n, dtype=complex), np.zeros(n, dtype=complex))

    @classmethod
    def from_modes(cls, M: int, modes: dict[int, complex]) -> "FourierState":
        """Real-representation state with z_j set from `modes`, zbar = conj(z)."""
        st = cls.zero(M)
        for j, v in modes.items():
            st.z[j + M] = v
        st.zbar = np.conj(st.z)
        return st

    def real_representation(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.zbar - np.conj(self.z))) <= tol)

    def copy(self) -> "FourierState":
        return FourierState(self.z.copy(), self.zbar.copy())


def mode_weights(params: SpaceParams, freq: FrequencyTable) -> np.ndarray:
    """Per-mode norm weights e^{2a|j|} <j>^{2p} w_j^{2 beta}."""
    if params.M != freq.M:
        raise ValueError("SpaceParams and FrequencyTable truncations differ")
    j = np.arange(-params.M, params.M + 1, dtype=float)
    return (np.exp(2.0 * params.a * np.abs(j))
            * (1.0 + j * j) ** params.p
            * freq.w ** (2.0 * params.beta))


def seq_norm(x: np.ndarray, params: SpaceParams, freq: FrequencyTable) -> float:
    """Weighted norm of a single sequence (not doubled)."""
    wts = mode_weights(params, freq)
    terms = (np.abs(np.asarray(x)) ** 2) * wts
    # compensated accumulation keeps the sharp invariant tests honest
    return math.sqrt(math.fsum(terms.tolist()))


def weighted_norm(state: FourierState, params: SpaceParams,
                  freq: FrequencyTable) -> float:
    """Doubled phase-space norm over (z, zbar)."""
    if state.M != params.M:
        raise ValueError("state truncation does not match SpaceParams")
    wts = mode_weights(params, freq)
    terms = (np.abs(state.z) ** 2 + np.abs(state.zbar) ** 2) * wts
    return math.sqrt(math.fsum(terms.tolist()))


def convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Truncated discrete convolution (x*y)_j = sum_k x_{j-k} y_k.

    Both inputs live on {-M..M}; output is truncated back to the same
    window (indices outside are discarded, consistent with Galerkin
    projection).  Identity element delta_0; delta_a * delta_b = delta_{a+b}.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1 or len(x) % 2 != 1:
        raise ValueError("convolve expects equal odd-length 1-d arrays")
    M = (len(x) - 1) // 2
    full = np.convolve(x, y)  # indices -2M .. 2M
    return full[M:3 * M + 1]
