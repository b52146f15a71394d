"""Sparse polynomial Hamiltonians on the truncated mode window.

A monomial is a multiset of slots ``(j, s)`` with ``s = +1`` for a ``z_j``
factor and ``s = -1`` for a ``zbar_j`` factor, stored as a sorted tuple so
equal monomials compare equal.  Every stored monomial must satisfy the
translation-invariance selection rule ``sum s_i j_i = 0`` (module-wide
policy; the quartic constructors and the Poisson bracket both preserve it).

Coefficients are kept complex: the real Hamiltonians (P, Lambda, Lambda+)
have real coefficients, while normal-form generators obtained by dividing
by ``i * (divisor)`` are purely imaginary.  Real-valuedness on the real
subspace corresponds to conjugate-symmetric coefficients under sign flip.

Poisson bracket convention:
    {F, G} = i * sum_j (dF/dzbar_j dG/dz_j - dF/dz_j dG/dzbar_j)
so that for the diagonal quadratic Lambda = sum lambda_j z_j zbar_j,
    {Lambda, m} = i (sigma . lambda) m    for a monomial m.
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Callable, Iterable

import numpy as np

from .spectral_core import FourierState, FrequencyTable, SpaceParams, \
    weighted_norm

TWO_PI = 2.0 * math.pi

Slots = tuple[tuple[int, int], ...]

PRUNE_DEFAULT = 1e-16


def canonical(slots: Iterable[tuple[int, int]]) -> Slots:
    return tuple(sorted(slots))


def momentum(slots: Slots) -> int:
    return sum(j * s for j, s in slots)


def gauge_sum(slots: Slots) -> int:
    return sum(s for _, s in slots)


def sigma_string(slots: Slots) -> str:
    return "".join("+" if s > 0 else "-" for _, s in slots)


class Monomial:
    """Thin wrapper used at API boundaries; internally plain slot tuples
    are passed around."""

    __slots__ = ("slots",)

    def __init__(self, jvec: Iterable[int], sigvec: Iterable[int]):
        jv = tuple(jvec)
        sv = tuple(1 if s in (1, "+") else -1 for s in sigvec)
        if len(jv) != len(sv):
            raise ValueError("jvec and sigvec lengths differ")
        self.slots = canonical(zip(jv, sv))

    @property
    def momentum(self) -> int:
        return momentum(self.slots)

    @property
    def gauge_sum(self) -> int:
        return gauge_sum(self.slots)

    def __eq__(self, other):
        return isinstance(other, Monomial) and self.slots == other.slots

    def __hash__(self):
        return hash(self.slots)

    def __repr__(self):
        return f"Monomial({self.slots})"


class PolyHamiltonian:
    """Sparse polynomial Hamiltonian: map from canonical slot tuples to
    coefficients.  Zero coefficients are never stored."""

    def __init__(self, terms: dict[Slots, complex] | None = None,
                 check: bool = True):
        self.terms: dict[Slots, complex] = {}
        if terms:
            for m, c in terms.items():
                if c == 0:
                    continue
                m = canonical(m)
                if check and momentum(m) != 0:
                    raise ValueError(
                        f"monomial {m} violates momentum selection rule")
                self.terms[m] = self.terms.get(m, 0) + c

    # -- basic algebra ----------------------------------------------------

    def __add__(self, other: "PolyHamiltonian") -> "PolyHamiltonian":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return PolyHamiltonian(
            {m: c for m, c in out.items() if c != 0}, check=False)

    def __sub__(self, other: "PolyHamiltonian") -> "PolyHamiltonian":
        return self + other.scale(-1.0)

    def scale(self, a: complex) -> "PolyHamiltonian":
        return PolyHamiltonian(
            {m: a * c for m, c in self.terms.items()}, check=False)

    def prune(self, tol: float = PRUNE_DEFAULT) -> "PolyHamiltonian":
        return PolyHamiltonian(
            {m: c for m, c in self.terms.items() if abs(c) > tol},
            check=False)

    def coefficient(self, jvec: Iterable[int],
                    sigvec: Iterable[int]) -> complex:
        return self.terms.get(Monomial(jvec, sigvec).slots, 0.0)

    def restrict(self, pred: Callable[[Slots], bool]) -> "PolyHamiltonian":
        return PolyHamiltonian(
            {m: c for m, c in self.terms.items() if pred(m)}, check=False)

    @property
    def degrees(self) -> tuple[int, int]:
        if not self.terms:
            return (0, 0)
        lens = [len(m) for m in self.terms]
        return (min(lens), max(lens))

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __len__(self):
        return len(self.terms)

    def is_gauge_invariant(self) -> bool:
        return all(gauge_sum(m) == 0 for m in self.terms)

    # -- evaluation -------------------------------------------------------

    def value(self, state: FourierState) -> complex:
        M = state.M
        tot = 0.0 + 0.0j
        for m, c in self.terms.items():
            v = c
            for j, s in m:
                v *= state.z[j + M] if s > 0 else state.zbar[j + M]
            tot += v
        return tot

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for m in sorted(self.terms):
            c = self.terms[m]
            coeff = repr(c.real) if c.imag == 0 else repr(c).strip("()")
            js = " ".join(str(j) for j, _ in m)
            lines.append(f"{sigma_string(m)} {js} {coeff}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "PolyHamiltonian":
        terms: dict[Slots, complex] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            sig, coeff = parts[0], complex(parts[-1])
            js = [int(t) for t in parts[1:-1]]
            if len(js) != len(sig):
                raise ValueError(f"malformed term line: {line!r}")
            terms[Monomial(js, sig).slots] = coeff
        return cls(terms)


def build_Lambda(freq: FrequencyTable) -> PolyHamiltonian:
    """Diagonal quadratic sum lambda_j z_j zbar_j."""
    terms = {}
    for j in range(-freq.M, freq.M + 1):
        terms[canonical([(j, 1), (j, -1)])] = freq.lam_at(j)
    return PolyHamiltonian(terms, check=False)


def build_Lambda_nls(M: int) -> PolyHamiltonian:
    """Diagonal quadratic with the parabolic frequencies j^2/2."""
    terms = {}
    for j in range(-M, M + 1):
        if j != 0:
            terms[canonical([(j, 1), (j, -1)])] = 0.5 * j * j
    return PolyHamiltonian(terms, check=False)


def _quartic_multisets(M: int):
    """Yield (slots, multiplicity) for all momentum-zero degree-4 multisets
    of slots (j, s), |j| <= M.  Multiplicity counts ordered arrangements."""
    from itertools import combinations_with_replacement
    slot_list = [(j, s) for j in range(-M, M + 1) for s in (-1, 1)]
    for combo in combinations_with_replacement(slot_list, 4):
        if momentum(combo) != 0:
            continue
        counts: dict[tuple[int, int], int] = {}
        for sl in combo:
            counts[sl] = counts.get(sl, 0) + 1
        mult = 24
        for c in counts.values():
            mult //= math.factorial(c)
        yield combo, mult


def build_P(freq: FrequencyTable, M: int | None = None) -> PolyHamiltonian:
    """Quartic part of the cubic-KG Hamiltonian in dressed variables.

    Canonical (merged) coefficient: (#ordered arrangements) *
    (1/32pi) / sqrt(w_{j1} w_{j2} w_{j3} w_{j4}).
    """
    M = freq.M if M is None else M
    if M > freq.M:
        raise ValueError("requested truncation exceeds frequency table")
    terms = {}
    base = 1.0 / (16.0 * TWO_PI)
    for combo, mult in _quartic_multisets(M):
        wprod = 1.0
        for j, _ in combo:
            wprod *= freq.w_at(j)
        terms[combo] = mult * base / math.sqrt(wprod)
    return PolyHamiltonian(terms, check=False)


def build_P_nls(M: int) -> PolyHamiltonian:
    """Quartic NLS Hamiltonian: the gauge-invariant, weight-free limit of
    build_P (per-arrangement coefficient 1/32pi, i.e. 3/(16pi) per
    sigma-pattern)."""
    terms = {}
    base = 1.0 / (16.0 * TWO_PI)
    for combo, mult in _quartic_multisets(M):
        if gauge_sum(combo) != 0:
            continue
        terms[combo] = mult * base
    return PolyHamiltonian(terms, check=False)


def ordered_coefficient(freq: FrequencyTable | None, jvec, sigvec) -> float:
    """Per sigma-pattern coefficient of P at an ordered tuple (jvec, sigvec):
    (1/32pi) * binom(4, sigma_hat) / sqrt(prod w), zero off the momentum
    shell.  With freq=None the weights are dropped (NLS normalization)."""
    jv = tuple(jvec)
    sv = tuple(1 if s in (1, "+") else -1 for s in sigvec)
    if len(jv) != 4 or len(sv) != 4:
        raise ValueError("ordered_coefficient expects degree-4 tuples")
    if sum(j * s for j, s in zip(jv, sv)) != 0:
        return 0.0
    sigma_hat = (4 + sum(sv)) // 2
    coeff = math.comb(4, sigma_hat) / (16.0 * TWO_PI)
    if freq is not None:
        for j in jv:
            coeff /= math.sqrt(freq.w_at(j))
    return coeff


def gauge_project(H: PolyHamiltonian) -> PolyHamiltonian:
    """Keep exactly the monomials with zero gauge charge (sum sigma = 0)."""
    return H.restrict(lambda m: gauge_sum(m) == 0)


def split_P(freq: FrequencyTable, M: int | None = None
            ) -> tuple[PolyHamiltonian, PolyHamiltonian, PolyHamiltonian]:
    """Decompose build_P = P_nls + P_ng + P_r.

    P_ng is the non-gauge part, P_r the gauge part minus the NLS limit;
    the reconstruction identity holds coefficient-wise to rounding.
    """
    M = freq.M if M is None else M
    P = build_P(freq, M)
    P_nls = build_P_nls(M)
    Pg = gauge_project(P)
    P_ng = P - Pg
    P_r = Pg - P_nls
    return P_nls, P_ng, P_r


def poisson_bracket(F: PolyHamiltonian, G: PolyHamiltonian,
                    max_deg: int = 6,
                    prune: float = PRUNE_DEFAULT) -> PolyHamiltonian:
    """Graded Poisson bracket, truncated at degree max_deg.

    Exact for polynomials below the truncation; antisymmetric; the bracket
    of translation-invariant operands is translation invariant.
    """
    out: dict[Slots, complex] = defaultdict(complex)
    gterms = list(G.terms.items())
    for mf, cf in F.terms.items():
        nf = len(mf)
        for mg, cg in gterms:
            if nf + len(mg) - 2 > max_deg:
                continue
            for a in range(nf):
                ja, sa = mf[a]
                for b in range(len(mg)):
                    jb, sb = mg[b]
                    if ja == jb and sa == -sb:
                        mono = canonical(mf[:a] + mf[a + 1:]
                                         + mg[:b] + mg[b + 1:])
                        out[mono] += 1j * sb * cf * cg
    return PolyHamiltonian(
        {m: c for m, c in out.items() if abs(c) > prune}, check=False)


def vector_field(H: PolyHamiltonian, state: FourierState
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian vector field ( -i dH/dzbar, +i dH/dz ) at `state`."""
    M = state.M
    n = 2 * M + 1
    dz = np.zeros(n, dtype=complex)      # dH/dz_j
    dzb = np.zeros(n, dtype=complex)     # dH/dzbar_j
    for m, c in H.terms.items():
        vals = [state.z[j + M] if s > 0 else state.zbar[j + M] for j, s in m]
        # derivative w.r.t. each distinct slot
        seen = set()
        for a, (j, s) in enumerate(m):
            if (j, s) in seen:
                continue
            seen.add((j, s))
            cnt = sum(1 for sl in m if sl == (j, s))
            prod = c * cnt
            for b, v in enumerate(vals):
                if b != a:
                    prod *= v
            if s > 0:
                dz[j + M] += prod
            else:
                dzb[j + M] += prod
    return -1j * dzb, 1j * dz


def vector_field_norm_bound(H: PolyHamiltonian, state: FourierState,
                            params: SpaceParams, freq: FrequencyTable,
                            b: list[np.ndarray] | None = None) -> float:
    """Majorant for ||X_H(state)|| from the factored-coefficient estimate:

        ||X_F|| <= |F|_inf * sum_t || b^(t) (star_{k != t} w^(k)) ||,
        w^(k)_j = b^(k)_j (|z_j| + |zbar_j|).

    `b` supplies one positive dressing vector per slot (default: all ones).
    |F|_inf is taken over the canonical merged coefficients after dividing
    out the dressings (may exceed the raw-coefficient sup by a factor
    bounded by 4!).
    """
    degs = H.degrees
    if degs[0] != degs[1]:
        raise ValueError("norm bound requires a homogeneous Hamiltonian")
    n = degs[0]
    M = state.M
    if b is None:
        b = [np.ones(2 * M + 1) for _ in range(n)]
    if len(b) != n:
        raise ValueError(f"need {n} dressing vectors, got {len(b)}")
    for bt in b:
        if np.any(np.asarray(bt) <= 0):
            raise ValueError("dressing vectors must be strictly positive")

    f_inf = 0.0
    for m, c in H.terms.items():
        denom = 1.0
        for t, (j, _) in enumerate(m):
            denom *= float(b[t][j + M])
        f_inf = max(f_inf, abs(c) / denom)

    absz = np.abs(state.z) + np.abs(state.zbar)
    wvecs = [np.asarray(bt) * absz for bt in b]

    total = np.zeros(2 * M + 1)
    for t in range(n):
        # full (untruncated) convolution: truncating intermediates could
        # drop valid index combinations and void the majorant guarantee
        conv = None
        for k in range(n):
            if k == t:
                continue
            conv = wvecs[k] if conv is None else np.convolve(conv, wvecs[k])
        center = (len(conv) - 1) // 2
        window = conv[center - M:center + M + 1]
        total = total + np.asarray(b[t]) * window
    # majorant state: identical bound for the z and zbar components
    maj = FourierState(f_inf * total.astype(complex),
                       f_inf * total.astype(complex))
    return weighted_norm(maj, params, freq)


def dressing_for_P(freq: FrequencyTable) -> list[np.ndarray]:
    """Slot dressings b^(t)_j = w_j^{-1/2} matching build_P's coefficient
    structure."""
    return [freq.w ** -0.5 for _ in range(4)]
