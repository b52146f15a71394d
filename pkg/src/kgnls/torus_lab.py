"""Galerkin torus laboratory: truncated flows of the two systems, the
normal-form torus construction, Gauss-Newton refinement of invariant-torus
embeddings, gauge-transformed distances, and the scaling studies.

Right sides (modes |j| <= M, dressing g_j = (z_j + zbar_{-j}) / sqrt(w_j)):
    KG : dz_q/dt = -i lambda_q z_q - (i/8 pi) w_q^{-1/2} (g*g*g)_q
    NLS: dz_m/dt = -(i/2) m^2 z_m - (3 i/8 pi) sum_{j1+j2-j3=m} z z zbar
with full (untruncated) intermediate convolutions read back on the mode
window.  Time stepping is Strang splitting: exact linear rotation halves
around an RK4 step of the nonlinear part.
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .spectral_core import (FourierState, FrequencyTable, SpaceParams,
                            seq_norm)

TWO_PI = 2.0 * math.pi


def _conv_full(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _window(full: np.ndarray, M: int) -> np.ndarray:
    """Central window |j| <= M of a full convolution array."""
    center = (len(full) - 1) // 2
    return full[center - M:center + M + 1]


@dataclass
class TruncatedSystem:
    """One truncated flow; kind 'kg' (needs c) or 'nls'."""
    kind: str
    M: int
    c: float | None = None

    def __post_init__(self):
        if self.kind not in ("kg", "nls"):
            raise ValueError("kind must be 'kg' or 'nls'")
        if self.kind == "kg":
            if self.c is None or self.c <= 0:
                raise ValueError("the KG system needs a positive c")
            self._ft = FrequencyTable(c=self.c, M=self.M)
            self._lam = self._ft.lam
            self._sw = np.sqrt(self._ft.w)
        else:
            j = np.arange(-self.M, self.M + 1, dtype=float)
            self._lam = 0.5 * j * j
            self._sw = np.ones(2 * self.M + 1)

    @property
    def linear_freqs(self) -> np.ndarray:
        return self._lam

    @property
    def fastest_frequency(self) -> float:
        return float(np.max(np.abs(self._lam)))

    def nonlinear_rhs(self, z: np.ndarray, zbar: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray]:
        M = self.M
        if self.kind == "kg":
            g = (z + zbar[::-1]) / self._sw
            cube = _window(_conv_full(_conv_full(g, g), g), M)
            dz = -1j / (8.0 * math.pi) * cube / self._sw
            # conjugate-variable field: the reflected cube
            dzb = 1j / (8.0 * math.pi) * cube[::-1] / self._sw
            return dz, dzb
        zeta = zbar[::-1]
        cube = _window(_conv_full(_conv_full(z, z), zeta), M)
        dz = -3j / (8.0 * math.pi) * cube
        cube_b = _window(_conv_full(_conv_full(zbar, zbar), z[::-1]), M)
        dzb = 3j / (8.0 * math.pi) * cube_b
        return dz, dzb

    def rhs(self, state: FourierState) -> tuple[np.ndarray, np.ndarray]:
        dz, dzb = self.nonlinear_rhs(state.z, state.zbar)
        return (dz - 1j * self._lam * state.z,
                dzb + 1j * self._lam * state.zbar)

    def hamiltonian_value(self, state: FourierState) -> float:
        z, zbar = state.z, state.zbar
        quad = np.sum(self._lam * z * zbar)
        if self.kind == "kg":
            g = (z + zbar[::-1]) / self._sw
            cube = _conv_full(_conv_full(g, g), g)
            quart = np.sum(g * _window(cube, self.M)[::-1]) / (32.0 * math.pi)
        else:
            zz = _conv_full(z, z)
            bb = _conv_full(zbar, zbar)
            quart = 3.0 / (16.0 * math.pi) * np.sum(zz * bb)
        return float((quad + quart).real)

    def mass(self, state: FourierState) -> float:
        return float(np.sum(state.z * state.zbar).real)

    def momentum(self, state: FourierState) -> float:
        j = np.arange(-self.M, self.M + 1, dtype=float)
        return float(np.sum(j * state.z * state.zbar).real)


def kg_rhs(c: float, state: FourierState) -> tuple[np.ndarray, np.ndarray]:
    return TruncatedSystem(kind="kg", M=state.M, c=c).rhs(state)


def nls_rhs(state: FourierState) -> tuple[np.ndarray, np.ndarray]:
    return TruncatedSystem(kind="nls", M=state.M).rhs(state)


@dataclass
class SimulationRecord:
    times: np.ndarray
    states: list
    hamiltonian: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        for tr in (self.states, self.hamiltonian, self.mass, self.momentum):
            if len(tr) != n:
                raise ValueError("trace length must match the time grid")


def default_dt(system: TruncatedSystem) -> float:
    return 0.05 / system.fastest_frequency


def integrate(system: TruncatedSystem, z0: FourierState, T: float,
              dt: float | None = None, record_every: int = 100,
              strict: bool = False) -> SimulationRecord:
    """Strang splitting with exact linear rotation and an RK4 nonlinear
    step; records Hamiltonian/mass/momentum traces every `record_every`
    steps (and always the final state)."""
    import warnings

    if dt is None:
        dt = default_dt(system)
    if dt * system.fastest_frequency > 0.1:
        msg = (f"dt = {dt:.3e} does not resolve the fastest frequency "
               f"{system.fastest_frequency:.3e}")
        if strict:
            raise ValueError(msg)
        warnings.warn(msg)
    n_steps = max(1, int(round(T / dt)))
    rot_half_z = np.exp(-0.5j * dt * system.linear_freqs)
    rot_half_zb = np.conj(rot_half_z)

    z = z0.z.copy()
    zb = z0.zbar.copy()
    times, states, ham, mass, mom = [], [], [], [], []

    def record(t):
        st = FourierState(z.copy(), zb.copy())
        times.append(t)
        states.append(st)
        ham.append(system.hamiltonian_value(st))
        mass.append(system.mass(st))
        mom.append(system.momentum(st))

    record(0.0)
    for step in range(1, n_steps + 1):
        z *= rot_half_z
        zb *= rot_half_zb
        k1 = system.nonlinear_rhs(z, zb)
        k2 = system.nonlinear_rhs(z + 0.5 * dt * k1[0], zb + 0.5 * dt * k1[1])
        k3 = system.nonlinear_rhs(z + 0.5 * dt * k2[0], zb + 0.5 * dt * k2[1])
        k4 = system.nonlinear_rhs(z + dt * k3[0], zb + dt * k3[1])
        z = z + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        zb = zb + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        z *= rot_half_z
        zb *= rot_half_zb
        if step % record_every == 0 or step == n_steps:
            record(step * dt)
    return SimulationRecord(times=np.array(times), states=states,
                            hamiltonian=np.array(ham), mass=np.array(mass),
                            momentum=np.array(mom))


# --- torus embeddings ------------------------------------------------------

def _harmonics(N: int, Q: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(-Q, Q + 1), repeat=N))


@dataclass
class TorusEmbedding:
    """Angle-Fourier embedding U: T^N -> phase space.  Only the z-component
    harmonics C_q are stored; the conjugate component is determined by the
    reality constraint zbar(theta) = conj(z(theta))."""
    J: tuple[int, ...]
    M: int
    Q: int
    omega: np.ndarray
    coeffs: dict[tuple[int, ...], np.ndarray]

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.shape != (len(self.J),):
            raise ValueError("omega must have one entry per tangential mode")

    @property
    def N(self) -> int:
        return len(self.J)

    def evaluate(self, theta) -> FourierState:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        z = np.zeros(2 * self.M + 1, dtype=complex)
        for q, cq in self.coeffs.items():
            z += cq * np.exp(1j * float(np.dot(q, theta)))
        return FourierState(z=z, zbar=np.conj(z))

    def state_at_time(self, t: float, theta0=None) -> FourierState:
        th = self.omega * t
        if theta0 is not None:
            th = th + np.asarray(theta0, dtype=float)
        return self.evaluate(th)

    def amplitude(self) -> float:
        """Max coefficient magnitude of the fundamental harmonics."""
        out = 0.0
        for n in range(self.N):
            q = tuple(1 if i == n else 0 for i in range(self.N))
            if q in self.coeffs:
                out = max(out, float(np.max(np.abs(self.coeffs[q]))))
        return out

    def copy(self) -> "TorusEmbedding":
        return TorusEmbedding(J=self.J, M=self.M, Q=self.Q,
                              omega=self.omega.copy(),
                              coeffs={q: c.copy()
                                      for q, c in self.coeffs.items()})


def linear_torus(xi, J, M: int, Q: int, omega) -> TorusEmbedding:
    """Fundamental-harmonic seed: z_{j_n}(theta) = sqrt(xi_n) e^{i theta_n}."""
    J = tuple(J)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    coeffs: dict[tuple[int, ...], np.ndarray] = {}
    for n, j in enumerate(J):
        q = tuple(1 if i == n else 0 for i in range(len(J)))
        cq = np.zeros(2 * M + 1, dtype=complex)
        cq[j + M] = math.sqrt(xi[n])
        coeffs[q] = cq
    return TorusEmbedding(J=J, M=M, Q=Q, omega=np.asarray(omega, float),
                          coeffs=coeffs)


def embedding_from_map(fn, J, M: int, Q: int, omega) -> TorusEmbedding:
    """Collocate a map theta -> FourierState on the (2Q+1)^N angle grid and
    extract its harmonics by FFT."""
    J = tuple(J)
    N = len(J)
    n_ang = 2 * Q + 1
    grid_shape = (n_ang,) * N
    vals = np.zeros(grid_shape + (2 * M + 1,), dtype=complex)
    angles = TWO_PI * np.arange(n_ang) / n_ang
    for idx in itertools.product(range(n_ang), repeat=N):
        theta = np.array([angles[i] for i in idx])
        vals[idx] = fn(theta).z
    spec = np.fft.fftn(vals, axes=tuple(range(N))) / n_ang ** N
    coeffs = {}
    for q in _harmonics(N, Q):
        fidx = tuple(qi % n_ang for qi in q)
        cq = spec[fidx]
        if np.max(np.abs(cq)) > 1e-16:
            coeffs[q] = cq
    return TorusEmbedding(J=J, M=M, Q=Q, omega=np.asarray(omega, float),
                          coeffs=coeffs)


# --- normal-form torus -----------------------------------------------------

def flow_time1(G, state: FourierState, steps: int = 64,
               ball_radius: float | None = None) -> FourierState:
    """Time-1 flow of the polynomial field X_G by fixed-step RK4."""
    from .hamiltonian import vector_field

    z = state.z.copy()
    zb = state.zbar.copy()
    h = 1.0 / steps
    start = float(np.max(np.abs(z)))
    limit = ball_radius if ball_radius is not None else 10.0 * max(start, 1e-12)
    for _ in range(steps):
        def f(zz, zzb):
            return vector_field(G, FourierState(zz, zzb))
        k1 = f(z, zb)
        k2 = f(z + 0.5 * h * k1[0], zb + 0.5 * h * k1[1])
        k3 = f(z + 0.5 * h * k2[0], zb + 0.5 * h * k2[1])
        k4 = f(z + h * k3[0], zb + h * k3[1])
        z = z + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        zb = zb + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if np.max(np.abs(z)) > limit:
            raise RuntimeError("flow escaped the analyticity ball")
    return FourierState(z, zb)


def normal_form_torus(xi, J, M: int, G, theta=None,
                      steps: int = 64) -> FourierState:
    """Image under the time-1 normal-form flow of the action-angle point
    z_{j_n} = sqrt(xi_n) e^{i theta_n} (zero elsewhere)."""
    J = tuple(J)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi < 0):
        raise ValueError("actions must be nonnegative")
    if theta is None:
        theta = np.zeros(len(J))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    z = np.zeros(2 * M + 1, dtype=complex)
    for n, j in enumerate(J):
        z[j + M] = math.sqrt(xi[n]) * np.exp(1j * theta[n])
    state = FourierState(z=z, zbar=np.conj(z))
    if G is None or len(G) == 0:
        return state
    return flow_time1(G, state, steps=steps)


# --- Gauss-Newton refinement ----------------------------------------------

@dataclass
class RefineReport:
    converged: bool
    iterations: int
    defect_history: list[float]
    final_defect: float
    message: str = ""
    smallest_singular_value: float | None = None


def _pack(emb: TorusEmbedding, order, with_omega: bool) -> np.ndarray:
    parts = []
    for q in order:
        cq = emb.coeffs.get(q)
        if cq is None:
            cq = np.zeros(2 * emb.M + 1, dtype=complex)
        parts.append(cq.real)
        parts.append(cq.imag)
    if with_omega:
        parts.append(emb.omega)
    return np.concatenate(parts)


def _unpack(x: np.ndarray, emb: TorusEmbedding, order,
            with_omega: bool) -> TorusEmbedding:
    n_mode = 2 * emb.M + 1
    out = emb.copy()
    pos = 0
    coeffs = {}
    for q in order:
        re = x[pos:pos + n_mode]
        im = x[pos + n_mode:pos + 2 * n_mode]
        pos += 2 * n_mode
        coeffs[q] = re + 1j * im
    out.coeffs = coeffs
    if with_omega:
        out.omega = x[pos:pos + emb.N].copy()
    return out


def _collocation_angles(N: int, Q: int) -> list[np.ndarray]:
    n_ang = 2 * Q + 1
    base = TWO_PI * np.arange(n_ang) / n_ang
    return [np.array([base[i] for i in idx])
            for idx in itertools.product(range(n_ang), repeat=N)]


def invariance_residual(emb: TorusEmbedding, system: TruncatedSystem,
                        angles=None) -> np.ndarray:
    """Stacked z-component residual omega . d_theta U - X(U) at the
    collocation angles (complex array)."""
    if angles is None:
        angles = _collocation_angles(emb.N, emb.Q)
    rows = []
    for theta in angles:
        z = np.zeros(2 * emb.M + 1, dtype=complex)
        dz = np.zeros(2 * emb.M + 1, dtype=complex)
        for q, cq in emb.coeffs.items():
            ph = np.exp(1j * float(np.dot(q, theta)))
            z += cq * ph
            dz += 1j * float(np.dot(q, emb.omega)) * cq * ph
        st = FourierState(z=z, zbar=np.conj(z))
        fz, _ = system.rhs(st)
        rows.append(dz - fz)
    return np.concatenate(rows)


def invariance_defect(emb: TorusEmbedding, system: TruncatedSystem) -> float:
    return float(np.max(np.abs(invariance_residual(emb, system))))


def refine_torus(emb: TorusEmbedding, system: TruncatedSystem,
                 mode: str = "fixed_frequency", tol: float = 1e-10,
                 max_iter: int = 25, fd_eps: float = 1e-7
                 ) -> tuple[TorusEmbedding, RefineReport]:
    """Gauss-Newton on the angle-collocated invariance residual.

    mode 'fixed_frequency': omega held, amplitudes solved.
    mode 'fixed_amplitude': omega free, fundamental amplitudes pinned.
    A phase condition (vanishing imaginary part of each fundamental
    tangential coefficient) removes the angle-shift null directions.
    """
    if mode not in ("fixed_frequency", "fixed_amplitude"):
        raise ValueError("unknown refinement mode")
    with_omega = mode == "fixed_amplitude"
    order = _harmonics(emb.N, emb.Q)
    angles = _collocation_angles(emb.N, emb.Q)
    fund = [tuple(1 if i == n else 0 for i in range(emb.N))
            for n in range(emb.N)]
    targets = [float(emb.coeffs[q][j + emb.M].real)
               for q, j in zip(fund, emb.J)]

    def residual(x: np.ndarray) -> np.ndarray:
        e = _unpack(x, emb, order, with_omega)
        res = invariance_residual(e, system, angles)
        rows = [res.real, res.imag]
        # phase conditions
        for q, j in zip(fund, emb.J):
            rows.append(np.array([e.coeffs[q][j + emb.M].imag]))
        if with_omega:
            for q, j, t in zip(fund, emb.J, targets):
                rows.append(np.array([e.coeffs[q][j + emb.M].real - t]))
        return np.concatenate(rows)

    x = _pack(emb, order, with_omega)
    r = residual(x)
    history = [float(np.max(np.abs(r)))]
    smin = None
    for it in range(max_iter):
        if history[-1] < tol:
            return _unpack(x, emb, order, with_omega), RefineReport(
                converged=True, iterations=it, defect_history=history,
                final_defect=history[-1],
                smallest_singular_value=smin)
        # forward-difference Jacobian
        Jac = np.empty((len(r), len(x)))
        for col in range(len(x)):
            xp = x.copy()
            xp[col] += fd_eps
            Jac[:, col] = (residual(xp) - r) / fd_eps
        sv = np.linalg.svd(Jac, compute_uv=False)
        smin = float(sv[-1])
        if smin < 1e-14 * sv[0]:
            return _unpack(x, emb, order, with_omega), RefineReport(
                converged=False, iterations=it, defect_history=history,
                final_defect=history[-1],
                message="singular collocation matrix",
                smallest_singular_value=smin)
        step, *_ = np.linalg.lstsq(Jac, -r, rcond=None)
        lam = 1.0
        for _ in range(6):
            xn = x + lam * step
            rn = residual(xn)
            if np.max(np.abs(rn)) < history[-1]:
                break
            lam *= 0.5
        else:
            return _unpack(x, emb, order, with_omega), RefineReport(
                converged=False, iterations=it, defect_history=history,
                final_defect=history[-1],
                message="line search stalled",
                smallest_singular_value=smin)
        x, r = xn, rn
        history.append(float(np.max(np.abs(r))))
    converged = history[-1] < tol
    return _unpack(x, emb, order, with_omega), RefineReport(
        converged=converged, iterations=max_iter, defect_history=history,
        final_defect=history[-1],
        message="" if converged else "max iterations reached",
        smallest_singular_value=smin)


# --- distances and scaling studies ----------------------------------------

def gauge_distance(record_kg: SimulationRecord, record_nls: SimulationRecord,
                   params: SpaceParams, c: float, sigma: float
                   ) -> tuple[np.ndarray, float]:
    """Trace and sup over the shared time grid of the weighted norm of
    e^{i c^2 t} z^KG(t) - z^NLS(t) at Sobolev exponent p - 4 sigma."""
    if len(record_kg.times) != len(record_nls.times) or np.max(
            np.abs(record_kg.times - record_nls.times)) > 1e-12:
        raise ValueError("records must share the time grid")
    p_eff = params.p - 4.0 * sigma
    pp = SpaceParams(a=params.a, p=p_eff, beta=params.beta, M=params.M)
    ft = FrequencyTable(c=c, M=params.M)
    out = np.empty(len(record_kg.times))
    c2 = c * c
    for i, t in enumerate(record_kg.times):
        diff = (np.exp(1j * c2 * t) * record_kg.states[i].z
                - record_nls.states[i].z)
        out[i] = seq_norm(diff, pp, ft)
    return out, float(np.max(out))


def synthesize_record(emb: TorusEmbedding, system: TruncatedSystem,
                      T: float, n_samples: int = 512) -> SimulationRecord:
    """Record built by evaluating a (refined) embedding along its linear
    angle flow — no stiff integration involved."""
    times = np.linspace(0.0, T, n_samples)
    states = [emb.state_at_time(t) for t in times]
    return SimulationRecord(
        times=times, states=states,
        hamiltonian=np.array([system.hamiltonian_value(s) for s in states]),
        mass=np.array([system.mass(s) for s in states]),
        momentum=np.array([system.momentum(s) for s in states]))


def matched_torus_pair(R: float, c: float, J, M: int, Q: int,
                       tol: float = 1e-10):
    """Refined NLS torus at amplitude sqrt(xi), xi = R^2, plus the KG torus
    with exactly matching gauge-shifted frequency (fixed-frequency solve at
    omega_NLS - c^2 per angle)."""
    J = tuple(J)
    N = len(J)
    xi = np.full(N, R * R)
    nls = TruncatedSystem(kind="nls", M=M)
    omega0 = -np.array([0.5 * j * j for j in J], dtype=float) \
        - (3.0 / (8.0 * math.pi)) * xi  # first-order frequency guess
    seed = linear_torus(xi, J, M, Q, omega0)
    emb_nls, rep_nls = refine_torus(seed, nls, mode="fixed_amplitude",
                                    tol=tol)
    if not rep_nls.converged:
        raise RuntimeError(f"NLS torus did not converge: {rep_nls.message}")
    kg = TruncatedSystem(kind="kg", M=M, c=c)
    kg_seed = emb_nls.copy()
    kg_seed.omega = emb_nls.omega - c * c
    emb_kg, rep_kg = refine_torus(kg_seed, kg, mode="fixed_frequency",
                                  tol=tol)
    if not rep_kg.converged:
        raise RuntimeError(f"KG torus did not converge: {rep_kg.message}")
    return emb_nls, emb_kg, rep_nls, rep_kg


def fit_loglog(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def scaling_study(R: float, c_list, sigma: float, T: float = 1e3,
                  J=(1,), M: int = 16, Q: int = 3,
                  params: SpaceParams | None = None,
                  n_samples: int = 512, enforce_admissible: bool = True
                  ) -> dict:
    """Gauge distance between frequency-matched refined tori as a function
    of c; fits the log-log slope.  Inadmissible c (< R^{-73/72}) are
    rejected or flagged."""
    if params is None:
        params = SpaceParams(a=0.0, p=5.0, beta=0.0, M=M)
    c_adm = R ** (-73.0 / 72.0)
    rows = []
    for c in c_list:
        if c < c_adm:
            if enforce_admissible:
                rows.append({"c": c, "admissible": False, "converged": False,
                             "distance": None})
                continue
        try:
            emb_nls, emb_kg, _, _ = matched_torus_pair(R, c, J, M, Q)
        except RuntimeError as exc:
            rows.append({"c": c, "admissible": c >= c_adm,
                         "converged": False, "distance": None,
                         "error": str(exc)})
            continue
        nls = TruncatedSystem(kind="nls", M=M)
        kg = TruncatedSystem(kind="kg", M=M, c=c)
        rec_nls = synthesize_record(emb_nls, nls, T, n_samples)
        rec_kg = synthesize_record(emb_kg, kg, T, n_samples)
        _, sup = gauge_distance(rec_kg, rec_nls, params, c, sigma)
        rows.append({"c": c, "admissible": c >= c_adm, "converged": True,
                     "distance": sup})
    good = [(r["c"], r["distance"]) for r in rows
            if r["converged"] and r["admissible"]]
    slope = fit_loglog([g[0] for g in good], [g[1] for g in good]) \
        if len(good) >= 2 else None
    return {"R": R, "sigma": sigma, "T": T, "J": list(J), "M": M, "Q": Q,
            "c_admissible": c_adm, "rows": rows, "slope_vs_c": slope,
            "predicted_slope": -2.0 * sigma}


# --- binary frame format ---------------------------------------------------

_FRAME_MAGIC = b"TLAB"


def save_record(path, record: SimulationRecord) -> None:
    """Header: magic, M, frame count; frames: time + interleaved complex
    doubles (z then zbar)."""
    M = record.states[0].M
    with open(path, "wb") as fh:
        fh.write(_FRAME_MAGIC)
        fh.write(struct.pack("<qq", M, len(record.times)))
        for t, st in zip(record.times, record.states):
            fh.write(struct.pack("<d", float(t)))
            fh.write(np.ascontiguousarray(st.z, dtype=complex).tobytes())
            fh.write(np.ascontiguousarray(st.zbar, dtype=complex).tobytes())


def load_record(path) -> tuple[np.ndarray, list[FourierState]]:
    with open(path, "rb") as fh:
        if fh.read(4) != _FRAME_MAGIC:
            raise ValueError("not a trajectory frame file")
        M, count = struct.unpack("<qq", fh.read(16))
        n = 2 * M + 1
        times = np.empty(count)
        states = []
        for i in range(count):
            times[i] = struct.unpack("<d", fh.read(8))[0]
            z = np.frombuffer(fh.read(16 * n), dtype=complex).copy()
            zb = np.frombuffer(fh.read(16 * n), dtype=complex).copy()
            states.append(FourierState(z, zb))
    return times, states
