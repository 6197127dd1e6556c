"""Effective atomic Hamiltonians for EIT cross-phase modulation and the rates built on them.

All Hamiltonians are returned divided by hbar, so matrix entries and every
eigenvalue ``lambda`` below are angular frequencies (rad/s).  Multiply by
``HBAR`` for an energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import hbar as HBAR

from .fock import ModeOperator, SpaceSpec


class TrackingError(RuntimeError):
    """Eigenvalue continuation met two indistinguishable candidates."""


@dataclass(frozen=True)
class FourLevelParams:
    """Weak probes omega_1, omega_2; strong coupling omega_d (all rad/s)."""

    omega_1: complex
    omega_2: complex
    omega_d: complex
    delta: float
    gamma_2: float
    gamma_4: float

    initial_level = 0  # |1>

    def __post_init__(self):
        if self.gamma_2 < 0 or self.gamma_4 < 0:
            raise ValueError("decay rates must be non-negative")

    def scale_weak(self, eps: float) -> "FourLevelParams":
        return replace(self, omega_1=eps * self.omega_1, omega_2=eps * self.omega_2)

    def scale_all(self, s: float) -> "FourLevelParams":
        return FourLevelParams(s * self.omega_1, s * self.omega_2, s * self.omega_d,
                               s * self.delta, s * self.gamma_2, s * self.gamma_4)


@dataclass(frozen=True)
class SixLevelParams:
    """Weak probes omega_a, omega_b; coupling omega_d; detuning delta; decay gamma (rad/s)."""

    omega_a: complex
    omega_b: complex
    omega_d: complex
    delta: float
    gamma: float

    initial_level = 1  # |2>

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("decay rate must be non-negative")

    @property
    def omega_total(self) -> float:
        """sqrt(|omega_a|^2 + |omega_b|^2 + |omega_d|^2)."""
        return math.sqrt(abs(self.omega_a) ** 2 + abs(self.omega_b) ** 2 + abs(self.omega_d) ** 2)

    def scale_weak(self, eps: float) -> "SixLevelParams":
        return replace(self, omega_a=eps * self.omega_a, omega_b=eps * self.omega_b)

    def scale_all(self, s: float) -> "SixLevelParams":
        return SixLevelParams(s * self.omega_a, s * self.omega_b, s * self.omega_d,
                              s * self.delta, s * self.gamma)


@dataclass(frozen=True)
class MediumParams:
    """Bulk medium and geometry, SI units.

    ``volume`` defaults to ``area * length``; ``sigma_0`` defaults to the
    resonant cross-section of the ``d24`` transition at ``omega_a``.
    """

    density: float
    d24: float
    d26: float
    omega_a: float
    omega_b: float
    length: float
    area: float
    tau: float = 1e-6
    volume: float | None = None
    sigma_0: float | None = None

    def __post_init__(self):
        for name in ("density", "d24", "d26", "omega_a", "omega_b", "length", "area", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.volume is None:
            object.__setattr__(self, "volume", self.area * self.length)
        elif self.volume <= 0:
            raise ValueError("volume must be positive")

    def cross_section(self, gamma: float) -> float:
        if self.sigma_0 is not None:
            return self.sigma_0
        return resonant_cross_section(self.d24, self.omega_a, gamma)


@dataclass(frozen=True)
class TrackedEigenvalue:
    value: complex
    continuation_path: list[tuple[float, complex]] = field(default_factory=list)


class GroupVelocity(NamedTuple):
    v_g: float
    ratio_to_c: float

    @property
    def ultraslow(self) -> bool:
        return self.ratio_to_c < 1e-3


class KerrRate(NamedTuple):
    chi: float
    phi: float


def resonant_cross_section(dipole: float, omega: float, gamma: float) -> float:
    """|d|^2 omega / (2 eps0 c hbar gamma)."""
    return dipole ** 2 * omega / (2.0 * EPS0 * C_LIGHT * HBAR * gamma)


def single_photon_rabi(dipole: float, omega: float, volume: float) -> float:
    """d sqrt(omega / (2 hbar eps0 V)): the Rabi frequency carried by one photon in V."""
    return dipole * math.sqrt(omega / (2.0 * HBAR * EPS0 * volume))


def _atom_space(n: int) -> SpaceSpec:
    return SpaceSpec((n,))


def build_h_si(p: FourLevelParams) -> ModeOperator:
    """4x4 effective Hamiltonian in the basis {|1>, |2>, |3>, |4>}."""
    o1, o2, od = p.omega_1, p.omega_2, p.omega_d
    h = np.array([
        [0, np.conj(o1), 0, 0],
        [o1, -1j * p.gamma_2, od, 0],
        [0, np.conj(od), 0, np.conj(o2)],
        [0, 0, o2, p.delta - 1j * p.gamma_4],
    ], dtype=complex)
    return ModeOperator(_atom_space(4), h)


def _h_pk(p: SixLevelParams, loop_phase: float) -> np.ndarray:
    oa, ob, od = p.omega_a, p.omega_b, p.omega_d
    g = p.gamma
    # loop_phase = 2 Delta t on the |3> <-> |5> coupling
    osc = np.exp(1j * loop_phase)
    h = np.zeros((6, 6), dtype=complex)
    h[0, 3], h[0, 4] = np.conj(od), -np.conj(ob)
    h[1, 3], h[1, 5] = np.conj(oa), -np.conj(ob)
    h[2, 4], h[2, 5] = np.conj(oa) * osc, -np.conj(od)
    h[3, 0], h[3, 1], h[3, 3] = od, oa, -1j * g
    h[4, 0], h[4, 2], h[4, 4] = -ob, oa / osc, p.delta - 1j * g
    h[5, 1], h[5, 2], h[5, 5] = -ob, -od, -1j * g
    return h


def build_h_pk(p: SixLevelParams, t: float = 0.0) -> ModeOperator:
    """6x6 double-EIT Hamiltonian in {|1>..|6>} with the e^{+-2i delta t} factors at time ``t``."""
    return ModeOperator(_atom_space(6), _h_pk(p, 2.0 * p.delta * t))


def _pick(evals, evecs, prev_val, prev_vec, scale):
    dist = np.abs(evals - prev_val)
    order = np.argsort(dist)
    best = order[0]
    if len(order) > 1:
        second = order[1]
        if abs(evals[best] - evals[second]) <= 1e-12 * scale:
            ov = np.abs(evecs[:, [best, second]].conj().T @ prev_vec)
            if abs(ov[0] - ov[1]) < 0.01 * max(ov.max(), 1e-300):
                raise TrackingError(
                    f"cannot separate eigenvalues {evals[best]:.6e} and {evals[second]:.6e}"
                )
            best = (best, second)[int(np.argmax(ov))]
    return best


def tracked_eigenvalue(builder: Callable, params, steps: int = 50) -> TrackedEigenvalue:
    """Follow the eigenvalue that starts at 0 on the initial atomic level.

    The weak fields are switched on linearly, ``params.scale_weak(eps)`` for
    ``eps`` in ``linspace(0, 1, steps)``; at each point the eigenvalue nearest
    to the previous one is kept (eigenvector overlap breaks near-ties).
    """
    if steps < 2:
        raise ValueError("need at least two continuation steps")
    n0 = params.initial_level
    prev_val = 0.0 + 0.0j
    prev_vec = None
    path: list[tuple[float, complex]] = []
    for eps in np.linspace(0.0, 1.0, steps):
        h = builder(params.scale_weak(eps))
        mat = h.matrix if isinstance(h, ModeOperator) else np.asarray(h)
        evals, evecs = np.linalg.eig(mat)
        evecs = evecs / np.linalg.norm(evecs, axis=0)
        if prev_vec is None:
            prev_vec = np.zeros(mat.shape[0], dtype=complex)
            prev_vec[n0] = 1.0
        scale = max(float(np.max(np.abs(evals))), 1e-300)
        k = _pick(evals, evecs, prev_val, prev_vec, scale)
        if eps == 0.0:
            # the initial level is an exact zero-energy eigenvector when the probes are off
            prev_val = 0.0 + 0.0j
        else:
            prev_val = complex(evals[k])
        prev_vec = evecs[:, k]
        path.append((float(eps), prev_val))
    return TrackedEigenvalue(prev_val, path)


def rwa_averaged_eigenvalue(p: SixLevelParams, steps: int = 50, n_phases: int = 16) -> TrackedEigenvalue:
    """Tracked eigenvalue of the double-EIT matrix averaged over the fast loop phase 2 delta t.

    The phase is uniform on [0, 2pi) and the eigenvalue is a smooth periodic
    function of it, so an equally spaced mean converges geometrically.
    """
    phases = np.linspace(0.0, 2 * np.pi, n_phases, endpoint=False)
    runs = [tracked_eigenvalue(lambda q, ph=ph: _h_pk(q, ph), p, steps) for ph in phases]
    value = complex(np.mean([r.value for r in runs]))
    path = [(eps, complex(np.mean([r.continuation_path[i][1] for r in runs])))
            for i, (eps, _) in enumerate(runs[0].continuation_path)]
    return TrackedEigenvalue(value, path)


def lambda_si(p: FourLevelParams) -> complex:
    """-|O1|^2 |O2|^2 / ((delta - i gamma_4) |Od|^2)."""
    od2 = abs(p.omega_d) ** 2
    if od2 == 0:
        raise ZeroDivisionError("coupling Rabi frequency must be nonzero")
    return -abs(p.omega_1) ** 2 * abs(p.omega_2) ** 2 / ((p.delta - 1j * p.gamma_4) * od2)


def lambda_pk_approx(p: SixLevelParams) -> complex:
    """2 |Oa|^2 |Ob|^2 / ((i gamma - delta) |Od|^2)."""
    od2 = abs(p.omega_d) ** 2
    den = (1j * p.gamma - p.delta) * od2
    if den == 0:
        raise ZeroDivisionError("vanishing denominator (omega_d or gamma and delta are zero)")
    return 2.0 * abs(p.omega_a) ** 2 * abs(p.omega_b) ** 2 / den


def lambda_pk_full(p: SixLevelParams) -> complex:
    """2 |Oa|^2 |Ob|^2 |Od|^2 / (i gamma |O|^4 - delta |Od|^2 |O|^2)."""
    od2 = abs(p.omega_d) ** 2
    if od2 == 0:
        raise ZeroDivisionError("coupling Rabi frequency must be nonzero")
    om2 = p.omega_total ** 2
    den = 1j * p.gamma * om2 ** 2 - p.delta * od2 * om2
    if den == 0:
        raise ZeroDivisionError("vanishing denominator")
    return 2.0 * abs(p.omega_a) ** 2 * abs(p.omega_b) ** 2 * od2 / den


def chi3_si(p: FourLevelParams, medium: MediumParams,
            d12: float | None = None, d34: float | None = None) -> complex:
    """Third-order susceptibility (m^2/V^2) of the four-level scheme.

    The probe dipoles default to the medium's ``d24`` and ``d26``.
    """
    d12 = medium.d24 if d12 is None else d12
    d34 = medium.d26 if d34 is None else d34
    return (medium.density * d12 ** 2 * d34 ** 2
            / (EPS0 * (p.delta - 1j * p.gamma_4) * abs(p.omega_d) ** 2 * HBAR ** 3))


def polarizability_a(p: SixLevelParams, medium: MediumParams) -> complex:
    """Complex polarizability (1/m) seen by probe a; Re gives phase, Im absorption."""
    od2 = abs(p.omega_d) ** 2
    if od2 == 0:
        raise ZeroDivisionError("coupling Rabi frequency must be nonzero")
    alpha0 = medium.density * medium.cross_section(p.gamma)
    return 2j * alpha0 * p.gamma * abs(p.omega_b) ** 2 / ((p.gamma + 1j * p.delta) * od2)


def figure_of_merit(p: SixLevelParams) -> float:
    return p.delta / p.gamma


def group_velocity(p: SixLevelParams, medium: MediumParams) -> GroupVelocity:
    v = abs(p.omega_d) ** 2 / (medium.density * medium.cross_section(p.gamma) * p.gamma)
    return GroupVelocity(v, v / C_LIGHT)


def phase_shift(p: SixLevelParams, medium: MediumParams) -> float:
    """Cross-phase picked up over a uniform medium of length L."""
    return polarizability_a(p, medium).real * medium.length


def kerr_rate_chi(p: SixLevelParams, medium: MediumParams) -> KerrRate:
    """Cross-Kerr rate chi (rad/s) of H = hbar chi n_a n_b and the phase chi * tau."""
    den = (2.0 * HBAR ** 2 * EPS0 ** 2 * (1j * p.gamma - p.delta)
           * abs(p.omega_d) ** 2 * medium.volume)
    num = medium.density * medium.omega_a * medium.omega_b * medium.d24 ** 2 * medium.d26 ** 2
    chi = float((num / den).real)
    return KerrRate(chi, chi * medium.tau)


def pr_yso_parameters(gamma: float = 1e5, tau: float = 1e-6,
                      rabi_unit: float = 1.0) -> tuple[SixLevelParams, MediumParams]:
    """Pr:YSO-like double-EIT regime.

    Delta and |Omega_d| are 1e6 * ``rabi_unit`` rad/s and ``gamma`` is scaled
    the same way; pass ``rabi_unit=2*pi`` to read "1 MHz" as a cyclic
    frequency.  The weak probes carry the single-photon Rabi frequency of the
    interaction volume.
    """
    wavelength = 600e-9
    omega = 2 * math.pi * C_LIGHT / wavelength
    length = 1e-3
    area = math.pi * (50e-6) ** 2
    dip = 1e-32
    medium = MediumParams(density=1e15 * 1e6, d24=dip, d26=dip, omega_a=omega, omega_b=omega,
                          length=length, area=area, tau=tau)
    g1 = single_photon_rabi(dip, omega, medium.volume)
    params = SixLevelParams(omega_a=g1, omega_b=g1, omega_d=1e6 * rabi_unit,
                            delta=1e6 * rabi_unit, gamma=gamma * rabi_unit)
    return params, medium
