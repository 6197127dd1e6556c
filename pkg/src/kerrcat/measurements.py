"""Homodyne statistics, the Duan total-variance test and on/off photodetection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.integrate import simpson

from .fock import (
    DensityOperator,
    ModeOperator,
    PureState,
    SpaceSpec,
    expectation,
    partial_trace,
)
from .optics import annihilation_matrix, loss_channel

SQRT2 = math.sqrt(2.0)


class GridCoverageError(ValueError):
    """Quadrature grid does not reach the tails of the distribution."""


@dataclass(frozen=True)
class HomodyneSetting:
    theta: float = 0.0
    eta: float = 1.0
    grid: tuple[float, float, int] = (-10.0, 10.0, 2001)

    def __post_init__(self):
        x_min, x_max, n = self.grid
        if not x_min < x_max:
            raise ValueError("grid needs x_min < x_max")
        if n < 3 or n % 2 == 0:
            raise ValueError("grid needs an odd number (>= 3) of points for Simpson's rule")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta {self.eta} outside [0, 1]")
        object.__setattr__(self, "grid", (float(x_min), float(x_max), int(n)))

    @property
    def x(self) -> np.ndarray:
        return np.linspace(*self.grid)


def default_grid(a_max: float, n_points: int = 2001) -> tuple[float, float, int]:
    half = SQRT2 * abs(a_max) + 6.0
    return (-half, half, n_points)


@dataclass(frozen=True)
class QuadratureDistribution:
    x: np.ndarray
    p: np.ndarray

    def integral(self) -> float:
        return float(simpson(self.p, x=self.x))


@dataclass(frozen=True)
class DuanConfig:
    q: float = 1.0

    def __post_init__(self):
        if self.q == 0 or not math.isfinite(self.q):
            raise ValueError("q must be a nonzero real number")

    @property
    def bound(self) -> float:
        return self.q ** 2 + self.q ** -2


class DuanResult(NamedTuple):
    total_variance: float
    bound: float

    @property
    def inseparable(self) -> bool:
        """True when the sufficient condition for entanglement is met."""
        # margin keeps states sitting on the bound (rounding noise) separable
        return self.total_variance < self.bound - 1e-9


def quadrature_matrix(theta: float, dim: int) -> np.ndarray:
    a = annihilation_matrix(dim)
    return (a.conj().T * np.exp(1j * theta) + a * np.exp(-1j * theta)) / SQRT2


def quadrature_operator(theta: float, mode: int, space: SpaceSpec) -> ModeOperator:
    """(b^dag e^{i theta} + b e^{-i theta}) / sqrt 2; theta = 0 is x, theta = pi/2 is p."""
    space.check_modes([mode])
    return ModeOperator(space, quadrature_matrix(theta, space.mode_dims[mode]), (mode,))


def position_wavefunctions(dim: int, x: np.ndarray) -> np.ndarray:
    """Rows psi_n(x), n < dim, for the convention x = (b + b^dag)/sqrt 2."""
    x = np.asarray(x, dtype=float)
    psi = np.zeros((dim, x.size))
    psi[0] = math.pi ** -0.25 * np.exp(-x ** 2 / 2.0)
    if dim > 1:
        psi[1] = SQRT2 * x * psi[0]
    for n in range(1, dim - 1):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * x * psi[n] - math.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def _single_mode(state, mode: int) -> DensityOperator:
    if state.space.n_modes == 1:
        return state.to_density() if isinstance(state, PureState) else state
    return partial_trace(state, [mode])


def quadrature_pdf(state, mode: int, setting: HomodyneSetting) -> QuadratureDistribution:
    """Density of the homodyne outcome for an efficiency-eta detector at phase theta."""
    rho = _single_mode(state, mode)
    if setting.eta < 1.0:
        rho = loss_channel(setting.eta, 0, rho)
    m = rho.matrix
    d = m.shape[0]
    n = np.arange(d)
    mean_n = float(np.sum(n * np.real(np.diag(m))))
    need = SQRT2 * math.sqrt(max(mean_n, 0.0)) + 6.0
    x_min, x_max, _ = setting.grid
    if x_min > -need or x_max < need:
        raise GridCoverageError(
            f"grid [{x_min:.3g}, {x_max:.3g}] must cover +-{need:.3g} for this state"
        )
    # Distribution of O_theta in rho equals that of x in e^{-i theta n} rho e^{i theta n}.
    phase = np.exp(-1j * setting.theta * n)
    m = phase[:, None] * m * phase.conj()[None, :]
    x = setting.x
    psi = position_wavefunctions(d, x)
    p = np.real(np.einsum("nx,nm,mx->x", psi, m, psi, optimize=True))
    return QuadratureDistribution(x, p)


def analytic_pdf_in_phase(gamma: float, eta: float, x) -> np.ndarray:
    """In-phase homodyne density of a lossy even cat: two hills at +-sqrt(2 eta) gamma."""
    x = np.asarray(x, dtype=float)
    c = math.sqrt(2.0 * eta) * gamma
    e = math.exp(-2.0 * gamma ** 2)
    num = 2.0 * np.exp(-x ** 2 - 2.0 * gamma ** 2) + np.exp(-(x - c) ** 2) + np.exp(-(x + c) ** 2)
    return num / (2.0 * math.sqrt(math.pi) * (1.0 + e))


def analytic_pdf_out_phase(gamma: float, eta: float, x) -> np.ndarray:
    """Out-of-phase homodyne density of a lossy even cat: Gaussian-modulated fringes."""
    x = np.asarray(x, dtype=float)
    vis = math.exp(-2.0 * (1.0 - eta) * gamma ** 2)
    k = 2.0 * math.sqrt(2.0 * eta) * gamma
    return (np.exp(-x ** 2) * (1.0 + vis * np.cos(k * x))
            / (math.sqrt(math.pi) * (1.0 + math.exp(-2.0 * gamma ** 2))))


def _two_mode(state) -> None:
    if state.space.n_modes != 2:
        raise ValueError(f"Duan test needs a two-mode state, got {state.space.n_modes} modes")


def duan_s(state: Union[PureState, DensityOperator], cfg: DuanConfig = DuanConfig()) -> DuanResult:
    """Total variance of u = |q| X1 + X2/q and v = |q| P1 - P2/q."""
    _two_mode(state)
    space = state.space
    q = cfg.q
    d1, d2 = space.mode_dims
    x1, p1 = quadrature_matrix(0.0, d1), quadrature_matrix(math.pi / 2, d1)
    x2, p2 = quadrature_matrix(0.0, d2), quadrature_matrix(math.pi / 2, d2)
    rho = state.to_density() if isinstance(state, PureState) else state
    r = rho.tensor_view()
    r1 = np.einsum("ajbj->ab", r)
    r2 = np.einsum("iaib->ab", r)

    def local(rm, op):
        return float(np.real(np.sum(rm.T * op)))

    def joint(a, b):
        return float(np.real(np.einsum("ijkl,ki,lj->", r, a, b, optimize=True)))

    def variance(c1, o1, c2, o2):
        mean = c1 * local(r1, o1) + c2 * local(r2, o2)
        second = (c1 ** 2 * local(r1, o1 @ o1) + c2 ** 2 * local(r2, o2 @ o2)
                  + 2 * c1 * c2 * joint(o1, o2))
        return second - mean ** 2

    aq = abs(q)
    s = variance(aq, x1, 1.0 / q, x2) + variance(aq, p1, -1.0 / q, p2)
    return DuanResult(s, cfg.bound)


def s_perfect_analytic(gamma: float) -> float:
    """Total variance (q = 1) of the balanced entangled coherent state from an even cat."""
    e = math.exp(-2.0 * gamma ** 2)
    return 2.0 * (1.0 - gamma ** 2 * 2.0 * e / (1.0 + e))


def s_mixed_analytic(gamma: float, c: float = 1.0, eta: float = 1.0, q: float = 1.0) -> float:
    """Total variance for the splitter output of the mixed cat, after loss eta on both arms.

    u and v have zero mean on this family, so only <n_1>, <n_2> and <a_1 a_2>
    enter; loss scales each of them by eta.
    """
    e = math.exp(-2.0 * gamma ** 2)
    a = 1.0 / (2.0 * (1.0 + c * e))
    n_each = a * gamma ** 2 * (1.0 - c * e)
    pair = -a * gamma ** 2 * (1.0 + c * e)
    sign = 1.0 if q > 0 else -1.0
    return (q ** 2 + q ** -2) * (1.0 + 2.0 * eta * n_each) + 4.0 * sign * eta * pair


def duan_s_with_loss(state, cfg: DuanConfig = DuanConfig(), eta: float = 1.0) -> DuanResult:
    """duan_s after an efficiency-eta loss on both homodyne arms."""
    _two_mode(state)
    rho = state.to_density() if isinstance(state, PureState) else state
    if eta < 1.0:
        rho = loss_channel(eta, 0, rho)
        rho = loss_channel(eta, 1, rho)
    return duan_s(rho, cfg)


def onoff_povm(eta: float, mode: int, space: SpaceSpec,
               exponent: int = 1) -> tuple[ModeOperator, ModeOperator]:
    """(no-click, click) elements of an efficiency-eta on/off detector.

    No-click weight of ``|n>`` is ``(1 - eta)**(exponent * n)``.  The default
    ``exponent=1`` treats each photon as missed with probability ``1 - eta``,
    which is the form the closed-form coincidence rate follows; ``exponent=2``
    is the squared variant.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta {eta} outside [0, 1]")
    if exponent < 1:
        raise ValueError("exponent must be a positive integer")
    space.check_modes([mode])
    w = no_click_weights(eta, space.mode_dims[mode], exponent)
    no_click = ModeOperator(space, np.diag(w).astype(complex), (mode,))
    click = ModeOperator(space, np.diag(1.0 - w).astype(complex), (mode,))
    return no_click, click


def no_click_weights(eta: float, dim: int, exponent: int = 1) -> np.ndarray:
    n = np.arange(dim)
    base = (1.0 - eta) ** exponent
    # 0**0 is 1: the vacuum never clicks, even for a perfect detector
    return np.power(base, n, dtype=float)


def p_two_clicks(state, eta: float, modes: tuple[int, int] = (0, 1), exponent: int = 1) -> float:
    """Tr(rho Pi_click x Pi_click) on a pair of modes."""
    rho = partial_trace(state, modes)
    d1, d2 = rho.space.mode_dims
    w1 = 1.0 - no_click_weights(eta, d1, exponent)
    w2 = 1.0 - no_click_weights(eta, d2, exponent)
    joint = np.real(np.diag(rho.matrix)).reshape(d1, d2)
    if list(modes) != sorted(modes):
        joint = joint.T
        w1, w2 = w2, w1
    return float(w1 @ joint @ w2)


def p_two_clicks_analytic(gamma: float, eta: float, alpha: float) -> float:
    """Closed-form coincidence probability for the rotated entangled coherent state."""
    g2 = gamma ** 2
    norm2 = 1.0 / (2.0 * (1.0 + math.exp(-2.0 * g2)))
    c = 2.0 * math.exp(-g2) * norm2
    const = (math.exp(g2 / 2.0) - math.exp((1.0 - eta) * g2 / 2.0)) ** 2
    fringe = (math.exp(-g2 / 2.0) - math.exp(-(1.0 - eta) * g2 / 2.0)) ** 2
    return c * (const + math.cos(alpha) * fringe)


def coincidence_visibility(gamma: float, eta: float) -> float:
    """Ratio of the cos(alpha) coefficient to the constant one in the coincidence rate."""
    g2 = gamma ** 2
    const = (math.exp(g2 / 2.0) - math.exp((1.0 - eta) * g2 / 2.0)) ** 2
    fringe = (math.exp(-g2 / 2.0) - math.exp(-(1.0 - eta) * g2 / 2.0)) ** 2
    return fringe / const


def mean_quadrature(state, theta: float, mode: int) -> float:
    return expectation(quadrature_operator(theta, mode, state.space), state).real
