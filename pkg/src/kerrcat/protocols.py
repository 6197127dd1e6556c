"""End-to-end pipelines: Kerr cat generation, ECS preparation and the coincidence test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .fock import (
    DensityOperator,
    PureState,
    SpaceSpec,
    apply_operator,
    coherent_state,
    fidelity,
    tensor,
    truncation_dim,
)
from .measurements import no_click_weights, p_two_clicks, p_two_clicks_analytic
from .optics import (
    BeamSplitterSpec,
    beam_splitter,
    cross_kerr,
    rotate_cat,
    rotation_ancilla_amplitude,
    rotation_validity,
)

SQRT2 = math.sqrt(2.0)


def cat_state(gamma: complex, parity: int = +1, dim: int | None = None) -> PureState:
    """Normalized |gamma> + parity |-gamma> (parity +1 even, -1 odd)."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    dim = truncation_dim(abs(gamma)) if dim is None else dim
    plus = coherent_state(gamma, dim).amplitudes
    minus = coherent_state(-gamma, dim).amplitudes
    return PureState(SpaceSpec((dim,)), plus + parity * minus).normalize()


def split_sum_state(alpha: complex, gamma: complex, dims: tuple[int, int] | None = None) -> PureState:
    """Normalized |a>(|g> + |-g>) + |-a>(|g> - |-g>) on modes (a, b)."""
    if dims is None:
        dims = (truncation_dim(abs(alpha)), truncation_dim(abs(gamma)))
    da, db = dims
    ap, am = coherent_state(alpha, da), coherent_state(-alpha, da)
    gp, gm = coherent_state(gamma, db).amplitudes, coherent_state(-gamma, db).amplitudes
    amps = np.kron(ap.amplitudes, gp + gm) + np.kron(am.amplitudes, gp - gm)
    return PureState(SpaceSpec(dims), amps).normalize()


def generate_entangled_state(alpha: complex, gamma: complex, phi: float,
                             dims: tuple[int, int] | None = None) -> PureState:
    """Cross-Kerr evolution exp(-i phi n_a n_b) of |alpha>_a |gamma>_b."""
    if dims is None:
        dims = (truncation_dim(abs(alpha)), truncation_dim(abs(gamma)))
    psi = tensor(coherent_state(alpha, dims[0]), coherent_state(gamma, dims[1]))
    return apply_operator(cross_kerr(phi, (0, 1), psi.space), psi)


@dataclass(frozen=True)
class CatOutcome:
    label: str
    probability: float
    conditional_state: DensityOperator | None


def conditional_cat(alpha: float, gamma: float, eta: float = 1.0, exponent: int = 1,
                    dims: tuple[int, int, int] | None = None) -> list[CatOutcome]:
    """Read out mode a of the phi = pi state through a 50:50 splitter with ancilla |alpha>.

    Modes are ordered (a, b, c).  Detector 1 watches the a output and
    detector 2 the c output.  "even" is (D1 click, D2 silent), "odd" the
    reverse, and "inconclusive" collects both-silent (plus the both-click
    event, which only truncation or imperfect phase locking can produce).
    """
    if dims is None:
        dout = truncation_dim(SQRT2 * abs(alpha))
        dims = (dout, truncation_dim(abs(gamma)), dout)
    da, db, dc = dims
    ab = generate_entangled_state(alpha, gamma, math.pi, (da, db))
    psi = tensor(ab, coherent_state(alpha, dc))
    psi = apply_operator(beam_splitter(BeamSplitterSpec(0.5, (0, 2)), psi.space), psi)
    t = psi.tensor_view()

    no_a = no_click_weights(eta, da, exponent)
    no_c = no_click_weights(eta, dc, exponent)
    cases = {
        "even": (1.0 - no_a, no_c),
        "odd": (no_a, 1.0 - no_c),
        "inconclusive": None,
    }
    outcomes = []
    rho_incon = np.zeros((db, db), dtype=complex)
    p_incon = 0.0
    for wa, wc in [(no_a, no_c), (1.0 - no_a, 1.0 - no_c)]:
        weighted = t * np.sqrt(wa)[:, None, None] * np.sqrt(wc)[None, None, :]
        rho_incon += np.einsum("ibj,icj->bc", weighted, weighted.conj())
    p_incon = float(np.trace(rho_incon).real)
    for label, w in cases.items():
        if w is None:
            rho_b, p = rho_incon, p_incon
        else:
            wa, wc = w
            weighted = t * np.sqrt(wa)[:, None, None] * np.sqrt(wc)[None, None, :]
            rho_b = np.einsum("ibj,icj->bc", weighted, weighted.conj())
            p = float(np.trace(rho_b).real)
        state = DensityOperator(SpaceSpec((db,)), rho_b / p) if p > 1e-300 else None
        outcomes.append(CatOutcome(label, p, state))
    return outcomes


@dataclass(frozen=True)
class MixedCatSpec:
    """A (|g><g| + |-g><-g| + c(|g><-g| + |-g><g|)) with coherence c in [-1, 1]."""

    gamma: float
    c: float

    def __post_init__(self):
        if not -1.0 <= self.c <= 1.0:
            raise ValueError(f"coherence c={self.c} outside [-1, 1]")

    @property
    def normalization(self) -> float:
        return 1.0 / (2.0 * (1.0 + self.c * math.exp(-2.0 * self.gamma ** 2)))

    def density(self, dim: int | None = None) -> DensityOperator:
        dim = truncation_dim(abs(self.gamma)) if dim is None else dim
        p = coherent_state(self.gamma, dim).amplitudes
        m = coherent_state(-self.gamma, dim).amplitudes
        mat = (np.outer(p, p.conj()) + np.outer(m, m.conj())
               + self.c * (np.outer(p, m.conj()) + np.outer(m, p.conj())))
        return DensityOperator(SpaceSpec((dim,)), self.normalization * mat).normalize()


@dataclass(frozen=True)
class EcsSpec:
    """N (e^{i a/2} |g/sqrt2, -g/sqrt2> + e^{-i a/2} |-g/sqrt2, g/sqrt2>)."""

    gamma: float

    @property
    def normalization(self) -> float:
        return 1.0 / math.sqrt(2.0 * (1.0 + math.exp(-2.0 * self.gamma ** 2)))

    def state(self, dims: tuple[int, int] | None = None, alpha: float = 0.0,
              printed_norm: bool = False) -> PureState:
        """Two-mode state with relative phase ``alpha`` between the branches.

        By default the vector is renormalized.  ``printed_norm=True`` keeps the
        alpha-independent constant N instead, which is exact only at alpha = 0
        (the norm squared is (1 + e^{-2g^2} cos alpha) / (1 + e^{-2g^2})); the
        closed-form coincidence rate is written for that vector.
        """
        b = self.gamma / SQRT2
        if dims is None:
            d = truncation_dim(abs(b))
            dims = (d, d)
        p0, m0 = coherent_state(b, dims[0]).amplitudes, coherent_state(-b, dims[0]).amplitudes
        p1, m1 = coherent_state(b, dims[1]).amplitudes, coherent_state(-b, dims[1]).amplitudes
        amps = (np.exp(0.5j * alpha) * np.kron(p0, m1) + np.exp(-0.5j * alpha) * np.kron(m0, p1))
        if printed_norm:
            return PureState(SpaceSpec(tuple(dims)), self.normalization * amps)
        return PureState(SpaceSpec(tuple(dims)), amps).normalize()


def mixed_ecs_density(gamma: float, c: float, dims: tuple[int, int] | None = None) -> DensityOperator:
    """Four-term output of the 50:50 splitter fed with MixedCatSpec(gamma, c) and vacuum."""
    b = gamma / SQRT2
    if dims is None:
        d = truncation_dim(abs(b))
        dims = (d, d)
    pm = np.kron(coherent_state(b, dims[0]).amplitudes, coherent_state(-b, dims[1]).amplitudes)
    mp = np.kron(coherent_state(-b, dims[0]).amplitudes, coherent_state(b, dims[1]).amplitudes)
    mat = (np.outer(pm, pm.conj()) + np.outer(mp, mp.conj())
           + c * (np.outer(mp, pm.conj()) + np.outer(pm, mp.conj())))
    spec = MixedCatSpec(gamma, c)
    return DensityOperator(SpaceSpec(tuple(dims)), spec.normalization * mat).normalize()


def split_on_vacuum(cat: PureState) -> PureState:
    """Pure-state version of :func:`ecs_from_cat`."""
    if cat.space.n_modes != 1:
        raise ValueError("input must be a single mode")
    d = cat.space.dim
    psi = tensor(cat, coherent_state(0.0, d))
    return apply_operator(beam_splitter(BeamSplitterSpec(0.5, (0, 1)), psi.space), psi)


def ecs_from_cat(cat: Union[PureState, DensityOperator, MixedCatSpec],
                 dim: int | None = None) -> DensityOperator:
    """Mix a single-mode cat with vacuum on a 50:50 splitter; returns the two-mode output.

    Both output modes keep the input truncation, which is exact because the
    splitter conserves the total photon number.
    """
    if isinstance(cat, MixedCatSpec):
        cat = cat.density(dim)
    if isinstance(cat, PureState):
        return split_on_vacuum(cat).to_density()
    if cat.space.n_modes != 1:
        raise ValueError("input must be a single mode")
    # split each eigenvector separately; a cat mixture has rank 2
    w, v = np.linalg.eigh(0.5 * (cat.matrix + cat.matrix.conj().T))
    keep = w > 1e-14 * max(w.max(), 1e-300)
    d = cat.space.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for wk, vk in zip(w[keep], v[:, keep].T):
        psi = split_on_vacuum(PureState(cat.space, vk)).amplitudes
        out += wk * np.outer(psi, psi.conj())
    return DensityOperator(SpaceSpec((d, d)), out)


class RotationResult(NamedTuple):
    numeric: float
    analytic: float
    theta: float
    ancilla_amplitude: float


def rotation_coincidence(gamma: float, alpha: float, T: float, eta: float,
                         exponent: int = 1, dim: int | None = None) -> RotationResult:
    """Coincidence rate of on/off detectors after rotating one arm of the ECS.

    The b~ arm is sent through the rotation splitter with ancilla amplitude
    chosen to rotate by ``alpha / 2``; c~ goes straight to its detector.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta {eta} outside [0, 1]")
    E = rotation_ancilla_amplitude(alpha, gamma, T) if T < 1.0 else 0.0
    theta = E * math.sqrt(1.0 - T)
    rotation_validity(theta, gamma)
    if dim is None:
        dim = truncation_dim(abs(gamma) / SQRT2 + abs(theta))
    ecs = EcsSpec(gamma).state((dim, dim))
    rho = rotate_cat(theta, T, 0, ecs)
    numeric = p_two_clicks(rho, eta, (0, 1), exponent)
    return RotationResult(numeric, p_two_clicks_analytic(gamma, eta, alpha), theta, E)


def outcome_fidelities(outcomes: list[CatOutcome], gamma: float) -> dict[str, float]:
    """Fidelity of the even/odd conditional states with the ideal cats."""
    out = {}
    for o in outcomes:
        if o.label in ("even", "odd") and o.conditional_state is not None:
            dim = o.conditional_state.space.dim
            ideal = cat_state(gamma, +1 if o.label == "even" else -1, dim)
            out[o.label] = fidelity(o.conditional_state, ideal)
    return out
