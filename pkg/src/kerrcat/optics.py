"""Optical transformations on a truncated Fock space.

Beam-splitter convention: ``B = exp(theta (a^dag c - a c^dag))`` with
``cos(theta) = sqrt(T)``, so that

    B |alpha>_a |beta>_c = |sqrt(T) alpha + sqrt(1-T) beta>_a |-sqrt(1-T) alpha + sqrt(T) beta>_c

and the balanced case ``T = 1/2`` carries no extra phases.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import expm

from .fock import (
    LEAKAGE_TOL,
    DensityOperator,
    ModeOperator,
    PureState,
    SpaceSpec,
    TruncationError,
    apply_operator,
    coherent_amplitudes,
)

ROTATION_RATIO_WARN = 0.2
MIN_ROTATION_T = 0.9


@dataclass(frozen=True)
class KerrPhase:
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise ValueError("Kerr phase must be finite")

    def reported(self) -> float:
        """Phase reduced to [0, 2pi) for display only."""
        return self.phi % (2 * math.pi)


@dataclass(frozen=True)
class BeamSplitterSpec:
    transmittivity: float
    mode_pair: tuple[int, int] = (0, 1)

    def __post_init__(self):
        if not 0.0 <= self.transmittivity <= 1.0:
            raise ValueError(f"transmittivity {self.transmittivity} outside [0, 1]")
        a, c = self.mode_pair
        if a == c:
            raise ValueError("beam splitter needs two distinct modes")

    @property
    def mixing_angle(self) -> float:
        return math.acos(math.sqrt(self.transmittivity))


def annihilation_matrix(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def ladder(mode: int, space: SpaceSpec) -> ModeOperator:
    """Annihilation operator of ``mode``; ``.dag`` gives the creation operator."""
    space.check_modes([mode])
    return ModeOperator(space, annihilation_matrix(space.mode_dims[mode]), (mode,))


def number(mode: int, space: SpaceSpec) -> ModeOperator:
    space.check_modes([mode])
    d = space.mode_dims[mode]
    return ModeOperator(space, np.diag(np.arange(d, dtype=float)).astype(complex), (mode,))


def _check_fits(alpha: complex, dim: int) -> None:
    c = coherent_amplitudes(alpha, dim)
    leakage = 1.0 - float(np.vdot(c, c).real)
    if leakage > LEAKAGE_TOL:
        raise TruncationError(f"displacement {abs(alpha):.3g} leaks {leakage:.2e} at dim={dim}")


def displacement(alpha: complex, mode: int, space: SpaceSpec, check: bool = True) -> ModeOperator:
    """exp(alpha a^dag - alpha* a) on the truncated mode (scaling and squaring)."""
    space.check_modes([mode])
    d = space.mode_dims[mode]
    if check:
        _check_fits(alpha, d)
    a = annihilation_matrix(d)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return ModeOperator(space, expm(gen), (mode,))


def _bs_blocks(theta: float, da: int, dc: int):
    """Exact exponential of the truncated BS generator, one photon-number block at a time.

    The truncated generator conserves n_a + n_c, so it is block diagonal.
    Yields ``(N, n_a values, block unitary)`` with basis ``|n_a, N - n_a>``.
    """
    for total in range(da + dc - 1):
        lo, hi = max(0, total - dc + 1), min(total, da - 1)
        na = np.arange(lo, hi + 1)
        size = na.size
        gen = np.zeros((size, size))
        for i, n in enumerate(na):
            m = total - n
            # a^dag c : |n, m> -> sqrt(n+1) sqrt(m) |n+1, m-1>
            if i + 1 < size:
                amp = math.sqrt(n + 1) * math.sqrt(m)
                gen[i + 1, i] += amp
                gen[i, i + 1] -= amp
        yield total, na, expm(theta * gen)


def _bs_matrix(theta: float, da: int, dc: int) -> np.ndarray:
    u = np.zeros((da * dc, da * dc), dtype=complex)
    for total, na, blk in _bs_blocks(theta, da, dc):
        idx = na * dc + (total - na)
        u[np.ix_(idx, idx)] = blk
    return u


def beam_splitter(spec: BeamSplitterSpec, space: SpaceSpec) -> ModeOperator:
    """Unitary on ``spec.mode_pair``; the first mode is the transmitted 'a' port."""
    a, c = space.check_modes(spec.mode_pair)
    da, dc = space.mode_dims[a], space.mode_dims[c]
    return ModeOperator(space, _bs_matrix(spec.mixing_angle, da, dc), (a, c))


def cross_kerr(phi: float | KerrPhase, mode_pair: tuple[int, int], space: SpaceSpec) -> ModeOperator:
    """exp(-i phi n_a n_b), diagonal in the Fock basis."""
    if isinstance(phi, KerrPhase):
        phi = phi.phi
    a, b = space.check_modes(mode_pair)
    na = np.arange(space.mode_dims[a])
    nb = np.arange(space.mode_dims[b])
    diag = np.exp(-1j * phi * np.multiply.outer(na, nb)).reshape(-1)
    return ModeOperator(space, np.diag(diag), (a, b))


def loss_kraus(eta: float, dim: int) -> list[np.ndarray]:
    """Kraus diagonals of the pure-loss channel read off the vacuum-ancilla dilation.

    Entry ``k`` holds ``<n|K_k|n+k>`` for ``n = 0..dim-k-1``, where
    ``K_k = <k|_anc B(eta) |0>_anc``.  Every other entry of ``K_k`` vanishes
    because the beam splitter conserves total photon number.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta {eta} outside [0, 1]")
    theta = math.acos(math.sqrt(eta))
    diags = [np.zeros(dim - k, dtype=complex) for k in range(dim)]
    for total, na, blk in _bs_blocks(theta, dim, dim):
        if total >= dim:
            break
        # input |total>_a |0>_anc is the last column of the block
        col = blk[:, -1]
        for n_out, amp in zip(na, col):
            k = total - n_out
            diags[k][n_out] = amp
    return diags


def _apply_loss_tensor(t: np.ndarray, diags, axis_l: int, axis_r: int | None) -> np.ndarray:
    """Sum_k K_k t K_k^dagger on one mode of a (possibly one-sided) tensor."""
    out = np.zeros_like(t)
    dim = t.shape[axis_l]
    t_l = np.moveaxis(t, axis_l, 0)
    if axis_r is None:
        raise ValueError("pure states must be promoted before loss")
    # after moving axis_l to front, axis_r shifts if it was before axis_l
    ar = axis_r + 1 if axis_r < axis_l else axis_r
    t_l = np.moveaxis(t_l, ar, 1)
    o = np.moveaxis(np.moveaxis(out, axis_l, 0), ar, 1)
    for k, w in enumerate(diags):
        if k >= dim:
            break
        n = dim - k
        wl = w.reshape((n, 1) + (1,) * (t_l.ndim - 2))
        wr = w.conj().reshape((1, n) + (1,) * (t_l.ndim - 2))
        o[:n, :n] += wl * wr * t_l[k:, k:]
    return out


def loss_channel(eta: float, mode: int, rho) -> DensityOperator:
    """Mix ``mode`` with vacuum on a transmittivity-``eta`` beam splitter and trace the reflection."""
    if isinstance(rho, PureState):
        rho = rho.to_density()
    space = rho.space
    space.check_modes([mode])
    if eta == 1.0:
        return rho
    n = space.n_modes
    diags = loss_kraus(eta, space.mode_dims[mode])
    t = _apply_loss_tensor(np.array(rho.tensor_view()), diags, mode, n + mode)
    return DensityOperator(space, t.reshape(space.dim, space.dim))


def rotate_cat(theta: float, T: float, mode: int, state) -> DensityOperator:
    """Rotation device: mix ``mode`` with ``|iE>``, ``E = theta / sqrt(1-T)``, on a T beam splitter.

    Passive linear optics moves a coherent ancilla through the splitter as a
    displacement, so tracing out the ancilla port gives exactly
    ``D(i theta) [loss_T(rho)] D(i theta)^dagger``.  That closed form is what
    is evaluated here; it avoids a Fock ancilla with |E|^2 ~ 1/(1-T) photons.
    """
    if T < MIN_ROTATION_T or T > 1.0:
        raise ValueError(f"rotation splitter needs 0.9 <= T <= 1, got {T}")
    rho = state.to_density() if isinstance(state, PureState) else state
    if theta == 0.0 and T == 1.0:
        return rho
    out = loss_channel(T, mode, rho)
    if theta != 0.0:
        d = displacement(1j * theta, mode, rho.space, check=False)
        out = apply_operator(d, out)
    return out


def rotation_validity(theta: float, gamma: float) -> float:
    """theta / (gamma / sqrt 2); the small-rotation picture holds when this is small."""
    ratio = abs(theta) / (abs(gamma) / math.sqrt(2)) if gamma else math.inf
    if ratio >= ROTATION_RATIO_WARN:
        warnings.warn(
            f"rotation displacement {theta:.3g} is not small against the cat amplitude "
            f"(ratio {ratio:.2f} >= {ROTATION_RATIO_WARN})",
            stacklevel=2,
        )
    return ratio


def rotation_ancilla_amplitude(alpha: float, gamma: float, T: float) -> float:
    """Ancilla amplitude E that rotates the ECS by alpha/2 at transmittivity T."""
    return alpha / (2.0 * math.sqrt(2.0 * (1.0 - T)) * gamma)


def rotate_cat_dilated(E: float, T: float, mode: int, state) -> DensityOperator:
    """Explicit ancilla version of :func:`rotate_cat` for small ``E`` (cross-check route)."""
    from .fock import coherent_state, partial_trace, tensor

    # pure inputs stay pure until the final trace; the joint density would be huge
    anc = coherent_state(1j * E, state.space.mode_dims[mode])
    joint = tensor(state, anc)
    anc_mode = state.space.n_modes
    bs = beam_splitter(BeamSplitterSpec(T, (mode, anc_mode)), joint.space)
    out = apply_operator(bs, joint)
    return partial_trace(out, range(state.space.n_modes))


def unitarity_error(op: ModeOperator, safe_levels: int = 5) -> float:
    """max |U^dag U - 1| on basis states at least ``safe_levels`` below every cutoff."""
    dims = op.local_space.mode_dims
    u = op.matrix
    g = u.conj().T @ u - np.eye(u.shape[0])
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    ok = reduce(np.logical_and, [gr < d - safe_levels for gr, d in zip(grids, dims)]).reshape(-1)
    if not ok.any():
        return 0.0
    return float(np.max(np.abs(g[np.ix_(ok, ok)])))
