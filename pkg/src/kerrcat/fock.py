"""Truncated multi-mode Fock space: states, density operators, local operators.

Basis ordering is row-major over occupation numbers with mode 0 slowest, so
the amplitude of ``|n0, n1, ...>`` sits at ``np.ravel_multi_index((n0, n1, ...),
mode_dims)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

# Guard against accidentally building enormous joint spaces.
MAX_TOTAL_DIM = 250_000

LEAKAGE_TOL = 1e-6
POSITIVITY_TOL = -1e-8


class TruncationError(ValueError):
    """A coherent amplitude does not fit in the requested Fock truncation."""


class DimensionError(ValueError):
    """Joint Hilbert-space dimension exceeds the configured cap."""


class SpaceMismatchError(ValueError):
    pass


def truncation_dim(a_max: float) -> int:
    """Default per-mode dimension for a mode holding amplitudes up to ``a_max``."""
    a = abs(a_max)
    return int(math.ceil(a * a + 8.0 * a + 20.0))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpaceSpec:
    mode_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims:
            raise ValueError("a space needs at least one mode")
        if any(d < 1 for d in dims):
            raise ValueError(f"mode dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "mode_dims", dims)

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.mode_dims))

    def sub(self, modes: Sequence[int]) -> "SpaceSpec":
        return SpaceSpec(tuple(self.mode_dims[m] for m in modes))

    def check_modes(self, modes: Iterable[int]) -> tuple[int, ...]:
        modes = tuple(int(m) for m in modes)
        for m in modes:
            if not 0 <= m < self.n_modes:
                raise IndexError(f"mode {m} out of range for {self.n_modes}-mode space")
        if len(set(modes)) != len(modes):
            raise ValueError(f"repeated mode index in {modes}")
        return modes

    def concat(self, other: "SpaceSpec") -> "SpaceSpec":
        return SpaceSpec(self.mode_dims + other.mode_dims)


@dataclass(frozen=True)
class PureState:
    space: SpaceSpec
    amplitudes: np.ndarray
    # Poisson-tail weight dropped when the state was truncated (0 if exact).
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.space.dim:
            raise SpaceMismatchError(
                f"{amps.size} amplitudes for a space of dimension {self.space.dim}"
            )
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "PureState":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.space, self.amplitudes / n, self.leakage)

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.mode_dims)

    def to_density(self) -> "DensityOperator":
        return DensityOperator(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityOperator:
    space: SpaceSpec
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.space.dim
        if m.shape != (n, n):
            raise SpaceMismatchError(f"matrix shape {m.shape} does not match dimension {n}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def tensor_view(self) -> np.ndarray:
        return self.matrix.reshape(self.space.mode_dims * 2)

    def check(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
              pos_tol: float = POSITIVITY_TOL) -> None:
        """Raise ``ValueError`` if the matrix is not a valid density operator."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > herm_tol:
            raise ValueError("density operator is not Hermitian")
        if abs(np.trace(m) - 1.0) > trace_tol:
            raise ValueError(f"trace {np.trace(m).real:.3e} differs from 1")
        ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if ev[0] < pos_tol:
            raise ValueError(f"negative eigenvalue {ev[0]:.3e}")

    def normalize(self) -> "DensityOperator":
        return DensityOperator(self.space, self.matrix / np.trace(self.matrix).real)


@dataclass(frozen=True)
class ModeOperator:
    """A square matrix acting on ``modes`` of ``space``.

    ``modes=None`` means the matrix acts on the whole space.  Otherwise the
    matrix is local: it is written on ``space.sub(modes)`` and the remaining
    modes are acted on by the identity.
    """

    space: SpaceSpec
    matrix: np.ndarray
    modes: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        if self.modes is not None:
            modes = self.space.check_modes(self.modes)
            object.__setattr__(self, "modes", modes)
        m = np.asarray(self.matrix, dtype=complex)
        n = self.local_space.dim
        if m.shape != (n, n):
            raise SpaceMismatchError(f"operator shape {m.shape} does not match dimension {n}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def acts_on(self) -> tuple[int, ...]:
        return tuple(range(self.space.n_modes)) if self.modes is None else self.modes

    @property
    def local_space(self) -> SpaceSpec:
        return self.space if self.modes is None else self.space.sub(self.modes)

    @property
    def dag(self) -> "ModeOperator":
        return ModeOperator(self.space, self.matrix.conj().T, self.modes)

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        if other.space != self.space:
            raise SpaceMismatchError("operators live on different spaces")
        if self.acts_on == other.acts_on:
            return ModeOperator(self.space, self.matrix @ other.matrix, self.modes)
        return ModeOperator(self.space, self.full() @ other.full())

    def __add__(self, other: "ModeOperator") -> "ModeOperator":
        if other.space != self.space:
            raise SpaceMismatchError("operators live on different spaces")
        if self.acts_on == other.acts_on:
            return ModeOperator(self.space, self.matrix + other.matrix, self.modes)
        return ModeOperator(self.space, self.full() + other.full())

    def __sub__(self, other: "ModeOperator") -> "ModeOperator":
        return self + other.scale(-1.0)

    def scale(self, factor: complex) -> "ModeOperator":
        return ModeOperator(self.space, factor * self.matrix, self.modes)

    def full(self) -> np.ndarray:
        """Matrix on the whole space (identity on untouched modes)."""
        if self.modes is None:
            return np.array(self.matrix)
        return embed(self.matrix, self.modes, self.space)


def embed(local: np.ndarray, modes: Sequence[int], space: SpaceSpec) -> np.ndarray:
    dims = space.mode_dims
    n = len(dims)
    if space.dim > 20_000:
        raise DimensionError(f"refusing to build a dense {space.dim}x{space.dim} operator")
    sub = [dims[m] for m in modes]
    rest = [m for m in range(n) if m not in modes]
    op = local.reshape(sub + sub)
    eye = np.eye(int(np.prod([dims[m] for m in rest]))).reshape([dims[m] for m in rest] * 2)
    # out[modes_out, rest_out, modes_in, rest_in] then permute back to mode order
    k = len(modes)
    big = np.multiply.outer(op, eye)
    big = big.reshape(sub + sub + [dims[m] for m in rest] * 2)
    # axes currently: modes_out(k), modes_in(k), rest_out(n-k), rest_in(n-k)
    order_out = list(modes) + rest
    perm_out = [order_out.index(m) for m in range(n)]
    axes_out = [p if p < k else p + k for p in perm_out]
    axes_in = [p + k if p < k else p + n for p in perm_out]
    big = big.transpose(axes_out + axes_in)
    return big.reshape(space.dim, space.dim)


def _apply_local_left(tensor: np.ndarray, op: np.ndarray, modes: Sequence[int],
                      dims: Sequence[int], offset: int = 0) -> np.ndarray:
    """Contract ``op`` into axes ``offset + modes`` of ``tensor``."""
    k = len(modes)
    sub = [dims[m] for m in modes]
    op_t = op.reshape(sub + sub)
    axes = [offset + m for m in modes]
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the new axes first; move them back into place
    return np.moveaxis(out, list(range(k)), axes)


def apply_operator(op: ModeOperator, state: Union[PureState, DensityOperator]):
    """``op|psi>`` for pure states, ``op rho op^dagger`` for density operators."""
    if op.space != state.space:
        raise SpaceMismatchError("operator and state live on different spaces")
    dims = state.space.mode_dims
    modes = op.acts_on
    if isinstance(state, PureState):
        out = _apply_local_left(state.tensor_view(), op.matrix, modes, dims)
        return PureState(state.space, out.reshape(-1), state.leakage)
    n = len(dims)
    t = _apply_local_left(state.tensor_view(), op.matrix, modes, dims)
    t = _apply_local_left(t, op.matrix.conj(), modes, dims, offset=n)
    return DensityOperator(state.space, t.reshape(state.space.dim, state.space.dim))


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Unnormalized Fock amplitudes exp(-|a|^2/2) a^n / sqrt(n!) for n < dim."""
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def coherent_state(alpha: complex, dim: int | None = None,
                   allow_lossy: bool = False) -> PureState:
    """Single-mode coherent state ``|alpha>`` truncated to ``dim`` levels.

    The Poisson tail beyond the truncation is stored in ``leakage``; states
    losing more than ``LEAKAGE_TOL`` are rejected unless ``allow_lossy``.
    """
    if dim is None:
        dim = truncation_dim(abs(alpha))
    if dim < 1:
        raise ValueError("dim must be >= 1")
    c = coherent_amplitudes(complex(alpha), dim)
    leakage = max(0.0, 1.0 - float(np.vdot(c, c).real))
    if leakage > LEAKAGE_TOL and not allow_lossy:
        raise TruncationError(
            f"coherent amplitude {abs(alpha):.3g} leaks {leakage:.2e} beyond dim={dim}"
        )
    return PureState(SpaceSpec((dim,)), c / np.linalg.norm(c), leakage)


def fock_state(n: int, dim: int) -> PureState:
    if not 0 <= n < dim:
        raise ValueError(f"level {n} outside truncation {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return PureState(SpaceSpec((dim,)), amps)


def tensor(*items, max_dim: int = MAX_TOTAL_DIM):
    """Kronecker product in mode order of states or operators of one kind.

    Mixing pure states and density operators promotes everything to density
    operators.  ``ModeOperator`` operands are expanded to full matrices first.
    """
    if not items:
        raise ValueError("nothing to tensor")
    space = items[0].space
    for it in items[1:]:
        space = space.concat(it.space)
    if space.dim > max_dim:
        raise DimensionError(f"joint dimension {space.dim} exceeds cap {max_dim}")

    if all(isinstance(it, PureState) for it in items):
        amps = items[0].amplitudes
        leak = items[0].leakage
        for it in items[1:]:
            amps = np.kron(amps, it.amplitudes)
            leak = max(leak, it.leakage)
        return PureState(space, amps, leak)
    if all(isinstance(it, ModeOperator) for it in items):
        mat = items[0].full()
        for it in items[1:]:
            mat = np.kron(mat, it.full())
        return ModeOperator(space, mat)
    if all(isinstance(it, (PureState, DensityOperator)) for it in items):
        mats = [it.to_density().matrix if isinstance(it, PureState) else it.matrix for it in items]
        mat = mats[0]
        for m in mats[1:]:
            mat = np.kron(mat, m)
        return DensityOperator(space, mat)
    raise TypeError("cannot tensor states with operators")


def partial_trace(state: Union[PureState, DensityOperator],
                  keep: Iterable[int]) -> DensityOperator:
    """Reduced density operator on the modes in ``keep`` (kept in ascending order)."""
    space = state.space
    keep = sorted(space.check_modes(keep))
    if not keep:
        raise ValueError("keep must name at least one mode")
    n = space.n_modes
    drop = [m for m in range(n) if m not in keep]
    sub = space.sub(keep)
    if isinstance(state, PureState):
        psi = state.tensor_view()
        psi = np.transpose(psi, keep + drop).reshape(sub.dim, -1)
        return DensityOperator(sub, psi @ psi.conj().T)
    if not drop:
        return state
    t = state.tensor_view()
    t = np.transpose(t, keep + drop + [n + m for m in keep] + [n + m for m in drop])
    rest = space.dim // sub.dim
    t = t.reshape(sub.dim, rest, sub.dim, rest)
    return DensityOperator(sub, np.einsum("ajbj->ab", t))


def _as_density(state) -> DensityOperator:
    return state.to_density() if isinstance(state, PureState) else state


def fidelity(a: Union[PureState, DensityOperator], b: Union[PureState, DensityOperator]) -> float:
    """|<a|b>|^2, or <psi|rho|psi> when one side is mixed.

    Two mixed arguments use the Uhlmann fidelity (squared convention).
    """
    if a.space != b.space:
        raise SpaceMismatchError("fidelity between states on different spaces")
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(a, PureState):
        a, b = b, a
    if isinstance(b, PureState):
        psi = b.amplitudes
        return float(np.vdot(psi, a.matrix @ psi).real)
    from scipy.linalg import sqrtm

    sa = sqrtm(a.matrix)
    return float(np.trace(sqrtm(sa @ b.matrix @ sa)).real ** 2)


def trace_distance(a, b) -> float:
    a, b = _as_density(a), _as_density(b)
    if a.space != b.space:
        raise SpaceMismatchError("trace distance between states on different spaces")
    diff = a.matrix - b.matrix
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def expectation(op: ModeOperator, state: Union[PureState, DensityOperator]) -> complex:
    """<psi|op|psi> or Tr(rho op)."""
    if op.space != state.space:
        raise SpaceMismatchError("operator and state live on different spaces")
    modes = op.acts_on
    if isinstance(state, PureState) and op.modes is None:
        psi = state.amplitudes
        return complex(np.vdot(psi, op.matrix @ psi))
    rho = partial_trace(state, modes).matrix
    order = sorted(modes)
    mat = op.matrix
    if list(modes) != order:
        # reorder the local operator to ascending mode order
        sub = [state.space.mode_dims[m] for m in modes]
        k = len(modes)
        perm = [list(modes).index(m) for m in order]
        mat = mat.reshape(sub + sub).transpose(perm + [p + k for p in perm]).reshape(mat.shape)
    return complex(np.sum(rho.T * mat))


def photon_distribution(state: Union[PureState, DensityOperator], mode: int) -> np.ndarray:
    rho = partial_trace(state, [mode]).matrix
    return np.real(np.diag(rho)).copy()
