"""Pure and mixed states on truncated product spaces.

Basis labels are 1-based throughout (``|1⟩, |2⟩, ...``); only the dense
arrays returned by :meth:`PureState.vector` and friends are 0-based.
An infinite-dimensional subsystem is represented by its finite support and
a truncation level at least as large as the highest occupied label.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import numerics
from .errors import (
    ArityError,
    DegenerateStateError,
    LevelIndexError,
    ProbabilityError,
    ShapeError,
    StateInvariantError,
)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
TRACE_TOL = 1e-10


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise ShapeError(f"every truncation level must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude tensor with finite support.

    ``amplitudes`` maps 1-based multi-indices to complex amplitudes; zero
    amplitudes are not stored.
    """

    dims: tuple[int, ...]
    amplitudes: Mapping[tuple[int, ...], complex]

    def __post_init__(self):
        object.__setattr__(self, "dims", _check_dims(self.dims))
        amps = {}
        for idx, val in self.amplitudes.items():
            idx = tuple(int(i) for i in idx)
            _check_index(idx, self.dims)
            if val != 0:
                amps[idx] = complex(val)
        norm2 = math.fsum(abs(v) ** 2 for v in amps.values())
        if abs(norm2 - 1.0) > NORM_TOL:
            raise StateInvariantError(f"pure state is not normalized (|psi|^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", MappingProxyType(dict(sorted(amps.items()))))

    @property
    def m(self) -> int:
        return len(self.dims)

    @classmethod
    def from_vector(cls, dims: Sequence[int], vec) -> "PureState":
        """Build from a dense 0-based vector (row-major over ``dims``), normalizing it."""
        dims = _check_dims(dims)
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        if vec.size != math.prod(dims):
            raise ShapeError(f"vector length {vec.size} does not match dims {dims}")
        nz = np.flatnonzero(vec)
        raw = {tuple(int(i) + 1 for i in np.unravel_index(k, dims)): vec[k] for k in nz}
        return make_pure(dims, raw)

    def tensor(self) -> np.ndarray:
        t = np.zeros(self.dims, dtype=np.complex128)
        for idx, val in self.amplitudes.items():
            t[tuple(i - 1 for i in idx)] = val
        return t

    def vector(self) -> np.ndarray:
        return self.tensor().reshape(-1)

    def matrix(self, bipartition: "Bipartition | None" = None) -> np.ndarray:
        """Amplitudes as a ``d_left × d_right`` coefficient matrix."""
        if bipartition is None:
            if self.m != 2:
                raise ArityError("a bipartition is required for m != 2")
            return self.tensor()
        return regroup_vector(self.vector(), self.dims, bipartition)


def _check_index(idx: tuple[int, ...], dims: tuple[int, ...]) -> None:
    if len(idx) != len(dims):
        raise LevelIndexError(f"index {idx} has wrong arity for dims {dims}")
    for i, d in zip(idx, dims):
        if not 1 <= i <= d:
            raise LevelIndexError(f"level {i} out of range 1..{d} in index {idx}")


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace operator."""

    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        mat = np.array(self.matrix, dtype=np.complex128)
        n = math.prod(dims)
        if mat.shape != (n, n):
            raise ShapeError(f"matrix shape {mat.shape} does not match dims {dims}")
        if not numerics.is_hermitian(mat, HERMITIAN_TOL):
            raise StateInvariantError("density operator is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateInvariantError(f"density operator has trace {tr!r}")
        lo = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0]
        if lo < -PSD_TOL:
            raise StateInvariantError(f"density operator has negative eigenvalue {lo!r}")
        mat.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @property
    def m(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class Bipartition:
    """Split of subsystems ``1..m`` into two non-empty groups.

    Canonical form keeps subsystem 1 on the left.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self):
        left = tuple(sorted(int(i) for i in self.left))
        right = tuple(sorted(int(i) for i in self.right))
        if not left or not right:
            raise ArityError("both sides of a bipartition must be non-empty")
        if set(left) & set(right):
            raise ArityError("bipartition sides overlap")
        if sorted(left + right) != list(range(1, len(left) + len(right) + 1)):
            raise ArityError(f"bipartition {left}|{right} does not cover 1..m")
        if 1 not in left:
            left, right = right, left
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def from_left(cls, left: Iterable[int], m: int) -> "Bipartition":
        left = tuple(left)
        return cls(left, tuple(i for i in range(1, m + 1) if i not in left))

    @property
    def m(self) -> int:
        return len(self.left) + len(self.right)

    def side_dims(self, dims: Sequence[int]) -> tuple[int, int]:
        if len(dims) != self.m:
            raise ArityError(f"bipartition over {self.m} parts used with dims {tuple(dims)}")
        return (math.prod(dims[i - 1] for i in self.left), math.prod(dims[i - 1] for i in self.right))

    @property
    def order(self) -> tuple[int, ...]:
        """0-based axis permutation that moves the left group first."""
        return tuple(i - 1 for i in self.left + self.right)

    def label(self) -> str:
        return "".join(map(str, self.left)) + "|" + "".join(map(str, self.right))


def all_bipartitions(m: int) -> list[Bipartition]:
    """The ``2**(m-1) - 1`` canonical bipartitions, ordered by left-set bitmask."""
    if m < 2:
        raise ArityError("need at least two subsystems")
    out = []
    for mask in range(1, 2 ** m - 1):
        if mask & 1:
            left = [k + 1 for k in range(m) if mask >> k & 1]
            out.append(Bipartition.from_left(left, m))
    return out


def regroup_vector(vec, dims: Sequence[int], p: Bipartition) -> np.ndarray:
    """Reshape a state vector into the ``d_left × d_right`` matrix of bipartition ``p``."""
    dl, dr = p.side_dims(dims)
    t = np.asarray(vec, dtype=np.complex128).reshape(tuple(dims))
    return np.ascontiguousarray(t.transpose(p.order)).reshape(dl, dr)


def regroup_operator(mat, dims: Sequence[int], p: Bipartition) -> np.ndarray:
    """Reorder an operator's tensor factors so the left group comes first."""
    m = len(dims)
    n = math.prod(dims)
    order = p.order
    t = np.asarray(mat, dtype=np.complex128).reshape(tuple(dims) * 2)
    t = t.transpose(order + tuple(k + m for k in order))
    return np.ascontiguousarray(t).reshape(n, n)


def ungroup_operator(mat, dims: Sequence[int], p: Bipartition) -> np.ndarray:
    """Inverse of :func:`regroup_operator`."""
    m = len(dims)
    n = math.prod(dims)
    order = p.order
    grouped = tuple(dims[k] for k in order)
    inv = tuple(int(k) for k in np.argsort(order))
    t = np.asarray(mat, dtype=np.complex128).reshape(grouped * 2)
    t = t.transpose(inv + tuple(k + m for k in inv))
    return np.ascontiguousarray(t).reshape(n, n)


def make_pure(dims: Sequence[int], amplitudes: Mapping[Sequence[int], complex]) -> PureState:
    """Normalize raw amplitudes into a :class:`PureState`."""
    dims = _check_dims(dims)
    raw = {}
    for idx, val in amplitudes.items():
        idx = tuple(int(i) for i in idx)
        _check_index(idx, dims)
        raw[idx] = raw.get(idx, 0) + complex(val)
    norm = math.sqrt(math.fsum(abs(v) ** 2 for v in raw.values()))
    if norm == 0.0:
        raise DegenerateStateError("all amplitudes are zero")
    return PureState(dims, {k: v / norm for k, v in raw.items()})


def to_density(psi: PureState) -> DensityOperator:
    v = psi.vector()
    return DensityOperator(psi.dims, np.outer(v, v.conj()))


def as_density(state: PureState | DensityOperator) -> DensityOperator:
    return to_density(state) if isinstance(state, PureState) else state


def make_density(dims: Sequence[int], matrix) -> DensityOperator:
    return DensityOperator(tuple(dims), matrix)


def random_pure(dims: Sequence[int], seed) -> PureState:
    """Haar-random pure state: i.i.d. standard complex Gaussians, normalized."""
    dims = _check_dims(dims)
    rng = np.random.default_rng(seed)
    n = math.prod(dims)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState.from_vector(dims, z)


def random_product(dims: Sequence[int], seed) -> PureState:
    """Tensor product of independent Haar-random local states."""
    dims = _check_dims(dims)
    rng = np.random.default_rng(seed)
    vec = np.ones(1, dtype=np.complex128)
    for d in dims:
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        vec = np.kron(vec, z / np.linalg.norm(z))
    return PureState.from_vector(dims, vec)


def random_density(dims: Sequence[int], seed, rank: int | None = None) -> DensityOperator:
    """Random mixed state ``G G† / Tr(G G†)`` with a Gaussian ``n × rank`` factor."""
    dims = _check_dims(dims)
    rng = np.random.default_rng(seed)
    n = math.prod(dims)
    rank = n if rank is None else int(rank)
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return DensityOperator(dims, 0.5 * (rho + rho.conj().T))


def random_separable(dims: Sequence[int], components: int, seed) -> DensityOperator:
    """Convex mixture of ``components`` random product states with Dirichlet weights."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(components))
    seeds = rng.integers(0, 2 ** 63 - 1, size=components)
    return mix([(w, to_density(random_product(dims, int(s)))) for w, s in zip(weights, seeds)])


def mix(components: Sequence[tuple[float, DensityOperator | PureState]]) -> DensityOperator:
    """Convex combination of density operators."""
    components = [(float(w), as_density(r)) for w, r in components]
    if not components:
        raise ProbabilityError("mixture needs at least one component")
    weights = [w for w, _ in components]
    if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-12:
        raise ProbabilityError(f"weights must be non-negative and sum to 1, got {weights}")
    dims = components[0][1].dims
    if any(r.dims != dims for _, r in components):
        raise ShapeError("mixture components have different dims")
    mat = sum(w * r.matrix for w, r in components)
    return DensityOperator(dims, mat)


def reduced(state: PureState | DensityOperator, bipartition: Bipartition | None = None,
            side: str = "left") -> DensityOperator:
    """Reduced state on one side of ``bipartition`` (default ``1|2``)."""
    if bipartition is None:
        if state.m != 2:
            raise ArityError("a bipartition is required for m != 2")
        bipartition = Bipartition((1,), (2,))
    if bipartition.m != state.m:
        raise ArityError(f"bipartition over {bipartition.m} parts used with dims {state.dims}")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    group = bipartition.left if side == "left" else bipartition.right
    sub_dims = tuple(state.dims[i - 1] for i in group)
    if isinstance(state, PureState):
        a = regroup_vector(state.vector(), state.dims, bipartition)
        r = a @ a.conj().T if side == "left" else a.T @ a.conj()
    else:
        r = numerics.partial_trace(state.matrix, state.dims, [i - 1 for i in group])
    return DensityOperator(sub_dims, 0.5 * (r + r.conj().T))


def is_product(psi: PureState, tol: float = 1e-9) -> bool:
    """True when every bipartition has Schmidt rank one (top Schmidt weight ≥ 1 − tol)."""
    for p in all_bipartitions(psi.m):
        s = np.linalg.svd(psi.matrix(p), compute_uv=False)
        if s[0] ** 2 < 1.0 - tol:
            return False
    return True


def singlet(dims: Sequence[int] = (2, 2), levels=((1, 2), (1, 2))) -> PureState:
    """Singlet ``(|i l⟩ − |j k⟩)/√2`` on the windows ``(i, j)`` and ``(k, l)``."""
    (i, j), (k, l) = levels
    return make_pure(dims, {(i, l): 1.0, (j, k): -1.0})


def ghz(m: int = 3, d: int = 2) -> PureState:
    return make_pure((d,) * m, {(1,) * m: 1.0, (2,) * m: 1.0})


def w_state(m: int = 3, d: int = 2) -> PureState:
    amps = {}
    for k in range(m):
        idx = [1] * m
        idx[m - 1 - k] = 2
        amps[tuple(idx)] = 1.0
    return make_pure((d,) * m, amps)


def horodecki_bound_entangled(a: float) -> DensityOperator:
    """The 3⊗3 PPT entangled family of P. Horodecki (1997), ``0 < a < 1``."""
    if not 0.0 < a < 1.0:
        raise ValueError("parameter a must lie in (0, 1)")
    m = np.zeros((9, 9))
    for k in range(9):
        m[k, k] = a
    for r in (0, 4, 8):
        for c in (0, 4, 8):
            m[r, c] = a
    b = 0.5 * (1.0 + a)
    s = 0.5 * math.sqrt(1.0 - a * a)
    m[6, 6] = b
    m[8, 8] = b
    m[6, 8] = m[8, 6] = s
    return DensityOperator((3, 3), m / (8.0 * a + 1.0))
