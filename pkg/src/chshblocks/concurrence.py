"""Concurrence of pure states, two-qubit blocks, and the per-block CHSH optimum."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .chsh import PAULIS, MeasurementSettings
from .errors import ArityError, ShapeError
from .pair_ops import ZERO_WEIGHT, block_batch, enumerate_blocks
from .states import DensityOperator, PureState, all_bipartitions

ENTANGLED = 1e-7
BATCH = 16384

# σ_u ⊗ σ_v for u, v in (x, y, z)
PAULI_PAIRS = np.einsum("uab,vcd->uvacbd", PAULIS, PAULIS).reshape(3, 3, 4, 4)
SPIN_FLIP = np.kron(PAULIS[1], PAULIS[1])


@dataclass(frozen=True)
class ConcurrenceReport:
    """Concurrence value plus its per-block (or per-bipartition) breakdown.

    ``unweighted`` is the literal sum of squared normalized-block
    concurrences, kept for comparison only.
    """

    value: float
    method: str
    contributions: dict = field(default_factory=dict, repr=False)
    unweighted: float | None = None
    block_value: float | None = None


def _bipartite_matrix(psi: PureState) -> np.ndarray:
    if psi.m != 2:
        raise ArityError(f"expected a bipartite state, got {psi.m} parts")
    return psi.tensor()


def _schmidt_concurrence(a: np.ndarray) -> float:
    # 2(1 - Tr ρ_A²) = 4 Σ_{i<j} p_i p_j for the Schmidt weights p, summed without cancellation
    s = np.linalg.svd(a, compute_uv=False)
    p = s ** 2
    p = p / p.sum()
    tail = np.cumsum(p[::-1])[::-1]
    cross = float(np.dot(p[:-1], tail[1:]))
    return math.sqrt(max(0.0, 4.0 * cross))


def concurrence_pure(psi: PureState) -> float:
    """``√(2(1 − Tr ρ_A²))``, with the reduced spectrum taken from the Schmidt coefficients."""
    return _schmidt_concurrence(_bipartite_matrix(psi))


def _minor_sum(a: np.ndarray) -> float:
    """``Σ_{i,j,k,l} |a_ik a_jl − a_il a_jk|²`` over ordered quadruples."""
    total = 0.0
    for i in range(a.shape[0] - 1):
        ai = a[i]
        if not ai.any():
            continue
        for j in range(i + 1, a.shape[0]):
            m = np.outer(ai, a[j])
            total += float(np.sum(np.abs(m - m.T) ** 2))
    # (i, j) and (j, i) contribute equally; i = j contributes nothing
    return 2.0 * total


def concurrence_dets(psi: PureState) -> float:
    return math.sqrt(_minor_sum(_bipartite_matrix(psi)))


def pure_block_concurrence(kets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Concurrence ``2|det|`` of normalized block kets (shape ``(N, 4)``)."""
    det = kets[:, 0] * kets[:, 3] - kets[:, 1] * kets[:, 2]
    return 2.0 * np.abs(det) / weights


def _block_contributions(a: np.ndarray, pairs) -> tuple[np.ndarray, np.ndarray, list]:
    out_w, out_c, kept = [], [], []
    for start in range(0, len(pairs), BATCH):
        chunk = pairs[start:start + BATCH]
        w, kets = block_batch("pure", a, a.shape[1], chunk)
        keep = w > ZERO_WEIGHT
        out_w.append(w[keep])
        out_c.append(pure_block_concurrence(kets[keep], w[keep]))
        kept.extend(p for p, k in zip(chunk, keep) if k)
    if not kept:
        return np.zeros(0), np.zeros(0), []
    return np.concatenate(out_w), np.concatenate(out_c), kept


def concurrence_blocks(psi: PureState) -> ConcurrenceReport:
    """``√(Σ (w_αβ · C(ρ_αβ))²)`` over all blocks, ``w`` the block weight."""
    a = _bipartite_matrix(psi)
    pairs = enumerate_blocks(psi)
    w, c, kept = _block_contributions(a, pairs)
    contrib = {(al, be): float(x) for (al, be), x in zip(kept, w * c)}
    value = math.sqrt(float(np.sum((w * c) ** 2)))
    return ConcurrenceReport(value, "block-decomposition", contrib, unweighted=math.sqrt(float(np.sum(c ** 2))))


def concurrence_multipartite(psi: PureState) -> ConcurrenceReport:
    """Multipartite concurrence over all ``2^(m−1) − 1`` bipartitions.

    ``value`` comes from the determinant form, ``block_value`` from the
    weighted block decomposition; both are normalized by ``2^(m−1) − 1``.
    """
    if psi.m < 3:
        raise ArityError("multipartite concurrence needs m >= 3")
    parts = all_bipartitions(psi.m)
    norm = 2 ** (psi.m - 1) - 1
    det_total = 0.0
    block_total = 0.0
    unweighted = 0.0
    contrib = {}
    for p in parts:
        a = psi.matrix(p)
        det_total += _minor_sum(a)
        w, c, kept = _block_contributions(a, enumerate_blocks(psi, p))
        block_total += float(np.sum((w * c) ** 2))
        unweighted += float(np.sum(c ** 2))
        for (al, be), x in zip(kept, w * c):
            contrib[(p, al, be)] = float(x)
    return ConcurrenceReport(
        math.sqrt(det_total / norm), "multipartite", contrib,
        unweighted=math.sqrt(unweighted / norm), block_value=math.sqrt(block_total / norm),
    )


def _as_two_qubit(rho) -> np.ndarray:
    mat = rho.matrix if isinstance(rho, DensityOperator) else numerics.as_matrix(rho)
    if mat.shape != (4, 4):
        raise ShapeError(f"expected a 4x4 two-qubit operator, got {mat.shape}")
    return mat


def wootters_batch(blocks: np.ndarray) -> np.ndarray:
    """Wootters concurrence for a stack of normalized 4×4 states.

    The spin-flip spectrum ``λ`` is read off as the singular values of
    ``Vᵀ (σ_y⊗σ_y) V`` with ``ρ = V V†``; these equal the square roots of the
    eigenvalues of ``ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`` and avoid square roots of
    rounding noise.
    """
    blocks = np.asarray(blocks, dtype=np.complex128)
    herm = 0.5 * (blocks + np.conj(np.swapaxes(blocks, -1, -2)))
    w, v = np.linalg.eigh(herm)
    v = v * np.sqrt(np.clip(w, 0.0, None))[:, None, :]
    tau = np.swapaxes(v, -1, -2) @ SPIN_FLIP @ v
    lam = np.linalg.svd(tau, compute_uv=False)
    return np.clip(lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3], 0.0, None)


def wootters(rho2q) -> float:
    return float(wootters_batch(_as_two_qubit(rho2q)[None])[0])


def correlation_batch(blocks: np.ndarray, kets: bool = False) -> np.ndarray:
    """``T_uv = Tr(ρ σ_u⊗σ_v)`` for normalized 4×4 states or 4-kets."""
    if kets:
        return np.einsum("na,uvab,nb->nuv", blocks.conj(), PAULI_PAIRS, blocks).real
    return np.einsum("nba,uvab->nuv", blocks, PAULI_PAIRS).real


def correlation_matrix(rho2q) -> np.ndarray:
    return correlation_batch(_as_two_qubit(rho2q)[None])[0]


def horodecki_batch(T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form CHSH maxima and realizing settings for correlation matrices.

    With ``c, c'`` the top two eigenvectors of ``TᵀT`` the settings are
    ``a1 ∝ Tc``, ``a2 ∝ Tc'``, ``b1,2 = cos θ c ± sin θ c'`` with
    ``tan θ = |Tc'| / |Tc|``, giving ``2√(t1 + t2)``.

    Returns ``(values, settings)`` with settings shaped ``(N, 4, 3)`` in
    the order ``a1, a2, b1, b2``.
    """
    T = np.asarray(T, dtype=float)
    gram = np.swapaxes(T, -1, -2) @ T
    ev, vec = np.linalg.eigh(gram)
    t1 = np.clip(ev[:, 2], 0.0, None)
    t2 = np.clip(ev[:, 1], 0.0, None)
    values = 2.0 * np.sqrt(t1 + t2)
    c1 = vec[:, :, 2]
    c2 = vec[:, :, 1]
    u1 = np.einsum("nij,nj->ni", T, c1)
    u2 = np.einsum("nij,nj->ni", T, c2)
    n1 = np.linalg.norm(u1, axis=1)
    n2 = np.linalg.norm(u2, axis=1)
    a1 = _safe_unit(u1, n1, c1)
    a2 = _safe_unit(u2, n2, c2)
    theta = np.arctan2(n2, n1)
    cos, sin = np.cos(theta)[:, None], np.sin(theta)[:, None]
    b1 = cos * c1 + sin * c2
    b2 = cos * c1 - sin * c2
    return values, np.stack([a1, a2, b1, b2], axis=1)


def _safe_unit(u: np.ndarray, n: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    # a vanishing image only occurs with a zero coefficient, so any unit vector will do
    small = n <= 1e-300
    out = np.where(small[:, None], fallback, u / np.where(small, 1.0, n)[:, None])
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def horodecki_max(rho2q) -> tuple[float, MeasurementSettings]:
    """Maximum two-qubit CHSH value ``2√(t1 + t2)`` and settings achieving it."""
    T = correlation_matrix(rho2q)
    values, settings = horodecki_batch(T[None])
    return float(values[0]), MeasurementSettings(*settings[0])
