"""Small dense complex-matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Subsystem
positions in this module are 0-based, as usual for array code; the
1-based level labels used elsewhere never reach this layer.
"""
from __future__ import annotations

import math
import string
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeError, SizeError, SymmetryError

MAX_SIDE = 4096
HERMITIAN_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")


def is_hermitian(m, tol: float = 1e-12) -> bool:
    a = as_matrix(m)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    """Kronecker product ``(A⊗B)[i*rB + k, j*cB + l] = A[i, j] * B[k, l]``."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_SIDE or cols > MAX_SIDE:
        raise SizeError(f"kron result {rows}x{cols} exceeds {MAX_SIDE}x{MAX_SIDE}")
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(rows, cols)


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Parameters
    ----------
    rho : array_like
        Square operator on ``dims[0] ⊗ dims[1] ⊗ ...``.
    dims : sequence of int
        Local dimensions.
    keep : iterable of int
        0-based positions of the factors to keep, in any order; the result
        is ordered as in ``dims``.
    """
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    m = len(dims)
    n = math.prod(dims)
    if rho.shape != (n, n):
        raise ShapeError(f"operator shape {rho.shape} does not match dims {dims}")
    if not keep or keep[0] < 0 or keep[-1] >= m:
        raise ShapeError(f"invalid keep set {keep} for {m} factors")
    if len(keep) == m:
        return rho.copy()
    if 2 * m > len(string.ascii_letters):
        raise SizeError("too many factors for partial_trace")
    letters = string.ascii_letters
    row = list(letters[:m])
    col = list(letters[m:2 * m])
    for k in range(m):
        if k not in keep:
            col[k] = row[k]
    out = [row[k] for k in keep] + [col[k] for k in keep]
    spec = "".join(row) + "".join(col) + "->" + "".join(out)
    t = np.einsum(spec, rho.reshape(dims + dims))
    side = math.prod(dims[k] for k in keep)
    return t.reshape(side, side)


def partial_transpose(rho, dims: Sequence[int], side: str = "B") -> np.ndarray:
    """Transpose one factor of a bipartite operator (``side`` is ``"A"`` or ``"B"``)."""
    rho = as_matrix(rho)
    if len(dims) != 2:
        raise ShapeError("partial_transpose expects bipartite dims (dA, dB)")
    da, db = int(dims[0]), int(dims[1])
    if rho.shape != (da * db, da * db):
        raise ShapeError(f"operator shape {rho.shape} does not match dims {(da, db)}")
    t = rho.reshape(da, db, da, db)
    if side == "A":
        t = t.transpose(2, 1, 0, 3)
    elif side == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"side must be 'A' or 'B', not {side!r}")
    return np.ascontiguousarray(t).reshape(da * db, da * db)


def trace_norm(m) -> float:
    """Sum of singular values."""
    a = as_matrix(m)
    _require_square(a)
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def hermitian_eigs(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and the matching eigenvectors
    as columns.  Raises :class:`SymmetryError` when ``m`` is not Hermitian
    within ``tol``.
    """
    a = as_matrix(m)
    _require_square(a)
    if not is_hermitian(a, tol):
        raise SymmetryError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    return w[::-1].copy(), v[:, ::-1].copy()


def jacobi_eigh(m, tol: float = 1e-12, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the classical real rotation.  Sweeps stop once the off-diagonal
    Frobenius mass falls below ``tol`` (scaled by the matrix norm when that
    exceeds one).  Output ordering matches :func:`hermitian_eigs`.
    """
    a = as_matrix(m).copy()
    _require_square(a)
    if not is_hermitian(a, HERMITIAN_TOL):
        raise SymmetryError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                diff = (a[q, q] - a[p, p]).real
                phi = diff / (2.0 * r)
                t = (1.0 if phi >= 0 else -1.0) / (abs(phi) + math.sqrt(phi * phi + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # columns of g span the rotated (p, q) plane
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        raise ArithmeticError("Jacobi sweeps did not converge")
    w = np.diag(a).real
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def psd_sqrt(m) -> np.ndarray:
    w, v = hermitian_eigs(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T
