"""Finite-difference complex Hessian ``(d^2 phi / dz_j dzbar_k)``.

Used as a classifier that is independent of the extension index: a smooth
weight is plurisubharmonic exactly when this matrix is positive
semidefinite everywhere.
"""
from __future__ import annotations

import numpy as np

from .weights import Weight

__all__ = ["LeviError", "levi_form", "levi_form_checked", "levi_class", "sample_levi_class"]

DEFAULT_STEP = 1e-3


class LeviError(ValueError):
    pass


def _line_laplacians(w: Weight, z: np.ndarray, dirs: np.ndarray, h: float) -> np.ndarray:
    """``d^2/dzeta dzetabar phi(z + zeta u)`` at 0 for each row ``u`` of ``dirs``.

    Five-point Laplacian in the complex line, divided by 4.
    """
    offsets = np.array([1, -1, 1j, -1j]) * h
    pts = z[None, None, :] + offsets[None, :, None] * dirs[:, None, :]
    vals = w(pts.reshape(-1, z.shape[0])).reshape(len(dirs), 4)
    centre = w(z[None, :])[0]
    if not (np.all(np.isfinite(vals)) and np.isfinite(centre)):
        raise LeviError("weight is not finite near the evaluation point")
    return (vals.sum(axis=1) - 4 * centre) / (4 * h * h)


def levi_form(w: Weight, z, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference Levi form of ``w`` at ``z``, O(h^2) accurate.

    Diagonal entries come from Laplacians along the coordinate lines;
    off-diagonal entries from polarization with the directions
    ``e_j + e_k`` and ``e_j + i e_k``.  The result is Hermitian by
    construction.
    """
    if h <= 0:
        raise LeviError("step must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.shape[0]
    if n != w.n:
        raise LeviError(f"point in C^{n} but weight on C^{w.n}")
    eye = np.eye(n, dtype=complex)
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    dirs = [eye[j] for j in range(n)]
    dirs += [eye[j] + eye[k] for j, k in pairs]
    dirs += [eye[j] + 1j * eye[k] for j, k in pairs]
    q = _line_laplacians(w, z, np.array(dirs), h)

    H = np.diag(q[:n]).astype(complex)
    m = len(pairs)
    for p, (j, k) in enumerate(pairs):
        x = (q[n + p] - q[j] - q[k]) / 2
        y = (q[n + m + p] - q[j] - q[k]) / 2
        H[j, k] = x + 1j * y
        H[k, j] = x - 1j * y
    return (H + H.conj().T) / 2


def levi_form_checked(w: Weight, z, h: float = DEFAULT_STEP):
    """Levi form at ``h`` plus the Richardson discrepancy against ``h/2``.

    Returns ``(H, err)`` where ``H`` is the extrapolated estimate and
    ``err`` the spectral norm of the difference between the two steps.
    """
    H1 = levi_form(w, z, h)
    H2 = levi_form(w, z, h / 2)
    return (4 * H2 - H1) / 3, float(np.linalg.norm(H2 - H1, 2))


def levi_class(eigs: np.ndarray, tol: float) -> str:
    """Sign pattern of the sampled Levi eigenvalues.

    ``eigs`` has one row of eigenvalues per sample point.
    """
    lo, hi = float(np.min(eigs)), float(np.max(eigs))
    pos = hi > tol
    neg = lo < -tol
    if pos and neg:
        return "mixed"
    if pos:
        return "psh"
    if neg:
        return "superharmonic"
    return "pluriharmonic"


def sample_levi_class(w: Weight, points: np.ndarray, h: float = DEFAULT_STEP, tol: float = 1e-5) -> str:
    eigs = []
    for z in points:
        H, err = levi_form_checked(w, z, h)
        eigs.append(np.linalg.eigvalsh(H))
    return levi_class(np.array(eigs), tol)
