"""Pure-numpy Gram assembly; the fallback when the compiled core is absent."""
import numpy as np

CHUNK = 2048


def monomial_matrix(u, exps, scale=None):
    """Rows ``scale_i * prod_j u_ij ** exps_bj`` for every node ``i`` and basis ``b``."""
    M, n = u.shape
    deg = exps.max(axis=0) if len(exps) else np.zeros(n, dtype=int)
    V = np.ones((M, exps.shape[0]), dtype=complex)
    if scale is not None:
        V *= scale[:, None]
    for j in range(n):
        if deg[j] == 0:
            continue
        pw = np.empty((M, deg[j] + 1), dtype=complex)
        pw[:, 0] = 1.0
        for d in range(1, deg[j] + 1):
            pw[:, d] = pw[:, d - 1] * u[:, j]
        V *= pw[:, exps[:, j]]
    return V


def gram(u, omega, exps, chunk=CHUNK):
    """``G[a, b] = sum_i omega_i u_i^a conj(u_i^b)`` accumulated in node chunks."""
    u = np.ascontiguousarray(u, dtype=complex)
    omega = np.ascontiguousarray(omega, dtype=float)
    exps = np.ascontiguousarray(exps, dtype=np.intp)
    nb = exps.shape[0]
    G = np.zeros((nb, nb), dtype=complex)
    for start in range(0, u.shape[0], chunk):
        stop = start + chunk
        V = monomial_matrix(u[start:stop], exps, np.sqrt(omega[start:stop]))
        G += V.T @ V.conj()
    return G
