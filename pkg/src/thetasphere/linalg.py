"""Dense symmetric linear algebra helpers and the graph Laplacian pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotCongruentError, NotPSDError, NumericError


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        Q, lam = self.eigenvectors, self.eigenvalues
        return (Q * lam) @ Q.T


def sym(X) -> np.ndarray:
    """Symmetric part, mirrored so that X_ij == X_ji bitwise."""
    X = np.asarray(X, dtype=float)
    S = 0.5 * (X + X.T)
    iu = np.triu_indices(S.shape[0], 1)
    S[(iu[1], iu[0])] = S[iu]
    return S


def sym_eig(X) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise ValueError("expected a nonempty square matrix")
    if not np.all(np.isfinite(X)):
        raise NumericError("matrix has non-finite entries")
    lam, Q = np.linalg.eigh(sym(X))
    # fix column signs so repeated calls and platforms agree
    pivots = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[pivots, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return SpectralDecomposition(lam, Q * signs)


def lambda_min(X) -> float:
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(sym(X))[0])


def psd_factor(X, tol: float = 1e-8) -> np.ndarray:
    """Return U (rank x n) with U.T @ U ~= X.

    Column i of U is the vector assigned to index i. Eigenvalues at or below
    ``tol`` are dropped.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    dec = sym_eig(X)
    lam, Q = dec.eigenvalues, dec.eigenvectors
    if lam[0] < -tol:
        raise NotPSDError(float(lam[0]), tol)
    keep = lam > tol
    U = (Q[:, keep] * np.sqrt(lam[keep])).T
    # largest eigenvalue first
    return U[::-1].copy()


def gram(points) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    return P @ P.T


def laplacian_apply(G, z) -> np.ndarray:
    """Sum of z_e (e_i - e_j)(e_i - e_j)^T over the edges of G."""
    z = np.asarray(z, dtype=float).ravel()
    if z.shape[0] != G.m:
        raise ValueError(f"expected {G.m} edge values, got {z.shape[0]}")
    L = np.zeros((G.n, G.n))
    for (i, j), ze in zip(G.edges, z):
        L[i, i] += ze
        L[j, j] += ze
        L[i, j] -= ze
        L[j, i] -= ze
    return L


def laplacian_adjoint(G, X) -> np.ndarray:
    """Per-edge values X_ii - 2 X_ij + X_jj."""
    X = np.asarray(X, dtype=float)
    if X.shape != (G.n, G.n):
        raise ValueError(f"expected a {G.n}x{G.n} matrix")
    if G.m == 0:
        return np.zeros(0)
    E = np.asarray(G.edges)
    i, j = E[:, 0], E[:, 1]
    return X[i, i] - X[i, j] - X[j, i] + X[j, j]


def edge_matrix(n: int, i: int, j: int) -> np.ndarray:
    """(e_i - e_j)(e_i - e_j)^T."""
    M = np.zeros((n, n))
    M[i, i] = M[j, j] = 1.0
    M[i, j] = M[j, i] = -1.0
    return M


def procrustes(A, B, tol: float = 1e-6) -> np.ndarray:
    """Orthogonal Q minimising sum ||Q a_i - b_i||^2 (points are rows).

    Reflections are allowed. Raises NotCongruentError when the Gram matrices
    of the two point lists differ by more than ``tol``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape:
        raise ValueError("point lists must have equal shape")
    mismatch = np.max(np.abs(A @ A.T - B @ B.T)) if A.size else 0.0
    if mismatch > tol:
        raise NotCongruentError(f"Gram matrices differ by {mismatch:.3e}")
    U, _, Vt = np.linalg.svd(B.T @ A)
    return U @ Vt


def random_orthogonal(d: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def sylvester_hadamard(n: int) -> np.ndarray:
    if n < 1 or n & (n - 1):
        raise ValueError(f"{n} is not a power of two")
    H = np.ones((1, 1))
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


def null_space_basis(k: int) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of the all-ones vector in R^k."""
    if k < 2:
        return np.zeros((k, 0))
    M = np.eye(k) - np.ones((k, k)) / k
    dec = sym_eig(M)
    return dec.eigenvectors[:, 1:]
