"""Assembly of the theta-type and hypersphere-type SDPs.

Theta variants (maximisation, unit trace):
    plain     X_ij = 0 on edges
    prime     plain plus X >= 0 entrywise
    plus      X_ij <= 0 on edges
    ball      plain plus X e >= 0
    weighted  plain with objective sqrt(w) sqrt(w)^T

Hypersphere variants (minimise the squared radius t):
    sphere    diag(X) = t e, L*(X) = e
    ball      diag(X) <= t e, L*(X) = e
    prime     diag(X) = t e, L*(X) >= e
    plus      diag(X) = t e, L*(X) = 1 on edges and <= 1 on non-edges
    weighted  diag(X) = e/2 + (t - 1/2) w, L*(X) = e + (t - 1/2) L*(W),
              with W = sqrt(w) sqrt(w)^T
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidWeightError, SolverError
from .graph import Graph, complement
from .linalg import edge_matrix
from .sdp import SdpProblem, SdpSolution, solve

THETA_VARIANTS = ("plain", "prime", "plus", "ball", "weighted")
T_VARIANTS = ("sphere", "ball", "prime", "plus", "weighted")


@dataclass
class ThetaResult:
    value: float
    X: np.ndarray
    solution: SdpSolution


@dataclass
class TResult:
    value: float
    X: np.ndarray
    solution: SdpSolution | None
    variant: str = "sphere"

    @property
    def t(self) -> float:
        return self.value


def check_weights(G: Graph, w) -> np.ndarray:
    w = np.asarray(w if w is not None else G.weights, dtype=float)
    if w.shape != (G.n,):
        raise InvalidWeightError(f"expected {G.n} weights")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise InvalidWeightError("weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise InvalidWeightError("weight vector must be nonzero")
    return w


def _entry(n, i, j):
    E = np.zeros((n, n))
    E[i, j] = E[j, i] = 0.5
    return E


def theta_problem(G: Graph, variant: str = "plain", w=None) -> SdpProblem:
    if variant not in THETA_VARIANTS:
        raise ValueError(f"unknown theta variant {variant!r}")
    n = G.n
    if n == 0:
        raise ValueError("theta needs a graph with at least one node")
    if variant == "weighted":
        s = np.sqrt(check_weights(G, w))
        C = np.outer(s, s)
    else:
        C = np.ones((n, n))
    P = SdpProblem(n, C, "max")
    P.add(np.eye(n), 1.0, name="trace")
    if variant == "plus":
        P.entry_signs = {e: "<=0" for e in G.edges}
    else:
        for i, j in G.edges:
            P.add(_entry(n, i, j), 0.0, name=f"edge {i} {j}")
    if variant == "prime":
        P.entry_signs = {e: ">=0" for e in G.non_edges()}
    if variant == "ball":
        P.row_constraints = [(np.eye(n)[i], ">=", 0.0) for i in range(n)]
    return P


def _require(sol: SdpSolution, what: str) -> SdpSolution:
    if not sol.optimal:
        raise SolverError(f"{what}: solver status {sol.status}", sol)
    return sol


def theta(G: Graph, variant: str = "plain", w=None, tol: float = 1e-8) -> ThetaResult:
    """Lovasz theta number of G (or one of its variants) with an optimal X."""
    P = theta_problem(G, variant, w)
    sol = _require(solve(P, tol=tol), f"theta[{variant}]")
    return ThetaResult(sol.primal_value, sol.X, sol)


def theta_bar(G: Graph, variant: str = "plain", w=None, tol: float = 1e-8) -> ThetaResult:
    """Theta of the complement."""
    return theta(complement(G), variant, w, tol)


def t_problem(G: Graph, variant: str = "sphere", w=None) -> SdpProblem:
    if variant not in T_VARIANTS:
        raise ValueError(f"unknown t variant {variant!r}")
    n = G.n
    if variant == "weighted":
        w = check_weights(G, w)
        s = np.sqrt(w)
        # scalar variable s = 1/2 - t >= 0, so t = 1/2 - s
        P = SdpProblem(n, np.zeros((n, n)), "min", scalar_cost=[-1.0], offset=0.5)
        for i in range(n):
            E = np.zeros((n, n))
            E[i, i] = 1.0
            P.add(E, 0.5, "==", [w[i]], name=f"diag {i}")
        for i, j in G.edges:
            P.add(edge_matrix(n, i, j), 1.0, "==", [(s[i] - s[j]) ** 2], name=f"edge {i} {j}")
        return P
    if variant == "ball":
        P = SdpProblem(n, np.zeros((n, n)), "min", scalar_cost=[1.0])
        for i in range(n):
            E = np.zeros((n, n))
            E[i, i] = 1.0
            P.add(E, 0.0, "<=", [-1.0], name=f"diag {i}")
    else:
        P = SdpProblem(n, np.eye(n) / n, "min")
        for i in range(1, n):
            E = np.zeros((n, n))
            E[i, i] = 1.0
            E[0, 0] = -1.0
            P.add(E, 0.0, name=f"diag {i}")
    zero = np.zeros(P.num_scalars) if P.num_scalars else None
    edge_sense = ">=" if variant == "prime" else "=="
    for i, j in G.edges:
        P.add(edge_matrix(n, i, j), 1.0, edge_sense, zero, name=f"edge {i} {j}")
    if variant == "plus":
        for i, j in G.non_edges():
            P.add(edge_matrix(n, i, j), 1.0, "<=", zero, name=f"non-edge {i} {j}")
    return P


def t_invariant(G: Graph, variant: str = "sphere", w=None, tol: float = 1e-8) -> TResult:
    """Hypersphere number t(G) or a variant, with an optimal Gram matrix X.

    Graphs without edges get t = 0 and X = 0 (the origin is a hypersphere
    representation of radius 0), except for the weighted variant, whose
    diagonal constraints still bind.
    """
    if variant not in T_VARIANTS:
        raise ValueError(f"unknown t variant {variant!r}")
    if G.n == 0:
        raise ValueError("t needs a graph with at least one node")
    if G.m == 0 and variant != "weighted":
        return TResult(0.0, np.zeros((G.n, G.n)), None, variant)
    P = t_problem(G, variant, w)
    sol = _require(solve(P, tol=tol), f"t[{variant}]")
    return TResult(sol.primal_value, sol.X, sol, variant)


def t_dual(G: Graph, res: TResult) -> tuple[np.ndarray, np.ndarray]:
    """Optimal (y, z) of max{e^T z : Diag(y) >= L(z), e^T y = 1} from a
    sphere-variant solve."""
    if res.variant != "sphere":
        raise ValueError("dual recovery needs the sphere variant")
    n = G.n
    if res.solution is None:
        y = np.full(n, 1.0 / n)
        return y, np.zeros(G.m)
    duals = res.solution.duals
    eta, z = duals[: n - 1], duals[n - 1 :]
    y = np.full(n, 1.0 / n)
    y[1:] -= eta
    y[0] += eta.sum()
    return y, z.copy()


def tw_problem(G: Graph, W) -> SdpProblem:
    """min <W, X> s.t. L*(X) = e, X psd."""
    W = np.asarray(W, dtype=float)
    P = SdpProblem(G.n, W, "min")
    for i, j in G.edges:
        P.add(edge_matrix(G.n, i, j), 1.0, name=f"edge {i} {j}")
    return P
