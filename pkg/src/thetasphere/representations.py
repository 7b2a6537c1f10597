"""Explicit geometric representations and the constructions that move
between them.

Points are stored as an ``(n, d)`` array, one row per node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    EmptyNeighborhoodError,
    GraphValidationError,
    RepresentationError,
    SolverError,
    UnsupportedOrderError,
)
from .graph import Graph, blow_up_owner, clique_sum, contract
from .linalg import laplacian_adjoint, laplacian_apply, lambda_min, procrustes, psd_factor, sylvester_hadamard
from .programs import SdpProblem, TResult, check_weights, t_dual, t_invariant
from .sdp import solve

KINDS = ("unit_distance", "hypersphere", "orthonormal", "obtuse", "vector_coloring")


@dataclass
class Representation:
    kind: str
    points: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown representation kind {self.kind!r}")
        P = np.asarray(self.points, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        self.points = P

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def t(self) -> float:
        return float(self.metadata["t"])

    def gram(self) -> np.ndarray:
        return self.points @ self.points.T

    def to_dict(self) -> dict:
        meta = {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.metadata.items()}
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "points": self.points.tolist(),
            "metadata": meta,
        }


@dataclass
class DualSolution:
    """Feasible point of max{e^T z : Diag(y) >= L(z), e^T y = 1}."""

    y: np.ndarray
    z: np.ndarray

    @property
    def objective(self) -> float:
        return float(np.sum(self.z))

    def slack_matrix(self, G: Graph) -> np.ndarray:
        return np.diag(self.y) - laplacian_apply(G, self.z)

    def psd_residual(self, G: Graph) -> float:
        """lambda_min(Diag(y) - L(z)); nonnegative when feasible."""
        return lambda_min(self.slack_matrix(G)) if G.n else 0.0


# ------------------------------------------------------------- small helpers


def canonical_frame(P: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rotate so that point 1 lies on axis 1, point 2 in the span of axes 1-2
    and so on (sequential Gram-Schmidt). The output dimension is the
    numerical rank of the point set."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    scale = max(1.0, float(np.max(np.abs(P), initial=0.0)))
    basis = []
    for i in range(n):
        r = P[i].copy()
        for b in basis:
            r -= (r @ b) * b
        # second pass for stability
        for b in basis:
            r -= (r @ b) * b
        nr = np.linalg.norm(r)
        if nr > tol * scale:
            basis.append(r / nr)
    if not basis:
        return np.zeros((n, 0))
    return P @ np.array(basis).T


def polish(P: np.ndarray, targets, t0: float | None = None, iters: int = 30):
    """Newton-type correction of a point configuration.

    ``targets`` is a list of ``(i, j, a, b)`` requiring ``|p_i|^2 = a + b t``
    when ``i == j`` and ``|p_i - p_j|^2 = a + b t`` otherwise. The scalar
    ``t`` is a variable when ``t0`` is given. Each step is the minimum-norm
    Gauss-Newton step, so the configuration moves as little as possible.
    Returns the corrected points, t and the final max residual.
    """
    P = np.array(P, dtype=float)
    n, d = P.shape
    free_t = t0 is not None
    t = float(t0) if free_t else 0.0
    if not targets or d == 0:
        return P, t, 0.0
    I = np.array([k[0] for k in targets])
    J = np.array([k[1] for k in targets])
    a = np.array([k[2] for k in targets], dtype=float)
    b = np.array([k[3] for k in targets], dtype=float)
    same = I == J
    rows = np.arange(len(targets))

    def residual(P, t):
        D = np.where(same[:, None], P[I], P[I] - P[J])
        return np.sum(D**2, axis=1) - a - b * t, D

    best = None
    for _ in range(iters):
        r, D = residual(P, t)
        err = float(np.max(np.abs(r)))
        if best is None or err < best[2]:
            best = (P.copy(), t, err)
        if err <= 1e-14:
            break
        Jac = np.zeros((len(targets), n * d + free_t))
        for k in range(d):
            Jac[rows, I * d + k] += 2 * D[:, k]
            Jac[rows[~same], J[~same] * d + k] -= 2 * D[~same, k]
        if free_t:
            Jac[:, -1] = -b
        step = np.linalg.lstsq(Jac, -r, rcond=None)[0]
        P = P + step[: n * d].reshape(n, d)
        if free_t:
            t += step[-1]
    r, _ = residual(P, t)
    err = float(np.max(np.abs(r)))
    if err < best[2]:
        best = (P, t, err)
    return best


def _sphere_targets(G: Graph, edge_targets=None):
    tg = [(i, i, 0.0, 1.0) for i in range(G.n)]
    edges = G.edges if edge_targets is None else edge_targets
    tg += [(i, j, 1.0, 0.0) for i, j in edges]
    return tg


def _points_from_gram(X, targets, t, tol=1e-8):
    """Factor X, correct the factor against ``targets`` and rotate it into
    the canonical frame."""
    lam_max = max(1.0, float(np.max(np.linalg.eigvalsh(X)))) if len(X) else 1.0
    U = psd_factor(X, tol=max(tol, 1e-6 * lam_max))
    P, t, err = polish(U.T, targets, t)
    if err > 1e-11:
        # keep every nonnegative direction and try again
        U = psd_factor(X, tol=max(tol, 1e-7))
        P2, t2, err2 = polish(U.T, targets, t)
        if err2 < err:
            P, t, err = P2, t2, err2
    P = canonical_frame(P)
    P, t, err = polish(P, targets, t)
    return P, t


# ------------------------------------------------------------ hypersphere side


def hypersphere_rep(G: Graph, tol: float = 1e-8, result: TResult | None = None) -> Representation:
    """Optimal hypersphere representation, squared radius t(G)."""
    if result is None:
        result = t_invariant(G, "sphere", tol=tol)
    if G.m == 0:
        return Representation("hypersphere", np.zeros((G.n, 0)), {"t": 0.0})
    P, t = _points_from_gram(result.X, _sphere_targets(G), result.value)
    return Representation("hypersphere", P, {"t": t, "t_sdp": result.value})


def ortho_from_sphere(rep: Representation) -> Representation:
    """q(i) = sqrt(2) [sqrt(1/2 - t) + u(i)]: orthonormal representation of
    the complement."""
    t = rep.t
    if t > 0.5 + 1e-9:
        raise RepresentationError(f"squared radius {t} exceeds 1/2")
    head = np.full((rep.n, 1), np.sqrt(max(0.0, 0.5 - t)))
    Q = np.sqrt(2.0) * np.hstack([head, rep.points])
    return Representation("orthonormal", Q, {"t": t, "of": "complement"})


def sphere_from_ortho(rep: Representation, mu: float, tol: float = 1e-8) -> Representation:
    """Inverse of :func:`ortho_from_sphere` for q(i) = sqrt(2)[(2 mu)^(-1/2) + u(i)]."""
    if mu <= 0:
        raise RepresentationError("mu must be positive")
    head = rep.points[:, 0]
    if np.max(np.abs(head - 1.0 / np.sqrt(mu)), initial=0.0) > tol:
        raise RepresentationError("first coordinates are not all equal to mu^(-1/2)")
    U = rep.points[:, 1:] / np.sqrt(2.0)
    return Representation("hypersphere", U, {"t": 0.5 * (1.0 - 1.0 / mu)})


def coloring_from_sphere(rep: Representation) -> Representation:
    """Strict vector k-colouring u(i) / sqrt(t) with k = 1/(1 - 2t)."""
    t = rep.t
    if not 0 < t < 0.5:
        raise RepresentationError(f"need 0 < t < 1/2, got {t}")
    k = 1.0 / (1.0 - 2.0 * t)
    return Representation("vector_coloring", rep.points / np.sqrt(t), {"k": k, "t": t})


def obtuse_rep_from_tprime(G: Graph, tol: float = 1e-8):
    """Obtuse representation of the complement from an optimum of t'(G),
    together with the consistent unit vector c = e_1."""
    res = t_invariant(G, "prime", tol=tol)
    if G.m == 0:
        Q = np.ones((G.n, 1))
        return Representation("obtuse", Q, {"t": 0.0, "of": "complement"}), np.array([1.0])
    X = res.X
    Lx = laplacian_adjoint(G, X)
    active = [e for e, v in zip(G.edges, Lx) if v <= 1 + 1e-6]
    P, t = _points_from_gram(X, _sphere_targets(G, active), res.value)
    sph = Representation("hypersphere", P, {"t": t})
    q = ortho_from_sphere(sph)
    c = np.zeros(q.dimension)
    c[0] = 1.0
    return Representation("obtuse", q.points, {"t": t, "of": "complement"}), c


def orth_rep_optimal(G: Graph, tol: float = 1e-8):
    """Orthonormal representation p of G and unit c with
    sum_i (c^T p(i))^2 = theta(complement of G).

    Solves min{trace(Y) : e^T Y e = 1, Y_ij = 0 on non-edges, Y psd},
    factors Y = V^T V and returns p(i) = v_i / |v_i| and c = V e.
    """
    n = G.n
    P = SdpProblem(n, np.eye(n), "min")
    P.add(np.ones((n, n)), 1.0, name="sum")
    for i, j in G.non_edges():
        E = np.zeros((n, n))
        E[i, j] = E[j, i] = 0.5
        P.add(E, 0.0, name=f"non-edge {i} {j}")
    sol = solve(P, tol=tol)
    if not sol.optimal:
        raise SolverError(f"min-trace program: status {sol.status}", sol)
    Y = sol.X
    d = np.diag(Y)
    if np.min(d) <= tol:
        raise RepresentationError(
            f"degenerate optimum: Y_ii = {np.min(d):.2e} at node {int(np.argmin(d))}"
        )
    V = psd_factor(Y, tol=1e-12)
    norms = np.linalg.norm(V, axis=0)
    p = (V / norms).T
    c = V.sum(axis=1)
    rep = Representation("orthonormal", p, {"t_hat": sol.primal_value})
    return rep, c


# ------------------------------------------------------------------ theta body


@dataclass
class ThetaBodyElement:
    x: np.ndarray
    provenance: str  # "stable_set" or "orthonormal_witness"


def thetabody_element(source, G: Graph | None = None) -> ThetaBodyElement:
    """Element of TH(complement of G).

    ``source`` is either a clique of G (a stable set of the complement,
    ``G`` required) or a pair ``(p, c)`` of an orthonormal representation of
    G and a unit vector c.
    """
    if isinstance(source, tuple) and len(source) == 2 and isinstance(source[0], Representation):
        p, c = source
        c = np.asarray(c, dtype=float)
        if abs(np.linalg.norm(c) - 1) > 1e-6:
            raise RepresentationError("c must be a unit vector")
        return ThetaBodyElement((p.points @ c) ** 2, "orthonormal_witness")
    if G is None:
        raise ValueError("a clique needs its graph")
    S = sorted(set(int(v) for v in source))
    if not S or any(not 0 <= v < G.n for v in S):
        raise GraphValidationError("invalid node set")
    for a in range(len(S)):
        for b in range(a + 1, len(S)):
            if not G.has_edge(S[a], S[b]):
                raise GraphValidationError(f"{S} is not a clique of G")
    x = np.zeros(G.n)
    x[S] = 1.0
    return ThetaBodyElement(x, "stable_set")


def minmax_check(rep: Representation, x: ThetaBodyElement, w=None) -> float:
    """2t + 1/<w, x> - 1, nonnegative for feasible pairs."""
    w = np.ones(len(x.x)) if w is None else np.asarray(w, dtype=float)
    s = float(w @ x.x)
    if s <= 0:
        raise ValueError("x must be nonzero")
    return 2 * rep.t + 1.0 / s - 1.0


# ---------------------------------------------------------- constructions


def simplex_rep(k: int) -> np.ndarray:
    """k points at mutual distance 1 around the origin, squared radius (1 - 1/k)/2."""
    return (np.eye(k) - np.ones((k, k)) / k) / np.sqrt(2.0)


def weighted_targets(G: Graph, w):
    s = np.sqrt(w)
    tg = [(i, i, 0.5 - 0.5 * w[i], w[i]) for i in range(G.n)]
    for i, j in G.edges:
        L = (s[i] - s[j]) ** 2
        tg.append((i, j, 1.0 - 0.5 * L, L))
    return tg


def blowup_rep(G: Graph, w, result: TResult | None = None, tol: float = 1e-8) -> Representation:
    """Hypersphere representation of the blow-up G^w built from a solution
    of the weighted program: node k in clique i gets w_i^(-1/2) p(i) on the
    shared block and a simplex vertex on the private block of clique i."""
    w = np.asarray(w)
    if np.any(w < 1) or np.any(w != np.round(w)):
        raise ValueError("blow-up weights must be positive integers")
    wf = check_weights(G, w.astype(float))
    if result is None:
        result = t_invariant(G, "weighted", w=wf, tol=tol)
    X, t = result.X, result.value
    if X.shape != (G.n, G.n) or lambda_min(X) < -1e-6:
        raise RepresentationError("input is not a feasible solution of the weighted program")
    P, t = _points_from_gram(X, weighted_targets(G, wf), t)
    owner = blow_up_owner(w.astype(int))
    sizes = w.astype(int)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    d = P.shape[1]
    U = np.zeros((len(owner), d + offsets[-1]))
    pos = 0
    for i in range(G.n):
        S = simplex_rep(sizes[i])
        for k in range(sizes[i]):
            U[pos, :d] = P[i] / np.sqrt(wf[i])
            U[pos, d + offsets[i] : d + offsets[i + 1]] = S[k]
            pos += 1
    return Representation("hypersphere", canonical_frame(U), {"t": t})


def clique_sum_glue(rep1: Representation, G1: Graph, S1, rep2: Representation, G2: Graph, S2):
    """Glue hypersphere representations of G1 and G2 along a common clique.

    The second representation is moved by the orthogonal map that takes its
    clique points onto those of the first. Returns the glued graph and its
    representation.
    """
    if abs(rep1.t - rep2.t) > 1e-7:
        raise RepresentationError(f"radius mismatch: {rep1.t} vs {rep2.t}")
    G, where = clique_sum(G1, S1, G2, S2)
    D = max(rep1.dimension, rep2.dimension, 1)
    A = np.zeros((rep1.n, D))
    A[:, : rep1.dimension] = rep1.points
    B = np.zeros((rep2.n, D))
    B[:, : rep2.dimension] = rep2.points
    Q = procrustes(B[list(S2)], A[list(S1)], tol=1e-6)
    B = B @ Q.T
    U = np.zeros((G.n, D))
    U[: G1.n] = A
    for v in range(G2.n):
        if v not in S2:
            U[where[v]] = B[v]
    return G, Representation("hypersphere", U, {"t": rep1.t})


def contract_dual(G: Graph, e, d: DualSolution, tol: float = 1e-8) -> tuple[Graph, DualSolution]:
    """Dual solution for G/e: merge the node weights of the endpoints and add
    up the edge values of edges that become parallel."""
    if abs(np.sum(d.y) - 1) > tol or d.psd_residual(G) < -tol:
        raise RepresentationError("input is not feasible for the dual program")
    H, mm = contract(G, e)
    a, b = mm.contracted
    keep = [v for v in range(G.n) if v != b]
    y = np.asarray(d.y, dtype=float)
    yh = y[keep].copy()
    yh[a] += y[b]
    zh = np.zeros(H.m)
    for f, zf in zip(G.edges, d.z):
        if f == (a, b):
            continue
        zh[H.edge_index(*mm.image[f])] += zf
    return H, DualSolution(yh, zh)


def optimal_dual(G: Graph, tol: float = 1e-8, result: TResult | None = None) -> DualSolution:
    if result is None:
        result = t_invariant(G, "sphere", tol=tol)
    y, z = t_dual(G, result)
    return DualSolution(y, z)


def neighborhood_rep(G: Graph, i: int, rep: Representation) -> Representation:
    """Hypersphere representation of G[N(i)] with squared radius 1 - 1/(4t):
    rotate p(i) onto sqrt(t) e_1 and drop the first coordinate of the
    neighbours, which all equal (2t - 1) / (2 sqrt(t))."""
    nb = sorted(G.neighbors(i))
    if not nb:
        raise EmptyNeighborhoodError(f"node {i} is isolated")
    t = rep.t
    P = rep.points
    pi = P[i]
    target = np.zeros(P.shape[1])
    target[0] = np.linalg.norm(pi)
    v = pi - target
    if np.linalg.norm(v) > 1e-15:
        H = np.eye(P.shape[1]) - 2 * np.outer(v, v) / (v @ v)
        P = P @ H.T
    out = P[nb, 1:]
    return Representation("hypersphere", out, {"t": 1 - 1 / (4 * t), "beta": (2 * t - 1) / (2 * np.sqrt(t))})


def hadamard_rep(n: int) -> Representation:
    """Hadamard representation of K_n: i -> (2n)^(-1/2) L e_i with L the
    non-constant rows of a Sylvester-Hadamard matrix."""
    try:
        H = sylvester_hadamard(n)
    except ValueError:
        raise UnsupportedOrderError(f"Hadamard order {n} is not a power of two") from None
    L = H[1:]
    return Representation("hypersphere", L.T / np.sqrt(2 * n), {"t": (n - 1) / (2 * n)})


def optimal_shift(n: int, A) -> float:
    """Shift alpha balancing the two node types of the lifted representation.

    Node types give f1 = T'/(2n) + a alpha^2 and f2 = a (alpha + c)^2 with
    T' the trace of the first n-1 diagonal entries, a the last one and
    c^2 = (n+1)/(2n); the max of the two is smallest where they cross.
    """
    a_diag = np.diag(np.asarray(A, dtype=float))
    a = a_diag[-1]
    if a <= 0:
        return 0.0
    Tp = float(np.sum(a_diag[:-1]))
    c = np.sqrt((n + 1) / (2 * n))
    return (Tp / (2 * n) - a * c * c) / (2 * a * c)


def lifted_hadamard_rep(n: int, A, alpha: float | None = None) -> Representation:
    """Unit-distance representation of K_{n+1}: h(i) + alpha for the n
    Hadamard points and 0 + (alpha + sqrt((n+1)/(2n))) for the extra node."""
    A = np.asarray(A, dtype=float)
    if A.shape != (n, n) or np.max(np.abs(A - np.diag(np.diag(A)))) > 0:
        raise ValueError("A must be diagonal of order n")
    if np.diag(A)[-1] < np.max(np.diag(A)):
        raise ValueError("the largest eigenvalue of A must sit in the last position")
    h = hadamard_rep(n).points
    if alpha is None:
        alpha = optimal_shift(n, A)
    c = np.sqrt((n + 1) / (2 * n))
    U = np.zeros((n + 1, n))
    U[:n, : n - 1] = h
    U[:n, n - 1] = alpha
    U[n, n - 1] = alpha + c
    vals = np.einsum("ij,jk,ik->i", U, A, U)
    return Representation("unit_distance", U, {"alpha": float(alpha), "objective_inf": float(np.max(vals))})


# -------------------------------------------------------------- verification


@dataclass
class RepresentationReport:
    edge_residual: float
    norm_residual: float
    constraint_residual: float
    ok: bool

    def as_dict(self):
        return dict(
            edge_residual=self.edge_residual,
            norm_residual=self.norm_residual,
            constraint_residual=self.constraint_residual,
            ok=self.ok,
        )


def verify_representation(G: Graph, rep: Representation, tol: float = 1e-8) -> RepresentationReport:
    """Residuals of ``rep`` against the constraints of its kind on G.

    unit_distance and hypersphere: edge length deviation from 1, and for
    hypersphere the deviation of |u_i|^2 from t. orthonormal, obtuse and
    vector_coloring: deviation of |p_i| from 1 and the violation of the
    pairwise condition (orthogonal / nonpositive on non-edges, at most
    -1/(k-1) on edges).
    """
    P = rep.points
    if P.shape[0] != G.n:
        raise ValueError("representation and graph differ in node count")
    Gm = P @ P.T
    norms2 = np.diag(Gm)
    edge_res = norm_res = cons_res = 0.0
    E = np.array(G.edges, dtype=int).reshape(-1, 2)
    NE = np.array(G.non_edges(), dtype=int).reshape(-1, 2)
    if rep.kind in ("unit_distance", "hypersphere"):
        if len(E):
            lengths = np.linalg.norm(P[E[:, 0]] - P[E[:, 1]], axis=1)
            edge_res = float(np.max(np.abs(lengths - 1.0)))
        if rep.kind == "hypersphere":
            norm_res = float(np.max(np.abs(norms2 - rep.t), initial=0.0))
    else:
        norm_res = float(np.max(np.abs(np.sqrt(norms2) - 1.0), initial=0.0))
        if rep.kind == "orthonormal" and len(NE):
            cons_res = float(np.max(np.abs(Gm[NE[:, 0], NE[:, 1]])))
        elif rep.kind == "obtuse" and len(NE):
            cons_res = float(max(0.0, np.max(Gm[NE[:, 0], NE[:, 1]])))
        elif rep.kind == "vector_coloring" and len(E):
            bound = -1.0 / (rep.metadata["k"] - 1.0)
            cons_res = float(max(0.0, np.max(Gm[E[:, 0], E[:, 1]] - bound)))
    ok = max(edge_res, norm_res, cons_res) <= tol
    return RepresentationReport(edge_res, norm_res, cons_res, bool(ok))


# ------------------------------------------------------------ 2D realizability


@dataclass
class Realization:
    success: bool
    points: np.ndarray
    residual: float
    restarts_used: int
    seed: int


def realizability_2d(G: Graph, edge_lengths=None, restarts: int = 100, seed: int = 0) -> Realization:
    """Heuristic search for a planar drawing with prescribed edge lengths.

    Least squares on squared-length residuals from random starts. Success
    (max length error <= 1e-8) is a certificate; failure proves nothing.
    """
    lengths = np.ones(G.m) if edge_lengths is None else np.asarray(edge_lengths, dtype=float)
    if lengths.shape != (G.m,) or np.any(lengths <= 0):
        raise ValueError("need one positive length per edge")
    E = np.array(G.edges, dtype=int).reshape(-1, 2)
    l2 = lengths**2
    rng = np.random.default_rng(seed)
    spread = max(1.0, float(np.max(lengths, initial=1.0)) * np.sqrt(G.n))

    def resid(v):
        P = v.reshape(G.n, 2)
        D = P[E[:, 0]] - P[E[:, 1]]
        return np.sum(D**2, axis=1) - l2

    def jac(v):
        P = v.reshape(G.n, 2)
        D = P[E[:, 0]] - P[E[:, 1]]
        Jm = np.zeros((G.m, 2 * G.n))
        r = np.arange(G.m)
        for k in range(2):
            Jm[r, 2 * E[:, 0] + k] = 2 * D[:, k]
            Jm[r, 2 * E[:, 1] + k] = -2 * D[:, k]
        return Jm

    def max_err(v):
        if G.m == 0:
            return 0.0
        P = v.reshape(G.n, 2)
        return float(np.max(np.abs(np.linalg.norm(P[E[:, 0]] - P[E[:, 1]], axis=1) - lengths)))

    best_v, best_err = None, np.inf
    used = 0
    for k in range(max(1, restarts)):
        used = k + 1
        v0 = rng.uniform(-spread, spread, 2 * G.n) / 2
        if G.m == 0:
            best_v, best_err = v0, 0.0
            break
        sol = least_squares(resid, v0, jac=jac, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=500)
        err = max_err(sol.x)
        if err < best_err:
            best_v, best_err = sol.x, err
        if best_err <= 1e-8:
            break
    P = best_v.reshape(G.n, 2)
    return Realization(best_err <= 1e-8, P, best_err, used, seed)
