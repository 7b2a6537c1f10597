"""Ellipsoidal unit-distance numbers.

E_p(G; A) is the smallest ||(u_i^T A u_i)_i||_p over unit-distance
representations u of G in R^d, where A is a d x d psd shape matrix. For
p = 1 it reduces to an SDP over Gram matrices, t_W(G), with W running over
the orthogonal orbit of A.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import linprog, minimize, minimize_scalar, nnls
from scipy.special import logsumexp

from .errors import DisconnectedGraphError, NotPSDError, SolverError, UnsupportedOrderError
from .graph import Graph, is_connected
from .linalg import lambda_min, laplacian_adjoint, null_space_basis, random_orthogonal, sym, sym_eig
from .programs import tw_problem
from .representations import Representation, polish
from .sdp import SdpProblem, SdpSolution, solve

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EllipsoidShape:
    A: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError("shape matrix must be square")
        if np.max(np.abs(A - A.T), initial=0.0) > 1e-12:
            raise ValueError("shape matrix must be symmetric")
        lm = lambda_min(A)
        if lm < -1e-9:
            raise NotPSDError(lm, 1e-9)
        object.__setattr__(self, "A", sym(A))

    @property
    def d(self) -> int:
        return self.A.shape[0]


def _as_shape(A) -> EllipsoidShape:
    return A if isinstance(A, EllipsoidShape) else EllipsoidShape(A)


# ---------------------------------------------------------------- t_W layer


def _exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(float(v))


def classify_tw(W) -> str:
    """finite_slater if e^T W e > 0, finite_null if W e = 0, else unbounded.

    Computed in exact rational arithmetic: decimal strings are read exactly,
    floats by their binary value.
    """
    rows = [[_exact(v) for v in row] for row in (W.tolist() if isinstance(W, np.ndarray) else W)]
    sums = [sum(r, Fraction(0)) for r in rows]
    total = sum(sums, Fraction(0))
    if total > 0:
        return "finite_slater"
    if all(s == 0 for s in sums):
        return "finite_null"
    return "unbounded"


def tW_Kn_closed(n: int, W) -> float:
    """Closed form of t_W(K_n): half of trace(W) - |We|^2 / e^T W e when
    e^T W e > 0, half the trace when W e = 0 and -inf otherwise."""
    rows = [[_exact(v) for v in row] for row in (W.tolist() if isinstance(W, np.ndarray) else W)]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"W must be {n} x {n}")
    cls = classify_tw(rows)
    if cls == "unbounded":
        return -math.inf
    tr = sum((rows[i][i] for i in range(n)), Fraction(0))
    if cls == "finite_null":
        return float(tr / 2)
    We = [sum(r, Fraction(0)) for r in rows]
    return float((tr - sum(v * v for v in We) / sum(We)) / 2)


@dataclass
class TwResult:
    value: float
    classification: str
    X: np.ndarray | None = None
    solution: SdpSolution | None = None


def tW(G: Graph, W, tol: float = 1e-8) -> TwResult:
    """t_W(G) = inf{<W, X> : L*(X) = e, X psd} for connected G.

    The three cases of the finiteness criterion are decided exactly before
    any solve. When W e = 0 the problem is solved on the complement of e,
    where the all-ones direction (a recession direction of cost zero) is
    gone.
    """
    if G.n == 0 or not is_connected(G):
        raise DisconnectedGraphError("t_W needs a connected graph; split it with components() or blocks() first")
    cls = classify_tw(W)
    Wf = np.array([[float(_exact(v)) for v in row] for row in (W.tolist() if isinstance(W, np.ndarray) else W)])
    if Wf.shape != (G.n, G.n):
        raise ValueError("W has the wrong order")
    Wf = sym(Wf)
    if cls == "unbounded":
        return TwResult(-math.inf, cls)
    if G.n == 1:
        return TwResult(0.0, cls, np.zeros((1, 1)))
    if cls == "finite_slater":
        sol = solve(tw_problem(G, Wf), tol=tol)
        if not sol.optimal:
            raise SolverError(f"t_W: solver status {sol.status}", sol)
        return TwResult(sol.primal_value, cls, sol.X, sol)
    Q = null_space_basis(G.n)
    Wr = sym(Q.T @ Wf @ Q)
    P = SdpProblem(G.n - 1, Wr, "min")
    for i, j in G.edges:
        v = Q[i] - Q[j]
        P.add(np.outer(v, v), 1.0, name=f"edge {i} {j}")
    sol = solve(P, tol=tol)
    if not sol.optimal:
        raise SolverError(f"t_W (null case): solver status {sol.status}", sol)
    return TwResult(sol.primal_value, cls, Q @ sol.X @ Q.T, sol)


def unit_dist_Kn_member(X, tol: float = 1e-9) -> tuple[bool, np.ndarray]:
    """Membership in the feasible region of t_W(K_n) through its explicit
    description: L*(X) = e and, with y = 2 diag(X) - e, |e||y| <= e^T y + 2."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    d = np.diag(X)
    iu = np.triu_indices(n, 1)
    Lx = d[iu[0]] + d[iu[1]] - 2 * X[iu]
    y = 2 * d - 1
    ok = np.max(np.abs(Lx - 1)) <= tol and np.sqrt(n) * np.linalg.norm(y) <= y.sum() + 2 + tol
    return bool(ok), y


def e1_Kn_closed(n: int, A) -> float:
    """E_1(K_n; A): half the sum of the n-1 smallest eigenvalues when the
    ambient dimension is at least n-1, +inf otherwise."""
    shape = _as_shape(A)
    if shape.d < n - 1:
        return math.inf
    lam = sym_eig(shape.A).eigenvalues
    return 0.5 * float(np.sum(lam[: n - 1]))


@dataclass
class HadamardBound:
    value: float
    equality: bool


def hadamard_bound(n: int, A) -> HadamardBound:
    """trace(A)/(2(n+1)) + (trace(A) - n lam_max)^2 / (8 n (n+1) lam_max),
    an upper bound on E_inf(K_{n+1}; A) for A of order n."""
    if n < 1 or n & (n - 1):
        raise UnsupportedOrderError(f"no Sylvester-Hadamard matrix of order {n}")
    shape = _as_shape(A)
    lam = sym_eig(shape.A).eigenvalues
    lmax = float(lam[-1])
    if lmax <= 0:
        raise ValueError("A must be nonzero")
    T = float(np.sum(lam))
    val = T / (2 * (n + 1)) + (T - n * lmax) ** 2 / (8 * n * (n + 1) * lmax)
    return HadamardBound(val, bool(n == 2 and lam[0] > 0))


# ----------------------------------------------------------------- E_p local


@dataclass
class EpResult:
    value: float
    rep: Representation | None
    restarts_used: int
    converged_conv_hull: bool
    status: str = "ok"
    p: float = math.inf
    feasibility_residual: float = math.inf
    conv_certificate: float = -math.inf
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value if math.isfinite(self.value) else "inf",
            "p": "inf" if math.isinf(self.p) else self.p,
            "status": self.status,
            "restarts_used": self.restarts_used,
            "converged_conv_hull": self.converged_conv_hull,
            "conv_certificate": self.conv_certificate,
            "feasibility_residual": self.feasibility_residual,
            "representation": self.rep.to_dict() if self.rep is not None else None,
        }


def ep_objective(U, A, p) -> float:
    q = np.einsum("ij,jk,ik->i", U, np.asarray(A, dtype=float), U)
    q = np.maximum(q, 0.0)
    if math.isinf(p):
        return float(np.max(q, initial=0.0))
    return float(np.sum(q**p) ** (1.0 / p))


class _Problem:
    """Smooth pieces of the E_p problem in the eigenbasis of A (diagonal a)."""

    def __init__(self, G: Graph, a: np.ndarray, p: float):
        self.n, self.d = G.n, len(a)
        self.a = a
        self.p = p
        self.E = np.array(G.edges, dtype=int).reshape(-1, 2)

    def q(self, U):
        return (U**2) @ self.a

    def f(self, U, tau):
        q = self.q(U)
        if math.isinf(self.p):
            w = np.exp(q / tau - logsumexp(q / tau))
            return tau * logsumexp(q / tau), w
        if self.p == 1:
            return float(q.sum()), np.ones_like(q)
        qq = np.maximum(q, 1e-300)
        val = np.sum(qq**self.p) ** (1 / self.p)
        return float(val), (qq / max(val, 1e-300)) ** (self.p - 1)

    def cons(self, U):
        D = U[self.E[:, 0]] - U[self.E[:, 1]]
        return np.sum(D**2, axis=1) - 1.0, D

    def lagrangian(self, x, lam, rho, tau):
        U = x.reshape(self.n, self.d)
        fv, w = self.f(U, tau)
        g = 2 * w[:, None] * U * self.a[None, :]
        c, D = self.cons(U)
        mult = lam + rho * c
        val = fv + lam @ c + 0.5 * rho * (c @ c)
        contrib = 2 * mult[:, None] * D
        np.add.at(g, self.E[:, 0], contrib)
        np.add.at(g, self.E[:, 1], -contrib)
        return val, g.ravel()


def _augmented_lagrangian(prob: _Problem, U0, outer: int = 40):
    x = U0.ravel().copy()
    m = len(prob.E)
    lam = np.zeros(m)
    rho = 10.0
    amean = max(float(np.mean(prob.a)), 1e-3)
    tau = 0.1 * amean
    tau_min = 1e-7 * amean
    prev = np.inf
    for _ in range(outer):
        res = minimize(
            prob.lagrangian, x, args=(lam, rho, tau), jac=True, method="L-BFGS-B",
            options={"maxiter": 3000, "gtol": 1e-11, "ftol": 1e-15},
        )
        x = res.x
        c, _ = prob.cons(x.reshape(prob.n, prob.d))
        viol = float(np.max(np.abs(c), initial=0.0))
        lam = lam + rho * c
        if viol > 0.25 * prev:
            rho = min(rho * 10, 1e8)
        prev = viol
        if math.isinf(prob.p):
            tau = max(tau * 0.3, tau_min)
        if viol <= 1e-10 and (not math.isinf(prob.p) or tau <= tau_min):
            break
    return x.reshape(prob.n, prob.d)


def _project(U, E):
    targets = [(int(i), int(j), 1.0, 0.0) for i, j in E]
    P, _, err = polish(U, targets, None, iters=50)
    return P, err


def _minimax_refine(prob: _Problem, U):
    """Epigraph form min s s.t. q_i <= s and unit edges, by SLSQP."""
    n, d, a, E = prob.n, prob.d, prob.a, prob.E
    x0 = np.concatenate([U.ravel(), [float(np.max(prob.q(U)))]])

    def ineq(x):
        V = x[:-1].reshape(n, d)
        return x[-1] - prob.q(V)

    def ineq_jac(x):
        V = x[:-1].reshape(n, d)
        J = np.zeros((n, n * d + 1))
        for i in range(n):
            J[i, i * d : (i + 1) * d] = -2 * a * V[i]
        J[:, -1] = 1.0
        return J

    def eq(x):
        return prob.cons(x[:-1].reshape(n, d))[0]

    def eq_jac(x):
        V = x[:-1].reshape(n, d)
        D = V[E[:, 0]] - V[E[:, 1]]
        J = np.zeros((len(E), n * d + 1))
        for r, (i, j) in enumerate(E):
            J[r, i * d : (i + 1) * d] = 2 * D[r]
            J[r, j * d : (j + 1) * d] = -2 * D[r]
        return J

    res = minimize(
        lambda x: x[-1], x0, jac=lambda x: np.eye(1, n * d + 1, n * d).ravel(), method="SLSQP",
        constraints=[{"type": "ineq", "fun": ineq, "jac": ineq_jac}, {"type": "eq", "fun": eq, "jac": eq_jac}],
        options={"maxiter": 500, "ftol": 1e-15},
    )
    return res.x[:-1].reshape(n, d)


def _separating_direction(P):
    """max s s.t. <h, p_i> >= s for all i, h in [-1, 1]^k. A positive optimum
    certifies that 0 is outside conv(p)."""
    n, k = P.shape
    if k == 0:
        return None, 0.0
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-P, np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), bounds=[(-1, 1)] * k + [(None, 1)], method="highs")
    if res.status != 0:
        return None, 0.0
    return res.x[:k], float(res.x[-1])


def conv_hull_certificate(P) -> float:
    """min over h in [-1, 1]^k of max_i <h, p_i>: nonnegative iff 0 lies in
    conv(p)."""
    h, s = _separating_direction(np.asarray(P, dtype=float))
    return -s


def _conv_weights(P):
    n = P.shape[0]
    M = np.vstack([P.T, 1e3 * np.ones((1, n))])
    rhs = np.concatenate([np.zeros(P.shape[1]), [1e3]])
    lam, _ = nnls(M, rhs)
    return lam / max(lam.sum(), 1e-300)


def _recenter(U, a, p, max_rounds: int = 50):
    """Translate U until 0 lies in the convex hull of its points.

    While some h in the range of A has <h, u_i> >= s > 0 for all i, moving
    every point by -eps x with A x = h lowers each u_i^T A u_i by
    2 eps <h, u_i> - eps^2 h^T A^+ h; eps comes from a line search. Null
    directions of A are free and are used at the end to put 0 in the hull.
    """
    rng_mask = a > 1e-12
    U = U.copy()
    for _ in range(max_rounds):
        h_r, s = _separating_direction(U[:, rng_mask])
        if h_r is None or s <= 1e-12:
            break
        h = np.zeros(len(a))
        h[rng_mask] = h_r
        x = np.zeros(len(a))
        x[rng_mask] = h_r / a[rng_mask]
        beta = U @ h
        gamma = float(h @ x)
        q0 = (U**2) @ a
        if math.isinf(p):
            obj = lambda e: np.max(q0 - 2 * e * beta + e * e * gamma)  # noqa: E731
        else:
            obj = lambda e: np.sum(np.maximum(q0 - 2 * e * beta + e * e * gamma, 0) ** p)  # noqa: E731
        if p == 1:
            eps = float(beta.sum() / (len(beta) * gamma))
        else:
            hi = float(2 * np.max(beta) / gamma)
            eps = float(minimize_scalar(obj, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-15}).x)
        if obj(eps) >= obj(0.0):
            break
        U = U - eps * x[None, :]
    null = ~rng_mask
    if np.any(null):
        lam = _conv_weights(U[:, rng_mask]) if np.any(rng_mask) else np.full(len(U), 1.0 / len(U))
        U[:, null] -= lam @ U[:, null]
    return U


def ep_local(G: Graph, A, p: float = math.inf, restarts: int = 20, tol: float = 1e-8, seed: int = 0) -> EpResult:
    """Best local optimum of the E_p problem over random restarts.

    Each restart runs an augmented Lagrangian on the edge constraints
    (log-sum-exp smoothing with a falling temperature when p = inf, then
    an SLSQP pass on the epigraph form), followed by a Newton projection
    onto the unit-distance set. Candidates are normalised as in the
    attainment argument: null components anchored at node 0, rejection of
    points outside the box a_k u_ik^2 <= M + 1 of the incumbent value M,
    and a final recentering that puts 0 in the convex hull.
    """
    shape = _as_shape(A)
    if G.n == 0 or not is_connected(G):
        raise DisconnectedGraphError("E_p needs a connected graph")
    p = float(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    dec = sym_eig(shape.A)
    a = np.where(np.abs(dec.eigenvalues) < 1e-12, 0.0, np.maximum(dec.eigenvalues, 0.0))
    V = dec.eigenvectors
    d = shape.d
    prob = _Problem(G, a, p)
    rng = np.random.default_rng(seed)
    best_U, best_val, best_err = None, math.inf, math.inf
    history = []
    used = 0
    for r in range(max(1, restarts)):
        used = r + 1
        U0 = rng.standard_normal((G.n, d)) / np.sqrt(2 * max(d, 1))
        if G.m == 0:
            U, err = np.zeros((G.n, d)), 0.0
        else:
            U = _augmented_lagrangian(prob, U0)
            U, err = _project(U, prob.E)
            if err <= 1e-7 and math.isinf(p):
                U2, err2 = _project(_minimax_refine(prob, U), prob.E)
                if err2 <= 1e-12 and ep_objective(U2, np.diag(a), p) < ep_objective(U, np.diag(a), p):
                    U, err = U2, err2
        if err > 1e-7:
            history.append((r, math.inf))
            continue
        null = a == 0
        if np.any(null):
            U[:, null] -= U[0, null]
        val = ep_objective(U, np.diag(a), p)
        history.append((r, val))
        if math.isfinite(best_val):
            box = float(np.max(a[None, :] * U**2, initial=0.0))
            if box > best_val + 1:
                continue
        if val < best_val - 1e-12:
            best_U, best_val, best_err = U, val, err
    if best_U is None:
        return EpResult(math.inf, None, used, False, "infeasible_dimension_suspected", p, history=history)
    U = _recenter(best_U, a, p)
    U, err = _project(U, prob.E) if G.m else (U, 0.0)
    val = ep_objective(U, np.diag(a), p)
    cert = conv_hull_certificate(U)
    rep = Representation("unit_distance", U @ V.T, {"p": "inf" if math.isinf(p) else p, "value": val})
    return EpResult(
        value=val,
        rep=rep,
        restarts_used=used,
        converged_conv_hull=bool(cert >= -1e-6),
        status="ok",
        p=p,
        feasibility_residual=float(err),
        conv_certificate=cert,
        history=history,
    )


def reduce_dim(U, A, tol: float = 1e-9):
    """Move a representation into the span of its points and swap A for the
    diagonal B_k of its k smallest eigenvalues.

    In an orthonormal basis of span(u), A compresses to C; coordinates are
    taken in the eigenbasis of C, and eigenvalue interlacing gives
    u_i^T A u_i >= v_i^T B_k v_i node by node.
    """
    U = np.asarray(U.points if isinstance(U, Representation) else U, dtype=float)
    A = _as_shape(A).A
    if U.size == 0:
        return np.zeros((U.shape[0], 0)), np.zeros((0, 0))
    _, s, Vt = np.linalg.svd(U, full_matrices=False)
    k = int(np.sum(s > tol * max(1.0, float(s[0]))))
    Q = Vt[:k].T
    C = sym(Q.T @ A @ Q)
    dec = sym_eig(C)
    v = U @ Q @ dec.eigenvectors
    lam = sym_eig(A).eigenvalues[:k]
    return v, np.diag(lam)


# ---------------------------------------------- E_1 through orthogonal search


@dataclass
class OrthogonalSearchResult:
    value: float
    Q: np.ndarray
    iterations: int
    history: list = field(default_factory=list)


def e1_orthogonal_search(G: Graph, A, restarts: int = 3, seed: int = 0, max_iter: int = 200, tol: float = 1e-8) -> OrthogonalSearchResult:
    """Upper bound on E_1(G; A) = inf over orthogonal Q of t_{Q^T A Q}(G).

    Riemannian descent on O(n): with X* optimal for W = Q^T A Q, the
    derivative along Q exp(sK) is <X*, WK - KW>, so the gradient is the
    skew matrix W X* - X* W. Steps use the matrix exponential and
    backtracking.
    """
    shape = _as_shape(A)
    n = G.n
    if shape.d != n:
        raise ValueError("A must have order |V|")
    rng = np.random.default_rng(seed)

    def evaluate(Q):
        W = sym(Q.T @ shape.A @ Q)
        r = tW(G, W, tol=tol)
        return r.value, r.X, W

    best = None
    hist = []
    total = 0
    for r in range(max(1, restarts)):
        Q = np.eye(n) if r == 0 else random_orthogonal(n, rng)
        F, X, W = evaluate(Q)
        step = 1.0
        for it in range(max_iter):
            total += 1
            Gr = W @ X - X @ W
            gn = float(np.linalg.norm(Gr))
            if gn < 1e-9:
                break
            improved = False
            while step > 1e-10:
                Qn = Q @ expm(-step * Gr)
                Fn, Xn, Wn = evaluate(Qn)
                if Fn <= F - 1e-4 * step * gn * gn:
                    Q, F, X, W = Qn, Fn, Xn, Wn
                    improved = True
                    step *= 2.0
                    break
                step *= 0.5
            if not improved:
                break
        hist.append(F)
        if best is None or F < best[0] - 1e-12:
            best = (F, Q)
    return OrthogonalSearchResult(best[0], best[1], total, hist)


def tw_residual(G: Graph, X) -> float:
    """max |L*(X) - 1| over the edges."""
    return float(np.max(np.abs(laplacian_adjoint(G, X) - 1), initial=0.0))
