"""A small dense SDP solver.

Problems are written as

    min/max  <C, X> + c^T x + offset
    s.t.     <A_k, X> + f_k^T x  (==, >=, <=)  b_k
             X_ij >= 0 or <= 0 for selected entries
             <v, X e> (==, >=, <=) r  for selected row vectors v
             X psd, x >= 0

and solved by a primal-dual interior-point method (HKM direction with a
Mehrotra predictor-corrector). Inequalities become equalities with a
nonnegative slack, so the solver itself only sees

    min <C, X> + c^T x   s.t.  A(X) + B x = b,  X psd,  x >= 0.

Everything is deterministic: fixed starting point, no random pivoting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg as sla

from .linalg import lambda_min, sym

log = logging.getLogger(__name__)

SENSES = ("==", ">=", "<=")


@dataclass
class Constraint:
    A: np.ndarray
    rhs: float
    sense: str = "=="
    scalar_coef: np.ndarray | None = None
    name: str = ""


@dataclass
class SdpProblem:
    n: int
    C: np.ndarray
    sense: str = "min"
    constraints: list = field(default_factory=list)
    entry_signs: dict = field(default_factory=dict)
    row_constraints: list = field(default_factory=list)
    scalar_cost: np.ndarray | None = None
    offset: float = 0.0

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float)
        if self.C.shape != (self.n, self.n):
            raise ValueError("objective must be n x n")
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if self.scalar_cost is not None:
            self.scalar_cost = np.atleast_1d(np.asarray(self.scalar_cost, dtype=float))

    @property
    def num_scalars(self) -> int:
        return 0 if self.scalar_cost is None else len(self.scalar_cost)

    def add(self, A, rhs, sense="==", scalar_coef=None, name="") -> int:
        A = np.asarray(A, dtype=float)
        if A.shape != (self.n, self.n):
            raise ValueError("constraint matrix must be n x n")
        if np.max(np.abs(A - A.T), initial=0.0) > 1e-12:
            raise ValueError("constraint matrix must be symmetric")
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        if scalar_coef is not None:
            scalar_coef = np.atleast_1d(np.asarray(scalar_coef, dtype=float))
            if len(scalar_coef) != self.num_scalars:
                raise ValueError("scalar coefficients do not match the scalar variables")
        self.constraints.append(Constraint(A, float(rhs), sense, scalar_coef, name))
        return len(self.constraints) - 1

    def objective(self, X, x=None) -> float:
        val = float(np.sum(self.C * X)) + self.offset
        if self.num_scalars:
            val += float(self.scalar_cost @ np.asarray(x, dtype=float))
        return val

    def with_constraint(self, A, rhs, sense) -> "SdpProblem":
        """Copy with one extra constraint (scalar coefficients zero)."""
        Q = replace(self, constraints=list(self.constraints))
        coef = np.zeros(self.num_scalars) if self.num_scalars else None
        Q.add(A, rhs, sense, coef)
        return Q


@dataclass
class SdpSolution:
    X: np.ndarray
    scalars: np.ndarray
    y: np.ndarray  # multipliers of all compiled rows: constraints, entries, rows
    Z: np.ndarray
    z: np.ndarray  # dual slack of the nonnegative variables (scalars, then slacks)
    primal_value: float
    dual_value: float
    gap: float
    status: str
    iterations: int
    pinf: float = 0.0
    dinf: float = 0.0
    n_constraints: int = 0
    n_entries: int = 0

    @property
    def duals(self) -> np.ndarray:
        return self.y[: self.n_constraints]

    @property
    def entry_duals(self) -> np.ndarray:
        return self.y[self.n_constraints : self.n_constraints + self.n_entries]

    @property
    def row_duals(self) -> np.ndarray:
        return self.y[self.n_constraints + self.n_entries :]

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# ------------------------------------------------------------------ compiling


@dataclass
class _Compiled:
    n: int
    Af: np.ndarray  # (m, n*n), rows scaled
    B: np.ndarray  # (m, p)
    b: np.ndarray
    C: np.ndarray  # minimisation objective
    c: np.ndarray
    scale: np.ndarray  # internal row = user row * scale
    sign: float  # +1 for min, -1 for max
    n_scalars: int
    n_constraints: int
    n_entries: int


def _entry_matrix(n, i, j):
    E = np.zeros((n, n))
    E[i, j] += 0.5
    E[j, i] += 0.5
    return E


def _compile(P: SdpProblem, scale_rows: bool = True) -> _Compiled:
    n, q = P.n, P.num_scalars
    rows, coefs, rhs, senses = [], [], [], []
    for con in P.constraints:
        rows.append(con.A)
        coefs.append(con.scalar_coef if con.scalar_coef is not None else np.zeros(q))
        rhs.append(con.rhs)
        senses.append(con.sense)
    for (i, j), s in sorted(P.entry_signs.items()):
        if s not in (">=0", "<=0"):
            raise ValueError(f"entry sign must be '>=0' or '<=0', got {s!r}")
        rows.append(_entry_matrix(n, i, j))
        coefs.append(np.zeros(q))
        rhs.append(0.0)
        senses.append(s[:2])
    ones = np.ones(n)
    for v, s, r in P.row_constraints:
        v = np.asarray(v, dtype=float)
        rows.append(0.5 * (np.outer(v, ones) + np.outer(ones, v)))
        coefs.append(np.zeros(q))
        rhs.append(float(r))
        senses.append(s)
    m = len(rows)
    n_slack = sum(s != "==" for s in senses)
    Af = np.array([R.ravel() for R in rows]).reshape(m, n * n)
    B = np.zeros((m, q + n_slack))
    k = q
    for r, (cf, s) in enumerate(zip(coefs, senses)):
        B[r, :q] = cf
        if s != "==":
            B[r, k] = -1.0 if s == ">=" else 1.0
            k += 1
    b = np.array(rhs, dtype=float)
    scale = np.ones(m)
    if scale_rows and m:
        norms = np.sqrt(np.sum(Af**2, axis=1) + np.sum(B**2, axis=1))
        norms[norms == 0] = 1.0
        scale = 1.0 / norms
        Af = Af * scale[:, None]
        B = B * scale[:, None]
        b = b * scale
    sign = 1.0 if P.sense == "min" else -1.0
    c = np.zeros(q + n_slack)
    if q:
        c[:q] = sign * P.scalar_cost
    return _Compiled(
        n, Af, B, b, sign * P.C, c, scale, sign, q, len(P.constraints), len(P.entry_signs)
    )


# --------------------------------------------------------------- the IPM core


@dataclass
class _Iterate:
    X: np.ndarray
    x: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    z: np.ndarray
    pobj: float = np.nan
    dobj: float = np.nan
    pinf: float = np.inf
    dinf: float = np.inf
    gap: float = np.inf
    status: str = "max_iter"
    iterations: int = 0

    @property
    def err(self):
        return max(self.pinf, self.dinf, self.gap)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX psd (X positive definite)."""
    L = np.linalg.cholesky(X)
    T = sla.solve_triangular(L, dX, lower=True)
    T = sla.solve_triangular(L, T.T, lower=True)
    lam = np.linalg.eigvalsh(sym(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _ipm(cp: _Compiled, tol: float, max_iter: int) -> _Iterate:
    n, Af, B, b, C, c = cp.n, cp.Af, cp.B, cp.b, cp.C, cp.c
    m, p = Af.shape[0], B.shape[1]
    A3 = Af.reshape(m, n, n)
    N = n + p
    normb, normC = np.linalg.norm(b), np.linalg.norm(C) + np.linalg.norm(c)

    # scaled multiple of the identity; see SDPT3 for the recipe
    rownorm = np.sqrt(np.sum(Af**2, axis=1)) if m else np.zeros(0)
    xi = max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + rownorm), initial=0.0))
    eta = max(10.0, np.sqrt(n), np.linalg.norm(C), np.max(rownorm, initial=0.0))
    X, Z = xi * np.eye(n), eta * np.eye(n)
    x = np.full(p, xi)
    z = np.full(p, max(10.0, np.sqrt(max(p, 1)), np.linalg.norm(c)))
    y = np.zeros(m)

    best = None
    stalls = 0
    it = 0
    status = "max_iter"
    for it in range(max_iter + 1):
        rp = b - Af @ X.ravel() - B @ x
        ATy = (y @ Af).reshape(n, n)
        Rd = C - ATy - Z
        rd = c - B.T @ y - z
        pobj = float(np.sum(C * X) + c @ x)
        dobj = float(b @ y)
        cur = _Iterate(
            X, x, y, Z, z, pobj, dobj,
            pinf=np.linalg.norm(rp) / (1 + normb),
            dinf=np.sqrt(np.sum(Rd**2) + np.sum(rd**2)) / (1 + normC),
            gap=abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj)),
            iterations=it,
        )
        if best is None or cur.err < best.err:
            best = cur
        if cur.err <= tol:
            status = "optimal"
            best = cur
            break
        if pobj < -1.0 / tol and cur.pinf <= np.sqrt(tol):
            status = "unbounded"
            best = cur
            break
        if dobj > 1.0 / tol and cur.dinf <= np.sqrt(tol):
            status = "infeasible"
            best = cur
            break
        if it == max_iter:
            break

        try:
            mu = (np.sum(X * Z) + x @ z) / N
            Lz = sla.cho_factor(Z, lower=True)
            Zinv = sym(sla.cho_solve(Lz, np.eye(n)))
            T = X @ A3 @ Zinv
            M = Af @ T.reshape(m, n * n).T
            if p:
                M = M + (B * (x / z)) @ B.T
            M = 0.5 * (M + M.T)
            try:
                Mf = sla.cho_factor(M, lower=True)
                solveM = lambda r: sla.cho_solve(Mf, r)  # noqa: E731
            except np.linalg.LinAlgError:
                solveM = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731

            XRdZ = X @ Rd @ Zinv
            xz = x / z

            def direction(sig, corr_X, corr_x):
                H = sym(sig * mu * Zinv - X - XRdZ - corr_X)
                hx = sig * mu / z - x - xz * rd - corr_x
                dy = solveM(rp - Af @ H.ravel() - B @ hx)
                ATdy = (dy @ Af).reshape(n, n)
                dX = H + sym(X @ ATdy @ Zinv)
                dx = hx + xz * (B.T @ dy)
                return dX, dx, dy, Rd - ATdy, rd - B.T @ dy

            def steps(dX, dx, dZ, dz):
                ap = min(_max_step(X, dX), _max_step_lp(x, dx))
                ad = min(_max_step(Z, dZ), _max_step_lp(z, dz))
                return ap, ad

            dXa, dxa, dya, dZa, dza = direction(0.0, 0.0, 0.0)
            ap, ad = steps(dXa, dxa, dZa, dza)
            ap, ad = min(1.0, ap), min(1.0, ad)
            mu_aff = (np.sum((X + ap * dXa) * (Z + ad * dZa)) + (x + ap * dxa) @ (z + ad * dza)) / N
            sig = min(1.0, max(0.0, mu_aff / mu) ** 3)
            dX, dx, dy, dZ, dz = direction(sig, dXa @ dZa @ Zinv, dxa * dza / z)
            ap, ad = steps(dX, dx, dZ, dz)
            tau = 0.98
            ap, ad = min(1.0, tau * ap), min(1.0, tau * ad)
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
            log.debug("IPM stopped at iteration %d: %s", it, exc)
            break
        if not (np.isfinite(ap) and np.isfinite(ad)):
            break
        X = sym(X + ap * dX)
        x = x + ap * dx
        y = y + ad * dy
        Z = sym(Z + ad * dZ)
        z = z + ad * dz
        stalls = stalls + 1 if max(ap, ad) < 1e-8 else 0
        if stalls >= 3 or not np.all(np.isfinite(X)) or np.max(np.abs(X)) > 1e14:
            break
    best.status = status
    best.iterations = it
    return best


# ------------------------------------------------------------------ interface


def _package(P: SdpProblem, cp: _Compiled, it: _Iterate) -> SdpSolution:
    q = cp.n_scalars
    y_user = cp.sign * it.y * cp.scale
    pv = cp.sign * it.pobj + P.offset
    dv = cp.sign * it.dobj + P.offset
    return SdpSolution(
        X=it.X.copy(),
        scalars=it.x[:q].copy(),
        y=y_user,
        Z=it.Z.copy(),
        z=it.z.copy(),
        primal_value=float(pv),
        dual_value=float(dv),
        gap=float(abs(pv - dv)),
        status=it.status,
        iterations=int(it.iterations),
        pinf=float(it.pinf),
        dinf=float(it.dinf),
        n_constraints=cp.n_constraints,
        n_entries=cp.n_entries,
    )


def solve(P: SdpProblem, tol: float = 1e-8, max_iter: int = 200, probe: bool = True) -> SdpSolution:
    """Solve ``P``; status is one of optimal, unbounded, infeasible, max_iter.

    When the interior-point run fails to converge, the problem is re-solved
    twice with a trace bound. If the bounded optimum keeps improving as the
    bound grows while the bound stays active, the problem is reported
    unbounded; if the bounded problems are infeasible, it is reported
    infeasible. This catches weakly infeasible duals whose primal value
    diverges too slowly for the objective test.
    """
    if not 1e-12 <= tol <= 1e-2:
        raise ValueError(f"tolerance {tol} out of range")
    if not P.constraints and not P.entry_signs and not P.row_constraints:
        raise ValueError("problem has no constraints")
    cp = _compile(P)
    it = _ipm(cp, tol, max_iter)
    sol = _package(P, cp, it)
    if sol.status == "max_iter" and probe:
        sol.status = _probe(P, tol, max_iter, sol)
    return sol


def _probe(P: SdpProblem, tol: float, max_iter: int, sol: SdpSolution) -> str:
    base = max(1.0, float(P.n))
    values = []
    for R in (1e2 * base, 1e4 * base):
        Q = P.with_constraint(np.eye(P.n), R, "<=")
        s = solve(Q, tol=max(tol, 1e-9), max_iter=max_iter, probe=False)
        if s.status == "infeasible":
            return "infeasible"
        if s.status != "optimal":
            return sol.status
        values.append((R, s.primal_value, float(np.trace(s.X))))
    (_, v1, _), (R2, v2, tr2) = values
    improving = (v1 - v2) if P.sense == "min" else (v2 - v1)
    if tr2 >= 0.9 * R2 and improving > 1e-6 * (1 + abs(v1)):
        return "unbounded"
    return sol.status


@dataclass
class KktReport:
    constraint_residuals: np.ndarray
    entry_residuals: np.ndarray
    row_residuals: np.ndarray
    max_primal_residual: float
    dual_residual: float
    complementarity: float
    lambda_min_X: float
    lambda_min_Z: float
    min_scalar: float
    gap: float
    status: str
    ok: bool


def _violation(val, sense):
    if sense == "==":
        return abs(val)
    if sense == ">=":
        return max(0.0, -val)
    return max(0.0, val)


def verify_kkt(P: SdpProblem, S: SdpSolution, tol: float = 1e-6) -> KktReport:
    """Primal and dual residuals of ``S`` measured against ``P`` itself."""
    X = S.X
    x = S.scalars
    cons = []
    for con in P.constraints:
        r = float(np.sum(con.A * X)) - con.rhs
        if con.scalar_coef is not None and len(x):
            r += float(con.scalar_coef @ x)
        cons.append(_violation(r, con.sense))
    entries = [_violation(X[i, j], s[:2]) for (i, j), s in sorted(P.entry_signs.items())]
    rows = [
        _violation(float(np.asarray(v) @ X.sum(axis=1)) - r, s) for v, s, r in P.row_constraints
    ]
    scalar_neg = max(0.0, -float(np.min(x))) if len(x) else 0.0
    cp = _compile(P, scale_rows=False)
    y_int = cp.sign * S.y
    Rd = cp.C - (y_int @ cp.Af).reshape(P.n, P.n) - S.Z
    rd = cp.c - cp.B.T @ y_int - S.z if cp.B.shape[1] else np.zeros(0)
    # the slack part of x is recovered from the rows themselves
    slack = cp.B.shape[1] - cp.n_scalars
    full_x = np.concatenate([x, np.zeros(slack)]) if slack else x
    if slack:
        res = cp.b - cp.Af @ X.ravel() - cp.B[:, : cp.n_scalars] @ x
        for r in range(cp.Af.shape[0]):
            if np.any(cp.B[r, cp.n_scalars:] != 0):
                col = np.flatnonzero(cp.B[r, cp.n_scalars:])[0] + cp.n_scalars
                full_x[col] = res[r] / cp.B[r, col]
    comp = float(np.sum(X * S.Z) + (full_x @ S.z if len(S.z) else 0.0))
    dual_res = float(np.sqrt(np.sum(Rd**2) + np.sum(rd**2)))
    all_res = cons + entries + rows + [scalar_neg]
    max_p = max(all_res) if all_res else 0.0
    lx, lz = lambda_min(X), lambda_min(S.Z)
    scale = 1 + abs(S.primal_value)
    ok = (
        S.status == "optimal"
        and max_p <= tol
        and dual_res <= tol * scale
        and lx >= -tol
        and lz >= -tol
        and abs(comp) <= tol * scale
    )
    return KktReport(
        constraint_residuals=np.array(cons),
        entry_residuals=np.array(entries),
        row_residuals=np.array(rows),
        max_primal_residual=float(max_p),
        dual_residual=dual_res,
        complementarity=comp,
        lambda_min_X=lx,
        lambda_min_Z=lz,
        min_scalar=float(np.min(x)) if len(x) else 0.0,
        gap=S.gap,
        status=S.status,
        ok=bool(ok),
    )
