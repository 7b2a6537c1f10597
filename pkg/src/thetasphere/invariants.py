"""Theta-family and hypersphere-family invariants and the identity checks
that tie them together."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyNeighborhoodError, SolverError
from .graph import (
    BRUTE_FORCE_CAP,
    Graph,
    blocks,
    blow_up,
    clique_sum,
    complement,
    contract,
    direct_sum,
    exact_combinatorics,
    is_connected,
    neighborhood,
)
from .linalg import sym_eig
from .programs import (
    T_VARIANTS,
    THETA_VARIANTS,
    ThetaResult,
    TResult,
    check_weights,
    t_invariant,
    theta,
    theta_bar,
)
from .representations import contract_dual, optimal_dual

__all__ = [
    "THETA_VARIANTS",
    "T_VARIANTS",
    "ThetaResult",
    "TResult",
    "theta",
    "theta_bar",
    "t_invariant",
    "check_t_theta",
    "check_tb_eq_t",
    "gijswijt_check",
    "gijswijt_at_optimum",
    "sandwich_check",
    "direct_sum_check",
    "blocks_check",
    "clique_sum_check",
    "contraction_check",
    "nbhood_check",
    "weighted_identity_check",
    "vector_chromatic",
    "hoffman_check",
    "dim_bounds",
    "InvariantReport",
    "compute_report",
]


def check_t_theta(G: Graph, tol: float = 1e-8) -> float:
    """2 t(G) + 1/theta(complement) - 1."""
    return 2 * t_invariant(G, tol=tol).value + 1 / theta_bar(G, tol=tol).value - 1


def check_tb_eq_t(G: Graph, tol: float = 1e-8) -> tuple[float, float]:
    """(t_b(G) - t(G), theta_b(Gbar) - theta(Gbar))."""
    r1 = t_invariant(G, "ball", tol=tol).value - t_invariant(G, tol=tol).value
    r2 = theta_bar(G, "ball", tol=tol).value - theta_bar(G, tol=tol).value
    return r1, r2


@dataclass
class GijswijtResult:
    mu: float
    residual: float
    ok: bool


def gijswijt_check(X, tol: float = 1e-8, threshold: float | None = None) -> GijswijtResult:
    """Best mu with diag(X) ~ mu X e, and the size of the mismatch.

    Holds at every optimum of the theta program; a small residual is
    necessary for optimality but not sufficient (X = I/n passes on the
    edgeless graph too).
    """
    X = np.asarray(X, dtype=float)
    d = np.diag(X)
    v = X.sum(axis=1)
    vv = float(v @ v)
    mu = float(d @ v / vv) if vv > 0 else 0.0
    res = float(np.linalg.norm(d - mu * v))
    if threshold is None:
        threshold = max(10 * tol * np.linalg.norm(X), 1e-7)
    return GijswijtResult(mu, res, bool(mu > 0 and res <= threshold))


# Without strict complementarity the iterate sits about sqrt(gap) away from
# the optimal face, so the proportionality test gets its own tight solve.
GIJSWIJT_TOL = 1e-11


def gijswijt_at_optimum(H: Graph, tol: float = 1e-8) -> GijswijtResult:
    """Proportionality check at a theta optimum of H computed to GIJSWIJT_TOL."""
    try:
        X = theta(H, tol=min(tol, GIJSWIJT_TOL)).X
    except SolverError:
        X = theta(H, tol=tol).X
    return gijswijt_check(X, min(tol, GIJSWIJT_TOL), threshold=IDENTITIES["gijswijt"][0])


@dataclass
class SandwichResult:
    omega: int
    theta_bar: float
    chi: int
    ok: bool


def sandwich_check(G: Graph, tol: float = 1e-8, slack: float = 1e-5) -> SandwichResult:
    comb = exact_combinatorics(G)
    tb = theta_bar(G, tol=tol).value
    ok = comb.omega - slack <= tb <= comb.chi + slack
    return SandwichResult(comb.omega, tb, comb.chi, bool(ok))


def direct_sum_check(G: Graph, H: Graph, tol: float = 1e-8) -> float:
    """t(G + H) - max(t(G), t(H))."""
    t_sum = t_invariant(direct_sum(G, H), tol=tol).value
    return t_sum - max(t_invariant(G, tol=tol).value, t_invariant(H, tol=tol).value)


def blocks_check(G: Graph, tol: float = 1e-8) -> float:
    """t(G) - max over blocks B of t(B)."""
    bs = [B for B in blocks(G) if B.n]
    return t_invariant(G, tol=tol).value - max(t_invariant(B, tol=tol).value for B in bs)


def clique_sum_check(G1: Graph, S1, G2: Graph, S2, tol: float = 1e-8) -> float:
    """t(clique sum) - max(t(G1), t(G2))."""
    G, _ = clique_sum(G1, S1, G2, S2)
    return t_invariant(G, tol=tol).value - max(t_invariant(G1, tol=tol).value, t_invariant(G2, tol=tol).value)


@dataclass
class ContractionResult:
    slack: float
    z_e: float
    t_G: float
    t_contracted: float
    dual_psd_residual: float
    dual_objective: float
    dual_objective_error: float
    dual_ok: bool


def contraction_check(G: Graph, e, tol: float = 1e-8) -> ContractionResult:
    """z_e - (t(G) - t(G/e)) for an optimal dual (y, z) of t(G), plus the
    feasibility of the contracted dual for G/e."""
    res = t_invariant(G, tol=tol)
    d = optimal_dual(G, tol=tol, result=res)
    H, _ = contract(G, e)
    t_H = t_invariant(H, tol=tol).value if H.n else 0.0
    z_e = float(d.z[G.edge_index(*e)])
    H2, dh = contract_dual(G, e, d, tol=max(tol, 1e-7))
    psd = dh.psd_residual(H2)
    expected = float(np.sum(d.z)) - z_e
    err = abs(dh.objective - expected)
    return ContractionResult(
        slack=z_e - (res.value - t_H),
        z_e=z_e,
        t_G=res.value,
        t_contracted=t_H,
        dual_psd_residual=psd,
        dual_objective=dh.objective,
        dual_objective_error=err,
        dual_ok=bool(psd >= -1e-8 and abs(np.sum(dh.y) - 1) <= 1e-12),
    )


def nbhood_check(G: Graph, i: int, tol: float = 1e-8) -> tuple[float, float]:
    """(1 - 1/(4 t(G)) - t(G[N(i)]),  theta_bar(G) - theta_bar(G[N(i)]) - 1)."""
    if not G.neighbors(i):
        raise EmptyNeighborhoodError(f"node {i} is isolated")
    N = neighborhood(G, i)
    tG = t_invariant(G, tol=tol).value
    slack_t = 1 - 1 / (4 * tG) - t_invariant(N, tol=tol).value
    slack_th = theta_bar(G, tol=tol).value - theta_bar(N, tol=tol).value - 1
    return slack_t, slack_th


@dataclass
class WeightedCheck:
    t_weighted: float
    theta_weighted: float
    residual: float
    blowup_t: float | None = None
    blowup_residual: float | None = None


def weighted_identity_check(G: Graph, w, tol: float = 1e-8, blowup_cap: int = BRUTE_FORCE_CAP) -> WeightedCheck:
    """2 t(G,w) + 1/theta(Gbar,w) - 1, and t(G,w) - t(G^w) for integer w."""
    w = check_weights(G, w)
    tw = t_invariant(G, "weighted", w=w, tol=tol).value
    th = theta(complement(G), "weighted", w=w, tol=tol).value
    out = WeightedCheck(tw, th, 2 * tw + 1 / th - 1)
    if np.all(w >= 1) and np.all(w == np.round(w)) and w.sum() <= blowup_cap:
        Gw = blow_up(G, w.astype(int))
        tb = t_invariant(Gw, tol=tol).value
        out.blowup_t = tb
        out.blowup_residual = tw - tb
    return out


def vector_chromatic(G: Graph, kind: str = "strict", tol: float = 1e-8) -> float:
    """k = 1/(1 - 2t) with t = t' (vector), t (strict) or t+ (strong)."""
    variant = {"vector": "prime", "strict": "sphere", "strong": "plus"}.get(kind)
    if variant is None:
        raise ValueError(f"unknown colouring kind {kind!r}")
    if G.m == 0:
        return 1.0
    t = t_invariant(G, variant, tol=tol).value
    return 1.0 / (1.0 - 2.0 * t)


@dataclass
class HoffmanResult:
    theta_bar_prime: float
    bound: float
    slack: float


def hoffman_check(G: Graph, B=None, tol: float = 1e-8) -> HoffmanResult:
    """theta'(Gbar) - (1 - lambda_max(B)/lambda_min(B)) for a nonnegative
    weighting B of the adjacency pattern (default: the adjacency matrix)."""
    B = G.adjacency() if B is None else np.asarray(B, dtype=float)
    if B.shape != (G.n, G.n) or np.max(np.abs(B - B.T)) > 1e-12:
        raise ValueError("B must be symmetric of order n")
    off = np.ones((G.n, G.n), dtype=bool)
    for i, j in G.edges:
        off[i, j] = off[j, i] = False
    if np.any(B[off] != 0) or np.any(B < 0) or not np.any(B):
        raise ValueError("B must be nonnegative, nonzero and supported on the edges")
    lam = sym_eig(B).eigenvalues
    if lam[0] >= 0:
        raise ValueError("lambda_min(B) >= 0, impossible for such B")
    bound = float(1 - lam[-1] / lam[0])
    tp = theta_bar(G, "prime", tol=tol).value
    return HoffmanResult(tp, bound, tp - bound)


@dataclass
class DimBounds:
    lower: int
    upper: int
    t: float
    chi: int
    brooks: bool


def dim_bounds(G: Graph, tol: float = 1e-8) -> DimBounds:
    """Interval for the hypersphere dimension: ceil(2t/(1-2t)) below, chi - 1
    above, refined to Delta - 1 when Brooks' theorem applies."""
    comb = exact_combinatorics(G)
    t = t_invariant(G, tol=tol).value
    lower = math.ceil(2 * t / (1 - 2 * t) - 1e-6) if G.m else 0
    upper = comb.chi - 1
    odd_cycle = G.n >= 3 and G.n % 2 == 1 and G.m == G.n and np.all(G.degrees() == 2)
    brooks = is_connected(G) and not G.is_complete() and not odd_cycle
    if brooks:
        upper = min(upper, int(np.max(G.degrees())) - 1)
    return DimBounds(max(lower, 0), upper, t, comb.chi, bool(brooks))


# ---------------------------------------------------------------- reporting


# name -> (threshold, enforced)
IDENTITIES = {
    "t_theta": (1e-5, True),
    "tb_t": (1e-5, True),
    "thetab_theta": (1e-5, True),
    "tprime_thetaprime": (1e-5, True),
    "gijswijt": (1e-5, True),
    "chain_theta": (1e-6, True),
    "chain_t": (1e-6, True),
    "tplus_thetaplus": (1e-5, False),
    "weighted_t_theta": (1e-5, True),
    "weighted_blowup": (1e-5, True),
}


@dataclass
class InvariantReport:
    graph: str
    invariants: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    gap: float = 0.0
    iterations: int = 0

    def track(self, res):
        sol = getattr(res, "solution", None)
        if sol is not None:
            self.gap = max(self.gap, float(sol.gap))
            self.iterations += int(sol.iterations)
        return res

    def failures(self) -> list[str]:
        bad = []
        for name, value in self.residuals.items():
            thr, enforced = IDENTITIES[name]
            if enforced and not abs(value) <= thr:
                bad.append(name)
        return bad

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "invariants": dict(self.invariants),
            "residuals": dict(self.residuals),
            "solver": {"gap": self.gap, "iters": self.iterations},
        }


def compute_report(G: Graph, name: str = "", tol: float = 1e-8, which=None, w=None) -> InvariantReport:
    """Evaluate the invariants in ``which`` (default: all) and the identity
    residuals that connect them."""
    rep = InvariantReport(name)
    names = set(which) if which else {"t", "theta_bar", "t_b", "theta_bar_b", "t_prime", "theta_bar_prime", "t_plus", "theta_bar_plus"}
    Gb = complement(G)

    def t_of(variant, **kw):
        return rep.track(t_invariant(G, variant, tol=tol, **kw)).value

    def th_of(H, variant, **kw):
        return rep.track(theta(H, variant, tol=tol, **kw))

    vals = rep.invariants
    need = lambda *ks: any(k in names for k in ks)  # noqa: E731
    if need("t", "theta_bar", "t_b", "t_prime", "t_plus", "theta_bar_b", "theta_bar_prime", "theta_bar_plus"):
        vals["t"] = t_of("sphere")
        tb = th_of(Gb, "plain")
        vals["theta_bar"] = tb.value
        rep.residuals["t_theta"] = 2 * vals["t"] + 1 / tb.value - 1
        rep.residuals["gijswijt"] = gijswijt_at_optimum(Gb, tol).residual
    if need("t_b", "theta_bar_b"):
        vals["t_b"] = t_of("ball")
        vals["theta_bar_b"] = th_of(Gb, "ball").value
        rep.residuals["tb_t"] = vals["t_b"] - vals["t"]
        rep.residuals["thetab_theta"] = vals["theta_bar_b"] - vals["theta_bar"]
    if need("t_prime", "theta_bar_prime"):
        vals["t_prime"] = t_of("prime")
        vals["theta_bar_prime"] = th_of(Gb, "prime").value
        rep.residuals["tprime_thetaprime"] = 2 * vals["t_prime"] + 1 / vals["theta_bar_prime"] - 1
    if need("t_plus", "theta_bar_plus"):
        vals["t_plus"] = t_of("plus")
        vals["theta_bar_plus"] = th_of(Gb, "plus").value
        rep.residuals["tplus_thetaplus"] = 2 * vals["t_plus"] + 1 / vals["theta_bar_plus"] - 1
    if "t_prime" in vals and "t_plus" in vals:
        rep.residuals["chain_t"] = max(0.0, vals["t_prime"] - vals["t"], vals["t"] - vals["t_plus"])
        rep.residuals["chain_theta"] = max(
            0.0, vals["theta_bar_prime"] - vals["theta_bar"], vals["theta_bar"] - vals["theta_bar_plus"]
        )
        if G.m:
            vals["chi_vector"] = 1 / (1 - 2 * vals["t_prime"])
            vals["chi_strict"] = 1 / (1 - 2 * vals["t"])
            vals["chi_strong"] = 1 / (1 - 2 * vals["t_plus"])
    if w is not None or "t_weighted" in names:
        wv = check_weights(G, w)
        vals["t_weighted"] = t_of("weighted", w=wv)
        vals["theta_bar_weighted"] = th_of(Gb, "weighted", w=wv).value
        rep.residuals["weighted_t_theta"] = 2 * vals["t_weighted"] + 1 / vals["theta_bar_weighted"] - 1
        if np.all(wv >= 1) and np.all(wv == np.round(wv)) and wv.sum() <= BRUTE_FORCE_CAP:
            tb = rep.track(t_invariant(blow_up(G, wv.astype(int)), tol=tol)).value
            rep.residuals["weighted_blowup"] = vals["t_weighted"] - tb
    unknown = names - set(vals) - {"t_weighted"}
    if unknown:
        raise ValueError(f"unknown invariant(s): {sorted(unknown)}")
    return rep
