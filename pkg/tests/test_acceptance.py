"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are also repeated in the terminal summary.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np

from corpus import corpus, named_graphs, random_graphs, with_edges
from thetasphere.ellipsoid import (
    classify_tw,
    e1_Kn_closed,
    ep_local,
    ep_objective,
    hadamard_bound,
    tW,
    tW_Kn_closed,
)
from thetasphere.graph import (
    blow_up,
    complement,
    contract,
    exact_combinatorics,
    gadget_h,
    generate,
    is_bipartite,
    moser_spindle,
)
from thetasphere.invariants import (
    clique_sum_check,
    direct_sum_check,
    gijswijt_at_optimum,
    hoffman_check,
    weighted_identity_check,
)
from thetasphere.programs import t_invariant, theta, theta_bar, tw_problem
from thetasphere.representations import (
    blowup_rep,
    clique_sum_glue,
    contract_dual,
    hadamard_rep,
    hypersphere_rep,
    neighborhood_rep,
    obtuse_rep_from_tprime,
    optimal_dual,
    orth_rep_optimal,
    ortho_from_sphere,
    realizability_2d,
    verify_representation,
)
from thetasphere.sdp import solve


def _small(graphs, cap=10):
    return [(name, G) for name, G in graphs if G.n <= cap]


def test_criterion_01_complete_graph_closed_form(criterion):
    worst, slowest = 0.0, 0.0
    for n in range(2, 11):
        start = time.perf_counter()
        t = t_invariant(generate("complete", n)).value
        slowest = max(slowest, time.perf_counter() - start)
        worst = max(worst, abs(t - (n - 1) / (2 * n)))
    criterion(1, worst <= 1e-6 and slowest < 1.0, f"max |t(K_n) - (n-1)/2n| = {worst:.2e}, slowest solve {slowest:.3f}s")


def test_criterion_02_t_theta_identity(criterion):
    worst, where = 0.0, ""
    for name, G in corpus():
        r = abs(2 * t_invariant(G).value + 1 / theta_bar(G).value - 1)
        if r > worst:
            worst, where = r, name
    criterion(2, worst <= 1e-5, f"max |2t + 1/theta_bar - 1| = {worst:.2e} ({where}) over {len(corpus())} graphs")


def test_criterion_03_ball_variants_and_proportionality(criterion):
    worst_t = worst_th = worst_g = 0.0
    for _, G in corpus():
        H = complement(G)
        worst_t = max(worst_t, abs(t_invariant(G, "ball").value - t_invariant(G).value))
        worst_th = max(worst_th, abs(theta(H, "ball").value - theta(H).value))
        worst_g = max(worst_g, gijswijt_at_optimum(H).residual, gijswijt_at_optimum(G).residual)
    ok = max(worst_t, worst_th, worst_g) <= 1e-5
    criterion(3, ok, f"|t_b - t| <= {worst_t:.2e}, |theta_b - theta| <= {worst_th:.2e}, proportionality <= {worst_g:.2e}")


def test_criterion_04_orderings(criterion):
    bad = []
    graphs = _small(corpus())
    for name, G in graphs:
        tp, tt, tplus = (theta(G, v).value for v in ("prime", "plain", "plus"))
        comb = exact_combinatorics(G)
        tb = theta_bar(G).value
        if not (tp <= tt + 1e-6 and tt <= tplus + 1e-6):
            bad.append(f"{name}: theta' {tp}, theta {tt}, theta+ {tplus}")
        if not (comb.omega - 1e-6 <= tb <= comb.chi + 1e-6):
            bad.append(f"{name}: omega {comb.omega}, theta_bar {tb}, chi {comb.chi}")
    criterion(4, not bad, f"{len(graphs)} graphs checked" + (f"; violations: {bad[:3]}" if bad else ""))


def test_criterion_05_bipartite_characterization(criterion):
    bad = []
    graphs = with_edges(corpus())
    for name, G in graphs:
        t = t_invariant(G).value
        if is_bipartite(G) != (t <= 0.25 + 1e-7):
            bad.append(f"{name}: t = {t}")
    criterion(5, not bad, f"{len(graphs)} graphs with edges" + (f"; mismatches: {bad[:3]}" if bad else ""))


def test_criterion_06_structural_rules(criterion):
    K2, K3, K4 = (generate("complete", n) for n in (2, 3, 4))
    C5, P = generate("cycle", 5), generate("petersen")
    pairs = [(K3, K2), (C5, K4), (P, C5), (K2, K2)] + [(G, H) for (_, G), (_, H) in zip(random_graphs()[:6], random_graphs()[6:12])]
    ds = max(abs(direct_sum_check(G, H)) for G, H in pairs)
    sums = [
        (K3, [0, 1], K3, [1, 2]),
        (K4, [0, 1, 2], K4, [0, 1, 3]),
        (C5, [0], K4, [3]),
        (C5, [0, 1], K3, [0, 2]),
        (P, [0, 1], K4, [2, 3]),
        (generate("moser_spindle"), [0], C5, [0]),
    ]
    cs = max(abs(clique_sum_check(*s)) for s in sums)
    glue_res = 0.0
    for G1, S1, G2, S2 in [(K3, [0, 1], K3, [1, 2]), (K4, [0, 1, 2], K4, [1, 2, 3]), (C5, [2], C5, [4]), (P, [0, 1], P, [5, 7])]:
        G, rep = clique_sum_glue(hypersphere_rep(G1), G1, S1, hypersphere_rep(G2), G2, S2)
        r = verify_representation(G, rep, 1e-8)
        glue_res = max(glue_res, r.edge_residual, r.norm_residual)
    ok = ds <= 1e-5 and cs <= 1e-5 and glue_res <= 1e-8
    criterion(6, ok, f"direct sum {ds:.2e}, clique sum {cs:.2e}, glued representation residual {glue_res:.2e}")


def test_criterion_07_contraction_and_neighborhood(criterion):
    worst_psd, worst_obj = 0.0, 0.0
    for name, G in with_edges(named_graphs()) + with_edges(random_graphs()[:15]):
        d = optimal_dual(G)
        for e in G.edges[:3]:
            H, dh = contract_dual(G, e, d)
            worst_psd = min(worst_psd, dh.psd_residual(H))
            expected = float(np.sum(d.z)) - float(d.z[G.edge_index(*e)])
            worst_obj = max(worst_obj, abs(dh.objective - expected))
    K4 = generate("complete", 4)
    d4 = optimal_dual(K4)
    H, _ = contract(K4, (0, 1))
    slack = float(d4.z[K4.edge_index(0, 1)]) - (t_invariant(K4).value - t_invariant(H).value)
    nb = 0.0
    for n in range(3, 11):
        Kn = generate("complete", n)
        rep = neighborhood_rep(Kn, 0, hypersphere_rep(Kn))
        target = (n - 2) / (2 * (n - 1))
        nb = max(nb, abs(rep.t - target), float(np.max(np.abs(np.sum(rep.points**2, axis=1) - target))))
    ok = worst_psd >= -1e-8 and worst_obj <= 1e-12 and abs(slack - 1 / 48) <= 1e-6 and nb <= 1e-6
    criterion(
        7,
        ok,
        f"min dual PSD residual {worst_psd:.2e}, objective error {worst_obj:.1e}, "
        f"K4 slack {slack:.8f} (1/48 = {1 / 48:.8f}), neighbourhood error {nb:.2e}",
    )


def test_criterion_08_weighted_layer(criterion):
    rng = np.random.default_rng(8)
    ident = 0.0
    for _, G in with_edges(named_graphs()) + with_edges(random_graphs()[:20]):
        w = rng.uniform(0.1, 3.0, G.n)
        ident = max(ident, abs(weighted_identity_check(G, w).residual))
    blow, rep_res = 0.0, 0.0
    cases = [(generate("complete", 2), (2, 2)), (generate("complete", 2), (1, 2)), (generate("cycle", 5), (2, 1, 2, 1, 1))]
    for _, G in with_edges(named_graphs()) + with_edges(random_graphs()):
        if G.n <= 8:
            w = rng.integers(1, 3, G.n)
            while w.sum() > 12:
                w[np.argmax(w)] -= 1
            cases.append((G, tuple(int(v) for v in w)))
    for G, w in cases[:25]:
        chk = weighted_identity_check(G, np.array(w, dtype=float))
        blow = max(blow, abs(chk.blowup_residual))
        rep = blowup_rep(G, np.array(w))
        r = verify_representation(blow_up(G, w), rep, 1e-7)
        rep_res = max(rep_res, r.edge_residual, r.norm_residual)
    ok = ident <= 1e-5 and blow <= 1e-5 and rep_res <= 1e-7
    criterion(8, ok, f"weighted identity {ident:.2e}, t(G,w) - t(G^w) {blow:.2e} on {min(25, len(cases))} cases, blow-up rep residual {rep_res:.2e}")


def _random_slater_w(rng, n):
    while True:
        M = rng.standard_normal((n, n))
        W = (M + M.T) / 2 + rng.uniform(0, 2) * np.eye(n)
        if W.sum() > 1e-3:
            return W


def _random_null_w(rng, n):
    # dyadic entries so that every row sums to zero exactly
    M = rng.integers(-8, 9, (n, n)) / 4.0
    W = np.triu(M, 1)
    W = W + W.T
    W -= np.diag(W.sum(axis=1))
    return W


def test_criterion_09_ellipsoid_layer(criterion):
    rng = np.random.default_rng(9)
    tw_err = 0.0
    for k in range(50):
        n = int(rng.integers(2, 9))
        W = _random_null_w(rng, n) if k % 5 == 4 else _random_slater_w(rng, n)
        if classify_tw(W) == "unbounded":
            continue
        Kn = generate("complete", n)
        tw_err = max(tw_err, abs(tW(Kn, W).value - tW_Kn_closed(n, W)))

    # exact trichotomy, including entries whose float sums are off by one ulp
    tri = [
        ([["1", "-1"], ["-1", "1"]], "finite_null"),
        ([["1", "0"], ["0", "-1"]], "unbounded"),
        ([["0.1", "0.2", "-0.3"], ["0.2", "0.1", "-0.3"], ["-0.3", "-0.3", "0.6"]], "finite_null"),
        ([["0.1", "0.2", "-0.3"], ["0.2", "0.1", "-0.3"], ["-0.3", "-0.3", "0.6000000000000000001"]], "finite_slater"),
        ([["1", "0", "0"], ["0", "2", "0"], ["0", "0", "3"]], "finite_slater"),
        ([["1", "2", "0"], ["2", "-5", "0"], ["0", "0", "0"]], "unbounded"),
    ]
    tri_ok = all(classify_tw(W) == want for W, want in tri)
    # the raw solver agrees on the float-representable unbounded cases
    for W in (np.diag([1.0, -1.0]), np.array([[1.0, 2, 0], [2, -5, 0], [0, 0, 0]])):
        n = W.shape[0]
        tri_ok &= solve(tw_problem(generate("complete", n), W)).status == "unbounded"

    start = time.perf_counter()
    e1_err = 0.0
    for n in range(2, 7):
        for d in (n - 1, n):
            M = rng.standard_normal((d, d))
            A = M @ M.T + 0.2 * np.eye(d)
            ref = e1_Kn_closed(n, A)
            got = ep_local(generate("complete", n), A, p=1, restarts=20, seed=n).value
            e1_err = max(e1_err, abs(got - ref) / ref)
    elapsed = time.perf_counter() - start

    hb_err = 0.0
    K3 = generate("complete", 3)
    for _ in range(10):
        M = rng.standard_normal((2, 2))
        A = M @ M.T + 0.1 * np.eye(2)
        ref = hadamard_bound(2, A).value
        got = ep_local(K3, A, p=math.inf, restarts=20, seed=1).value
        hb_err = max(hb_err, abs(got - ref) / ref)
    ok = tw_err <= 1e-5 and tri_ok and e1_err <= 1e-3 and elapsed < 120 and hb_err <= 1e-3
    criterion(
        9,
        ok,
        f"tW error {tw_err:.2e}, trichotomy {'exact' if tri_ok else 'WRONG'}, "
        f"E_1 rel error {e1_err:.2e} in {elapsed:.1f}s, E_inf(K3) vs bound rel error {hb_err:.2e}",
    )


def test_criterion_10_hadamard(criterion):
    rng = np.random.default_rng(10)
    dist, obj = 0.0, 0.0
    for n in (2, 4, 8):
        U = hadamard_rep(n).points
        for i, j in itertools.combinations(range(n), 2):
            dist = max(dist, abs(np.linalg.norm(U[i] - U[j]) - 1))
        for _ in range(5):
            A = np.diag(rng.uniform(0, 3, n - 1))
            for p, norm in ((1, n), (math.inf, 1)):
                want = np.trace(A) / (2 * n) * norm
                obj = max(obj, abs(ep_objective(U, A, p) - want))
    criterion(10, dist <= 1e-12 and obj <= 1e-12, f"max distance error {dist:.1e}, objective error {obj:.1e}")


def test_criterion_11_gallai_certificates(criterion):
    g_err, o_err = 0.0, 0.0
    for _, G in with_edges(corpus()):
        rep = hypersphere_rep(G)
        q = ortho_from_sphere(rep)
        t = t_invariant(G).value
        g_err = max(g_err, float(np.max(np.abs(q.points[:, 0] ** 2 - (1 - 2 * t)))))
        ob, c = obtuse_rep_from_tprime(G)
        tp = t_invariant(G, "prime").value
        o_err = max(o_err, abs(float(np.min((ob.points @ c) ** 2)) - (1 - 2 * tp)))
    s_err = 0.0
    graphs = [generate("complete", n) for n in range(2, 8)] + [generate("cycle", 5), generate("petersen")]
    for G in graphs:
        p, c = orth_rep_optimal(G)
        c = c / np.linalg.norm(c)
        s_err = max(s_err, abs(float(np.sum((p.points @ c) ** 2)) - theta_bar(G).value))
    ok = g_err <= 1e-6 and o_err <= 1e-5 and s_err <= 1e-4
    criterion(11, ok, f"orthonormal {g_err:.2e}, obtuse {o_err:.2e}, optimal orthonormal sum {s_err:.2e}")


def test_criterion_12_hardness_gadgets(criterion):
    spindle = realizability_2d(moser_spindle())
    H = gadget_h()
    gad = realizability_2d(H)
    term = abs(np.linalg.norm(gad.points[H.find("i")] - gad.points[H.find("j")]) - 2) if gad.success else math.inf
    k4 = realizability_2d(generate("complete", 4), restarts=100)
    ok = spindle.success and spindle.residual <= 1e-8 and gad.success and term <= 1e-6 and (not k4.success) and k4.residual > 1e-2
    criterion(
        12,
        ok,
        f"spindle residual {spindle.residual:.1e}, gadget terminal error {term:.1e}, "
        f"K4 best residual {k4.residual:.3f} after {k4.restarts_used} restarts",
    )


def test_criterion_13_hoffman(criterion):
    worst, eq = math.inf, 0.0
    for _, G in with_edges(corpus()):
        worst = min(worst, hoffman_check(G).slack)
    for G in [generate("complete", n) for n in range(2, 10)] + [generate("cycle", 5)]:
        eq = max(eq, abs(hoffman_check(G).slack))
    criterion(13, worst >= -1e-5 and eq <= 1e-4, f"min slack {worst:.2e}, equality error on K_n and C_5 {eq:.2e}")
