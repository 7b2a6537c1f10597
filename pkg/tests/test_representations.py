from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetasphere.ellipsoid import hadamard_bound
from thetasphere.errors import RepresentationError, UnsupportedOrderError
from thetasphere.graph import Graph, blow_up, complement, contract, gadget_h, generate, moser_spindle
from thetasphere.programs import t_invariant, theta_bar
from thetasphere.representations import (
    DualSolution,
    Representation,
    blowup_rep,
    canonical_frame,
    clique_sum_glue,
    coloring_from_sphere,
    contract_dual,
    hadamard_rep,
    hypersphere_rep,
    lifted_hadamard_rep,
    minmax_check,
    neighborhood_rep,
    obtuse_rep_from_tprime,
    optimal_dual,
    orth_rep_optimal,
    ortho_from_sphere,
    polish,
    realizability_2d,
    sphere_from_ortho,
    thetabody_element,
    verify_representation,
)


def _k2_rep():
    return Representation("hypersphere", np.array([[-0.5], [0.5]]), {"t": 0.25})


@st.composite
def graphs_with_edges(draw, max_n=8):
    n = draw(st.integers(2, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [e for e, k in zip(pairs, keep) if k] or [pairs[0]]
    return Graph(n, edges)


def test_hypersphere_small_cases():
    rep = hypersphere_rep(generate("complete", 2))
    assert abs(rep.t - 0.25) < 1e-8
    assert np.allclose(np.sort(np.abs(rep.points[:, 0])), 0.5, atol=1e-7)
    rep = hypersphere_rep(generate("complete", 3))
    assert abs(rep.t - 1 / 3) < 1e-8 and rep.dimension == 2
    C5 = generate("cycle", 5)
    rep = hypersphere_rep(C5)
    assert abs(rep.t - 0.2763932) < 1e-7
    assert verify_representation(C5, rep, 1e-7).ok


@settings(max_examples=15, deadline=None)
@given(graphs_with_edges())
def test_hypersphere_rep_is_valid(G):
    rep = hypersphere_rep(G)
    r = verify_representation(G, rep, 1e-8)
    assert r.ok, r
    assert abs(rep.t - t_invariant(G).value) < 1e-6


def test_ortho_from_sphere_k2():
    q = ortho_from_sphere(_k2_rep())
    assert np.allclose(np.abs(q.points), math.sqrt(2) / 2)
    assert abs(q.points[0] @ q.points[1]) < 1e-15


def test_ortho_from_sphere_c5_gallai():
    C5 = generate("cycle", 5)
    q = ortho_from_sphere(hypersphere_rep(C5))
    assert np.allclose(q.points[:, 0] ** 2, 1 / math.sqrt(5), atol=1e-7)
    assert verify_representation(complement(C5), q, 1e-7).ok


def test_sphere_ortho_roundtrip():
    q = ortho_from_sphere(_k2_rep())
    back = sphere_from_ortho(q, 2.0)
    assert abs(back.t - 0.25) < 1e-12
    assert np.allclose(back.points, _k2_rep().points, atol=1e-9)
    with pytest.raises(RepresentationError):
        sphere_from_ortho(q, 3.0)


def test_sphere_from_ortho_degenerate():
    q = Representation("orthonormal", np.eye(3), {})
    assert sphere_from_ortho(Representation("orthonormal", np.hstack([np.ones((3, 1)), np.zeros((3, 2))]), {}), 1.0).t == 0
    with pytest.raises(RepresentationError):
        sphere_from_ortho(q, 1.0)


def test_coloring_from_sphere():
    c = coloring_from_sphere(_k2_rep())
    assert abs(c.metadata["k"] - 2) < 1e-12
    assert abs(c.points[0] @ c.points[1] + 1) < 1e-12
    K3 = generate("complete", 3)
    c = coloring_from_sphere(hypersphere_rep(K3))
    assert abs(c.metadata["k"] - 3) < 1e-6
    assert abs(c.points[0] @ c.points[1] + 0.5) < 1e-6
    c = coloring_from_sphere(hypersphere_rep(generate("cycle", 5)))
    assert abs(c.metadata["k"] - math.sqrt(5)) < 1e-4
    with pytest.raises(RepresentationError):
        coloring_from_sphere(Representation("hypersphere", np.zeros((2, 1)), {"t": 0.0}))


def test_obtuse_rep():
    for n in range(2, 6):
        ob, c = obtuse_rep_from_tprime(generate("complete", n))
        assert abs(np.min((ob.points @ c) ** 2) - 1 / n) < 1e-6
    C5 = generate("cycle", 5)
    ob, c = obtuse_rep_from_tprime(C5)
    assert np.all(ob.points @ c >= -1e-9)
    assert verify_representation(complement(C5), ob, 1e-6).ok
    ob, c = obtuse_rep_from_tprime(Graph(3))
    assert np.allclose(ob.points @ c, 1)


def test_orth_rep_optimal():
    for G, want in [(generate("complete", 4), 4), (generate("cycle", 5), math.sqrt(5))]:
        p, c = orth_rep_optimal(G)
        sigma = np.sum((p.points @ (c / np.linalg.norm(c))) ** 2)
        assert abs(sigma - want) < 1e-4
        assert verify_representation(G, p, 1e-6).ok


def test_orth_rep_optimal_edgeless():
    p, c = orth_rep_optimal(Graph(3))
    assert abs(np.sum((p.points @ (c / np.linalg.norm(c))) ** 2) - 1) < 1e-6
    assert verify_representation(Graph(3), p, 1e-6).ok


def test_thetabody_elements():
    K3 = generate("complete", 3)
    x = thetabody_element([0, 1, 2], K3)
    assert np.array_equal(x.x, [1, 1, 1]) and x.provenance == "stable_set"
    assert np.array_equal(thetabody_element([0], K3).x, [1, 0, 0])
    with pytest.raises(ValueError):
        thetabody_element([0, 2], generate("cycle", 5))
    C5 = generate("cycle", 5)
    p, c = orth_rep_optimal(C5)
    x = thetabody_element((p, c / np.linalg.norm(c)))
    assert abs(x.x.sum() - math.sqrt(5)) < 1e-4


def test_minmax_check():
    K3 = generate("complete", 3)
    rep = hypersphere_rep(K3)
    assert abs(minmax_check(rep, thetabody_element([0, 1, 2], K3))) < 1e-7
    assert abs(minmax_check(rep, thetabody_element([0], K3)) - 2 / 3) < 1e-7
    C5 = generate("cycle", 5)
    p, c = orth_rep_optimal(C5)
    w = thetabody_element((p, c / np.linalg.norm(c)))
    assert abs(minmax_check(hypersphere_rep(C5), w)) < 1e-4


def test_blowup_rep():
    K2 = generate("complete", 2)
    rep = blowup_rep(K2, [2, 2])
    assert abs(rep.t - 0.375) < 1e-6
    assert verify_representation(blow_up(K2, [2, 2]), rep, 1e-7).ok
    rep = blowup_rep(K2, [1, 2])
    assert abs(rep.t - 1 / 3) < 1e-6
    C5 = generate("cycle", 5)
    rep = blowup_rep(C5, [1] * 5)
    assert abs(rep.t - t_invariant(C5).value) < 1e-6
    with pytest.raises(ValueError):
        blowup_rep(K2, [1, 1.5])


def test_clique_sum_glue():
    K3 = generate("complete", 3)
    r3 = hypersphere_rep(K3)
    G, rep = clique_sum_glue(r3, K3, [0, 1], r3, K3, [0, 1])
    assert G.n == 4 and abs(rep.t - 1 / 3) < 1e-8
    assert verify_representation(G, rep, 1e-8).ok
    G, rep = clique_sum_glue(r3, K3, [2], r3, K3, [0])
    assert verify_representation(G, rep, 1e-8).ok
    K2 = generate("complete", 2)
    with pytest.raises(RepresentationError):
        clique_sum_glue(r3, K3, [0], hypersphere_rep(K2), K2, [0])


def test_contract_dual():
    K4 = generate("complete", 4)
    d = DualSolution(np.full(4, 0.25), np.full(6, 1 / 16))
    H, dh = contract_dual(K4, (0, 1), d)
    assert H.n == 3 and abs(dh.objective - 5 / 16) < 1e-12
    assert dh.psd_residual(H) >= -1e-12
    K2 = generate("complete", 2)
    H, dh = contract_dual(K2, (0, 1), DualSolution(np.full(2, 0.5), np.array([0.25])))
    assert H.n == 1 and dh.objective == 0
    C5 = generate("cycle", 5)
    d = optimal_dual(C5)
    H, dh = contract_dual(C5, (0, 1), d)
    assert dh.psd_residual(H) >= -1e-8
    assert abs(dh.objective - (t_invariant(C5).value - d.z[0])) < 1e-6
    with pytest.raises(RepresentationError):
        contract_dual(K2, (0, 1), DualSolution(np.array([1.0, 1.0]), np.array([0.25])))
    assert contract(C5, (0, 1))[0].m == H.m


def test_neighborhood_rep():
    K3 = generate("complete", 3)
    rep = neighborhood_rep(K3, 0, hypersphere_rep(K3))
    assert abs(rep.metadata["beta"] ** 2 - 1 / 12) < 1e-8
    assert np.allclose(np.sum(rep.points**2, axis=1), 0.25, atol=1e-8)
    K4 = generate("complete", 4)
    rep = neighborhood_rep(K4, 0, hypersphere_rep(K4))
    assert np.allclose(np.sum(rep.points**2, axis=1), 1 / 3, atol=1e-8)
    C5 = generate("cycle", 5)
    rep = neighborhood_rep(C5, 0, hypersphere_rep(C5))
    assert np.allclose(np.sum(rep.points**2, axis=1), 1 - 1 / (4 * t_invariant(C5).value), atol=1e-7)


def test_hadamard_rep():
    rep = hadamard_rep(2)
    assert np.allclose(np.sort(rep.points[:, 0]), [-0.5, 0.5])
    rep = hadamard_rep(4)
    assert rep.points.shape == (4, 3)
    assert np.allclose(np.sum(rep.points**2, axis=1), 3 / 8)
    rep = hadamard_rep(8)
    assert verify_representation(generate("complete", 8), rep, 1e-12).ok
    with pytest.raises(UnsupportedOrderError):
        hadamard_rep(6)


def test_lifted_hadamard():
    rep = lifted_hadamard_rep(2, np.eye(2))
    assert abs(rep.metadata["objective_inf"] - 1 / 3) < 1e-12
    rep = lifted_hadamard_rep(2, np.diag([1.0, 2.0]))
    assert abs(rep.metadata["objective_inf"] - 49 / 96) < 1e-12
    assert verify_representation(generate("complete", 3), rep, 1e-12).ok
    A = np.diag([1.0, 1.0, 1.0, 2.0])
    rep = lifted_hadamard_rep(4, A)
    assert rep.metadata["objective_inf"] <= hadamard_bound(4, A).value + 1e-9
    assert verify_representation(generate("complete", 5), rep, 1e-12).ok


def test_verify_representation_flags():
    K3 = generate("complete", 3)
    rep = hypersphere_rep(K3)
    assert verify_representation(K3, rep).ok
    P = rep.points.copy()
    P[0, 0] += 0.01
    r = verify_representation(K3, Representation("hypersphere", P, rep.metadata))
    assert not r.ok and 5e-3 < r.edge_residual < 2e-2
    r = verify_representation(K3, Representation("hypersphere", P, rep.metadata))
    assert r.norm_residual > 1e-3


def test_polish_and_canonical_frame():
    rng = np.random.default_rng(0)
    G = generate("complete", 4)
    tg = [(i, j, 1.0, 0.0) for i, j in G.edges]
    P0 = hadamard_rep(4).points + 1e-3 * rng.standard_normal((4, 3))
    P, _, res = polish(P0, tg)
    assert res < 1e-12
    F = canonical_frame(P)
    assert np.allclose(F @ F.T, P @ P.T)
    assert abs(F[0, 1]) < 1e-12 and abs(F[0, 2]) < 1e-12 and abs(F[1, 2]) < 1e-12


def test_realizability():
    r = realizability_2d(moser_spindle())
    assert r.success and r.residual <= 1e-8
    H = gadget_h()
    r = realizability_2d(H)
    d = np.linalg.norm(r.points[H.find("i")] - r.points[H.find("j")])
    assert r.success and abs(d - 2) < 1e-6
    r = realizability_2d(generate("cycle", 6))
    assert r.success
    r = realizability_2d(generate("complete", 4), restarts=30)
    assert not r.success and r.residual > 1e-2


def test_theta_bar_matches_orth_rep_on_petersen():
    G = generate("petersen")
    p, c = orth_rep_optimal(G)
    assert abs(np.sum((p.points @ (c / np.linalg.norm(c))) ** 2) - theta_bar(G).value) < 1e-4
