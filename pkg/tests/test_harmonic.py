import json

import numpy as np
import pytest

from buildinglab import harmonic, samples
from buildinglab.cat0 import SPD, Euclidean, Hyperbolic, Product
from buildinglab.errors import BadHolonomy, ClassViolation, LinkMismatch, MalformedInput, MissingLambda
from buildinglab.harmonic import (
    CONVERGED,
    DIVERGING,
    GENERIC,
    MAX_ITER,
    NONSPECIAL,
    SPECIAL,
    EquivariantMap,
    build_complex,
    load_complex,
)


# -- loading --------------------------------------------------------------------

def test_load_trivial_and_single_loop():
    c = load_complex({"space": {"kind": "euclidean", "dim": 2}, "vertices": [{}]})
    assert c.n_vertices == 1 and not c.edges
    c = load_complex(
        {
            "space": {"kind": "hyperbolic", "dim": 2},
            "vertices": [{"class": "generic"}],
            "edges": [{"from": 0, "to": 0, "voltage": {"matrix": Hyperbolic(2).boost(1.0).data.tolist()}}],
        }
    )
    assert len(c.edges) == 1


def test_triangle_holonomy():
    h = Hyperbolic(2)
    g, k = h.boost(0.4), h.rotation(0.9)
    ok = build_complex(h, [GENERIC] * 3, [(0, 1, g), (1, 2, k), (2, 0, (g @ k).inverse())], [[0, 1, 2]])
    assert ok.holonomy(ok.triangles[0]).deviation(h.identity()) < 1e-12
    with pytest.raises(BadHolonomy):
        build_complex(h, [GENERIC] * 3, [(0, 1, g), (1, 2, k), (2, 0, g @ k)], [[0, 1, 2]])
    # the product in the other order is a different element here
    with pytest.raises(BadHolonomy):
        build_complex(h, [GENERIC] * 3, [(0, 1, g), (1, 2, k), (2, 0, (k @ g).inverse())], [[0, 1, 2]])


def test_triangle_orientation_inferred():
    e = Euclidean(1)
    t = e.translation
    # edges 0->1, 0->2, 1->2 walked as 0->1->2->0
    c = build_complex(e, [GENERIC] * 3, [(0, 1, t([1.0])), (0, 2, t([3.0])), (1, 2, t([2.0]))], [[0, 2, 1]])
    assert sorted(s for _, s in c.triangles[0]) == [-1, 1, 1]
    assert c.holonomy(c.triangles[0]).deviation(e.identity()) < 1e-12


@pytest.mark.parametrize(
    "desc,err",
    [
        ("{not json", MalformedInput),
        ({"vertices": [{}]}, MalformedInput),
        ({"space": {"kind": "euclidean", "dim": 1}, "vertices": [{}], "edges": [{"from": 0, "to": 3}]}, MalformedInput),
        ({"space": {"kind": "euclidean", "dim": 1}, "vertices": [{"class": "odd"}]}, MalformedInput),
        (
            {"space": {"kind": "euclidean", "dim": 1}, "vertices": [{"class": "nonspecial"}] * 2, "edges": [{"from": 0, "to": 1}]},
            ClassViolation,
        ),
        (
            {"space": {"kind": "euclidean", "dim": 1}, "vertices": [{}] * 2, "edges": [{"from": 0, "to": 1}], "triangles": [[0, 0]]},
            MalformedInput,
        ),
    ],
)
def test_load_errors(desc, err):
    with pytest.raises(err):
        load_complex(desc)


def test_json_round_trip():
    c = samples.octahedron(Hyperbolic(2))
    d = harmonic.complex_to_json_obj(c)
    c2 = load_complex(json.dumps(d))
    assert c2.vertex_class == c.vertex_class and c2.triangles == c.triangles and c2.q == 1
    f = harmonic.random_map(c, np.random.default_rng(0))
    f2 = harmonic.load_map(c.space, json.loads(json.dumps(f.to_json_obj())), c.n_vertices)
    assert harmonic.energy(c, f) == harmonic.energy(c2, f2)
    with pytest.raises(MalformedInput):
        harmonic.load_map(c.space, {"values": []}, c.n_vertices)


# -- energy and differential --------------------------------------------------------

def test_energy_examples():
    h = Hyperbolic(2)
    c = samples.loops(h, samples.hyperbolic_about(h, 0.0, [0.5, 1.2]))
    assert harmonic.energy(c, harmonic.constant_map(c, h.origin)) < 1e-28
    e = Euclidean(2)
    c = samples.loops(e, [e.translation([0.6, 0.8])])
    assert abs(harmonic.energy(c, EquivariantMap(e, [np.array([7.0, -2.0])])) - 1.0) < 1e-14
    c = samples.identity_path(e, 2)
    x, y = np.array([0.0, 0.0]), np.array([1.0, 2.0])
    assert abs(harmonic.energy(c, EquivariantMap(e, [x, y])) - 5.0) < 1e-14


def test_differential_examples():
    e = Euclidean(2)
    c = samples.identity_path(e, 2)
    f = EquivariantMap(e, [np.zeros(2), np.array([1.0, 0.0])])
    assert np.allclose(harmonic.differential(c, f, 0), [[1.0, 0.0]])
    c = samples.loops(e, [e.translation([1.0, 0.0])])
    d = harmonic.differential(c, EquivariantMap(e, [np.zeros(2)]), 0)
    assert np.allclose(sorted(v[0] for v in d), [-1.0, 1.0])
    # log-norm identity on random hyperbolic data
    h = Hyperbolic(3)
    c = samples.octahedron(h)
    f = harmonic.random_map(c, np.random.default_rng(1))
    for v in range(c.n_vertices):
        targets = harmonic._targets(c, f.values, v)
        for t, y in zip(harmonic.differential(c, f, v), targets):
            assert abs(h.tangent_norm(f.values[v], t) - h.distance(f.values[v], y)) < 1e-10


def test_gradient_residual_examples():
    e = Euclidean(2)
    c = build_complex(e, [GENERIC] * 3, [(0, 1, e.identity()), (0, 2, e.identity())], pinned=[1, 2])
    left, right = np.array([-1.0, 0.0]), np.array([1.0, 0.0])
    f = EquivariantMap(e, [np.zeros(2), right, left])
    assert harmonic.gradient_residual(c, f) == 0.0
    f = EquivariantMap(e, [np.array([0.3, 0.0]), right, left])
    assert abs(harmonic.gradient_residual(c, f) - 0.6) < 1e-15
    res = harmonic.harmonic_descent(c, f)
    assert res.status == CONVERGED and np.allclose(res.f.values[0], 0.0)
    assert res.f.values[1] is right


# -- descent -----------------------------------------------------------------------

@pytest.mark.parametrize("space", [Euclidean(2), Hyperbolic(2), SPD(2)], ids=["R2", "H2", "SPD2"])
def test_identity_holonomy_converges_to_constant(space):
    c = samples.tetrahedron_boundary(space)
    res = harmonic.harmonic_descent(c, harmonic.random_map(c, np.random.default_rng(2)))
    assert res.status == CONVERGED
    assert res.energy < 1e-12 and res.monotone
    assert res.residual <= 1e-6


def test_elliptic_loops_reach_fixed_point():
    h = Hyperbolic(2)
    c = samples.loops(h, samples.hyperbolic_about(h, 0.0, [0.8, 2.1]))
    res = harmonic.harmonic_descent(c, EquivariantMap(h, [h.exp(h.origin, np.array([0.0, 0.7, -0.4]))]))
    assert res.status == CONVERGED
    assert h.distance(res.f.values[0], h.origin) < 1e-6


def test_single_translation_loop_attains_axis():
    # a lone hyperbolic translation has its minimum on the axis
    h = Hyperbolic(2)
    c = samples.loops(h, [h.boost(1.0)])
    res = harmonic.harmonic_descent(c, EquivariantMap(h, [h.exp(h.origin, np.array([0.0, 0.3, 1.0]))]))
    assert res.status == CONVERGED
    assert abs(res.energy - 1.0) < 1e-9
    assert abs(res.f.values[0][2]) < 1e-4  # back on the axis x2 = 0


def test_euclidean_translation_loop_is_flat():
    e = Euclidean(2)
    c = samples.loops(e, [e.translation([3.0, 4.0])])
    res = harmonic.harmonic_descent(c, EquivariantMap(e, [np.array([1.0, 1.0])]))
    assert res.status == CONVERGED and res.trace == [25.0, 25.0]


def test_max_iter_and_diverging_status():
    c = samples.translation_with_parabolic()
    h = c.space
    f0 = EquivariantMap(h, [h.origin])
    res = harmonic.harmonic_descent(c, f0, max_iter=3)
    assert res.status == MAX_ITER and res.sweeps == 3
    res = harmonic.harmonic_descent(c, f0, max_iter=10**5, radius=1.5)
    assert res.status == DIVERGING and res.monotone and res.max_drift > 1.5
    assert 1.0 < res.energy < res.trace[0]


def test_jacobi_updates():
    c = samples.tetrahedron_boundary(Hyperbolic(2))
    res = harmonic.harmonic_descent(c, harmonic.random_map(c, np.random.default_rng(3)), jacobi=True, max_iter=5000)
    assert res.status == CONVERGED and res.monotone and res.energy < 1e-12


def test_energy_invariant_under_global_isometry():
    h = Hyperbolic(2)
    rng = np.random.default_rng(4)
    gens = [h.boost(0.3) @ h.rotation(0.4), h.rotation(1.1), h.parabolic(0.7)]
    c = samples.loops(h, gens)
    k = h.boost(1.3, axis=2) @ h.rotation(0.2)
    ck = samples.loops(h, [k @ g @ k.inverse() for g in gens])
    for _ in range(10):
        x = h.random_point(rng)
        e1 = harmonic.energy(c, EquivariantMap(h, [x]))
        e2 = harmonic.energy(ck, EquivariantMap(h, [k(x)]))
        assert abs(e1 - e2) < 1e-9 * max(1.0, e1)


def test_zero_energy_iff_equivariantly_constant():
    e = Euclidean(2)
    c = samples.identity_path(e, 3)
    x = np.array([0.5, -0.5])
    assert harmonic.energy(c, harmonic.constant_map(c, x)) == 0.0
    f = EquivariantMap(e, [x, x, x + 1e-3])
    assert harmonic.energy(c, f) > 0 and harmonic.edge_terms(c, f)[0] == 0.0


# -- chain report --------------------------------------------------------------------

def test_chain_constant_map_is_all_zero():
    c = samples.tetrahedron_boundary(Hyperbolic(2))
    rep = harmonic.wang_chain_report(c, harmonic.constant_map(c, c.space.origin), {GENERIC: 3.0})
    assert rep.energy == 0.0 and rep.count_residual == 0.0
    assert all(r.d_df == 0.0 and r.comparison == 0.0 for r in rep.vertices)
    assert rep.poincare_asserted and rep.poincare_holds and rep.passed


@pytest.mark.parametrize("space", [Euclidean(3), Hyperbolic(2), SPD(2)], ids=["R3", "H2", "SPD2"])
def test_chain_random_maps_on_tetrahedron(space):
    c = samples.tetrahedron_boundary(space)
    rng = np.random.default_rng(5)
    for _ in range(5):
        f = harmonic.random_map(c, rng)
        rep = harmonic.wang_chain_report(c, f, {GENERIC: 3.0})
        assert rep.comparison_holds
        assert min(r.comparison_slack for r in rep.vertices) >= -1e-9
        # direct summation oracle: every edge is opposite to q+1 = 2 corners
        assert abs(rep.count_lhs - 2 * harmonic.energy(c, f)) <= 1e-12 * max(1, rep.count_lhs)
        assert not rep.poincare_asserted
        # the link of each vertex is a triangle, gap 3
        assert all(abs(r.link_lambda - 3.0) < 1e-12 for r in rep.vertices)


def test_chain_torus_equality():
    c = samples.euclidean_torus()
    res = harmonic.harmonic_descent(c, harmonic.random_map(c, np.random.default_rng(6)))
    rep = harmonic.wang_chain_report(c, res.f, {GENERIC: 1.0})
    assert rep.vertices[0].link_lambda == pytest.approx(1.0, abs=1e-12)
    # a flat torus is extremal: every inequality is an equality
    assert abs(rep.poincare_lhs - rep.poincare_rhs) < 1e-9 and rep.comparison_holds and rep.passed
    assert abs(rep.poincare_rhs - 2 * rep.energy) < 1e-12
    bad = harmonic.wang_chain_report(c, res.f, {GENERIC: 3.0})
    assert bad.poincare_asserted and not bad.poincare_holds and not bad.passed


def test_chain_errors():
    c = samples.tetrahedron_boundary(Euclidean(1))
    f = harmonic.random_map(c, np.random.default_rng(0))
    with pytest.raises(MissingLambda):
        harmonic.wang_chain_report(c, f, {SPECIAL: 1.0})
    wrong_q = build_complex(c.space, c.vertex_class, c.edges, c.triangles, q=2)
    with pytest.raises(LinkMismatch):
        harmonic.wang_chain_report(wrong_q, f, {GENERIC: 3.0})


def test_split_on_octahedron():
    c = samples.octahedron(Hyperbolic(2))
    lam = {SPECIAL: 2.0, NONSPECIAL: 2.0}
    rng = np.random.default_rng(7)
    f = harmonic.random_map(c, rng)
    split = harmonic.wang_chain_report(c, f, lam).split
    assert split is not None and not split["asserted"]
    assert split["special_upper"] == pytest.approx(split["special_upper_counted"], rel=1e-12)
    assert split["nonspecial_upper"] == pytest.approx(split["nonspecial_upper_counted"], rel=1e-12)
    assert split["e1"] + split["e2"] == pytest.approx(harmonic.energy(c, f), rel=1e-12)
    res = harmonic.harmonic_descent(c, f)
    rep = harmonic.wang_chain_report(c, res.f, lam)
    assert rep.split["asserted"] and rep.passed


def test_product_space_descent():
    p = Product([Hyperbolic(2), Euclidean(1)])
    h = p.factors[0]
    gens = [p.from_factors([g, p.factors[1].identity()]) for g in samples.hyperbolic_about(h, 0.5, [0.9, 1.7])]
    c = samples.loops(p, gens)
    res = harmonic.harmonic_descent(c, harmonic.random_map(c, np.random.default_rng(8)))
    assert res.status == CONVERGED
    assert h.distance(res.f.values[0][0], h.boost(0.5)(h.origin)) < 1e-6
