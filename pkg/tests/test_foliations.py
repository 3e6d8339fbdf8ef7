"""Formal groupoids, their nerves, smooth foliations and the round trip
between the two descriptions."""

from __future__ import annotations

import json

import pytest

from infol.complexes import shift
from infol.exactlin import GF, QQ, CohomologyGroup
from infol.foliations import (
    FormalGroupoid,
    GroupoidAxiomError,
    additive_formal_group,
    cotangent,
    differentiate,
    foliation_cohomology,
    integrate,
    loop_space,
    multiplicative_formal_group,
    pair_groupoid,
    same_foliation,
    same_structure,
    tautological_foliation,
    unit_groupoid,
    zero_foliation,
)
from infol.infcoh import cech_alexander, inf_cohomology, parse_algebra
from infol.polys import Poly


def groupoids():
    return [
        ("unit Q[x]", unit_groupoid(parse_algebra("Q[x]"), 6)),
        ("pair Q[x]", pair_groupoid(parse_algebra("Q[x]"), 6)),
        ("pair F3[x]", pair_groupoid(parse_algebra("F3[x]"), 6)),
        ("pair Q[x,y]", pair_groupoid(parse_algebra("Q[x,y]"), 4)),
        ("Ga F3", additive_formal_group(GF(3), 6)),
        ("Ga F5", additive_formal_group(GF(5), 6)),
        ("Gm Q", multiplicative_formal_group(QQ, 6)),
    ]


@pytest.mark.parametrize("name,G", groupoids())
def test_axioms_hold(name, G):
    assert G.axiom_violations() == []


@pytest.mark.parametrize("name,G", groupoids())
def test_integrate_differentiate_round_trip(name, G):
    F = differentiate(G)
    assert F.invariant_violations() == []
    H = integrate(F)
    assert same_structure(G, H)
    assert same_foliation(F, differentiate(H))


@pytest.mark.parametrize("name,G", groupoids())
def test_json_round_trip(name, G):
    back = FormalGroupoid.from_json(json.loads(G.dumps()))
    assert same_structure(G, back)
    assert back.dumps() == G.dumps()


def test_broken_groupoid_is_rejected():
    ring = GF(5)
    X = parse_algebra("F5")
    t1, t2 = Poly.var(0, 2, ring), Poly.var(1, 2, ring)
    t = Poly.var(0, 1, ring)
    # t' + t'' + t'^2 is not associative
    bad = FormalGroupoid(X, 1, 5, (), (t1 + t2 + t1 * t1,), (-t,))
    assert bad.axiom_violations()
    with pytest.raises(GroupoidAxiomError):
        differentiate(bad)
    # a wrong inverse is caught even when composition is fine
    wrong = FormalGroupoid(X, 1, 5, (), (t1 + t2,), (t,))
    assert any("inverse" in v for v in wrong.axiom_violations())


def test_pair_nerve_is_the_cech_alexander_tower():
    for alg in ("Q[x]", "F3[x]"):
        X = parse_algebra(alg)
        assert same_foliation(differentiate(pair_groupoid(X, 8), 2, 6), tautological_foliation(X, 2, 8, 6))


def test_tautological_foliation():
    X = parse_algebra("Q[x]")
    F = tautological_foliation(X)
    assert F.smooth and F.rank == 1
    assert F.invariant_violations() == []
    H = foliation_cohomology(F)
    T = inf_cohomology(cech_alexander(X, 2, 8, 6))
    assert all(H[n] == T[n] for n in T.trusted)
    assert H[0] == CohomologyGroup(QQ, 1) and H[1].is_zero
    assert cotangent(tautological_foliation(parse_algebra("Q[x,y]"), 2, 5, 4)).ranks == {0: 2}
    # gr is polynomial on one generator in any characteristic
    assert tautological_foliation(parse_algebra("F3[x]")).invariant_violations() == []


def test_tautological_foliation_of_a_point():
    F = tautological_foliation(parse_algebra("Q"))
    assert F.rank == 0 and cotangent(F).ranks == {}
    assert foliation_cohomology(F).nonzero() == {0: CohomologyGroup(QQ, 1)}


def test_zero_foliation():
    X = parse_algebra("Q[x]")
    Z = zero_foliation(X, D=6)
    assert cotangent(Z).ranks == {} and Z.rank == 0
    # A in total degree <= 6, concentrated in degree 0
    assert foliation_cohomology(Z).nonzero() == {0: CohomologyGroup(QQ, 7)}
    assert same_structure(integrate(Z), unit_groupoid(X, 8))


def test_loop_space():
    X = parse_algebra("Q[x]")
    F = tautological_foliation(X)
    L = loop_space(F)
    assert L.shift == 1
    assert L.cotangent.same_as(shift(cotangent(F), 1))
    assert same_structure(L.groupoid, pair_groupoid(X, 8))
    Lz = loop_space(zero_foliation(X))
    assert Lz.E.ranks == {} and Lz.cotangent.ranks == {}


def test_loop_space_of_additive_group():
    F = differentiate(additive_formal_group(GF(5), 6))
    L = loop_space(F)
    assert L.cotangent.ranks == {-1: 1}
    # the arrow algebra: power series in t below degree 6, in degree 0
    assert foliation_cohomology(L.foliation).nonzero() == {0: CohomologyGroup(GF(5), 6)}


def test_differentiate_rejects_oversized_structure_maps():
    with pytest.raises(ValueError):
        differentiate(multiplicative_formal_group(QQ, 6), D=1)
