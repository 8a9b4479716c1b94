import dataclasses
import itertools
import json

import pytest

from hscompress import groups as groups_module
from hscompress.config import CAPS
from hscompress.errors import BallTooLarge, ConfigurationError, RadiusExceeded
from hscompress.groups import (
    DirectProduct,
    FiniteGroup,
    FreeGroup,
    Integers,
    QuotientGroup,
    cyclic,
    enumerate_ball,
    group_from_spec,
    verify_length_axioms,
    word_length,
)

from oracles import sanov_free_group

# [DERIVED] free group of rank two, sizes of balls from a BFS in SL(2, Z)
F2_BALL_SIZES = [1, 5, 17, 53, 161, 485, 1457]


def test_integer_length_closed_form():
    Z = Integers()
    assert word_length(Z, 5) == 5
    assert word_length(Z, -7, method="bfs") == 7


def test_free_group_reduced_length():
    F = FreeGroup(2)
    g = F.parse("abA")
    assert word_length(F, g) == 3
    assert word_length(F, g, method="bfs") == 3


def test_z3_generator_has_length_one():
    Z3 = cyclic(3)
    two = Z3.parse("s2")
    assert word_length(Z3, two) == 1


def test_integer_ball_radius_two():
    assert sorted(enumerate_ball(Integers(), 2)) == [-2, -1, 0, 1, 2]


def test_z2_ball_radius_one():
    Z2 = cyclic(2)
    assert [Z2.format(x) for x in enumerate_ball(Z2, 1)] == ["e", "s"]


def test_free_group_ball_sizes_match_oracle():
    oracle = sanov_free_group().bfs(6)
    derived = [sum(1 for d in oracle.values() if d <= r) for r in range(7)]
    assert derived == F2_BALL_SIZES
    F = FreeGroup(2)
    assert [len(enumerate_ball(F, r)) for r in range(7)] == F2_BALL_SIZES
    assert len(enumerate_ball(F, 2)) == 17


def test_ball_order_is_length_then_payload():
    F = FreeGroup(2)
    ball = enumerate_ball(F, 3)
    keys = [(F.length(x), F.sort_key(x)) for x in ball]
    assert keys == sorted(keys)


def test_length_axioms_integers_and_free_group():
    Z = Integers()
    ball = enumerate_ball(Z, 5)
    assert verify_length_axioms(Z, itertools.product(ball, ball)) == []
    F = FreeGroup(2)
    ball = enumerate_ball(F, 4)
    assert verify_length_axioms(F, itertools.product(ball, ball)) == []


def test_length_axioms_negative_control():
    Z = Integers()
    ball = enumerate_ball(Z, 3)
    bogus = lambda n: n * n  # not subadditive
    assert verify_length_axioms(Z, itertools.product(ball, ball), bogus)


def test_corrupted_table_rejected():
    table = [[0, 1, 2], [1, 1, 0], [2, 0, 1]]
    with pytest.raises(ConfigurationError):
        FiniteGroup(table, [1], ["e", "a", "b"])


def test_bfs_matches_closed_form_on_ball_eight():
    for G in (Integers(), FreeGroup(2)):
        for x in enumerate_ball(G, 8 if isinstance(G, Integers) else 5):
            assert G.bfs_length(x) == G.closed_length(x)


def test_radius_cap_raises():
    Z = Integers(radius_cap=4)
    with pytest.raises(RadiusExceeded):
        Z.bfs_length(9)


def test_ball_cap_raises(monkeypatch):
    monkeypatch.setattr(groups_module, "CAPS", dataclasses.replace(CAPS, ball_size=100))
    with pytest.raises(BallTooLarge):
        enumerate_ball(FreeGroup(3), 4)


def test_direct_product_and_quotient():
    Z2 = cyclic(2, "u")
    P = DirectProduct(Integers(), Z2)
    Q = QuotientGroup(P, [P.identity, P.parse("(e,u)")])
    x = P.parse("(a^3,u)")
    assert P.length(x) == 4
    assert Q.length(Q.project(x)) == 3
    assert Q.length(Q.project(x)) <= P.length(x)


def test_non_normal_quotient_rejected():
    table = [  # S3 as permutations of three points
        [0, 1, 2, 3, 4, 5],
        [1, 0, 4, 5, 2, 3],
        [2, 5, 0, 4, 3, 1],
        [3, 4, 5, 0, 1, 2],
        [4, 3, 1, 2, 5, 0],
        [5, 2, 3, 1, 0, 4],
    ]
    S3 = FiniteGroup(table, [1, 2], [str(i) for i in range(6)])
    with pytest.raises(ConfigurationError):
        QuotientGroup(S3, [0, 1])


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "integers"},
        {"kind": "free", "rank": 2},
        {"kind": "cyclic", "order": 5, "letter": "c"},
        {"kind": "direct_product", "factors": [{"kind": "cyclic", "order": 2, "letter": "u"}, {"kind": "integers"}]},
    ],
)
def test_group_spec_round_trip(spec):
    G = group_from_spec(spec)
    text = json.dumps(G.to_spec(), sort_keys=True)
    again = group_from_spec(json.loads(text))
    assert json.dumps(again.to_spec(), sort_keys=True) == text
    assert [again.format(x) for x in again.ball(2)] == [G.format(x) for x in G.ball(2)]


def test_finite_spec_with_table():
    spec = {"kind": "finite", "elements": ["e", "a", "b"], "table": [["e", "a", "b"], ["a", "b", "e"], ["b", "e", "a"]],
            "generators": ["a"]}
    G = group_from_spec(spec)
    assert len(G.elements()) == 3
    assert G.length(G.parse("b")) == 1


def test_unknown_kind():
    with pytest.raises(ConfigurationError):
        group_from_spec({"kind": "lie"})
