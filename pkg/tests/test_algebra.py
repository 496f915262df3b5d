import pytest
from hypothesis import given, settings, strategies as st

from stringbordism.algebra import (
    admissible_words,
    adem_reduce,
    build_A_n,
    build_EQ,
    build_tilde_A1,
    compose,
    default_algebra,
    get_algebra,
    is_admissible,
    milnor_primitive,
    word_degree,
    word_excess,
    word_label,
)


# -- Adem relations at p = 2, checked by hand --------------------------------

@pytest.mark.parametrize("word,expected", [
    ((1, 1), {}),
    ((1, 2), {(3,): 1}),
    ((1, 3), {}),
    ((2, 2), {(3, 1): 1}),
    ((2, 3), {(5,): 1, (4, 1): 1}),
    ((3, 2), {}),
    ((3, 3), {(5, 1): 1}),
    ((5, 3), {}),
    ((1, 4), {(5,): 1}),
    ((2, 4), {(6,): 1, (5, 1): 1}),
    ((3, 4), {(7,): 1}),
    ((2, 5), {(6, 1): 1}),
])
def test_adem_mod2(word, expected):
    assert adem_reduce(2, word) == expected


def test_adem_leaves_admissibles_alone():
    assert adem_reduce(2, (4, 2, 1)) == {(4, 2, 1): 1}
    assert adem_reduce(3, (4, 0, 1)) == {(4, 0, 1): 1}
    # P3 beta P1 just misses admissibility and straightens to beta P3 P1.
    assert adem_reduce(3, (3, 0, 1)) == {(0, 3, 1): 1}


def test_adem_odd_p():
    # P1 P1 = 2 P2 and the Bockstein squares to zero.
    assert adem_reduce(3, (1, 1)) == {(2,): 2}
    assert adem_reduce(3, (0, 0)) == {}
    # P1 beta P1 = beta P2 + P2 beta.
    assert adem_reduce(3, (1, 0, 1)) == {(0, 2): 1, (2, 0): 1}


def test_degrees_and_excess():
    assert word_degree(2, (3, 1)) == 4
    assert word_degree(3, (0, 1)) == 5
    assert word_degree(5, (1,)) == 8
    assert word_excess(2, (2, 1)) == 1
    assert word_excess(2, (3, 1)) == 2
    assert word_excess(3, (0,)) == 1
    assert word_excess(3, (1,)) == 2
    assert word_excess(3, (1, 0)) == 1


def test_labels():
    assert word_label(2, ()) == "1"
    assert word_label(2, (3, 1)) == "Sq3Sq1"
    assert word_label(3, (0, 2, 1)) == "bP2P1"


def test_admissible_words_small():
    words = admissible_words(2, 3)
    assert words == [(), (1,), (2,), (2, 1), (3,)]
    assert len(admissible_words(2, 7)) == 16
    for w in admissible_words(3, 20):
        assert is_admissible(3, w)
        assert word_degree(3, w) <= 20


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([2, 3, 5]),
       st.lists(st.integers(0, 6), min_size=0, max_size=4))
def test_adem_output_admissible(p, entries):
    if p == 2:
        entries = [e for e in entries if e > 0]
    word = tuple(entries)
    out = adem_reduce(p, word)
    d = word_degree(p, word)
    for w, c in out.items():
        assert is_admissible(p, w)
        assert word_degree(p, w) == d
        assert 0 < c < p


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([2, 3]),
       st.lists(st.integers(0, 4), min_size=0, max_size=2),
       st.lists(st.integers(0, 4), min_size=0, max_size=2),
       st.lists(st.integers(0, 4), min_size=0, max_size=2))
def test_compose_associative(p, u, v, w):
    if p == 2:
        u, v, w = ([e for e in x if e > 0] for x in (u, v, w))
    xu = adem_reduce(p, tuple(u))
    xv = adem_reduce(p, tuple(v))
    xw = adem_reduce(p, tuple(w))
    assert compose(p, compose(p, xu, xv), xw) == compose(p, xu, compose(p, xv, xw))


# -- Milnor primitives -------------------------------------------------------

def test_milnor_primitives_mod2():
    assert milnor_primitive(2, 0) == {(1,): 1}
    assert milnor_primitive(2, 1) == {(3,): 1, (2, 1): 1}
    q2 = milnor_primitive(2, 2)
    assert all(word_degree(2, w) == 7 for w in q2)
    assert compose(2, q2, q2) == {}


def test_milnor_primitives_mod3():
    q1 = milnor_primitive(3, 1)
    assert q1 == {(1, 0): 1, (0, 1): 2}
    assert all(word_degree(3, w) == 5 for w in q1)
    assert compose(3, q1, q1) == {}
    q2 = milnor_primitive(3, 2)
    assert all(word_degree(3, w) == 17 for w in q2)
    assert compose(3, q2, q2) == {}
    # The primitives anticommute.
    anti = compose(3, q1, q2)
    for w, c in compose(3, q2, q1).items():
        assert anti.get(w, 0) == (-c) % 3


# -- A(n) at p = 2 -----------------------------------------------------------

def test_A0():
    a = build_A_n(0)
    assert a.dim == 2
    assert a.labels == ["1", "Sq1"]
    assert a.top_degree == 1


def test_A1_table():
    a = build_A_n(1)
    assert a.dim == 8
    assert a.top_degree == 6
    assert [a.dim_in_degree(d) for d in range(7)] == [1, 1, 1, 2, 1, 1, 1]
    assert "Sq3" in a.labels and "Sq2Sq1" in a.labels
    assert "Sq5+Sq4Sq1" in a.labels and "Sq5Sq1" in a.labels
    assert a.generator_labels == ["Sq1", "Sq2"]
    a.check_associativity()


def test_A2_table():
    a = build_A_n(2)
    assert a.dim == 64
    assert a.top_degree == 23
    assert a.generator_labels == ["Sq1", "Sq2", "Sq4"]
    assert sum(a.dim_in_degree(d) for d in range(24)) == 64
    # Poincare series is symmetric about the top degree.
    for d in range(24):
        assert a.dim_in_degree(d) == a.dim_in_degree(23 - d)


def test_A2_associative():
    build_A_n(2).check_associativity()


def test_An_factorization_reconstructs():
    for n in (0, 1, 2):
        a = build_A_n(n)
        for i in range(a.dim):
            if i == a.unit_index:
                assert a.factorization[i] is None
                continue
            acc = {}
            for coeff, gpos, c in a.factorization[i]:
                for k, cc in a.product(a.generators[gpos], c).items():
                    acc[k] = (acc.get(k, 0) + coeff * cc) % 2
            assert {k: v for k, v in acc.items() if v} == {i: 1}


def test_An_diagonal_counit():
    # Terms with the unit on one side recover the generator itself.
    for n in (1, 2):
        a = build_A_n(n)
        for gpos, gi in enumerate(a.generators):
            left = {}
            right = {}
            for c, i, j in a.diagonal[gpos]:
                if i == a.unit_index:
                    right[j] = (right.get(j, 0) + c) % 2
                if j == a.unit_index:
                    left[i] = (left.get(i, 0) + c) % 2
            assert left == {gi: 1}
            assert right == {gi: 1}


def test_Sq2_diagonal():
    a = build_A_n(1)
    sq1 = a.labels.index("Sq1")
    sq2 = a.labels.index("Sq2")
    terms = set(a.diagonal[1])
    assert terms == {(1, 0, sq2), (1, sq1, sq1), (1, sq2, 0)}


# -- E(Q0, Q1, Q2) -----------------------------------------------------------

@pytest.mark.parametrize("p,degs", [
    (2, [0, 1, 3, 4, 7, 8, 10, 11]),
    (3, [0, 1, 5, 6, 17, 18, 22, 23]),
    (5, [0, 1, 9, 10, 49, 50, 58, 59]),
])
def test_EQ_degrees(p, degs):
    a = build_EQ(p)
    assert a.dim == 8
    assert a.degrees == degs
    a.check_associativity()


def test_EQ_anticommutes():
    a = build_EQ(5)
    q0, q1 = a.generators[0], a.generators[1]
    ab = a.product(q0, q1)
    ba = a.product(q1, q0)
    assert set(ab) == set(ba)
    for k in ab:
        assert ba[k] == (-ab[k]) % 5
    assert a.product(q1, q1) == {}


# -- the Bockstein-P^1 subalgebra at p = 3 -----------------------------------

def test_tilde_A1_shape():
    a = build_tilde_A1()
    assert a.p == 3
    assert a.dim == 24
    assert a.top_degree == 23
    assert a.generator_labels == ["b", "P1"]
    for d, k in {0: 1, 1: 1, 4: 1, 5: 2, 9: 3, 14: 3, 23: 1}.items():
        assert a.dim_in_degree(d) == k


def test_tilde_A1_products():
    a = build_tilde_A1()
    b, p1 = a.generators
    assert a.product(b, b) == {}
    # P1 P1 = 2 P2, and P2 is dual to xi1^2.
    xi2 = a.labels.index("xi1^2")
    assert a.product(p1, p1) == {xi2: 2}
    # P1 b - b P1 = Q1, dual to tau1.
    t1 = a.labels.index("t1")
    xt = a.labels.index("xi1*t0")
    assert a.product(p1, b) == {xt: 1, t1: 1}
    assert a.product(b, p1) == {xt: 1}


def test_tilde_A1_generators_primitive():
    a = build_tilde_A1()
    for gpos, gi in enumerate(a.generators):
        assert set(a.diagonal[gpos]) == {(1, gi, 0), (1, 0, gi)}


def test_tilde_A1_factorization_reconstructs():
    a = build_tilde_A1()
    for i in range(a.dim):
        if i == a.unit_index:
            continue
        acc = {}
        for coeff, gpos, c in a.factorization[i]:
            for k, cc in a.product(a.generators[gpos], c).items():
                acc[k] = (acc.get(k, 0) + coeff * cc) % 3
        assert {k: v for k, v in acc.items() if v} == {i: 1}


# -- lookup ------------------------------------------------------------------

def test_get_algebra():
    assert get_algebra("A1").name == "A1"
    assert get_algebra("EQ012", 5).p == 5
    assert get_algebra("tildeA1").dim == 24
    with pytest.raises(ValueError):
        get_algebra("A1", 3)
    with pytest.raises(ValueError):
        get_algebra("EQ012")
    with pytest.raises(ValueError):
        get_algebra("B4")
    assert default_algebra(2).name == "A2"
    assert default_algebra(3).name == "tildeA1"
    assert default_algebra(5).name == "EQ012"
    assert default_algebra(7).name == "EQ012"
