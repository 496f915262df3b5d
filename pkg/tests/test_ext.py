"""Minimal resolutions, Ext charts, structure lines, change of rings.

Dot counts are cross-checked against an independent reduced-bar-complex
computation of Tor, against the Koszul formula for exterior algebras, and
against the classical charts for the A(1) sphere.
"""

import random
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from stringbordism.algebra import build_A_n, get_algebra
from stringbordism.fplin import FpMatrix
from stringbordism.gmod import (
    GradedModule,
    direct_sum,
    free_module,
    restrict,
    suspend,
    trivial_module,
    truncate,
)
from stringbordism.ext import (
    change_of_rings_map,
    ext_chart,
    minimal_resolution,
    sphere_resolution,
    structure_lines,
)
from stringbordism.kz4 import build_kz4, build_smash_square


# ------------------------------------------------------------------- oracles


def bar_dims(module, max_s, max_t):
    """Tor_{s,t}(F_p, M) through the reduced bar complex.

    Entirely independent of the resolution code: basis elements are words
    in the augmentation ideal tensored with module elements, and homology
    dimensions come from ranks of the face-map differentials.  The d*d = 0
    identity is asserted as a self-check of the construction.
    """
    algebra = module.algebra
    p = algebra.p
    plus = [i for i in range(algebra.dim) if algebra.degrees[i] > 0]
    basis = {}
    for s in range(max_s + 2):
        words = [((), 0)]
        for _ in range(s):
            words = [(w + (a,), d + algebra.degrees[a])
                     for w, d in words for a in plus
                     if d + algebra.degrees[a] <= max_t]
        by_t = {}
        for w, d in words:
            for t in range(d, max_t + 1):
                for k in range(module.dim(t - d)):
                    by_t.setdefault(t, []).append((w, t - d, k))
        basis[s] = by_t
    mats = {}
    for s in range(1, max_s + 2):
        for t in range(max_t + 1):
            dom = basis[s].get(t, [])
            cod = basis[s - 1].get(t, [])
            pos = {b: i for i, b in enumerate(cod)}
            cols = []
            for w, md, k in dom:
                col = {}

                def put(b, c):
                    c %= p
                    if c:
                        i = pos[b]
                        c = (col.get(i, 0) + c) % p
                        if c:
                            col[i] = c
                        else:
                            col.pop(i, None)

                sign = 1
                for i in range(len(w) - 1):
                    sign = -sign
                    for idx, c in algebra.product(w[i], w[i + 1]).items():
                        put((w[:i] + (idx,) + w[i + 2:], md, k), sign * c)
                sign = -sign
                act = module.basis_action_matrix(w[-1], md)
                for r in range(act.nrows):
                    c = act.entry(r, k)
                    if c:
                        put((w[:-1], md + algebra.degrees[w[-1]], r), sign * c)
                cols.append([col.get(i, 0) for i in range(len(cod))])
            mats[(s, t)] = FpMatrix.from_columns(p, cols, len(cod))
    for s in range(2, max_s + 2):
        for t in range(max_t + 1):
            a, b = mats[(s - 1, t)], mats[(s, t)]
            for j in range(b.ncols):
                v = a.mul_vec([b.entry(i, j) for i in range(b.nrows)])
                assert not any(v), "bar differential does not square to zero"
    dims = {}
    for s in range(max_s + 1):
        for t in range(max_t + 1):
            n = len(basis[s].get(t, []))
            if n:
                h = n - (mats[(s, t)].rank() if s else 0) - mats[(s + 1, t)].rank()
                if h:
                    dims[(s, t)] = h
    return dims


def koszul_dims(p, max_s, max_t):
    """Ext of F_p over E(Q0,Q1,Q2) is a polynomial algebra on classes
    v_i in (s, t) = (1, 2p^i - 1); dimensions count monomials."""
    qs = [1, 2 * p - 1, 2 * p * p - 1]
    dims = {}
    for a in range(max_s + 1):
        for b in range(max_s + 1 - a):
            for c in range(max_s + 1 - a - b):
                s = a + b + c
                t = a * qs[0] + b * qs[1] + c * qs[2]
                if t <= max_t:
                    dims[(s, t)] = dims.get((s, t), 0) + 1
    return dims


def shuffle_within_degrees(module, seed):
    """The same module with the basis of each degree permuted."""
    rng = random.Random(seed)
    perm = {}
    for d in module.degree_dims():
        order = list(range(module.dim(d)))
        rng.shuffle(order)
        perm[d] = order
    labels = list(module.labels)
    for d, order in perm.items():
        idxs = module.indices_in_degree(d)
        for new_slot, old_slot in enumerate(order):
            labels[idxs[new_slot]] = module.labels[idxs[old_slot]]
    actions = {}
    for gpos in range(len(module.algebra.generators)):
        gdeg = module.algebra.gen_degree(gpos)
        acts = {}
        for d in module.degree_dims():
            old = module.action_matrix(gpos, d)
            if old.is_zero():
                continue
            src = perm.get(d, [])
            tgt = perm.get(d + gdeg, list(range(old.nrows)))
            rows = [[old.entry(tgt[r], src[c]) for c in range(old.ncols)]
                    for r in range(old.nrows)]
            acts[d] = FpMatrix(module.p, rows, ncols=old.ncols)
        actions[gpos] = acts
    return GradedModule(module.algebra, module.degrees, labels, actions,
                        max_degree=module.max_degree,
                        truncated=module.truncated, name=module.name)


@lru_cache(maxsize=None)
def kz4_resolution(p, max_s, max_t, algebra_name=None):
    algebra = None
    if algebra_name is not None:
        algebra = get_algebra(algebra_name, p)
    return minimal_resolution(build_kz4(p, algebra=algebra), max_s, max_t)


@lru_cache(maxsize=None)
def cached_sphere(name, p, max_s, max_t):
    return sphere_resolution(get_algebra(name, p), max_s, max_t)


def stems_dict(chart, lo, hi):
    return {n: chart.dots_in_stem(n) for n in range(lo, hi + 1)}


# --------------------------------------------------------- small resolutions


def test_sphere_A0_is_a_diagonal():
    r = cached_sphere("A0", 2, 8, 12)
    assert r.dots() == {(s, s): 1 for s in range(9)}


def test_free_module_resolves_at_stage_zero():
    r = minimal_resolution(free_module(build_A_n(1)), 4, 16)
    assert [st_.count for st_ in r.stages] == [1, 0, 0, 0, 0]


def test_resolution_verify_passes():
    r = kz4_resolution(2, 6, 16, "A1")
    r.verify()
    cached_sphere("A1", 2, 8, 16).verify()


def test_sphere_A1_chart():
    # the classical ko chart: h0 towers in stems 0, 4, 8 (the stem-4 tower
    # starting in filtration 3, the stem-8 one in filtration 4), lone dots
    # for h1 and h1^2 in stems 1, 2
    ch = ext_chart(cached_sphere("A1", 2, 8, 16))
    assert ch.trusted_stem is None
    assert stems_dict(ch, 0, 8) == {
        0: {s: 1 for s in range(9)},
        1: {1: 1},
        2: {2: 1},
        3: {},
        4: {s: 1 for s in range(3, 9)},
        5: {},
        6: {},
        7: {},
        8: {s: 1 for s in range(4, 9)},
    }


def test_sphere_A1_structure_lines():
    r = cached_sphere("A1", 2, 8, 16)
    lined = structure_lines(r, r)
    one = [(1,)]
    h0 = lined.lines["h0"]
    assert lined.line_shifts == {"h0": 1, "h1": 2}
    expected_h0 = ({(s, s) for s in range(8)}
                   | {(s, s + 4) for s in range(3, 8)}
                   | {(s, s + 8) for s in range(4, 8)})
    assert set(h0) == expected_h0
    assert all(m.rows() == one for m in h0.values())
    # h1 off the unit, off h1, and off the periodicity classes; h1^3 = 0
    # and h1 times the stem-4 class vanish, so no lines from (2,4), (3,7)
    h1 = lined.lines["h1"]
    assert set(h1) == {(0, 0), (1, 2), (4, 12), (5, 14)}
    assert all(m.rows() == one for m in h1.values())


def test_structure_lines_rejects_foreign_sphere():
    r = kz4_resolution(2, 6, 16, "A1")
    wrong = cached_sphere("A0", 2, 8, 12)
    with pytest.raises(ValueError):
        structure_lines(r, wrong)


# ------------------------------------------------------------ oracle checks


def test_bar_oracle_sphere_A1():
    r = cached_sphere("A1", 2, 5, 10)
    want = bar_dims(trivial_module(build_A_n(1), 0), 5, 10)
    assert want == {k: v for k, v in r.dots().items() if k[0] <= 5}


def test_bar_oracle_kz4_over_A0():
    m = build_kz4(2, algebra=build_A_n(0))
    want = bar_dims(m, 4, 12)
    got = minimal_resolution(m, 4, 12).dots()
    assert want == {k: v for k, v in got.items() if k[0] <= 4}


def test_bar_oracle_sphere_tildeA1():
    alg = get_algebra("tildeA1", 3)
    want = bar_dims(trivial_module(alg, 0), 3, 9)
    got = cached_sphere("tildeA1", 3, 3, 9).dots()
    assert want == {k: v for k, v in got.items() if k[0] <= 3}


def test_bar_oracle_kz4_mod3_over_EQ012():
    m = build_kz4(3, algebra=get_algebra("EQ012", 3))
    want = bar_dims(m, 3, 12)
    got = minimal_resolution(m, 3, 12).dots()
    assert want == {k: v for k, v in got.items() if k[0] <= 3}


@pytest.mark.parametrize("p,max_s,max_t", [(2, 10, 20), (3, 8, 40), (5, 6, 60)])
def test_koszul_formula_for_EQ012_sphere(p, max_s, max_t):
    r = cached_sphere("EQ012", p, max_s, max_t)
    assert r.dots() == koszul_dims(p, max_s, max_t)


def test_euler_characteristic_matches_module():
    # alternating sum of free-module dimensions returns the module, in
    # degrees the window resolves completely
    m = build_kz4(2, algebra=build_A_n(1))
    r = minimal_resolution(m, 12, 16)
    for t in range(17):
        total = 0
        for s, stage in enumerate(r.stages):
            total += (-1) ** s * stage.dim(t)
        assert total % 2 == m.dim(t) % 2
        assert abs(total) == m.dim(t)


# ------------------------------------------------------- property-based part


algebra_names = st.sampled_from([("A0", 2), ("A1", 2), ("EQ012", 3)])


@st.composite
def small_modules(draw):
    name, p = draw(algebra_names)
    alg = get_algebra(name, p)
    pieces = []
    for _ in range(draw(st.integers(1, 3))):
        if draw(st.booleans()):
            pieces.append(suspend(trivial_module(alg, 0), draw(st.integers(0, 4))))
        else:
            cap = draw(st.integers(1, 5))
            pieces.append(truncate(free_module(alg), cap))
    m = pieces[0]
    for piece in pieces[1:]:
        m = direct_sum(m, piece, name="m")
    return m


@settings(max_examples=25, deadline=None)
@given(small_modules(), st.integers(0, 2 ** 30))
def test_resolution_exact_and_basis_independent(m, seed):
    r = minimal_resolution(m, 3, 8)
    r.verify()
    shuffled = shuffle_within_degrees(m, seed)
    shuffled.validate()
    assert minimal_resolution(shuffled, 3, 8).dots() == r.dots()


@settings(max_examples=15, deadline=None)
@given(small_modules())
def test_resolution_euler_characteristic(m):
    r = minimal_resolution(m, 4, 8)
    for t in range(min(8, m.min_degree + 4) + 1):
        total = sum((-1) ** s * stage.dim(t) for s, stage in enumerate(r.stages))
        assert abs(total) == m.dim(t)


# ------------------------------------------------------------- the models


def test_kz4_mod2_over_A1_chart():
    r = kz4_resolution(2, 12, 28, "A1")
    assert r.stages[0].degrees == [4, 8, 10, 10, 12, 14, 16, 16]
    assert sorted(r.stages[1].degrees) == [5, 9, 9, 10, 12, 13, 13,
                                           17, 17, 17, 17, 17, 18, 18]
    ch = ext_chart(r)
    assert ch.trusted_stem == 15
    assert stems_dict(ch, 4, 15) == {
        4: {s: 1 for s in range(13)},
        5: {},
        6: {},
        7: {},
        8: {0: 1, **{s: 2 for s in range(1, 13)}},
        9: {1: 1, 2: 1},
        10: {0: 2, 2: 1, 3: 1},
        11: {1: 1},
        12: {0: 1, 1: 2, 2: 2, 3: 3, **{s: 4 for s in range(4, 13)}},
        13: {s: 1 for s in range(2, 13)},
        14: {0: 1},
        15: {},
    }


def test_kz4_mod2_over_A1_h1_lines():
    # the stem-8 class in filtration 1 supports h1 and h1^2; one of the
    # two stem-10 classes in filtration 0 supports h1 into stem 11
    r = kz4_resolution(2, 12, 28, "A1")
    lined = structure_lines(r, cached_sphere("A1", 2, 12, 28))
    h1 = lined.lines["h1"]
    assert h1[(1, 9)].rows() == [(1, 0)]
    assert h1[(2, 11)].rows() == [(1,)]
    assert h1[(0, 10)].rows() == [(1, 1)]
    assert h1[(1, 10)].rows() == [(1,)]
    assert h1[(0, 8)].rows() == [(1,)]


def test_kz4_mod2_over_A2_chart():
    r = kz4_resolution(2, 20, 40)
    assert r.stages[0].degrees == [4, 10, 12, 16]
    ch = ext_chart(r)
    assert ch.trusted_stem == 15
    assert stems_dict(ch, 4, 15) == {
        4: {s: 1 for s in range(21)},
        5: {},
        6: {},
        7: {},
        8: {s: 1 for s in range(1, 21)},
        9: {1: 1, 2: 1},
        10: {0: 1, 2: 1, 3: 1},
        11: {1: 1},
        12: {0: 1, 1: 1, 2: 1, 3: 2, **{s: 3 for s in range(4, 21)}},
        13: {s: 1 for s in range(2, 21)},
        14: {},
        15: {2: 1, 3: 1, 4: 1},
    }


def test_kz4_mod2_over_A2_h1_lines():
    r = kz4_resolution(2, 20, 40)
    lined = structure_lines(r, cached_sphere("A2", 2, 20, 40))
    h1 = lined.lines["h1"]
    assert h1[(1, 9)].rows() == [(1,)]
    assert h1[(2, 11)].rows() == [(1,)]
    assert h1[(0, 10)].rows() == [(1,)]
    assert h1[(1, 10)].rows() == [(1,)]


def test_kz4_mod3_chart():
    r = kz4_resolution(3, 20, 40)
    assert r.stages[0].degrees == [4, 8, 16, 16]
    ch = ext_chart(r)
    assert stems_dict(ch, 4, 15) == {
        4: {s: 1 for s in range(21)},
        5: {}, 6: {}, 7: {},
        8: {s: 1 for s in range(21)},
        9: {}, 10: {}, 11: {},
        12: {s: 2 for s in range(1, 21)},
        13: {}, 14: {}, 15: {},
    }
    lined = structure_lines(r, cached_sphere("tildeA1", 3, 20, 40))
    a0 = lined.lines["a0"]
    assert a0[(0, 4)].rows() == [(1,)]
    assert a0[(1, 13)].rows() == [(1, 0), (0, 1)]


def test_kz4_mod5_chart():
    r = kz4_resolution(5, 20, 40)
    assert r.stages[0].degrees == [4, 8, 12, 12, 16, 16]
    ch = ext_chart(r)
    assert stems_dict(ch, 4, 15) == {
        4: {s: 1 for s in range(21)},
        5: {}, 6: {}, 7: {},
        8: {s: 1 for s in range(21)},
        9: {}, 10: {}, 11: {},
        12: {s: 2 for s in range(21)},
        13: {}, 14: {}, 15: {},
    }
    lined = structure_lines(r, cached_sphere("EQ012", 5, 20, 40))
    assert lined.lines["a0"][(0, 12)].rows() == [(1, 0), (0, 1)]


def test_kz4_mod7_chart():
    r = kz4_resolution(7, 20, 40)
    assert r.stages[0].degrees == [4, 8, 12, 16, 16]
    ch = ext_chart(r)
    assert stems_dict(ch, 4, 15) == {
        4: {s: 1 for s in range(21)},
        5: {}, 6: {}, 7: {},
        8: {s: 1 for s in range(21)},
        9: {}, 10: {}, 11: {},
        12: {s: 1 for s in range(21)},
        13: {}, 14: {}, 15: {},
    }


def test_smash_mod3_chart():
    sm = build_smash_square(3)
    r = minimal_resolution(sm, 20, 36)
    ch = ext_chart(r)
    assert ch.trusted_stem == 19
    assert stems_dict(ch, 8, 15) == {
        8: {s: 1 for s in range(21)},
        9: {}, 10: {}, 11: {},
        12: {0: 3, **{s: 2 for s in range(1, 21)}},
        13: {}, 14: {}, 15: {},
    }
    # one of the three stem-12 classes is killed by nothing and supports
    # no a0 line: an order-3 cyclic summand
    lined = structure_lines(r, cached_sphere("tildeA1", 3, 20, 36))
    assert lined.lines["a0"][(0, 12)].rows() == [(0, 1, 0), (0, 0, 1)]


def test_smash_mod5_chart():
    sm = build_smash_square(5)
    ch = ext_chart(minimal_resolution(sm, 20, 36))
    assert stems_dict(ch, 8, 15) == {
        8: {s: 1 for s in range(21)},
        9: {}, 10: {}, 11: {},
        12: {s: 2 for s in range(21)},
        13: {}, 14: {}, 15: {},
    }


# --------------------------------------------------------- change of rings


def test_change_of_rings_sphere():
    cr = change_of_rings_map(trivial_module(build_A_n(2), 0), 6, 16)
    assert cr.matrix(0, 0).rows() == [(1,)]
    assert cr.matrix(1, 1).rows() == [(1,)]
    assert cr.matrix(1, 2).rows() == [(1,)]
    assert cr.matrix(2, 2).rows() == [(1,)]
    # h2 has nowhere to go: no A(1) dot in (1, 4)
    assert cr.matrix(1, 4).nrows == 0
    assert cr.matrix(1, 4).ncols == 1


def test_free_A2_module_restricts_to_free_A1_module():
    fr = free_module(build_A_n(2))
    r = minimal_resolution(restrict(fr, build_A_n(1)), 3, 24)
    assert [st_.count for st_ in r.stages] == [8, 0, 0, 0]
    assert sorted(r.stages[0].degrees) == [0, 4, 6, 7, 10, 11, 13, 17]
    cr = change_of_rings_map(fr, 3, 24)
    assert cr.matrix(0, 0).rows() == [(1,)]


def test_change_of_rings_kz4_injective_through_stem_14():
    cr = change_of_rings_map(build_kz4(2), 16, 30)
    for (s, t), n in sorted(cr.big_res.dots().items()):
        if t - s <= 14:
            assert cr.matrix(s, t).rank() == n, (s, t)
    # and the bound is sharp: stem 15 already loses dots
    assert cr.matrix(2, 17).rank() < cr.big_res.dots()[(2, 17)]


def test_change_of_rings_rejects_mismatched_primes():
    from stringbordism.ext import algebra_inclusion
    with pytest.raises(ValueError):
        algebra_inclusion(get_algebra("tildeA1", 3), build_A_n(2))


def test_algebra_inclusion_is_multiplicative():
    from stringbordism.ext import algebra_inclusion
    small, big = build_A_n(1), build_A_n(2)
    incl = algebra_inclusion(small, big)
    p = 2
    for i in range(small.dim):
        for j in range(small.dim):
            want = {}
            for k, c in small.product(i, j).items():
                for b, c2 in incl[k].items():
                    want[b] = (want.get(b, 0) + c * c2) % p
            got = {}
            for bi, ci in incl[i].items():
                for bj, cj in incl[j].items():
                    for b, c in big.product(bi, bj).items():
                        got[b] = (got.get(b, 0) + ci * cj * c) % p
            assert {k: v for k, v in want.items() if v} == \
                   {k: v for k, v in got.items() if v}
