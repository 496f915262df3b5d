"""Finite subalgebras of the mod p Steenrod algebra as explicit tables.

Words of Steenrod operations are tuples of ints read left to right as
composition: at p = 2 the entry k means Sq^k, at an odd prime the entry 0
means the Bockstein and k > 0 means the power operation P^k.  Composites
are straightened into the admissible basis with the Adem relations.

A finite subalgebra is stored as an AlgebraTable: a graded basis with
labels, left multiplication by each algebra generator, a factorization of
every basis element as a sum of (generator times lower element) products,
and the diagonal of each generator.  That is exactly the data consumed by
free resolutions, module validation and tensor products.

Three families are built here:

* A(n) at p = 2, generated by Sq^1, ..., Sq^(2^n), via closure under left
  multiplication starting from the unit;
* E(Q0, Q1, Q2), the exterior algebra on the first three Milnor
  primitives, with |Q_i| = 2 p^i - 1;
* the 24 dimensional subalgebra of the mod 3 Steenrod algebra generated
  by the Bockstein and P^1, presented as the dual of the Hopf algebra
  F_3[xi1]/(xi1^3) tensor E(tau0, tau1, a2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .fplin import Echelon, FpMatrix

Word = tuple


def word_degree(p: int, word: Word) -> int:
    if p == 2:
        return sum(word)
    return sum(1 if e == 0 else 2 * e * (p - 1) for e in word)


def word_label(p: int, word: Word) -> str:
    if not word:
        return "1"
    if p == 2:
        return "".join(f"Sq{e}" for e in word)
    return "".join("b" if e == 0 else f"P{e}" for e in word)


def word_excess(p: int, word: Word) -> int:
    if not word:
        return 0
    head, rest = word[0], word[1:]
    if head == 0:
        return word_excess(p, rest) + 1
    if p == 2:
        return head - word_degree(2, rest)
    return 2 * head - word_degree(p, rest)


def _leftmost_violation(p: int, word: Word):
    for i in range(len(word) - 1):
        a, b = word[i], word[i + 1]
        if p == 2:
            if a < 2 * b:
                return i, "pp"
            continue
        if a == 0:
            if b == 0:
                return i, "bb"
            continue
        if b > 0:
            if a < p * b:
                return i, "pp"
        elif i + 2 < len(word) and a <= p * word[i + 2]:
            return i, "pbp"
    return None


def is_admissible(p: int, word: Word) -> bool:
    return _leftmost_violation(p, word) is None


def _binom(n: int, k: int) -> int:
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _rewrite(p: int, word: Word, i: int, kind: str):
    """One Adem rewrite of the violation starting at position i."""
    if kind == "bb":
        return []
    out = []
    if kind == "pp":
        a, b = word[i], word[i + 1]
        pre, post = word[:i], word[i + 2:]
        if p == 2:
            for c in range(a // 2 + 1):
                if _binom(b - c - 1, a - 2 * c) & 1:
                    mid = (a + b - c,) if c == 0 else (a + b - c, c)
                    out.append((1, pre + mid + post))
            return out
        for t in range(a // p + 1):
            coeff = (-1) ** (a + t) * _binom((p - 1) * (b - t) - 1, a - p * t) % p
            if coeff:
                mid = (a + b - t,) if t == 0 else (a + b - t, t)
                out.append((coeff, pre + mid + post))
        return out
    # kind == "pbp": the pair P^a beta P^b with a <= p b
    a, b = word[i], word[i + 2]
    pre, post = word[:i], word[i + 3:]
    for t in range(a // p + 1):
        c1 = (-1) ** (a + t) * _binom((p - 1) * (b - t), a - p * t) % p
        if c1:
            mid = (0, a + b) if t == 0 else (0, a + b - t, t)
            out.append((c1, pre + mid + post))
        c2 = (-1) ** (a + t - 1) * _binom((p - 1) * (b - t) - 1, a - p * t - 1) % p
        if c2:
            mid = (a + b, 0) if t == 0 else (a + b - t, 0, t)
            out.append((c2, pre + mid + post))
    return out


_ADEM_MEMO: dict = {}


def adem_reduce(p: int, word: Word) -> dict:
    """Expand a composite of operations in the admissible basis.

    Returns {admissible word: coefficient} with coefficients in 1..p-1.
    """
    key = (p, word)
    cached = _ADEM_MEMO.get(key)
    if cached is None:
        done: dict = {}
        pending = {word: 1}
        while pending:
            w, c = pending.popitem()
            hit = _leftmost_violation(p, w)
            if hit is None:
                done[w] = (done.get(w, 0) + c) % p
                continue
            sub = _ADEM_MEMO.get((p, w))
            if sub is not None:
                for w2, c2 in sub:
                    done[w2] = (done.get(w2, 0) + c * c2) % p
                continue
            for c2, w2 in _rewrite(p, w, *hit):
                cc = (pending.get(w2, 0) + c * c2) % p
                if cc:
                    pending[w2] = cc
                else:
                    pending.pop(w2, None)
        cached = tuple(sorted((w, c) for w, c in done.items() if c))
        _ADEM_MEMO[key] = cached
    return dict(cached)


def compose(p: int, x: dict, y: dict) -> dict:
    """Product of two admissible expansions, straightened again."""
    out: dict = {}
    for w1, c1 in x.items():
        for w2, c2 in y.items():
            for w, c in adem_reduce(p, w1 + w2).items():
                out[w] = (out.get(w, 0) + c1 * c2 * c) % p
    return {w: c for w, c in out.items() if c}


def admissible_words(p: int, max_degree: int) -> list:
    """All admissible words of degree at most max_degree, unit included.

    Sorted by degree, then lexicographically.
    """
    out = [()]
    stack = [()]
    while stack:
        w = stack.pop()
        d = word_degree(p, w)
        if p != 2 and d + 1 <= max_degree and (not w or w[0] != 0):
            nw = (0,) + w
            out.append(nw)
            stack.append(nw)
        if p == 2:
            lo = 1 if not w else 2 * w[0]
            hi = max_degree - d
        else:
            if not w:
                lo = 1
            elif w[0] == 0:
                lo = 1 if len(w) == 1 else p * w[1] + 1
            else:
                lo = p * w[0]
            hi = (max_degree - d) // (2 * (p - 1))
        for s in range(max(lo, 1), hi + 1):
            nw = (s,) + w
            out.append(nw)
            stack.append(nw)
    out.sort(key=lambda w: (word_degree(p, w), w))
    return out


def milnor_primitive(p: int, i: int) -> dict:
    """The Milnor primitive Q_i in the admissible basis, |Q_i| = 2p^i - 1."""
    if i == 0:
        return {((1,) if p == 2 else (0,)): 1}
    prev = milnor_primitive(p, i - 1)
    # Q_i is the commutator of Q_{i-1} with Sq^(2^i), resp. P^(p^(i-1)).
    pk = {((2 ** i,) if p == 2 else (p ** (i - 1),)): 1}
    out = compose(p, pk, prev)
    for w, c in compose(p, prev, pk).items():
        out[w] = (out.get(w, 0) - c) % p
    return {w: c for w, c in out.items() if c}


def _vec_label(p: int, vec: dict) -> str:
    if not vec:
        return "0"
    parts = []
    for w, c in sorted(vec.items(), reverse=True):
        lbl = word_label(p, w)
        parts.append(lbl if c == 1 else f"{c}*{lbl}")
    return "+".join(parts)


@dataclass(eq=False)
class AlgebraTable:
    """A finite graded algebra presented by a basis and generator actions.

    mult maps (generator position, basis index) to the expansion of the
    product (generator times element) as (coeff, index) pairs.
    factorization writes every basis element of positive degree as a sum
    of such products, (coeff, generator position, index) with the index of
    strictly lower degree; the unit has factorization None.  diagonal
    lists, per generator position, the terms (coeff, i, j) of the
    generator's coproduct in basis index pairs.
    """

    p: int
    name: str
    labels: list
    degrees: list
    generators: list
    generator_labels: list
    mult: dict
    factorization: list
    diagonal: dict
    unit_index: int = 0

    def __post_init__(self):
        by_deg: dict = {}
        for i, d in enumerate(self.degrees):
            by_deg.setdefault(d, []).append(i)
        self._by_degree = by_deg
        self._prod_memo: dict = {}

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def top_degree(self) -> int:
        return max(self.degrees)

    def indices_in_degree(self, d: int) -> list:
        return self._by_degree.get(d, [])

    def dim_in_degree(self, d: int) -> int:
        return len(self.indices_in_degree(d))

    def gen_degree(self, gpos: int) -> int:
        return self.degrees[self.generators[gpos]]

    def product(self, i: int, j: int) -> dict:
        """Product of basis elements i * j as {basis index: coefficient}."""
        key = (i, j)
        out = self._prod_memo.get(key)
        if out is None:
            if i == self.unit_index:
                out = {j: 1}
            elif j == self.unit_index:
                out = {i: 1}
            else:
                acc: dict = {}
                for coeff, gpos, c in self.factorization[i]:
                    for idx, cc in self.product(c, j).items():
                        for coeff2, idx2 in self.mult[(gpos, idx)]:
                            acc[idx2] = (acc.get(idx2, 0) + coeff * cc * coeff2) % self.p
                out = {k: v for k, v in acc.items() if v}
            self._prod_memo[key] = out
        return dict(out)

    def element_product(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for i, c1 in x.items():
            for j, c2 in y.items():
                for k, c3 in self.product(i, j).items():
                    out[k] = (out.get(k, 0) + c1 * c2 * c3) % self.p
        return {k: v for k, v in out.items() if v}

    def check_associativity(self):
        n = self.dim
        for i in range(n):
            for j in range(n):
                ij = self.product(i, j)
                for k in range(n):
                    left = self.element_product(ij, {k: 1})
                    right = self.element_product({i: 1}, self.product(j, k))
                    if left != right:
                        raise ValueError(
                            f"associativity fails on "
                            f"{self.labels[i]}, {self.labels[j]}, {self.labels[k]}")


def _expand_pairs(left: dict, right: dict, p: int) -> list:
    out = []
    for i, c1 in sorted(left.items()):
        for j, c2 in sorted(right.items()):
            c = c1 * c2 % p
            if c:
                out.append((c, i, j))
    return out


@lru_cache(maxsize=None)
def build_A_n(n: int) -> AlgebraTable:
    """The subalgebra A(n) of the mod 2 Steenrod algebra.

    Generated by Sq^1, Sq^2, ..., Sq^(2^n); dimension 2^((n+1)(n+2)/2).
    """
    p = 2
    gen_words = [(1 << r,) for r in range(n + 1)]
    gen_degs = [1 << r for r in range(n + 1)]

    words_cache: dict = {}

    def words_at(d):
        if d not in words_cache:
            words_cache[d] = [w for w in admissible_words(p, d) if word_degree(p, w) == d]
        return words_cache[d]

    def coords(vec, d):
        wl = words_at(d)
        pos = {w: k for k, w in enumerate(wl)}
        out = [0] * len(wl)
        for w, c in vec.items():
            out[pos[w]] = c
        return tuple(out)

    basis_vecs = [{(): 1}]
    degrees = [0]
    factorization: list = [None]
    echelons: dict = {}

    d = 1
    while d <= max(degrees) + max(gen_degs):
        for r, gw in enumerate(gen_words):
            src = d - gen_degs[r]
            if src < 0:
                continue
            for b in range(len(basis_vecs)):
                if degrees[b] != src:
                    continue
                u = compose(p, {gw: 1}, basis_vecs[b])
                if not u:
                    continue
                ech = echelons.setdefault(d, Echelon(p, len(words_at(d))))
                if ech.add(coords(u, d)):
                    basis_vecs.append(u)
                    degrees.append(d)
                    factorization.append(((1, r, b),))
        d += 1

    expected = 2 ** ((n + 1) * (n + 2) // 2)
    if len(basis_vecs) != expected:
        raise AssertionError(f"A({n}) closure found {len(basis_vecs)} elements, expected {expected}")

    by_deg: dict = {}
    for i, dd in enumerate(degrees):
        by_deg.setdefault(dd, []).append(i)
    solvers = {}
    for dd, idxs in by_deg.items():
        cols = [coords(basis_vecs[i], dd) for i in idxs]
        solvers[dd] = (idxs, FpMatrix.from_columns(p, cols, len(words_at(dd))).solver())

    def express(vec, dd):
        if not vec:
            return {}
        idxs, sol = solvers[dd]
        x = sol.solve(coords(vec, dd))
        if x is None:
            raise AssertionError("element escapes the subalgebra")
        return {idxs[k]: c for k, c in enumerate(x) if c}

    generators = []
    for r, gw in enumerate(gen_words):
        expr = express({gw: 1}, gen_degs[r])
        if list(expr.values()) != [1]:
            raise AssertionError(f"Sq{gen_degs[r]} is not a basis element")
        generators.append(next(iter(expr)))

    mult = {}
    for r, gw in enumerate(gen_words):
        for b in range(len(basis_vecs)):
            u = compose(p, {gw: 1}, basis_vecs[b])
            expr = express(u, degrees[b] + gen_degs[r]) if u else {}
            mult[(r, b)] = tuple((c, i) for i, c in sorted(expr.items()))

    diagonal = {}
    for r, k in enumerate(gen_degs):
        acc: dict = {}
        for i in range(k + 1):
            left = {0: 1} if i == 0 else express({(i,): 1}, i)
            right = {0: 1} if i == k else express({(k - i,): 1}, k - i)
            for c, a, b in _expand_pairs(left, right, p):
                acc[(a, b)] = (acc.get((a, b), 0) + c) % p
        diagonal[r] = tuple((c, a, b) for (a, b), c in sorted(acc.items()) if c)

    return AlgebraTable(
        p=p,
        name=f"A{n}",
        labels=[_vec_label(p, v) for v in basis_vecs],
        degrees=degrees,
        generators=generators,
        generator_labels=[f"Sq{g}" for g in gen_degs],
        mult=mult,
        factorization=factorization,
        diagonal=diagonal,
    )


@lru_cache(maxsize=None)
def build_EQ(p: int) -> AlgebraTable:
    """The exterior algebra E(Q0, Q1, Q2) on the first three Milnor
    primitives inside the mod p Steenrod algebra."""
    qdeg = [2 * p ** i - 1 for i in range(3)]

    def mask_degree(m):
        return sum(qdeg[i] for i in range(3) if m >> i & 1)

    masks = sorted(range(8), key=lambda m: (mask_degree(m), m))
    idx_of = {m: i for i, m in enumerate(masks)}
    labels = ["".join(f"Q{i}" for i in range(3) if m >> i & 1) or "1" for m in masks]
    degrees = [mask_degree(m) for m in masks]

    mult = {}
    for g in range(3):
        for m in masks:
            if m >> g & 1:
                mult[(g, idx_of[m])] = ()
            else:
                sign = (-1) ** (m & ((1 << g) - 1)).bit_count() % p
                mult[(g, idx_of[m])] = ((sign, idx_of[m | 1 << g]),)

    factorization: list = [None] * 8
    for m in masks:
        if m == 0:
            continue
        low = (m & -m).bit_length() - 1
        factorization[idx_of[m]] = ((1, low, idx_of[m ^ (1 << low)]),)

    generators = [idx_of[1 << g] for g in range(3)]
    diagonal = {g: ((1, generators[g], 0), (1, 0, generators[g])) for g in range(3)}

    return AlgebraTable(
        p=p,
        name="EQ012",
        labels=labels,
        degrees=degrees,
        generators=generators,
        generator_labels=["Q0", "Q1", "Q2"],
        mult=mult,
        factorization=factorization,
        diagonal=diagonal,
    )


@lru_cache(maxsize=None)
def build_tilde_A1() -> AlgebraTable:
    """The 24 dimensional subalgebra of the mod 3 Steenrod algebra
    generated by the Bockstein and P^1.

    Built as the dual of B = F_3[xi1]/(xi1^3) tensor E(tau0, tau1, a2)
    with |xi1| = 4, |tau0| = 1, |tau1| = 5, |a2| = 9 and coproduct

        psi(xi1) = xi1 x 1 + 1 x xi1
        psi(tau0) = tau0 x 1 + 1 x tau0
        psi(tau1) = tau1 x 1 + xi1 x tau0 + 1 x tau1
        psi(a2)   = a2 x 1 + 1 x a2 + xi1 x tau1 - xi1^2 x tau0

    A basis element is the dual of a monomial xi1^i tau0^e0 tau1^e1
    a2^e2; the duals of tau0 and xi1 are the Bockstein and P^1.
    """
    p = 3

    def mdeg(m):
        return 4 * m[0] + m[1] + 5 * m[2] + 9 * m[3]

    def mparity(m):
        return (m[1] + m[2] + m[3]) & 1

    monos = [(i, e0, e1, e2)
             for i in range(3) for e0 in (0, 1) for e1 in (0, 1) for e2 in (0, 1)]
    monos.sort(key=lambda m: (mdeg(m), m))
    midx = {m: i for i, m in enumerate(monos)}

    def mono_mult(m1, m2):
        i = m1[0] + m2[0]
        if i > 2:
            return None
        for k in (1, 2, 3):
            if m1[k] and m2[k]:
                return None
        odd1 = [k for k in (1, 2, 3) if m1[k]]
        odd2 = [k for k in (1, 2, 3) if m2[k]]
        inv = sum(1 for x in odd1 for y in odd2 if y < x)
        m = (i, m1[1] | m2[1], m1[2] | m2[2], m1[3] | m2[3])
        return (-1) ** inv % p, m

    def tensor_mult(t1, t2):
        out: dict = {}
        for (a, b), c1 in t1.items():
            for (c, d), c2 in t2.items():
                r1 = mono_mult(a, c)
                r2 = mono_mult(b, d)
                if r1 is None or r2 is None:
                    continue
                s1, m1 = r1
                s2, m2 = r2
                sign = s1 * s2 * (-1) ** (mparity(b) * mparity(c))
                key = (m1, m2)
                v = (out.get(key, 0) + c1 * c2 * sign) % p
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return out

    one = (0, 0, 0, 0)
    xi1 = (1, 0, 0, 0)
    tau0 = (0, 1, 0, 0)
    tau1 = (0, 0, 1, 0)
    a2 = (0, 0, 0, 1)
    psi_gen = {
        xi1: {(xi1, one): 1, (one, xi1): 1},
        tau0: {(tau0, one): 1, (one, tau0): 1},
        tau1: {(tau1, one): 1, (xi1, tau0): 1, (one, tau1): 1},
        a2: {(a2, one): 1, (one, a2): 1, (xi1, tau1): 1, ((2, 0, 0, 0), tau0): p - 1},
    }

    def psi(m):
        acc = {(one, one): 1}
        for _ in range(m[0]):
            acc = tensor_mult(acc, psi_gen[xi1])
        for e, g in zip(m[1:], (tau0, tau1, a2)):
            if e:
                acc = tensor_mult(acc, psi_gen[g])
        return acc

    psi_table = {m: psi(m) for m in monos}

    # Dual product: the coefficient of u x v in psi(m) is the coefficient
    # of the dual of m in (dual of u)(dual of v).
    prod = {}
    for ui, u in enumerate(monos):
        for vi, v in enumerate(monos):
            target = {}
            duv = mdeg(u) + mdeg(v)
            for m in monos:
                if mdeg(m) != duv:
                    continue
                c = psi_table[m].get((u, v), 0)
                if c:
                    target[midx[m]] = c
            prod[(ui, vi)] = target

    def elt_mult(x, y):
        out: dict = {}
        for i, c1 in x.items():
            for j, c2 in y.items():
                for k, c3 in prod[(i, j)].items():
                    v = (out.get(k, 0) + c1 * c2 * c3) % p
                    if v:
                        out[k] = v
                    else:
                        out.pop(k, None)
        return out

    # Coassociativity of psi makes the dual product associative; verify
    # outright since the Koszul signs above are easy to get wrong.
    for i in range(24):
        for j in range(24):
            ij = prod[(i, j)]
            for k in range(24):
                if elt_mult(ij, {k: 1}) != elt_mult({i: 1}, prod[(j, k)]):
                    raise AssertionError(f"dual product not associative at {(i, j, k)}")

    def mono_label(m):
        parts = []
        if m[0]:
            parts.append("xi1" if m[0] == 1 else f"xi1^{m[0]}")
        for e, s in zip(m[1:], ("t0", "t1", "a2")):
            if e:
                parts.append(s)
        return "*".join(parts) if parts else "1"

    generators = [midx[tau0], midx[xi1]]
    gen_monos = [tau0, xi1]

    mult = {}
    for gpos, gidx in enumerate(generators):
        for j in range(24):
            mult[(gpos, j)] = tuple((c, k) for k, c in sorted(prod[(gidx, j)].items()))

    by_deg: dict = {}
    for i, m in enumerate(monos):
        by_deg.setdefault(mdeg(m), []).append(i)

    factorization: list = [None] * 24
    for dd in sorted(by_deg):
        if dd == 0:
            continue
        idxs = by_deg[dd]
        cands = []
        cols = []
        for gpos, gidx in enumerate(generators):
            gdeg = mdeg(gen_monos[gpos])
            for c in by_deg.get(dd - gdeg, []):
                vec = prod[(gidx, c)]
                cands.append((gpos, c))
                cols.append(tuple(vec.get(t, 0) for t in idxs))
        sol = FpMatrix.from_columns(p, cols, len(idxs)).solver()
        for row_pos, t in enumerate(idxs):
            x = sol.solve(tuple(int(k == row_pos) for k in range(len(idxs))))
            if x is None:
                raise AssertionError("dual algebra is not generated by b and P1")
            factorization[t] = tuple(
                (c, cands[k][0], cands[k][1]) for k, c in enumerate(x) if c)

    diagonal = {}
    for gpos, gm in enumerate(gen_monos):
        terms = []
        for u in monos:
            for v in monos:
                if mdeg(u) + mdeg(v) != mdeg(gm):
                    continue
                r = mono_mult(u, v)
                if r is not None and r[1] == gm and r[0]:
                    terms.append((r[0], midx[u], midx[v]))
        diagonal[gpos] = tuple(sorted(terms, key=lambda t: (t[1], t[2])))

    return AlgebraTable(
        p=p,
        name="tildeA1",
        labels=[mono_label(m) for m in monos],
        degrees=[mdeg(m) for m in monos],
        generators=generators,
        generator_labels=["b", "P1"],
        mult=mult,
        factorization=factorization,
        diagonal=diagonal,
    )


def get_algebra(name: str, p=None) -> AlgebraTable:
    if name in ("A0", "A1", "A2"):
        if p not in (None, 2):
            raise ValueError(f"{name} lives at p = 2, got p = {p}")
        return build_A_n(int(name[1]))
    if name == "tildeA1":
        if p not in (None, 3):
            raise ValueError(f"tildeA1 lives at p = 3, got p = {p}")
        return build_tilde_A1()
    if name == "EQ012":
        if p is None:
            raise ValueError("EQ012 needs a prime")
        return build_EQ(p)
    raise ValueError(f"unknown algebra {name!r}")


def default_algebra(p: int) -> AlgebraTable:
    """The subalgebra large enough to see tmf locally at p in our range."""
    if p == 2:
        return build_A_n(2)
    if p == 3:
        return build_tilde_A1()
    return build_EQ(p)
