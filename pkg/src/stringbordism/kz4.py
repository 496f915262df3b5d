"""The mod p cohomology of K(Z,4) and of its smash square.

By Cartan and Serre, H*(K(Z,4); F_p) is the free graded commutative
algebra on classes P^I iota_4 for admissible I of excess less than 4 not
ending in the Bockstein (beta iota_4 = 0 since iota_4 is integral).  We
enumerate those generators through a degree horizon, take monomials as a
basis, and evaluate the Steenrod action with no further input: composites
are straightened with the Adem relations, products are expanded with the
Cartan formula (beta acting as a derivation), and the unstable relations
Sq^n x = x^2 for n = |x|, Sq^n x = 0 for n > |x| (odd p: P^k x = x^p for
2k = |x|, zero above) collapse what remains.

Degrees above the horizon are cut off; the result is the quotient by the
submodule of high degrees, which is an honest module (see gmod).
"""

from __future__ import annotations

from .algebra import (
    AlgebraTable,
    adem_reduce,
    admissible_words,
    default_algebra,
    is_admissible,
    milnor_primitive,
    word_degree,
    word_excess,
    word_label,
)
from .fplin import FpMatrix
from .gmod import GradedModule, tensor

IOTA_DEGREE = 4


def unstable_generator_words(p: int, max_degree: int):
    """Words I with I iota_4 a polynomial generator of degree <= max_degree.

    The empty word stands for iota_4 itself.  Admissible words of excess
    exactly 4 are excluded: they evaluate to p-th powers, not generators.
    """
    out = []
    for w in admissible_words(p, max_degree - IOTA_DEGREE):
        if w:
            last = w[-1]
            if (p == 2 and last == 1) or (p != 2 and last == 0):
                continue
            if word_excess(p, w) >= IOTA_DEGREE:
                continue
        out.append(w)
    return out


def generator_label(p: int, word) -> str:
    return "i4" if not word else word_label(p, word) + "i4"


class UnstableModel:
    """Monomial basis of the reduced cohomology, with operation evaluation.

    A monomial is a tuple of exponents over the generator list; at odd p
    the odd-degree generators are exterior.  Monomials above the horizon
    are treated as zero.
    """

    def __init__(self, p: int, max_degree: int = 16):
        if max_degree < IOTA_DEGREE:
            raise ValueError("horizon below the fundamental class")
        if max_degree > 16:
            raise ValueError("horizon above 16 is not supported")
        self.p = p
        self.max_degree = max_degree
        self.gen_words = unstable_generator_words(p, max_degree)
        self.gen_degrees = [IOTA_DEGREE + word_degree(p, w) for w in self.gen_words]
        self.gen_labels = [generator_label(p, w) for w in self.gen_words]
        self._word_index = {w: i for i, w in enumerate(self.gen_words)}
        self._iota = tuple(int(w == ()) for w in self.gen_words)
        self._entry_memo: dict = {}
        self.monomials = self._enumerate()

    def _enumerate(self):
        n = len(self.gen_words)
        out = []

        def extend(prefix, i, deg):
            if i == n:
                if any(prefix):
                    out.append(tuple(prefix))
                return
            cap = (self.max_degree - deg) // self.gen_degrees[i]
            if self.p != 2 and self.gen_degrees[i] % 2 == 1:
                cap = min(cap, 1)
            for e in range(cap + 1):
                extend(prefix + [e], i + 1, deg + e * self.gen_degrees[i])

        extend([], 0, 0)
        out.sort(key=lambda m: (self.monomial_degree(m), m))
        return out

    def monomial_degree(self, m) -> int:
        return sum(e * d for e, d in zip(m, self.gen_degrees))

    def monomial_weight(self, m) -> int:
        return sum(m)

    def monomial_label(self, m) -> str:
        parts = []
        for e, lbl in zip(m, self.gen_labels):
            if e == 1:
                parts.append(lbl)
            elif e > 1:
                parts.append(f"{lbl}^{e}")
        return "*".join(parts)

    def monomial_product(self, m1, m2):
        """(sign, monomial) or None for zero (exterior square or horizon)."""
        p = self.p
        out = []
        inv = 0
        for i, (a, b) in enumerate(zip(m1, m2)):
            if p != 2 and self.gen_degrees[i] % 2 == 1:
                if a and b:
                    return None
                # Koszul sign: odd factors of m2 in earlier slots jump over
                # odd factors of m1 in later slots.
                if b:
                    inv += sum(m1[j] for j in range(i + 1, len(m1))
                               if self.gen_degrees[j] % 2 == 1)
            out.append(a + b)
        m = tuple(out)
        if self.monomial_degree(m) > self.max_degree:
            return None
        return (-1) ** inv % p, m

    def _mult_into(self, acc, left, right, coeff):
        for m1, c1 in left.items():
            for m2, c2 in right.items():
                r = self.monomial_product(m1, m2)
                if r is None:
                    continue
                sign, m = r
                v = (acc.get(m, 0) + coeff * c1 * c2 * sign) % self.p
                if v:
                    acc[m] = v
                else:
                    acc.pop(m, None)

    def _apply_pow(self, k: int, m) -> dict:
        if k == 0:
            return {m: 1}
        return self.apply_entry(k, m)

    def apply_entry(self, entry: int, m) -> dict:
        """One Steenrod generator entry (0 = Bockstein at odd p) applied to
        a monomial; returns {monomial: coefficient}."""
        key = (entry, m)
        out = self._entry_memo.get(key)
        if out is not None:
            return dict(out)
        p = self.p
        i = next(j for j, e in enumerate(m) if e)
        rest = m[:i] + (m[i] - 1,) + m[i + 1:]
        single = tuple(int(j == i) for j in range(len(m)))
        if any(rest):
            acc: dict = {}
            if entry == 0:
                # beta is a derivation with a sign past the first factor.
                gsign = (-1) ** self.gen_degrees[i] % p
                self._mult_into(acc, self.apply_entry(0, single), {rest: 1}, 1)
                self._mult_into(acc, {single: 1}, self.apply_entry(0, rest), gsign)
            else:
                for a in range(entry + 1):
                    self._mult_into(acc, self._apply_pow(a, single),
                                    self._apply_pow(entry - a, rest), 1)
            out = acc
        else:
            out = self._apply_to_generator(entry, i)
        self._entry_memo[key] = out
        return dict(out)

    def _apply_to_generator(self, entry: int, i: int) -> dict:
        p = self.p
        w = self.gen_words[i]
        d = self.gen_degrees[i]
        if entry > 0:
            top = entry if p == 2 else 2 * entry
            if top > d:
                return {}
            if top == d:
                sq = tuple((p if j == i else 0) for j in range(len(self.gen_words)))
                if self.monomial_degree(sq) > self.max_degree:
                    return {}
                return {sq: 1}
        u = (entry,) + w
        if is_admissible(p, u):
            if not w and ((p == 2 and entry == 1) or (p != 2 and entry == 0)):
                return {}          # beta iota_4 = 0
            if word_excess(p, u) >= IOTA_DEGREE:
                # Only reachable by a Bockstein raising the excess to 4,
                # which first happens above our supported horizon.
                raise NotImplementedError(f"unhandled unstable case {u}")
            if IOTA_DEGREE + word_degree(p, u) > self.max_degree:
                return {}
            gi = self._word_index.get(u)
            if gi is None:
                raise AssertionError(f"missing generator for admissible {u}")
            return {tuple(int(j == gi) for j in range(len(self.gen_words))): 1}
        out: dict = {}
        for word, c in adem_reduce(p, u).items():
            for m2, c2 in self.apply_word(word, {self._iota: 1}).items():
                v = (out.get(m2, 0) + c * c2) % p
                if v:
                    out[m2] = v
                else:
                    out.pop(m2, None)
        return out

    def apply_word(self, word, element: dict) -> dict:
        val = dict(element)
        for entry in reversed(word):
            nxt: dict = {}
            for m, c in val.items():
                for m2, c2 in self.apply_entry(entry, m).items():
                    v = (nxt.get(m2, 0) + c * c2) % self.p
                    if v:
                        nxt[m2] = v
                    else:
                        nxt.pop(m2, None)
            val = nxt
        return val

    def apply_element(self, op: dict, element: dict) -> dict:
        out: dict = {}
        for word, c in op.items():
            for m, c2 in self.apply_word(word, element).items():
                v = (out.get(m, 0) + c * c2) % self.p
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return out


def _operation_for_label(p: int, label: str) -> dict:
    """The algebra generator as an element of the Steenrod algebra."""
    if label.startswith("Sq"):
        return {(int(label[2:]),): 1}
    if label == "b":
        return {(0,): 1}
    if label.startswith("P"):
        return {(int(label[1:]),): 1}
    if label.startswith("Q"):
        return milnor_primitive(p, int(label[1:]))
    raise ValueError(f"no operation known for generator {label}")


def build_kz4(p: int, max_degree: int = 16, algebra: AlgebraTable = None) -> GradedModule:
    """H~*(K(Z,4); F_p) through the horizon, over the given finite algebra
    (default: the one matching tmf at p)."""
    if algebra is None:
        algebra = default_algebra(p)
    if algebra.p != p:
        raise ValueError(f"algebra {algebra.name} lives at p = {algebra.p}")
    model = UnstableModel(p, max_degree)
    monos = model.monomials
    degrees = [model.monomial_degree(m) for m in monos]
    labels = [model.monomial_label(m) for m in monos]
    index = {m: i for i, m in enumerate(monos)}
    by_deg: dict = {}
    for i, d in enumerate(degrees):
        by_deg.setdefault(d, []).append(i)

    actions: dict = {}
    for gpos, glabel in enumerate(algebra.generator_labels):
        op = _operation_for_label(p, glabel)
        gdeg = algebra.gen_degree(gpos)
        acts = {}
        for d, src in sorted(by_deg.items()):
            tgt = by_deg.get(d + gdeg, [])
            if not tgt:
                continue
            tpos = {g: k for k, g in enumerate(tgt)}
            cols = []
            for gi in src:
                col = [0] * len(tgt)
                for m2, c in model.apply_element(op, {monos[gi]: 1}).items():
                    col[tpos[index[m2]]] = c
                cols.append(col)
            acts[d] = FpMatrix.from_columns(p, cols, len(tgt))
        actions[gpos] = acts

    module = GradedModule(algebra, degrees, labels, actions, max_degree,
                          truncated=True, name="kz4")
    module.monomial_weights = [model.monomial_weight(m) for m in monos]
    return module


def build_smash_square(p: int, max_degree: int = 16,
                       algebra: AlgebraTable = None) -> GradedModule:
    """The reduced cohomology of K(Z,4) smash K(Z,4): the tensor square of
    the augmentation ideal, exact through max_degree + 4."""
    half = build_kz4(p, max_degree, algebra)
    out = tensor(half, half, name="kz4smash")
    out.monomial_weights = None
    return out


def parity_involution(module: GradedModule) -> dict:
    """The involution induced by -1 on K(Z,4): a monomial in the unstable
    generators scales by (-1)^(number of factors).  Only meaningful at odd
    primes, where it splits the module."""
    p = module.p
    weights = getattr(module, "monomial_weights", None)
    if weights is None:
        raise ValueError("module does not carry monomial weights")
    phi = {}
    for d in sorted(set(module.degrees)):
        idxs = module.indices_in_degree(d)
        rows = []
        for k, i in enumerate(idxs):
            row = [0] * len(idxs)
            row[k] = (-1) ** weights[i] % p
            rows.append(row)
        phi[d] = FpMatrix(p, rows, ncols=len(idxs))
    return phi
