"""Graded modules over a finite subalgebra of the Steenrod algebra.

A module is a graded F_p vector space with a chosen basis in each degree
and, for each algebra generator, the matrix of its action out of each
degree.  The action of a general algebra element is recovered through the
factorization stored in the algebra table, so consistency of the data
reduces to the relations checked by validate().

A module may be a truncation: degrees above max_degree are cut off.  The
result is still an honest module (the quotient by the submodule of higher
degrees), which is what makes truncated computations meaningful: Ext of
the quotient agrees with Ext of the full module in stems t - s up to
max_degree - 1.
"""

from __future__ import annotations

from typing import Optional

from .algebra import AlgebraTable
from .fplin import FpMatrix


class GradedModule:

    def __init__(self, algebra: AlgebraTable, degrees, labels, actions,
                 max_degree: int, truncated: bool = False, name: str = ""):
        if len(degrees) != len(labels):
            raise ValueError("degrees and labels disagree in length")
        self.algebra = algebra
        self.p = algebra.p
        self.degrees = list(degrees)
        self.labels = list(labels)
        self.actions = actions
        self.max_degree = max_degree
        self.truncated = truncated
        self.name = name
        by_deg: dict = {}
        for i, d in enumerate(self.degrees):
            if d > max_degree:
                raise ValueError(f"basis element {labels[i]} above max_degree")
            by_deg.setdefault(d, []).append(i)
        self._by_degree = by_deg
        self._pos = {}
        for d, idxs in by_deg.items():
            for k, i in enumerate(idxs):
                self._pos[i] = (d, k)
        self._basis_act: dict = {}

    # -- degreewise view -----------------------------------------------------

    @property
    def total_dim(self) -> int:
        return len(self.degrees)

    def dim(self, d: int) -> int:
        return len(self._by_degree.get(d, []))

    def indices_in_degree(self, d: int) -> list:
        return self._by_degree.get(d, [])

    def labels_in_degree(self, d: int) -> list:
        return [self.labels[i] for i in self.indices_in_degree(d)]

    def position(self, index: int) -> tuple:
        """(degree, position within that degree) of a global basis index."""
        return self._pos[index]

    def degree_dims(self) -> dict:
        return {d: len(ix) for d, ix in sorted(self._by_degree.items()) if ix}

    @property
    def min_degree(self) -> int:
        return min(self.degrees) if self.degrees else self.max_degree

    # -- the action ----------------------------------------------------------

    def action_matrix(self, gpos: int, d: int) -> FpMatrix:
        """Matrix of the gpos-th algebra generator out of degree d."""
        m = self.actions.get(gpos, {}).get(d)
        if m is not None:
            return m
        target = d + self.algebra.gen_degree(gpos)
        return FpMatrix.zeros(self.p, self.dim(target), self.dim(d))

    def basis_action_matrix(self, index: int, d: int) -> FpMatrix:
        """Matrix of the algebra basis element `index` out of degree d."""
        alg = self.algebra
        if index == alg.unit_index:
            return FpMatrix.identity(self.p, self.dim(d))
        key = (index, d)
        out = self._basis_act.get(key)
        if out is None:
            target = d + alg.degrees[index]
            out = FpMatrix.zeros(self.p, self.dim(target), self.dim(d))
            for coeff, gpos, c in alg.factorization[index]:
                inner = self.basis_action_matrix(c, d)
                step = self.action_matrix(gpos, d + alg.degrees[c])
                out = out + (step @ inner).scale(coeff)
            self._basis_act[key] = out
        return out

    def element_action_matrix(self, elt: dict, d: int, target_degree: int) -> FpMatrix:
        out = FpMatrix.zeros(self.p, self.dim(target_degree), self.dim(d))
        for index, coeff in elt.items():
            if d + self.algebra.degrees[index] != target_degree:
                raise ValueError("inhomogeneous element action")
            out = out + self.basis_action_matrix(index, d).scale(coeff)
        return out

    def __eq__(self, other):
        """Structural equality: same basis bookkeeping and the same action
        of every algebra generator (zero matrices compare equal whether
        stored or implied)."""
        if not isinstance(other, GradedModule):
            return NotImplemented
        mine = (self.algebra.name, self.p, self.degrees, self.labels,
                self.max_degree, self.truncated, self.name)
        its = (other.algebra.name, other.p, other.degrees, other.labels,
               other.max_degree, other.truncated, other.name)
        if mine != its:
            return False
        for gpos in range(len(self.algebra.generators)):
            for d in set(self.degrees):
                if self.action_matrix(gpos, d) != other.action_matrix(gpos, d):
                    return False
        return True

    # -- consistency ---------------------------------------------------------

    def validate(self):
        """Check shapes and the relations (g a) x = g (a x) for every
        generator g and algebra basis element a.  Raises ValueError naming
        the first few violations."""
        alg = self.algebra
        bad = []
        for gpos in range(len(alg.generators)):
            gdeg = alg.gen_degree(gpos)
            for d, m in self.actions.get(gpos, {}).items():
                if (m.p, m.nrows, m.ncols) != (self.p, self.dim(d + gdeg), self.dim(d)):
                    bad.append(f"action of {alg.generator_labels[gpos]} out of "
                               f"degree {d} has wrong shape")
        if not bad:
            for gpos in range(len(alg.generators)):
                glabel = alg.generator_labels[gpos]
                gdeg = alg.gen_degree(gpos)
                for a in range(alg.dim):
                    adeg = alg.degrees[a]
                    prod = {i: c for c, i in alg.mult[(gpos, a)]}
                    for d in sorted(self._by_degree):
                        lhs = self.action_matrix(gpos, d + adeg) @ self.basis_action_matrix(a, d)
                        rhs = self.element_action_matrix(prod, d, d + adeg + gdeg)
                        if lhs != rhs:
                            bad.append(f"{glabel}*{alg.labels[a]} fails out of degree {d}")
                        if len(bad) >= 10:
                            break
                    if bad:
                        break
                if bad:
                    break
        if bad:
            raise ValueError("module action is inconsistent: " + "; ".join(bad))


# -- constructions -----------------------------------------------------------

def trivial_module(algebra: AlgebraTable, degree: int = 0, name: str = "sphere") -> GradedModule:
    actions = {gpos: {} for gpos in range(len(algebra.generators))}
    return GradedModule(algebra, [degree], [f"x{degree}"], actions,
                        max_degree=degree, truncated=False, name=name)


def free_module(algebra: AlgebraTable, degree: int = 0, name: str = "free") -> GradedModule:
    """The algebra as a module over itself, shifted up by `degree`."""
    degrees = [d + degree for d in algebra.degrees]
    actions: dict = {}
    for gpos in range(len(algebra.generators)):
        gdeg = algebra.gen_degree(gpos)
        acts: dict = {}
        for d in sorted(set(degrees)):
            src = algebra.indices_in_degree(d - degree)
            tgt = algebra.indices_in_degree(d - degree + gdeg)
            tpos = {a: k for k, a in enumerate(tgt)}
            cols = []
            for a in src:
                col = [0] * len(tgt)
                for coeff, b in algebra.mult[(gpos, a)]:
                    col[tpos[b]] = coeff
                cols.append(col)
            if cols and tgt:
                acts[d] = FpMatrix.from_columns(algebra.p, cols, len(tgt))
        actions[gpos] = acts
    return GradedModule(algebra, degrees, list(algebra.labels), actions,
                        max_degree=degree + algebra.top_degree, truncated=False, name=name)


def restrict(module: GradedModule, subalgebra: AlgebraTable) -> GradedModule:
    """The same underlying space, acted on through a smaller algebra whose
    generators are matched by label."""
    match = []
    for lbl in subalgebra.generator_labels:
        try:
            match.append(module.algebra.generator_labels.index(lbl))
        except ValueError:
            raise ValueError(f"generator {lbl} of {subalgebra.name} is not a "
                             f"generator of {module.algebra.name}") from None
    actions = {gpos: dict(module.actions.get(parent, {}))
               for gpos, parent in enumerate(match)}
    return GradedModule(subalgebra, module.degrees, module.labels, actions,
                        max_degree=module.max_degree, truncated=module.truncated,
                        name=module.name)


def suspend(module: GradedModule, k: int) -> GradedModule:
    actions = {gpos: {d + k: m for d, m in acts.items()}
               for gpos, acts in module.actions.items()}
    return GradedModule(module.algebra, [d + k for d in module.degrees],
                        module.labels, actions,
                        max_degree=module.max_degree + k,
                        truncated=module.truncated, name=module.name)


def truncate(module: GradedModule, max_degree: int) -> GradedModule:
    keep = [i for i, d in enumerate(module.degrees) if d <= max_degree]
    dropped = len(keep) < module.total_dim
    if not dropped and max_degree >= module.max_degree:
        return module
    degrees = [module.degrees[i] for i in keep]
    labels = [module.labels[i] for i in keep]
    actions: dict = {}
    for gpos, acts in module.actions.items():
        gdeg = module.algebra.gen_degree(gpos)
        actions[gpos] = {d: m for d, m in acts.items() if d + gdeg <= max_degree}
    return GradedModule(module.algebra, degrees, labels, actions,
                        max_degree=max_degree,
                        truncated=module.truncated or dropped, name=module.name)


def direct_sum(m1: GradedModule, m2: GradedModule, name: str = "") -> GradedModule:
    if m1.algebra is not m2.algebra:
        raise ValueError("direct sum needs a common algebra table")
    bounds = [m.max_degree for m in (m1, m2) if m.truncated]
    if bounds:
        max_degree = min(bounds)
        truncated = True
    else:
        max_degree = max(m1.max_degree, m2.max_degree)
        truncated = False
    a = truncate(m1, max_degree)
    b = truncate(m2, max_degree)
    degrees = a.degrees + b.degrees
    labels = a.labels + b.labels

    actions: dict = {}
    degl = sorted(set(degrees))
    for gpos in range(len(m1.algebra.generators)):
        gdeg = m1.algebra.gen_degree(gpos)
        acts = {}
        for d in degl:
            na = a.dim(d)
            nb = b.dim(d)
            ta, tb = a.dim(d + gdeg), b.dim(d + gdeg)
            if (na + nb) == 0 or (ta + tb) == 0:
                continue
            ma = a.action_matrix(gpos, d)
            mb = b.action_matrix(gpos, d)
            rows = []
            for i in range(ta):
                rows.append(list(ma.row(i)) + [0] * nb)
            for i in range(tb):
                rows.append([0] * na + list(mb.row(i)))
            acts[d] = FpMatrix(m1.p, rows, ncols=na + nb)
        actions[gpos] = acts
    return GradedModule(m1.algebra, degrees, labels, actions, max_degree,
                        truncated=truncated, name=name or f"{a.name}+{b.name}")


def tensor(m1: GradedModule, m2: GradedModule, max_degree: Optional[int] = None,
           name: str = "") -> GradedModule:
    """Tensor product over F_p with the diagonal action.

    The action of a generator g with diagonal sum g' x g'' on x tensor y is
    sum (-1)^(|g''| |x|) g'x tensor g''y.  The result is exact only through
    min over both orders of (max degree of one factor + bottom degree of
    the other); it is truncated there, or at the requested max_degree.
    """
    if m1.algebra is not m2.algebra:
        raise ValueError("tensor needs a common algebra table")
    alg = m1.algebra
    p = m1.p
    top = m1.max_degree + m2.max_degree
    bounds = []
    if m1.truncated:
        bounds.append(m1.max_degree + m2.min_degree)
    if m2.truncated:
        bounds.append(m2.max_degree + m1.min_degree)
    exact_to = min(bounds) if bounds else top
    cap = exact_to if max_degree is None else min(max_degree, exact_to)

    pairs = []      # global index -> (i, j)
    pair_pos: dict = {}
    degrees = []
    labels = []
    for d in range(cap + 1):
        for d1 in sorted(m1._by_degree):
            d2 = d - d1
            if m2.dim(d2) == 0:
                continue
            for i in m1.indices_in_degree(d1):
                for j in m2.indices_in_degree(d2):
                    pair_pos[(i, j)] = len(pairs)
                    pairs.append((i, j))
                    degrees.append(d)
                    labels.append(f"{m1.labels[i]}|{m2.labels[j]}")

    by_deg: dict = {}
    for gi, d in enumerate(degrees):
        by_deg.setdefault(d, []).append(gi)

    actions: dict = {}
    for gpos in range(len(alg.generators)):
        gdeg = alg.gen_degree(gpos)
        acts = {}
        for d, src in sorted(by_deg.items()):
            tgt = by_deg.get(d + gdeg, [])
            if not tgt:
                continue
            tpos = {g: k for k, g in enumerate(tgt)}
            cols = []
            for g in src:
                i, j = pairs[g]
                d1, k1 = m1.position(i)
                d2, k2 = m2.position(j)
                col = [0] * len(tgt)
                for coeff, aa, bb in alg.diagonal[gpos]:
                    da = alg.degrees[aa]
                    db = gdeg - da
                    acol = m1.basis_action_matrix(aa, d1).column(k1)
                    bcol = m2.basis_action_matrix(bb, d2).column(k2)
                    sign = (-1) ** (db * d1)
                    for k1t, ca in enumerate(acol):
                        if not ca:
                            continue
                        it = m1.indices_in_degree(d1 + da)[k1t]
                        for k2t, cb in enumerate(bcol):
                            if not cb:
                                continue
                            jt = m2.indices_in_degree(d2 + db)[k2t]
                            gt = pair_pos.get((it, jt))
                            if gt is None:
                                continue
                            col[tpos[gt]] = (col[tpos[gt]] + sign * coeff * ca * cb) % p
                cols.append(col)
            acts[d] = FpMatrix.from_columns(p, cols, len(tgt))
        actions[gpos] = acts

    truncated = bool(bounds) or cap < top
    return GradedModule(alg, degrees, labels, actions, cap, truncated=truncated,
                        name=name or f"{m1.name}|{m2.name}")


def split_by_involution(module: GradedModule, phi: dict) -> tuple:
    """Split a module over an odd prime along a commuting involution.

    phi maps each occupied degree to a square matrix with phi^2 = 1 that
    commutes with every generator action.  Returns the (+1, -1) eigenpart
    modules.
    """
    p = module.p
    if p == 2:
        raise ValueError("eigenspace splitting needs an odd prime")
    degl = sorted(module._by_degree)
    for d in degl:
        n = module.dim(d)
        f = phi.get(d)
        if f is None or (f.nrows, f.ncols) != (n, n):
            raise ValueError(f"involution missing or misshapen in degree {d}")
        if f @ f != FpMatrix.identity(p, n):
            raise ValueError(f"involution does not square to 1 in degree {d}")
    for gpos in range(len(module.algebra.generators)):
        gdeg = module.algebra.gen_degree(gpos)
        for d in degl:
            if module.dim(d + gdeg) == 0:
                continue
            act = module.action_matrix(gpos, d)
            if act @ phi[d] != phi.get(d + gdeg, FpMatrix.identity(p, 0)) @ act:
                raise ValueError(
                    f"involution does not commute with "
                    f"{module.algebra.generator_labels[gpos]} out of degree {d}")

    out = []
    for sign, tag in ((1, "s"), (p - 1, "a")):
        eigen: dict = {}
        for d in degl:
            n = module.dim(d)
            shifted = phi[d] + FpMatrix.identity(p, n).scale(-sign)
            eigen[d] = shifted.kernel_basis()
        degrees = []
        labels = []
        for d in degl:
            for k in range(len(eigen[d])):
                degrees.append(d)
                labels.append(f"{tag}{d}_{k}")
        solvers = {d: FpMatrix.from_columns(p, vecs, module.dim(d)).solver()
                   for d, vecs in eigen.items() if vecs}
        actions: dict = {}
        for gpos in range(len(module.algebra.generators)):
            gdeg = module.algebra.gen_degree(gpos)
            acts = {}
            for d in degl:
                src = eigen.get(d, [])
                tgt = eigen.get(d + gdeg, [])
                if not src or not tgt:
                    continue
                act = module.action_matrix(gpos, d)
                cols = []
                for v in src:
                    w = act.mul_vec(v)
                    x = solvers[d + gdeg].solve(w)
                    if x is None:
                        raise AssertionError("eigenspace not preserved")
                    cols.append(x)
                acts[d] = FpMatrix.from_columns(p, cols, len(tgt))
            actions[gpos] = acts
        out.append(GradedModule(module.algebra, degrees, labels, actions,
                                module.max_degree, truncated=module.truncated,
                                name=f"{module.name}{tag}"))
    return tuple(out)
