"""Minimal free resolutions and Ext charts over the finite subalgebras.

A minimal resolution ... -> F_1 -> F_0 -> M -> 0 by free graded modules is
built degree by degree: at each stage the kernel of the previous
differential is computed in every internal degree t up to the window edge,
and new generators are exactly the kernel vectors that survive reduction
modulo the augmentation-ideal multiples of generators already chosen.
Over a connected algebra the count of stage-s generators in degree t is
then dim Ext^{s,t}(M, F_p), independent of all choices.

Structure lines (multiplication by the Ext^1 classes of the trivial
module) are computed by lifting cocycles to chain maps into a resolution
of the trivial module, and the change-of-rings comparison map by lifting
the identity of the module between resolutions over nested algebras.
"""

from __future__ import annotations

from typing import Optional

from .algebra import AlgebraTable, build_A_n
from .fplin import Echelon, FpMatrix
from .gmod import GradedModule, restrict, trivial_module


class WindowError(RuntimeError):
    """A lift ran off the resolution window; enlarge max_s or max_t."""


class FreeStage:
    """A free module on generators in listed internal degrees."""

    def __init__(self, algebra: AlgebraTable):
        self.algebra = algebra
        self.degrees: list = []
        self.labels: list = []
        self._basis: dict = {}

    def add(self, degree: int, label: str):
        self.degrees.append(degree)
        self.labels.append(label)
        self._basis.clear()

    @property
    def count(self) -> int:
        return len(self.degrees)

    def basis(self, t: int) -> list:
        """Pairs (generator index, algebra basis index) in internal degree t."""
        got = self._basis.get(t)
        if got is None:
            got = []
            for k, dk in enumerate(self.degrees):
                for aidx in self.algebra.indices_in_degree(t - dk):
                    got.append((k, aidx))
            self._basis[t] = got
        return got

    def dim(self, t: int) -> int:
        return len(self.basis(t))

    def act(self, aidx: int, vec: dict) -> dict:
        """Left multiplication of vec = {(gen, basis): coeff} by basis
        element aidx."""
        alg = self.algebra
        p = alg.p
        out: dict = {}
        for (k, b), c in vec.items():
            for m, c2 in alg.product(aidx, b).items():
                key = (k, m)
                v = (out.get(key, 0) + c * c2) % p
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return out


class Resolution:
    """A minimal resolution of a module within a bidegree window.

    stages[s] is the free module F_s.  The differential carries the k-th
    generator of F_s to images[s][k]: for s >= 1 a dict over (generator,
    algebra basis) pairs of F_{s-1}, for s = 0 a coordinate tuple in the
    module, always in the generator's own internal degree.
    """

    def __init__(self, module: GradedModule, max_s: int, max_t: int):
        self.module = module
        self.algebra = module.algebra
        self.p = module.p
        self.max_s = max_s
        self.max_t = max_t
        self.stages: list = []
        self.images: list = []
        self._mat: dict = {}

    # -- structure accessors -------------------------------------------------

    def gen_count(self, s: int) -> int:
        return self.stages[s].count

    def gen_degree(self, s: int, k: int) -> int:
        return self.stages[s].degrees[k]

    def gens_at(self, s: int, t: int) -> list:
        return [k for k, d in enumerate(self.stages[s].degrees) if d == t]

    def dots(self) -> dict:
        out: dict = {}
        for s, st in enumerate(self.stages):
            for t in st.degrees:
                out[(s, t)] = out.get((s, t), 0) + 1
        return out

    # -- the differential ----------------------------------------------------

    def matrix(self, s: int, t: int) -> FpMatrix:
        """d_s in internal degree t, as (F_s)_t -> (F_{s-1})_t; stage 0 maps
        onto the module."""
        key = (s, t)
        got = self._mat.get(key)
        if got is not None:
            return got
        stage = self.stages[s]
        src = stage.basis(t)
        unit = self.algebra.unit_index
        cols = []
        if s == 0:
            nrows = self.module.dim(t)
            for k, aidx in src:
                if aidx == unit:
                    cols.append(list(self.images[0][k]))
                else:
                    mat = self.module.basis_action_matrix(aidx, stage.degrees[k])
                    cols.append(list(mat.mul_vec(self.images[0][k])))
        else:
            target = self.stages[s - 1]
            nrows = target.dim(t)
            pos = {pair: i for i, pair in enumerate(target.basis(t))}
            for k, aidx in src:
                img = self.images[s][k]
                vec = img if aidx == unit else target.act(aidx, img)
                col = [0] * nrows
                for pair, c in vec.items():
                    col[pos[pair]] = c
                cols.append(col)
        got = FpMatrix.from_columns(self.p, cols, nrows)
        self._mat[key] = got
        return got

    def image_coords(self, s: int, k: int) -> tuple:
        """The differential of generator k of stage s in target coordinates."""
        if s == 0:
            return tuple(self.images[0][k])
        t = self.stages[s].degrees[k]
        basis = self.stages[s - 1].basis(t)
        img = self.images[s][k]
        return tuple(img.get(pair, 0) for pair in basis)

    def __eq__(self, other):
        if not isinstance(other, Resolution):
            return NotImplemented
        if (self.max_s, self.max_t) != (other.max_s, other.max_t):
            return False
        if self.module != other.module or len(self.stages) != len(other.stages):
            return False
        for s, (mine, its) in enumerate(zip(self.stages, other.stages)):
            if mine.degrees != its.degrees or mine.labels != its.labels:
                return False
            for k in range(mine.count):
                if self.image_coords(s, k) != other.image_coords(s, k):
                    return False
        return True

    # -- consistency ---------------------------------------------------------

    def verify(self):
        """Check d after d = 0, minimality, and exactness in the window."""
        unit = self.algebra.unit_index
        for s in range(1, len(self.stages)):
            for k, img in enumerate(self.images[s]):
                for (_, aidx) in img:
                    if aidx == unit:
                        raise ValueError(
                            f"unit coefficient in d({self.stages[s].labels[k]})")
                t = self.stages[s].degrees[k]
                if any(self.matrix(s - 1, t).mul_vec(self.image_coords(s, k))):
                    raise ValueError(
                        f"d d != 0 on {self.stages[s].labels[k]}")
        for s in range(1, len(self.stages)):
            for t in range(self.max_t + 1):
                n = self.stages[s - 1].dim(t)
                if n == 0:
                    continue
                nullity = n - self.matrix(s - 1, t).rank()
                if self.matrix(s, t).rank() != nullity:
                    raise ValueError(f"not exact at stage {s - 1}, degree {t}")


def minimal_resolution(module: GradedModule, max_s: int, max_t: int) -> Resolution:
    """Resolve the module minimally through homological degree max_s and
    internal degree max_t."""
    if max_s < 0 or max_t < 0:
        raise ValueError("window bounds must be nonnegative")
    alg = module.algebra
    p = module.p
    res = Resolution(module, max_s, max_t)

    stage = FreeStage(alg)
    images: list = []
    res.stages.append(stage)
    res.images.append(images)
    for t in sorted(set(module.degrees)):
        if t > max_t:
            break
        n = module.dim(t)
        span = Echelon(p, n)
        for k in range(stage.count):
            tk = stage.degrees[k]
            for aidx in alg.indices_in_degree(t - tk):
                mat = module.basis_action_matrix(aidx, tk)
                span.add(mat.mul_vec(images[k]))
        for i in range(n):
            e = [0] * n
            e[i] = 1
            if not span.contains(e):
                stage.add(t, f"g0_{stage.count}")
                images.append(tuple(e))
                span.add(e)

    for s in range(1, max_s + 1):
        prev = res.stages[s - 1]
        stage = FreeStage(alg)
        images = []
        res.stages.append(stage)
        res.images.append(images)
        for t in range(max_t + 1):
            n = prev.dim(t)
            if n == 0:
                continue
            ker = res.matrix(s - 1, t).kernel_basis()
            if not ker:
                continue
            pos = {pair: i for i, pair in enumerate(prev.basis(t))}
            span = Echelon(p, n)
            for k in range(stage.count):
                tk = stage.degrees[k]
                for aidx in alg.indices_in_degree(t - tk):
                    vec = prev.act(aidx, images[k])
                    col = [0] * n
                    for pair, c in vec.items():
                        col[pos[pair]] = c
                    span.add(col)
            for v in ker:
                if not span.contains(v):
                    stage.add(t, f"g{s}_{stage.count}")
                    images.append({pair: c
                                   for pair, c in zip(prev.basis(t), v) if c})
                    span.add(v)
    return res


def sphere_resolution(algebra: AlgebraTable, max_s: int, max_t: int) -> Resolution:
    return minimal_resolution(trivial_module(algebra, 0), max_s, max_t)


# ---------------------------------------------------------------- Ext charts


class ExtChart:
    """Dots (Ext dimensions) and structure lines of one computation.

    dots maps (s, t) to a dimension; lines maps a class name to matrices
    per source bidegree, from the dots at (s, t) to those at
    (s+1, t+shift).  Dots in stems beyond trusted_stem come from truncated
    input and are suspect; trusted_stem None means everything is exact.
    """

    def __init__(self, p: int, algebra_name: str, module_name: str,
                 max_s: int, max_t: int, dots: dict,
                 trusted_stem: Optional[int] = None,
                 lines: Optional[dict] = None,
                 line_shifts: Optional[dict] = None):
        self.p = p
        self.algebra_name = algebra_name
        self.module_name = module_name
        self.max_s = max_s
        self.max_t = max_t
        self.dots = {k: v for k, v in dots.items() if v}
        self.trusted_stem = trusted_stem
        self.lines = lines if lines is not None else {}
        self.line_shifts = line_shifts if line_shifts is not None else {}

    def dot_count(self, s: int, t: int) -> int:
        return self.dots.get((s, t), 0)

    def stems(self) -> list:
        return sorted({t - s for (s, t) in self.dots})

    def dots_in_stem(self, n: int) -> dict:
        return {s: c for (s, t), c in sorted(self.dots.items()) if t - s == n}

    def trusted(self, s: int, t: int) -> bool:
        return self.trusted_stem is None or t - s <= self.trusted_stem

    def line_matrix(self, name: str, s: int, t: int) -> FpMatrix:
        q = self.line_shifts[name]
        got = self.lines[name].get((s, t))
        if got is not None:
            return got
        return FpMatrix.zeros(self.p, self.dot_count(s + 1, t + q),
                              self.dot_count(s, t))

    def __eq__(self, other):
        if not isinstance(other, ExtChart):
            return NotImplemented
        mine = (self.p, self.algebra_name, self.module_name, self.max_s,
                self.max_t, self.dots, self.trusted_stem, self.line_shifts,
                getattr(self, "window_caps", {}))
        its = (other.p, other.algebra_name, other.module_name, other.max_s,
               other.max_t, other.dots, other.trusted_stem, other.line_shifts,
               getattr(other, "window_caps", {}))
        if mine != its:
            return False
        for name in self.line_shifts:
            keys = set(self.lines.get(name, {})) | set(other.lines.get(name, {}))
            for s, t in keys:
                if self.line_matrix(name, s, t) != other.line_matrix(name, s, t):
                    return False
        return True


def ext_chart(r: Resolution) -> ExtChart:
    trusted = r.module.max_degree - 1 if r.module.truncated else None
    return ExtChart(r.p, r.algebra.name, r.module.name, r.max_s, r.max_t,
                    r.dots(), trusted)


def structure_lines(r: Resolution, r_sphere: Resolution) -> ExtChart:
    """The chart of r together with the action of the sphere's Ext^1.

    For h dual to the stage-1 sphere generator of internal degree q, the
    entry of h on dots is read off by lifting: the source-generator
    component of d(g'') is an augmentation-ideal element alpha; solving
    d_sphere y = alpha, the entry is the unit coefficient of y on the
    degree-q sphere generator.  Minimality makes the entry independent of
    the solution chosen.

    Computed classes: the (1,1) class (h0 at p=2, a0 otherwise) and, where
    the algebra has a degree-2 generator, the (1,2) class h1.
    """
    if (r_sphere.algebra.name, r_sphere.algebra.p) != (r.algebra.name, r.p):
        raise ValueError("sphere resolution is over a different algebra")
    chart = ext_chart(r)
    alg = r.algebra
    p = r.p
    unit = alg.unit_index
    sphere1 = r_sphere.stages[1]
    wanted = {1: "h0" if p == 2 else "a0"}
    if p == 2:
        wanted[2] = "h1"
    for j0, q in enumerate(sphere1.degrees):
        name = wanted.get(q)
        if name is None:
            continue
        sphere_mat = r_sphere.matrix(1, q)
        slot = sphere1.basis(q).index((j0, unit))
        aidxs = alg.indices_in_degree(q)
        apos = {a: i for i, a in enumerate(aidxs)}
        lines: dict = {}
        for (s, t) in sorted(r.dots()):
            if s + 1 >= len(r.stages) or t + q > r.max_t:
                continue
            row_gens = r.gens_at(s + 1, t + q)
            if not row_gens:
                continue
            col_gens = r.gens_at(s, t)
            rows = []
            for g2 in row_gens:
                img = r.images[s + 1][g2]
                row = []
                for g in col_gens:
                    alpha = [0] * len(aidxs)
                    for (k, aidx), c in img.items():
                        if k == g and aidx in apos:
                            alpha[apos[aidx]] = c
                    y = sphere_mat.preimage(alpha)
                    if y is None:
                        raise WindowError(f"no lift for {name} at {(s, t)}")
                    row.append(y[slot])
                rows.append(row)
            mat = FpMatrix(p, rows, ncols=len(col_gens))
            if not mat.is_zero():
                lines[(s, t)] = mat
        chart.lines[name] = lines
        chart.line_shifts[name] = q
    return chart


# ---------------------------------------------------------- change of rings


def algebra_inclusion(small: AlgebraTable, big: AlgebraTable) -> list:
    """Images of the small algebra's basis inside the big one, matching
    generators by label and extending multiplicatively along the small
    algebra's factorizations."""
    if small.p != big.p:
        raise ValueError("algebras live at different primes")
    p = big.p
    gen_basis = []
    for lbl in small.generator_labels:
        if lbl not in big.generator_labels:
            raise ValueError(f"{big.name} has no generator {lbl}")
        gen_basis.append(big.generators[big.generator_labels.index(lbl)])
    out: list = [None] * small.dim
    out[small.unit_index] = {big.unit_index: 1}

    def incl(i: int) -> dict:
        if out[i] is None:
            acc: dict = {}
            for coeff, gpos, y in small.factorization[i]:
                for yb, c2 in incl(y).items():
                    for zb, c3 in big.product(gen_basis[gpos], yb).items():
                        v = (acc.get(zb, 0) + coeff * c2 * c3) % p
                        if v:
                            acc[zb] = v
                        else:
                            acc.pop(zb, None)
            out[i] = acc
        return out[i]

    for i in range(small.dim):
        incl(i)
    return out


class ChangeOfRings:
    """The comparison map of Ext charts induced by a subalgebra inclusion,
    in the minimal-resolution dot bases."""

    def __init__(self, big_res: Resolution, small_res: Resolution, matrices: dict):
        self.big_res = big_res
        self.small_res = small_res
        self.matrices = matrices

    def matrix(self, s: int, t: int) -> FpMatrix:
        got = self.matrices.get((s, t))
        if got is not None:
            return got
        return FpMatrix.zeros(self.big_res.p,
                              len(self.small_res.gens_at(s, t)),
                              len(self.big_res.gens_at(s, t)))


def change_of_rings_map(module: GradedModule, max_s: int, max_t: int,
                        small: AlgebraTable = None,
                        big_res: Resolution = None,
                        small_res: Resolution = None) -> ChangeOfRings:
    """Ext over the module's algebra compared with Ext over a subalgebra
    (default A(1) inside A(2)).

    The identity of the module lifts to a chain map from the minimal
    small-algebra resolution into the restricted big resolution, which
    stays exact.  Unit coefficients of the lift on generators give the
    comparison matrices; minimality makes them independent of the lift.
    """
    big = module.algebra
    if small is None:
        small = build_A_n(1)
    if big_res is None:
        big_res = minimal_resolution(module, max_s, max_t)
    if small_res is None:
        small_res = minimal_resolution(restrict(module, small), max_s, max_t)
    incl = algebra_inclusion(small, big)
    p = module.p

    psi: list = []
    row = []
    for j in range(small_res.gen_count(0)):
        t = small_res.gen_degree(0, j)
        y = big_res.matrix(0, t).preimage(small_res.images[0][j])
        if y is None:
            raise WindowError(f"no stage-0 lift in degree {t}")
        row.append(y)
    psi.append(row)
    for s in range(1, min(len(small_res.stages), len(big_res.stages))):
        prev_big = big_res.stages[s - 1]
        row = []
        for j in range(small_res.gen_count(s)):
            t = small_res.gen_degree(s, j)
            w: dict = {}
            for (k2, bidx), c in small_res.images[s][j].items():
                t2 = small_res.gen_degree(s - 1, k2)
                base = {pair: v for pair, v in
                        zip(prev_big.basis(t2), psi[s - 1][k2]) if v}
                for ab, c2 in incl[bidx].items():
                    moved = base if ab == big.unit_index else prev_big.act(ab, base)
                    for pair, v in moved.items():
                        u = (w.get(pair, 0) + c * c2 * v) % p
                        if u:
                            w[pair] = u
                        else:
                            w.pop(pair, None)
            coords = [0] * prev_big.dim(t)
            pos = {pair: i for i, pair in enumerate(prev_big.basis(t))}
            for pair, v in w.items():
                coords[pos[pair]] = v
            y = big_res.matrix(s, t).preimage(coords)
            if y is None:
                raise WindowError(f"no stage-{s} lift in degree {t}")
            row.append(y)
        psi.append(row)

    unit = big.unit_index
    matrices = {}
    for s in range(len(psi)):
        stage = big_res.stages[s]
        for t in sorted(set(stage.degrees)):
            big_gens = big_res.gens_at(s, t)
            small_gens = small_res.gens_at(s, t)
            basis = stage.basis(t)
            slots = [basis.index((g, unit)) for g in big_gens]
            rows = [[psi[s][j][slot] for slot in slots] for j in small_gens]
            matrices[(s, t)] = FpMatrix(p, rows, ncols=len(big_gens))
    return ChangeOfRings(big_res, small_res, matrices)
