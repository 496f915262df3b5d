"""Differentials on Ext charts and the abelian groups left at the end.

A differential script is a short human-readable list of d_r arrows between
chart classes.  Applying one imposes each arrow as a rank-one map between
cells, closes up under the h0/a0 and h1 actions (if d_r(x) = y then
d_r(hx) = hy whenever hx is still alive), and passes to homology page by
page.  Cells keep explicit representative vectors in the original dot
basis throughout, so structure lines stay usable on every page.

The end of the story is linear algebra over F_p[v0]: maximal v0-strings
in each stem become cyclic p-power summands, and strings running off the
top of the window become copies of Z_(p).  Gluing the per-prime answers
into integral groups is then a matter of matching free ranks and summing
torsion.
"""

from __future__ import annotations

from typing import Optional

from .ext import ExtChart
from .fplin import Echelon, FpMatrix


class ScriptError(ValueError):
    """A script that does not make sense on its chart."""


# ------------------------------------------------------------------ scripts


def _normal_selector(selector):
    if isinstance(selector, str):
        return selector
    stem, s, idx = selector
    if isinstance(idx, int):
        idx = ((1, idx),)
    return stem, s, tuple(idx)


class ScriptEntry:
    """One differential: d_page(source) = target.

    Selectors are (stem, filtration, index-tuple) triples; an index tuple
    with several entries means the sum of those dots.  Labels defined in
    the enclosing script may stand in for either side.
    """

    def __init__(self, page: int, source, target, note: str = ""):
        self.page = page
        self.source = source
        self.target = target
        self.note = note

    def __repr__(self):
        return f"d{self.page}: {self.source} -> {self.target}"

    def __eq__(self, other):
        if not isinstance(other, ScriptEntry):
            return NotImplemented
        return ((self.page, _normal_selector(self.source),
                 _normal_selector(self.target), self.note)
                == (other.page, _normal_selector(other.source),
                    _normal_selector(other.target), other.note))


class DifferentialScript:

    def __init__(self, prime: int, algebra_name: str, space: str,
                 entries=None, defines=None, notes=None):
        self.prime = prime
        self.algebra_name = algebra_name
        self.space = space
        self.entries = list(entries or [])
        self.defines = dict(defines or {})
        self.notes = list(notes or [])

    def __eq__(self, other):
        if not isinstance(other, DifferentialScript):
            return NotImplemented
        mine = (self.prime, self.algebra_name, self.space, self.entries,
                {k: _normal_selector(v) for k, v in self.defines.items()},
                self.notes)
        its = (other.prime, other.algebra_name, other.space, other.entries,
               {k: _normal_selector(v) for k, v in other.defines.items()},
               other.notes)
        return mine == its

    def resolve(self, selector) -> tuple:
        """A selector as a bare (stem, filtration, indices) triple."""
        seen = []
        while isinstance(selector, str):
            if selector not in self.defines:
                raise ScriptError(f"undefined label {selector!r}")
            if selector in seen:
                raise ScriptError(f"circular label {selector!r}")
            seen.append(selector)
            selector = self.defines[selector]
        stem, s, idx = selector
        if isinstance(idx, int):
            idx = ((1, idx),)
        return stem, s, tuple(idx)

    def check(self):
        for e in self.entries:
            if e.page < 2:
                raise ScriptError(f"page {e.page} below 2")
            n, s, _ = self.resolve(e.source)
            n2, s2, _ = self.resolve(e.target)
            if (n2, s2) != (n - 1, s + e.page):
                raise ScriptError(
                    f"entry {e!r} breaks the d_{e.page} bidegree pattern")
        return self


# ----------------------------------------------------- applying differentials


def _vector(chart: ExtChart, stem: int, s: int, idx: tuple) -> tuple:
    n = chart.dot_count(s, stem + s)
    if n == 0:
        raise ScriptError(f"no dots at stem {stem}, filtration {s}")
    vec = [0] * n
    for coeff, i in idx:
        if not 0 <= i < n:
            raise ScriptError(
                f"dot index {i} out of range at stem {stem}, filtration {s}")
        vec[i] = (vec[i] + coeff) % chart.p
    if not any(vec):
        raise ScriptError(f"zero class selected at stem {stem}, filtration {s}")
    return tuple(vec)


class _Cells:
    """Alive representatives and dead subspaces, cell by cell."""

    def __init__(self, chart: ExtChart):
        self.chart = chart
        self.p = chart.p
        self.alive = {}
        self.dead = {}
        self.polluted = set()
        for (s, t), n in chart.dots.items():
            self.alive[(s, t)] = [tuple(int(i == j) for i in range(n))
                                  for j in range(n)]

    def residue(self, cell, vec):
        ech = self.dead.get(cell)
        return tuple(ech.reduce(list(vec))) if ech is not None else tuple(vec)

    def act(self, name, cell, vec):
        """A structure class applied to a representative, reduced mod dead.

        Returns (target cell, image or None, whether the target is inside
        the window); outside the window nothing can be said about the
        image."""
        s, t = cell
        q = self.chart.line_shifts[name]
        target = (s + 1, t + q)
        if target[0] > self.chart.max_s or target[1] > self.chart.max_t:
            return target, None, False
        if target not in self.alive and target not in self.dead:
            return target, None, True
        mat = self.chart.line_matrix(name, s, t)
        if mat.nrows == 0:
            return target, None, True
        out = self.residue(target, mat.mul_vec(list(vec)))
        return target, (out if any(out) else None), True

    def kill(self, pairs):
        """Impose the rank-one maps v -> w grouped by source cell; returns
        the number of independent differentials fired per cell pair."""
        by_source: dict = {}
        for (a, v, b, w) in pairs:
            by_source.setdefault((a, b), []).append((v, w))
        fired = {}
        for (a, b), vw in sorted(by_source.items()):
            srcs = self.alive.get(a, [])
            if not srcs:
                raise ScriptError(f"no classes left at {a}")
            span = FpMatrix.from_columns(self.p, [list(u) for u in srcs],
                                         len(srcs[0]))
            rows = []
            for v, w in vw:
                coords = span.preimage(list(v))
                if coords is None:
                    raise ScriptError(f"source at {a} is not an alive class")
                rows.append((coords, w))
            dmat = FpMatrix(self.p, [c for c, _ in rows], ncols=len(srcs))
            kern = dmat.kernel_basis()
            if len(srcs) > len(kern):
                fired[(a, b)] = len(srcs) - len(kern)
            new_alive = []
            for kv in kern:
                vec = [0] * len(srcs[0])
                for j, c in enumerate(kv):
                    if c:
                        for i, x in enumerate(srcs[j]):
                            vec[i] = (vec[i] + c * x) % self.p
                new_alive.append(tuple(vec))
            self.alive[a] = new_alive
            width = len(vw[0][1])
            ech = self.dead.setdefault(b, Echelon(self.p, width))
            for v, w in vw:
                ech.add(list(w))
            probe = Echelon(self.p, width)
            out = []
            for u in self.alive.get(b, []):
                r = probe.reduce(ech.reduce(list(u)))
                if any(r):
                    probe.add(r)
                    out.append(tuple(r))
            self.alive[b] = out
        return fired

    def window_caps(self) -> dict:
        """Per-stem filtration caps below the polluted boundary cells."""
        caps = {}
        for s, t in self.polluted:
            stem = t - s
            caps[stem] = min(caps.get(stem, s - 1), s - 1)
        return caps

    def to_chart(self) -> ExtChart:
        chart = self.chart
        dots = {cell: len(v) for cell, v in self.alive.items() if v}
        lines = {}
        for name in chart.lines:
            sub = {}
            for cell, vecs in self.alive.items():
                if not vecs:
                    continue
                target, _, _ = self.act(name, cell, vecs[0])
                tvecs = self.alive.get(target, [])
                if not tvecs:
                    continue
                span = FpMatrix.from_columns(self.p, [list(u) for u in tvecs],
                                             len(tvecs[0]))
                cols = []
                for v in vecs:
                    _, hv, _ = self.act(name, cell, v)
                    if hv is None:
                        cols.append([0] * len(tvecs))
                        continue
                    coords = span.preimage(list(hv))
                    if coords is None:
                        raise ScriptError(
                            f"structure line leaves the surviving classes at {cell}")
                    cols.append(coords)
                mat = FpMatrix.from_columns(self.p, cols, len(tvecs))
                if not mat.is_zero():
                    sub[cell] = mat
            lines[name] = sub
        out = ExtChart(chart.p, chart.algebra_name, chart.module_name,
                       chart.max_s, chart.max_t, dots,
                       trusted_stem=chart.trusted_stem,
                       lines=lines, line_shifts=dict(chart.line_shifts))
        out.window_caps = self.window_caps()
        return out


def _closure(cells: _Cells, imposed):
    """All propagated pairs implied by the imposed ones, or None when the
    h-linearity requirement cannot be met."""
    pairs = []
    seen = set()
    queue = list(imposed)
    while queue:
        a, v, b, w = queue.pop(0)
        v = cells.residue(a, v)
        w = cells.residue(b, w)
        if not any(v):
            if any(w):
                return None
            continue
        if not any(w):
            return None
        key = (a, v, b, w)
        if key in seen:
            continue
        seen.add(key)
        pairs.append((a, v, b, w))
        for name in cells.chart.line_shifts:
            a2, hv, in_a = cells.act(name, a, v)
            b2, hw, in_b = cells.act(name, b, w)
            if hv is None:
                if in_a and hw is not None:
                    return None
                continue
            if hw is None:
                if not in_b:
                    # the arrow out of a2 leaves the window, so the fate
                    # of everything at and above a2 in its stem is unknown
                    cells.polluted.add(a2)
                continue
            queue.append((a2, hv, b2, hw))
    return pairs


def apply_script(chart: ExtChart, script: DifferentialScript) -> ExtChart:
    """The E-infinity chart after the scripted differentials.

    Entries are imposed page by page and closed up under the structure
    lines before anything is removed, so each page's kills are computed
    from a consistent set of arrows.  Raises ScriptError on a selector
    that misses the chart, a bidegree slip, or an arrow that contradicts
    h-linearity.
    """
    script.check()
    if script.prime != chart.p:
        raise ScriptError("script and chart primes differ")
    if script.algebra_name != chart.algebra_name:
        raise ScriptError("script and chart algebras differ")
    if script.space != chart.module_name:
        raise ScriptError(f"script targets {script.space!r}, "
                          f"chart is {chart.module_name!r}")
    cells = _Cells(chart)
    total = 0
    for page in sorted({e.page for e in script.entries}):
        imposed = []
        for e in script.entries:
            if e.page != page:
                continue
            n, s, idx = script.resolve(e.source)
            n2, s2, idx2 = script.resolve(e.target)
            a, b = (s, n + s), (s2, n2 + s2)
            imposed.append((a, _vector(chart, n, s, idx),
                            b, _vector(chart, n2, s2, idx2)))
        pairs = _closure(cells, imposed)
        if pairs is None:
            raise ScriptError(f"page-{page} differentials are not h-linear")
        total += sum(cells.kill(pairs).values())
    out = cells.to_chart()
    out.script_report = {"fired": total, "entries": len(script.entries)}
    return out


# -------------------------------------------------------------- group tables


class GroupTable:
    """Finitely generated abelian groups, one per stem.

    groups maps a stem to (free rank, sorted tuple of cyclic torsion
    orders).  prime tags a local table (free summands Z_(p), torsion
    orders powers of p); prime None means integral.  Distinct v0-strings
    are treated as direct summands; every assembly in range rests on the
    no-extensions behavior of its chart, recorded in `assumptions`.
    """

    def __init__(self, prime: Optional[int], groups: dict, assumptions=()):
        self.prime = prime
        self.groups = {k: (r, tuple(sorted(tors)))
                       for k, (r, tors) in groups.items()}
        self.assumptions = tuple(assumptions)

    def rank(self, stem: int) -> int:
        return self.groups.get(stem, (0, ()))[0]

    def torsion(self, stem: int) -> tuple:
        return self.groups.get(stem, (0, ()))[1]

    def stems(self) -> list:
        return sorted(self.groups)

    def describe(self, stem: int) -> str:
        rank, tors = self.groups.get(stem, (0, ()))
        free = "Z" if self.prime is None else f"Z_({self.prime})"
        parts = []
        if rank == 1:
            parts.append(free)
        elif rank > 1:
            parts.append(f"{free}^{rank}")
        parts.extend(f"Z/{n}" for n in tors)
        return " + ".join(parts) if parts else "0"

    def __eq__(self, other):
        return (isinstance(other, GroupTable)
                and (self.prime, self.groups) == (other.prime, other.groups))

    def __repr__(self):
        body = ", ".join(f"{k}: {self.describe(k)}" for k in self.stems())
        tag = "integral" if self.prime is None else f"p={self.prime}"
        return f"GroupTable({tag}; {body})"


class AssemblyError(RuntimeError):
    """A v0-string that the window cannot classify."""


def assemble_plocal(einf: ExtChart, stems, tower_margin: int = 6) -> GroupTable:
    """Groups per stem from the v0-string decomposition of an E-infinity
    chart.

    A maximal string of length l lying inside the window contributes
    Z/p^l; a string running into the top of the window is a tower,
    contributing Z_(p), provided it persists for at least tower_margin
    filtrations (shorter top-touching strings raise AssemblyError: the
    window is too small to tell a tower from long torsion).  A scripted
    chart may carry per-stem window_caps where differentials ran off the
    top edge; those filtrations are excluded.
    """
    p = einf.p
    h = "h0" if p == 2 else "a0"
    if h not in einf.line_shifts:
        raise AssemblyError(f"chart carries no {h} lines")
    caps = getattr(einf, "window_caps", {})
    groups = {}
    for k in stems:
        if not einf.trusted(0, k):
            raise AssemblyError(f"stem {k} is outside the trusted range")
        top = min(einf.max_s, einf.max_t - k, caps.get(k, einf.max_s))
        dims = [einf.dot_count(s, k + s) for s in range(top + 1)]
        mats = [einf.line_matrix(h, s, k + s) for s in range(top)]

        def composite_rank(s, j):
            if j == 0:
                return dims[s]
            if s + j > top:
                return 0
            m = mats[s]
            for i in range(1, j):
                m = mats[s + i] @ m
            return m.rank()

        rank = 0
        torsion = []
        for s in range(top + 1):
            if not dims[s]:
                continue
            for length in range(1, top - s + 2):
                blocks = (composite_rank(s, length - 1)
                          - composite_rank(s, length))
                if s > 0:
                    blocks -= (composite_rank(s - 1, length)
                               - composite_rank(s - 1, length + 1))
                if blocks <= 0:
                    continue
                if s + length - 1 >= top:
                    if length < tower_margin:
                        raise AssemblyError(
                            f"stem {k}: string of length {length} touches the "
                            "window top; enlarge the window")
                    rank += blocks
                else:
                    torsion.extend([p ** length] * blocks)
        groups[k] = (rank, tuple(torsion))
    return GroupTable(p, groups, assumptions=("distinct v0-strings split",))


def torsion_free_ranks(table: GroupTable, shifts) -> dict:
    """The free-rank vector of a torsion-free local table, corrected for
    wedge summands of the target spectrum in the given degree shifts.

    With 6 inverted the relevant ring of coefficients is polynomial on
    generators in degrees 8 and 12 and has no torsion.  The chart only
    sees the generator matching v1 (degree 2p-2); each remaining monomial
    contributes a shifted copy of the same chart, so ranks add up over
    the shifts.
    """
    for k in table.stems():
        if table.torsion(k):
            raise ValueError(f"table has torsion at stem {k}")
    return {k: sum(table.rank(k - d) for d in shifts) for k in table.stems()}


def wedge_shifts(p: int, top: int) -> tuple:
    """Degrees of the wedge summands missed by the chart at a prime
    above 3, up to the given stem."""
    if p <= 3:
        raise ValueError("the charts at 2 and 3 already see everything")
    step = 12 if 2 * (p - 1) == 8 else 8
    return tuple(range(0, top + 1, step))


def integral_table(tables, ranks: dict) -> GroupTable:
    """Integral groups from local tables at 2, 3, 5 and a torsion-free
    rank vector covering the remaining primes.

    The free rank must agree across all inputs stem by stem; the torsion
    is the direct sum of the local torsion."""
    stems = sorted(ranks)
    groups = {}
    for k in stems:
        rank = ranks[k]
        torsion = []
        for table in tables:
            if table.rank(k) != rank:
                raise ValueError(
                    f"free rank at stem {k} differs: {table.rank(k)} at "
                    f"p={table.prime} against {rank}")
            torsion.extend(table.torsion(k))
        groups[k] = (rank, tuple(torsion))
    assumptions = sorted({a for t in tables for a in t.assumptions})
    return GroupTable(None, groups, assumptions=assumptions)


# ------------------------------------------------------------------ forcing


def _nonzero_vectors(p, n):
    if n == 0:
        return
    vec = [0] * n
    total = p ** n
    for code in range(1, total):
        x = code
        for i in range(n):
            vec[i] = x % p
            x //= p
        # normalize: first nonzero coefficient 1, one vector per line
        lead = next(c for c in vec if c)
        if lead == 1:
            yield tuple(vec)


def _index_expr(vec) -> tuple:
    return tuple((c, i) for i, c in enumerate(vec) if c)


def force_differentials(chart: ExtChart, constraints: GroupTable,
                        max_entries: int = 2,
                        max_page: Optional[int] = None) -> list:
    """Every h-linear differential pattern whose E-infinity matches the
    constrained stems, one representative script per pattern.

    Candidate arrows run over pairs of nonzero classes in cells whose
    source or target stem is constrained, on pages 2 up to max_page
    (default: the chart height).  Each subset of at most max_entries
    arrows is closed up under the structure lines and applied; those
    whose assembled groups agree with the constraints on every
    constrained stem are kept.  Patterns are compared by their full set
    of fired arrows, so scripts differing only in the generator chosen
    within a cell count once.  An empty result signals a chart or
    constraint error.
    """
    if constraints.prime != chart.p:
        raise ValueError("constraints are at the wrong prime")
    stems = constraints.stems()
    if max_page is None:
        max_page = chart.max_s
    wanted = set(stems) | {k + 1 for k in stems}
    candidates = []
    for (s, t), n in sorted(chart.dots.items()):
        stem = t - s
        if stem not in wanted or not chart.trusted(s, t):
            continue
        for r in range(2, max_page + 1):
            cell2 = (s + r, t + r - 1)
            m = chart.dots.get(cell2, 0)
            if not m:
                continue
            for v in _nonzero_vectors(chart.p, n):
                for w in _nonzero_vectors(chart.p, m):
                    candidates.append((r, (s, t), v, cell2, w))

    def subsets(pool, size):
        if size == 0:
            yield ()
            return
        for i, item in enumerate(pool):
            for rest in subsets(pool[i + 1:], size - 1):
                yield (item,) + rest

    found = {}
    for count in range(max_entries + 1):
        for chosen in subsets(candidates, count):
            cells = _Cells(chart)
            fired_log = []
            ok = True
            for page in sorted({r for r, *_ in chosen}):
                imposed = [(a, v, b, w) for r, a, v, b, w in chosen
                           if r == page]
                pairs = _closure(cells, imposed)
                if pairs is None:
                    ok = False
                    break
                killed = cells.kill(pairs)
                fired_log.extend((page, a, b, n)
                                 for (a, b), n in sorted(killed.items()))
            if not ok:
                continue
            einf = cells.to_chart()
            try:
                table = assemble_plocal(einf, stems)
            except AssemblyError:
                continue
            if any(table.groups.get(k) != constraints.groups.get(k)
                   for k in stems):
                continue
            signature = frozenset(fired_log)
            if signature in found:
                continue
            entries = [
                ScriptEntry(r, (t - s, s, _index_expr(v)),
                            (t2 - s2, s2, _index_expr(w)), "forced")
                for r, (s, t), v, (s2, t2), w in chosen]
            found[signature] = DifferentialScript(
                chart.p, chart.algebra_name, chart.module_name,
                entries=entries).check()
    return [found[k] for k in sorted(found, key=sorted)]
