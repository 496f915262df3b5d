"""Versioned text artifacts: modules, resolutions, charts, scripts, tables.

One value per file.  A header carries the format name, version, prime,
algebra, and content kind; the body is line-oriented records.  Rendering
is canonical (fixed key order, sorted records), so equal values produce
byte-identical files.  Parsing accepts blank lines and full-line comments
anywhere and reports malformed records by line number.
"""

from __future__ import annotations

from importlib import resources

from .adams import DifferentialScript, GroupTable, ScriptEntry
from .algebra import get_algebra
from .ext import ExtChart, FreeStage, Resolution
from .fplin import FpMatrix
from .gmod import GradedModule

FORMAT = "stringbordism artifact"
VERSION = 1
KINDS = ("module", "resolution", "chart", "script", "table")


class ParseError(ValueError):
    """A malformed artifact file; the message names the offending line."""


def artifact_kind(value) -> str:
    if isinstance(value, GradedModule):
        return "module"
    if isinstance(value, Resolution):
        return "resolution"
    if isinstance(value, ExtChart):
        return "chart"
    if isinstance(value, DifferentialScript):
        return "script"
    if isinstance(value, GroupTable):
        return "table"
    raise TypeError(f"no artifact kind for {type(value).__name__}")


# ------------------------------------------------------------- small pieces


def _matrix_text(m: FpMatrix) -> str:
    return ";".join(",".join(str(e) for e in row) for row in m.rows())


def _parse_matrix(p, text, nrows, ncols, where):
    rows = []
    for part in text.split(";"):
        try:
            rows.append([int(e) for e in part.split(",")])
        except ValueError:
            raise ParseError(f"{where}: bad matrix entry in {part!r}")
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise ParseError(f"{where}: matrix shape is not {nrows}x{ncols}")
    return FpMatrix(p, rows, ncols=ncols)


def _coords_text(coords) -> str:
    return ",".join(str(c) for c in coords) if coords else "-"


def _parse_coords(text, where):
    if text == "-":
        return ()
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError:
        raise ParseError(f"{where}: bad coordinate list {text!r}")


def _selector_text(selector) -> str:
    if isinstance(selector, str):
        return selector
    stem, s, idx = selector
    if isinstance(idx, int):
        idx = ((1, idx),)
    terms = [f"{i}" if c == 1 else f"{c}*{i}" for c, i in idx]
    return f"{stem} {s} {'+'.join(terms)}"


def _parse_selector(tokens, where):
    if len(tokens) == 1 and not tokens[0].lstrip("-").isdigit():
        return tokens[0]
    if len(tokens) != 3:
        raise ParseError(f"{where}: selector needs a label or 'stem s index'")
    try:
        stem, s = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ParseError(f"{where}: bad selector coordinates")
    pairs = []
    for term in tokens[2].split("+"):
        try:
            if "*" in term:
                c, i = term.split("*")
                pairs.append((int(c), int(i)))
            else:
                pairs.append((1, int(term)))
        except ValueError:
            raise ParseError(f"{where}: bad index term {term!r}")
    if len(pairs) == 1 and pairs[0][0] == 1:
        return stem, s, pairs[0][1]
    return stem, s, tuple(pairs)


def _int_or_none(text, none_word, where):
    if text == none_word:
        return None
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{where}: expected an integer or '{none_word}'")


# ---------------------------------------------------------------- rendering


def _module_body(m: GradedModule, out: list):
    for d, label in zip(m.degrees, m.labels):
        out.append(f"basis {d} {label}")
    for gpos in range(len(m.algebra.generators)):
        for d in sorted(set(m.degrees)):
            mat = m.action_matrix(gpos, d)
            if not mat.is_zero():
                out.append(f"act {gpos} {d} {_matrix_text(mat)}")


def render_artifact(value) -> str:
    kind = artifact_kind(value)
    out = [f"# {FORMAT} v{VERSION}", f"kind: {kind}"]
    if kind == "module":
        out += [f"prime: {value.p}", f"algebra: {value.algebra.name}",
                f"name: {value.name}", f"max-degree: {value.max_degree}",
                f"truncated: {'yes' if value.truncated else 'no'}"]
        _module_body(value, out)
    elif kind == "resolution":
        m = value.module
        out += [f"prime: {value.p}", f"algebra: {value.algebra.name}",
                f"name: {m.name}", f"max-s: {value.max_s}",
                f"max-t: {value.max_t}",
                f"module-max-degree: {m.max_degree}",
                f"truncated: {'yes' if m.truncated else 'no'}"]
        _module_body(m, out)
        for s, stage in enumerate(value.stages):
            for k in range(stage.count):
                coords = _coords_text(value.image_coords(s, k))
                out.append(f"gen {s} {stage.degrees[k]} "
                           f"{stage.labels[k]} {coords}")
    elif kind == "chart":
        trusted = "none" if value.trusted_stem is None else value.trusted_stem
        out += [f"prime: {value.p}", f"algebra: {value.algebra_name}",
                f"name: {value.module_name}", f"max-s: {value.max_s}",
                f"max-t: {value.max_t}", f"trusted-stem: {trusted}"]
        for name in sorted(value.line_shifts):
            out.append(f"shift {name} {value.line_shifts[name]}")
        for stem, cap in sorted(getattr(value, "window_caps", {}).items()):
            out.append(f"cap {stem} {cap}")
        for (s, t), n in sorted(value.dots.items()):
            out.append(f"dot {s} {t} {n}")
        for name in sorted(value.line_shifts):
            for (s, t) in sorted(value.lines.get(name, {})):
                mat = value.line_matrix(name, s, t)
                if not mat.is_zero():
                    out.append(f"line {name} {s} {t} {_matrix_text(mat)}")
    elif kind == "script":
        out += [f"prime: {value.prime}", f"algebra: {value.algebra_name}",
                f"space: {value.space}"]
        for note in value.notes:
            out.append(f"note: {note}")
        for label, sel in value.defines.items():
            out.append(f"define {label} = {_selector_text(sel)}")
        for e in value.entries:
            line = (f"d{e.page} {_selector_text(e.source)}"
                    f" -> {_selector_text(e.target)}")
            if e.note:
                line += f"  # {e.note}"
            out.append(line)
    elif kind == "table":
        prime = "integral" if value.prime is None else value.prime
        out.append(f"prime: {prime}")
        for a in value.assumptions:
            out.append(f"assume {a}")
        for k in value.stems():
            rank, tors = value.groups[k]
            tors_text = ",".join(str(q) for q in tors) if tors else "-"
            out.append(f"stem {k} rank {rank} torsion {tors_text}")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------ parsing

_HEADER_KEYS = ("kind", "prime", "algebra", "name", "space", "max-degree",
                "max-s", "max-t", "module-max-degree", "truncated",
                "trusted-stem", "note")


def _header_int(header, key, where):
    if key not in header:
        raise ParseError(f"{where}: missing header '{key}'")
    try:
        return int(header[key])
    except ValueError:
        raise ParseError(f"{where}: header '{key}' is not an integer")


def parse_artifact(text: str):
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"# {FORMAT} v"):
        raise ParseError("line 1: not a recognized artifact file")
    version = lines[0][len(f"# {FORMAT} v"):]
    if version != str(VERSION):
        raise ParseError(f"line 1: unsupported artifact version {version!r}")
    header = {}
    notes = []
    records = []
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(": ")
        if sep and key in _HEADER_KEYS:
            if key == "note":
                notes.append(rest)
            elif key in header:
                raise ParseError(f"line {i}: duplicate header '{key}'")
            else:
                header[key] = rest
            continue
        records.append((i, line))
    kind = header.get("kind")
    if kind not in KINDS:
        raise ParseError(f"line 1: missing or unknown kind {kind!r}")
    if kind == "module":
        return _parse_module(header, records, "line 1")
    if kind == "resolution":
        return _parse_resolution(header, records)
    if kind == "chart":
        return _parse_chart(header, records)
    if kind == "script":
        return _parse_script(header, notes, records)
    return _parse_table(header, records)


def _module_pieces(header, records, where):
    """Basis and action records shared by module and resolution files."""
    p = _header_int(header, "prime", where)
    algebra = get_algebra(header.get("algebra", ""), p)
    degrees, labels = [], []
    raw_actions = []
    rest = []
    for i, line in records:
        tokens = line.split()
        if tokens[0] == "basis":
            if len(tokens) != 3:
                raise ParseError(f"line {i}: basis needs 'basis degree label'")
            try:
                degrees.append(int(tokens[1]))
            except ValueError:
                raise ParseError(f"line {i}: bad basis degree {tokens[1]!r}")
            labels.append(tokens[2])
        elif tokens[0] == "act":
            if len(tokens) != 4:
                raise ParseError(f"line {i}: act needs 'act gen degree matrix'")
            raw_actions.append((i, tokens))
        else:
            rest.append((i, line))
    return p, algebra, degrees, labels, raw_actions, rest


def _build_module(p, algebra, degrees, labels, raw_actions, max_degree,
                  truncated, name):
    dims = {}
    for d in degrees:
        dims[d] = dims.get(d, 0) + 1
    actions = {}
    for i, tokens in raw_actions:
        try:
            gpos, d = int(tokens[1]), int(tokens[2])
        except ValueError:
            raise ParseError(f"line {i}: bad act coordinates")
        if not 0 <= gpos < len(algebra.generators):
            raise ParseError(f"line {i}: no algebra generator {gpos}")
        target = d + algebra.gen_degree(gpos)
        mat = _parse_matrix(p, tokens[3], dims.get(target, 0),
                            dims.get(d, 0), f"line {i}")
        actions.setdefault(gpos, {})[d] = mat
    return GradedModule(algebra, degrees, labels, actions, max_degree,
                        truncated=truncated, name=name)


def _parse_module(header, records, where):
    p, algebra, degrees, labels, raw_actions, rest = _module_pieces(
        header, records, where)
    if rest:
        i, line = rest[0]
        raise ParseError(f"line {i}: unexpected record {line.split()[0]!r}")
    return _build_module(p, algebra, degrees, labels, raw_actions,
                         _header_int(header, "max-degree", where),
                         header.get("truncated") == "yes",
                         header.get("name", ""))


def _parse_resolution(header, records):
    where = "line 1"
    p, algebra, degrees, labels, raw_actions, rest = _module_pieces(
        header, records, where)
    module = _build_module(p, algebra, degrees, labels, raw_actions,
                           _header_int(header, "module-max-degree", where),
                           header.get("truncated") == "yes",
                           header.get("name", ""))
    max_s = _header_int(header, "max-s", where)
    res = Resolution(module, max_s, _header_int(header, "max-t", where))
    res.stages = [FreeStage(algebra) for _ in range(max_s + 1)]
    res.images = [[] for _ in range(max_s + 1)]
    for i, line in rest:
        tokens = line.split()
        if tokens[0] != "gen" or len(tokens) != 5:
            raise ParseError(f"line {i}: expected 'gen s degree label coords'")
        try:
            s, degree = int(tokens[1]), int(tokens[2])
        except ValueError:
            raise ParseError(f"line {i}: bad generator coordinates")
        if not 0 <= s <= max_s:
            raise ParseError(f"line {i}: stage {s} outside 0..{max_s}")
        coords = _parse_coords(tokens[4], f"line {i}")
        if s == 0:
            if len(coords) != module.dim(degree):
                raise ParseError(
                    f"line {i}: coordinate length is not {module.dim(degree)}")
            res.images[0].append(coords)
        else:
            basis = res.stages[s - 1].basis(degree)
            if len(coords) != len(basis):
                raise ParseError(
                    f"line {i}: coordinate length is not {len(basis)}")
            res.images[s].append(
                {pair: c for pair, c in zip(basis, coords) if c})
        res.stages[s].add(degree, tokens[3])
    return res


def _parse_chart(header, records):
    where = "line 1"
    p = _header_int(header, "prime", where)
    chart = ExtChart(p, header.get("algebra", ""), header.get("name", ""),
                     _header_int(header, "max-s", where),
                     _header_int(header, "max-t", where), {},
                     trusted_stem=_int_or_none(
                         header.get("trusted-stem", "none"), "none", where))
    caps = {}
    lines = {}
    raw_lines = []
    for i, line in records:
        tokens = line.split()
        try:
            if tokens[0] == "shift" and len(tokens) == 3:
                chart.line_shifts[tokens[1]] = int(tokens[2])
                lines.setdefault(tokens[1], {})
            elif tokens[0] == "cap" and len(tokens) == 3:
                caps[int(tokens[1])] = int(tokens[2])
            elif tokens[0] == "dot" and len(tokens) == 4:
                chart.dots[(int(tokens[1]), int(tokens[2]))] = int(tokens[3])
            elif tokens[0] == "line" and len(tokens) == 5:
                raw_lines.append((i, tokens))
            else:
                raise ParseError(f"line {i}: unexpected record {tokens[0]!r}")
        except ValueError:
            raise ParseError(f"line {i}: bad integer in {tokens[0]} record")
    chart.lines = lines
    for i, tokens in raw_lines:
        name = tokens[1]
        if name not in chart.line_shifts:
            raise ParseError(f"line {i}: line class {name!r} has no shift")
        s, t = int(tokens[2]), int(tokens[3])
        q = chart.line_shifts[name]
        mat = _parse_matrix(p, tokens[4], chart.dot_count(s + 1, t + q),
                            chart.dot_count(s, t), f"line {i}")
        lines[name][(s, t)] = mat
    if caps:
        chart.window_caps = caps
    return chart


def _parse_script(header, notes, records):
    where = "line 1"
    script = DifferentialScript(_header_int(header, "prime", where),
                                header.get("algebra", ""),
                                header.get("space", ""), notes=notes)
    for i, line in records:
        body, _, note = line.partition("#")
        note = note.strip()
        tokens = body.split()
        if tokens[0] == "define":
            if len(tokens) < 4 or tokens[2] != "=":
                raise ParseError(f"line {i}: expected 'define label = selector'")
            script.defines[tokens[1]] = _parse_selector(tokens[3:], f"line {i}")
        elif tokens[0].startswith("d") and tokens[0][1:].isdigit():
            if "->" not in tokens:
                raise ParseError(f"line {i}: differential needs '->'")
            arrow = tokens.index("->")
            script.entries.append(ScriptEntry(
                int(tokens[0][1:]),
                _parse_selector(tokens[1:arrow], f"line {i}"),
                _parse_selector(tokens[arrow + 1:], f"line {i}"),
                note))
        else:
            raise ParseError(f"line {i}: unexpected record {tokens[0]!r}")
    return script


def _parse_table(header, records):
    prime = header.get("prime", "")
    prime = None if prime == "integral" else _header_int(
        header, "prime", "line 1")
    groups = {}
    assumptions = []
    for i, line in records:
        tokens = line.split()
        if tokens[0] == "assume":
            assumptions.append(line.partition(" ")[2])
        elif (tokens[0] == "stem" and len(tokens) == 6
                and tokens[2] == "rank" and tokens[4] == "torsion"):
            try:
                k, rank = int(tokens[1]), int(tokens[3])
                tors = (() if tokens[5] == "-"
                        else tuple(int(q) for q in tokens[5].split(",")))
            except ValueError:
                raise ParseError(f"line {i}: bad stem record")
            groups[k] = (rank, tors)
        else:
            raise ParseError(f"line {i}: unexpected record {tokens[0]!r}")
    return GroupTable(prime, groups, assumptions)


# --------------------------------------------------------------------- io


def read_artifact(path):
    with open(path, encoding="utf-8") as fh:
        return parse_artifact(fh.read())


def write_artifact(path, value):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_artifact(value))


# --------------------------------------------------------- shipped scripts


def shipped_scripts() -> list:
    """Names of the differential scripts included with the package."""
    root = resources.files("stringbordism").joinpath("data/scripts")
    return sorted(entry.name[:-4] for entry in root.iterdir()
                  if entry.name.endswith(".txt"))


def shipped_script(name: str) -> DifferentialScript:
    path = resources.files("stringbordism").joinpath(f"data/scripts/{name}.txt")
    if not path.is_file():
        have = ", ".join(shipped_scripts())
        raise FileNotFoundError(f"no shipped script {name!r}; have {have}")
    return parse_artifact(path.read_text(encoding="utf-8"))


# ------------------------------------------------------- classic module files


def read_bruner_module(text: str, algebra, name: str = "imported") -> GradedModule:
    """A module in the classic three-block presentation: the number of
    basis classes, their degrees, then one action per line as

        i g k j1 ... jk

    meaning the degree-g algebra generator carries class i to the sum of
    classes j1..jk (all indices 0-based).  The result is validated before
    it is returned.
    """
    rows = [(i, line.split("#")[0].strip())
            for i, line in enumerate(text.splitlines(), start=1)]
    rows = [(i, line) for i, line in rows if line]
    if len(rows) < 2:
        raise ParseError("line 1: expected a count line and a degree line")
    try:
        count = int(rows[0][1])
    except ValueError:
        raise ParseError(f"line {rows[0][0]}: bad class count")
    try:
        degrees = [int(w) for w in rows[1][1].split()]
    except ValueError:
        raise ParseError(f"line {rows[1][0]}: bad degree list")
    if len(degrees) != count:
        raise ParseError(f"line {rows[1][0]}: expected {count} degrees")
    labels = [f"x{k}" for k in range(count)]
    dims = {}
    slot = []
    for d in degrees:
        slot.append(dims.get(d, 0))
        dims[d] = dims.get(d, 0) + 1
    by_degree = {g: algebra.gen_degree(g)
                 for g in range(len(algebra.generators))}
    raw = {}
    for i, line in rows[2:]:
        try:
            nums = [int(w) for w in line.split()]
        except ValueError:
            raise ParseError(f"line {i}: bad action record")
        if len(nums) < 3 or len(nums) != 3 + nums[2]:
            raise ParseError(f"line {i}: expected 'i g k j1 ... jk'")
        src, g, targets = nums[0], nums[1], nums[3:]
        gpos = next((pos for pos, deg in by_degree.items() if deg == g), None)
        if gpos is None:
            raise ParseError(f"line {i}: no algebra generator of degree {g}")
        if not 0 <= src < count:
            raise ParseError(f"line {i}: class {src} out of range")
        d = degrees[src]
        target_d = d + g
        if any(not (0 <= j < count and degrees[j] == target_d)
               for j in targets):
            raise ParseError(
                f"line {i}: targets must be classes of degree {target_d}")
        key = (gpos, d)
        if key not in raw:
            raw[key] = [[0] * dims[d] for _ in range(dims.get(target_d, 0))]
        for j in targets:
            raw[key][slot[j]][slot[src]] += 1
    p = algebra.p
    actions = {}
    for (gpos, d), mat_rows in raw.items():
        mat = FpMatrix(p, [[e % p for e in row] for row in mat_rows],
                       ncols=dims[d])
        if not mat.is_zero():
            actions.setdefault(gpos, {})[d] = mat
    module = GradedModule(algebra, degrees, labels, actions,
                          max(degrees), name=name)
    module.validate()
    return module
