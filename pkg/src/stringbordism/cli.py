"""Command-line pipelines: modules, resolutions, charts, tables, reports.

Each stage is a pure function of its inputs, so stage outputs are cached
content-addressed under --cache-dir and identical invocations produce
byte-identical artifacts.  Commands print their artifact to stdout unless
--out is given; diagnostics go to stderr and any failure exits nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from pathlib import Path

from .adams import (
    DifferentialScript,
    GroupTable,
    apply_script,
    assemble_plocal,
    integral_table,
    torsion_free_ranks,
    wedge_shifts,
)
from .algebra import get_algebra
from .ext import minimal_resolution, sphere_resolution, structure_lines
from .kz4 import build_kz4, build_smash_square
from .render import emit_chart, figure_chart
from .textio import (
    VERSION,
    read_artifact,
    read_bruner_module,
    render_artifact,
    shipped_script,
    write_artifact,
)

DEFAULT_ALGEBRA = {2: "A2", 3: "tildeA1", 5: "EQ012", 7: "EQ012"}
DEFAULT_WINDOW = {(2, "A1"): (12, 28), (2, "A2"): (20, 40),
                  (3, "tildeA1"): (20, 36), (5, "EQ012"): (16, 48),
                  (7, "EQ012"): (16, 56)}
DEFAULT_SCRIPT = {("kz4", 2, "A2"): "tmf-kz4-p2",
                  ("kz4", 2, "A1"): "ko-kz4-p2",
                  ("kz4-smash", 2, "A2"): "tmf-kz4smash-p2"}
TABLE_PRIMES = (2, 3, 5, 7)
STEM_LO, STEM_HI = 4, 14


class Cache:
    """Content-addressed artifact store; root None disables caching."""

    def __init__(self, root):
        self.root = Path(root) if root else None

    def fetch(self, parts, build):
        if self.root is None:
            return build()
        digest = hashlib.sha256(
            "\n".join(str(p) for p in parts).encode()).hexdigest()[:20]
        path = self.root / f"{parts[0]}-{digest}.txt"
        if path.is_file():
            return read_artifact(path)
        value = build()
        self.root.mkdir(parents=True, exist_ok=True)
        write_artifact(path, value)
        return value


# ----------------------------------------------------------- stage builders


def _window(prime, algebra, args):
    default = DEFAULT_WINDOW.get((prime, algebra), (None, None))
    max_s = args.max_s if args.max_s is not None else default[0]
    max_t = args.max_t if args.max_t is not None else default[1]
    if max_s is None or max_t is None:
        raise ValueError(f"no default window for {algebra} at p={prime}; "
                         "pass --max-s and --max-t")
    return max_s, max_t


def _selection(args):
    prime = args.prime
    algebra = args.algebra or DEFAULT_ALGEBRA[prime]
    space = getattr(args, "space", "kz4")
    max_s, max_t = _window(prime, algebra, args)
    return prime, algebra, space, max_s, max_t


def _module(cache, prime, algebra, space):
    def build():
        a = get_algebra(algebra, prime)
        if space == "kz4-smash":
            return build_smash_square(prime, algebra=a)
        return build_kz4(prime, algebra=a)
    return cache.fetch(("module", VERSION, prime, algebra, space), build)


def _resolution(cache, sel):
    prime, algebra, space, max_s, max_t = sel
    module = _module(cache, prime, algebra, space)
    return cache.fetch(
        ("resolution", VERSION, prime, algebra, space, max_s, max_t),
        lambda: minimal_resolution(module, max_s, max_t))


def _sphere(cache, prime, algebra, max_s, max_t):
    return cache.fetch(
        ("resolution", VERSION, prime, algebra, "sphere", max_s, max_t),
        lambda: sphere_resolution(get_algebra(algebra, prime), max_s, max_t))


def _e2_chart(cache, sel):
    prime, algebra, space, max_s, max_t = sel
    return cache.fetch(
        ("chart", VERSION, prime, algebra, space, max_s, max_t),
        lambda: structure_lines(_resolution(cache, sel),
                                _sphere(cache, prime, algebra, max_s, max_t)))


def _script(args, sel):
    """The script named by --script (a path or a shipped name), or the
    shipped default for the selection, or the empty script."""
    prime, algebra, space, _, _ = sel
    name = getattr(args, "script", None)
    if name:
        if os.path.exists(name):
            return read_artifact(name)
        return shipped_script(name)
    default = DEFAULT_SCRIPT.get((space, prime, algebra))
    if default:
        return shipped_script(default)
    modname = "kz4smash" if space == "kz4-smash" else space
    return DifferentialScript(prime, algebra, modname)


def _einf(cache, sel, script):
    digest = hashlib.sha256(render_artifact(script).encode()).hexdigest()[:12]
    prime, algebra, space, max_s, max_t = sel
    return cache.fetch(
        ("einf", VERSION, prime, algebra, space, max_s, max_t, digest),
        lambda: apply_script(_e2_chart(cache, sel), script))


def _local_table(cache, sel, script):
    digest = hashlib.sha256(render_artifact(script).encode()).hexdigest()[:12]
    prime, algebra, space, max_s, max_t = sel
    return cache.fetch(
        ("table", VERSION, prime, algebra, space, max_s, max_t, digest,
         STEM_LO, STEM_HI),
        lambda: assemble_plocal(_einf(cache, sel, script),
                                range(STEM_LO, STEM_HI + 1)))


class _Defaults:
    max_s = None
    max_t = None
    script = None


def _prime_table(cache, space, prime):
    args = _Defaults()
    args.prime, args.algebra, args.space = prime, None, space
    sel = _selection(args)
    return _local_table(cache, sel, _script(args, sel))


def _display_table(cache, space, prime):
    """The p-local table.  Above p=3 the chart computes one wedge summand
    of the target spectrum, so ranks are summed over the shifted copies."""
    table = _prime_table(cache, space, prime)
    if prime > 3:
        shifts = wedge_shifts(prime, STEM_HI)
        ranks = torsion_free_ranks(table, shifts)
        groups = {k: (ranks[k], table.torsion(k)) for k in table.stems()}
        note = "wedge summands at degree shifts %s summed" % (shifts,)
        table = GroupTable(prime, groups,
                           assumptions=list(table.assumptions) + [note])
    return table


def _integral(cache, space):
    tables = [_prime_table(cache, space, p) for p in (2, 3, 5)]
    t7 = _prime_table(cache, space, 7)
    ranks = torsion_free_ranks(t7, wedge_shifts(7, STEM_HI))
    return integral_table(tables, ranks)


# ---------------------------------------------------------------- commands


def _deliver(value, out):
    text = render_artifact(value)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_build_module(args, cache):
    if args.bruner:
        algebra = get_algebra(args.algebra or DEFAULT_ALGEBRA[args.prime],
                              args.prime)
        with open(args.bruner, encoding="utf-8") as fh:
            module = read_bruner_module(fh.read(), algebra,
                                        name=Path(args.bruner).stem)
    else:
        module = _module(cache, args.prime,
                         args.algebra or DEFAULT_ALGEBRA[args.prime],
                         args.space)
    _deliver(module, args.out)


def cmd_resolve(args, cache):
    _deliver(_resolution(cache, _selection(args)), args.out)


def cmd_lines(args, cache):
    _deliver(_e2_chart(cache, _selection(args)), args.out)


def _chart_value(args, cache):
    if getattr(args, "chart", None):
        return read_artifact(args.chart)
    sel = _selection(args)
    if getattr(args, "script", None) is None and not args.einf:
        return _e2_chart(cache, sel)
    return _einf(cache, sel, _script(args, sel))


def cmd_adams(args, cache):
    # apply the script fresh so the fired count is always reported
    if args.chart:
        chart = read_artifact(args.chart)
        einf = apply_script(chart, _script(args, _selection_of(chart)))
    else:
        sel = _selection(args)
        einf = apply_script(_e2_chart(cache, sel), _script(args, sel))
    report = getattr(einf, "script_report", None)
    if report:
        print(f"fired {report['fired']} differentials "
              f"from {report['entries']} entries", file=sys.stderr)
    _deliver(einf, args.out)


def _selection_of(chart):
    space = "kz4-smash" if chart.module_name == "kz4smash" else chart.module_name
    return chart.p, chart.algebra_name, space, chart.max_s, chart.max_t


def cmd_assemble(args, cache):
    if args.chart:
        einf = read_artifact(args.chart)
    else:
        sel = _selection(args)
        einf = _einf(cache, sel, _script(args, sel))
    table = assemble_plocal(einf, range(STEM_LO, STEM_HI + 1))
    _deliver(table, args.out)


def cmd_table(args, cache):
    if args.integral:
        _deliver(_integral(cache, args.space), args.out)
    elif args.prime:
        _deliver(_display_table(cache, args.space, args.prime), args.out)
    else:
        raise ValueError("table needs --integral or --prime")


def cmd_chart(args, cache):
    value = _chart_value(args, cache)
    text = emit_chart(value, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_report(args, cache):
    """The full run for one space: figures and a delimited group table."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    locals_ = {}
    for prime in TABLE_PRIMES:
        table = _display_table(cache, args.space, prime)
        locals_[prime] = table
        chart_args = _Defaults()
        chart_args.prime, chart_args.algebra = prime, None
        chart_args.space = args.space
        sel = _selection(chart_args)
        einf = _einf(cache, sel, _script(chart_args, sel))
        base = out / f"{args.space}-p{prime}"
        figure_chart(einf, base.with_suffix(".png"))
        with open(base.with_suffix(".svg"), "w", encoding="utf-8") as fh:
            fh.write(emit_chart(einf, "svg"))
        print(f"wrote {base.with_suffix('.png')}", file=sys.stderr)
    integral = _integral(cache, args.space)
    write_artifact(out / f"{args.space}-integral.txt", integral)
    tsv = out / f"{args.space}-table.tsv"
    with open(tsv, "w", encoding="utf-8") as fh:
        fh.write("stem\t" + "\t".join(f"p{p}" for p in TABLE_PRIMES)
                 + "\tintegral\n")
        for k in range(STEM_LO, STEM_HI + 1):
            cells = [locals_[p].describe(k) for p in TABLE_PRIMES]
            fh.write(f"{k}\t" + "\t".join(cells)
                     + f"\t{integral.describe(k)}\n")
    print(f"wrote {tsv}", file=sys.stderr)


# ------------------------------------------------------------------ parser


def _add_selection(cmd, space=True, window=True):
    cmd.add_argument("--prime", type=int, choices=TABLE_PRIMES, required=True)
    cmd.add_argument("--algebra", choices=["A1", "A2", "tildeA1", "EQ012"])
    if space:
        cmd.add_argument("--space", choices=["kz4", "kz4-smash"],
                         default="kz4")
    if window:
        cmd.add_argument("--max-s", type=int, dest="max_s")
        cmd.add_argument("--max-t", type=int, dest="max_t")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stringbordism",
        description="String bordism pipelines over finite subalgebras of "
                    "the Steenrod algebra")
    parser.add_argument("--cache-dir", default=".stringbordism-cache",
                        help="artifact cache location ('' disables caching)")
    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("build-module", help="write a module artifact")
    _add_selection(cmd, window=False)
    cmd.add_argument("--bruner", help="import a classic module file instead")
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_build_module)

    cmd = sub.add_parser("resolve", help="minimal free resolution")
    _add_selection(cmd)
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_resolve)

    cmd = sub.add_parser("lines", help="E2 chart with structure lines")
    _add_selection(cmd)
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_lines)

    cmd = sub.add_parser("adams", help="apply a differential script")
    _add_selection(cmd)
    cmd.add_argument("--chart", help="start from a chart artifact")
    cmd.add_argument("--script", help="script path or shipped name")
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_adams)

    cmd = sub.add_parser("assemble", help="group table from an E-infinity chart")
    _add_selection(cmd)
    cmd.add_argument("--chart", help="start from a chart artifact")
    cmd.add_argument("--script", help="script path or shipped name")
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_assemble)

    cmd = sub.add_parser("table", help="per-prime or integral group table")
    cmd.add_argument("--space", choices=["kz4", "kz4-smash"], default="kz4")
    cmd.add_argument("--prime", type=int, choices=TABLE_PRIMES)
    cmd.add_argument("--integral", action="store_true")
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_table)

    cmd = sub.add_parser("chart", help="render a chart")
    _add_selection(cmd)
    cmd.add_argument("--chart", help="render a chart artifact")
    cmd.add_argument("--script", help="script path or shipped name")
    cmd.add_argument("--einf", action="store_true",
                     help="apply the default script before rendering")
    cmd.add_argument("--format", choices=["text", "svg"], default="text")
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_chart)

    cmd = sub.add_parser("report", help="figures and tables for one space")
    cmd.add_argument("--space", choices=["kz4", "kz4-smash"], default="kz4")
    cmd.add_argument("--out", required=True)
    cmd.set_defaults(run=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cache = Cache(args.cache_dir or None)
    try:
        args.run(args, cache)
    except BrokenPipeError:
        return 0
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
