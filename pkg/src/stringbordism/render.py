"""Chart renderers: ascii grids, SVG, and PNG figures.

All three share one layout: the horizontal axis is the stem t - s, the
vertical axis the filtration s, dots within a cell spread slightly around
the cell center.  Vertical segments are v0-multiplications, slope-one
segments are h1-multiplications, and the region beyond the trusted stem
is shaded (ascii marks its empty cells with '~' instead).
"""

from __future__ import annotations

from .ext import ExtChart

_SPREAD = 0.22


def _v0_name(chart: ExtChart):
    name = "h0" if chart.p == 2 else "a0"
    return name if name in chart.line_shifts else None


def _layout(chart: ExtChart):
    """Dot coordinates per cell and line segments in (stem, s) coordinates."""
    dots = {}
    for (s, t), n in sorted(chart.dots.items()):
        stem = t - s
        dots[(s, t)] = [(stem + _SPREAD * (2 * i - (n - 1)), s)
                        for i in range(n)]
    segments = []
    for name in sorted(chart.line_shifts):
        q = chart.line_shifts[name]
        for (s, t) in sorted(chart.lines.get(name, {})):
            mat = chart.line_matrix(name, s, t)
            target = dots.get((s + 1, t + q))
            source = dots.get((s, t))
            if not source or not target:
                continue
            for r in range(mat.nrows):
                for c in range(mat.ncols):
                    if mat.entry(r, c):
                        segments.append((name, source[c], target[r]))
    return dots, segments


def _bounds(chart: ExtChart):
    stems = [t - s for (s, t) in chart.dots]
    top_stem = max(stems + [chart.trusted_stem or 0, 8])
    return top_stem, chart.max_s


def ascii_chart(chart: ExtChart) -> str:
    """A text grid: one two-character cell per bidegree, the dot count
    followed by a line marker ('|' v0, '/' h1, '+' both)."""
    top_stem, top_s = _bounds(chart)
    v0 = _v0_name(chart)
    rows = []
    for s in range(top_s, -1, -1):
        cells = []
        for stem in range(top_stem + 1):
            t = stem + s
            n = chart.dot_count(s, t)
            if n == 0:
                fill = "~" if not chart.trusted(s, t) else "."
                cells.append(fill + " ")
                continue
            mark = " "
            tower = v0 and not chart.line_matrix(v0, s, t).is_zero()
            diag = ("h1" in chart.line_shifts
                    and not chart.line_matrix("h1", s, t).is_zero())
            if tower and diag:
                mark = "+"
            elif tower:
                mark = "|"
            elif diag:
                mark = "/"
            cells.append((str(n) if n < 10 else "*") + mark)
        rows.append(f"{s:3d} {''.join(cells).rstrip()}")
    axis = [" "] * (2 * (top_stem + 1))
    for stem in range(0, top_stem + 1, 4):
        for k, ch in enumerate(str(stem)):
            axis[2 * stem + k] = ch
    rows.append("    " + "".join(axis).rstrip())
    title = (f"{chart.module_name} over {chart.algebra_name}"
             f" at p={chart.p}")
    return title + "\n" + "\n".join(rows) + "\n"


def svg_chart(chart: ExtChart) -> str:
    """A standalone SVG document; dots carry data-s/data-t attributes so
    the drawn multiset is machine-readable."""
    top_stem, top_s = _bounds(chart)
    unit, margin = 18, 30
    width = 2 * margin + unit * (top_stem + 1)
    height = 2 * margin + unit * (top_s + 1)

    def x(stem):
        return margin + unit * stem + unit // 2

    def y(s):
        return height - margin - unit * s - unit // 2

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}"'
           f' height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if chart.trusted_stem is not None and chart.trusted_stem < top_stem:
        left = margin + unit * (chart.trusted_stem + 1)
        out.append(f'<rect class="untrusted" x="{left}" y="{margin - 10}"'
                   f' width="{width - margin - left}"'
                   f' height="{height - 2 * margin + 20}" fill="#dddddd"/>')
    dots, segments = _layout(chart)
    for name, (x1, y1), (x2, y2) in segments:
        color = "#666666" if name in ("h0", "a0") else "#b04030"
        out.append(f'<line class="{name}" x1="{x(x1):.1f}" y1="{y(y1)}"'
                   f' x2="{x(x2):.1f}" y2="{y(y2)}"'
                   f' stroke="{color}" stroke-width="1"/>')
    for (s, t), spots in sorted(dots.items()):
        for px, py in spots:
            out.append(f'<circle data-s="{s}" data-t="{t}" cx="{x(px):.1f}"'
                       f' cy="{y(py)}" r="3" fill="black"/>')
    for stem in range(0, top_stem + 1, 4):
        out.append(f'<text x="{x(stem)}" y="{height - 8}" font-size="10"'
                   f' text-anchor="middle">{stem}</text>')
    for s in range(0, top_s + 1, 4):
        out.append(f'<text x="{margin - 16}" y="{y(s) + 3}" font-size="10"'
                   f' text-anchor="middle">{s}</text>')
    out.append(f'<text x="{margin}" y="14" font-size="11">'
               f'{chart.module_name} over {chart.algebra_name}'
               f' at p={chart.p}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def figure_chart(chart: ExtChart, path) -> None:
    """The same layout drawn with matplotlib and saved to path (format
    chosen by the extension, typically png)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    top_stem, top_s = _bounds(chart)
    dots, segments = _layout(chart)
    fig, ax = plt.subplots(figsize=(0.35 * (top_stem + 2), 0.35 * (top_s + 2)))
    if chart.trusted_stem is not None and chart.trusted_stem < top_stem:
        ax.axvspan(chart.trusted_stem + 0.5, top_stem + 0.5,
                   color="0.88", zorder=0)
    for name, (x1, y1), (x2, y2) in segments:
        color = "0.4" if name in ("h0", "a0") else "#b04030"
        ax.plot([x1, x2], [y1, y2], color=color, lw=0.9, zorder=1)
    xs = [px for spots in dots.values() for px, _ in spots]
    ys = [py for spots in dots.values() for _, py in spots]
    ax.scatter(xs, ys, s=14, color="black", zorder=2)
    ax.set_xlim(-0.5, top_stem + 0.5)
    ax.set_ylim(-0.5, top_s + 0.5)
    ax.set_xticks(range(0, top_stem + 1, 4))
    ax.set_yticks(range(0, top_s + 1, 4))
    ax.set_xlabel("t - s")
    ax.set_ylabel("s")
    ax.set_title(f"{chart.module_name} over {chart.algebra_name}"
                 f" at p={chart.p}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def emit_chart(chart: ExtChart, format: str = "ascii") -> str:
    if format in ("ascii", "text"):
        return ascii_chart(chart)
    if format == "svg":
        return svg_chart(chart)
    raise ValueError(f"unknown chart format {format!r}")
