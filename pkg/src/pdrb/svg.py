"""Minimal, deterministic SVG plots.

Data are drawn inside a group whose ``transform`` maps data coordinates to
the viewport with an equal scale on both axes (y pointing up), so the
coordinates written to the file are the data coordinates themselves.  No
timestamps or random ids are emitted: equal inputs give equal bytes.
"""

from html import escape

import numpy as np

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

# Anchor colors of a perceptually ordered ramp (dark blue to yellow).
_RAMP = np.array([
    [0x44, 0x01, 0x54], [0x3b, 0x52, 0x8b], [0x21, 0x91, 0x8c],
    [0x5e, 0xc9, 0x62], [0xfd, 0xe7, 0x25],
], dtype=float)

WIDTH, HEIGHT, MARGIN = 480, 480, 48


def _num(x):
    # Fixed precision keeps files stable and readable.
    s = f"{float(x):.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def color(i):
    return PALETTE[i % len(PALETTE)]


def ramp(t):
    """Hex color for ``t`` in [0, 1] on the sequential ramp."""
    t = min(max(float(t), 0.0), 1.0) * (len(_RAMP) - 1)
    i = min(int(t), len(_RAMP) - 2)
    c = _RAMP[i] + (t - i) * (_RAMP[i + 1] - _RAMP[i])
    return "#" + "".join(f"{int(round(v)):02x}" for v in c)


def _document(body, width=WIDTH, height=HEIGHT):
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
    )
    return head + "".join(body) + "</svg>\n"


def _frame(lo, hi, width=WIDTH, height=HEIGHT, margin=MARGIN):
    """Transform mapping the data box [lo, hi] into the plot area."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    scale = min((width - 2 * margin) / span[0], (height - 2 * margin) / span[1])
    tx = margin - lo[0] * scale
    ty = height - margin + lo[1] * scale
    return scale, f"translate({_num(tx)},{_num(ty)}) scale({_num(scale)},{_num(-scale)})"


def _bounds(points, pad=0.05):
    lo, hi = points.min(axis=0), points.max(axis=0)
    extra = pad * max(float((hi - lo).max()), 1e-12)
    return lo - extra, hi + extra


def _axes_labels(xlabel, ylabel, width=WIDTH, height=HEIGHT):
    return [
        f'<text x="{width // 2}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>\n',
        f'<text x="14" y="{height // 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {height // 2})">{escape(ylabel)}</text>\n',
    ]


def _legend(names, width=WIDTH):
    out = []
    for i, name in enumerate(names):
        y = 16 + 16 * i
        out.append(f'<circle cx="{width - 120}" cy="{y - 4}" r="4" fill="{color(i)}"/>'
                   f'<text x="{width - 110}" y="{y}">{escape(str(name))}</text>\n')
    return out


def diagram_plot(diagrams, names=None):
    """Persistence diagrams as points above the diagonal, one color per input."""
    diagrams = [np.asarray(getattr(d, "points", d), float).reshape(-1, 2) for d in diagrams]
    names = list(names) if names is not None else [f"diagram {i}" for i in range(len(diagrams))]
    pts = np.concatenate(diagrams + [np.zeros((0, 2))])
    if len(pts):
        lo = float(pts.min())
        hi = float(pts.max())
    else:
        lo, hi = 0.0, 1.0
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    scale, transform = _frame((lo, lo), (hi, hi))
    r = 4.0 / scale
    body = [f'<g transform="{transform}">\n',
            f'<line class="diagonal" x1="{_num(lo)}" y1="{_num(lo)}" x2="{_num(hi)}" y2="{_num(hi)}" '
            f'stroke="black" stroke-width="{_num(1 / scale)}"/>\n']
    for i, X in enumerate(diagrams):
        for b, d in X:
            body.append(f'<circle cx="{_num(b)}" cy="{_num(d)}" r="{_num(r)}" fill="{color(i)}"/>\n')
    body.append("</g>\n")
    body += _axes_labels("birth", "death") + _legend(names)
    return _document(body)


def heatmap(D, labels=None):
    """Matrix heatmap; row and column order follow the input."""
    D = np.atleast_2d(np.asarray(D, float))
    n, m = D.shape
    top = float(D.max()) if D.size else 0.0
    size = (WIDTH - 2 * MARGIN) / max(n, m, 1)
    body = []
    for i in range(n):
        for j in range(m):
            t = D[i, j] / top if top > 0 else 0.0
            body.append(
                f'<rect x="{_num(MARGIN + j * size)}" y="{_num(MARGIN + i * size)}" '
                f'width="{_num(size)}" height="{_num(size)}" fill="{ramp(t)}">'
                f"<title>{i},{j}: {_num(D[i, j])}</title></rect>\n"
            )
    if labels is not None:
        for i, name in enumerate(labels):
            body.append(f'<text x="{MARGIN - 4}" y="{_num(MARGIN + (i + 0.5) * size + 4)}" '
                        f'text-anchor="end">{escape(str(name))}</text>\n')
    return _document(body)


def scatter(points, labels, vertices=None):
    """Layout scatter plot colored by label, with an optional atom triangle."""
    P = np.asarray(points, float).reshape(-1, 2)
    V = None if vertices is None else np.asarray(vertices, float).reshape(-1, 2)
    allp = np.concatenate([P] + ([V] if V is not None else []) + [np.zeros((0, 2))])
    lo, hi = _bounds(allp) if len(allp) else (np.zeros(2), np.ones(2))
    scale, transform = _frame(lo, hi)
    r = 4.0 / scale
    classes = list(dict.fromkeys(str(l) for l in labels))
    body = [f'<g transform="{transform}">\n']
    if V is not None:
        coords = " ".join(f"{_num(x)},{_num(y)}" for x, y in V)
        body.append(f'<polygon class="atoms" points="{coords}" fill="none" stroke="gray" '
                    f'stroke-width="{_num(1 / scale)}"/>\n')
    for (x, y), label in zip(P, labels):
        body.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(r)}" '
                    f'fill="{color(classes.index(str(label)))}"/>\n')
    body.append("</g>\n")
    return _document(body + _legend(classes))
