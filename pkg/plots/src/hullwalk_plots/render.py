"""Figure construction from trace and summary files.

Four figure kinds: ``trajectory`` (path, convex hull of the origin plus the
last window, admissible arc at the head), ``theta_hist`` (empirical interior
angles against the linear stationary density), ``convergence`` (running
speed against the exact planar constant), and ``ksweep`` (speed table with
confidence bars).

Rendering is a pure function of the input files and style options: the
style is pinned (Agg backend, fixed dpi, no timestamps), so identical
inputs produce identical image bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .inputs import SchemaError, read_summary, read_trace  # noqa: E402

TWO_PI = 2.0 * math.pi

#: exact speed of the planar unit-memory ball walk
SPEED_2_1 = 8.0 / (9.0 * math.pi**2)

#: stationary interior-angle density endpoints: t=0 and t=pi
THETA_PDF_AT_0 = 4.0 / (3.0 * math.pi)
THETA_PDF_AT_PI = 2.0 / (3.0 * math.pi)

KINDS = ("trajectory", "theta_hist", "convergence", "ksweep")

STYLE_DEFAULTS = {
    "k": 1,            # memory length, for the hull/arc window
    "dpi": 120,
    "path_color": "tab:blue",
    "hull_color": "tab:red",
    "arc_color": "black",
    "figsize": (6.0, 6.0),
}


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    out: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind '{self.kind}'; "
                              f"expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("figure spec needs at least one input file")

    def opt(self, name):
        return self.style.get(name, STYLE_DEFAULTS[name])


def stationary_theta_pdf(t):
    t = np.asarray(t, dtype=float)
    return (2.0 / (3.0 * math.pi**2)) * (2.0 * math.pi - t)


def convex_hull(points):
    """Andrew monotone chain; returns hull vertices counter-clockwise."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return [np.array(p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return [np.array(p) for p in lower[:-1] + upper[:-1]]


def admissible_arc(head, constraints):
    """(start, width) of the admissible angular sector at the head.

    The blocked directions are those from the head to each constraint point;
    the admissible sector is the largest angular gap between them.
    """
    ang = []
    for p in constraints:
        vx, vy = p[0] - head[0], p[1] - head[1]
        if math.hypot(vx, vy) <= 1e-12:
            continue
        a = math.atan2(vy, vx)
        ang.append(a + TWO_PI if a < 0 else a)
    if not ang:
        return 0.0, TWO_PI
    ang.sort()
    width = TWO_PI - (ang[-1] - ang[0])
    start = ang[-1]
    for i in range(len(ang) - 1):
        g = ang[i + 1] - ang[i]
        if g > width:
            width = g
            start = ang[i]
    return start, width


def _fig(spec):
    fig, ax = plt.subplots(figsize=spec.opt("figsize"), dpi=spec.opt("dpi"))
    return fig, ax


def build_trajectory(spec: FigureSpec):
    trace = read_trace(spec.inputs[0])
    if trace.dim != 2:
        raise SchemaError(f"trajectory figures need planar traces, got d={trace.dim}")
    xy = np.asarray(trace.x)
    k = int(spec.opt("k"))
    fig, ax = _fig(spec)
    ax.plot(xy[:, 0], xy[:, 1], color=spec.opt("path_color"), lw=1.2,
            label="path", zorder=2)
    window = [np.zeros(2)] + [xy[i] for i in range(max(0, len(xy) - (k + 1)),
                                                   len(xy))]
    hull = convex_hull(window)
    if len(hull) >= 2:
        ring = np.array(hull + [hull[0]])
        ax.plot(ring[:, 0], ring[:, 1], color=spec.opt("hull_color"), lw=1.8,
                label="hull", zorder=3)
    head = xy[-1]
    start, width = admissible_arc(head, window[:-1])
    phi = np.linspace(start, start + width, 200)
    ax.plot(head[0] + np.cos(phi), head[1] + np.sin(phi),
            color=spec.opt("arc_color"), lw=1.5, label="arc", zorder=4)
    ax.plot([0.0], [0.0], marker="o", ms=4, color="black", ls="none",
            label="origin")
    ax.set_aspect("equal")
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    ax.legend(loc="best", fontsize=8)
    return fig


def build_theta_hist(spec: FigureSpec):
    trace = read_trace(spec.inputs[0])
    theta = np.array([t for t in trace.theta if t is not None])
    if theta.size == 0:
        raise SchemaError("trace carries no interior angles in field 'theta'")
    fig, ax = _fig(spec)
    ax.hist(theta, bins=60, range=(0.0, math.pi), density=True,
            alpha=0.55, color="tab:blue", label="empirical")
    grid = np.linspace(0.0, math.pi, 300)
    ax.plot(grid, stationary_theta_pdf(grid), color="tab:red", lw=2,
            label="stationary density")
    ax.plot([0.0, math.pi], [THETA_PDF_AT_0, THETA_PDF_AT_PI], ls="none",
            marker="o", ms=5, color="tab:red", label="endpoints")
    ax.set_xlabel("interior angle")
    ax.set_ylabel("density")
    ax.legend(loc="best", fontsize=8)
    return fig


def build_convergence(spec: FigureSpec):
    fig, ax = _fig(spec)
    drew_reference = False
    for path in spec.inputs:
        trace = read_trace(path)
        n = np.asarray(trace.n, dtype=float)
        xy = np.asarray(trace.x)
        mask = n > 0
        speed = np.linalg.norm(xy[mask], axis=1) / n[mask]
        ax.plot(n[mask], speed, lw=1.0, label=Path(path).stem)
        if trace.dim == 2 and int(spec.opt("k")) == 1 and not drew_reference:
            ax.axhline(SPEED_2_1, color="black", ls="--", lw=1.0,
                       label="exact speed")
            drew_reference = True
    ax.set_xlabel("step")
    ax.set_ylabel("||X_n|| / n")
    ax.legend(loc="best", fontsize=8)
    return fig


def build_ksweep(spec: FigureSpec):
    doc = read_summary(spec.inputs[0])
    rows = doc.get("results", {}).get("rows")
    if not rows:
        raise SchemaError("summary lacks field 'results.rows' (not a sweep output?)")
    for i, row in enumerate(rows):
        for fieldname in ("k", "v_hat", "stderr"):
            if fieldname not in row:
                raise SchemaError(f"sweep row {i} lacks field '{fieldname}'")
    ks = [row["k"] for row in rows]
    v = [row["v_hat"] for row in rows]
    err = [1.959964 * row["stderr"] for row in rows]
    fig, ax = _fig(spec)
    ax.errorbar(ks, v, yerr=err, fmt="o-", capsize=4, label="estimate")
    if rows[0].get("config", {}).get("d") == 2 and ks[0] == 1:
        ax.plot([1], [SPEED_2_1], marker="*", ms=12, ls="none",
                color="tab:red", label="exact k=1")
    ax.set_xlabel("memory length k")
    ax.set_ylabel("speed")
    ax.set_xticks(ks)
    ax.legend(loc="best", fontsize=8)
    return fig


_BUILDERS = {
    "trajectory": build_trajectory,
    "theta_hist": build_theta_hist,
    "convergence": build_convergence,
    "ksweep": build_ksweep,
}


def build_figure(spec: FigureSpec):
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> Path:
    """Build and write the figure; returns the output path.

    PNG output with pinned style and no volatile metadata, so repeated
    renders of the same inputs are byte-identical.
    """
    fig = build_figure(spec)
    out = Path(spec.out)
    try:
        fig.savefig(out, format=out.suffix.lstrip(".") or "png",
                    dpi=spec.opt("dpi"), metadata={"Software": "hullwalk-plots"})
    finally:
        plt.close(fig)
    return out
