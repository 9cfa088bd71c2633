"""Regeneration machinery: corridor geometry test and the split sampler.

A window has *good geometry* when every k-step path threading the corridor
of delta-balls laid out ahead of the walker (centres at ``x + i/2 * u``,
``u`` the radial or fixed drift direction) is admissible.  The exact
condition has no algorithmic test, so we use a conservative sufficient
check built from separating-hyperplane margins: sound, not complete.  How
much of the exact event it captures is reported empirically, never assumed.

On good-geometry blocks the k-step transition density is at least
``alpha = delta**(d*k)`` times the uniform density on the corridor, so the
block law splits into ``alpha * uniform(corridor) + (1 - alpha) * residual``.
Sampling the mixture with an external Bernoulli(alpha) coin leaves the walk
law unchanged while the coin's successes become regeneration times whose
gaps have exponentially bounded tails.

Exact residual sampling needs the reciprocal region volumes, which are only
exactly computable in the plane (sector areas), so split sampling is a
d = 2 feature by design.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .engine import RunResult, WalkConfig, sample_step_direct_2d
from .errors import (InvalidInput, SplitSamplerError, UnsupportedDimension)
from .rng import PURPOSE_SPLIT, UniformBuffer, stream

RESIDUAL_CAP = _kernels.RESIDUAL_CAP


@dataclass(frozen=True)
class GoodGeometryParams:
    """Corridor radius and the induced regeneration rate alpha = delta^(d k)."""

    delta: float = 0.1
    d: int = 2
    k: int = 1

    def __post_init__(self):
        if not (0.0 < self.delta < 0.125):
            raise InvalidInput(f"delta must lie in (0, 1/8), got {self.delta}")

    @property
    def alpha(self) -> float:
        return self.delta ** (self.d * self.k)


@dataclass(frozen=True)
class RenewalRecord:
    index: int        # 1-based renewal counter
    tau: int          # block time of the regeneration
    anchor: np.ndarray
    gap: int          # tau minus the previous tau (blocks from start for index 1)


@dataclass(frozen=True)
class BallChain:
    """The corridor: k balls of radius delta at x + (i/2) * u, i = 1..k."""

    centers: np.ndarray  # (k, d)
    radius: float

    @classmethod
    def at(cls, x, u, params: GoodGeometryParams) -> "BallChain":
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        i = np.arange(1, params.k + 1)[:, None]
        return cls(centers=x[None, :] + 0.5 * i * u[None, :], radius=params.delta)


def good_geometry(window, params: GoodGeometryParams, ell=None) -> bool:
    """Conservative corridor-admissibility test on a full (k+1)-point window.

    Margin inequalities: at each corridor stage i, every constraint point
    (origin, window points still in memory, earlier corridor balls inflated
    by delta) must sit at least 2*delta behind the stage centre along the
    corridor direction, while the next ball clears 2*delta ahead.  False
    whenever the walker sits at the origin.  May return False on windows
    that are in fact good; never the reverse.
    """
    pts = [np.asarray(p, dtype=float) for p in window]
    k = params.k
    if len(pts) != k + 1:
        raise InvalidInput(f"window must hold k+1={k + 1} points, got {len(pts)}")
    x = pts[k]
    nrm = float(np.linalg.norm(x))
    if nrm <= 1e-12:
        return False
    u = np.asarray(ell, dtype=float) if ell is not None else x / nrm
    delta = params.delta
    if 0.5 - 2.0 * delta < 2.0 * delta:
        return False
    for i in range(k):
        ci = x + 0.5 * i * u
        for j in range(i, k + 1):
            if i == 0 and j == k:
                continue  # stage-0 apex is the walker itself
            if float((pts[j] - ci) @ u) > -2.0 * delta:
                return False
        if ell is None and float((-ci) @ u) > -2.0 * delta:
            return False
        for j in range(1, i):
            cj = x + 0.5 * j * u
            if float((cj - ci) @ u) + delta > -2.0 * delta:
                return False
    return True


def _stage_history(window, n: int, homogeneous: bool) -> list:
    first = n - (len(window) - 1)
    out = []
    for i, p in enumerate(window[:-1]):
        if homogeneous and first + i == 0:
            continue
        out.append(p)
    return out


def split_step_block(window, V: bool, params: GoodGeometryParams, rng,
                     ell=None, n: Optional[int] = None):
    """One block of the split construction from a full window (d = 2 only).

    ``V`` is an externally drawn Bernoulli(alpha) bit.  Returns
    ``(new_window, block, renewal_flag)`` where ``block`` lists the k new
    positions.  Without good geometry the block is a plain simulation; with
    it, ``V = 1`` resamples the block uniformly on the corridor (a renewal)
    and ``V = 0`` draws from the residual density by rejection, accepting a
    plain proposal with probability ``1 - alpha * u_corridor / f``.

    ``n`` is the global index of the window's last position; it only
    matters while a homogeneous-mode window still contains the start point.
    """
    pts = [np.asarray(p, dtype=float) for p in window]
    k = params.k
    if len(pts) != k + 1:
        raise InvalidInput(f"window must hold k+1={k + 1} points, got {len(pts)}")
    if pts[0].shape[0] != 2 or params.d != 2:
        raise UnsupportedDimension("exact split sampling is a d=2 feature")
    if n is None:
        n = k + 1  # no window entry is the start point
    homog = ell is not None
    ellv = np.asarray(ell, dtype=float) if homog else None
    x0 = pts[k]
    nrm = float(np.linalg.norm(x0))
    u = ellv if homog else (x0 / nrm if nrm > 1e-12 else np.zeros(2))
    good = good_geometry(pts, params, ell=ellv)
    delta, alpha = params.delta, params.alpha
    ball_vol = (math.pi * delta * delta) ** k

    def plain_block(win):
        blk = []
        area = 1.0
        in_corr = True
        for i in range(k):
            hist = _stage_history(win, n + i, homog)
            y, arc = sample_step_direct_2d(win[-1], hist, "ball", rng, ell=ellv)
            area *= 0.5 * arc.width
            if np.linalg.norm(y - (x0 + 0.5 * (i + 1) * u)) > delta:
                in_corr = False
            blk.append(y)
            win = (win + [y])[-(k + 1):]
        return win, blk, area, in_corr

    if good and V:
        win = list(pts)
        blk = []
        for i in range(1, k + 1):
            uu = rng.random(2)
            phi = 2.0 * math.pi * uu[0]
            rad = delta * math.sqrt(uu[1])
            y = x0 + 0.5 * i * u + rad * np.array([math.cos(phi), math.sin(phi)])
            blk.append(y)
            win = (win + [y])[-(k + 1):]
        return win, blk, True
    if good:
        for _ in range(RESIDUAL_CAP):
            win, blk, area, in_corr = plain_block(list(pts))
            if in_corr:
                if rng.random() < 1.0 - alpha * area / ball_vol:
                    return win, blk, False
            else:
                return win, blk, False
        raise SplitSamplerError(
            f"residual rejection stalled after {RESIDUAL_CAP} proposals")
    win, blk, _, _ = plain_block(list(pts))
    return win, blk, False


@dataclass
class SplitRunResult:
    """Split-sampler trajectory handle with its regeneration times."""

    config: WalkConfig
    blocks: int
    taus: np.ndarray         # block indices of renewals
    anchors: np.ndarray      # (n_renewals, 2) walker position at each renewal
    good_blocks: int
    steps: int
    final: np.ndarray
    trace_n: np.ndarray
    trace_x: np.ndarray
    trace_theta: np.ndarray
    rad_sums: np.ndarray
    rad_counts: np.ndarray
    stats_window: int

    @property
    def alpha(self) -> float:
        return self.config.delta ** (2 * self.config.k)

    @property
    def good_fraction(self) -> float:
        return self.good_blocks / self.blocks if self.blocks else 0.0


def _split_config(config: WalkConfig) -> WalkConfig:
    config.validate()
    if config.d != 2:
        raise UnsupportedDimension("exact split sampling is a d=2 feature")
    if config.variant == "sphere":
        raise InvalidInput(
            "split sampling needs increments with a planar density; "
            "the sphere variant has none")
    return config


def run_split(config: WalkConfig, blocks: int,
              use_kernel: bool = True) -> SplitRunResult:
    """Simulate ``blocks`` k-step blocks with the split sampler.

    The walk starts fresh at the origin (k plain steps build the first full
    window) and uses its own (seed, replica) stream, independent of plain
    runs.  Deterministic; the kernel and Python paths consume identical
    draws.
    """
    config = _split_config(config)
    if blocks < 1:
        raise InvalidInput(f"blocks must be >= 1, got {blocks}")
    k = config.k
    total = k + blocks * k
    gen = stream(config.seed, config.replica, PURPOSE_SPLIT)
    if use_kernel:
        return _run_split_kernel(config, blocks, total, gen)
    return _run_split_python(config, blocks, total, gen)


def _run_split_kernel(config, blocks, total, gen) -> SplitRunResult:
    k = config.k
    thin, sw = config.trace_thin, config.stats_window
    ntr = total // thin + 1
    nw = (total + sw - 1) // sw
    trace_x = np.zeros((ntr, 2))
    trace_theta = np.full(ntr, np.nan)
    trace_prop = np.zeros(ntr, dtype=np.int64)
    rad_sums = np.zeros(nw)
    rad_counts = np.zeros(nw, dtype=np.int64)
    theta_range = np.array([np.inf, -np.inf])
    wx = np.zeros(k + 1)
    wy = np.zeros(k + 1)
    istate = np.zeros(_kernels.ISTATE_LEN, dtype=np.int64)
    istate[_kernels.I_WLEN] = 1
    ell = config.ell_array()
    ellx, elly = (float(ell[0]), float(ell[1])) if ell is not None else (0.0, 0.0)
    homog = config.homogeneous
    u0 = gen.random((k, 2))
    code = _kernels.walk2d_direct(
        k, k, True, homog, ellx, elly, u0, thin, wx, wy, istate,
        trace_x, trace_theta, trace_prop, rad_sums, rad_counts, sw, 0,
        theta_range)
    if code != _kernels.OK:
        raise SplitSamplerError(f"initial block failed with code {code}")
    ren_tau = np.zeros(blocks, dtype=np.int64)
    ren_anchor = np.zeros((blocks, 2))
    good_count = np.zeros(1, dtype=np.int64)
    istate[_kernels.I_STEP] = 0
    buf = UniformBuffer(gen)
    while True:
        code = _kernels.split2d(
            k, blocks, homog, ellx, elly, config.delta,
            config.delta ** (2 * k), buf.buf, thin, wx, wy, istate,
            trace_x, trace_theta, rad_sums, rad_counts, sw, 0,
            ren_tau, ren_anchor, good_count)
        if code != _kernels.REFILL:
            break
        buf.refill(int(istate[_kernels.I_CURSOR]))
        istate[_kernels.I_CURSOR] = 0
    if code == _kernels.SPLIT_STALL:
        raise SplitSamplerError(
            f"residual rejection stalled in block {int(istate[_kernels.I_STEP])}")
    if code != _kernels.OK:
        raise SplitSamplerError(f"split kernel failed with code {code}")
    nren = int(istate[_kernels.I_NREN])
    return SplitRunResult(
        config=config, blocks=blocks,
        taus=ren_tau[:nren].copy(), anchors=ren_anchor[:nren].copy(),
        good_blocks=int(good_count[0]), steps=total,
        final=np.array([wx[k], wy[k]]),
        trace_n=thin * np.arange(ntr, dtype=np.int64),
        trace_x=trace_x, trace_theta=trace_theta,
        rad_sums=rad_sums, rad_counts=rad_counts, stats_window=sw)


def _run_split_python(config, blocks, total, gen) -> SplitRunResult:
    k = config.k
    params = GoodGeometryParams(delta=config.delta, d=2, k=k)
    ell = config.ell_array()
    homog = config.homogeneous
    thin, sw = config.trace_thin, config.stats_window
    window = [np.zeros(2)]
    positions = [np.zeros(2)]
    # initial block: k plain steps from the origin
    for i in range(k):
        hist = _stage_history(window, i, homog) if len(window) > 1 else []
        y, _ = sample_step_direct_2d(window[-1], hist, "ball", gen, ell=ell)
        window = (window + [y])[-(k + 1):]
        positions.append(y)
    taus = []
    anchors = []
    good_blocks = 0
    for m in range(blocks):
        n = k + m * k
        if good_geometry(window, params, ell=ell):
            good_blocks += 1
        v = gen.random() < params.alpha
        window, blk, flag = split_step_block(window, v, params, gen,
                                             ell=ell, n=n)
        if flag:
            taus.append(m)
            anchors.append(positions[-1].copy())
        positions.extend(blk)
    pos = np.asarray(positions)
    steps_arr = np.diff(pos, axis=0)
    norms = np.linalg.norm(pos[:-1], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        rinc = np.where(norms > 1e-12,
                        np.einsum("ij,ij->i", steps_arr, pos[:-1]) / np.maximum(norms, 1e-300),
                        0.0)
    nw = (total + sw - 1) // sw
    rad_sums = np.zeros(nw)
    rad_counts = np.zeros(nw, dtype=np.int64)
    idx = np.arange(total) // sw
    np.add.at(rad_sums, idx, rinc)
    np.add.at(rad_counts, idx, 1)
    ntr = total // thin + 1
    keep = thin * np.arange(ntr, dtype=np.int64)
    return SplitRunResult(
        config=config, blocks=blocks,
        taus=np.asarray(taus, dtype=np.int64),
        anchors=(np.asarray(anchors) if anchors else np.zeros((0, 2))),
        good_blocks=good_blocks, steps=total, final=pos[-1],
        trace_n=keep, trace_x=pos[keep],
        trace_theta=np.full(ntr, np.nan),
        rad_sums=rad_sums, rad_counts=rad_counts, stats_window=sw)


@dataclass
class GapSurvival:
    """Empirical P(gap >= 2r) with Wilson 95% intervals and the theory bound."""

    r: np.ndarray
    survival: np.ndarray
    wilson_low: np.ndarray
    wilson_high: np.ndarray
    bound: np.ndarray   # exp(-c r), c = -log(1 - alpha^2)
    c: float
    n_gaps: int


def _wilson(successes: np.ndarray, n: int, z: float = 1.959964):
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


def collect_renewals(result: SplitRunResult):
    """Renewal records plus the inter-renewal gap survival curve.

    The first record's gap counts blocks from the start of the run; the
    survival analysis uses only the later, identically distributed gaps.
    """
    taus = result.taus
    if taus.shape[0] == 0:
        warnings.warn("run produced no renewals; alpha^2 is small, use more blocks")
        return [], GapSurvival(np.zeros(0, dtype=np.int64), np.zeros(0),
                               np.zeros(0), np.zeros(0), np.zeros(0),
                               -math.log1p(-result.alpha ** 2), 0)
    records = []
    prev = -1
    for i, t in enumerate(taus):
        gap = int(t - prev) if i else int(t + 1)
        records.append(RenewalRecord(index=i + 1, tau=int(t),
                                     anchor=result.anchors[i], gap=gap))
        prev = int(t)
    gaps = np.diff(taus)
    c = -math.log1p(-result.alpha ** 2)
    if gaps.shape[0] == 0:
        return records, GapSurvival(np.zeros(0, dtype=np.int64), np.zeros(0),
                                    np.zeros(0), np.zeros(0), np.zeros(0), c, 0)
    rmax = int(np.max(gaps) // 2) + 1
    r = np.arange(rmax + 1, dtype=np.int64)
    succ = np.array([(gaps >= 2 * rr).sum() for rr in r], dtype=float)
    surv = succ / gaps.shape[0]
    lo, hi = _wilson(succ, gaps.shape[0])
    return records, GapSurvival(r=r, survival=surv, wilson_low=lo,
                                wilson_high=hi, bound=np.exp(-c * r), c=c,
                                n_gaps=int(gaps.shape[0]))
