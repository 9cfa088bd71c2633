"""Step-by-step simulation of the hull-avoiding walk.

Two code paths produce identical streams of positions for d = 2: compiled
kernels (the default) and a pure-Python reference built from the public
operations below.  Both consume the replica's uniform stream in the same
documented order, so runs are bit-comparable across paths, machines, and
thread counts.

A walk is a deterministic function of ``(seed, replica)`` plus the
configuration; replicas are independent streams and may run concurrently.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DegenerateConfiguration, InvalidInput, SamplerStall
from .geometry import (ConeGenerators, cone_contains, sector_from_directions,
                       TWO_PI)
from .rng import PURPOSE_WALK, UniformBuffer, stream

DELTA_MAX = 0.125 - 1e-6


@dataclass(frozen=True)
class WalkConfig:
    """All parameters of one walk run."""

    d: int = 2
    k: int = 1
    steps: int = 1000
    variant: str = "ball"          # ball | sphere | homogeneous
    ell: Optional[tuple] = None    # unit direction, homogeneous variant only
    sampler: Optional[str] = None  # rejection | direct2d | None = auto
    delta: float = 0.1
    seed: int = 0
    replica: int = 0
    trace_thin: int = 1
    stats_window: int = 1000

    def validate(self) -> "WalkConfig":
        if self.d < 2:
            raise InvalidInput(f"d must be >= 2, got {self.d}")
        if self.k < self.d - 1:
            raise InvalidInput(
                f"k must be >= d-1 (shorter memory leaves the walk with no "
                f"interaction): got k={self.k}, d={self.d}")
        if self.steps < 1:
            raise InvalidInput(f"steps must be >= 1, got {self.steps}")
        if self.variant not in ("ball", "sphere", "homogeneous"):
            raise InvalidInput(f"unknown variant {self.variant!r}")
        if self.variant == "homogeneous":
            if self.ell is None:
                raise InvalidInput("homogeneous variant requires ell")
            ell = np.asarray(self.ell, dtype=float)
            if ell.shape != (self.d,):
                raise InvalidInput(f"ell must have dimension {self.d}")
            if abs(float(np.linalg.norm(ell)) - 1.0) > 1e-9:
                raise InvalidInput("ell must be a unit vector")
        elif self.ell is not None:
            raise InvalidInput("ell is only meaningful for the homogeneous variant")
        if self.resolved_sampler() == "direct2d" and self.d != 2:
            raise InvalidInput("direct2d sampler requires d=2")
        if not (0.0 < self.delta <= DELTA_MAX):
            raise InvalidInput(f"delta must lie in (0, 1/8), got {self.delta}")
        if self.trace_thin < 1:
            raise InvalidInput(f"trace_thin must be >= 1, got {self.trace_thin}")
        if self.stats_window < 1:
            raise InvalidInput(f"stats_window must be >= 1, got {self.stats_window}")
        if self.replica < 0:
            raise InvalidInput(f"replica must be >= 0, got {self.replica}")
        return self

    def resolved_sampler(self) -> str:
        if self.sampler is not None:
            return self.sampler
        return "direct2d" if self.d == 2 else "rejection"

    @property
    def increment_law(self) -> str:
        return "sphere" if self.variant == "sphere" else "ball"

    @property
    def homogeneous(self) -> bool:
        return self.variant == "homogeneous"

    def ell_array(self) -> Optional[np.ndarray]:
        return None if self.ell is None else np.asarray(self.ell, dtype=float)

    def fingerprint(self) -> dict:
        """Config echo for summaries; reproduces the run exactly."""
        return {
            "d": self.d, "k": self.k, "steps": self.steps,
            "variant": self.variant,
            "ell": None if self.ell is None else list(map(float, self.ell)),
            "sampler": self.resolved_sampler(), "delta": self.delta,
            "seed": self.seed, "replica": self.replica,
            "trace_thin": self.trace_thin, "stats_window": self.stats_window,
        }


@dataclass
class WalkState:
    """Current position plus the ring buffer of the last min(n,k)+1 positions."""

    position: np.ndarray
    window: list                  # oldest first; last entry equals position
    n: int = 0
    origin_included: bool = True  # False in homogeneous mode

    @classmethod
    def fresh(cls, config: WalkConfig) -> "WalkState":
        z = np.zeros(config.d)
        return cls(position=z, window=[z], n=0,
                   origin_included=not config.homogeneous)

    @classmethod
    def from_window(cls, window, n: int, config: WalkConfig) -> "WalkState":
        pts = [np.asarray(p, dtype=float) for p in window]
        if len(pts) != min(n, config.k) + 1:
            raise InvalidInput(
                f"window must hold min(n,k)+1 positions, got {len(pts)}")
        return cls(position=pts[-1], window=pts, n=n,
                   origin_included=not config.homogeneous)

    def constraint_history(self) -> list:
        """Window entries that constrain the next step (all but the current
        position; in homogeneous mode the start point X_0 never does)."""
        first = self.n - (len(self.window) - 1)
        pts = []
        for i, p in enumerate(self.window[:-1]):
            if not self.origin_included and first + i == 0:
                continue
            pts.append(p)
        return pts

    def pushed(self, y: np.ndarray, k: int) -> "WalkState":
        w = self.window + [y]
        if len(w) > k + 1:
            w = w[-(k + 1):]
        return WalkState(position=y, window=w, n=self.n + 1,
                         origin_included=self.origin_included)


@dataclass(frozen=True)
class StepStats:
    proposals_used: int
    radial_increment: float


@dataclass
class RunResult:
    """Trajectory handle: thinned trace plus order-independent aggregates."""

    config: WalkConfig
    trace_n: np.ndarray           # retained step indices (multiples of thin)
    trace_x: np.ndarray           # (m, d)
    trace_theta: Optional[np.ndarray]  # (m,), d = 2 only
    trace_prop: np.ndarray        # proposals used to arrive at each record
    final: np.ndarray
    steps: int
    total_proposals: int
    rad_sums: np.ndarray          # windowed sums of radial increments
    rad_counts: np.ndarray
    stats_window: int
    theta_min: float = math.nan
    theta_max: float = math.nan

    @property
    def speed_final(self) -> float:
        return float(np.linalg.norm(self.final)) / self.steps

    def windowed_drift(self) -> np.ndarray:
        mask = self.rad_counts > 0
        return self.rad_sums[mask] / self.rad_counts[mask]


def propose_rejection(x, gens: ConeGenerators, increment_law: str, rng,
                      cap: int = _kernels.PROPOSAL_CAP):
    """Uniform proposals on the ball/sphere at ``x``, filtered by the cone.

    Per-proposal draws: d=2 uses ``[angle, radius]`` (ball) or ``[angle]``
    (sphere); d>=3 uses d standard normals plus one uniform for the ball
    radius.  Raises SamplerStall past ``cap`` proposals.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    ball = increment_law == "ball"
    for props in range(1, cap + 1):
        if d == 2:
            phi = TWO_PI * rng.random()
            r = math.sqrt(rng.random()) if ball else 1.0
            step = np.array([r * math.cos(phi), r * math.sin(phi)])
        else:
            g = rng.standard_normal(d)
            g /= np.linalg.norm(g)
            r = rng.random() ** (1.0 / d) if ball else 1.0
            step = r * g
        if not cone_contains(step, gens):
            return x + step, props
    raise SamplerStall(f"no admissible proposal in {cap} attempts at x={x}")


def sample_step_direct_2d(x, history, increment_law: str, rng, ell=None):
    """Exact planar step: angle uniform on the admissible arc, radius law exact.

    Always consumes two uniforms ``[angle, radius]`` so the ball and sphere
    laws share one stream layout (the radius draw is unused on the sphere).
    Propagates DegenerateConfiguration from the sector computation.
    """
    x = np.asarray(x, dtype=float)
    gens = ConeGenerators.from_constraints(x, history, ell=ell)
    arc = sector_from_directions(gens.directions)
    u = rng.random(2)
    phi = arc.start + arc.width * u[0]
    r = math.sqrt(u[1]) if increment_law == "ball" else 1.0
    return x + np.array([r * math.cos(phi), r * math.sin(phi)]), arc


def advance(state: WalkState, config: WalkConfig, rng):
    """One transition of the walk; returns (new_state, StepStats)."""
    x = state.position
    history = state.constraint_history()
    ell = config.ell_array()
    if config.resolved_sampler() == "direct2d":
        y, _arc = sample_step_direct_2d(x, history, config.increment_law,
                                        rng, ell=ell)
        props = 1
    else:
        gens = ConeGenerators.from_constraints(x, history, ell=ell)
        y, props = propose_rejection(x, gens, config.increment_law, rng)
    nx = float(np.linalg.norm(x))
    rinc = 0.0 if nx <= 1e-12 else float((y - x) @ x) / nx
    return state.pushed(y, config.k), StepStats(proposals_used=props,
                                                radial_increment=rinc)


def _alloc_outputs(config: WalkConfig, steps: int):
    thin = config.trace_thin
    ntr = steps // thin + 1
    nw = (steps + config.stats_window - 1) // config.stats_window
    return (np.zeros((ntr, config.d)), np.full(ntr, np.nan),
            np.zeros(ntr, dtype=np.int64), np.zeros(nw), np.zeros(nw, dtype=np.int64))


def _result_from_arrays(config, steps_done, trace_x, trace_theta, trace_prop,
                        final, total_props, rad_sums, rad_counts,
                        theta_min=math.nan, theta_max=math.nan) -> RunResult:
    thin = config.trace_thin
    if steps_done == config.steps:
        m = steps_done // thin + 1
    else:  # partial run: keep only fully written records
        m = (steps_done + thin - 1) // thin
    return RunResult(
        config=config,
        trace_n=thin * np.arange(m, dtype=np.int64),
        trace_x=trace_x[:m],
        trace_theta=trace_theta[:m] if config.d == 2 else None,
        trace_prop=trace_prop[:m],
        final=final,
        steps=steps_done,
        total_proposals=total_props,
        rad_sums=rad_sums,
        rad_counts=rad_counts,
        stats_window=config.stats_window,
        theta_min=theta_min,
        theta_max=theta_max,
    )


def _run_kernel_2d(config: WalkConfig) -> RunResult:
    k, steps = config.k, config.steps
    gen = stream(config.seed, config.replica, PURPOSE_WALK)
    wx = np.zeros(k + 1)
    wy = np.zeros(k + 1)
    istate = np.zeros(_kernels.ISTATE_LEN, dtype=np.int64)
    istate[_kernels.I_WLEN] = 1
    trace_x, trace_theta, trace_prop, rad_sums, rad_counts = _alloc_outputs(config, steps)
    theta_range = np.array([np.inf, -np.inf])
    ell = config.ell_array()
    ellx, elly = (float(ell[0]), float(ell[1])) if ell is not None else (0.0, 0.0)
    ball = config.increment_law == "ball"
    if config.resolved_sampler() == "direct2d":
        u = gen.random((steps, 2))
        code = _kernels.walk2d_direct(
            k, steps, ball, config.homogeneous, ellx, elly, u,
            config.trace_thin, wx, wy, istate, trace_x, trace_theta,
            trace_prop, rad_sums, rad_counts, config.stats_window, 0, theta_range)
    else:
        buf = UniformBuffer(gen)
        while True:
            code = _kernels.walk2d_reject(
                k, steps, ball, config.homogeneous, ellx, elly, buf.buf,
                config.trace_thin, wx, wy, istate, trace_x, trace_theta,
                trace_prop, rad_sums, rad_counts, config.stats_window, 0,
                theta_range)
            if code != _kernels.REFILL:
                break
            buf.refill(int(istate[_kernels.I_CURSOR]))
            istate[_kernels.I_CURSOR] = 0
    steps_done = int(istate[_kernels.I_STEP])
    wlen = int(istate[_kernels.I_WLEN])
    final = np.array([wx[wlen - 1], wy[wlen - 1]])
    result = _result_from_arrays(
        config, steps_done, trace_x, trace_theta, trace_prop, final,
        int(istate[_kernels.I_PROPS]), rad_sums, rad_counts,
        float(theta_range[0]), float(theta_range[1]))
    if code == _kernels.DEGENERATE:
        exc = DegenerateConfiguration(
            f"walker left the extreme-point regime at step {steps_done}")
        exc.partial = result
        raise exc
    if code == _kernels.STALL:
        raise SamplerStall(
            f"proposal cap exceeded at step {steps_done}", partial=result)
    return result


def _run_python(config: WalkConfig) -> RunResult:
    gen = stream(config.seed, config.replica, PURPOSE_WALK)
    state = WalkState.fresh(config)
    steps, thin, sw = config.steps, config.trace_thin, config.stats_window
    trace_x, trace_theta, trace_prop, rad_sums, rad_counts = _alloc_outputs(config, steps)
    theta_min, theta_max = math.inf, -math.inf
    total_props = 0
    d2 = config.d == 2
    try:
        for n in range(steps):
            if d2:
                gens = ConeGenerators.from_constraints(
                    state.position, state.constraint_history(),
                    ell=config.ell_array())
                theta = sector_from_directions(gens.directions).interior_angle
                theta_min = min(theta_min, theta)
                theta_max = max(theta_max, theta)
            if n % thin == 0:
                r = n // thin
                trace_x[r] = state.position
                if d2:
                    trace_theta[r] = theta
            state, stats = advance(state, config, gen)
            total_props += stats.proposals_used
            rad_sums[n // sw] += stats.radial_increment
            rad_counts[n // sw] += 1
            if state.n % thin == 0:
                trace_prop[state.n // thin] = stats.proposals_used
    except (SamplerStall, DegenerateConfiguration) as exc:
        exc.partial = _result_from_arrays(
            config, state.n, trace_x, trace_theta, trace_prop,
            state.position.copy(), total_props, rad_sums, rad_counts,
            theta_min, theta_max)
        raise
    if steps % thin == 0:
        r = steps // thin
        trace_x[r] = state.position
        if d2:
            gens = ConeGenerators.from_constraints(
                state.position, state.constraint_history(), ell=config.ell_array())
            trace_theta[r] = sector_from_directions(gens.directions).interior_angle
    return _result_from_arrays(
        config, steps, trace_x, trace_theta, trace_prop,
        state.position.copy(), total_props, rad_sums, rad_counts,
        theta_min, theta_max)


def run(config: WalkConfig, use_kernel: Optional[bool] = None) -> RunResult:
    """Simulate one replica; deterministic function of (seed, replica).

    ``use_kernel`` forces the compiled (True) or pure-Python (False) path;
    by default d = 2 runs compiled.
    """
    config.validate()
    if use_kernel is None:
        use_kernel = config.d == 2
    if use_kernel and config.d != 2:
        raise InvalidInput("compiled kernels only cover d=2")
    return _run_kernel_2d(config) if use_kernel else _run_python(config)


def run_replicas(config: WalkConfig, replicas: int, threads: int = 1,
                 use_kernel: Optional[bool] = None) -> list:
    """Run ``replicas`` independent copies (replica ids 0..replicas-1).

    Results are returned in replica order regardless of scheduling, so any
    downstream aggregation is reproducible across thread counts.
    """
    config.validate()
    if replicas < 1:
        raise InvalidInput(f"replicas must be >= 1, got {replicas}")
    configs = [replace(config, replica=r) for r in range(replicas)]
    if threads <= 1:
        return [run(c, use_kernel=use_kernel) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: run(c, use_kernel=use_kernel), configs))
