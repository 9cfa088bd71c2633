"""The planar unit-memory angle chain and its exact speed.

For d = 2, k = 1 the hull interior angle at the walker evolves (up to an
origin correction that vanishes as the walk escapes) by the recursion
``theta' = |(2*pi - theta) * u - pi|`` with ``u`` uniform on [0, 1].  The
chain is uniformly ergodic and its stationary density is linear,
``(2 / (3*pi^2)) * (2*pi - t)`` on [0, pi].  Averaging the one-step radial
drift ``2 sin t / (6*pi - 3t)`` against that law gives the exact walk speed
``8 / (9*pi^2)`` for the ball increment law (and ``4 / (3*pi^2)`` for the
sphere law).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .errors import InsufficientSamples, InvalidInput
from .rng import PURPOSE_CHAIN, stream

PI = math.pi

#: exact speeds of the planar unit-memory walk
SPEED_BALL_2_1 = 8.0 / (9.0 * PI**2)
SPEED_SPHERE_2_1 = 4.0 / (3.0 * PI**2)

DEFAULT_BURNIN = 1000


def t_map(theta: float, u: float) -> float:
    """One chain step: |(2*pi - theta) * u - pi|, mapping [0,pi] into itself."""
    if not (0.0 <= theta <= PI):
        raise InvalidInput(f"theta must lie in [0, pi], got {theta}")
    if not (0.0 <= u <= 1.0):
        raise InvalidInput(f"u must lie in [0, 1], got {u}")
    return abs((2.0 * PI - theta) * u - PI)


def stationary_pdf(t):
    """Stationary angle density (2/(3*pi^2)) * (2*pi - t) on [0, pi], else 0."""
    t = np.asarray(t, dtype=float)
    out = (2.0 / (3.0 * PI**2)) * (2.0 * PI - t)
    out = np.where((t >= 0.0) & (t <= PI), out, 0.0)
    return out if out.ndim else float(out)


def stationary_cdf(t):
    """Stationary angle CDF t*(4*pi - t)/(3*pi^2), clamped outside [0, pi]."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, PI)
    out = tc * (4.0 * PI - tc) / (3.0 * PI**2)
    return out if out.ndim else float(out)


def stationary_law(t):
    """(pdf, cdf) of the stationary interior-angle law at t."""
    return stationary_pdf(t), stationary_cdf(t)


def local_drift(theta):
    """Expected radial increment given the interior angle: 2 sin t/(6*pi - 3t)."""
    t = np.asarray(theta, dtype=float)
    if np.any((t < -1e-12) | (t > PI + 1e-12)):
        raise InvalidInput("theta must lie in [0, pi]")
    out = 2.0 * np.sin(np.clip(t, 0.0, PI)) / (6.0 * PI - 3.0 * t)
    return out if out.ndim else float(out)


def pushforward_cdf(t: float) -> float:
    """CDF of one chain step from stationarity, by quadrature.

    Splits P(|(2*pi - theta) u - pi| <= t) into the two branches of the
    absolute value; used as a numerical fixed-point identity check against
    ``stationary_cdf``.
    """
    if not (0.0 <= t <= PI):
        raise InvalidInput(f"t must lie in [0, pi], got {t}")
    low, _ = integrate.quad(lambda y: stationary_pdf(y) / (2.0 * PI - y),
                            0.0, PI - t, epsabs=1e-13, limit=200)
    high, _ = integrate.quad(
        lambda y: (PI + t - y) * stationary_pdf(y) / (2.0 * PI - y),
        PI - t, PI, epsabs=1e-13, limit=200)
    return 2.0 * t * low + high


@dataclass
class ChainSample:
    """Post-burn-in chain trajectory plus its fit to the stationary law."""

    samples: np.ndarray
    n_burnin: int
    seed: int
    init: float
    ks_distance: float


def simulate_chain(n: int, seed: int = 0, init: float = 0.0,
                   burnin: int = DEFAULT_BURNIN) -> ChainSample:
    """Iterate the angle recursion with i.i.d. uniforms; report the KS fit.

    Returns the ``n`` post-burn-in angles and the one-sample KS distance
    against the stationary CDF.
    """
    if n < 1:
        raise InvalidInput(f"n must be >= 1, got {n}")
    if not (0.0 <= init <= PI):
        raise InvalidInput(f"init must lie in [0, pi], got {init}")
    gen = stream(seed, 0, PURPOSE_CHAIN)
    u = gen.random(burnin + n)
    out = np.empty(n)
    x = init
    two_pi = 2.0 * PI
    for i in range(burnin):
        x = abs((two_pi - x) * u[i] - PI)
    for i in range(n):
        x = abs((two_pi - x) * u[burnin + i] - PI)
        out[i] = x
    ks = stats.kstest(out, stationary_cdf).statistic
    return ChainSample(samples=out, n_burnin=burnin, seed=seed, init=init,
                       ks_distance=float(ks))


@dataclass(frozen=True)
class SpeedValue:
    value: float
    stderr: float
    method: str


def speed_2_1(method: str = "closed_form", n: int = 1_000_000, seed: int = 0,
              law: str = "ball") -> SpeedValue:
    """Speed of the planar unit-memory walk, three ways.

    ``closed_form`` returns the exact constant; ``quadrature`` integrates
    the local drift against the stationary density; ``chain_mc`` averages
    the local drift along a simulated chain with a batch-means standard
    error.  ``law`` selects the ball or sphere increment variant.
    """
    if law not in ("ball", "sphere"):
        raise InvalidInput(f"unknown increment law {law!r}")
    if law == "ball":
        g, exact = local_drift, SPEED_BALL_2_1
    else:
        def g(t):
            t = np.asarray(t, dtype=float)
            out = np.sin(t) / (2.0 * PI - t)
            return out if out.ndim else float(out)
        exact = SPEED_SPHERE_2_1
    if method == "closed_form":
        return SpeedValue(exact, 0.0, method)
    if method == "quadrature":
        val, err = integrate.quad(lambda t: g(t) * stationary_pdf(t),
                                  0.0, PI, epsabs=1e-12, limit=200)
        return SpeedValue(float(val), float(err), method)
    if method == "chain_mc":
        if n < 1000:
            raise InsufficientSamples(
                f"chain_mc needs at least 1000 samples, got {n}")
        chain = simulate_chain(n, seed=seed)
        vals = g(chain.samples)
        nb = int(math.sqrt(n))
        usable = (n // nb) * nb
        batches = vals[:usable].reshape(nb, -1).mean(axis=1)
        se = float(batches.std(ddof=1) / math.sqrt(nb))
        return SpeedValue(float(vals.mean()), se, method)
    raise InvalidInput(f"unknown method {method!r}")
