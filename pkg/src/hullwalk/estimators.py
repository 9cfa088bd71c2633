"""Replicated statistical estimation on walk runs.

All reductions over replicas use exact (compensated) summation and consume
results in replica order, so every estimate is invariant under permutation
of replica completion and under the thread count that produced the runs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .engine import RunResult, WalkConfig, run_replicas
from .errors import InsufficientRenewals, InvalidInput
from .renewal import SplitRunResult

Z95 = 1.959964


def _fmean(values) -> float:
    vals = [float(v) for v in values]
    return math.fsum(vals) / len(vals)


def _fstd(values, mean: float) -> float:
    vals = [float(v) for v in values]
    if len(vals) < 2:
        return 0.0
    ss = math.fsum((v - mean) ** 2 for v in vals)
    return math.sqrt(ss / (len(vals) - 1))


@dataclass(frozen=True)
class SpeedEstimate:
    v_hat: float
    stderr: float
    ci95: tuple
    replicas: int
    steps: int
    fingerprint: dict

    def as_dict(self) -> dict:
        return {"v_hat": self.v_hat, "stderr": self.stderr,
                "ci95": list(self.ci95), "replicas": self.replicas,
                "steps": self.steps, "config": self.fingerprint}


def _common_fingerprint(runs: Sequence[RunResult]) -> dict:
    fps = []
    for r in runs:
        fp = r.config.fingerprint()
        fp.pop("replica")
        fps.append(fp)
    if any(fp != fps[0] for fp in fps[1:]):
        raise InvalidInput("replica runs have mismatched configurations")
    return fps[0]


def speed_estimate(runs: Sequence[RunResult]) -> SpeedEstimate:
    """Mean final-step speed ||X_N|| / N across replicas, with a normal CI."""
    if len(runs) < 2:
        raise InvalidInput(f"speed_estimate needs >= 2 replicas, got {len(runs)}")
    fp = _common_fingerprint(runs)
    steps = runs[0].steps
    if steps < 1000:
        raise InvalidInput(f"speed_estimate needs >= 1000 steps, got {steps}")
    speeds = [r.speed_final for r in runs]
    v = _fmean(speeds)
    se = _fstd(speeds, v) / math.sqrt(len(speeds))
    return SpeedEstimate(v_hat=v, stderr=se,
                         ci95=(v - Z95 * se, v + Z95 * se),
                         replicas=len(runs), steps=steps, fingerprint=fp)


@dataclass(frozen=True)
class DirectionSample:
    unit_vectors: np.ndarray
    statistic: float
    p_value: float
    test: str
    excluded: int

    def as_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "test": self.test, "replicas": int(self.unit_vectors.shape[0]),
                "excluded": self.excluded}


def direction_stats(finals, bins: int = 12) -> DirectionSample:
    """Uniformity test of the final-position directions.

    ``finals`` is an (R, d) array of final positions or a list of runs.
    Planar runs get a chi-square test over equal angle bins; d >= 3 gets a
    Rayleigh test on the resultant length.  Zero finals are excluded with a
    warning (a probability-zero event).
    """
    if isinstance(finals, (list, tuple)) and finals and isinstance(finals[0], RunResult):
        finals = np.array([r.final for r in finals])
    finals = np.asarray(finals, dtype=float)
    if finals.shape[0] < 50:
        raise InvalidInput(
            f"direction_stats needs >= 50 replicas, got {finals.shape[0]}")
    norms = np.linalg.norm(finals, axis=1)
    bad = norms <= 0.0
    excluded = int(bad.sum())
    if excluded:
        warnings.warn(f"excluded {excluded} replicas with final position 0")
    units = finals[~bad] / norms[~bad, None]
    n, d = units.shape
    if d == 2:
        ang = np.mod(np.arctan2(units[:, 1], units[:, 0]), 2.0 * np.pi)
        counts, _ = np.histogram(ang, bins=bins, range=(0.0, 2.0 * np.pi))
        expected = n / bins
        stat = float(((counts - expected) ** 2 / expected).sum())
        p = float(stats.chi2.sf(stat, bins - 1))
        test = f"chi2[{bins}]"
    else:
        rbar = float(np.linalg.norm(units.mean(axis=0)))
        stat = d * n * rbar * rbar
        p = float(stats.chi2.sf(stat, d))
        test = "rayleigh"
    return DirectionSample(unit_vectors=units, statistic=stat, p_value=p,
                           test=test, excluded=excluded)


def drift_profile(run: RunResult, window: Optional[int] = None) -> np.ndarray:
    """Windowed means of the radial increment along one run.

    ``window`` must be a multiple of the run's stats window (default: the
    stats window itself, normally 1000 steps).  The tail entry estimates the
    local speed and should approach the global speed estimate.
    """
    sw = run.stats_window
    if window is None:
        window = sw
    if window % sw != 0:
        raise InvalidInput(
            f"window must be a multiple of the run's stats window {sw}")
    group = window // sw
    nfull = (run.rad_counts.shape[0] // group) * group
    sums = run.rad_sums[:nfull].reshape(-1, group).sum(axis=1)
    counts = run.rad_counts[:nfull].reshape(-1, group).sum(axis=1)
    mask = counts > 0
    return sums[mask] / counts[mask]


@dataclass(frozen=True)
class RenewalCrossCheck:
    u_hat: float           # mean renewal displacement along ell
    lambda_hat: float      # mean inter-renewal gap in blocks
    v_derived: float       # u_hat / (k * lambda_hat)
    v_stderr: float        # delta-method standard error
    gap_autocorr: float    # lag-1 autocorrelation of gaps
    transverse_mean: float
    transverse_stderr: float
    n_pairs: int

    def as_dict(self) -> dict:
        return {"u_hat": self.u_hat, "lambda_hat": self.lambda_hat,
                "v_derived": self.v_derived, "v_stderr": self.v_stderr,
                "gap_autocorr": self.gap_autocorr,
                "transverse_mean": self.transverse_mean,
                "transverse_stderr": self.transverse_stderr,
                "n_pairs": self.n_pairs}


def crosscheck_renewal_speed(result: SplitRunResult, ell) -> RenewalCrossCheck:
    """Speed from regeneration cycles of a homogeneous split run.

    Uses the identity v = u / (k * lambda): mean displacement along ``ell``
    per cycle over mean cycle length in steps.  The delta-method standard
    error keeps the (strong) correlation between cycle displacement and
    cycle length.  Also reports the lag-1 gap autocorrelation and the
    transverse displacement mean, both of which should vanish for genuine
    regeneration.
    """
    ell = np.asarray(ell, dtype=float)
    taus = result.taus
    if taus.shape[0] < 1000:
        raise InsufficientRenewals(
            f"need >= 1000 renewals, got {taus.shape[0]}; run more blocks")
    k = result.config.k
    w = result.anchors
    du = (w[1:] - w[:-1]) @ ell
    perp = np.array([-ell[1], ell[0]])
    dperp = (w[1:] - w[:-1]) @ perp
    gaps = np.diff(taus).astype(float)
    n = gaps.shape[0]
    u_hat = _fmean(du)
    lam = _fmean(gaps)
    v = u_hat / (k * lam)
    cov = np.cov(np.vstack([du, gaps]))
    grad = np.array([1.0 / (k * lam), -u_hat / (k * lam * lam)])
    v_se = float(np.sqrt(grad @ cov @ grad / n))
    g0 = gaps - lam
    denom = float((g0 * g0).sum())
    autocorr = float((g0[:-1] * g0[1:]).sum() / denom) if denom > 0 else 0.0
    tmean = _fmean(dperp)
    tse = _fstd(dperp, tmean) / math.sqrt(n)
    return RenewalCrossCheck(u_hat=u_hat, lambda_hat=lam, v_derived=v,
                             v_stderr=v_se, gap_autocorr=autocorr,
                             transverse_mean=tmean, transverse_stderr=tse,
                             n_pairs=n)


@dataclass(frozen=True)
class KSweepRow:
    k: int
    estimate: SpeedEstimate
    ci_overlaps_previous: Optional[bool]

    def as_dict(self) -> dict:
        d = {"k": self.k, **self.estimate.as_dict()}
        d["ci_overlaps_previous"] = self.ci_overlaps_previous
        return d


def k_sweep(d: int, k_values: Sequence[int], steps: int, replicas: int,
            seed: int = 0, variant: str = "ball", threads: int = 1,
            **config_kw) -> list:
    """One speed estimate per memory length, ordered by k.

    Rows carry whether consecutive confidence intervals overlap; any
    monotonicity in k is reported, never asserted.
    """
    ks = sorted(set(int(k) for k in k_values))
    for k in ks:
        if k < d - 1:
            raise InvalidInput(f"k must be >= d-1: got k={k}, d={d}")
    rows = []
    prev_ci = None
    for k in ks:
        cfg = WalkConfig(d=d, k=k, steps=steps, variant=variant, seed=seed,
                         trace_thin=max(1, steps), **config_kw)
        runs = run_replicas(cfg, replicas, threads=threads)
        est = speed_estimate(runs)
        overlap = None
        if prev_ci is not None:
            overlap = est.ci95[0] <= prev_ci[1] and prev_ci[0] <= est.ci95[1]
        rows.append(KSweepRow(k=k, estimate=est, ci_overlaps_previous=overlap))
        prev_ci = est.ci95
    return rows
