"""Monte Carlo evaluation of the imaginary-time magnetic semigroup.

``u(x, t) = E[exp(-S) g(x + X(t))]`` along truncated jump paths, with
action ``S = i (S1 + S2 + S3) + S4``:

* ``S1`` the midpoint phase: for each jump from ``z`` to ``z + y`` the
  increment ``a(z + y/2) . y``;
* ``S2`` the phase of jumps below the simulation cutoff.  Those jumps are
  never drawn, so ``S2`` is identically zero here and its dropped mean is
  carried as an explicit budget;
* ``S3`` an optional deterministic compensator for that dropped mean,
  ``(M2 / (2 d)) * int_0^t trace Da(x + X(s)) ds`` with ``M2`` the
  second moment of the jump measure below the cutoff;
* ``S4`` the potential integrated exactly over the holding intervals of
  the piecewise-constant path.

The weight ``exp(-S)`` has modulus ``exp(-S4) <= 1`` for nonnegative
potentials, so every estimate is a contraction of the initial profile.

Truncation-bias budget.  Dropping jumps below ``eps`` displaces the
evaluation points by a centered sum with total second moment
``t * M2(eps)``.  A second-order expansion of the payoff in that
displacement is bounded by the curvature of the composite
``exp(-S4) g``; the dropped midpoint phase has mean bounded through the
divergence norm and second moment through the field norm.  All three
pieces are linear in ``M2(eps)``, hence vanish as the cutoff shrinks.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError
from .fields import FieldSpec
from .levy import ModelParams, small_ball_second_moment
from .radial_map import get_radial_map
from .sampler import JumpBatch, JumpPath, sample_paths, transform_batch

__all__ = [
    "ActionValue",
    "MCEstimate",
    "CoupledEstimate",
    "EpsilonCertificate",
    "action",
    "estimate_u",
    "estimate_u_grid",
    "estimate_u_coupled",
    "epsilon_budget",
    "certify_epsilon",
]

_BLOCK = 2048
_FSUM_THRESHOLD = 100_000


def _accurate_sum(values: np.ndarray) -> float:
    # exact (compensated) accumulation once a single path carries enough
    # terms for plain summation error to reach the phase tolerance
    arr = np.asarray(values, dtype=float)
    if arr.size > _FSUM_THRESHOLD:
        return math.fsum(arr.tolist())
    return float(np.sum(arr))


def _segment_sums(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    csum = np.concatenate(([0.0], np.cumsum(values)))
    return csum[offsets[1:]] - csum[offsets[:-1]]


@lru_cache(maxsize=512)
def _m2(d: int, m: float, cutoff: float) -> float:
    return small_ball_second_moment(cutoff, ModelParams(d, m))


@dataclass(frozen=True)
class ActionValue:
    """Decomposed action of one path; ``weight`` is ``exp(-S)``."""

    jump_phase: float
    small_phase: float
    small_phase_budget: float
    correction_phase: float
    potential: float

    @property
    def phase(self) -> float:
        return self.jump_phase + self.small_phase + self.correction_phase

    @property
    def weight(self) -> complex:
        return cmath.exp(complex(-self.potential, -self.phase))


def action(path: JumpPath, x, fields: FieldSpec, *,
           correction: bool = True) -> ActionValue:
    """Exact action of one path started at ``x``.

    Holding intervals are summed exactly (no time grid): the state is
    constant between jumps, so the potential integral is a finite sum.
    """
    if fields.d != path.params.d:
        raise ConfigError("field dimension does not match the path")
    d = path.params.d
    x = np.asarray(x, dtype=float).reshape(d)
    pos = np.vstack([np.zeros((1, d)), np.cumsum(path.jumps, axis=0)])

    if path.n_jumps and fields.sup_a > 0.0:
        mid = x + pos[:-1] + 0.5 * path.jumps
        s1 = _accurate_sum(np.sum(fields.a(mid) * path.jumps, axis=1))
    else:
        s1 = 0.0

    bounds = np.concatenate(([0.0], path.times, [path.horizon]))
    dur = np.diff(bounds)
    states = x + pos
    s4 = _accurate_sum(fields.v(states) * dur)

    m2 = _m2(d, path.params.m, path.cutoff)
    s3 = 0.0
    if correction and fields.sup_da > 0.0:
        s3 = m2 / (2.0 * d) * _accurate_sum(fields.trace_da(states) * dur)
    s2_budget = 0.5 * fields.sup_da * path.horizon * m2
    return ActionValue(jump_phase=float(s1), small_phase=0.0,
                       small_phase_budget=float(s2_budget),
                       correction_phase=float(s3), potential=float(s4))


class _Geometry:
    """Flat per-jump state of a batch, reusable across start points.

    ``rel_before[j]`` is the path value just before jump ``j`` relative
    to the path start; holding durations include the final stretch up to
    the horizon.
    """

    def __init__(self, batch: JumpBatch):
        self.batch = batch
        d = batch.params.d
        counts = np.diff(batch.offsets)
        total = batch.times.size
        path_id = np.repeat(np.arange(batch.n_paths), counts)
        csum = np.vstack([np.zeros((1, d)), np.cumsum(batch.jumps, axis=0)])
        start = csum[batch.offsets[:-1]]
        self.rel_before = csum[:total] - start[path_id]
        self.rel_end = csum[batch.offsets[1:]] - start
        if total:
            prev = np.concatenate(([0.0], batch.times[:-1]))
            prev[batch.offsets[:-1][counts > 0]] = 0.0
            self.dur = batch.times - prev
        else:
            self.dur = np.zeros(0)
        last = np.zeros(batch.n_paths)
        nz = counts > 0
        last[nz] = batch.times[batch.offsets[1:][nz] - 1]
        self.tail_dur = batch.horizon - last

    def values(self, fields: FieldSpec, x, m2: float,
               correction: bool) -> np.ndarray:
        """Per-path Monte Carlo values ``exp(-S) g(x + X(T))``."""
        b = self.batch
        x = np.asarray(x, dtype=float).reshape(b.params.d)
        left = x + self.rel_before
        ends = x + self.rel_end

        phase = np.zeros(b.n_paths)
        if fields.sup_a > 0.0:
            mid = left + 0.5 * b.jumps
            terms = np.sum(fields.a(mid) * b.jumps, axis=1)
            phase = _segment_sums(terms, b.offsets)
        pot = _segment_sums(fields.v(left) * self.dur, b.offsets) \
            + fields.v(ends) * self.tail_dur
        if correction and fields.sup_da > 0.0:
            comp = _segment_sums(fields.trace_da(left) * self.dur,
                                 b.offsets) \
                + fields.trace_da(ends) * self.tail_dur
            phase = phase + m2 / (2.0 * b.params.d) * comp
        return np.exp(-pot - 1j * phase) * fields.g(ends)


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with per-component standard errors."""

    mean: complex
    stderr_re: float
    stderr_im: float
    n: int

    @property
    def stderr(self) -> float:
        return math.hypot(self.stderr_re, self.stderr_im)


def _column_sums(col: np.ndarray) -> tuple[complex, float, float]:
    """First and second per-component moment sums of one value column."""
    return (complex(np.sum(col)), float(np.sum(col.real ** 2)),
            float(np.sum(col.imag ** 2)))


def _estimate_from_sums(s: complex, q_re: float, q_im: float,
                        n: int) -> MCEstimate:
    # q - s^2/n can dip a few ulps below zero on near-constant columns
    var_re = max(q_re - s.real * s.real / n, 0.0) / (n - 1)
    var_im = max(q_im - s.imag * s.imag / n, 0.0) / (n - 1)
    return MCEstimate(mean=s / n, stderr_re=math.sqrt(var_re / n),
                      stderr_im=math.sqrt(var_im / n), n=n)


def _blocks(n: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + _BLOCK, n)) for lo in range(0, n, _BLOCK)]


def _run_blocks(n_paths: int, threads: int, work) -> None:
    blocks = _blocks(n_paths)
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: work(*b), blocks))
    else:
        for lo, hi in blocks:
            work(lo, hi)


def _check_mc_args(fields: FieldSpec, horizon: float, n_paths: int) -> None:
    if not (horizon > 0 and math.isfinite(horizon)):
        raise DomainError("horizon must be finite and > 0")
    if n_paths < 2:
        raise DomainError("need at least 2 paths for a standard error")


def estimate_u_grid(params: ModelParams, fields: FieldSpec, xs,
                    horizon: float, cutoff: float, n_paths: int, seed: int,
                    experiment: int, *, correction: bool = True,
                    threads: int = 1) -> list[MCEstimate]:
    """Estimates at several start points sharing one set of paths.

    Sharing paths across ``xs`` correlates the estimates (deliberately:
    the sup-over-grid statistics difference out the common noise) but
    leaves each individual estimate exact.  Each fixed-size block of
    paths is reduced to per-column moment sums on the spot, and block
    sums merge in block order, so memory stays O(block) and the result
    is a pure function of ``(params, fields, xs, horizon, cutoff,
    n_paths, seed, experiment)`` whatever the thread count.
    """
    if fields.d != params.d:
        raise ConfigError("field dimension does not match the model")
    _check_mc_args(fields, horizon, n_paths)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != params.d:
        raise ConfigError("start points must have shape (k, d)")
    n_x = xs.shape[0]
    n_blocks = len(_blocks(n_paths))
    s1 = np.empty((n_blocks, n_x), dtype=complex)
    q_re = np.empty((n_blocks, n_x))
    q_im = np.empty((n_blocks, n_x))

    def work(lo: int, hi: int) -> None:
        batch = sample_paths(params, horizon, cutoff, seed, experiment,
                             hi - lo, start_index=lo)
        geo = _Geometry(batch)
        m2 = _m2(params.d, params.m, batch.cutoff)
        j = lo // _BLOCK
        for k in range(n_x):
            s1[j, k], q_re[j, k], q_im[j, k] = _column_sums(
                geo.values(fields, xs[k], m2, correction))

    _run_blocks(n_paths, threads, work)
    s, qr, qi = s1.sum(axis=0), q_re.sum(axis=0), q_im.sum(axis=0)
    return [_estimate_from_sums(complex(s[k]), float(qr[k]), float(qi[k]),
                                n_paths) for k in range(n_x)]


def estimate_u(params: ModelParams, fields: FieldSpec, x, horizon: float,
               cutoff: float, n_paths: int, seed: int, experiment: int, *,
               correction: bool = True, threads: int = 1) -> MCEstimate:
    """Monte Carlo value of the semigroup at one start point."""
    return estimate_u_grid(params, fields, np.reshape(x, (1, -1)), horizon,
                           cutoff, n_paths, seed, experiment,
                           correction=correction, threads=threads)[0]


@dataclass(frozen=True)
class CoupledEstimate:
    """Per-mass estimates built on one shared massless noise.

    Row ``i`` of every array belongs to ``masses[i]``; the last row is
    the massless limit itself.  ``diff_means`` and the matching standard
    errors describe ``u_mass - u_limit`` path by path, which is the whole
    point of the coupling: the common noise cancels before the variance
    is taken.
    """

    masses: tuple[float, ...]
    xs: np.ndarray
    n: int
    means: np.ndarray
    stderrs_re: np.ndarray
    stderrs_im: np.ndarray
    diff_means: np.ndarray
    diff_stderrs_re: np.ndarray
    diff_stderrs_im: np.ndarray

    def stderr(self, i: int, k: int) -> float:
        return math.hypot(self.stderrs_re[i, k], self.stderrs_im[i, k])

    def diff_stderr(self, i: int, k: int) -> float:
        return math.hypot(self.diff_stderrs_re[i, k],
                          self.diff_stderrs_im[i, k])


def estimate_u_coupled(masses, fields: FieldSpec, xs, horizon: float,
                       cutoff: float, n_paths: int, seed: int,
                       experiment: int, *, correction: bool = True,
                       threads: int = 1) -> CoupledEstimate:
    """Evaluate every mass on transformed copies of one massless batch.

    ``masses`` must decrease strictly to a final ``0.0``.  The massless
    row is computed from the untransformed batch, so it is bit-identical
    to :func:`estimate_u_grid` at mass zero with the same stream
    coordinates.
    """
    masses = tuple(float(m) for m in masses)
    if len(masses) < 1 or masses[-1] != 0.0:
        raise ConfigError("mass ladder must end at 0.0")
    if any(a <= b for a, b in zip(masses, masses[1:])):
        raise ConfigError("mass ladder must be strictly decreasing")
    _check_mc_args(fields, horizon, n_paths)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    d = fields.d
    if xs.shape[1] != d:
        raise ConfigError("start points must have shape (k, d)")
    params0 = ModelParams(d, 0.0)
    n_masses, n_x = len(masses), xs.shape[0]

    m2s = []
    for m in masses:
        cut = float(get_radial_map(d, m).l_inverse(cutoff)) if m > 0 \
            else float(cutoff)
        m2s.append(_m2(d, m, cut))

    n_blocks = len(_blocks(n_paths))
    shape = (n_masses, n_blocks, n_x)
    s1 = np.empty(shape, dtype=complex)
    q_re, q_im = np.empty(shape), np.empty(shape)
    ds1 = np.empty(shape, dtype=complex)
    dq_re, dq_im = np.empty(shape), np.empty(shape)

    def work(lo: int, hi: int) -> None:
        base = sample_paths(params0, horizon, cutoff, seed, experiment,
                            hi - lo, start_index=lo)
        j = lo // _BLOCK
        cols = np.empty((n_masses, hi - lo, n_x), dtype=complex)
        for i, m in enumerate(masses):
            geo = _Geometry(transform_batch(base, m))
            for k in range(n_x):
                cols[i, :, k] = geo.values(fields, xs[k], m2s[i],
                                           correction)
                s1[i, j, k], q_re[i, j, k], q_im[i, j, k] = _column_sums(
                    cols[i, :, k])
        for i in range(n_masses):
            for k in range(n_x):
                ds1[i, j, k], dq_re[i, j, k], dq_im[i, j, k] = \
                    _column_sums(cols[i, :, k] - cols[-1, :, k])

    _run_blocks(n_paths, threads, work)

    # block sums merge in block order with the same kernel the plain
    # estimator uses, so the massless row stays bit-identical to it
    means = np.empty((n_masses, n_x), dtype=complex)
    s_re = np.empty((n_masses, n_x))
    s_im = np.empty((n_masses, n_x))
    d_means = np.empty((n_masses, n_x), dtype=complex)
    d_re = np.empty((n_masses, n_x))
    d_im = np.empty((n_masses, n_x))
    for i in range(n_masses):
        ms, mr, mi = s1[i].sum(axis=0), q_re[i].sum(axis=0), \
            q_im[i].sum(axis=0)
        vs, vr, vi = ds1[i].sum(axis=0), dq_re[i].sum(axis=0), \
            dq_im[i].sum(axis=0)
        for k in range(n_x):
            est = _estimate_from_sums(complex(ms[k]), float(mr[k]),
                                      float(mi[k]), n_paths)
            means[i, k] = est.mean
            s_re[i, k], s_im[i, k] = est.stderr_re, est.stderr_im
            dst = _estimate_from_sums(complex(vs[k]), float(vr[k]),
                                      float(vi[k]), n_paths)
            d_means[i, k] = dst.mean
            d_re[i, k], d_im[i, k] = dst.stderr_re, dst.stderr_im
    return CoupledEstimate(masses=masses, xs=xs, n=n_paths, means=means,
                           stderrs_re=s_re, stderrs_im=s_im,
                           diff_means=d_means, diff_stderrs_re=d_re,
                           diff_stderrs_im=d_im)


def epsilon_budget(params: ModelParams, fields: FieldSpec, horizon: float,
                   cutoff: float) -> dict[str, float]:
    """Bias budget of simulating with jumps below ``cutoff`` removed.

    Components (each linear in the small-ball second moment ``M2``):

    * ``curvature``: second-order displacement of the potential-weighted
      profile, ``(1/2) [sup|g''| + 2 t sup|v'| sup|g'|
      + (t sup|v'|)^2 sup|g| + t sup|v''| sup|g|] t M2``;
    * ``phase_mean``: mean of the dropped midpoint phase,
      ``(1/2) sup|Da| t M2`` (present whether or not the compensator is
      enabled; the compensator reduces the realized error, not the
      bound);
    * ``phase_var``: quadratic remainder of that phase,
      ``(1/2) sup|a|^2 t M2``.

    Returns the components plus their sum under ``"total"``.
    """
    t = float(horizon)
    if not (t > 0 and math.isfinite(t)):
        raise DomainError("horizon must be finite and > 0")
    m2 = small_ball_second_moment(cutoff, params)
    curv = fields.sup_d2g + 2.0 * t * fields.sup_dv * fields.sup_dg \
        + (t * fields.sup_dv) ** 2 * fields.sup_g \
        + t * fields.sup_d2v * fields.sup_g
    parts = {
        "curvature": 0.5 * curv * t * m2,
        "phase_mean": 0.5 * fields.sup_da * t * m2,
        "phase_var": 0.5 * fields.sup_a ** 2 * t * m2,
    }
    parts["total"] = parts["curvature"] + parts["phase_mean"] \
        + parts["phase_var"]
    return parts


@dataclass(frozen=True)
class EpsilonCertificate:
    """Smallest tested cutoff whose budget clears the target."""

    cutoff: float
    target: float
    parts: dict[str, float]
    ladder: tuple[tuple[float, float], ...]


def certify_epsilon(params: ModelParams, fields: FieldSpec, horizon: float,
                    target: float, *, start: float = 0.1,
                    max_halvings: int = 20) -> EpsilonCertificate:
    """Halve the cutoff from ``start`` until the bias budget fits.

    The budget is monotone in the cutoff, so the first cutoff that fits
    is also the largest one that does on the tested ladder; a looser
    target therefore never certifies a smaller cutoff.
    """
    if not (target > 0 and math.isfinite(target)):
        raise ConfigError("target must be finite and > 0")
    if not (start > 0 and math.isfinite(start)):
        raise ConfigError("start cutoff must be finite and > 0")
    if not (math.isfinite(fields.sup_dg) and math.isfinite(fields.sup_d2g)):
        raise ConfigError(
            "profile has no derivative norms; the truncation budget "
            "cannot certify a cutoff for indicator data")

    ladder = []
    eps = float(start)
    for _ in range(max_halvings + 1):
        parts = epsilon_budget(params, fields, horizon, eps)
        ladder.append((eps, parts["total"]))
        if parts["total"] <= target:
            return EpsilonCertificate(cutoff=eps, target=float(target),
                                      parts=parts, ladder=tuple(ladder))
        eps *= 0.5
    raise ConfigError(
        f"no cutoff above {eps * 2.0:.3g} meets the bias target "
        f"{target:.3g}; smallest tested budget was {ladder[-1][1]:.3g}")
