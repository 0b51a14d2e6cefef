"""Experiment drivers: one config in, CSV tables plus a manifest out.

Every run is a pure function of its configuration.  Paths get
per-index random streams, estimator reductions happen in fixed block
order, and CSV floats are written with ``repr``, so rerunning a config
reproduces every CSV byte for byte whatever the thread count.  The
manifest records wall time and is therefore the one output allowed to
differ between reruns.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import os
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import ks_2samp

from ._csvio import write_csv
from .errors import ConfigError, DomainError, InvariantViolation
from .fields import FieldSpec, bump_fields, with_constant_shift
from .feynman_kac import (action, certify_epsilon, epsilon_budget,
                          estimate_u, estimate_u_coupled, estimate_u_grid)
from .levy import (ModelParams, char_exponent, levy_density,
                   levy_khintchine_residual, sphere_area, tail_mass,
                   transition_kernel)
from .radial_map import get_radial_map
from .reference import (convolve_kernel, grid_for, kernel_tail_mass,
                        sample_on_grid, split_step)
from .sampler import (RngStream, sample_increment, sample_paths,
                      sup_distance_batch, transform_batch)
from .specfun import QuadratureSpec, adaptive_quad

KINDS = ("kernel-check", "lk-check", "sample-stats", "weak-convergence",
         "couple-distance", "map-check", "fk-oracle", "sup-convergence",
         "l2-convergence", "selftest", "certify-epsilon")

# stream coordinates are part of the output format: reordering KINDS
# would silently change every sampled number
_EXPERIMENT_IDS = {kind: i + 1 for i, kind in enumerate(KINDS)}
_AUX_OFFSET = 1000            # auxiliary streams inside one experiment
_SAMPLE_BLOCK = 8192          # paths sampled per memory block

_FIELD_KEYS = ("a_amp", "a_radius", "v_amp", "v_radius", "g_amp",
               "g_radius")
_INT_KEYS = ("seed", "threads", "dim", "n_paths", "grid_n")
_FLOAT_KEYS = ("eps", "horizon", "box_l", "target") + _FIELD_KEYS


@dataclass(frozen=True)
class RunConfig:
    """One experiment invocation.

    ``masses`` is a strictly decreasing ladder; kinds that couple to
    the massless limit require the final entry to be exactly 0, kinds
    that compare each mass against the limit law require every entry
    positive.  ``out_dir`` and ``threads`` never influence emitted
    numbers and are excluded from the config hash.
    """

    kind: str
    out_dir: str
    seed: int = 20260814
    threads: int = 1
    dim: int = 1
    masses: tuple[float, ...] = (1.0, 0.3, 0.1, 0.03)
    eps: float = 1e-3
    n_paths: int = 100_000
    horizon: float = 1.0
    grid_n: int = 4096
    box_l: float = 80.0
    target: float = 1e-2
    a_amp: float = 0.0
    a_radius: float = 1.0
    v_amp: float = 0.0
    v_radius: float = 1.0
    g_amp: float = 1.0
    g_radius: float = 1.0

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not self.out_dir:
            raise ConfigError("an output directory is required")
        if self.seed < 0 or self.threads < 1:
            raise ConfigError("need seed >= 0 and threads >= 1")
        if self.dim not in (1, 2, 3):
            raise ConfigError("dim must be 1, 2 or 3")
        if not self.masses:
            raise ConfigError("mass ladder must not be empty")
        if any(not (m >= 0.0 and math.isfinite(m)) for m in self.masses):
            raise ConfigError("masses must be finite and >= 0")
        if any(a <= b for a, b in zip(self.masses, self.masses[1:])):
            raise ConfigError("mass ladder must be strictly decreasing")
        if self.kind in ("sup-convergence", "l2-convergence") \
                and self.masses[-1] != 0.0:
            raise ConfigError(f"{self.kind} couples to the massless "
                              "limit: the ladder must end at 0")
        if self.kind in ("weak-convergence", "couple-distance",
                         "map-check") and self.masses[-1] == 0.0:
            raise ConfigError(f"{self.kind} treats the massless law as "
                              "the target: list positive masses only")
        if self.kind == "fk-oracle":
            if self.dim != 1:
                raise ConfigError("fk-oracle needs dim = 1 (the grid "
                                  "oracle is interpolated on a line)")
            if self.a_amp != 0.0:
                raise ConfigError("fk-oracle needs a_amp = 0: the grid "
                                  "oracle has no vector-field term")
        if self.kind == "kernel-check" and self.dim not in (1, 3):
            raise ConfigError("kernel-check inverts the symbol in "
                              "dim 1 or 3 only")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ConfigError("eps must be finite and > 0")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ConfigError("horizon must be finite and > 0")
        if not (self.box_l > 0 and self.target > 0):
            raise ConfigError("box_l and target must be > 0")
        if self.n_paths < 2:
            raise ConfigError("n_paths must be >= 2")
        if self.grid_n < 64 or self.grid_n & (self.grid_n - 1):
            raise ConfigError("grid_n must be a power of two >= 64")
        if min(self.a_radius, self.v_radius, self.g_radius) <= 0:
            raise ConfigError("field radii must be > 0")
        if self.v_amp < 0 or self.g_amp <= 0:
            raise ConfigError("need v_amp >= 0 and g_amp > 0")

    def config_hash(self) -> str:
        skip = {"out_dir", "threads"}
        parts = [f"{k}={v!r}" for k, v in sorted(asdict(self).items())
                 if k not in skip]
        return hashlib.sha256(";".join(parts).encode()).hexdigest()[:16]


_KIND_DEFAULTS: dict[str, dict] = {
    "kernel-check": {"masses": (1.0, 0.0)},
    "lk-check": {"masses": (1.0, 0.5, 0.0)},
    "sample-stats": {"masses": (0.0,)},
    "weak-convergence": {},
    "couple-distance": {"n_paths": 1000},
    "map-check": {"masses": (1.0, 0.3, 0.1, 0.03, 0.01)},
    "fk-oracle": {"masses": (1.0, 0.0), "v_amp": 0.5},
    "sup-convergence": {"masses": (1.0, 0.3, 0.1, 0.0), "a_amp": 0.4,
                        "v_amp": 0.5, "eps": 1e-2},
    "l2-convergence": {"masses": (1.0, 0.3, 0.1, 0.0), "a_amp": 0.4,
                       "v_amp": 0.5, "eps": 1e-2},
    "selftest": {"n_paths": 4000},
    "certify-epsilon": {"v_amp": 0.5},
}


def _parse_value(key: str, raw):
    if key in ("kind", "out_dir"):
        return str(raw).strip()
    if key == "masses":
        if isinstance(raw, tuple):
            return raw
        try:
            vals = tuple(float(p) for p in
                         str(raw).replace(",", " ").split())
        except ValueError as exc:
            raise ConfigError(f"bad masses list {raw!r}") from exc
        if not vals:
            raise ConfigError("masses list is empty")
        return vals
    if key in _INT_KEYS:
        try:
            return int(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer, got "
                              f"{raw!r}") from exc
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be a number, got "
                              f"{raw!r}") from exc
    raise ConfigError(f"unknown config key {key!r}")


def read_config_file(path: str) -> dict:
    """Parse the ``[run]`` and ``[fields]`` sections of an INI file."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    values: dict = {}
    for section in parser.sections():
        if section not in ("run", "fields"):
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if section == "fields" and key not in _FIELD_KEYS:
                raise ConfigError(f"unknown [fields] key {key!r}")
            if section == "run" and key in _FIELD_KEYS:
                raise ConfigError(f"{key} belongs in the [fields] section")
            values[key] = _parse_value(key, raw)
    return values


def make_config(kind: str, out_dir: str | None = None,
                config_file: str | None = None, **overrides) -> RunConfig:
    """Layer kind defaults, file values, then explicit overrides."""
    values: dict = {"kind": kind, **_KIND_DEFAULTS.get(kind, {})}
    if config_file:
        file_vals = read_config_file(config_file)
        file_kind = file_vals.pop("kind", None)
        if file_kind is not None and file_kind != kind:
            raise ConfigError(f"config file sets kind={file_kind!r} but "
                              f"{kind!r} was requested")
        values.update(file_vals)
    if out_dir is not None:
        values["out_dir"] = out_dir
    for key, val in overrides.items():
        if val is not None:
            values[key] = _parse_value(key, val)
    if not values.get("out_dir"):
        raise ConfigError("an output directory is required (--out)")
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


@dataclass
class RunManifest:
    """Sidecar record tying every emitted file to its configuration."""

    config_hash: str
    config: dict
    version: str
    wall_time_s: float
    summary: dict
    files: list
    status: str
    error: str | None = None

    def write(self, path: str) -> None:
        blob = json.dumps(asdict(self), indent=2, sort_keys=True,
                          default=_json_scalar) + "\n"
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            fh.write(blob)
        os.replace(tmp, path)


def _json_scalar(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _library_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "unknown"


class _Outputs:
    """Collects CSV files as they are written, for the manifest."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: list[dict] = []

    def emit(self, name: str, schema: str, header, rows) -> None:
        count, digest = write_csv(os.path.join(self.out_dir, name),
                                  header, rows)
        self.files.append({"name": name, "schema": schema,
                           "rows": count, "sha256": digest})


def _tag(m: float) -> str:
    return f"{m:g}"


def ks_statistic(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance of a sample from a continuous CDF."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    if n == 0:
        raise DomainError("KS statistic needs a nonempty sample")
    f = np.asarray(cdf(s), dtype=float)
    steps = np.arange(1, n + 1) / n
    return float(max(np.max(steps - f), np.max(f - steps + 1.0 / n)))


def _scalar_statistic(points: np.ndarray) -> np.ndarray:
    # signed component on the line, radius above it
    if points.shape[1] == 1:
        return points[:, 0]
    return np.linalg.norm(points, axis=1)


def _limit_cdf(d: int, t: float):
    """CDF of the massless endpoint statistic at horizon ``t``."""
    if d == 1:
        return lambda x: 0.5 + np.arctan(np.asarray(x, float) / t) / math.pi
    if d == 2:
        return lambda r: 1.0 - t / np.hypot(np.asarray(r, float), t)

    def cdf3(r):
        r = np.asarray(r, dtype=float)
        return (np.arctan(r / t) - t * r / (r * r + t * t)) * (2.0 / math.pi)
    return cdf3


def _fields_from(config: RunConfig) -> FieldSpec:
    return bump_fields(config.dim, a_amp=config.a_amp,
                       a_radius=config.a_radius, v_amp=config.v_amp,
                       v_radius=config.v_radius, g_amp=config.g_amp,
                       g_radius=config.g_radius)


def _positions_at(batch, s: float) -> np.ndarray:
    """Positions of every path of a batch at time ``s``, vectorized."""
    d = batch.params.d
    n = batch.n_paths
    if batch.times.size == 0:
        return np.zeros((n, d))
    path_ids = np.repeat(np.arange(n), np.diff(batch.offsets))
    counts = np.bincount(path_ids[batch.times <= s], minlength=n)
    prefix = np.vstack([np.zeros((1, d)), np.cumsum(batch.jumps, axis=0)])
    lo = batch.offsets[:-1]
    return prefix[lo + counts] - prefix[lo]


def _path_rows(batch, k: int) -> list:
    """Step-function vertices of the first ``k`` paths of a batch."""
    rows = []
    for i in range(k):
        p = batch.path(i)
        pos = np.zeros(batch.params.d)
        rows.append([i, 0.0] + [0.0] * batch.params.d)
        for s, y in zip(p.times, p.jumps):
            pos = pos + y
            rows.append([i, float(s)] + [float(c) for c in pos])
        rows.append([i, float(batch.horizon)] + [float(c) for c in pos])
    return rows


def _abs_moment(beta: float, t: float, params: ModelParams) -> float:
    """``E|X(t)|^beta``: Beta-function closed form at mass 0, radial
    quadrature of the transition kernel otherwise."""
    if not 0.0 < beta < 1.0:
        raise DomainError("absolute moment implemented for 0 < beta < 1")
    d = params.d
    if params.m == 0.0:
        return sphere_area(d) * t ** beta \
            * math.gamma((beta + d) / 2.0) \
            * math.gamma((1.0 - beta) / 2.0) \
            / (2.0 * math.pi ** params.nu)
    hi = 760.0 / params.m + 20.0 * t
    seeds = [s for s in (t, 1.0 / params.m) if 0.0 < s < hi]
    res = adaptive_quad(
        lambda r: sphere_area(d) * r ** (beta + d - 1.0)
        * np.asarray(transition_kernel(r, t, params)),
        0.0, hi, points=seeds)
    return float(res.value)


# ---------------------------------------------------------------------------
# experiment runners


def _run_kernel_check(config: RunConfig, out: _Outputs) -> dict:
    """Closed-form kernel and jump density against independent routes.

    The kernel is rebuilt by direct Fourier inversion of the symbol
    (an oscillatory quadrature the closed form never sees); the jump
    density is rebuilt from the slope of the tail-mass quadrature.
    """
    t = config.horizon
    d = config.dim
    radii = np.geomspace(0.1, 8.0, 17)
    worst_kernel = 0.0
    worst_density = 0.0

    # the integrands oscillate with period pi/r; cutting at the zeros
    # and allowing an absolute floor keeps the refinement from stalling
    # on cancellation noise far below the comparison tolerance
    spec = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-13)

    def inverted_symbol(r: float, params: ModelParams) -> float:
        hi = (40.0 + params.m * t) / t
        if params.d == 1:
            def f(xi):
                return np.cos(xi * r) \
                    * np.exp(-t * char_exponent(xi, params)) / math.pi
        else:
            def f(xi):
                return xi * np.sin(xi * r) \
                    * np.exp(-t * char_exponent(xi, params)) \
                    / (2.0 * math.pi ** 2 * r)
        zeros = np.arange(1, int(hi * r / math.pi) + 1) * math.pi / r
        return float(adaptive_quad(f, 0.0, hi, spec,
                                   points=zeros).value)

    def density_from_tail(r: float, params: ModelParams) -> float:
        h = 1e-3 * r

        def slope(step: float) -> float:
            return (tail_mass(r - step, params)
                    - tail_mass(r + step, params)) / (2.0 * step)

        rich = (4.0 * slope(0.5 * h) - slope(h)) / 3.0
        return rich / (sphere_area(params.d) * r ** (params.d - 1))

    for m in config.masses:
        params = ModelParams(d, m)
        tag = _tag(m)
        closed_k = np.asarray(transition_kernel(radii, t, params))
        inv_k = np.array([inverted_symbol(float(r), params)
                          for r in radii])
        out.emit(f"kernel_overlay_m{tag}.csv", "overlay",
                 ["x", "closed_form", "inverted_symbol"],
                 [(float(r), float(a), float(b))
                  for r, a, b in zip(radii, closed_k, inv_k)])
        closed_n = np.asarray(levy_density(radii, params))
        tail_n = np.array([density_from_tail(float(r), params)
                           for r in radii])
        out.emit(f"density_overlay_m{tag}.csv", "overlay",
                 ["x", "closed_form", "tail_slope"],
                 [(float(r), float(a), float(b))
                  for r, a, b in zip(radii, closed_n, tail_n)])
        worst_kernel = max(worst_kernel,
                           float(np.max(np.abs(inv_k / closed_k - 1.0))))
        worst_density = max(worst_density,
                            float(np.max(np.abs(tail_n / closed_n - 1.0))))
    return {"t": t, "dim": d, "masses": list(config.masses),
            "max_kernel_rel_gap": worst_kernel,
            "max_density_rel_gap": worst_density}


def _run_lk_check(config: RunConfig, out: _Outputs) -> dict:
    """Residual of the exponent against its jump-measure integral."""
    xi_vals = (0.5, 1.0, 2.0, 5.0)
    dims = (1, 3)
    header = ["x"]
    columns = []
    worst = 0.0
    for d in dims:
        for m in config.masses:
            params = ModelParams(d, m)
            res = [float(levy_khintchine_residual(x, params))
                   for x in xi_vals]
            header.append(f"residual_d{d}_m{_tag(m)}")
            columns.append(res)
            worst = max(worst, max(res))
    rows = [[xi_vals[i]] + [col[i] for col in columns]
            for i in range(len(xi_vals))]
    out.emit("residuals.csv", "overlay", header, rows)
    return {"dims": list(dims), "masses": list(config.masses),
            "xi": list(xi_vals), "max_residual": worst}


def _run_sample_stats(config: RunConfig, out: _Outputs) -> dict:
    """Endpoint law, subordinator cross-check, and increment moments."""
    params = ModelParams(config.dim, config.masses[0])
    t = config.horizon
    n = config.n_paths
    exp_id = _EXPERIMENT_IDS[config.kind]
    beta = 0.75

    ends = np.empty((n, params.d))
    mids = np.empty((n, params.d))
    jump_total = 0
    paths_rows: list = []
    for lo in range(0, n, _SAMPLE_BLOCK):
        hi = min(lo + _SAMPLE_BLOCK, n)
        batch = sample_paths(params, t, config.eps, config.seed, exp_id,
                             hi - lo, start_index=lo,
                             threads=config.threads)
        ends[lo:hi] = batch.endpoints()
        mids[lo:hi] = _positions_at(batch, 0.5 * t)
        jump_total += int(batch.counts().sum())
        if lo == 0:
            paths_rows = _path_rows(batch, min(8, hi))
    out.emit("paths.csv", "paths",
             ["path", "t"] + [f"x{i + 1}" for i in range(params.d)],
             paths_rows)

    sub = sample_increment(params, t,
                           RngStream(config.seed, exp_id + _AUX_OFFSET), n)
    stat_tr = _scalar_statistic(ends)
    stat_sub = _scalar_statistic(sub)

    summary: dict = {"dim": params.d, "m": params.m, "t": t,
                     "eps": config.eps, "n_paths": n}
    lam = t * tail_mass(config.eps, params)
    summary["jump_count"] = {
        "expected_mean": lam,
        "empirical_mean": jump_total / n,
        "z_score": (jump_total / n - lam) / math.sqrt(lam / n)}
    if params.m == 0.0:
        cdf = _limit_cdf(params.d, t)
        summary["ks_truncated_vs_limit"] = ks_statistic(stat_tr, cdf)
        summary["ks_subordinated_vs_limit"] = ks_statistic(stat_sub, cdf)
    summary["ks_two_sample"] = float(
        ks_2samp(stat_tr, stat_sub, method="asymp").statistic)

    if params.d == 1:
        xg = np.linspace(-8.0 * t, 8.0 * t, 201)
    else:
        xg = np.linspace(0.0, 8.0 * t, 201)[1:]
    exact = _exact_cdf_grid(xg, t, params)
    emp_tr = np.searchsorted(np.sort(stat_tr), xg, side="right") / n
    emp_sub = np.searchsorted(np.sort(stat_sub), xg, side="right") / n
    out.emit("cdf_overlay.csv", "overlay",
             ["x", "exact", "truncated", "subordinated"],
             [(float(x), float(e), float(a), float(b))
              for x, e, a, b in zip(xg, exact, emp_tr, emp_sub)])

    inc1 = np.linalg.norm(mids, axis=1)
    inc2 = np.linalg.norm(ends - mids, axis=1)
    prod = inc1 ** beta * inc2 ** beta
    emp = float(np.mean(prod))
    emp_err = float(np.std(prod, ddof=1)) / math.sqrt(n)
    half_moment = _abs_moment(beta, 0.5 * t, params)
    product = half_moment * half_moment
    summary["increment_product_moment"] = {
        "beta": beta, "times": [0.0, 0.5 * t, t],
        "empirical": emp, "empirical_stderr": emp_err,
        "independent_product": product,
        "gap_over_stderr": abs(emp - product) / emp_err}
    return summary


def _exact_cdf_grid(xg: np.ndarray, t: float,
                    params: ModelParams) -> np.ndarray:
    if params.m == 0.0:
        return np.asarray(_limit_cdf(params.d, t)(xg), dtype=float)
    if params.d == 1:
        def one(x: float) -> float:
            if x == 0.0:
                return 0.5
            res = adaptive_quad(
                lambda u: np.asarray(transition_kernel(np.abs(u), t,
                                                       params)),
                0.0, abs(x))
            return 0.5 + math.copysign(res.value, x)
    else:
        area = sphere_area(params.d)

        def one(r: float) -> float:
            res = adaptive_quad(
                lambda u: area * u ** (params.d - 1)
                * np.asarray(transition_kernel(u, t, params)),
                0.0, r)
            return res.value
    return np.array([one(float(x)) for x in xg])


def _run_weak_convergence(config: RunConfig, out: _Outputs) -> dict:
    """Endpoint KS distance from the massless law along the ladder."""
    t = config.horizon
    n = config.n_paths
    cdf = _limit_cdf(config.dim, t)
    band = 1.36 / math.sqrt(n)
    exp_id = _EXPERIMENT_IDS[config.kind]
    rows = []
    ks_list = []
    for m in config.masses:
        params = ModelParams(config.dim, m)
        stat = np.empty(n)
        for lo in range(0, n, _SAMPLE_BLOCK):
            hi = min(lo + _SAMPLE_BLOCK, n)
            batch = sample_paths(params, t, config.eps, config.seed,
                                 exp_id, hi - lo, start_index=lo,
                                 threads=config.threads)
            stat[lo:hi] = _scalar_statistic(batch.endpoints())
        ks = ks_statistic(stat, cdf)
        ks_list.append(ks)
        rows.append((float(m), ks, band))
    out.emit("ks_convergence.csv", "convergence",
             ["m", "value", "stderr"], rows)
    return {"t": t, "eps": config.eps, "n_paths": n, "dim": config.dim,
            "ks": ks_list, "dkw_band": band,
            "strictly_decreasing": all(a > b for a, b
                                       in zip(ks_list, ks_list[1:])),
            "final_ks": ks_list[-1]}


def _run_couple_distance(config: RunConfig, out: _Outputs) -> dict:
    """Pathwise sup distance between coupled pairs, per mass."""
    n = config.n_paths
    params0 = ModelParams(config.dim, 0.0)
    exp_id = _EXPERIMENT_IDS[config.kind]
    dists = {m: np.empty(n) for m in config.masses}
    for lo in range(0, n, _SAMPLE_BLOCK):
        hi = min(lo + _SAMPLE_BLOCK, n)
        base = sample_paths(params0, config.horizon, config.eps,
                            config.seed, exp_id, hi - lo, start_index=lo,
                            threads=config.threads)
        for m in config.masses:
            dists[m][lo:hi] = sup_distance_batch(
                base, transform_batch(base, m))

    out.emit("distances.csv", "dist-hist", ["m", "distance"],
             [(float(m), float(v)) for m in config.masses
              for v in dists[m]])
    med_rows = []
    medians = []
    for m in config.masses:
        med = float(np.median(dists[m]))
        # quantile-spacing estimate of the median standard error;
        # sup distances are heavy tailed, so no moment-based spread
        q_lo, q_hi = np.quantile(dists[m], [0.45, 0.55])
        stderr = 5.0 * float(q_hi - q_lo) / math.sqrt(n)
        med_rows.append((float(m), med, stderr))
        medians.append(med)
    out.emit("medians.csv", "convergence", ["m", "value", "stderr"],
             med_rows)
    return {"dim": config.dim, "eps": config.eps, "n_pairs": n,
            "horizon": config.horizon, "medians": medians,
            "strictly_decreasing": all(a > b for a, b
                                       in zip(medians, medians[1:])),
            "last_over_first": medians[-1] / medians[0]}


def _run_map_check(config: RunConfig, out: _Outputs) -> dict:
    """Radial transport tables and the annulus pushforward identity."""
    d = config.dim
    r_grid = np.geomspace(0.01, 10.0, 25)
    header = ["x", "identity"]
    cols = [r_grid, r_grid]
    monotone = {}
    for m in config.masses:
        rmap = get_radial_map(d, m)
        vals = np.asarray(rmap.l(r_grid))
        header.append(f"l_m{_tag(m)}")
        cols.append(vals)
        monotone[_tag(m)] = bool(np.all(np.diff(vals) > 0)
                                 and np.all(vals > r_grid))
    out.emit("transport_curves.csv", "overlay", header,
             list(zip(*[np.asarray(c, dtype=float) for c in cols])))

    edges = np.geomspace(0.01, 20.0, 21)
    p_header = ["x"]
    p_cols = [edges[:-1]]
    worst = 0.0
    params0 = ModelParams(d, 0.0)
    for m in config.masses:
        params = ModelParams(d, m)
        rmap = get_radial_map(d, m)
        l_edges = [float(rmap.l_exact(float(r))) for r in edges]
        gaps = []
        for k in range(edges.size - 1):
            massive = tail_mass(float(edges[k]), params) \
                - tail_mass(float(edges[k + 1]), params)
            pulled = tail_mass(l_edges[k], params0) \
                - tail_mass(l_edges[k + 1], params0)
            gaps.append(abs(massive - pulled) / massive)
        p_header.append(f"rel_gap_m{_tag(m)}")
        p_cols.append(gaps)
        worst = max(worst, max(gaps))
    out.emit("pushforward.csv", "overlay", p_header,
             list(zip(*[np.asarray(c, dtype=float) for c in p_cols])))

    probe = (0.1, 1.0, 10.0)
    decreasing = {}
    for r in probe:
        vals = [float(get_radial_map(d, m).l(r)) for m in config.masses]
        decreasing[f"r{_tag(r)}"] = bool(all(a > b for a, b
                                             in zip(vals, vals[1:])))
    smallest = get_radial_map(d, config.masses[-1])
    excess = {f"r{_tag(r)}": float(smallest.l(r) / r - 1.0)
              for r in probe}
    return {"dim": d, "masses": list(config.masses),
            "strictly_increasing_and_above_identity": monotone,
            "l_decreasing_in_m": decreasing,
            "excess_at_smallest_mass": excess,
            "max_pushforward_rel_gap": worst}


def _run_fk_oracle(config: RunConfig, out: _Outputs) -> dict:
    """Path-integral estimates against the split-step grid solver.

    The cutoff is certified against ``target`` at mass zero; the
    massless small-jump activity dominates every massive one, so the
    same cutoff is certified for every rung of the ladder.
    """
    fields = _fields_from(config)
    t = config.horizon
    cert = certify_epsilon(ModelParams(1, 0.0), fields, t, config.target)
    eps = cert.cutoff
    xs = np.linspace(-2.5, 2.5, 11)
    grid = grid_for(1, fields.support_radius, t, n=config.grid_n)
    v_grid = sample_on_grid(fields.v, grid)
    g_grid = sample_on_grid(fields.g, grid)
    exp_id = _EXPERIMENT_IDS[config.kind]

    summary: dict = {"cutoff": eps, "target": config.target,
                     "budget_parts_massless": cert.parts,
                     "n_paths": config.n_paths, "t": t,
                     "points": [float(x) for x in xs]}
    worst = 0.0
    all_within = True
    for m in config.masses:
        params = ModelParams(1, m)
        budget = epsilon_budget(params, fields, t, eps)["total"]
        oracle_grid = split_step(g_grid, t, 64, params, v_grid, grid)
        oracle = np.interp(xs, grid.axis(), np.real(oracle_grid))
        ests = estimate_u_grid(params, fields, xs[:, None], t, eps,
                               config.n_paths, config.seed, exp_id,
                               threads=config.threads)
        rows = []
        for x, est, orc in zip(xs, ests, oracle):
            gap = abs(est.mean - complex(orc))
            bound = 3.0 * est.stderr + budget
            rows.append((float(x), est.mean.real, est.mean.imag,
                         est.stderr, float(orc), gap, bound))
            worst = max(worst, gap / bound)
            all_within = all_within and gap <= bound
        tag = _tag(m)
        out.emit(f"fk_overlay_m{tag}.csv", "overlay",
                 ["x", "mc_re", "mc_im", "stderr", "oracle", "gap",
                  "bound"], rows)
        summary[f"budget_m{tag}"] = budget
    summary["max_gap_over_bound"] = worst
    summary["all_within_bound"] = all_within
    return summary


def _run_coupled_convergence(config: RunConfig, out: _Outputs) -> dict:
    """Coupled estimates of the massive-to-massless gap on an x grid.

    One massless path batch drives every mass, so the difference
    estimates drop the common Monte Carlo noise; ``sup-convergence``
    reports the largest pointwise gap, ``l2-convergence`` the
    grid-measure norm with a delta-method standard error.
    """
    fields = _fields_from(config)
    xs = np.linspace(-5.0, 5.0, 41)
    points = xs[:, None] if config.dim == 1 else \
        np.pad(xs[:, None], ((0, 0), (0, config.dim - 1)))
    res = estimate_u_coupled(config.masses, fields, points,
                             config.horizon, config.eps, config.n_paths,
                             config.seed, _EXPERIMENT_IDS[config.kind],
                             threads=config.threads)
    spacing = float(xs[1] - xs[0])
    sup_kind = config.kind == "sup-convergence"
    rows = []
    values = []
    for i, m in enumerate(config.masses[:-1]):
        diffs = res.diff_means[i]
        if sup_kind:
            k = int(np.argmax(np.abs(diffs)))
            value = float(np.abs(diffs[k]))
            stderr = res.diff_stderr(i, k)
        else:
            value = math.sqrt(spacing * float(np.sum(np.abs(diffs) ** 2)))
            if value > 0.0:
                grad = spacing * np.hypot(
                    diffs.real * res.diff_stderrs_re[i],
                    diffs.imag * res.diff_stderrs_im[i]) / value
                stderr = float(np.linalg.norm(grad))
            else:
                stderr = 0.0
        rows.append((float(m), value, stderr))
        values.append(value)
    name = "sup_convergence.csv" if sup_kind else "l2_convergence.csv"
    out.emit(name, "convergence", ["m", "value", "stderr"], rows)

    header = ["x"] + [f"abs_diff_m{_tag(m)}" for m in config.masses[:-1]]
    header += ["limit_re", "limit_im"]
    prof = [[float(x)] + [float(np.abs(res.diff_means[i][k]))
                          for i in range(len(config.masses) - 1)]
            + [float(res.means[-1][k].real), float(res.means[-1][k].imag)]
            for k, x in enumerate(xs)]
    out.emit("diff_profile.csv", "overlay", header, prof)
    return {"masses": list(config.masses), "norm":
            "sup" if sup_kind else "l2", "values": values,
            "stderrs": [r[2] for r in rows], "eps": config.eps,
            "n_paths": config.n_paths, "grid_points": xs.size,
            "strictly_decreasing": all(a > b for a, b
                                       in zip(values, values[1:])),
            "last_over_first": values[-1] / values[0]}


def _run_certify(config: RunConfig, out: _Outputs) -> dict:
    """Cutoff certification report for the configured field family."""
    fields = _fields_from(config)
    params = ModelParams(config.dim, 0.0)
    cert = certify_epsilon(params, fields, config.horizon, config.target)
    rows = []
    for eps, _total in cert.ladder:
        parts = epsilon_budget(params, fields, config.horizon, eps)
        rows.append((eps, parts["curvature"], parts["phase_mean"],
                     parts["phase_var"], parts["total"]))
    out.emit("budget.csv", "overlay",
             ["x", "curvature", "phase_mean", "phase_var", "total"],
             rows)
    return {"dim": config.dim, "horizon": config.horizon,
            "target": config.target, "certified_cutoff": cert.cutoff,
            "budget_parts": cert.parts}


def _run_selftest(config: RunConfig, out: _Outputs) -> dict:
    """Rapid invariants across the stack; any failure aborts the run."""
    t = config.horizon
    d = config.dim
    exp_id = _EXPERIMENT_IDS[config.kind]
    checks: dict[str, bool] = {}

    p0 = ModelParams(1, 0.0)
    p1 = ModelParams(1, 1.0)
    checks["symbol_values"] = bool(
        float(np.asarray(char_exponent(0.0, p0))) == 0.0
        and abs(float(np.asarray(char_exponent(1.0, p0))) - 1.0) < 1e-12
        and abs(float(np.asarray(char_exponent(3.0, ModelParams(1, 4.0))))
                - 1.0) < 1e-12)

    def norm_gap(params: ModelParams) -> float:
        hi = 40.0 * t + (760.0 / params.m if params.m > 0 else 0.0)
        res = adaptive_quad(
            lambda r: sphere_area(params.d) * r ** (params.d - 1)
            * np.asarray(transition_kernel(r, t, params)), 0.0, hi)
        return abs(res.value + kernel_tail_mass(hi, t, params) - 1.0)

    checks["kernel_normalizes_m0"] = norm_gap(p0) < 1e-6
    checks["kernel_normalizes_m1"] = norm_gap(p1) < 1e-6
    checks["tail_closed_form"] = \
        abs(tail_mass(1.0, p0) - 2.0 / math.pi) < 1e-12

    rmap = get_radial_map(1, 1.0)
    z = np.array([[0.3], [-2.0], [7.0]])
    back = rmap.phi_inverse(rmap.phi(z))
    r_probe = np.geomspace(0.05, 20.0, 9)
    checks["transport_round_trip"] = \
        float(np.max(np.abs(back / z - 1.0))) < 1e-8
    checks["transport_above_identity"] = \
        bool(np.all(np.asarray(rmap.l(r_probe)) > r_probe))

    n = config.n_paths
    params_d = ModelParams(d, 0.0)
    batch = sample_paths(params_d, t, config.eps, config.seed, exp_id, n,
                         threads=config.threads)
    out.emit("paths.csv", "paths",
             ["path", "t"] + [f"x{i + 1}" for i in range(d)],
             _path_rows(batch, min(8, n)))
    cdf = _limit_cdf(d, t)
    checks["sampler_law"] = \
        ks_statistic(_scalar_statistic(batch.endpoints()), cdf) < 0.05
    sub = sample_increment(params_d, t,
                           RngStream(config.seed, exp_id + _AUX_OFFSET), n)
    checks["subordinator_law"] = \
        ks_statistic(_scalar_statistic(sub), cdf) < 0.05
    lam = t * tail_mass(config.eps, params_d)
    z_score = (float(batch.counts().mean()) - lam) / math.sqrt(lam / n)
    checks["jump_count_mean"] = abs(z_score) < 4.0

    fields = bump_fields(d, a_amp=0.4, v_amp=0.5)
    shift = np.full(d, 0.7)
    shifted = with_constant_shift(fields, shift)
    gauge = sample_paths(ModelParams(d, 0.3), t, 1e-2, config.seed,
                         exp_id + 2 * _AUX_OFFSET, 50)
    x0 = np.zeros(d)
    worst = 0.0
    for i in range(gauge.n_paths):
        p = gauge.path(i)
        w = action(p, x0, fields).weight
        ws = action(p, x0, shifted).weight
        extra = np.exp(-1j * float(shift @ p.endpoint()))
        worst = max(worst, abs(ws - extra * w) / max(abs(ws), 1e-300))
    checks["constant_shift_gauge"] = worst < 1e-12

    est = estimate_u(ModelParams(1, 0.0), bump_fields(1), [0.3],
                     2.0 ** -10, 1e-3, 2000, config.seed,
                     exp_id + 3 * _AUX_OFFSET)
    g_exact = float(bump_fields(1).g(np.array([[0.3]]))[0])
    checks["short_time_profile"] = abs(est.mean.real - g_exact) < 0.02

    grid = grid_for(1, 1.0, 0.5, n=256)
    g_vals = sample_on_grid(bump_fields(1).g, grid)
    free = split_step(g_vals, 0.5, 8, p0, np.zeros(grid.shape), grid)
    conv = convolve_kernel(g_vals, 0.5, p0, grid)
    checks["split_step_free_case"] = \
        float(np.max(np.abs(free - conv))) < 1e-10

    failed = sorted(name for name, ok in checks.items() if not ok)
    if failed:
        raise InvariantViolation("selftest failed: " + ", ".join(failed))
    return {"checks": {k: bool(v) for k, v in checks.items()},
            "n_paths": n, "dim": d}


_RUNNERS = {
    "kernel-check": _run_kernel_check,
    "lk-check": _run_lk_check,
    "sample-stats": _run_sample_stats,
    "weak-convergence": _run_weak_convergence,
    "couple-distance": _run_couple_distance,
    "map-check": _run_map_check,
    "fk-oracle": _run_fk_oracle,
    "sup-convergence": _run_coupled_convergence,
    "l2-convergence": _run_coupled_convergence,
    "selftest": _run_selftest,
    "certify-epsilon": _run_certify,
}


def run(config: RunConfig) -> RunManifest:
    """Execute one experiment and write its outputs and manifest.

    On an error the manifest is still written, flagged ``failed`` with
    the files that made it out, and the exception propagates.
    """
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)
    out = _Outputs(config.out_dir)
    start = time.perf_counter()
    base = dict(config_hash=config.config_hash(), config=asdict(config),
                version=_library_version())
    manifest_path = os.path.join(config.out_dir, "manifest.json")
    try:
        summary = _RUNNERS[config.kind](config, out)
    except Exception as exc:
        RunManifest(**base, wall_time_s=time.perf_counter() - start,
                    summary={}, files=out.files, status="failed",
                    error=f"{type(exc).__name__}: {exc}").write(
                        manifest_path)
        raise
    manifest = RunManifest(**base,
                           wall_time_s=time.perf_counter() - start,
                           summary=summary, files=out.files, status="ok")
    manifest.write(manifest_path)
    return manifest
