"""Field data for the semigroup estimator: vector potential, scalar
potential, and initial profile, with certified supremum norms.

The Monte Carlo action and its truncation-bias budget need sup norms of
the data and of their first two derivatives.  All smooth families here
are built from the standard mollifier profile ``exp(-1/(1-s))`` on
``s = |x|^2 / R^2 < 1``, whose derivatives are available in closed form,
so every norm reduces to the maximum of an explicit one-dimensional
profile.  Those maxima are taken on a dense grid and padded by the
observed second difference, which bounds the grid-sampling gap without a
blind global search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ConfigError

__all__ = ["FieldSpec", "bump_fields", "box_fields", "with_constant_shift"]

_PROFILE_GRID = 20001


def _mollifier(s: np.ndarray) -> np.ndarray:
    """exp(-1/(1-s)) on s < 1, zero beyond; safe at the seam."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0
    with np.errstate(under="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    return out


def _mollifier_d1(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0
    with np.errstate(under="ignore"):
        u = 1.0 - s[inside]
        out[inside] = -np.exp(-1.0 / u) / u ** 2
    return out


def _mollifier_d2(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1.0
    with np.errstate(under="ignore"):
        u = 1.0 - s[inside]
        out[inside] = np.exp(-1.0 / u) * (2.0 * s[inside] - 1.0) / u ** 4
    return out


def _padded_max(vals: np.ndarray) -> float:
    # grid max plus the standard second-difference bound on what a smooth
    # function can gain between nodes
    pad = float(np.max(np.abs(np.diff(vals, 2)))) / 8.0 if vals.size > 2 else 0.0
    return float(np.max(vals)) + pad


def _profile_norms() -> tuple[float, float]:
    """(sup of 2 sqrt(s) |f'|, sup Hessian profile) for the unit bump.

    For phi(x) = f(|x|^2), |grad phi| = 2 sqrt(s) |f'(s)| and the Hessian
    eigenvalues are 4 s f'' + 2 f' (radial) and 2 f' (tangential).
    """
    s = np.linspace(0.0, 1.0, _PROFILE_GRID)
    f1 = _mollifier_d1(s)
    f2 = _mollifier_d2(s)
    grad = 2.0 * np.sqrt(s) * np.abs(f1)
    hess = np.maximum(np.abs(4.0 * s * f2 + 2.0 * f1), 2.0 * np.abs(f1))
    return _padded_max(grad), _padded_max(hess)


_GRAD_PROFILE, _HESS_PROFILE = _profile_norms()
_PEAK = math.exp(-1.0)


@dataclass(frozen=True)
class FieldSpec:
    """Bundle of field callables plus the norms the budgets consume.

    Callables take points of shape ``(n, d)``; ``a`` returns ``(n, d)``,
    the rest return ``(n,)``.  ``trace_da`` must be the exact divergence
    of ``a`` (the compensator correction integrates it along paths).
    ``support_radius`` bounds the support of every field; ``v_floor`` is
    the infimum of the potential (zero for the built-in families).
    """

    d: int
    a: Callable[[np.ndarray], np.ndarray]
    trace_da: Callable[[np.ndarray], np.ndarray]
    v: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    sup_a: float
    sup_da: float
    sup_v: float
    sup_dv: float
    sup_d2v: float
    v_floor: float
    sup_g: float
    sup_dg: float
    sup_d2g: float


def _zero_vector(d: int) -> Callable[[np.ndarray], np.ndarray]:
    def a(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.zeros((pts.shape[0], d))
    return a


def _zero_scalar() -> Callable[[np.ndarray], np.ndarray]:
    def v(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.zeros(pts.shape[0])
    return v


def _bump_scalar(amp: float, radius: float) -> Callable[[np.ndarray], np.ndarray]:
    def v(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        s = np.sum(pts * pts, axis=1) / radius ** 2
        return amp * _mollifier(s)
    return v


def bump_fields(d: int, *, a_amp: float = 0.0, a_radius: float = 1.0,
                a_axis: int = 0, v_amp: float = 0.0, v_radius: float = 1.0,
                g_amp: float = 1.0, g_radius: float = 1.0) -> FieldSpec:
    """Smooth compactly supported data built from mollifier bumps.

    The vector potential is ``a_amp * f(|x/a_radius|^2) e_axis``; the
    potential and the initial profile are scalar bumps.  Peak values are
    ``amp / e``.  The potential amplitude must be nonnegative so the
    weight stays a contraction.
    """
    if d < 1:
        raise ConfigError("dimension must be >= 1")
    if not 0 <= a_axis < d:
        raise ConfigError("a_axis out of range")
    if v_amp < 0:
        raise ConfigError("potential amplitude must be >= 0")
    if g_amp <= 0:
        raise ConfigError("profile amplitude must be > 0")
    for name, r in (("a_radius", a_radius), ("v_radius", v_radius),
                    ("g_radius", g_radius)):
        if not (r > 0 and math.isfinite(r)):
            raise ConfigError(f"{name} must be finite and > 0")

    if a_amp != 0.0:
        def a(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            s = np.sum(pts * pts, axis=1) / a_radius ** 2
            out = np.zeros((pts.shape[0], d))
            out[:, a_axis] = a_amp * _mollifier(s)
            return out

        def trace_da(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            s = np.sum(pts * pts, axis=1) / a_radius ** 2
            return a_amp * _mollifier_d1(s) * 2.0 * pts[:, a_axis] \
                / a_radius ** 2
    else:
        a = _zero_vector(d)
        trace_da = _zero_scalar()

    v = _bump_scalar(v_amp, v_radius) if v_amp > 0 else _zero_scalar()
    g = _bump_scalar(g_amp, g_radius)

    support = max(a_radius if a_amp != 0.0 else 0.0,
                  v_radius if v_amp > 0 else 0.0, g_radius)
    aa = abs(a_amp)
    return FieldSpec(
        d=d, a=a, trace_da=trace_da, v=v, g=g, support_radius=support,
        sup_a=aa * _PEAK,
        sup_da=aa * _GRAD_PROFILE / a_radius,
        sup_v=v_amp * _PEAK,
        sup_dv=v_amp * _GRAD_PROFILE / v_radius,
        sup_d2v=v_amp * _HESS_PROFILE / v_radius ** 2,
        v_floor=0.0,
        sup_g=g_amp * _PEAK,
        sup_dg=g_amp * _GRAD_PROFILE / g_radius,
        sup_d2g=g_amp * _HESS_PROFILE / g_radius ** 2,
    )


def box_fields(d: int, half_width: float = 1.0) -> FieldSpec:
    """Indicator profile on the centered cube, no potentials.

    The profile has no derivatives, so the derivative norms are infinite
    and the truncation budget cannot certify a cutoff for it; estimators
    still run (the indicator is bounded).
    """
    if d < 1:
        raise ConfigError("dimension must be >= 1")
    if not (half_width > 0 and math.isfinite(half_width)):
        raise ConfigError("half_width must be finite and > 0")

    def g(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.where(np.max(np.abs(pts), axis=1) <= half_width, 1.0, 0.0)

    return FieldSpec(
        d=d, a=_zero_vector(d), trace_da=_zero_scalar(), v=_zero_scalar(),
        g=g, support_radius=half_width * math.sqrt(d),
        sup_a=0.0, sup_da=0.0, sup_v=0.0, sup_dv=0.0, sup_d2v=0.0,
        v_floor=0.0, sup_g=1.0, sup_dg=math.inf, sup_d2g=math.inf,
    )


def with_constant_shift(fields: FieldSpec, c) -> FieldSpec:
    """Same data with the vector potential shifted by a constant vector.

    Constant shifts leave the divergence untouched; the sup norm bound
    grows by |c|.  Used by the gauge-covariance checks.
    """
    c = np.asarray(c, dtype=float).reshape(fields.d)
    base = fields.a

    def a(pts: np.ndarray) -> np.ndarray:
        return base(pts) + c

    return replace(fields, a=a, sup_a=fields.sup_a + float(np.linalg.norm(c)))
