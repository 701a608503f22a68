"""Conversions between trade-off curves and families of (ε, δ) guarantees."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from fdp import curves
from fdp import numerics
from fdp.curves import TradeoffCurve

DEFAULT_EPS_HI = 50.0
EPS_TOL = 1e-6


@dataclasses.dataclass(frozen=True)
class PrivacyProfile:
  """ε ↦ δ(ε), the dual description of a symmetric trade-off curve.

  Attributes:
    delta_fn: scalar function returning δ(ε) for ε >= 0.
    curve: the primal curve, when the profile was derived from one.
  """

  delta_fn: Callable[[float], float]
  curve: TradeoffCurve | None = None

  def delta(self, eps: float) -> float:
    if not eps >= 0:
      raise ValueError(f'eps must be non-negative, got {eps}')
    return self.delta_fn(float(eps))

  def __call__(self, eps: float) -> float:
    return self.delta(eps)

  def table(self, eps: Iterable[float]) -> list[tuple[float, float]]:
    return [(float(e), self.delta(e)) for e in eps]

  def to_csv(self, eps: Iterable[float]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['epsilon', 'delta'])
    for e, d in self.table(eps):
      writer.writerow([curves.format_float(e), curves.format_float(d)])
    return buf.getvalue()

  def to_json(self, eps: Iterable[float]) -> str:
    return json.dumps([{'epsilon': e, 'delta': d} for e, d in self.table(eps)])


def profile_delta(curve: TradeoffCurve, eps: float) -> float:
  """δ(ε) = 1 + f*(-e^ε), clamped into [0, 1]."""
  if eps > 709:
    return max(0.0, 1.0 - curve.f0)
  value = 1.0 + curves.conjugate(curve, -math.exp(eps))
  return min(max(value, 0.0), 1.0)


def primal_to_dual(curve: TradeoffCurve) -> PrivacyProfile:
  """The privacy profile of a symmetric curve.

  Raises:
    ValueError: for asymmetric input; apply :func:`symm_envelope` first.
  """
  if not curves.is_symmetric(curve):
    raise ValueError('primal_to_dual needs a symmetric curve; '
                     'apply symm_envelope first')
  if isinstance(curve, curves.Gdp):
    mu = curve.mu
    return PrivacyProfile(lambda e: gdp_to_dp(mu, e), curve)
  return PrivacyProfile(lambda e: profile_delta(curve, e), curve)


def gdp_to_dp(mu: float, eps: float) -> float:
  """Φ(-ε/μ + μ/2) - e^ε Φ(-ε/μ - μ/2)."""
  if mu < 0 or eps < 0:
    raise ValueError('mu and eps must be non-negative')
  if mu == 0:
    return 0.0
  first = float(numerics.std_normal_cdf(-eps / mu + mu / 2))
  # e^ε Φ(.) overflows for large ε; combine in log space.
  second = math.exp(eps + float(numerics.std_normal_logcdf(-eps / mu - mu / 2)))
  return max(first - second, 0.0)


def dual_to_primal(guarantees: Sequence[tuple[float, float]]) -> curves.Grid:
  """sup_i f_{ε_i, δ_i} as an exact piecewise-linear curve.

  Each guarantee contributes two supporting lines. Their upper envelope is
  read off the lower convex hull of the dual points (slope, -intercept).

  Raises:
    ValueError: on an empty list or out-of-range parameters.
  """
  if len(guarantees) == 0:
    raise ValueError('at least one (eps, delta) guarantee is required')
  eps = np.array([g[0] for g in guarantees], dtype=float)
  delta = np.array([g[1] for g in guarantees], dtype=float)
  if np.any(~(eps >= 0)) or np.any(~((delta >= 0) & (delta <= 1))):
    raise ValueError('need eps >= 0 and delta in [0, 1]')
  slopes = np.concatenate([-np.exp(eps), -np.exp(-eps)])
  icepts = np.concatenate([1 - delta, np.exp(-eps) * (1 - delta)])
  return lines_envelope(slopes, icepts)


def lines_envelope(slopes: np.ndarray, icepts: np.ndarray) -> curves.Grid:
  """max{0, max_i (s_i α + b_i)} on [0, 1] as an exact grid curve."""
  slopes = np.append(np.asarray(slopes, dtype=float), 0.0)
  icepts = np.append(np.asarray(icepts, dtype=float), 0.0)
  # Keep the highest line for each slope.
  order = np.lexsort((-icepts, slopes))
  slopes, icepts = slopes[order], icepts[order]
  first = np.concatenate([[True], np.diff(slopes) > 0])
  slopes, icepts = slopes[first], icepts[first]
  if slopes.size == 1:
    hs, hb = slopes, icepts
  else:
    hs, neg_b = numerics.lower_convex_hull_arrays(slopes, -icepts)
    hb = -neg_b
  cross = (hb[:-1] - hb[1:]) / (hs[1:] - hs[:-1])
  alpha = np.union1d([0.0, 1.0], cross[(cross > 0) & (cross < 1)])
  beta = np.max(slopes[:, None] * alpha[None, :] + icepts[:, None], axis=0)
  return curves.from_grid((alpha, beta))


def _envelope_point(curve: TradeoffCurve) -> float:
  """Leftmost x̄ at which -1 is a subgradient (first minimizer of x + f)."""
  if isinstance(curve, curves.Grid):
    total = curve.alpha + curve.beta
    return float(curve.alpha[int(np.argmin(total))])
  return float(numerics.bisect_vectorized(
      lambda x: -curve.slope(x), np.array(1.0), 0.0, 1.0))


def symm_envelope(curve: TradeoffCurve) -> TradeoffCurve:
  """Symm(f): the tightest symmetric curve implied by f's (ε, δ) profile.

  When x̄ <= f(x̄) the result follows f on [0, x̄], the slope -1 line on
  [x̄, f(x̄)] and f⁻¹ beyond; otherwise it is max{f, f⁻¹}.
  """
  if curves.is_symmetric(curve):
    return curve
  x_bar = _envelope_point(curve)
  fx = float(curve(x_bar))
  if x_bar > fx:
    return curves.symmetrize(curve)
  if isinstance(curve, curves.Grid):
    keep = curve.alpha <= x_bar
    a = np.append(curve.alpha[keep], [x_bar + fx, 1.0])
    b = np.append(curve.beta[keep], [0.0, 0.0])
    cut = curves.from_grid((a, b))
    return curves.grid_max(cut, cut.inverse())
  cut = curves.EnvelopeCut(curve, x_bar)
  return curves.PointwiseMax(cut, curves.InverseCurve(cut), symmetric_pair=True)


def tightest_epsilon(curve: TradeoffCurve, delta: float,
                     eps_hi: float = DEFAULT_EPS_HI,
                     abs_tol: float = EPS_TOL) -> float:
  """Smallest ε in [0, eps_hi] with δ(ε) <= delta.

  Raises:
    ValueError: if delta is outside (0, 1) or no such ε exists below eps_hi.
  """
  if not 0 < delta < 1:
    raise ValueError(f'delta must lie in (0, 1), got {delta}')
  profile = primal_to_dual(curve)
  if profile(0.0) <= delta:
    return 0.0
  if profile(eps_hi) > delta:
    raise ValueError(
        f'no epsilon <= {eps_hi} achieves delta={delta} '
        f'(delta({eps_hi}) = {profile(eps_hi):.3g})')
  lo, hi = 0.0, float(eps_hi)
  while hi - lo > abs_tol:
    mid = 0.5 * (lo + hi)
    if profile(mid) <= delta:
      hi = mid
    else:
      lo = mid
  return hi
