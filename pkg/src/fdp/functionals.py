"""Moment functionals of trade-off curves and the divergences they encode.

All functionals are integrals of a function of |f'| over [0, 1]. Grid curves
have a constant slope per segment, so their integrals are exact finite sums.
Gaussian-type curves are integrated after the substitution x = Φ(-y), which
turns the steep end near x = 0 into a Gaussian tail.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Callable

import numpy as np

from fdp import curves
from fdp import numerics
from fdp.curves import TradeoffCurve

# Gaussian integrands are negligible beyond this many units from μ/2.
_Y_SPAN = 12.0
_QUAD_TOL = numerics.Tolerance(abs_tol=1e-14, rel_tol=1e-12, max_iter=4000)
_ATOM_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class MomentStats:
  """kl, κ₂, κ₃ and the centered κ̄₃ of a curve."""

  kl: float
  kappa2: float
  kappa3: float
  kappa3_bar: float
  finite: bool = True

  @classmethod
  def zero(cls) -> MomentStats:
    return cls(0.0, 0.0, 0.0, 0.0)

  @classmethod
  def divergent(cls) -> MomentStats:
    inf = math.inf
    return cls(inf, inf, inf, inf, finite=False)

  def to_json(self) -> str:
    return json.dumps(dataclasses.asdict(self))

  @classmethod
  def from_json(cls, text: str) -> MomentStats:
    return cls(**json.loads(text))


def _require_symmetric(curve: TradeoffCurve, what: str):
  if not curves.is_symmetric(curve, tol=1e-7):
    raise ValueError(f'{what} needs a symmetric curve')


def _has_atom(curve: TradeoffCurve) -> bool:
  return curve.f0 < 1.0 - _ATOM_TOL


def eps_delta_moments(eps: float) -> MomentStats:
  t = math.tanh(eps / 2)
  return MomentStats(eps * t, eps**2, eps**3, eps**3 * (1 - t**4))


def _gauss_integral(fn: Callable, lo: float, hi: float) -> float:
  return numerics.integrate(fn, lo, hi, _QUAD_TOL)


def gdp_moments(mu: float) -> MomentStats:
  """Moments of G_μ by quadrature in y, where log|f'| = μy - μ²/2."""
  if mu == 0:
    return MomentStats.zero()
  lo, hi = mu / 2 - _Y_SPAN, mu / 2 + _Y_SPAN
  pdf = numerics.std_normal_pdf

  def moment(h):
    # Split at y = μ/2 where log|f'| changes sign.
    return (_gauss_integral(lambda y: h(mu * y - mu * mu / 2) * pdf(y), lo,
                            mu / 2) +
            _gauss_integral(lambda y: h(mu * y - mu * mu / 2) * pdf(y), mu / 2,
                            hi))

  kl = -moment(lambda v: v)
  kappa2 = moment(lambda v: v * v)
  kappa3 = moment(lambda v: np.abs(v)**3)
  # Centering shifts the kink to y = 0.
  kappa3_bar = (
      _gauss_integral(lambda y: np.abs(mu * y - mu * mu / 2 + kl)**3 * pdf(y),
                      -_Y_SPAN, 0.0) +
      _gauss_integral(lambda y: np.abs(mu * y - mu * mu / 2 + kl)**3 * pdf(y),
                      0.0, _Y_SPAN))
  return MomentStats(kl, kappa2, kappa3, kappa3_bar)


def subsampled_gdp_log_slope(p: float, mu: float, y):
  """Z(y) = log(p e^{μy - μ²/2} + 1 - p)."""
  y = np.asarray(y, dtype=float)
  if p == 0:
    return np.zeros_like(y)
  with np.errstate(divide='ignore'):
    return np.logaddexp(math.log(p) + mu * y - mu * mu / 2, np.log1p(-p))


def moments_subsampled_gdp(p: float, mu: float) -> MomentStats:
  """Moments of C_p(G_μ) from one-dimensional integrals over y >= μ/2.

  Each point x in [0, x*] is written as x = Φ(-y); the inverse branch of
  the curve contributes the same integrands reweighted by |f_p'|, and the
  slope -1 chord contributes only to κ̄₃.
  """
  if not 0 <= p <= 1:
    raise ValueError(f'p must lie in [0, 1], got {p}')
  if not mu >= 0:
    raise ValueError(f'mu must be non-negative, got {mu}')
  if p == 0 or mu == 0:
    return MomentStats.zero()
  pdf = numerics.std_normal_pdf
  lo, hi = mu / 2, mu / 2 + _Y_SPAN

  def z(y):
    return subsampled_gdp_log_slope(p, mu, y)

  def both_sides(y):
    return p * pdf(y - mu) + (2 - p) * pdf(y)

  kl = p * _gauss_integral(lambda y: z(y) * (pdf(y - mu) - pdf(y)), lo, hi)
  kappa2 = _gauss_integral(lambda y: z(y)**2 * both_sides(y), lo, hi)
  kappa3 = _gauss_integral(lambda y: z(y)**3 * both_sides(y), lo, hi)
  x_star = float(numerics.std_normal_cdf(-mu / 2))
  top = p * x_star + (1 - p) * (1 - x_star)
  kappa3_bar = (
      _gauss_integral(
          lambda y: np.abs(z(y) - kl)**3 * (p * pdf(y - mu) +
                                            (1 - p) * pdf(y)), lo, hi) +
      _gauss_integral(lambda y: np.abs(z(y) + kl)**3 * pdf(y), lo, hi) +
      kl**3 * (top - x_star))
  return MomentStats(kl, kappa2, kappa3, kappa3_bar)


def _grid_segments(grid: curves.Grid) -> tuple[np.ndarray, np.ndarray]:
  """Segment lengths and |slopes| of a grid curve."""
  return np.diff(grid.alpha), np.abs(grid.segment_slopes())


def _grid_moments(grid: curves.Grid) -> MomentStats:
  h, s = _grid_segments(grid)
  if np.any(s[h > 0] == 0):
    return MomentStats.divergent()
  ell = np.log(s)
  kl = -math.fsum(h * ell)
  return MomentStats(kl, math.fsum(h * ell**2), math.fsum(h * np.abs(ell)**3),
                     math.fsum(h * np.abs(ell + kl)**3))


def _breaks(curve: TradeoffCurve, lo: float, hi: float, extra=()) -> np.ndarray:
  k = np.concatenate([np.asarray(curve.kinks(), float), list(extra)])
  return np.union1d([lo, hi], k[(k > lo) & (k < hi)])


def _piecewise_integral(fn: Callable, points: np.ndarray) -> float:
  return math.fsum(
      numerics.integrate(fn, a, b, _QUAD_TOL) for a, b in zip(points[:-1],
                                                              points[1:]))


def _symmetric_moments(curve: TradeoffCurve) -> MomentStats:
  """Moments of a smooth-by-parts symmetric curve from [0, x*] alone.

  For symmetric f, the part of the graph right of the fixed point mirrors
  the part on [0, x*], so ∫ h(log|f'|) over [0, 1] equals
  ∫₀^{x*} h(ℓ) + |f'| h(-ℓ) with ℓ = log|f'|.
  """
  x_star = curves.fixed_point(curve)
  pts = _breaks(curve, 0.0, x_star)

  def ell(x):
    with np.errstate(divide='ignore'):
      return np.log(np.abs(curve.slope(x)))

  def folded(h):
    def integrand(x):
      v = ell(x)
      return h(v) + np.exp(v) * h(-v)
    return _piecewise_integral(integrand, pts)

  kl = -folded(lambda v: v)
  kappa2 = folded(lambda v: v * v)
  kappa3 = folded(lambda v: np.abs(v)**3)
  kappa3_bar = folded(lambda v: np.abs(v + kl)**3)
  return MomentStats(kl, kappa2, kappa3, kappa3_bar)


def moments(curve: TradeoffCurve) -> MomentStats:
  """(kl, κ₂, κ₃, κ̄₃) of a symmetric curve.

  Curves with f(0) < 1 or a flat zero stretch return divergent stats.

  Raises:
    ValueError: for asymmetric input.
  """
  _require_symmetric(curve, 'moments')
  if _has_atom(curve):
    return MomentStats.divergent()
  if isinstance(curve, curves.Identity):
    return MomentStats.zero()
  if isinstance(curve, curves.EpsDelta):
    return eps_delta_moments(curve.eps)
  if isinstance(curve, curves.Gdp):
    return gdp_moments(curve.mu)
  if isinstance(curve, curves.Subsampled) and isinstance(
      curve.base, curves.Gdp):
    return moments_subsampled_gdp(curve.p, curve.base.mu)
  if curve.piecewise_linear:
    return _grid_moments(curves.to_grid(curve))
  if first_zero(curve) < 1.0:
    return MomentStats.divergent()
  return _symmetric_moments(curve)


def first_zero(curve: TradeoffCurve) -> float:
  """z_f = inf{x : f(x) = 0}."""
  if isinstance(curve, curves.Grid):
    z = curve.first_zero
  else:
    z = float(numerics.bisect_vectorized(curve._eval, np.array(0.0), 0.0, 1.0))
  # Breakpoints built from float sums can fall an ulp short of 1.
  return 1.0 if z >= 1.0 - 1e-12 else z


def slope_integral(curve: TradeoffCurve, h: Callable) -> float:
  """∫₀¹ h(|f'(x)|) dx: exact on grids, piecewise quadrature otherwise."""
  if curve.piecewise_linear:
    lengths, s = _grid_segments(curves.to_grid(curve))
    # Flat slivers of float-noise length are not a zero stretch.
    keep = ~((s == 0) & (lengths <= 1e-12))
    return math.fsum(lengths[keep] * h(s[keep]))
  pts = _breaks(curve, 0.0, 1.0, extra=[_fixed_point_or_half(curve)])
  return _piecewise_integral(lambda x: h(np.abs(curve.slope(x))), pts)


def _fixed_point_or_half(curve: TradeoffCurve) -> float:
  try:
    return curves.fixed_point(curve)
  except ValueError:
    return 0.5


def chi2_plus_gdp(mu: float) -> float:
  """e^{μ²}Φ(3μ/2) + 3Φ(-μ/2) - 2."""
  return (math.exp(mu * mu) * float(numerics.std_normal_cdf(1.5 * mu)) +
          3 * float(numerics.std_normal_cdf(-0.5 * mu)) - 2)


def chi2_plus(curve: TradeoffCurve, method: str = 'full') -> float:
  """χ²₊(f) = ∫₀¹ (|f'| - 1)₊² dx.

  Args:
    curve: symmetric curve.
    method: ``"full"`` integrates the definition over [0, 1];
      ``"fixed_point"`` integrates (f' + 1)² over [0, x*] only.

  Returns:
    The value, or +inf when f(0) < 1.
  """
  if method not in ('full', 'fixed_point'):
    raise ValueError(f'unknown method {method!r}')
  _require_symmetric(curve, 'chi2_plus')
  if _has_atom(curve):
    return math.inf
  if isinstance(curve, curves.Identity):
    return 0.0
  if isinstance(curve, curves.Gdp):
    return _chi2_plus_gdp_numeric(curve.mu, method)
  if method == 'full':
    return slope_integral(curve, lambda s: np.maximum(s - 1.0, 0.0)**2)
  x_star = curves.fixed_point(curve)
  if curve.piecewise_linear:
    grid = curves.to_grid(curve)
    a = np.union1d(grid.alpha[grid.alpha < x_star], [x_star])
    s = (np.diff(grid._eval(a)) / np.diff(a))
    return math.fsum(np.diff(a) * (s + 1.0)**2)
  pts = _breaks(curve, 0.0, x_star)
  return _piecewise_integral(lambda x: (curve.slope(x) + 1.0)**2, pts)


def _chi2_plus_gdp_numeric(mu: float, method: str) -> float:
  if mu == 0:
    return 0.0
  pdf = numerics.std_normal_pdf
  if method == 'fixed_point':
    # x = Φ(-y) maps [0, x*] onto y >= μ/2.
    return _gauss_integral(
        lambda y: np.expm1(mu * y - mu * mu / 2)**2 * pdf(y), mu / 2,
        mu / 2 + _Y_SPAN)
  # Direct x-space definition, split at the fixed point.
  g = curves.Gdp(mu)
  x_star = curves.fixed_point(g)
  fn = lambda x: np.maximum(np.abs(g.slope(x)) - 1.0, 0.0)**2
  return _piecewise_integral(fn, np.array([0.0, x_star, 1.0]))


def total_variation(curve: TradeoffCurve) -> float:
  """½∫₀¹|1 + f'| dx + ½(1 - f(0))."""
  atom = 0.5 * (1.0 - curve.f0)
  return slope_integral(curve, lambda s: 0.5 * np.abs(1.0 - s)) + atom


def kl_divergence(curve: TradeoffCurve) -> float:
  """KL(P || Q) for any pair with T(P, Q) = f.

  Mass of Q outside the support of P (an atom f(0) < 1) costs nothing here;
  mass of P outside the support of Q (a flat zero stretch) makes it infinite.
  """
  if first_zero(curve) < 1.0:
    return math.inf
  if curves.is_symmetric(curve, tol=1e-7):
    return moments(curve).kl
  with np.errstate(divide='ignore'):
    return -slope_integral(curve, np.log)


def renyi_divergence(curve: TradeoffCurve, order: float) -> float:
  if not order > 1:
    raise ValueError(f'Renyi order must exceed 1, got {order}')
  if first_zero(curve) < 1.0:
    return math.inf
  if isinstance(curve, curves.Gdp):
    return gdp_to_rdp(curve.mu, order)
  with np.errstate(divide='ignore'):
    total = slope_integral(curve, lambda s: s**(1.0 - order))
  return math.log(total) / (order - 1.0)


def f_divergence(curve: TradeoffCurve, kind: str,
                 order: float | None = None) -> float:
  """TV, KL or Rényi divergence of any pair realizing the curve.

  Args:
    curve: valid trade-off curve.
    kind: ``"tv"``, ``"kl"`` or ``"renyi"``.
    order: Rényi order (> 1), required for ``"renyi"``.
  """
  kind = kind.lower()
  if kind == 'tv':
    return total_variation(curve)
  if kind == 'kl':
    return kl_divergence(curve)
  if kind == 'renyi':
    if order is None:
      raise ValueError('renyi divergence needs an order')
    return renyi_divergence(curve, order)
  raise ValueError(f'unknown divergence {kind!r}')


def gdp_renyi_numeric(mu: float, order: float) -> float:
  """Rényi divergence of G_μ by quadrature in y (cross-check path)."""
  pdf = numerics.std_normal_pdf
  c = 1.0 - order
  fn = lambda y: np.exp(c * (mu * y - mu * mu / 2)) * pdf(y)
  total = _gauss_integral(fn, -_Y_SPAN - 10 * mu * order,
                          _Y_SPAN + 10 * mu * order)
  return math.log(total) / (order - 1.0)


def gdp_to_rdp(mu: float, order: float) -> float:
  """μ-GDP implies (α, μ²α/2)-RDP."""
  if not order > 1:
    raise ValueError(f'Renyi order must exceed 1, got {order}')
  if not mu >= 0:
    raise ValueError(f'mu must be non-negative, got {mu}')
  return mu * mu * order / 2
