"""Privacy amplification by subsampling."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit as _expit

from fdp import curves
from fdp import duality
from fdp.curves import TradeoffCurve


def _check_p(p: float):
  if not 0 <= p <= 1:
    raise ValueError(f'sampling ratio p must lie in [0, 1], got {p}')


def subsample_curve(curve: TradeoffCurve, p: float) -> TradeoffCurve:
  """C_p(f) for a symmetric f.

  Piecewise-linear inputs give an exact grid; others a lazy
  :class:`~fdp.curves.Subsampled` evaluated from the three-segment form.

  Raises:
    ValueError: if p is outside [0, 1] or the curve is asymmetric.
  """
  _check_p(p)
  if not curves.is_symmetric(curve):
    raise ValueError('subsample_curve needs a symmetric curve')
  if p == 0 or isinstance(curve, curves.Identity):
    return curves.Identity()
  if p == 1:
    return curve
  if curve.piecewise_linear:
    return _subsample_grid(curves.to_grid(curve), p)
  return curves.Subsampled(curve, p)


def _subsample_grid(grid: curves.Grid, p: float) -> curves.Grid:
  x_star = curves.fixed_point(grid)
  a = np.append(grid.alpha[grid.alpha < x_star], x_star)
  b = p * grid._eval(a) + (1 - p) * (1 - a)
  # The inverse branch is the mirror image of the first; the chord joins
  # (x*, f_p(x*)) to its reflection.
  alpha = np.concatenate([a, b, [1.0]])
  beta = np.concatenate([b, a, [0.0]])
  return curves.from_grid((alpha, beta))


def classical_subsample(eps: float, delta: float, p: float
                        ) -> tuple[float, float]:
  """ε' = log(1 - p + p e^ε), δ' = p δ."""
  _check_p(p)
  if not eps >= 0 or not 0 <= delta <= 1:
    raise ValueError('need eps >= 0 and delta in [0, 1]')
  return math.log1p(p * math.expm1(eps)), p * delta


def subsample_eps_delta(eps: float, delta: float, p: float,
                        exact: bool = False) -> curves.Grid:
  """Amplified f_{ε,δ}: max{f_{ε',δ'}, c - α} with (ε', δ') the classical pair.

  By default c = 1 - pδ - p(e^ε - 1)/(e^ε + 1). For δ > 0 that intercept
  is below the slope -1 support line of C_p(f_{ε,δ}), giving a valid but
  slightly loose curve. ``exact=True`` uses the support line itself,
  c = 1 - p(e^ε - 1)/(e^ε + 1) - 2pδ/(1 + e^ε), and reproduces
  ``subsample_curve(eps_delta(ε, δ), p)``. Both agree when δ = 0.
  """
  eps_p, delta_p = classical_subsample(eps, delta, p)
  if exact:
    chord = 1 - p * math.tanh(eps / 2) - 2 * p * delta * _expit(-eps)
  else:
    chord = 1 - p * delta - p * math.tanh(eps / 2)
  slopes = [-math.exp(eps_p), -math.exp(-eps_p), -1.0]
  icepts = [1 - delta_p, math.exp(-eps_p) * (1 - delta_p), chord]
  return duality.lines_envelope(np.array(slopes), np.array(icepts))
