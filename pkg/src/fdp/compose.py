"""Composition of privacy guarantees: exact rules, CLT estimates, groups."""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Sequence

import numpy as np

from fdp import catalog
from fdp import curves
from fdp import functionals
from fdp.catalog import DiscretePair
from fdp.curves import TradeoffCurve
from fdp.functionals import MomentStats

BERRY_ESSEEN_CONSTANT = 0.56
MAX_PRODUCT_SUPPORT = 10**7
MAX_BINOMIAL_N = 10**5


@dataclasses.dataclass(frozen=True)
class CltEstimate:
  """GDP approximation G_μ with uniform bracket half-width γ.

  ``kl_total`` (‖kl‖₁) and ``scale`` (√(‖κ₂‖₁ - ‖kl‖₂²)) are kept so callers
  can inspect the two quantities μ is built from.
  """

  mu: float
  gamma: float
  kl_total: float = math.nan
  scale: float = math.nan

  @property
  def meaningful(self) -> bool:
    return self.gamma < 0.5

  def to_json(self) -> str:
    return json.dumps({'mu': self.mu, 'gamma': self.gamma})


def tensor_gdp(mus: Sequence[float]) -> float:
  """μ₁-GDP ⊗ ... ⊗ μ_n-GDP is √(Σμ²)-GDP."""
  if len(mus) == 0:
    raise ValueError('need at least one mu')
  arr = np.asarray(mus, dtype=float)
  if np.any(~(arr >= 0)):
    raise ValueError('mus must be non-negative')
  return float(np.hypot.reduce(arr)) if arr.size > 1 else float(arr[0])


def _combine_delta(d1: float, d2: float) -> float:
  return 1.0 - (1.0 - d1) * (1.0 - d2)


def tensor_scale_delta(curve: TradeoffCurve, delta: float) -> TradeoffCurve:
  """f ⊗ f_{0,δ}: α ↦ (1-δ) f(α/(1-δ)) on [0, 1-δ], zero beyond."""
  if not 0 <= delta <= 1:
    raise ValueError(f'delta must lie in [0, 1], got {delta}')
  if delta == 0:
    return curve
  if isinstance(curve, curves.Identity):
    return curves.PointMassDelta(delta)
  if isinstance(curve, curves.PointMassDelta):
    return curves.PointMassDelta(_combine_delta(curve.delta, delta))
  if isinstance(curve, curves.EpsDelta):
    return curves.EpsDelta(curve.eps, _combine_delta(curve.delta, delta))
  if isinstance(curve, curves.DeltaScaled):
    return curves.DeltaScaled(curve.base, _combine_delta(curve.delta, delta))
  if isinstance(curve, curves.Grid):
    scale = 1.0 - delta
    a = np.append(curve.alpha * scale, 1.0)
    b = np.append(curve.beta * scale, 0.0)
    return curves.from_grid((a, b))
  return curves.DeltaScaled(curve, delta)


def tensor_exact_discrete(a: DiscretePair, b: DiscretePair) -> DiscretePair:
  """(P × P', Q × Q') on the product support.

  Raises:
    ValueError: if the product support exceeds ``MAX_PRODUCT_SUPPORT``.
  """
  size = a.support_size * b.support_size
  if size > MAX_PRODUCT_SUPPORT:
    raise ValueError(f'product support {size} exceeds {MAX_PRODUCT_SUPPORT}')
  p = np.outer(a.p, b.p).ravel()
  q = np.outer(a.q, b.q).ravel()
  # Renormalize the rounding drift of the products.
  return DiscretePair(p / math.fsum(p), q / math.fsum(q))


def compose_homogeneous_pure(eps: float, n: int) -> curves.Grid:
  """f_{ε,0}^{⊗n}, exactly, through the binomial representation."""
  if not 1 <= n <= MAX_BINOMIAL_N:
    raise ValueError(f'n must lie in [1, {MAX_BINOMIAL_N}], got {n}')
  return catalog.from_discrete_pair(catalog.binomial_pair(n, eps))


def clt_estimate(stats: Sequence[MomentStats]) -> CltEstimate:
  """Berry-Esseen (μ, γ) for f₁ ⊗ ... ⊗ f_n from per-curve moments.

  Raises:
    ValueError: on empty input, divergent stats (decompose the δ mass first)
      or a non-positive variance term.
  """
  if len(stats) == 0:
    raise ValueError('need at least one MomentStats')
  if not all(s.finite for s in stats):
    raise ValueError('divergent moments: split off the delta part with '
                     'tensor_scale_delta before applying the CLT')
  kl = np.array([s.kl for s in stats])
  k2 = math.fsum(s.kappa2 for s in stats)
  k3 = math.fsum(s.kappa3_bar for s in stats)
  var = k2 - math.fsum(kl * kl)
  if not var > 0:
    raise ValueError(f'CLT variance term must be positive, got {var!r}')
  scale = math.sqrt(var)
  total = math.fsum(kl)
  return CltEstimate(mu=2 * total / scale,
                     gamma=BERRY_ESSEEN_CONSTANT * k3 / scale**3,
                     kl_total=total, scale=scale)


def homogeneous_pure_clt(eps: float, n: int) -> CltEstimate:
  """Closed-form (μ, γ) for n copies of f_{ε,0}."""
  return CltEstimate(
      mu=2 * math.sqrt(n) * math.sinh(eps / 2),
      gamma=BERRY_ESSEEN_CONSTANT / math.sqrt(n) * math.cosh(eps) /
      math.cosh(eps / 2))


def _extended_gdp(mu: float, x: np.ndarray) -> np.ndarray:
  g = curves.Gdp(mu)._eval(np.clip(x, 0.0, 1.0))
  return np.where(x < 0, 1.0, np.where(x > 1, 0.0, g))


def clt_bracket(estimate: CltEstimate, alpha):
  """(G_μ(α+γ) - γ, G_μ(α-γ) + γ), clamped to [0, 1]."""
  a = np.asarray(alpha, dtype=float)
  if np.any(~((a >= 0) & (a <= 1))):
    raise ValueError('alpha must lie in [0, 1]')
  mu, gamma = estimate.mu, estimate.gamma
  lower = np.clip(_extended_gdp(mu, a + gamma) - gamma, 0.0, 1.0)
  upper = np.clip(_extended_gdp(mu, a - gamma) + gamma, 0.0, 1.0)
  if a.ndim == 0:
    return float(lower), float(upper)
  return lower, upper


def clt_dp_array(guarantees: Sequence[tuple[float, float]]
                 ) -> tuple[TradeoffCurve, float]:
  """G_μ̂ ⊗ f_{0,δ_total} for a list of (ε_i, δ_i) guarantees.

  μ̂ comes from the Berry-Esseen estimate of the pure parts f_{ε_i,0} and
  δ_total = 1 - Π(1 - δ_i).

  Returns:
    The curve and the γ of the estimate (0 when every ε_i is 0).
  """
  if len(guarantees) == 0:
    raise ValueError('need at least one (eps, delta) guarantee')
  eps = [float(e) for e, _ in guarantees]
  deltas = np.array([d for _, d in guarantees], dtype=float)
  if any(not e >= 0 for e in eps) or np.any(~((deltas >= 0) & (deltas <= 1))):
    raise ValueError('need eps >= 0 and delta in [0, 1]')
  delta_total = float(-np.expm1(np.sum(np.log1p(-deltas))))
  if all(e == 0 for e in eps):
    return curves.PointMassDelta(delta_total), 0.0
  est = clt_estimate([functionals.eps_delta_moments(e) for e in eps])
  return tensor_scale_delta(curves.Gdp(est.mu), delta_total), est.gamma


def _hat_compose(f: curves.Grid, h: curves.Grid) -> curves.Grid:
  """x ↦ f(1 - h(x)) on the union of breakpoints of both pieces."""
  targets = 1.0 - f.alpha
  crossings = h.inverse()._eval(np.clip(targets, 0.0, 1.0))
  a = np.union1d(h.alpha, crossings)
  return curves.from_grid((a, f._eval(np.clip(1.0 - h._eval(a), 0.0, 1.0))))


def group_privacy(curve: TradeoffCurve, k: int,
                  grid_size: int = curves.DEFAULT_GRID_SIZE) -> TradeoffCurve:
  """1 - (1 - f)^{∘k}, the guarantee for groups of size k.

  Location families scale their shift by k. Piecewise-linear curves are
  composed exactly; other curves are first sampled to ``grid_size`` points.
  """
  if k < 1:
    raise ValueError(f'k must be at least 1, got {k}')
  if k == 1:
    return curve
  if isinstance(curve, curves.Identity):
    return curve
  if isinstance(curve, curves.Gdp):
    return curves.Gdp(k * curve.mu)
  if isinstance(curve, curves.Laplace):
    return curves.Laplace(k * curve.mu)
  if isinstance(curve, curves.LocationFamily):
    return curves.LocationFamily(curve.dist, k * curve.shift)
  f = curves.to_grid(curve, grid_size)
  h = f
  for _ in range(k - 1):
    h = _hat_compose(f, h)
  return h
