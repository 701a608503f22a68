"""Constructors for the named trade-off families and discrete pairs."""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Sequence

import numpy as np
from scipy import special

from fdp import curves
from fdp.curves import TradeoffCurve

_SUM_TOL = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class DiscretePair:
  """Two probability vectors p, q on a shared finite support."""

  p: np.ndarray
  q: np.ndarray

  def __post_init__(self):
    p = np.array(self.p, dtype=float)
    q = np.array(self.q, dtype=float)
    if p.ndim != 1 or p.shape != q.shape or p.size < 1:
      raise ValueError('p and q must be 1-d vectors of equal positive length')
    if np.any(p < 0) or np.any(q < 0):
      raise ValueError('probabilities must be non-negative')
    for name, v in (('p', p), ('q', q)):
      if abs(math.fsum(v) - 1.0) > _SUM_TOL:
        raise ValueError(f'{name} must sum to 1, got {math.fsum(v)!r}')
    p.flags.writeable = False
    q.flags.writeable = False
    object.__setattr__(self, 'p', p)
    object.__setattr__(self, 'q', q)

  @property
  def support_size(self) -> int:
    return self.p.size

  def swapped(self) -> DiscretePair:
    return DiscretePair(self.q, self.p)

  def to_json(self) -> str:
    return json.dumps({'p': self.p.tolist(), 'q': self.q.tolist()})

  @classmethod
  def from_json(cls, text: str) -> DiscretePair:
    data = json.loads(text)
    return cls(data['p'], data['q'])


def gdp(mu: float) -> curves.Gdp:
  return curves.Gdp(float(mu))


def eps_delta(eps: float, delta: float) -> curves.EpsDelta:
  return curves.EpsDelta(float(eps), float(delta))


def laplace(mu: float) -> curves.Laplace:
  return curves.Laplace(float(mu))


def identity() -> curves.Identity:
  return curves.Identity()


def point_mass_delta(delta: float) -> curves.PointMassDelta:
  return curves.PointMassDelta(float(delta))


def location_family(dist, shift: float) -> TradeoffCurve:
  """F(F⁻¹(1-α) - t) for a frozen scipy distribution with log-concave density."""
  if shift == 0:
    return curves.Identity()
  return curves.LocationFamily(dist, float(shift))


def neyman_pearson_vertices(p: np.ndarray, q: np.ndarray
                            ) -> tuple[np.ndarray, np.ndarray]:
  """Vertices (Σp, 1 - Σq) of the most-powerful-test frontier.

  Support points are rejected in decreasing order of q/p. Equal ratios are
  merged, points with p = q = 0 dropped.
  """
  p = np.asarray(p, dtype=float)
  q = np.asarray(q, dtype=float)
  keep = (p > 0) | (q > 0)
  p, q = p[keep], q[keep]
  # Compare ratios through log space; p = 0 gives +inf, q = 0 gives -inf.
  with np.errstate(divide='ignore'):
    ratio = np.log(q) - np.log(p)
  order = np.argsort(-ratio, kind='stable')
  ratio, p, q = ratio[order], p[order], q[order]
  starts = np.concatenate([[True], np.diff(ratio) != 0])
  groups = np.cumsum(starts) - 1
  p_sum = np.bincount(groups, weights=p)
  q_sum = np.bincount(groups, weights=q)
  alpha = np.concatenate([[0.0], np.cumsum(p_sum)])
  beta = np.concatenate([[1.0], 1.0 - np.cumsum(q_sum)])
  return alpha, beta


def from_discrete_pair(pair: DiscretePair) -> curves.Grid:
  """Exact trade-off T(P, Q) of a discrete pair (piecewise linear)."""
  alpha, beta = neyman_pearson_vertices(pair.p, pair.q)
  return curves.from_grid((alpha, beta))


def binomial_pmf(n: int, prob: float) -> np.ndarray:
  """Binomial(n, prob) pmf on {0..n} evaluated in log space."""
  k = np.arange(n + 1, dtype=float)
  log_choose = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(
      n - k + 1)
  with np.errstate(divide='ignore'):
    logs = log_choose + special.xlogy(k, prob) + special.xlog1py(n - k, -prob)
  pmf = np.exp(logs)
  return pmf / math.fsum(pmf)


def binomial_pair(n: int, eps: float) -> DiscretePair:
  """(B(n, p_ε), B(n, q_ε)) with p_ε = 1/(1+e^ε), q_ε = 1 - p_ε.

  Realizes the n-fold composition of f_{ε,0}.
  """
  if n < 1:
    raise ValueError(f'n must be at least 1, got {n}')
  if not eps >= 0:
    raise ValueError(f'eps must be non-negative, got {eps}')
  p_eps = float(special.expit(-eps))
  return DiscretePair(binomial_pmf(n, p_eps), binomial_pmf(n, 1.0 - p_eps))


def bernoulli_pair(eps: float) -> DiscretePair:
  """Two-point pair whose trade-off is f_{ε,0}."""
  return binomial_pair(1, eps)


def perfectly_distinguishable() -> DiscretePair:
  return DiscretePair([1.0, 0.0], [0.0, 1.0])


def as_pair(p: Sequence[float], q: Sequence[float]) -> DiscretePair:
  return DiscretePair(np.asarray(p, float), np.asarray(q, float))
