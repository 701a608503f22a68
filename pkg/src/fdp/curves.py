"""Trade-off curves: representations, structural algebra and serialization.

A trade-off curve is a convex, continuous, non-increasing map f on [0, 1]
with f(x) <= 1 - x. Named families are evaluated from their closed forms;
anything produced numerically is a :class:`Grid` (piecewise linear between
breakpoints). Lazy wrapper types (:class:`Subsampled`, :class:`DeltaScaled`,
...) keep derived curves exact where a formula exists.

All curve objects are immutable.
"""

from __future__ import annotations

import abc
import csv
import dataclasses
import io
import json
import math
from typing import Any, ClassVar, Iterable, Sequence

import numpy as np
from scipy import optimize
from scipy import stats

from fdp import numerics

DEFAULT_GRID_SIZE = 1001
_Z_SPAN = 12.0  # Φ(-12) ≈ 2e-33: pilot grids reach deep into both ends.


def _as_array(alpha) -> np.ndarray:
  return np.asarray(alpha, dtype=float)


def _check_unit(alpha: np.ndarray):
  if np.any(~((alpha >= 0) & (alpha <= 1))):
    raise ValueError('alpha must lie in [0, 1]')


class TradeoffCurve(abc.ABC):
  """Base class for every curve representation."""

  family: ClassVar[str] = ''
  piecewise_linear: ClassVar[bool] = False

  def __call__(self, alpha):
    a = _as_array(alpha)
    _check_unit(a)
    out = self._eval(a)
    return float(out) if out.ndim == 0 else out

  @abc.abstractmethod
  def _eval(self, a: np.ndarray) -> np.ndarray:
    """Evaluates on an array already known to lie in [0, 1]."""

  def slope(self, alpha) -> np.ndarray:
    """Right derivative f'(α) (non-positive)."""
    a = _as_array(alpha)
    h = 1e-7
    lo = np.clip(a - h, 0.0, 1.0)
    hi = np.clip(a + h, 0.0, 1.0)
    return (self._eval(hi) - self._eval(lo)) / (hi - lo)

  @property
  def known_symmetric(self) -> bool | None:
    """True/False when symmetry is known structurally, else None."""
    return None

  def inverse(self) -> TradeoffCurve:
    if self.known_symmetric:
      return self
    return InverseCurve(self)

  def kinks(self) -> np.ndarray:
    """Points in (0, 1) where the curve may fail to be smooth."""
    return np.empty(0)

  @property
  def f0(self) -> float:
    return float(self._eval(np.array(0.0)))

  def params(self) -> dict[str, Any]:
    return {}

  def __repr__(self):
    inner = ', '.join(f'{k}={v!r}' for k, v in self.params().items())
    return f'{type(self).__name__}({inner})'


@dataclasses.dataclass(frozen=True, repr=False)
class Identity(TradeoffCurve):
  """Id(x) = 1 - x: perfect privacy."""

  family: ClassVar[str] = 'identity'
  piecewise_linear: ClassVar[bool] = True

  def _eval(self, a):
    return 1.0 - a

  def slope(self, alpha):
    return np.full_like(_as_array(alpha), -1.0)

  @property
  def known_symmetric(self):
    return True


@dataclasses.dataclass(frozen=True, repr=False)
class Gdp(TradeoffCurve):
  """G_μ(α) = Φ(Φ⁻¹(1-α) - μ), the N(0,1) vs N(μ,1) trade-off."""

  mu: float
  family: ClassVar[str] = 'gdp'

  def __post_init__(self):
    if not self.mu >= 0:
      raise ValueError(f'mu must be non-negative, got {self.mu}')

  def _eval(self, a):
    # -Φ⁻¹(α) keeps relative precision for small α.
    return numerics.std_normal_cdf(-numerics.special.ndtri(a) - self.mu)

  def slope(self, alpha):
    z = -numerics.special.ndtri(_as_array(alpha))
    with np.errstate(over='ignore', invalid='ignore'):
      out = -np.exp(self.mu * z - 0.5 * self.mu**2)
    return np.where(self.mu == 0, -1.0, out)

  @property
  def known_symmetric(self):
    return True

  def params(self):
    return {'mu': self.mu}


def _eps_delta_eval(a, eps: float, delta: float):
  one = 1.0 - delta
  return np.maximum.reduce([
      np.zeros_like(a), one - math.exp(eps) * a, math.exp(-eps) * (one - a)])


def _eps_delta_kinks(eps: float, delta: float) -> np.ndarray:
  pts = [1.0 - delta]
  if eps > 0:
    pts.append((1.0 - delta) / (1.0 + math.exp(eps)))
  return np.array(sorted(p for p in pts if 0 < p < 1))


@dataclasses.dataclass(frozen=True, repr=False)
class EpsDelta(TradeoffCurve):
  """f_{ε,δ}(α) = max{0, 1-δ-e^ε α, e^{-ε}(1-δ-α)}."""

  eps: float
  delta: float
  family: ClassVar[str] = 'eps_delta'
  piecewise_linear: ClassVar[bool] = True

  def __post_init__(self):
    if not self.eps >= 0:
      raise ValueError(f'eps must be non-negative, got {self.eps}')
    if not 0 <= self.delta <= 1:
      raise ValueError(f'delta must lie in [0, 1], got {self.delta}')

  def _eval(self, a):
    return _eps_delta_eval(a, self.eps, self.delta)

  def slope(self, alpha):
    a = _as_array(alpha)
    one = 1.0 - self.delta
    x1 = one / (1.0 + math.exp(self.eps))
    return np.where(a < x1, -math.exp(self.eps),
                    np.where(a < one, -math.exp(-self.eps), 0.0))

  def kinks(self):
    return _eps_delta_kinks(self.eps, self.delta)

  @property
  def known_symmetric(self):
    return True

  def params(self):
    return {'eps': self.eps, 'delta': self.delta}


@dataclasses.dataclass(frozen=True, repr=False)
class PointMassDelta(TradeoffCurve):
  """f_{0,δ}(α) = max{0, 1-δ-α}: the shifted-uniform trade-off."""

  delta: float
  family: ClassVar[str] = 'point_mass_delta'
  piecewise_linear: ClassVar[bool] = True

  def __post_init__(self):
    if not 0 <= self.delta <= 1:
      raise ValueError(f'delta must lie in [0, 1], got {self.delta}')

  def _eval(self, a):
    return np.maximum(0.0, 1.0 - self.delta - a)

  def slope(self, alpha):
    return np.where(_as_array(alpha) < 1.0 - self.delta, -1.0, 0.0)

  def kinks(self):
    return _eps_delta_kinks(0.0, self.delta)

  @property
  def known_symmetric(self):
    return True

  def params(self):
    return {'delta': self.delta}


@dataclasses.dataclass(frozen=True, repr=False)
class Laplace(TradeoffCurve):
  """T(Lap(0,1), Lap(μ,1)) via its three-branch closed form."""

  mu: float
  family: ClassVar[str] = 'laplace'

  def __post_init__(self):
    if not self.mu >= 0:
      raise ValueError(f'mu must be non-negative, got {self.mu}')

  def _eval(self, a):
    b1 = 0.5 * math.exp(-self.mu)
    with np.errstate(divide='ignore'):
      middle = math.exp(-self.mu) / (4.0 * a)
    return np.where(a < b1, 1.0 - math.exp(self.mu) * a,
                    np.where(a <= 0.5, middle, math.exp(-self.mu) * (1.0 - a)))

  def slope(self, alpha):
    a = _as_array(alpha)
    b1 = 0.5 * math.exp(-self.mu)
    with np.errstate(divide='ignore'):
      middle = -math.exp(-self.mu) / (4.0 * a * a)
    return np.where(a < b1, -math.exp(self.mu),
                    np.where(a < 0.5, middle, -math.exp(-self.mu)))

  def kinks(self):
    return np.array(sorted({0.5 * math.exp(-self.mu), 0.5}))

  @property
  def known_symmetric(self):
    return True

  def params(self):
    return {'mu': self.mu}


@dataclasses.dataclass(frozen=True, repr=False)
class LocationFamily(TradeoffCurve):
  """T(ξ, t+ξ)(α) = F(F⁻¹(1-α) - t) for a log-concave noise law F.

  Attributes:
    dist: frozen ``scipy.stats`` continuous distribution (needs ``cdf``,
      ``isf`` and ``pdf``). Log-concavity is the caller's responsibility.
    shift: location shift t >= 0.
  """

  dist: Any
  shift: float
  family: ClassVar[str] = 'location'

  def __post_init__(self):
    if not self.shift >= 0:
      raise ValueError(f'shift must be non-negative, got {self.shift}')

  def _eval(self, a):
    return np.asarray(self.dist.cdf(self.dist.isf(a) - self.shift), float)

  def slope(self, alpha):
    z = self.dist.isf(_as_array(alpha))
    with np.errstate(divide='ignore', invalid='ignore'):
      out = -self.dist.pdf(z - self.shift) / self.dist.pdf(z)
    return np.where(self.shift == 0, -1.0, out)

  @property
  def known_symmetric(self):
    return True if self.shift == 0 else None

  def params(self):
    return {'distribution': _dist_name(self.dist), 'shift': self.shift}


def _dist_name(dist) -> str:
  name = getattr(getattr(dist, 'dist', None), 'name', None)
  args = getattr(dist, 'args', ())
  kwds = getattr(dist, 'kwds', {})
  if name is None or args or any(kwds.get(k, d) != d for k, d in
                                 (('loc', 0), ('scale', 1))) or (
                                     set(kwds) - {'loc', 'scale'}):
    raise TypeError('only standard scipy.stats distributions serialize')
  return name


class Grid(TradeoffCurve):
  """Piecewise-linear curve through breakpoints (α_i, β_i).

  The constructor enforces structure only: α strictly increasing from 0 to 1
  and β within [0, 1]. Shape constraints are checked by :func:`validate`;
  use :func:`from_grid` to canonicalize arbitrary samples.
  """

  family = 'grid'
  piecewise_linear = True

  def __init__(self, alpha: Sequence[float], beta: Sequence[float]):
    a = np.array(alpha, dtype=float)
    b = np.array(beta, dtype=float)
    if a.ndim != 1 or a.shape != b.shape or a.size < 2:
      raise ValueError('alpha and beta must be 1-d of equal length >= 2')
    if a[0] != 0.0 or a[-1] != 1.0:
      raise ValueError('breakpoints must start at alpha=0 and end at 1')
    if np.any(np.diff(a) <= 0):
      raise ValueError('alpha must be strictly increasing')
    if np.any(~((b >= 0) & (b <= 1))):
      raise ValueError('beta must lie in [0, 1]')
    a.flags.writeable = False
    b.flags.writeable = False
    self._alpha, self._beta = a, b

  @property
  def alpha(self) -> np.ndarray:
    return self._alpha

  @property
  def beta(self) -> np.ndarray:
    return self._beta

  def __len__(self):
    return self._alpha.size

  def __eq__(self, other):
    return (isinstance(other, Grid) and np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.beta, other.beta))

  def __hash__(self):
    return hash((self.alpha.tobytes(), self.beta.tobytes()))

  def __repr__(self):
    return f'Grid(<{len(self)} breakpoints>)'

  def _eval(self, a):
    return np.interp(a, self._alpha, self._beta)

  def segment_slopes(self) -> np.ndarray:
    return np.diff(self._beta) / np.diff(self._alpha)

  def slope(self, alpha):
    idx = np.searchsorted(self._alpha, _as_array(alpha), side='right') - 1
    idx = np.clip(idx, 0, self._alpha.size - 2)
    return self.segment_slopes()[idx]

  def kinks(self):
    return self._alpha[1:-1]

  @property
  def first_zero(self) -> float:
    """z_f = inf{α : f(α) = 0}."""
    zero = np.nonzero(self._beta <= 0.0)[0]
    return float(self._alpha[zero[0]]) if zero.size else 1.0

  def inverse(self):
    # Swap coordinates; ties in β keep the smallest α (left-continuity).
    x = self._beta[::-1]
    y = self._alpha[::-1]
    keep = np.concatenate([[True], np.diff(x) > 0])
    # For a run of equal x the reversed order lists the largest α first.
    starts = np.nonzero(keep)[0]
    ends = np.concatenate([starts[1:], [x.size]])
    ys = np.array([y[s:e].min() for s, e in zip(starts, ends)])
    xs = x[starts]
    if xs[-1] < 1.0:
      xs = np.append(xs, 1.0)
      ys = np.append(ys, 0.0)
    return Grid(xs, ys)

  def params(self):
    return {'alpha': self._alpha.tolist(), 'beta': self._beta.tolist()}


@dataclasses.dataclass(frozen=True, repr=False)
class InverseCurve(TradeoffCurve):
  """Left-continuous inverse f⁻¹(α) = inf{t : f(t) <= α}, by bisection."""

  base: TradeoffCurve
  family: ClassVar[str] = 'inverse'

  def _eval(self, a):
    return numerics.bisect_vectorized(self.base._eval, a, 0.0, 1.0)

  def slope(self, alpha):
    t = self._eval(_as_array(alpha))
    with np.errstate(divide='ignore'):
      return 1.0 / self.base.slope(t)

  def inverse(self):
    return self.base

  @property
  def known_symmetric(self):
    return self.base.known_symmetric

  def params(self):
    return {'base': to_dict(self.base)}


@dataclasses.dataclass(frozen=True, repr=False)
class PointwiseMax(TradeoffCurve):
  """max{first, second}; symmetric when second is the inverse of first."""

  first: TradeoffCurve
  second: TradeoffCurve
  symmetric_pair: bool = False
  family: ClassVar[str] = 'max'

  def _eval(self, a):
    return np.maximum(self.first._eval(a), self.second._eval(a))

  def slope(self, alpha):
    a = _as_array(alpha)
    pick = self.first._eval(a) >= self.second._eval(a)
    return np.where(pick, self.first.slope(a), self.second.slope(a))

  def inverse(self):
    if self.symmetric_pair:
      return self
    return PointwiseMax(self.first.inverse(), self.second.inverse())

  def kinks(self):
    return np.union1d(self.first.kinks(), self.second.kinks())

  @property
  def known_symmetric(self):
    return True if self.symmetric_pair else None

  def params(self):
    return {'first': to_dict(self.first), 'second': to_dict(self.second),
            'symmetric_pair': self.symmetric_pair}


@dataclasses.dataclass(frozen=True, repr=False)
class Mixture(TradeoffCurve):
  """f_p = p·f + (1-p)·Id, generally asymmetric."""

  base: TradeoffCurve
  p: float
  family: ClassVar[str] = 'mixture'

  def __post_init__(self):
    if not 0 <= self.p <= 1:
      raise ValueError(f'p must lie in [0, 1], got {self.p}')

  def _eval(self, a):
    return self.p * self.base._eval(a) + (1.0 - self.p) * (1.0 - a)

  def slope(self, alpha):
    return self.p * self.base.slope(alpha) - (1.0 - self.p)

  def kinks(self):
    return self.base.kinks()

  @property
  def known_symmetric(self):
    return True if self.p in (0.0, 1.0) and (
        self.p == 0 or self.base.known_symmetric) else None

  def params(self):
    return {'base': to_dict(self.base), 'p': self.p}


@dataclasses.dataclass(frozen=True, repr=False)
class EnvelopeCut(TradeoffCurve):
  """f on [0, x̄], the slope -1 support line after x̄, floored at 0.

  This is the supremum of the (ε, 1 + f*(-e^ε)) guarantees over ε >= 0,
  with x̄ the leftmost point where -1 is a subgradient of f.
  """

  base: TradeoffCurve
  x_bar: float
  family: ClassVar[str] = 'envelope_cut'

  def _eval(self, a):
    level = self.x_bar + float(self.base._eval(np.array(self.x_bar)))
    return np.where(a <= self.x_bar, self.base._eval(np.minimum(a, 1.0)),
                    np.maximum(level - a, 0.0))

  def slope(self, alpha):
    a = _as_array(alpha)
    level = self.x_bar + float(self.base._eval(np.array(self.x_bar)))
    return np.where(a < self.x_bar, self.base.slope(a),
                    np.where(a < level, -1.0, 0.0))

  def kinks(self):
    k = self.base.kinks()
    level = self.x_bar + float(self.base._eval(np.array(self.x_bar)))
    pts = np.concatenate([k[k < self.x_bar], [self.x_bar, level]])
    return np.unique(pts[(pts > 0) & (pts < 1)])

  def params(self):
    return {'base': to_dict(self.base), 'x_bar': self.x_bar}


@dataclasses.dataclass(frozen=True, repr=False)
class DeltaScaled(TradeoffCurve):
  """f ⊗ f_{0,δ}: the graph of f shrunk toward the origin by 1-δ."""

  base: TradeoffCurve
  delta: float
  family: ClassVar[str] = 'delta_scaled'

  def __post_init__(self):
    if not 0 <= self.delta <= 1:
      raise ValueError(f'delta must lie in [0, 1], got {self.delta}')

  def _eval(self, a):
    scale = 1.0 - self.delta
    if scale == 0:
      return np.zeros_like(a)
    inside = a <= scale
    u = np.where(inside, a / scale, 1.0)
    return np.where(inside, scale * self.base._eval(np.minimum(u, 1.0)), 0.0)

  def slope(self, alpha):
    a = _as_array(alpha)
    scale = 1.0 - self.delta
    if scale == 0:
      return np.zeros_like(a)
    inside = a < scale
    u = np.where(inside, a / scale, 1.0)
    return np.where(inside, self.base.slope(u), 0.0)

  def inverse(self):
    return DeltaScaled(self.base.inverse(), self.delta)

  def kinks(self):
    scale = 1.0 - self.delta
    pts = np.append(self.base.kinks() * scale, scale)
    return np.unique(pts[(pts > 0) & (pts < 1)])

  @property
  def known_symmetric(self):
    return self.base.known_symmetric

  def params(self):
    return {'base': to_dict(self.base), 'delta': self.delta}


@dataclasses.dataclass(frozen=True, repr=False)
class Subsampled(TradeoffCurve):
  """C_p(f) for a symmetric f via the three-segment closed form.

  f_p on [0, x*], the slope -1 chord on [x*, f_p(x*)], and f_p⁻¹ on
  [f_p(x*), 1], where x* is the fixed point of f and f_p = p f + (1-p) Id.
  """

  base: TradeoffCurve
  p: float
  family: ClassVar[str] = 'subsampled'

  def __post_init__(self):
    if not 0 <= self.p <= 1:
      raise ValueError(f'p must lie in [0, 1], got {self.p}')
    x_star = fixed_point(self.base)
    object.__setattr__(self, '_x_star', x_star)
    object.__setattr__(self, '_top', float(self._mix(np.array(x_star))))

  @property
  def x_star(self) -> float:
    return self._x_star

  @property
  def chord_end(self) -> float:
    """f_p(x*), where the chord meets the inverse branch."""
    return self._top

  def _mix(self, a):
    return self.p * self.base._eval(a) + (1.0 - self.p) * (1.0 - a)

  def _mix_inverse(self, a):
    return numerics.bisect_vectorized(self._mix, a, 0.0, self._x_star)

  def _eval(self, a):
    xs, top = self._x_star, self._top
    first = self._mix(np.minimum(a, xs))
    chord = xs + top - a
    third = self._mix_inverse(np.maximum(a, top))
    return np.where(a <= xs, first, np.where(a <= top, chord, third))

  def slope(self, alpha):
    a = _as_array(alpha)
    xs, top = self._x_star, self._top
    first = self.p * self.base.slope(np.minimum(a, xs)) - (1.0 - self.p)
    t = self._mix_inverse(np.maximum(a, top))
    with np.errstate(divide='ignore'):
      third = 1.0 / (self.p * self.base.slope(t) - (1.0 - self.p))
    return np.where(a < xs, first, np.where(a < top, -1.0, third))

  def kinks(self):
    k = self.base.kinks()
    k = k[k < self._x_star]
    mirrored = self._mix(k) if k.size else k
    pts = np.concatenate([k, mirrored, [self._x_star, self._top]])
    return np.unique(pts[(pts > 0) & (pts < 1)])

  @property
  def known_symmetric(self):
    return True

  def params(self):
    return {'base': to_dict(self.base), 'p': self.p}


@dataclasses.dataclass(frozen=True, repr=False)
class ShiftedGdp(TradeoffCurve):
  """max{G_μ(α+γ) - γ, 0}: the lower Berry-Esseen bracket as a curve."""

  mu: float
  gamma: float
  family: ClassVar[str] = 'shifted_gdp'

  def __post_init__(self):
    if not self.mu >= 0 or not self.gamma >= 0:
      raise ValueError('mu and gamma must be non-negative')

  def _eval(self, a):
    g = Gdp(self.mu)._eval(np.minimum(a + self.gamma, 1.0))
    return np.maximum(g - self.gamma, 0.0)

  def slope(self, alpha):
    a = _as_array(alpha)
    s = Gdp(self.mu).slope(np.minimum(a + self.gamma, 1.0))
    return np.where(self._eval(a) > 0, s, 0.0)

  @property
  def known_symmetric(self):
    return True

  def params(self):
    return {'mu': self.mu, 'gamma': self.gamma}


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def eval_curve(curve: TradeoffCurve, alpha):
  """f(α) with a domain check; see :meth:`TradeoffCurve.__call__`."""
  return curve(alpha)


def inverse(curve: TradeoffCurve) -> TradeoffCurve:
  return curve.inverse()


def is_symmetric(curve: TradeoffCurve, tol: float = 1e-8,
                 grid_size: int = 201) -> bool:
  """Structural answer when known, else compares f and f⁻¹ on a grid."""
  known = curve.known_symmetric
  if known is not None:
    return known
  if isinstance(curve, Grid):
    inv = curve.inverse()
    a = np.union1d(curve.alpha, inv.alpha)
    return bool(np.max(np.abs(curve._eval(a) - inv._eval(a))) <= tol)
  a = np.linspace(0.0, 1.0, grid_size)
  return bool(np.max(np.abs(curve._eval(a) - curve.inverse()._eval(a))) <= tol)


def symmetrize(curve: TradeoffCurve) -> TradeoffCurve:
  """f^S = max{f, f⁻¹}."""
  if curve.known_symmetric:
    return curve
  if isinstance(curve, Grid):
    return grid_max(curve, curve.inverse())
  return PointwiseMax(curve, curve.inverse(), symmetric_pair=True)


def grid_max(first: Grid, second: Grid) -> Grid:
  """Exact pointwise maximum of two piecewise-linear curves."""
  a = np.union1d(first.alpha, second.alpha)
  d = first._eval(a) - second._eval(a)
  # Sign changes inside a segment add the crossing point.
  change = np.nonzero(d[:-1] * d[1:] < 0)[0]
  cross = a[change] + (a[change + 1] - a[change]) * (
      d[change] / (d[change] - d[change + 1]))
  a = np.union1d(a, cross)
  return from_grid((a, np.maximum(first._eval(a), second._eval(a))))


def _dense_alpha(n: int) -> np.ndarray:
  """Breakpoints mixing uniform spacing with Gaussian-quantile spacing."""
  n_uniform = max(2, n // 2)
  uniform = np.linspace(0.0, 1.0, n_uniform)
  z = np.linspace(-_Z_SPAN, _Z_SPAN, max(2, n - n_uniform))
  return np.union1d(uniform, numerics.std_normal_cdf(z))


def _equidistributed_alpha(curve: TradeoffCurve, n: int) -> np.ndarray:
  """n breakpoints placing equal shares of ∫√f'' in every interval.

  Linear interpolation error on an interval of width h is about h²f''/8, so
  equalizing h√f'' balances the error across intervals.
  """
  pilot = np.union1d(np.linspace(0.0, 1.0, max(20001, 20 * n)),
                     numerics.std_normal_cdf(
                         np.linspace(-_Z_SPAN, _Z_SPAN, max(40001, 40 * n))))
  v = curve._eval(pilot)
  slopes = np.diff(v) / np.diff(pilot)
  turn = np.maximum(np.diff(slopes), 0.0)
  weight = np.sqrt(turn * 0.5 * (pilot[2:] - pilot[:-2]))
  cum = np.concatenate([[0.0], np.cumsum(weight)])
  if not cum[-1] > 0:
    return np.linspace(0.0, 1.0, n)
  out = np.interp(np.linspace(0.0, 1.0, n), cum / cum[-1], pilot[1:])
  out[0] = 0.0
  return out


def to_grid(curve: TradeoffCurve, n: int = DEFAULT_GRID_SIZE) -> Grid:
  """Piecewise-linear version of any curve.

  Piecewise-linear families convert exactly through their kinks. Smooth
  curves get about n breakpoints placed by curvature, plus their kinks.
  """
  if isinstance(curve, Grid):
    return curve
  kinks = np.asarray(curve.kinks(), dtype=float)
  if curve.piecewise_linear:
    a = np.union1d([0.0, 1.0], kinks)
  else:
    a = np.union1d(_equidistributed_alpha(curve, n), np.append(kinks,
                                                               [0.0, 1.0]))
  return from_grid((a, curve._eval(a)))


def conjugate(curve: TradeoffCurve, y: float) -> float:
  """Convex conjugate f*(y) = sup_{x in [0,1]} (y x - f(x))."""
  y = float(y)
  if isinstance(curve, Grid):
    return float(np.max(y * curve.alpha - curve.beta))
  if curve.piecewise_linear:
    return conjugate(to_grid(curve), y)
  if isinstance(curve, Gdp):
    return _gdp_conjugate(curve.mu, y)
  if isinstance(curve, DeltaScaled):
    return max((1.0 - curve.delta) * conjugate(curve.base, y), y)
  if isinstance(curve, ShiftedGdp):
    return _shifted_gdp_conjugate(curve.mu, curve.gamma, y)
  return _numeric_conjugate(curve, y)


def _gdp_maximizer(mu: float, y: float) -> float:
  """x where G_μ'(x) = y, for y < 0."""
  z = (math.log(-y) + 0.5 * mu * mu) / mu
  return float(numerics.std_normal_cdf(-z))


def _gdp_conjugate(mu: float, y: float) -> float:
  if y >= 0:
    return y
  if mu == 0:
    return max(y, -1.0)
  z = (math.log(-y) + 0.5 * mu * mu) / mu
  x = float(numerics.std_normal_cdf(-z))
  return y * x - float(numerics.std_normal_cdf(z - mu))


def _shifted_gdp_conjugate(mu: float, gamma: float, y: float) -> float:
  if y >= 0:
    return y
  g = Gdp(mu)
  upper = float(g._eval(np.array(min(gamma, 1.0))))
  if upper <= gamma:
    return 0.0  # the curve is identically zero
  u = _gdp_maximizer(mu, y) if mu > 0 else (0.0 if y < -1 else 1.0)
  u = min(max(u, gamma), upper)
  # Work in α = u - γ; y·u + γ(1 - y) cancels badly for large |y|.
  return y * (u - gamma) - float(g._eval(np.array(u))) + gamma


def _numeric_conjugate(curve: TradeoffCurve, y: float) -> float:
  a = np.union1d(_dense_alpha(513), curve.kinks())
  vals = y * a - curve._eval(a)
  i = int(np.argmax(vals))
  best = float(vals[i])
  lo, hi = a[max(i - 1, 0)], a[min(i + 1, a.size - 1)]
  if hi > lo:
    res = optimize.minimize_scalar(
        lambda x: -(y * x - float(curve._eval(np.array(x)))),
        bounds=(lo, hi), method='bounded', options={'xatol': 1e-14})
    best = max(best, -float(res.fun))
  return best


def fixed_point(curve: TradeoffCurve) -> float:
  """The unique x* with f(x*) = x*."""
  if isinstance(curve, Identity):
    return 0.5
  if isinstance(curve, Gdp):
    return float(numerics.std_normal_cdf(-0.5 * curve.mu))
  if isinstance(curve, EpsDelta):
    return (1.0 - curve.delta) / (1.0 + math.exp(curve.eps))
  if isinstance(curve, PointMassDelta):
    return 0.5 * (1.0 - curve.delta)
  if isinstance(curve, Grid):
    # β - α is strictly decreasing; solve linearly on the crossing segment.
    gap = curve.beta - curve.alpha
    i = int(np.searchsorted(-gap, 0.0, side='left'))
    if i == 0:
      return 0.0
    a0, a1 = curve.alpha[i - 1], curve.alpha[i]
    g0, g1 = gap[i - 1], gap[i]
    return float(a0 + (a1 - a0) * g0 / (g0 - g1))
  return numerics.bisect_monotone(
      lambda x: x - float(curve._eval(np.array(x))), 0.0, 0.0, 1.0,
      numerics.Tolerance(abs_tol=1e-13, max_iter=200))


@dataclasses.dataclass(frozen=True)
class Violation:
  property: str
  alpha: float
  magnitude: float


@dataclasses.dataclass(frozen=True)
class ValidationReport:
  violations: tuple[Violation, ...] = ()

  @property
  def is_valid(self) -> bool:
    return not self.violations

  def __bool__(self):
    return self.is_valid


def validate(curve: TradeoffCurve, grid_size: int = 10001,
             tol: float = 1e-9) -> ValidationReport:
  """Checks the trade-off shape constraints on a uniform grid.

  Reports the worst witness for each of: range, monotonicity, convexity
  (midpoint test) and the f(x) <= 1 - x bound. Grid curves are additionally
  checked at their own breakpoints.
  """
  if grid_size < 3:
    raise ValueError('grid_size must be at least 3')
  x = np.linspace(0.0, 1.0, grid_size)
  if isinstance(curve, Grid):
    x = np.union1d(x, curve.alpha)
  v = curve._eval(x)
  found: list[Violation] = []

  def record(name, excess, where):
    if excess.size and np.max(excess) > tol:
      i = int(np.argmax(excess))
      found.append(Violation(name, float(where[i]), float(excess[i])))

  record('range', np.maximum(-v, v - 1.0), x)
  record('monotone', np.diff(v), x[1:])
  # Midpoint convexity on possibly non-uniform x.
  w = (x[1:-1] - x[:-2]) / (x[2:] - x[:-2])
  chord = (1 - w) * v[:-2] + w * v[2:]
  record('convexity', v[1:-1] - chord, x[1:-1])
  record('bound', v - (1.0 - x), x)
  return ValidationReport(tuple(found))


def from_grid(points, enforce: bool = True) -> Grid:
  """Canonicalizes samples into a Grid curve.

  Args:
    points: iterable of (α, β) pairs, or a pair of arrays ``(alpha, beta)``.
    enforce: clamp β into [0, 1 - α] and replace the samples by their lower
      convex hull, so the result always passes :func:`validate`.

  Raises:
    ValueError: if no points are given.
  """
  if (isinstance(points, tuple) and len(points) == 2 and
      np.ndim(points[0]) == 1):
    a, b = (np.asarray(p, dtype=float) for p in points)
  else:
    arr = np.asarray(list(points), dtype=float)
    if arr.size == 0:
      raise ValueError('from_grid needs at least one point')
    a, b = arr[:, 0], arr[:, 1]
  if a.size == 0:
    raise ValueError('from_grid needs at least one point')
  a = np.clip(a, 0.0, 1.0)
  b = np.clip(b, 0.0, 1.0)
  order = np.lexsort((b, a))
  a, b = a[order], b[order]
  first = np.concatenate([[True], np.diff(a) > 0])
  a, b = a[first], b[first]  # lexsort puts the smallest β first per α
  if a[0] > 0:
    a, b = np.append(0.0, a), np.append(b[0], b)
  if a[-1] < 1:
    a, b = np.append(a, 1.0), np.append(b, 0.0)
  if enforce:
    b = np.minimum(b, 1.0 - a)
    b[-1] = 0.0
    a, b = numerics.lower_convex_hull_arrays(a, b)
  return Grid(a, b)


def sup_distance(first: TradeoffCurve, second: TradeoffCurve,
                 grid_size: int = 10001) -> float:
  """max |f - g| on a uniform grid plus both curves' kinks."""
  a = np.linspace(0.0, 1.0, grid_size)
  a = np.union1d(a, np.union1d(first.kinks(), second.kinks()))
  return float(np.max(np.abs(first._eval(a) - second._eval(a))))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_FAMILIES: dict[str, type] = {}


def _register(*classes):
  for cls in classes:
    _FAMILIES[cls.family] = cls


_register(Identity, Gdp, EpsDelta, PointMassDelta, Laplace, LocationFamily,
          InverseCurve, PointwiseMax, Mixture, EnvelopeCut, DeltaScaled,
          Subsampled, ShiftedGdp)

_NESTED = ('base', 'first', 'second')


def to_dict(curve: TradeoffCurve) -> dict[str, Any]:
  """JSON-ready dict: ``{"alpha", "beta"}`` for grids, else family/params."""
  if isinstance(curve, Grid):
    return {'alpha': curve.alpha.tolist(), 'beta': curve.beta.tolist()}
  return {'family': curve.family, 'params': curve.params()}


def from_dict(data: dict[str, Any]) -> TradeoffCurve:
  if 'alpha' in data:
    return Grid(data['alpha'], data['beta'])
  family = data['family']
  params = dict(data.get('params', {}))
  if family not in _FAMILIES:
    raise ValueError(f'unknown curve family {family!r}')
  for key in _NESTED:
    if key in params:
      params[key] = from_dict(params[key])
  if family == 'location':
    dist = getattr(stats, params.pop('distribution'))()
    return LocationFamily(dist, params['shift'])
  return _FAMILIES[family](**params)


def to_json(curve: TradeoffCurve) -> str:
  return json.dumps(to_dict(curve))


def from_json(text: str) -> TradeoffCurve:
  return from_dict(json.loads(text))


def format_float(x: float) -> str:
  return format(float(x), '.17g')


def to_csv(curve: TradeoffCurve, n: int = DEFAULT_GRID_SIZE) -> str:
  """Two-column ``alpha,beta`` CSV of the curve's grid form."""
  grid = to_grid(curve, n)
  buf = io.StringIO()
  writer = csv.writer(buf, lineterminator='\n')
  writer.writerow(['alpha', 'beta'])
  for a, b in zip(grid.alpha, grid.beta):
    writer.writerow([format_float(a), format_float(b)])
  return buf.getvalue()


def from_csv(text: str) -> Grid:
  rows = list(csv.reader(io.StringIO(text)))
  if rows and rows[0] and rows[0][0].strip().lower() == 'alpha':
    rows = rows[1:]
  pts = [(float(r[0]), float(r[1])) for r in rows if r]
  a, b = zip(*pts)
  return Grid(a, b)


def sample(curve: TradeoffCurve, alphas: Iterable[float]) -> list[tuple]:
  a = np.asarray(list(alphas), dtype=float)
  return list(zip(a.tolist(), np.atleast_1d(curve(a)).tolist()))
