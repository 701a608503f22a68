"""Scalar special functions and generic numerical routines."""

from __future__ import annotations

import dataclasses
import heapq
import math
from typing import Callable, Sequence

import numpy as np
from scipy import special


@dataclasses.dataclass(frozen=True)
class Tolerance:
  """Error targets for iterative routines.

  Attributes:
    abs_tol: absolute error target.
    rel_tol: relative error target.
    max_iter: cap on iterations (bisection steps or quadrature subdivisions).
  """
  abs_tol: float = 1e-10
  rel_tol: float = 1e-9
  max_iter: int = 200

  def __post_init__(self):
    if not self.abs_tol > 0:
      raise ValueError(f'abs_tol must be positive, got {self.abs_tol}')
    if self.rel_tol < 0:
      raise ValueError(f'rel_tol must be non-negative, got {self.rel_tol}')
    if self.max_iter < 1:
      raise ValueError(f'max_iter must be at least 1, got {self.max_iter}')


DEFAULT_TOL = Tolerance()


class IntegrationError(RuntimeError):
  """Raised when adaptive quadrature runs out of subdivisions.

  Attributes:
    estimate: the best estimate available when refinement stopped.
    error: the error estimate attached to it.
  """

  def __init__(self, message: str, estimate: float, error: float):
    super().__init__(message)
    self.estimate = estimate
    self.error = error


def std_normal_cdf(x):
  """Standard normal CDF, accepting scalars or arrays (±inf allowed)."""
  return special.ndtr(x)


def std_normal_sf(x):
  """Upper tail 1 - Φ(x), computed without cancellation."""
  return special.ndtr(-np.asarray(x, dtype=float))


def std_normal_logcdf(x):
  return special.log_ndtr(x)


def std_normal_pdf(x):
  x = np.asarray(x, dtype=float)
  return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def std_normal_quantile(p):
  """Inverse of the standard normal CDF.

  Args:
    p: probability or array of probabilities in [0, 1].

  Returns:
    Φ⁻¹(p); 0 maps to -inf and 1 to +inf.

  Raises:
    ValueError: if any p lies outside [0, 1] or is NaN.
  """
  arr = np.asarray(p, dtype=float)
  if np.any(~((arr >= 0) & (arr <= 1))):
    raise ValueError('quantile argument must lie in [0, 1]')
  return special.ndtri(arr)


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
_GAUSS = np.zeros(15)
_GAUSS[1::2] = [_WG[0], _WG[1], _WG[2], _WG[3], _WG[2], _WG[1], _WG[0]]


def _gk15(fn, a: float, b: float) -> tuple[float, float]:
  half = 0.5 * (b - a)
  center = 0.5 * (a + b)
  values = np.asarray(fn(center + half * _NODES), dtype=float)
  kronrod = half * float(np.dot(_KRONROD, values))
  gauss = half * float(np.dot(_GAUSS, values))
  return kronrod, abs(kronrod - gauss)


def integrate(integrand: Callable, a: float, b: float,
              tol: Tolerance = DEFAULT_TOL) -> float:
  """Adaptive Gauss-Kronrod quadrature with interval bisection.

  The integrand is called with a numpy array of interior nodes and never at
  the endpoints, so integrable endpoint singularities are allowed. The panel
  with the largest error estimate is bisected until the summed error meets
  ``max(abs_tol, rel_tol * |estimate|)``.

  Raises:
    IntegrationError: if ``tol.max_iter`` subdivisions do not suffice; the
      exception carries the partial estimate.
  """
  if a == b:
    return 0.0
  if a > b:
    return -integrate(integrand, b, a, tol)
  value, err = _gk15(integrand, a, b)
  heap = [(-err, a, b, value)]
  total, total_err = value, err
  for _ in range(tol.max_iter):
    if total_err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
      return total
    neg_err, lo, hi, val = heapq.heappop(heap)
    mid = 0.5 * (lo + hi)
    left, left_err = _gk15(integrand, lo, mid)
    right, right_err = _gk15(integrand, mid, hi)
    total += left + right - val
    total_err += left_err + right_err + neg_err
    heapq.heappush(heap, (-left_err, lo, mid, left))
    heapq.heappush(heap, (-right_err, mid, hi, right))
  # Re-sum to shed accumulated rounding in the running totals.
  total = math.fsum(item[3] for item in heap)
  total_err = math.fsum(-item[0] for item in heap)
  if total_err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
    return total
  raise IntegrationError(
      f'quadrature did not converge in {tol.max_iter} subdivisions '
      f'(estimate {total!r}, error {total_err:.3g})', total, total_err)


def bisect_monotone(fn: Callable[[float], float], target: float, lo: float,
                    hi: float, tol: Tolerance = Tolerance(abs_tol=1e-12)
                    ) -> float:
  """Solves fn(x) = target for a monotone fn on [lo, hi] by bisection.

  Works for either direction of monotonicity. Iterates until the bracket is
  narrower than ``tol.abs_tol`` or ``tol.max_iter`` halvings were made.

  Raises:
    ValueError: if target is not between fn(lo) and fn(hi).
  """
  f_lo, f_hi = fn(lo), fn(hi)
  increasing = f_hi >= f_lo
  if not min(f_lo, f_hi) <= target <= max(f_lo, f_hi):
    raise ValueError(
        f'target {target} outside [{min(f_lo, f_hi)}, {max(f_lo, f_hi)}]')
  if f_lo == target:
    return lo
  if f_hi == target:
    return hi
  for _ in range(tol.max_iter):
    if hi - lo <= tol.abs_tol:
      break
    mid = 0.5 * (lo + hi)
    f_mid = fn(mid)
    if f_mid == target:
      return mid
    if (f_mid < target) == increasing:
      lo = mid
    else:
      hi = mid
  return 0.5 * (lo + hi)


def lower_convex_hull(points: Sequence[tuple[float, float]]
                      ) -> list[tuple[float, float]]:
  """Vertices of the lower convex envelope of points sorted by x.

  Collinear interior points are dropped, so consecutive output slopes are
  strictly increasing.

  Raises:
    ValueError: if x is not strictly increasing or fewer than 2 points.
  """
  pts = [(float(x), float(y)) for x, y in points]
  if len(pts) < 2:
    raise ValueError('need at least two points')
  for (x0, _), (x1, _) in zip(pts, pts[1:]):
    if not x1 > x0:
      raise ValueError('points must be sorted strictly increasing in x')
  hull: list[tuple[float, float]] = []
  for p in pts:
    while len(hull) >= 2:
      (ox, oy), (ax, ay) = hull[-2], hull[-1]
      cross = (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox)
      if cross <= 0:
        hull.pop()
      else:
        break
    hull.append(p)
  return hull


def lower_convex_hull_arrays(x: np.ndarray, y: np.ndarray
                             ) -> tuple[np.ndarray, np.ndarray]:
  """Array front end to :func:`lower_convex_hull`."""
  hull = lower_convex_hull(list(zip(x.tolist(), y.tolist())))
  hx, hy = zip(*hull)
  return np.array(hx), np.array(hy)


def bisect_vectorized(fn: Callable[[np.ndarray], np.ndarray],
                      targets: np.ndarray, lo, hi, iters: int = 64
                      ) -> np.ndarray:
  """Left-continuous inverse of a non-increasing fn, elementwise.

  Returns the smallest t in [lo, hi] with ``fn(t) <= target`` for every
  target, up to ``(hi - lo) / 2**iters``. ``fn(hi) <= target`` is assumed.
  """
  targets = np.asarray(targets, dtype=float)
  lo = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
  hi = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
  done = fn(lo) <= targets
  hi[done] = lo[done]
  for _ in range(iters):
    mid = 0.5 * (lo + hi)
    below = fn(mid) <= targets
    hi = np.where(below, mid, hi)
    lo = np.where(below, lo, mid)
  return hi
