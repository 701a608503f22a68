"""Privacy accounting for noisy SGD with Poisson-free uniform subsampling.

Each step of noisy SGD releases a gradient with Gaussian noise on a batch of
m out of n records, so it is C_{m/n}(G_{1/σ})-DP; T steps compose. The
composition is approximated through the Berry-Esseen CLT and reported as
(ε, δ) pairs.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Any, Sequence

from fdp import compose
from fdp import curves
from fdp import duality
from fdp import functionals
from fdp import subsample
from fdp.curves import TradeoffCurve

REPORT_COLUMNS = ('delta', 'epsilon', 'mu_tilde', 'gamma', 'mu_asymptotic',
                  'epsilon_clt', 'epsilon_asymptotic')


@dataclasses.dataclass(frozen=True)
class SgdConfig:
  """Run parameters of noisy SGD.

  Attributes:
    n: dataset size.
    m: batch size, 1 <= m <= n.
    T: number of iterations.
    sigma: noise multiplier; each step is (1/σ)-GDP before subsampling.
    clip: gradient norm bound. It cancels out of the privacy analysis and is
      kept only so configs round-trip.
  """

  n: int
  m: int
  T: int
  sigma: float
  clip: float = 1.0

  def __post_init__(self):
    if not 1 <= self.m <= self.n:
      raise ValueError(f'need 1 <= m <= n, got m={self.m}, n={self.n}')
    if self.T < 1:
      raise ValueError(f'T must be at least 1, got {self.T}')
    if not self.sigma > 0:
      raise ValueError(f'sigma must be positive, got {self.sigma}')
    if not self.clip > 0:
      raise ValueError(f'clip must be positive, got {self.clip}')

  @property
  def p(self) -> float:
    return self.m / self.n

  @property
  def epochs(self) -> float:
    return self.T * self.m / self.n

  @classmethod
  def from_epochs(cls, n: int, m: int, epochs: float, sigma: float,
                  clip: float = 1.0) -> SgdConfig:
    """T = E·n/m iterations, rounded to the nearest integer."""
    return cls(n, m, max(1, round(epochs * n / m)), sigma, clip)

  @classmethod
  def from_dict(cls, data: dict[str, Any]) -> SgdConfig:
    data = dict(data)
    clip = float(data.pop('clip', 1.0))
    if 'epochs' in data:
      if 'T' in data:
        raise ValueError('give either T or epochs, not both')
      return cls.from_epochs(int(data['n']), int(data['m']),
                             float(data['epochs']), float(data['sigma']), clip)
    return cls(int(data['n']), int(data['m']), int(data['T']),
               float(data['sigma']), clip)

  @classmethod
  def from_json(cls, text: str) -> SgdConfig:
    return cls.from_dict(json.loads(text))

  def to_json(self) -> str:
    return json.dumps(dataclasses.asdict(self))


def step_curve(config: SgdConfig) -> TradeoffCurve:
  """Per-iteration guarantee C_{m/n}(G_{1/σ})."""
  return subsample.subsample_curve(curves.Gdp(1.0 / config.sigma), config.p)


def sgd_asymptotic_mu(config: SgdConfig) -> float:
  """√2·c·√(e^{σ⁻²}Φ(1.5/σ) + 3Φ(-0.5/σ) - 2) with c = m√T/n."""
  c = config.m * math.sqrt(config.T) / config.n
  chi2 = functionals.chi2_plus_gdp(1.0 / config.sigma)
  return math.sqrt(2.0) * c * math.sqrt(max(chi2, 0.0))


def sgd_clt_estimate(config: SgdConfig) -> compose.CltEstimate:
  """(μ̃, γ) for T-fold composition of the per-step curve."""
  stats = functionals.moments_subsampled_gdp(config.p, 1.0 / config.sigma)
  var = stats.kappa2 - stats.kl**2
  if not var > 0:
    return compose.CltEstimate(0.0, 0.0, 0.0, 0.0)
  root_t = math.sqrt(config.T)
  return compose.CltEstimate(
      mu=2 * root_t * stats.kl / math.sqrt(var),
      gamma=compose.BERRY_ESSEEN_CONSTANT / root_t * stats.kappa3_bar /
      var**1.5,
      kl_total=config.T * stats.kl,
      scale=math.sqrt(config.T * var))


def sgd_clt_curve(config: SgdConfig) -> tuple[TradeoffCurve, float]:
  """The guaranteed curve max{G_μ̃(α + γ) - γ, 0} and its γ.

  Raises:
    ValueError: if γ >= 1/2, where the bracket carries no information.
  """
  est = sgd_clt_estimate(config)
  if est.gamma >= 0.5:
    raise ValueError(f'CLT not applicable at this T (gamma={est.gamma:.3g})')
  if est.mu == 0 and est.gamma == 0:
    return curves.Identity(), 0.0
  return curves.ShiftedGdp(est.mu, est.gamma), est.gamma


def upper_bracket(config: SgdConfig, alpha):
  """Diagnostic upper bracket G_μ̃(α - γ) + γ."""
  return compose.clt_bracket(sgd_clt_estimate(config), alpha)[1]


def _epsilon_or_inf(curve: TradeoffCurve, delta: float) -> float:
  try:
    return duality.tightest_epsilon(curve, delta)
  except ValueError:
    return math.inf


def sgd_report(config: SgdConfig, deltas: Sequence[float]
               ) -> list[dict[str, float]]:
  """One row per δ with the certified ε and the CLT diagnostics.

  ``epsilon`` is certified by the bracketed curve and is +inf when δ lies
  below that curve's atom 1 - f(0). ``epsilon_clt`` reads ε off G_μ̃
  without the γ correction and ``epsilon_asymptotic`` off the limit μ.
  """
  for d in deltas:
    if not 0 < d < 1:
      raise ValueError(f'delta must lie in (0, 1), got {d}')
  curve, gamma = sgd_clt_curve(config)
  est = sgd_clt_estimate(config)
  mu_asym = sgd_asymptotic_mu(config)
  rows = []
  for d in deltas:
    rows.append({
        'delta': float(d),
        'epsilon': _epsilon_or_inf(curve, d),
        'mu_tilde': est.mu,
        'gamma': gamma,
        'mu_asymptotic': mu_asym,
        'epsilon_clt': _epsilon_or_inf(curves.Gdp(est.mu), d),
        'epsilon_asymptotic': _epsilon_or_inf(curves.Gdp(mu_asym), d),
    })
  return rows


def report_to_csv(rows: Sequence[dict[str, float]]) -> str:
  buf = io.StringIO()
  writer = csv.writer(buf, lineterminator='\n')
  writer.writerow(REPORT_COLUMNS)
  for row in rows:
    writer.writerow([curves.format_float(row[k]) for k in REPORT_COLUMNS])
  return buf.getvalue()


def report_to_json(rows: Sequence[dict[str, float]]) -> str:
  # Infinity is not valid JSON; encode it as null.
  clean = [{k: (None if math.isinf(v) else v) for k, v in row.items()}
           for row in rows]
  return json.dumps(clean)
