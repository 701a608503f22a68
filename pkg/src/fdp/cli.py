"""Command-line front end.

Examples::

  fdp curve --family gdp --mu 1 --grid 5 --format csv
  fdp compose --pure-eps 0.316227766 --n 10 --tightest-delta 0.001
  fdp convert --gdp-to-dp --mu 1 --eps 0
  fdp sgd --config run.json --deltas 1e-5,1e-6

Environment variables ``FDP_GRID`` and ``FDP_EPS_TOL`` override the default
grid size and the ε bisection tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from fdp import accountant
from fdp import catalog
from fdp import compose
from fdp import curves
from fdp import duality
from fdp import functionals
from fdp import subsample
from fdp.curves import TradeoffCurve

FAMILIES = ('gdp', 'eps_delta', 'laplace', 'identity', 'point_mass_delta')


class UsageError(Exception):
  """A flag combination argparse cannot check on its own (exit code 2)."""


def _env_int(name: str, default: int) -> int:
  raw = os.environ.get(name)
  return int(raw) if raw else default


def _env_float(name: str, default: float) -> float:
  raw = os.environ.get(name)
  return float(raw) if raw else default


def _float_list(text: str) -> list[float]:
  try:
    return [float(t) for t in text.split(',') if t.strip()]
  except ValueError as e:
    raise argparse.ArgumentTypeError(f'not a comma-separated list: {text!r}'
                                     ) from e


def _grid_size(text: str) -> int:
  n = int(text)
  if n < 2:
    raise argparse.ArgumentTypeError('--grid must be at least 2')
  return n


def _add_family_args(parser: argparse.ArgumentParser):
  parser.add_argument('--family', choices=FAMILIES, required=True)
  parser.add_argument('--mu', type=float, default=None)
  parser.add_argument('--eps', type=float, default=None)
  parser.add_argument('--delta', type=float, default=None)


def _family_curve(args) -> TradeoffCurve:
  def need(name):
    value = getattr(args, name)
    if value is None:
      raise UsageError(f'--family {args.family} needs --{name}')
    return value

  if args.family == 'gdp':
    return catalog.gdp(need('mu'))
  if args.family == 'laplace':
    return catalog.laplace(need('mu'))
  if args.family == 'eps_delta':
    return catalog.eps_delta(need('eps'), args.delta or 0.0)
  if args.family == 'point_mass_delta':
    return catalog.point_mass_delta(need('delta'))
  return catalog.identity()


def build_parser() -> argparse.ArgumentParser:
  common = argparse.ArgumentParser(add_help=False)
  common.add_argument('--grid', type=_grid_size,
                      default=_env_int('FDP_GRID', curves.DEFAULT_GRID_SIZE),
                      help='number of sampled alpha (or epsilon) values')
  common.add_argument('--format', choices=('json', 'csv'), default='json')
  common.add_argument('--out', default=None,
                      help='write to this path instead of standard output')

  parser = argparse.ArgumentParser(prog='fdp', description=__doc__.split(
      '\n')[0])
  sub = parser.add_subparsers(dest='command', required=True)

  p = sub.add_parser('curve', parents=[common],
                     help='sample a named trade-off curve')
  _add_family_args(p)
  p.add_argument('--inverse', action='store_true')

  p = sub.add_parser('compose', parents=[common], help='compose guarantees')
  mode = p.add_mutually_exclusive_group(required=True)
  mode.add_argument('--pure-eps', type=float,
                    help='exact n-fold composition of eps-DP')
  mode.add_argument('--gdp-mus', type=_float_list,
                    help='comma-separated GDP parameters')
  mode.add_argument('--clt-eps', type=_float_list,
                    help='comma-separated eps_i for the CLT array')
  p.add_argument('--n', type=int, default=None)
  p.add_argument('--clt-deltas', type=_float_list, default=None)
  p.add_argument('--tightest-delta', type=float, default=None)

  p = sub.add_parser('subsample', parents=[common],
                     help='amplify a curve by subsampling')
  _add_family_args(p)
  p.add_argument('--p', type=float, required=True)

  p = sub.add_parser('convert', parents=[common],
                     help='primal/dual and divergence conversions')
  mode = p.add_mutually_exclusive_group(required=True)
  mode.add_argument('--gdp-to-dp', action='store_true')
  mode.add_argument('--gdp-to-rdp', action='store_true')
  mode.add_argument('--profile', action='store_true',
                    help='delta(eps) table of a family on [0, --eps-max]')
  mode.add_argument('--tightest', action='store_true',
                    help='smallest eps for --target-delta')
  mode.add_argument('--dual-to-primal', metavar='CSV',
                    help='file of epsilon,delta rows')
  p.add_argument('--family', choices=FAMILIES, default=None)
  p.add_argument('--mu', type=float, default=None)
  p.add_argument('--eps', type=float, default=None)
  p.add_argument('--delta', type=float, default=None)
  p.add_argument('--order', type=float, default=None)
  p.add_argument('--eps-max', type=float, default=10.0)
  p.add_argument('--target-delta', type=float, default=None)

  p = sub.add_parser('sgd', parents=[common], help='noisy SGD report')
  p.add_argument('--config', required=True, help='SgdConfig JSON file')
  p.add_argument('--deltas', type=_float_list, default=[1e-5])
  return parser


# Output helpers --------------------------------------------------------------


def _sampled(curve: TradeoffCurve, n: int) -> curves.Grid:
  alpha = np.linspace(0.0, 1.0, n)
  return curves.Grid(alpha, curve(alpha))


def _curve_output(curve: TradeoffCurve, args) -> str:
  grid = _sampled(curve, args.grid)
  if args.format == 'csv':
    return curves.to_csv(grid)
  return curves.to_json(grid) + '\n'


def _table_output(header: Sequence[str], rows: Sequence[Sequence[float]],
                  fmt: str) -> str:
  if fmt == 'csv':
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
      writer.writerow([curves.format_float(v) for v in row])
    return buf.getvalue()
  records = [{h: (None if math.isinf(v) else v) for h, v in zip(header, row)}
             for row in rows]
  return json.dumps(records[0] if len(records) == 1 else records) + '\n'


# Subcommands -----------------------------------------------------------------


def _cmd_curve(args) -> str:
  curve = _family_curve(args)
  if args.inverse:
    curve = curve.inverse()
  return _curve_output(curve, args)


def _eps_tol() -> float:
  return _env_float('FDP_EPS_TOL', duality.EPS_TOL)


def _cmd_compose(args) -> str:
  if args.gdp_mus is not None:
    mu = compose.tensor_gdp(args.gdp_mus)
    curve: TradeoffCurve = curves.Gdp(mu)
  elif args.pure_eps is not None:
    if args.n is None:
      raise UsageError('--pure-eps needs --n')
    curve = compose.compose_homogeneous_pure(args.pure_eps, args.n)
  else:
    deltas = args.clt_deltas or [0.0] * len(args.clt_eps)
    if len(deltas) != len(args.clt_eps):
      raise UsageError('--clt-deltas must match --clt-eps in length')
    curve, _ = compose.clt_dp_array(list(zip(args.clt_eps, deltas)))
  if args.tightest_delta is not None:
    eps = duality.tightest_epsilon(curve, args.tightest_delta,
                                   abs_tol=_eps_tol())
    return _table_output(('epsilon', 'delta'), [(eps, args.tightest_delta)],
                         args.format)
  return _curve_output(curve, args)


def _cmd_subsample(args) -> str:
  curve = _family_curve(args)
  return _curve_output(subsample.subsample_curve(curve, args.p), args)


def _read_pairs(path: str) -> list[tuple[float, float]]:
  with open(path, newline='') as fh:
    rows = [r for r in csv.reader(fh) if r]
  if rows and rows[0][0].strip().lower().startswith('eps'):
    rows = rows[1:]
  return [(float(r[0]), float(r[1])) for r in rows]


def _cmd_convert(args) -> str:
  if args.gdp_to_dp:
    if args.mu is None or args.eps is None:
      raise UsageError('--gdp-to-dp needs --mu and --eps')
    delta = duality.gdp_to_dp(args.mu, args.eps)
    return _table_output(('epsilon', 'delta'), [(args.eps, delta)],
                         args.format)
  if args.gdp_to_rdp:
    if args.mu is None or args.order is None:
      raise UsageError('--gdp-to-rdp needs --mu and --order')
    value = functionals.gdp_to_rdp(args.mu, args.order)
    return _table_output(('order', 'renyi'), [(args.order, value)],
                         args.format)
  if args.dual_to_primal:
    return _curve_output(duality.dual_to_primal(_read_pairs(
        args.dual_to_primal)), args)
  if args.family is None:
    raise UsageError('this conversion needs --family')
  curve = _family_curve(args)
  if args.profile:
    profile = duality.primal_to_dual(curve)
    eps = np.linspace(0.0, args.eps_max, args.grid)
    return _table_output(('epsilon', 'delta'), profile.table(eps),
                         args.format)
  if args.target_delta is None:
    raise UsageError('--tightest needs --target-delta')
  eps = duality.tightest_epsilon(curve, args.target_delta, abs_tol=_eps_tol())
  return _table_output(('epsilon', 'delta'), [(eps, args.target_delta)],
                       args.format)


def _cmd_sgd(args) -> str:
  with open(args.config) as fh:
    config = accountant.SgdConfig.from_json(fh.read())
  rows = accountant.sgd_report(config, args.deltas)
  if args.format == 'csv':
    return accountant.report_to_csv(rows)
  return accountant.report_to_json(rows) + '\n'


_COMMANDS = {
    'curve': _cmd_curve,
    'compose': _cmd_compose,
    'subsample': _cmd_subsample,
    'convert': _cmd_convert,
    'sgd': _cmd_sgd,
}


def run(argv: Sequence[str] | None = None) -> int:
  """Runs one command; returns 0, 1 (domain error) or 2 (usage error)."""
  parser = build_parser()
  try:
    args = parser.parse_args(argv)
  except SystemExit as e:
    return int(e.code or 0)
  try:
    text = _COMMANDS[args.command](args)
  except UsageError as e:
    parser.print_usage(sys.stderr)
    print(f'fdp: error: {e}', file=sys.stderr)
    return 2
  except (ValueError, OSError) as e:
    print(f'fdp: error: {e}', file=sys.stderr)
    return 1
  if args.out:
    with open(args.out, 'w') as fh:
      fh.write(text)
  else:
    sys.stdout.write(text)
  return 0


def main():
  sys.exit(run())
