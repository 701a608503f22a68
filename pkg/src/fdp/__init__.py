"""Numerical accounting in the f-differential-privacy framework."""

from fdp.accountant import SgdConfig
from fdp.catalog import DiscretePair
from fdp.compose import CltEstimate
from fdp.curves import Grid
from fdp.curves import TradeoffCurve
from fdp.curves import ValidationReport
from fdp.duality import PrivacyProfile
from fdp.functionals import MomentStats

__all__ = [
    'CltEstimate',
    'DiscretePair',
    'Grid',
    'MomentStats',
    'PrivacyProfile',
    'SgdConfig',
    'TradeoffCurve',
    'ValidationReport',
]
