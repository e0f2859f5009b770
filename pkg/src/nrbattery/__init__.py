# -*- coding: utf-8 -*-
"""
Nonreciprocal Battery
"""

__version__ = "0.1.0"

from nrbattery.sysparams import SystemParams, EffectiveParams, get_preset
from nrbattery.model import reduce_to_effective, solve_nonreciprocal
from nrbattery.momentmodel import EffectiveModel, FullModel, build_model
from nrbattery.integrator import integrate, IntegratorConfig
from nrbattery.analytic import closed_form_moments, steady_energies
from nrbattery.spectrum import solve_ep, spectral, drift_matrix
from nrbattery.sweepspec import SweepSpec, Axis
from nrbattery.sweepherd import SweepHerd, run_sweep
