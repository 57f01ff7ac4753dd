"""History-state builders shared by the constraint and acceptance tests.

The periodic ("revival") histories put every mode energy on a multiple of
``2 pi hbar / T`` with ``T`` the slice-axis length, so spectral slice-axis
derivatives are exact up to rounding.
"""

import math

from stsqm.constraint import build_history_space, build_history_time, revival_period_time
from stsqm.qm import TCMomentumAmplitude
from stsqm.spectral import GaussianPacketSpec, comb_axis, make_grid
from stsqm.sts import SCMomentumAmplitude

DELTA = 0.5
LENGTH = 2 * math.pi / DELTA
PERIOD = revival_period_time(DELTA)


def revival_time_history(nt=1024):
    xg = make_grid(32, 0.0, LENGTH)
    amp = TCMomentumAmplitude.gaussian(GaussianPacketSpec((2.0,), (0.5,), (LENGTH / 2,)), xg)
    return build_history_time(amp, make_grid(nt, 0.0, PERIOD), xg)


def revival_space_history(nx=32, nt=512):
    yg = make_grid(16, -LENGTH / 2, LENGTH / 2)
    spec = GaussianPacketSpec((3.5, 0.0), (0.5, 0.5))
    amp = SCMomentumAmplitude.gaussian(spec, (yg.conjugate(),), px_axis=comb_axis(DELTA, 13))
    return build_history_space(amp, make_grid(nx, 0.0, LENGTH), make_grid(nt, 0.0, PERIOD), (yg,))


def gaussian_time_history(steps):
    xg = make_grid(256, -40.0, 40.0)
    amp = TCMomentumAmplitude.gaussian(GaussianPacketSpec((2.0,), (0.5,)), xg)
    return build_history_time(amp, make_grid(steps + 1, 0.0, 1.0 + 1.0 / steps), xg)


def gaussian_space_history(steps, lo=5.0, span=0.1):
    yg = make_grid(64, -20.0, 20.0)
    amp = SCMomentumAmplitude.gaussian(GaussianPacketSpec((10.0, 0.0), (0.5, 0.5)), (yg.conjugate(),))
    h = span / steps
    return build_history_space(amp, make_grid(steps + 1, lo, lo + span + h), make_grid(512, -1.5, 3.0), (yg,))
