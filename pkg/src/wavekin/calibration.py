"""Frozen calibration constants for envelope and bound checks.

Several decay estimates in this package carry unspecified constants of the
form "there exists C such that ...".  Each such constant is measured once
by ``scripts/calibrate.py``, rounded up to four significant digits, and
recorded in ``data/calibration.json`` together with where and how it was
measured.  Tests then assert the inequalities with the frozen values, so a
regression that weakens a decay rate fails loudly instead of being papered
over by silent recalibration.
"""

import json
from functools import lru_cache
from importlib import resources

__all__ = ["load_calibration", "constant"]


@lru_cache(maxsize=1)
def load_calibration():
    """The full calibration record as a dict (cached)."""
    path = resources.files("wavekin").joinpath("data/calibration.json")
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def constant(name):
    """The frozen value of one calibrated constant, by key."""
    return float(load_calibration()[name]["value"])
