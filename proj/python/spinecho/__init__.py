"""Python front end for the spinecho C++ core.

Configuration objects are plain dicts with the same keys as the JSON run
configs written by the CLI (see ``configs/``).
"""

import json
from pathlib import Path

import numpy as np

from . import _core
from ._core import (
    ConfigError,
    Error,
    NumericalError,
    ResourceError,
    cli_main,
    couplings_infinite_d,
    density_from_t2,
    infinite_d_hahn,
    lambda_integral,
    lambda_quadrature,
    reduced_hahn_product,
    sphere_factor,
    t2_from_density,
)

__all__ = [
    "ConfigError", "Error", "NumericalError", "ResourceError",
    "calibrate", "cli_main", "couplings_infinite_d", "cpmg", "density_from_t2",
    "floquet_spectrum", "hahn", "infinite_d_hahn", "lambda_integral",
    "lambda_quadrature", "load_series", "longitudinal", "realization",
    "reduced_hahn_product", "run", "sphere_factor", "t2_from_density",
]


def _dump(obj):
    return json.dumps(obj or {})


def _series(raw):
    raw = dict(raw)
    for key in ("times", "mean", "std_error"):
        raw[key] = np.asarray(raw[key], dtype=float)
    raw["echo_index"] = np.asarray(raw["echo_index"], dtype=int)
    raw["metadata"] = json.loads(raw["metadata"])
    return raw


def realization(ensemble, index=0):
    """Positions, coupling matrix and fields of one disorder realization."""
    return _core._realization(_dump(ensemble), int(index))


def calibrate(ensemble, options=None):
    """Density whose simulated reduced Hahn echo crosses 1/e at t = target_t2."""
    return _core._calibrate(_dump(ensemble), _dump(options))


def hahn(config, times):
    """Ensemble Hahn echo M_x(t) for each total time in ``times``."""
    return _series(_core._hahn(_dump(config), [float(t) for t in times]))


def cpmg(config, sequence, channels=("x",)):
    """CPMG/APCP train; one series per observed channel."""
    return [_series(s) for s in _core._cpmg(_dump(config), _dump(sequence), list(channels))]


def longitudinal(config, sequence):
    """Pulse train observed in M_z starting from a z-polarized state."""
    return _series(_core._longitudinal(_dump(config), _dump(sequence)))


def floquet_spectrum(ensemble, tau, model="full", pulse=None, plan=None, index=0):
    """Quasienergies of U(tau) R U(tau) for one realization."""
    return _core._floquet(_dump(ensemble), model, _dump(pulse), _dump(plan), float(tau), int(index))


def run(config):
    """Run a full experiment and write its artifacts; returns the record."""
    rec = dict(_core._run(_dump(config)))
    rec["metadata"] = json.loads(rec["metadata"])
    rec["directory"] = Path(rec["directory"])
    return rec


def load_series(path):
    """Read a response CSV written by the CLI into column arrays."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: data[name] for name in data.dtype.names}
