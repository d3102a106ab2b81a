"""PSF restoration filtering and filter-derived coherence weighting for
aberrated ultrasound baseband images.

Arrays are indexed [z, x]. Config arguments accept a dict, a JSON string or a
path to a JSON file.
"""

import json
import os

from . import _core
from ._core import (
    ConfigError,
    IoError,
    NumericalError,
    aberration_profile,
    apply_filter,
    apply_weighting,
    center_psf,
    coherence_map,
    design_filter,
    envelope,
    log_compress,
    metrics,
    read_psfk,
    restoration_residual,
    selfcheck,
    synth_speckle,
    write_psfk,
)

__all__ = [
    "ConfigError",
    "IoError",
    "NumericalError",
    "aberration_profile",
    "apply_filter",
    "apply_weighting",
    "center_psf",
    "coherence_map",
    "design_filter",
    "envelope",
    "log_compress",
    "make_phantom",
    "metrics",
    "parse_config",
    "read_psfk",
    "restoration_residual",
    "run_pipeline",
    "selfcheck",
    "simulate_psf",
    "synth_speckle",
    "write_psfk",
]


def _config_text(config):
    if config is None:
        return "{}"
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, os.PathLike) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        with open(config, encoding="utf-8") as fh:
            return fh.read()
    return config


def parse_config(config=None):
    """Resolved config with every default filled in."""
    return _core.parse_config(_config_text(config))


def simulate_psf(config=None, ideal=False):
    """(patch, raw_peak) for the aberrator described by config."""
    return _core.simulate_psf(_config_text(config), ideal)


def make_phantom(config=None):
    """(scatterers, cyst_mask, background_mask) on the config's image grid."""
    return _core.make_phantom(_config_text(config))


def run_pipeline(config=None, out_dir=None):
    """Run the full experiment; returns metrics and the intermediate arrays."""
    return _core.run_pipeline(_config_text(config), "" if out_dir is None else os.fspath(out_dir))
