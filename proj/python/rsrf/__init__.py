"""Rolling-shutter radiance fields with continuous-time camera trajectories."""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    DimensionMismatch,
    Error,
    IndexOutOfRange,
    IoError,
    NonFiniteLoss,
    RotationNearPi,
    ShapeMismatch,
    TimeOutOfRange,
    TooFewSamples,
    Trajectory,
    ate,
    cumulative_basis,
    exp_se3,
    log_se3,
    psnr,
    read_image,
    read_tum,
    rpe_rot,
    ssim,
)
from . import _core


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def default_config():
    """The default run configuration as a dict."""
    return _json.loads(_core.default_config())


def synth(config):
    """Render the synthetic dataset described by `config` (dict or JSON text)."""
    return _core.synth(_text(config))


def train(config):
    return _core.train(_text(config))


def render(config):
    return _core.render(_text(config))


def evaluate(config):
    """Compare config["eval"]["estimate"] against config["eval"]["reference"]; returns the report dict."""
    return _json.loads(_core.evaluate(_text(config)))
