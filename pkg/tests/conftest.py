import numpy as np
import pytest

from risfbl.beamform import coupling_set, mrt_precoders
from risfbl.channel import ChannelSet
from risfbl.config import SystemConfig
from risfbl.solver import SubproblemContext


def cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def synthetic_channels(rng, users, bs, ris, cascade_scale, direct_scale):
    """Unstructured Rayleigh links; ``ris`` need not be a perfect square here."""
    return ChannelSet(cn(rng, (ris, bs)) * cascade_scale, cn(rng, (users, ris)),
                      cn(rng, (users, bs)) * direct_scale)


def context_for(config, channels, phase, utopia_L=None, alpha=None):
    w = mrt_precoders(channels, phase)
    cpl = coupling_set(channels, w)
    alpha = config.alpha if alpha is None else alpha
    return SubproblemContext(cpl, config, utopia_L, float(config.min_cbl_total), alpha)


def moderate_instance(seed, users=2, ris=4, bs=4, snr_db=10.0):
    """Config plus channels with per-link SNR around ``snr_db`` at full power."""
    rng = np.random.default_rng(seed)
    # sub-solvers only read per-user fields, noise and tolerances from the config
    cfg = SystemConfig().replace(users=users)
    scale = np.sqrt(cfg.noise_power / cfg.p_total * 10 ** (snr_db / 10) / (ris * bs))
    ch = synthetic_channels(rng, users, bs, ris, scale, scale * np.sqrt(ris) * rng.uniform(0.2, 1.0))
    return cfg, ch, rng


@pytest.fixture
def default_config():
    return SystemConfig()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
