"""Effective channels, MRT precoding, coupling coefficients and rates.

Phase convention: the RIS applies ``diag(conj(theta))``, so that the
received own-signal amplitude of user k is ``d[k, k] + theta^H r[k, k]``.
Both conventions share the unit-modulus set; this one keeps every
expression in the solvers in ``theta^H r`` form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fbl
from .channel import ChannelSet
from .config import SystemConfig


class DegenerateChannelError(ValueError):
    pass


@dataclass(frozen=True)
class Allocation:
    power: np.ndarray
    blocklength: np.ndarray
    phase: np.ndarray

    def check(self, config: SystemConfig, unit_modulus: bool = True, tol: float = 1e-9):
        """Raise ``ValueError`` if any of the budget/box/phase constraints fail."""
        p, m, th = self.power, self.blocklength, self.phase
        if np.any(p < -tol) or p.sum() > config.p_total * (1 + tol) + tol:
            raise ValueError(f"power infeasible: sum {p.sum():.6g} > {config.p_total:.6g}")
        if m.sum() > config.max_cbl + 1e-6 or np.any(m < np.asarray(config.min_cbl) - 1e-6):
            raise ValueError(f"blocklength infeasible: {m}")
        mod = np.abs(th)
        if unit_modulus and np.any(np.abs(mod - 1) > tol):
            raise ValueError("phase not unit modulus")
        if np.any(mod > 1 + tol):
            raise ValueError("phase outside unit disc")


@dataclass(frozen=True)
class CouplingSet:
    """``d[j, k] = h_dir_k^H w_j`` and ``r[j, k] = diag(h_ris_k^H) H w_j``.

    The first index is the transmitting precoder (interferer when j != k),
    the second the receiving user.
    """

    d: np.ndarray  # (K, K)
    r: np.ndarray  # (K, K, N)

    @property
    def users(self) -> int:
        return self.d.shape[0]

    def amplitudes(self, phase: np.ndarray) -> np.ndarray:
        """Complex ``d[j, k] + theta^H r[j, k]`` for all pairs."""
        return self.d + self.r @ np.conj(phase)

    def gains(self, phase: np.ndarray) -> np.ndarray:
        return np.abs(self.amplitudes(phase)) ** 2


def effective_channel(channels: ChannelSet, phase: np.ndarray, user: int) -> np.ndarray:
    """Row vector ``h_dir^H + h_ris^H diag(conj(theta)) H`` of length B."""
    phase = np.asarray(phase)
    if phase.shape != (channels.ris_elements,):
        raise ValueError(f"phase has shape {phase.shape}, expected ({channels.ris_elements},)")
    return np.conj(channels.direct[user]) + (np.conj(channels.ris_user[user]) * np.conj(phase)) @ channels.bs_ris


def effective_channels(channels: ChannelSet, phase: np.ndarray) -> np.ndarray:
    """All users' effective channels stacked as a (K, B) array."""
    phase = np.asarray(phase)
    if phase.shape != (channels.ris_elements,):
        raise ValueError(f"phase has shape {phase.shape}, expected ({channels.ris_elements},)")
    return np.conj(channels.direct) + (np.conj(channels.ris_user) * np.conj(phase)) @ channels.bs_ris


def mrt_precoders(channels: ChannelSet, phase: np.ndarray) -> np.ndarray:
    """Unit-norm matched filters ``w_k = h_k^H / ||h_k||`` as rows of a (K, B) array."""
    h = effective_channels(channels, phase)
    norms = np.linalg.norm(h, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise DegenerateChannelError("effective channel is zero; MRT undefined")
    return np.conj(h) / norms[:, None]


def coupling_set(channels: ChannelSet, precoders: np.ndarray) -> CouplingSet:
    w = np.asarray(precoders)
    if w.shape != (channels.users, channels.bs_antennas):
        raise ValueError(f"precoders have shape {w.shape}, expected {(channels.users, channels.bs_antennas)}")
    d = w @ np.conj(channels.direct).T  # d[j, k] = sum_b conj(hdir[k, b]) w[j, b]
    hw = w @ channels.bs_ris.T  # (K, N): H w_j
    r = hw[:, None, :] * np.conj(channels.ris_user)[None, :, :]
    return CouplingSet(d, r)


def interference(gains: np.ndarray, power: np.ndarray, noise_power: float) -> np.ndarray:
    """Interference-plus-noise I_k for every user from a gain matrix."""
    k = gains.shape[0]
    off = gains * (1.0 - np.eye(k))
    return power @ off + noise_power  # sum_{j != k} p_j g[j, k]


def sinr_from_gains(gains: np.ndarray, power: np.ndarray, noise_power: float) -> np.ndarray:
    return power * np.diag(gains) / interference(gains, power, noise_power)


def sinr_all(couplings: CouplingSet, power, phase, noise_power: float) -> np.ndarray:
    """SINR of each user under the precoders baked into ``couplings``."""
    power = np.asarray(power, dtype=float)
    return sinr_from_gains(couplings.gains(phase), power, noise_power)


def user_bits(sinr, blocklength, config: SystemConfig, mode: str = "exact") -> np.ndarray:
    """Raw (unclamped) per-user FBL bits."""
    return fbl.fbl_bits(sinr, blocklength, np.asarray(config.target_errors), mode)


def total_fbl_rate(allocation: Allocation, couplings: CouplingSet, config: SystemConfig,
                   mode: str = "exact", clamp: bool = True):
    """Sum of per-user FBL bits.

    Returns ``(L_total, per_user)``. With ``clamp`` a negative per-user value,
    meaning that (sinr, m, eps) cannot be met, is reported as 0.
    """
    sinr = sinr_all(couplings, allocation.power, allocation.phase, config.noise_power)
    bits = user_bits(sinr, allocation.blocklength, config, mode)
    if clamp:
        bits = np.maximum(bits, 0.0)
    return float(bits.sum()), bits
