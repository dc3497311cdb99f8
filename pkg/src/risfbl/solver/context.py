from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..beamform import CouplingSet, sinr_from_gains, user_bits
from ..config import SystemConfig


@dataclass(frozen=True)
class SubproblemContext:
    """What every sub-solver sees during one outer iteration.

    ``utopia_L=None`` switches the scalarized objective to rate-only, which
    is how the utopia rate itself is computed.
    """

    couplings: CouplingSet
    config: SystemConfig
    utopia_L: float | None
    utopia_m: float
    alpha: float

    def __post_init__(self):
        if self.utopia_L is not None and not self.utopia_L > 0:
            raise ValueError(f"utopia_L must be positive, got {self.utopia_L}")
        if self.utopia_m != self.config.min_cbl_total:
            raise ValueError("utopia_m must equal the sum of min_cbl")

    @property
    def rate_only(self) -> bool:
        return self.utopia_L is None

    def bits(self, power, blocklength, phase) -> float:
        """Raw total FBL bits in the solver's dispersion mode."""
        gains = self.couplings.gains(phase)
        sinr = sinr_from_gains(gains, np.asarray(power, dtype=float), self.config.noise_power)
        return float(user_bits(sinr, blocklength, self.config, self.config.solver_dispersion).sum())

    def mu(self, l_total: float, m_total: float) -> float:
        if self.rate_only:
            return -l_total
        return tchebyshev_mu(l_total, m_total, self.utopia_L, self.utopia_m, self.alpha)


def tchebyshev_mu(l_total: float, m_total: float, utopia_L: float, utopia_m: float, alpha: float) -> float:
    """Largest weighted normalized regret against the utopia point."""
    if not (utopia_L > 0 and utopia_m > 0):
        raise ValueError("utopia values must be positive")
    return max(alpha * (utopia_L - l_total) / utopia_L,
               (1.0 - alpha) * (m_total - utopia_m) / utopia_m)
