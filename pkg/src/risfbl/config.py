"""Scenario configuration: defaults, validation and JSON round-trip."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """Raised when a configuration is malformed; the message names the field."""


@dataclass(frozen=True)
class SystemConfig:
    """All scenario constants for one downlink RIS/URLLC simulation.

    Defaults reproduce the reference simulation table (4 users, 4 BS
    antennas, 25 RIS elements, 10 mW, epsilon = 1e-6, alpha = 0.8, M = 200,
    m_min = 10, unit Rician factors, 2 MHz, 20 m BS-RIS distance).
    Powers are in watts; ``p_total`` defaults to 10 mW.
    """

    users: int = 4
    bs_antennas: int = 4
    ris_elements: int = 25
    noise_density_dbm_hz: float = -174.0
    bandwidth_hz: float = 2e6
    p_total: float = 10e-3
    target_errors: tuple[float, ...] = (1e-6,) * 4
    alpha: float = 0.8
    max_cbl: int = 200
    min_cbl: tuple[int, ...] = (10,) * 4
    rician_bs: float = 1.0
    rician_ris: float = 1.0
    rician_dir: float = 1.0
    bs_ris_distance: float = 20.0
    ris_position: tuple[float, float] = (200.0, 0.0)
    user_radius: float = 10.0
    elevation_range: tuple[float, float] = (math.pi / 6, math.pi / 2)
    spacing_over_wavelength: float = 0.5
    csi_rho: float = 0.0
    # with imperfect CSI, precode on the estimate (True) or on the true channel
    precode_on_estimate: bool = True
    # "approximate" uses V = 1/ln^2 2 inside the solvers; "exact" uses V(gamma)
    solver_dispersion: str = "approximate"
    random_phase_init: bool = False
    ao_tol: float = 1e-6
    ao_max_iter: int = 30
    sca_tol: float = 1e-6
    sca_max_iter: int = 50
    phase_tol: float = 1e-10
    phase_max_iter: int = 100
    phase_restarts: int = 4  # extra random starts for the nonconvex phase problem
    inner_tol: float = 1e-8
    inner_max_iter: int = 500

    def __post_init__(self):
        # accept lists from JSON and scalars for per-user fields
        for name in ("target_errors", "min_cbl"):
            value = getattr(self, name)
            if isinstance(value, (int, float)):
                value = (value,) * self.users
            object.__setattr__(self, name, tuple(value))
        for name in ("ris_position", "elevation_range"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "min_cbl", tuple(int(v) for v in self.min_cbl))
        object.__setattr__(self, "target_errors", tuple(float(v) for v in self.target_errors))
        self.validate()

    @property
    def noise_power(self) -> float:
        """Noise power sigma^2 = N0 * W in watts."""
        return 10 ** ((self.noise_density_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz

    @property
    def min_cbl_total(self) -> int:
        return int(sum(self.min_cbl))

    def validate(self):
        def fail(name, why):
            raise ConfigError(f"{name}: {why}")

        for name in ("users", "bs_antennas", "ris_elements", "max_cbl"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                fail(name, f"must be a positive integer, got {v!r}")
        for name in ("bs_antennas", "ris_elements"):
            v = getattr(self, name)
            if math.isqrt(v) ** 2 != v:
                fail(name, f"must be a perfect square for the planar array, got {v}")
        if len(self.target_errors) != self.users:
            fail("target_errors", f"expected {self.users} entries, got {len(self.target_errors)}")
        if len(self.min_cbl) != self.users:
            fail("min_cbl", f"expected {self.users} entries, got {len(self.min_cbl)}")
        if any(not (0.0 < e <= 0.5) for e in self.target_errors):
            fail("target_errors", "each entry must lie in (0, 0.5]")
        if any(m < 1 for m in self.min_cbl):
            fail("min_cbl", "each entry must be >= 1")
        if self.max_cbl < self.min_cbl_total:
            fail("max_cbl", f"{self.max_cbl} is below the sum of min_cbl ({self.min_cbl_total})")
        if not (0.0 <= self.alpha <= 1.0):
            fail("alpha", "must lie in [0, 1]")
        if not self.p_total > 0:
            fail("p_total", "must be positive")
        if not self.bandwidth_hz > 0:
            fail("bandwidth_hz", "must be positive")
        for name in ("rician_bs", "rician_ris", "rician_dir"):
            if not getattr(self, name) >= 0:
                fail(name, "must be nonnegative")
        for name in ("bs_ris_distance", "user_radius", "spacing_over_wavelength"):
            if not getattr(self, name) > 0:
                fail(name, "must be positive")
        if len(self.ris_position) != 2:
            fail("ris_position", "must be an (x, y) pair")
        lo, hi = self.elevation_range if len(self.elevation_range) == 2 else (1, 0)
        if lo > hi:
            fail("elevation_range", "must be an increasing (low, high) pair")
        if not (0.0 <= self.csi_rho < 1.0):
            fail("csi_rho", "must lie in [0, 1)")
        if self.solver_dispersion not in ("approximate", "exact"):
            fail("solver_dispersion", "must be 'approximate' or 'exact'")
        for name in ("ao_max_iter", "sca_max_iter", "phase_max_iter", "inner_max_iter"):
            if getattr(self, name) < 1:
                fail(name, "must be >= 1")
        if self.phase_restarts < 0:
            fail("phase_restarts", "must be >= 0")

    def replace(self, **changes) -> "SystemConfig":
        """Copy with changes; per-user tuples are resized when ``users`` changes."""
        if "users" in changes and changes["users"] != self.users:
            k = changes["users"]
            changes.setdefault("target_errors", (self.target_errors[0],) * k)
            changes.setdefault("min_cbl", (self.min_cbl[0],) * k)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out


_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}


def config_from_dict(data: dict) -> SystemConfig:
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown configuration key")
    try:
        return SystemConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None = None, **overrides) -> SystemConfig:
    """Load a JSON config file (flat keys) on top of the defaults.

    ``path=None`` gives the defaults. Keyword overrides are applied last.
    """
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
    data.update(overrides)
    return config_from_dict(data)


def save_config(config: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
