"""Rician channel realizations for the BS -> RIS -> user downlink."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ArrayGeometry:
    element_count: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if self.element_count < 1 or math.isqrt(self.element_count) ** 2 != self.element_count:
            raise GeometryError(f"element_count must be a perfect square, got {self.element_count}")
        if not self.spacing_over_wavelength > 0:
            raise GeometryError("spacing_over_wavelength must be positive")

    @property
    def side(self) -> int:
        return math.isqrt(self.element_count)


@dataclass(frozen=True)
class LinkParams:
    rician_factor: float
    distance_m: float
    azimuth_rad: float
    elevation_rad: float
    path_loss_model: str = "reflected"

    def __post_init__(self):
        if self.rician_factor < 0:
            raise ValueError("rician_factor must be nonnegative")
        if not self.distance_m > 0:
            raise ValueError("distance_m must be positive")


@dataclass(frozen=True)
class ChannelSet:
    """One realization of every link.

    Attributes:
        bs_ris: (N, B) BS -> RIS matrix H.
        ris_user: (K, N) rows are h^RIS_k.
        direct: (K, B) rows are h^dir_k.
        angles: geometry drawn for this realization, kept for reproducibility.
    """

    bs_ris: np.ndarray
    ris_user: np.ndarray
    direct: np.ndarray
    angles: dict = field(default_factory=dict, compare=False)

    @property
    def users(self) -> int:
        return self.ris_user.shape[0]

    @property
    def ris_elements(self) -> int:
        return self.bs_ris.shape[0]

    @property
    def bs_antennas(self) -> int:
        return self.bs_ris.shape[1]

    def __post_init__(self):
        n, b = self.bs_ris.shape
        k = self.ris_user.shape[0]
        if self.ris_user.shape != (k, n) or self.direct.shape != (k, b):
            raise ValueError(
                f"inconsistent channel shapes: H {self.bs_ris.shape}, "
                f"h_ris {self.ris_user.shape}, h_dir {self.direct.shape}"
            )
        for arr in (self.bs_ris, self.ris_user, self.direct):
            if not np.all(np.isfinite(arr)):
                raise ValueError("channel entries must be finite")


def steering_vector(geometry: ArrayGeometry, azimuth: float, elevation: float) -> np.ndarray:
    """Uniform square planar array response, length ``element_count``.

    Element (x, y) of the sqrt(Q) x sqrt(Q) grid, flattened row-major, has
    phase 2 pi (d/lambda) (x sin(el) sin(az) + y cos(el)).
    """
    idx = np.arange(geometry.side)
    x, y = np.meshgrid(idx, idx, indexing="ij")
    phase = 2 * np.pi * geometry.spacing_over_wavelength * (
        x * np.sin(elevation) * np.sin(azimuth) + y * np.cos(elevation)
    )
    return np.exp(1j * phase).ravel()


def path_loss_linear(model: str, distance_m):
    """Large-scale power gain: -30 - 22 log10(d) dB (reflected) or
    -33 - 38 log10(d) dB (direct)."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if model == "reflected":
        pl_db = -30.0 - 22.0 * np.log10(d)
    elif model == "direct":
        pl_db = -33.0 - 38.0 * np.log10(d)
    else:
        raise ValueError(f"unknown path loss model {model!r}")
    out = 10.0 ** (pl_db / 10.0)
    return float(out) if out.ndim == 0 else out


def derive_rng(*keys: int) -> np.random.Generator:
    """Independent generator for a tuple of integer keys (base seed first)."""
    base, *rest = keys
    return np.random.default_rng(np.random.SeedSequence(int(base), spawn_key=tuple(int(k) for k in rest)))


def derive_seed(*keys: int) -> int:
    """Stable 63-bit integer seed for a tuple of keys."""
    base, *rest = keys
    ss = np.random.SeedSequence(int(base), spawn_key=tuple(int(k) for k in rest))
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> np.uint64(1))


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def rician(los: np.ndarray, rician_factor: float, beta: float, nlos: np.ndarray) -> np.ndarray:
    """sqrt(z/(z+1)) sqrt(beta) los + sqrt(beta/(z+1)) nlos, ``los`` unit-modulus."""
    z = rician_factor
    return np.sqrt(z / (z + 1.0)) * np.sqrt(beta) * los + np.sqrt(beta / (z + 1.0)) * nlos


def sample_geometry(config: SystemConfig, rng: np.random.Generator) -> dict:
    """Place users on a circle around the RIS and draw all angles."""
    k = config.users
    ris = np.asarray(config.ris_position)
    lo, hi = config.elevation_range
    user_angle = rng.uniform(0.0, 2 * np.pi, size=k)
    users = ris + config.user_radius * np.column_stack([np.cos(user_angle), np.sin(user_angle)])
    rel_ris = users - ris
    return {
        "users_xy": users,
        "bs_ris_aoa": (math.atan2(-ris[1], -ris[0]), rng.uniform(lo, hi)),
        "bs_ris_aod": (math.atan2(ris[1], ris[0]), rng.uniform(lo, hi)),
        "ris_user_az": np.arctan2(rel_ris[:, 1], rel_ris[:, 0]),
        "ris_user_el": rng.uniform(lo, hi, size=k),
        "direct_az": np.arctan2(users[:, 1], users[:, 0]),
        "direct_el": rng.uniform(lo, hi, size=k),
        "ris_user_dist": np.linalg.norm(rel_ris, axis=1),
        "direct_dist": np.linalg.norm(users, axis=1),
    }


def sample_channels(config: SystemConfig, seed: int) -> ChannelSet:
    """Draw one channel realization; a pure function of ``(config, seed)``."""
    rng = derive_rng(seed, 0)
    geo = sample_geometry(config, rng)
    ris_arr = ArrayGeometry(config.ris_elements, config.spacing_over_wavelength)
    bs_arr = ArrayGeometry(config.bs_antennas, config.spacing_over_wavelength)
    n, b, k = config.ris_elements, config.bs_antennas, config.users

    beta_bs = path_loss_linear("reflected", config.bs_ris_distance)
    los_h = np.outer(steering_vector(ris_arr, *geo["bs_ris_aoa"]),
                     steering_vector(bs_arr, *geo["bs_ris_aod"]).conj())
    bs_ris = rician(los_h, config.rician_bs, beta_bs, _cn(rng, (n, b)))

    ris_user = np.empty((k, n), dtype=complex)
    direct = np.empty((k, b), dtype=complex)
    for u in range(k):
        beta = path_loss_linear("reflected", geo["ris_user_dist"][u])
        los = steering_vector(ris_arr, geo["ris_user_az"][u], geo["ris_user_el"][u])
        ris_user[u] = rician(los, config.rician_ris, beta, _cn(rng, n))
        beta = path_loss_linear("direct", geo["direct_dist"][u])
        los = steering_vector(bs_arr, geo["direct_az"][u], geo["direct_el"][u])
        direct[u] = rician(los, config.rician_dir, beta, _cn(rng, b))
    return ChannelSet(bs_ris, ris_user, direct, angles=geo)


def _estimate(h: np.ndarray, rho: float, rng, per_row: bool) -> np.ndarray:
    # h = h_hat + e with e independent of h_hat and E|e|^2 / E|h_hat|^2 = rho;
    # h_hat is drawn from its conditional law given h. Power is per link.
    if per_row:
        power = np.mean(np.abs(h) ** 2, axis=1, keepdims=True)
    else:
        power = np.mean(np.abs(h) ** 2)
    return (h + np.sqrt(rho * power) * _cn(rng, h.shape)) / (1.0 + rho)


def corrupt_csi(channels: ChannelSet, rho: float, seed: int) -> ChannelSet:
    """Imperfect-CSI estimate of ``channels`` with normalized MSE ``rho``."""
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if rho == 0.0:
        return channels
    rng = derive_rng(seed, 1)
    return ChannelSet(
        _estimate(channels.bs_ris, rho, rng, per_row=False),
        _estimate(channels.ris_user, rho, rng, per_row=True),
        _estimate(channels.direct, rho, rng, per_row=True),
        angles=channels.angles,
    )
