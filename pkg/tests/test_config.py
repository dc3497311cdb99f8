import json
import math

import pytest

from risfbl import ConfigError, SystemConfig, load_config, save_config
from risfbl.config import config_from_dict


def test_defaults():
    cfg = load_config()
    assert (cfg.users, cfg.bs_antennas, cfg.ris_elements) == (4, 4, 25)
    assert cfg.p_total == pytest.approx(0.01)
    assert cfg.target_errors == (1e-6,) * 4
    assert cfg.alpha == 0.8
    assert cfg.max_cbl == 200 and cfg.min_cbl == (10,) * 4
    assert (cfg.rician_bs, cfg.rician_ris, cfg.rician_dir) == (1.0, 1.0, 1.0)
    assert cfg.bandwidth_hz == 2e6
    assert cfg.bs_ris_distance == 20.0


def test_noise_power():
    # -174 dBm/Hz over 2 MHz = -111 dBm
    assert 10 * math.log10(SystemConfig().noise_power) + 30 == pytest.approx(-110.99, abs=0.01)


@pytest.mark.parametrize("changes, field", [
    ({"max_cbl": 39}, "max_cbl"),
    ({"alpha": 1.5}, "alpha"),
    ({"ris_elements": 24}, "ris_elements"),
    ({"bs_antennas": 0}, "bs_antennas"),
    ({"target_errors": (0.6,) * 4}, "target_errors"),
    ({"target_errors": (1e-6,) * 3}, "target_errors"),
    ({"p_total": -1.0}, "p_total"),
    ({"csi_rho": 1.0}, "csi_rho"),
    ({"solver_dispersion": "magic"}, "solver_dispersion"),
    ({"phase_restarts": -1}, "phase_restarts"),
])
def test_validation_names_field(changes, field):
    with pytest.raises(ConfigError, match=f"^{field}:"):
        SystemConfig(**changes)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="^alhpa:"):
        config_from_dict({"alhpa": 0.5})


def test_roundtrip(tmp_path):
    cfg = SystemConfig(alpha=0.3, ris_elements=16, min_cbl=(5, 6, 7, 8))
    path = tmp_path / "c.json"
    save_config(cfg, path)
    assert load_config(path) == cfg
    assert json.loads(path.read_text())["ris_elements"] == 16


def test_file_overrides_and_kwargs(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"p_total": 0.1, "min_cbl": 12}))
    cfg = load_config(path, alpha=0.5)
    assert cfg.p_total == 0.1 and cfg.min_cbl == (12,) * 4 and cfg.alpha == 0.5


def test_bad_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="^config:"):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_replace_resizes_per_user_fields():
    cfg = SystemConfig().replace(users=2)
    assert cfg.target_errors == (1e-6, 1e-6) and cfg.min_cbl == (10, 10)
    assert cfg.min_cbl_total == 20
