import json
from pathlib import Path

import numpy as np
import pytest

import prethermal

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_scenarios_listed():
    ids = [s for s, _ in prethermal.list_scenarios()]
    assert "cpdtc" in ids and "single_vs_effective" in ids


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.name)
def test_shipped_configs_validate(path):
    cfg = prethermal.load_config(str(path))
    assert cfg["scenario"]


def test_bad_override_rejected():
    with pytest.raises(prethermal.ConfigError):
        prethermal.load_config(str(CONFIGS / "cpdtc.json"), ["run.no_such_key=1"])


def test_floquet_and_effective_agree_on_energy():
    m = prethermal.Model(str(CONFIGS / "higher_order_3dtc.json"), ["model.extent=24"], omega=20.0)
    s = m.random_state(3)
    assert s.shape == (24, 3)
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 1.0)
    f = m.evolve(s, 50)
    d = m.evolve_effective(s, 50 * m.period, 1e-3)
    assert len(f["sz_avg"]) == 51
    # Energy under the effective Hamiltonian is quasi-conserved by both.
    assert np.ptp(f["energy_density"]) < 0.05
    assert np.ptp(d["energy_density"]) < 1e-6
    assert m.emergent_symmetry()


def test_energy_density_rejects_bad_shape():
    m = prethermal.Model(str(CONFIGS / "cpdtc.json"), ["model.extent=16"])
    with pytest.raises(ValueError):
        m.energy_density(np.zeros((5, 3)))


def test_run_writes_summary_and_manifest(tmp_path):
    out = tmp_path / "run"
    r = prethermal.run(
        str(CONFIGS / "single_vs_effective.json"),
        str(out),
        ["model.extent=32", "run.n_cycles=10"],
        workers=1,
        seed=5,
    )
    assert r["summary"]["seed"] == 5
    manifest = json.loads(Path(r["manifest"]).read_text())
    assert manifest["files"]
    ok, problems = prethermal.verify_manifest(r["manifest"])
    assert ok, problems
