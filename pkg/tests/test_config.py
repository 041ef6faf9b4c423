import json

import pytest
from pydantic import ValidationError

from tensormeans.config import ExperimentConfig, MeanConfig, SourceConfig, load_config
from tensormeans.errors import ConfigError
from tensormeans.sampling import TwoPoint, Wishart


def write_config(tmp_path, data):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_defaults():
    config = ExperimentConfig()
    assert config.seed == 0 and config.k == 3 and config.trials == 100
    assert config.mean_spec().kind == "karcher"
    assert config.weight_values().values == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert config.build_source().window() == (1.0, 2.0)
    assert config.shape.flat_dim == 4


def test_workers_default_from_environment(monkeypatch):
    monkeypatch.setenv("TENSORMEANS_WORKERS", "3")
    assert ExperimentConfig().workers == 3
    monkeypatch.setenv("TENSORMEANS_WORKERS", "lots")
    assert ExperimentConfig().workers == 1


@pytest.mark.parametrize("fields, message", [
    ({"trials": 0}, "trials"),
    ({"k": 2, "weights": [0.5, 0.25, 0.25]}, "3 weights given"),
    ({"k": 2, "weights": [0.5, 0.6]}, "sum to 1"),
    ({"q_values": [0.0]}, "q_values"),
    ({"p_values": []}, "p_values"),
    ({"r_values": [0.5]}, "r_values"),
    ({"mean": {"kind": "power"}}, "needs q"),
    ({"mean": {"kind": "power", "q": 2.0}}, r"q in \[-1, 1\]"),
    ({"source": {"law": "wishart", "dof": 8}}, "needs ridge"),
    ({"source": {"law": "two_point", "atoms": [1.0], "prob_a": 0.5}}, "exactly two atoms"),
    ({"seed": -1}, "seed"),
    ({"color": "blue"}, "color"),
])
def test_invalid_experiments(fields, message):
    with pytest.raises(ValidationError, match=message):
        ExperimentConfig(**fields)


def test_nested_mean_specs():
    config = ExperimentConfig(mean={"kind": "adjoint", "of": {"kind": "deformed", "base": "harmonic", "sigma_q": 0.5}})
    spec = config.mean_spec()
    assert spec.kind == "adjoint"
    assert spec.of.describe() == "deformed(harmonic, power(q=0.5))"


def test_sources():
    wishart = SourceConfig(law="wishart", dof=6, ridge=0.1).build(ExperimentConfig().shape, 5)
    assert isinstance(wishart.law, Wishart) and wishart.root_seed == 5

    two_point = SourceConfig(law="two_point", atoms=[1.0, 3.0], prob_a=0.25).build(ExperimentConfig().shape, 0)
    assert isinstance(two_point.law, TwoPoint)
    assert two_point.window() == pytest.approx((1.0, 3.0))


def test_mean_config_round_trip():
    mean = MeanConfig(kind="power", q=-0.5)
    assert MeanConfig.model_validate(mean.model_dump()) == mean


def test_overrides_revalidate():
    config = ExperimentConfig()
    assert config.with_overrides() is config
    updated = config.with_overrides(seed=9, output_dir="out")
    assert updated.seed == 9 and updated.output_dir == "out"
    with pytest.raises(ConfigError, match="invalid override"):
        config.with_overrides(seed=-4)


def test_load_config(tmp_path):
    path = write_config(tmp_path, {"seed": 4, "mode_dims": [2, 2], "mean": {"kind": "harmonic"}})
    config = load_config(path)
    assert config.seed == 4 and config.shape.mode_dims == (2, 2)
    assert config.mean_spec().kind == "harmonic"


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")

    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)

    with pytest.raises(ConfigError, match="invalid config"):
        load_config(write_config(tmp_path, {"trials": 0}))
