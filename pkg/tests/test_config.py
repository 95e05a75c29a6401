import pytest
from hypothesis import given, settings, strategies as st

from radscat.config import ConfigError, RunConfig, config_hash, dump_config, load_config


def test_defaults_are_canonical():
    cfg = RunConfig()
    assert (cfg.scenario.n, cfg.scenario.p, cfg.scenario.k, cfg.scenario.kappa) == (5, 1.9, 2.3, 2.5)
    assert cfg.scatter.tol == 1e-8


def test_round_trip_preserves_hash():
    cfg = load_config("scenario:\n  p: 1.95\nverify:\n  lemmas: [A2]\n  where: {b: [0.0]}\n")
    again = load_config(dump_config(cfg))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown keys"):
        load_config("scenario:\n  q: 1\n")
    with pytest.raises(ConfigError, match="unknown blocks"):
        load_config("extra:\n  a: 1\n")


@pytest.mark.parametrize("text", [
    "scenario:\n  n: 5.5\n",
    "solver:\n  scheme: spectral\n",
    "scatter:\n  max_iter: 0\n",
    "verify:\n  levels: [2]\n",
    "verify:\n  params: {a: 1}\n",
    "verify:\n  where: [b]\n",
    "sweep:\n  grid: {p: []}\n",
    "sweep:\n  grid: {zeta: [1]}\n",
    "sweep:\n  command: dance\n",
    "output:\n  cadence: -1\n",
    "scenario: [1, 2]\n",
])
def test_invalid_values_rejected(text):
    with pytest.raises(ConfigError):
        load_config(text)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.yaml")


def test_file_and_text_agree(tmp_path):
    text = "scenario:\n  eps: 0.002\n"
    path = tmp_path / "c.yaml"
    path.write_text(text)
    assert load_config(path) == load_config(text)


@settings(deadline=None, max_examples=50)
@given(p=st.floats(1.0, 3.0), eps=st.floats(0.0, 1.0), dr=st.sampled_from([0.5, 0.25, 0.125]),
       lemmas=st.lists(st.sampled_from(["A1", "A2", "B1", "HSRC"]), min_size=1, max_size=4),
       grid=st.lists(st.floats(1.5, 2.0), min_size=1, max_size=3))
def test_round_trip_property(p, eps, dr, lemmas, grid):
    raw = {"scenario": {"p": p, "eps": eps}, "solver": {"dr": dr}, "verify": {"lemmas": lemmas},
           "sweep": {"grid": {"p": grid}}}
    cfg = RunConfig.from_dict(raw)
    again = load_config(dump_config(cfg))
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)


def test_hash_changes_with_content():
    assert config_hash(RunConfig()) != config_hash(load_config("scenario:\n  eps: 0.002\n"))
