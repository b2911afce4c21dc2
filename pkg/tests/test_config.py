import pytest
from hypothesis import given
from hypothesis import strategies as st

from lapcem.config import config_from_dict, dump_config, load_config, parse_config
from lapcem.errors import ConfigError

EXAMPLE = """
n: 20
conjecture: 3
total_batch: 1000
instances: 5
max_generations: 400
master_seed: 7
generation:
  seed_fraction: 0.25
  hidden_sizes: [72, 12]
overrides:
  2: {learning_rate: 0.001}
"""


def test_parse_example():
    cfg = parse_config(EXAMPLE)
    assert (cfg.n, cfg.conjecture, cfg.instances, cfg.master_seed) == (20, 3, 5, 7)
    assert cfg.generation.seed_fraction == 0.25
    assert cfg.instance_config(2).learning_rate == 0.001
    assert cfg.instance_config(0).batch_size == 200


def test_round_trip(tmp_path):
    cfg = parse_config(EXAMPLE)
    path = tmp_path / "c.yaml"
    path.write_text(dump_config(cfg))
    back = load_config(path)
    assert back == cfg


@given(
    n=st.integers(2, 30),
    instances=st.integers(1, 8),
    seed=st.integers(0, 2**32),
    lr=st.floats(0, 1),
    hidden=st.lists(st.integers(1, 100), min_size=1, max_size=3),
)
def test_round_trip_property(n, instances, seed, lr, hidden):
    cfg = config_from_dict({
        "n": n, "conjecture": 61, "instances": instances, "total_batch": 8 * instances,
        "master_seed": seed, "generation": {"learning_rate": lr, "hidden_sizes": hidden},
    })
    assert parse_config(dump_config(cfg)) == cfg


@pytest.mark.parametrize("raw, fragment", [
    ({"conjecture": 3}, "field 'n'"),
    ({"n": 5, "conjecture": 3, "colour": 1}, "field 'colour'"),
    ({"n": "five", "conjecture": 3}, "field 'n'"),
    ({"n": 5, "conjecture": 3, "halt_on_counterexample": "yes"}, "halt_on_counterexample"),
    ({"n": 5, "conjecture": 3, "generation": {"batch_size": 10}}, "generation.batch_size"),
    ({"n": 5, "conjecture": 3, "generation": {"hidden_sizes": [1.5]}}, "hidden_sizes"),
    ({"n": 5, "conjecture": 3, "overrides": {"x": {}}}, "overrides.x"),
    ({"n": 5, "conjecture": 3, "generation": {"learning_rate": -1}}, "learning_rate"),
    ({"n": 5, "conjecture": 99}, "valid"),
])
def test_config_errors(raw, fragment):
    with pytest.raises(ConfigError, match=fragment):
        config_from_dict(raw)


def test_invalid_yaml():
    with pytest.raises(ConfigError, match="invalid YAML"):
        parse_config("n: [1,")
    with pytest.raises(ConfigError, match="mapping"):
        parse_config("- 1\n- 2\n")
