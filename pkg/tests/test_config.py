import pytest

from constant.defaults import DEFAULT_N, DEFAULT_SEED
from utils.config import RunConfig, load_config, parse_config


def test_parse_config_reads_keys_and_signs():
    text = "# engine run\nn = 3\nseed=7  # fixed\n\nsign-pair = 1\nout = report.json\n"
    values = parse_config(text)
    assert values == {"signs": {"pair": 1}, "n": 3, "seed": 7, "out": "report.json"}


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("n 3", "run.cfg:1: expected key=value"),
        ("n = 2\ncolour = red", "run.cfg:2: unknown key 'colour'"),
        ("trials = many", "run.cfg:1:"),
    ],
)
def test_parse_config_errors_name_the_line(text, message):
    with pytest.raises(ValueError, match=message):
        parse_config(text, "run.cfg")


def test_run_config_validation():
    with pytest.raises(ValueError, match="n must be positive"):
        RunConfig(n=0)
    with pytest.raises(ValueError, match="unknown sign"):
        RunConfig(signs={"nope": 1})
    with pytest.raises(ValueError, match="1 or -1"):
        RunConfig(signs={"pair": 2})


def test_merged_keeps_unset_values():
    base = RunConfig(signs={"pair": 1})
    merged = base.merged({"n": 4, "seed": None, "signs": {"diff": 1}})
    assert merged.n == 4
    assert merged.seed == DEFAULT_SEED
    assert merged.signs == {"pair": 1, "diff": 1}
    assert base.n == DEFAULT_N
    assert list(merged.to_dict()["signs"]) == ["diff", "pair"]


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("truncate = 2\nsign-comm = -1\n", encoding="utf-8")
    config = load_config(path)
    assert config.truncate == 2
    assert config.signs == {"comm": -1}
    with pytest.raises(ValueError, match="does not exist"):
        load_config(tmp_path / "missing.cfg")
