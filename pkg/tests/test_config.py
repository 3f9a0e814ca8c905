import pytest

from dega import config

TEXT = """
[experiment]
benchmark = lo
n_start = 100
n_end = 3000
repetitions = 50
master_seed = 17
normalization = n^2
regression_skip = 4

[alg.dega-opt]
id = dega-a
lambda = (n ln n)^2/3

[alg.ga]
id = tpo-ga
p_c = 0.5
"""


def test_parse_fields():
    cfg = config.parse(TEXT)
    assert cfg.benchmark == "lo" and cfg.master_seed == 17
    assert cfg.size_count == 10 and cfg.regression_skip == 4
    assert [a.label for a in cfg.algorithms] == ["dega-opt", "ga"]
    assert cfg.algorithms[0].config.lam == "(n ln n)^2/3"
    assert cfg.algorithms[1].config.p_c == 0.5


def test_round_trip_is_lossless():
    cfg = config.parse(TEXT)
    text = config.serialize(cfg)
    again = config.parse(text)
    assert again == cfg
    assert config.serialize(again) == text


def test_defaults_by_benchmark():
    cfg = config.parse("[experiment]\nbenchmark = om\n[alg.a]\nid = opo-ea\n")
    assert (cfg.n_start, cfg.n_end, cfg.repetitions) == (100, 30000, 50)


@pytest.mark.parametrize(
    "text, needle",
    [
        (TEXT + "\n[other]\nx = 1\n", "other"),
        (TEXT.replace("repetitions = 50", "reps = 50"), "reps"),
        (TEXT.replace("p_c = 0.5", "p_c = 0.5\nmu = 3"), "mu"),
        (TEXT.replace("id = tpo-ga", "id = nosuch"), "dega-a, dega-a-prime"),
        (TEXT.replace("n_start = 100", "n_start = ten"), "n_start"),
        ("[alg.a]\nid = opo-ea\n", "experiment"),
    ],
)
def test_rejections_name_the_offender(text, needle):
    with pytest.raises(config.ConfigError) as info:
        config.parse(text)
    assert needle in str(info.value)


def test_overrides():
    cfg = config.parse(TEXT, ["repetitions=3", "alg.dega-opt.lambda=2", "alg.new.id=opo-ea"])
    assert cfg.repetitions == 3
    assert cfg.algorithms[0].config.lam == "2"
    assert [a.label for a in cfg.algorithms] == ["dega-opt", "ga", "new"]
    with pytest.raises(config.ConfigError):
        config.parse(TEXT, ["bogus=1"])
    with pytest.raises(config.ConfigError):
        config.parse(TEXT, ["novalue"])
