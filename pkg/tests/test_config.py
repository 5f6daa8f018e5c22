import pytest

from canopylai import DataError, load_config

FULL = """
[paths]
annotations = "data/annotations.csv"
image_root = "data"
output_dir = "out"
model_file = "models/net.onnx"

[split]
test_fraction = 0.25
seed = 7

[green]
binary_cutoff = 60
low_threshold = 40.0
high_threshold = 120.0
blur_sigma = 1.0
blur_kernel = 3
hue_low = 80.0
hue_high = 160.0
min_s = 0.2
min_v = 0.05

[vocab]
bins_per_channel = 4
glcm_levels = 16
glcm_offset = [0, 1]

[embed]
input_size = 64
batch_size = 2
mean = [0.5, 0.5, 0.5]
std = [0.25, 0.25, 0.25]

[regressors]
svr_c = 2.0
svr_epsilon = 0.01
svr_gamma = 0.5
trees = 25
min_samples_leaf = 2
bootstrap = false
feature_subsample = 3

[evaluate]
extractors = ["green", "vocab"]
"""


def write(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_full_config_parses(tmp_path):
    config = load_config(write(tmp_path, FULL))
    assert config.annotations == tmp_path / "data/annotations.csv"
    assert config.image_root == tmp_path / "data"
    assert config.output_dir == tmp_path / "out"
    assert config.model_file == tmp_path / "models/net.onnx"
    assert config.split.test_fraction == 0.25 and config.split.seed == 7
    assert config.green.binary_cutoff == 60
    assert config.green.edge.low_threshold == 40.0
    assert config.green.edge.blur_kernel == 3
    assert config.green.hue_range == (80.0, 160.0)
    assert config.green.min_s == 0.2 and config.green.min_v == 0.05
    assert config.vocab.bins_per_channel == 4
    assert config.vocab.glcm_offset == (0, 1)
    assert config.embed.input_size == 64 and config.embed.batch_size == 2
    assert config.embed.mean == (0.5, 0.5, 0.5)
    assert config.regressors.svr_c == 2.0
    assert config.regressors.svr_gamma == 0.5
    assert config.regressors.bootstrap is False
    assert config.regressors.feature_subsample == 3
    assert config.extractors == ("green", "vocab")


def test_empty_config_gives_defaults(tmp_path):
    config = load_config(write(tmp_path, ""))
    assert config.annotations is None
    assert config.split.test_fraction == 0.2 and config.split.seed == 42
    assert config.green.binary_cutoff == 50
    assert config.green.edge.high_threshold == 150.0
    assert config.regressors.svr_gamma == "auto"
    assert config.regressors.feature_subsample is None
    assert config.extractors == ("green", "vocab", "embed")


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(DataError, match="cutooff"):
        load_config(write(tmp_path, "[green]\ncutooff = 5\n"))


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(DataError, match="mystery"):
        load_config(write(tmp_path, "[mystery]\nx = 1\n"))


def test_bad_gamma_string_rejected(tmp_path):
    with pytest.raises(DataError, match="svr_gamma"):
        load_config(write(tmp_path, '[regressors]\nsvr_gamma = "median"\n'))
    config = load_config(write(tmp_path, '[regressors]\nsvr_gamma = "auto"\n', "g.toml"))
    assert config.regressors.svr_gamma == "auto"


def test_bad_extractor_rejected(tmp_path):
    with pytest.raises(DataError, match="resnet"):
        load_config(write(tmp_path, '[evaluate]\nextractors = ["resnet"]\n'))


def test_bad_offset_rejected(tmp_path):
    with pytest.raises(DataError, match="glcm_offset"):
        load_config(write(tmp_path, "[vocab]\nglcm_offset = [1, 0, 0]\n"))


def test_missing_file_rejected(tmp_path):
    with pytest.raises(DataError):
        load_config(tmp_path / "nope.toml")


def test_invalid_toml_rejected(tmp_path):
    with pytest.raises(DataError):
        load_config(write(tmp_path, "[paths\nbroken"))
