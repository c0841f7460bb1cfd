import pytest

from src.config import (
    ConfigurationError,
    PipelineConfig,
    PipelineConfigLoader,
    build_pipeline_config,
    describe_keys,
    get_config_dir,
    parse_overrides,
    reload_pipeline_config,
)


def test_defaults():
    config = PipelineConfig()
    assert config.voxel_size == 0.1
    assert config.epsilon_c == 6.0
    assert config.classification == "consistency"
    assert config.excluded_classes == frozenset({0, 9, 11, 12, 17})


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigurationError, match="voxel_sise"):
        build_pipeline_config({"voxel_sise": 0.2})


def test_invalid_value_is_rejected():
    with pytest.raises(ConfigurationError):
        build_pipeline_config({"voxel_size": -1.0})
    with pytest.raises(ConfigurationError):
        build_pipeline_config({"r_tp": 30.0, "r_fp": 20.0})


def test_key_value_file(tmp_path):
    path = tmp_path / "graphloc.conf"
    path.write_text(
        "# tuned run\n"
        "voxel_size = 0.2\n"
        "classification = rerank   # compare modes\n"
        "excluded_classes = 0, 9\n"
        "weights_path = none\n"
    )
    config = PipelineConfigLoader(str(path)).load()
    assert config.voxel_size == 0.2
    assert config.classification == "rerank"
    assert config.excluded_classes == frozenset({0, 9})
    assert config.weights_path is None


def test_key_value_file_needs_equals(tmp_path):
    path = tmp_path / "graphloc.conf"
    path.write_text("voxel_size 0.2\n")
    with pytest.raises(ConfigurationError, match="Line 1"):
        PipelineConfigLoader(str(path)).load()


def test_yaml_file_with_overrides(tmp_path):
    path = tmp_path / "graphloc.yml"
    path.write_text("top_k: 5\nd_t: 0.5\n")
    config = PipelineConfigLoader(str(path)).load({"top_k": "7"})
    assert config.top_k == 7
    assert config.d_t == 0.5


def test_nested_yaml_is_rejected(tmp_path):
    path = tmp_path / "graphloc.yml"
    path.write_text("registration:\n  icp_max_iters: 10\n")
    with pytest.raises(ConfigurationError, match="flat"):
        PipelineConfigLoader(str(path)).load()


def test_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        PipelineConfigLoader(str(tmp_path / "absent.yml")).load()


def test_example_file_matches_defaults():
    config = PipelineConfigLoader(str(get_config_dir() / "graphloc.example.yml")).load()
    assert config == PipelineConfig()


def test_parse_overrides():
    overrides = parse_overrides(["top_k=3", "consistency_normalize=true", "weights_path=none"])
    assert overrides == {"top_k": 3, "consistency_normalize": True, "weights_path": None}
    with pytest.raises(ConfigurationError):
        parse_overrides(["top_k"])


def test_with_overrides_revalidates():
    config = PipelineConfig().with_overrides({"epsilon_c": 3.0})
    assert config.epsilon_c == 3.0
    with pytest.raises(ConfigurationError):
        PipelineConfig().with_overrides({"top_k": 0})


def test_cluster_profile_takes_precedence():
    config = PipelineConfig(cluster_profile="kitti", cluster_eps=0.9)
    assert config.cluster_params.eps == 0.05
    assert config.cluster_params.min_pts == 800
    assert PipelineConfig(cluster_eps=0.9).cluster_params.eps == 0.9


def test_reload_replaces_cached_config(tmp_path):
    path = tmp_path / "graphloc.yml"
    path.write_text("top_k: 4\n")
    assert reload_pipeline_config(str(path)).top_k == 4
    assert reload_pipeline_config().top_k == 20


def test_describe_keys_covers_every_field():
    lines = describe_keys()
    assert len(lines) == len(PipelineConfig.model_fields)
    assert any(line.startswith("epsilon_c: 6.0") for line in lines)
