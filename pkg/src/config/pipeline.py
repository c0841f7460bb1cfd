"""
Pipeline configuration loader for GraphLoc
"""

import logging
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Literal, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import GraphlocError
from ..models.instances import DEFAULT_EXCLUDED_CLASSES, ClusterParams
from .settings import get_config_dir


logger = logging.getLogger(__name__)


class ConfigurationError(GraphlocError):
    """Invalid, unknown or inconsistent configuration"""
    pass


class PipelineConfig(BaseModel):
    """
    Flat pipeline configuration

    Every key has a default; unknown keys are rejected.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Submap generation
    voxel_size: float = Field(default=0.10, gt=0, description="Voxel edge in meters (ten-centimeter voxels)")
    max_span: float = Field(default=20.0, ge=0, description="Maximum travelled distance per submap in meters")
    num_classes: int = Field(default=20, ge=1, le=32, description="Semantic classes per probability row")

    # Instance clustering
    cluster_profile: Optional[Literal["voxel", "kitti", "kitti_vegetation"]] = Field(
        default=None, description="Named DBSCAN parameter set; overrides the cluster_* values when set"
    )
    cluster_eps: float = Field(default=0.2, gt=0, description="DBSCAN radius in meters")
    cluster_min_pts: int = Field(default=100, ge=1, description="Minimum voxels per instance")
    cluster_min_samples: Optional[int] = Field(default=5, ge=1, description="Core neighbour count")
    excluded_classes: FrozenSet[int] = Field(default=DEFAULT_EXCLUDED_CLASSES, description="Non-object classes")
    sample_points: int = Field(default=1024, ge=1, description="Fixed sample size P per instance")

    # Descriptors and graph network
    descriptor_backend: str = Field(default="reference", description="Local descriptor backend name")
    alpha: float = Field(default=20.0, gt=0, description="Edge normalizer in meters")
    egnn_layers: int = Field(default=3, ge=1, description="Message-passing depth")
    egnn_hidden: int = Field(default=256, ge=1, description="Message-passing hidden width")
    enriched_dim: int = Field(default=512, ge=1, description="Enriched node feature width")
    embedding_dim: int = Field(default=256, ge=1, description="Global embedding width")
    tnn_slices: int = Field(default=16, ge=1, description="Tensor slices of the score head")
    gem_lambda: float = Field(default=3.0, gt=0, description="Initial GeM exponent")
    weights_path: Optional[str] = Field(default=None, description="Network weight file; seeded init when unset")
    weights_seed: int = Field(default=7, description="Seed for randomly initialized weights")

    # Loop closure
    match_features_on: Literal["auto", "enriched", "descriptor"] = Field(
        default="descriptor", description="Node features used for mutual matching"
    )
    d_t: float = Field(default=1.0, gt=0, description="Consistency distance tolerance in meters")
    epsilon_c: float = Field(default=6.0, ge=0, description="Consistency threshold for a revisit")
    consistency_normalize: bool = Field(default=False, description="Divide C by the inlier count")
    delta: float = Field(default=1.0, ge=0, description="Embedding distance threshold for the embedding mode")
    classification: Literal["embedding", "rerank", "consistency"] = Field(
        default="consistency", description="Revisit classification mode"
    )
    top_k: int = Field(default=20, ge=1, description="Candidates re-ranked per query")
    exclusion_s: float = Field(default=30.0, ge=0, description="Temporal exclusion window in seconds")

    # Evaluation and training objectives
    r_tp: float = Field(default=3.0, gt=0, description="True-positive revisit radius in meters")
    r_fp: float = Field(default=20.0, gt=0, description="False-positive revisit radius in meters")
    margin: float = Field(default=1.0, ge=0, description="Triplet margin")
    pos_radius: float = Field(default=3.0, gt=0, description="Positive mining radius in meters")
    neg_radius: float = Field(default=20.0, gt=0, description="Negative mining radius in meters")

    # Registration
    ransac_inlier_tol: float = Field(default=0.5, gt=0, description="RANSAC inlier residual in meters")
    ransac_max_iters: int = Field(default=10000, ge=1, description="RANSAC hypothesis cap")
    ransac_confidence: float = Field(default=0.999, gt=0, lt=1, description="RANSAC early-exit confidence")
    icp_max_distance: float = Field(default=1.0, gt=0, description="ICP association cap in meters")
    icp_tolerance: float = Field(default=1e-4, gt=0, description="ICP convergence threshold in meters")
    icp_max_iters: int = Field(default=50, ge=1, description="ICP iteration cap")
    rre_max: float = Field(default=5.0, gt=0, description="Registration success rotation bound in degrees")
    rte_max: float = Field(default=2.0, gt=0, description="Registration success translation bound in meters")
    register_radius: float = Field(default=20.0, gt=0, description="eval-reg pairs submaps within this distance")

    # Run
    seed: int = Field(default=0, description="Seed for RANSAC and synthetic generation")
    workers: int = Field(default=1, ge=1, description="Worker pool size")
    out_dir: str = Field(default="./out", description="Output directory")

    @field_validator("excluded_classes", mode="before")
    @classmethod
    def validate_excluded_classes(cls, v):
        """Accept lists, sets or comma-separated text"""
        if isinstance(v, str):
            v = [part for part in v.replace(" ", "").split(",") if part]
        return frozenset(int(c) for c in v)

    @model_validator(mode="after")
    def validate_radii(self) -> "PipelineConfig":
        """Evaluation and mining radii must be ordered"""
        if self.r_fp < self.r_tp:
            raise ValueError("r_fp must not be smaller than r_tp")
        if self.neg_radius < self.pos_radius:
            raise ValueError("neg_radius must not be smaller than pos_radius")
        return self

    @property
    def cluster_params(self) -> ClusterParams:
        """DBSCAN parameters, profile first"""
        if self.cluster_profile is not None:
            return ClusterParams.from_profile(self.cluster_profile, excluded_classes=self.excluded_classes)
        return ClusterParams(
            eps=self.cluster_eps,
            min_pts=self.cluster_min_pts,
            min_samples=self.cluster_min_samples,
            excluded_classes=self.excluded_classes,
        )

    def with_overrides(self, overrides: Mapping[str, Any]) -> "PipelineConfig":
        """New config with some keys replaced and re-validated"""
        return build_pipeline_config({**self.model_dump(), **dict(overrides)})


def build_pipeline_config(values: Mapping[str, Any]) -> PipelineConfig:
    """Validate a mapping into a PipelineConfig, raising ConfigurationError"""
    unknown = sorted(set(values) - set(PipelineConfig.model_fields))
    if unknown:
        raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
    try:
        return PipelineConfig(**values)
    except ValidationError as e:
        fields = sorted({".".join(str(p) for p in err["loc"]) or "config" for err in e.errors()})
        raise ConfigurationError(f"Invalid configuration values for {', '.join(fields)}: {e}") from e


def parse_key_values(lines: Iterable[str]) -> Dict[str, str]:
    """Parse flat 'key = value' lines; '#' starts a comment"""
    values: Dict[str, str] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"Line {number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"Line {number}: empty key")
        values[key] = value
    return values


def _coerce(value: str) -> Any:
    """Text value to a YAML scalar; 'none'/'null' become None"""
    if value.lower() in {"none", "null", ""}:
        return None
    try:
        return yaml.safe_load(value)
    except yaml.YAMLError:
        return value


class PipelineConfigLoader:
    """Pipeline configuration loader for YAML or key = value files"""

    def __init__(self, config_file: Optional[str] = None):
        """Initialize loader with optional config file path"""
        self.config_file = Path(config_file) if config_file else None

    def read(self) -> Dict[str, Any]:
        """Raw key/value mapping from the config file (empty without one)"""
        if self.config_file is None:
            return {}
        if not self.config_file.exists():
            raise FileNotFoundError(
                f"Pipeline configuration file not found: {self.config_file}\n"
                f"See {get_config_dir() / 'graphloc.example.yml'} for every key and its default."
            )

        text = self.config_file.read_text(encoding="utf-8")
        if self.config_file.suffix in {".yml", ".yaml"}:
            try:
                data = yaml.safe_load(text) or {}
            except yaml.YAMLError as e:
                raise ConfigurationError(f"Invalid YAML in configuration file: {e}") from e
            if not isinstance(data, dict):
                raise ConfigurationError("Configuration file must hold a flat mapping")
            nested = sorted(k for k, v in data.items() if isinstance(v, dict))
            if nested:
                raise ConfigurationError(f"Configuration must be flat; nested keys: {', '.join(nested)}")
            return data

        return {key: _coerce(value) for key, value in parse_key_values(text.splitlines()).items()}

    def load(self, overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
        """File values, then overrides, validated"""
        values = self.read()
        for key, value in (overrides or {}).items():
            values[key] = _coerce(value) if isinstance(value, str) else value
        config = build_pipeline_config(values)
        logger.debug(f"Loaded pipeline configuration from {self.config_file or 'defaults'}")
        return config


def parse_overrides(pairs: Iterable[str]) -> Dict[str, Any]:
    """Command-line 'key=value' overrides"""
    overrides: Dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigurationError(f"Override must look like key=value, got '{pair}'")
        key, value = (part.strip() for part in pair.split("=", 1))
        overrides[key] = _coerce(value)
    return overrides


# Global pipeline configuration
_pipeline_config: Optional[PipelineConfig] = None


def load_pipeline_config(
    config_file: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None
) -> PipelineConfig:
    """Load and cache the pipeline configuration"""
    global _pipeline_config

    if _pipeline_config is None:
        _pipeline_config = PipelineConfigLoader(config_file).load(overrides)
    return _pipeline_config


def get_pipeline_config() -> PipelineConfig:
    """Get cached pipeline configuration"""
    if _pipeline_config is None:
        return load_pipeline_config()
    return _pipeline_config


def reload_pipeline_config(
    config_file: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None
) -> PipelineConfig:
    """Reload pipeline configuration from file"""
    global _pipeline_config
    _pipeline_config = None
    return load_pipeline_config(config_file, overrides)


def describe_keys() -> List[str]:
    """One 'key: default  # description' line per key"""
    lines = []
    for name, field in PipelineConfig.model_fields.items():
        default = field.default
        if isinstance(default, frozenset):
            default = sorted(default)
        lines.append(f"{name}: {default}  # {field.description}")
    return lines
