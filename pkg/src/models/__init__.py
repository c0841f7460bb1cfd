"""
Data models package for GraphLoc
"""

# Geometry models
from .geometry import (
    ORTHONORMAL_TOL,
    Pose,
    PointSet,
)

# Submap models
from .submap import (
    LabeledScan,
    SemanticVoxelGrid,
    Submap,
)

# Instance models
from .instances import (
    DEFAULT_EXCLUDED_CLASSES,
    ClusterParams,
    ObjectInstance,
)

# Descriptor models
from .descriptors import (
    DESCRIPTOR_DIM,
    LocalDescriptor,
)

# Graph models
from .graph import (
    SceneGraph,
    LinearWeights,
    EgnnLayerWeights,
    NetWeights,
)

# Training models
from .training import (
    TripletSpec,
    BatchSample,
    BatchObjective,
)

# Retrieval models
from .retrieval import (
    ClassificationMode,
    IndexRecord,
    RankedCandidate,
    RevisitDecision,
)

# Registration models
from .registration import (
    MIN_INLIERS,
    RegistrationStage,
    Correspondence,
    TransformEstimate,
    RegistrationResult,
    RegistrationEvaluation,
)

# Synthetic models
from .synthetic import (
    DEFAULT_PALETTE,
    SceneSpec,
    WorldSpec,
    SyntheticPair,
    WorldEntry,
    SyntheticWorld,
)

# Common models
from .common import (
    ErrorDetail,
    PrecisionRecallPoint,
    PlaceRecognitionReport,
    RegistrationReport,
)

__all__ = [
    # Geometry models
    "ORTHONORMAL_TOL",
    "Pose",
    "PointSet",

    # Submap models
    "LabeledScan",
    "SemanticVoxelGrid",
    "Submap",

    # Instance models
    "DEFAULT_EXCLUDED_CLASSES",
    "ClusterParams",
    "ObjectInstance",

    # Descriptor models
    "DESCRIPTOR_DIM",
    "LocalDescriptor",

    # Graph models
    "SceneGraph",
    "LinearWeights",
    "EgnnLayerWeights",
    "NetWeights",

    # Training models
    "TripletSpec",
    "BatchSample",
    "BatchObjective",

    # Retrieval models
    "ClassificationMode",
    "IndexRecord",
    "RankedCandidate",
    "RevisitDecision",

    # Registration models
    "MIN_INLIERS",
    "RegistrationStage",
    "Correspondence",
    "TransformEstimate",
    "RegistrationResult",
    "RegistrationEvaluation",

    # Synthetic models
    "DEFAULT_PALETTE",
    "SceneSpec",
    "WorldSpec",
    "SyntheticPair",
    "WorldEntry",
    "SyntheticWorld",

    # Common models
    "ErrorDetail",
    "PrecisionRecallPoint",
    "PlaceRecognitionReport",
    "RegistrationReport",
]
