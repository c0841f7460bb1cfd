"""
Local object descriptors

Descriptors are produced through a pluggable backend. The reference backend is
a deterministic 128-d feature built only from rotation- and
translation-invariant scalars of the object's point sample.
"""

import logging
from typing import Dict, Protocol, Sequence, Type

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import pdist

from ..config import ConfigurationError
from ..errors import InvalidInputError
from ..models import DESCRIPTOR_DIM, LocalDescriptor, ObjectInstance
from .instance_clustering import DEFAULT_SAMPLE_POINTS, farthest_point_order


logger = logging.getLogger(__name__)

HISTOGRAM_BINS = 32
MAX_CLASSES = 32
# 91 points give 4095 pairs, the largest all-pairs set within 4096
PAIR_POINTS = 91
DEGENERATE_RADIUS = 1e-12
COUNT_SCALE = np.log(DEFAULT_SAMPLE_POINTS)

# slot layout of the 128-d vector
_RADIAL = slice(0, 32)
_PAIRWISE = slice(32, 64)
_EIGEN = slice(64, 67)
_MOMENTS = slice(67, 71)
_RADIUS = 71
_COUNT = 72
_CLASS = slice(73, 73 + MAX_CLASSES)


class DescriptorBackend(Protocol):
    """Maps a P×3 object sample and its class to a LocalDescriptor"""

    name: str

    def describe(self, sample: NDArray, class_id: int) -> LocalDescriptor:
        ...


def _normalized_histogram(values: NDArray) -> NDArray[np.float64]:
    counts, _ = np.histogram(values, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    return counts / max(values.shape[0], 1)


def describe_reference(sample: NDArray, class_id: int) -> LocalDescriptor:
    """
    Reference invariant descriptor

    Slots: 32-bin histogram of distances to the centroid, 32-bin histogram of
    pairwise distances among the first 91 farthest-point picks, covariance
    eigenvalues normalized by their sum, mean and 2nd–4th central moments of
    the radial distances, bounding-sphere radius, log distinct-point count,
    class one-hot; zero padded to 128 and L2-normalized. Distance ranges are
    normalized by the bounding-sphere radius. A sample whose points all
    coincide keeps only the class and count slots.
    """
    points = np.asarray(sample, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        raise InvalidInputError("Cannot describe an empty sample")
    if not np.all(np.isfinite(points)):
        raise InvalidInputError("Sample contains non-finite coordinates")
    if not 0 <= class_id < MAX_CLASSES:
        raise InvalidInputError(f"class_id must be in [0, {MAX_CLASSES}), got {class_id}")

    values = np.zeros(DESCRIPTOR_DIM)
    values[_CLASS][class_id] = 1.0
    distinct = np.unique(points, axis=0).shape[0]
    values[_COUNT] = np.log(distinct) / COUNT_SCALE

    offsets = points - points.mean(axis=0)
    radial = np.sqrt(np.einsum("ij,ij->i", offsets, offsets))
    radius = float(radial.max())

    if radius > DEGENERATE_RADIUS:
        unit_radial = radial / radius
        values[_RADIAL] = _normalized_histogram(unit_radial)

        picks = farthest_point_order(points, min(PAIR_POINTS, points.shape[0]))
        if picks.shape[0] > 1:
            values[_PAIRWISE] = _normalized_histogram(pdist(points[picks]) / (2.0 * radius))

        eigenvalues = np.sort(np.linalg.eigvalsh(np.cov(offsets, rowvar=False, bias=True)))[::-1]
        eigenvalues = np.clip(eigenvalues, 0.0, None)
        values[_EIGEN] = eigenvalues / eigenvalues.sum()

        mean = unit_radial.mean()
        centered = unit_radial - mean
        values[_MOMENTS] = [mean, np.mean(centered ** 2), np.mean(centered ** 3), np.mean(centered ** 4)]
        values[_RADIUS] = radius

    return LocalDescriptor(values / np.linalg.norm(values))


class ReferenceDescriptorBackend:
    """Deterministic invariant descriptor; stands in for a learned encoder"""

    name = "reference"

    def describe(self, sample: NDArray, class_id: int) -> LocalDescriptor:
        return describe_reference(sample, class_id)


class DescriptorBackendFactory:
    """Factory for descriptor backends selected by configuration key"""

    _backends: Dict[str, Type] = {"reference": ReferenceDescriptorBackend}
    # reserved for a learned encoder loading weight files
    _reserved = frozenset({"learned"})

    @classmethod
    def create(cls, name: str) -> DescriptorBackend:
        """Create a backend instance by name"""
        if name in cls._reserved:
            raise ConfigurationError(f"Descriptor backend '{name}' is reserved and not available in this build")
        if name not in cls._backends:
            raise ConfigurationError(
                f"Unknown descriptor backend '{name}'; available: {sorted(cls._backends)}"
            )
        logger.debug(f"Creating descriptor backend: {name}")
        return cls._backends[name]()

    @classmethod
    def register(cls, name: str, backend: Type) -> None:
        """Register an additional backend implementation"""
        cls._backends[name] = backend
        logger.info(f"Registered descriptor backend: {name}")


def get_descriptor_backend(name: str = "reference") -> DescriptorBackend:
    """Get a descriptor backend by name"""
    return DescriptorBackendFactory.create(name)


def describe_instances(instances: Sequence[ObjectInstance], backend: DescriptorBackend) -> NDArray[np.float64]:
    """K×128 descriptor matrix for a list of instances"""
    if not instances:
        return np.zeros((0, DESCRIPTOR_DIM))
    return np.stack([backend.describe(inst.sampled, inst.class_id).values for inst in instances])
