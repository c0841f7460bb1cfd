"""
Synthetic scenes and worlds

Deterministic generators of labeled submaps with ground truth. Objects are
surface samples of four primitive families (box, ellipsoid, cylinder shell,
vertical plane patch) chosen by class, so descriptors differ across classes.
Every draw comes from a numpy Generator seeded from SceneSpec.seed or WorldSpec.seed.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError
from ..models import (
    Pose,
    SceneSpec,
    Submap,
    SyntheticPair,
    SyntheticWorld,
    WorldEntry,
    WorldSpec,
)
from .geometry import apply, axis_angle_pose
from .submap_builder import DEFAULT_VOXEL_SIZE, voxelize


logger = logging.getLogger(__name__)

POINTS_PER_M2 = 500
MIN_OBJECT_POINTS = 200
MIN_SEPARATION_M = 4.0
PLACEMENT_ATTEMPTS = 2000
REVISIT_YAW_JITTER_DEG = 10.0

BOX, ELLIPSOID, CYLINDER, PLANE = range(4)
FAMILY_NAMES = ("box", "ellipsoid", "cylinder", "plane")


@dataclass(frozen=True)
class ObjectShape:
    """A primitive in world or scene coordinates: family, size, yaw, center and class"""

    family: int
    size: Tuple[float, float, float]
    yaw: float
    center: NDArray[np.float64]
    class_id: int


# car, truck, building, fence, vegetation, trunk, pole, traffic-sign
FAMILY_BY_CLASS = {1: BOX, 4: BOX, 13: PLANE, 14: PLANE, 15: ELLIPSOID, 16: CYLINDER, 18: CYLINDER, 19: ELLIPSOID}


def family_of(class_id: int) -> int:
    """Primitive family of a class; classes outside the map cycle through the families"""
    return FAMILY_BY_CLASS.get(int(class_id), int(class_id) % 4)


def _draw_size(rng: np.random.Generator, family: int) -> Tuple[float, float, float]:
    if family == BOX:
        dims = rng.uniform(0.5, 1.0, size=3)  # edge lengths
    elif family == ELLIPSOID:
        dims = rng.uniform(0.35, 0.6, size=3)  # semi-axes
    elif family == CYLINDER:
        dims = np.array([rng.uniform(0.3, 0.5), 0.0, rng.uniform(1.0, 2.0)])  # radius, -, height
    else:
        dims = np.array([rng.uniform(1.5, 2.5), 0.0, rng.uniform(0.8, 1.5)])  # width, -, height
    return tuple(float(d) for d in dims)


def _surface_area(family: int, size: Tuple[float, float, float]) -> float:
    a, b, c = size
    if family == BOX:
        return 2.0 * (a * b + b * c + a * c)
    if family == ELLIPSOID:
        p = 1.6075
        return 4.0 * np.pi * (((a * b) ** p + (a * c) ** p + (b * c) ** p) / 3.0) ** (1.0 / p)
    if family == CYLINDER:
        return 2.0 * np.pi * a * c
    return a * c


def sample_surface(rng: np.random.Generator, family: int, size: Tuple[float, float, float]) -> NDArray:
    """Points on the primitive's surface in its local frame (centered, z up)"""
    a, b, c = size
    n = max(MIN_OBJECT_POINTS, int(np.ceil(_surface_area(family, size) * POINTS_PER_M2)))

    if family == BOX:
        half = np.array([a, b, c]) / 2.0
        face_areas = np.array([b * c, b * c, a * c, a * c, a * b, a * b])
        faces = rng.choice(6, size=n, p=face_areas / face_areas.sum())
        points = rng.uniform(-half, half, size=(n, 3))
        axis = faces // 2
        sign = np.where(faces % 2 == 0, -1.0, 1.0)
        points[np.arange(n), axis] = sign * half[axis]
        return points

    if family == ELLIPSOID:
        directions = rng.normal(size=(n, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        return directions * np.array([a, b, c])

    if family == CYLINDER:
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        z = rng.uniform(-c / 2.0, c / 2.0, size=n)
        return np.column_stack([a * np.cos(theta), a * np.sin(theta), z])

    u = rng.uniform(-a / 2.0, a / 2.0, size=n)
    v = rng.uniform(-c / 2.0, c / 2.0, size=n)
    return np.column_stack([u, np.zeros(n), v])


def _object_points(rng: np.random.Generator, shape: ObjectShape) -> NDArray:
    local = sample_surface(rng, shape.family, shape.size)
    placement = axis_angle_pose((0.0, 0.0, 1.0), np.degrees(shape.yaw), shape.center)
    return apply(placement, local)


def _half_height(family: int, size: Tuple[float, float, float]) -> float:
    return size[2] if family == ELLIPSOID else size[2] / 2.0


def place_objects(
    rng: np.random.Generator,
    count: int,
    palette: Sequence[int],
    extent: float,
    origin: Optional[NDArray] = None,
) -> List[ObjectShape]:
    """count primitives on the ground inside [-extent, extent]² around origin, centers ≥ 4 m apart"""
    origin = np.zeros(3) if origin is None else np.asarray(origin, dtype=np.float64)
    centers: List[NDArray] = []
    for _ in range(PLACEMENT_ATTEMPTS):
        if len(centers) == count:
            break
        xy = rng.uniform(-extent, extent, size=2)
        if all(np.linalg.norm(xy - c[:2]) >= MIN_SEPARATION_M for c in centers):
            centers.append(np.array([xy[0], xy[1], 0.0]))
    if len(centers) < count:
        raise InvalidInputError(
            f"Cannot place {count} objects {MIN_SEPARATION_M} m apart within ±{extent} m"
        )

    shapes = []
    for center in centers:
        class_id = int(rng.choice(palette))
        family = family_of(class_id)
        size = _draw_size(rng, family)
        yaw = float(rng.uniform(0.0, 2.0 * np.pi))
        center = center + origin + np.array([0.0, 0.0, _half_height(family, size)])
        shapes.append(ObjectShape(family, size, yaw, center, class_id))
    return shapes


def render_submap(
    rng: np.random.Generator,
    shapes: Sequence[ObjectShape],
    frame: Pose,
    submap_id: int,
    timestamp: float,
    num_classes: int,
    noise_sigma: float = 0.0,
    voxel_size: float = DEFAULT_VOXEL_SIZE,
) -> Submap:
    """Freshly sampled surfaces of shapes, expressed in frame and voxelized"""
    to_frame = frame.inverse()
    points, probs = [], []
    for shape in shapes:
        world = _object_points(rng, shape)
        if noise_sigma > 0.0:
            world = world + rng.normal(scale=noise_sigma, size=world.shape)
        points.append(apply(to_frame, world))
        row = np.zeros((world.shape[0], num_classes))
        row[:, shape.class_id] = 1.0
        probs.append(row)

    if points:
        grid = voxelize(np.concatenate(points), np.concatenate(probs), voxel_size)
    else:
        grid = voxelize(np.zeros((0, 3)), np.zeros((0, num_classes)), voxel_size)
    return Submap(id=submap_id, origin=frame, timestamp=timestamp, grid=grid)


def random_transform(
    rng: np.random.Generator, max_rotation_deg: float, max_translation_m: float, yaw_only: bool = True
) -> Pose:
    """Rotation of uniform angle up to the bound about z (or a random axis), translation of bounded length"""
    axis = np.array([0.0, 0.0, 1.0]) if yaw_only else rng.normal(size=3)
    if not yaw_only and np.linalg.norm(axis) == 0.0:
        axis = np.array([0.0, 0.0, 1.0])
    angle = rng.uniform(-max_rotation_deg, max_rotation_deg)
    direction = rng.normal(size=3)
    if yaw_only:
        direction[2] = 0.0
    norm = np.linalg.norm(direction)
    direction = direction / norm if norm > 0 else np.array([1.0, 0.0, 0.0])
    return axis_angle_pose(axis, angle, direction * rng.uniform(0.0, max_translation_m))


def generate_pair(spec: SceneSpec) -> SyntheticPair:
    """
    Submap A with K objects and B, a rigidly moved re-observation of A

    B has per-point Gaussian noise, per-object dropout and independently
    re-sampled surfaces. gt maps B coordinates into A's frame; A's frame is
    the world frame.
    """
    rng = np.random.default_rng(spec.seed)
    shapes = place_objects(rng, spec.object_count, spec.palette, spec.extent_m)
    gt = random_transform(rng, spec.max_rotation_deg, spec.max_translation_m, spec.yaw_only)
    kept = np.flatnonzero(rng.random(len(shapes)) >= spec.dropout)

    a = render_submap(rng, shapes, Pose.identity(), 0, 0.0, spec.num_classes)
    b = render_submap(
        rng, [shapes[i] for i in kept], gt, 1, 1.0, spec.num_classes, noise_sigma=spec.noise_sigma
    )

    centers_a = np.array([s.center for s in shapes])
    centers_b = apply(gt.inverse(), centers_a[kept]) if kept.size else np.zeros((0, 3))
    logger.debug(f"Pair seed={spec.seed}: {len(shapes)} objects in A, {kept.size} in B")
    return SyntheticPair(
        a=a,
        b=b,
        gt=gt,
        correspondences=tuple((int(i), j) for j, i in enumerate(kept)),
        centers_a=centers_a,
        centers_b=centers_b,
        classes_a=np.array([s.class_id for s in shapes], dtype=np.int64),
    )


def _place_pose(spec: WorldSpec, place: int) -> Pose:
    return Pose(np.eye(3), np.array([place * spec.step_m, 0.0, 0.0]))


def _revisit_pose(rng: np.random.Generator, spec: WorldSpec, place: int) -> Pose:
    low, high = spec.revisit_offset_m
    angle = rng.uniform(0.0, 2.0 * np.pi)
    offset = rng.uniform(low, high) * np.array([np.cos(angle), np.sin(angle), 0.0])
    heading = 180.0 if rng.random() < spec.reverse_fraction else 0.0
    heading += rng.uniform(-REVISIT_YAW_JITTER_DEG, REVISIT_YAW_JITTER_DEG)
    return axis_angle_pose((0.0, 0.0, 1.0), heading, _place_pose(spec, place).translation + offset)


def generate_world(spec: WorldSpec, voxel_size: float = DEFAULT_VOXEL_SIZE) -> SyntheticWorld:
    """
    Trajectory of fresh places with late revisits

    Fresh places lie step_m apart along x. The last round(revisit_fraction ·
    submap_count) submaps each revisit a distinct earlier place at least
    min_revisit_gap_s older, offset within revisit_offset_m and with reversed
    heading for a reverse_fraction share.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.submap_count
    revisit_count = int(round(spec.revisit_fraction * n))
    gap = int(np.ceil(spec.min_revisit_gap_s / spec.scan_period_s - 1e-9))
    fresh_count = n - revisit_count
    eligible = max(0, min(fresh_count, fresh_count - gap + 1))
    if revisit_count > eligible:
        logger.warning(
            f"Only {eligible} places are old enough to revisit; reducing revisits from {revisit_count}"
        )
        revisit_count = eligible
        fresh_count = n - revisit_count

    places = [place_objects(rng, spec.object_count, spec.palette, spec.extent_m, _place_pose(spec, p).translation)
              for p in range(fresh_count)]
    targets = rng.permutation(max(0, fresh_count - gap + 1))[:revisit_count] if revisit_count else []

    entries = []
    for k in range(n):
        timestamp = k * spec.scan_period_s
        if k < fresh_count:
            pose = _place_pose(spec, k)
            submap = render_submap(rng, places[k], pose, k, timestamp, spec.num_classes, voxel_size=voxel_size)
            entries.append(WorldEntry(submap=submap, pose=pose, timestamp=timestamp))
            continue

        place = int(targets[k - fresh_count])
        pose = _revisit_pose(rng, spec, place)
        kept = [s for s in places[place] if rng.random() >= spec.dropout]
        submap = render_submap(
            rng, kept, pose, k, timestamp, spec.num_classes, noise_sigma=spec.noise_sigma, voxel_size=voxel_size
        )
        entries.append(WorldEntry(submap=submap, pose=pose, timestamp=timestamp, revisit_of=place))

    logger.info(f"Generated world seed={spec.seed}: {n} submaps, {revisit_count} revisits")
    return SyntheticWorld(spec=spec, entries=tuple(entries))
