"""
Dataset file formats

SemanticKITTI-style sequences: velodyne scans (little-endian float32
x, y, z, intensity per point), label files (one little-endian uint32 per
point, class id in the low 16 bits, instance id in the high 16 bits), odometry
poses (12 decimals per line, row-major 3×4 [R | t]) and times.txt (one
timestamp in seconds per line).
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ..errors import InvalidInputError, GraphlocError
from ..models import LabeledScan, Pose, PointSet, SyntheticWorld
from ..services.geometry import nearest_rotation


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SCAN_RECORD_BYTES = 16
LABEL_DTYPE = np.dtype("<u4")
SCAN_DTYPE = np.dtype("<f4")
ORTHONORMAL_WARN_TOL = 1e-3
DEFAULT_SCAN_PERIOD_S = 0.1

# raw SemanticKITTI label -> 20-class training id
LEARNING_MAP: Dict[int, int] = {
    0: 0, 1: 0, 10: 1, 11: 2, 13: 5, 15: 3, 16: 5, 18: 4, 20: 5,
    30: 6, 31: 7, 32: 8, 40: 9, 44: 10, 48: 11, 49: 12, 50: 13, 51: 14,
    52: 0, 60: 9, 70: 15, 71: 16, 72: 17, 80: 18, 81: 19, 99: 0,
    252: 1, 253: 7, 254: 6, 255: 8, 256: 5, 257: 5, 258: 4, 259: 5,
}

LEARNING_MAP_INV: Dict[int, int] = {
    0: 0, 1: 10, 2: 11, 3: 15, 4: 18, 5: 20, 6: 30, 7: 31, 8: 32, 9: 40,
    10: 44, 11: 48, 12: 49, 13: 50, 14: 51, 15: 70, 16: 71, 17: 72, 18: 80, 19: 81,
}

_LEARNING_LUT = np.zeros(1 << 16, dtype=np.int64)
for _raw, _train in LEARNING_MAP.items():
    _LEARNING_LUT[_raw] = _train


class DatasetFormatError(GraphlocError):
    """A dataset file does not follow its binary or text layout"""
    pass


class ScanFormatError(DatasetFormatError):
    pass


class PoseFormatError(DatasetFormatError):
    pass


class LabelCountMismatchError(DatasetFormatError):
    """Label file length disagrees with the scan it annotates"""
    pass


def _existing(path: PathLike) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"File not found: {path}")
    return path


def read_scan(path: PathLike) -> Tuple[PointSet, NDArray[np.float32]]:
    """Points and intensities of one velodyne .bin file"""
    path = _existing(path)
    size = path.stat().st_size
    if size % SCAN_RECORD_BYTES:
        raise ScanFormatError(f"{path}: {size} bytes is not a multiple of {SCAN_RECORD_BYTES}")
    records = np.fromfile(path, dtype=SCAN_DTYPE).reshape(-1, 4)
    return PointSet(records[:, :3].astype(np.float64)), records[:, 3].copy()


def write_scan(path: PathLike, points: NDArray, intensities: Optional[NDArray] = None) -> None:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    records = np.zeros((points.shape[0], 4), dtype=SCAN_DTYPE)
    records[:, :3] = points
    if intensities is not None:
        records[:, 3] = np.asarray(intensities, dtype=np.float64).reshape(-1)
    records.tofile(Path(path))


def read_label_words(path: PathLike, expected_n: Optional[int] = None) -> NDArray[np.uint32]:
    """Raw uint32 label words"""
    path = _existing(path)
    size = path.stat().st_size
    if size % LABEL_DTYPE.itemsize:
        raise DatasetFormatError(f"{path}: {size} bytes is not a multiple of {LABEL_DTYPE.itemsize}")
    words = np.fromfile(path, dtype=LABEL_DTYPE)
    if expected_n is not None and words.shape[0] != expected_n:
        raise LabelCountMismatchError(f"{path}: {words.shape[0]} labels for {expected_n} points")
    return words


def read_labels(path: PathLike, expected_n: Optional[int] = None) -> NDArray[np.int64]:
    """Per-point raw class ids (low 16 bits of each label word)"""
    return (read_label_words(path, expected_n) & 0xFFFF).astype(np.int64)


def write_labels(path: PathLike, class_ids: NDArray, instance_ids: Optional[NDArray] = None) -> None:
    class_ids = np.asarray(class_ids, dtype=np.int64).reshape(-1)
    words = class_ids.astype(np.uint32) & 0xFFFF
    if instance_ids is not None:
        words |= (np.asarray(instance_ids, dtype=np.int64).reshape(-1).astype(np.uint32) & 0xFFFF) << 16
    words.astype(LABEL_DTYPE).tofile(Path(path))


def map_labels(raw: NDArray) -> NDArray[np.int64]:
    """Raw SemanticKITTI ids to training ids; unknown ids become 0"""
    raw = np.asarray(raw, dtype=np.int64)
    return _LEARNING_LUT[raw & 0xFFFF]


def unmap_labels(train: NDArray) -> NDArray[np.int64]:
    """Training ids back to raw SemanticKITTI ids"""
    train = np.asarray(train, dtype=np.int64)
    lut = np.array([LEARNING_MAP_INV[i] for i in range(len(LEARNING_MAP_INV))], dtype=np.int64)
    if train.size and (train.min() < 0 or train.max() >= lut.shape[0]):
        raise InvalidInputError(f"Training ids must lie in [0, {lut.shape[0]})")
    return lut[train]


def labels_to_probs(class_ids: NDArray, num_classes: int = 20) -> NDArray[np.float64]:
    """One-hot probability rows"""
    class_ids = np.asarray(class_ids, dtype=np.int64).reshape(-1)
    if class_ids.size and (class_ids.min() < 0 or class_ids.max() >= num_classes):
        raise InvalidInputError(f"Class ids must lie in [0, {num_classes})")
    probs = np.zeros((class_ids.shape[0], num_classes))
    probs[np.arange(class_ids.shape[0]), class_ids] = 1.0
    return probs


def parse_pose_line(line: str, where: str = "") -> Pose:
    """
    One odometry pose line

    Rotations off SO(3) by more than 1e-3 are re-orthonormalized with a
    warning; smaller deviations (text rounding) are projected silently.
    """
    fields = line.split()
    if len(fields) != 12:
        raise PoseFormatError(f"{where}expected 12 numbers, got {len(fields)}")
    try:
        matrix = np.array([float(f) for f in fields], dtype=np.float64).reshape(3, 4)
    except ValueError as e:
        raise PoseFormatError(f"{where}{e}")
    if not np.all(np.isfinite(matrix)):
        raise PoseFormatError(f"{where}non-finite pose entry")

    rotation = matrix[:, :3]
    error = float(np.max(np.abs(rotation.T @ rotation - np.eye(3))))
    if error > ORTHONORMAL_WARN_TOL or np.linalg.det(rotation) <= 0.0:
        logger.warning(f"{where}rotation off SO(3) by {error:.2e}, re-orthonormalizing")
    return Pose(nearest_rotation(rotation), matrix[:, 3])


def read_poses(path: PathLike) -> List[Pose]:
    path = _existing(path)
    poses = []
    with open(path, "r") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            poses.append(parse_pose_line(line, where=f"{path}:{number}: "))
    return poses


def write_poses(path: PathLike, poses: Sequence[Pose]) -> None:
    with open(Path(path), "w") as f:
        for pose in poses:
            row = np.hstack([pose.rotation, pose.translation[:, None]]).reshape(-1)
            f.write(" ".join(f"{value:.17g}" for value in row) + "\n")


def read_times(path: PathLike) -> NDArray[np.float64]:
    path = _existing(path)
    values = []
    with open(path, "r") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise DatasetFormatError(f"{path}:{number}: not a timestamp: {line.strip()!r}")
    return np.array(values, dtype=np.float64)


def write_times(path: PathLike, times: Sequence[float]) -> None:
    with open(Path(path), "w") as f:
        for t in times:
            f.write(f"{float(t):.17g}\n")


def load_sequence(
    sequence_dir: PathLike,
    num_classes: int = 20,
    limit: Optional[int] = None,
) -> List[LabeledScan]:
    """
    Labeled scans of one sequence directory

    Expects velodyne/*.bin, labels/*.label and poses.txt; times.txt is
    optional (10 Hz spacing is assumed without it). Poses are read in the
    sensor frame; no camera calibration is applied.
    """
    root = Path(sequence_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"Sequence directory not found: {root}")
    scan_files = sorted((root / "velodyne").glob("*.bin"))
    if limit is not None:
        scan_files = scan_files[:limit]
    poses = read_poses(root / "poses.txt")
    if len(poses) < len(scan_files):
        raise InvalidInputError(f"{root}: {len(poses)} poses for {len(scan_files)} scans")

    times_path = root / "times.txt"
    if times_path.is_file():
        times = read_times(times_path)
        if times.shape[0] < len(scan_files):
            raise InvalidInputError(f"{root}: {times.shape[0]} timestamps for {len(scan_files)} scans")
    else:
        logger.warning(f"{root}: no times.txt, assuming {DEFAULT_SCAN_PERIOD_S}s scan period")
        times = np.arange(len(scan_files)) * DEFAULT_SCAN_PERIOD_S

    scans = []
    for i, scan_file in enumerate(scan_files):
        points, _ = read_scan(scan_file)
        raw = read_labels(root / "labels" / f"{scan_file.stem}.label", expected_n=len(points))
        scans.append(
            LabeledScan(
                points=points.points,
                class_probs=labels_to_probs(map_labels(raw), num_classes),
                timestamp=float(times[i]),
                pose=poses[i],
            )
        )
    logger.info(f"Loaded {len(scans)} scans from {root}")
    return scans


def write_world(world: SyntheticWorld, out_dir: PathLike) -> Path:
    """
    Emit a synthetic world as a sequence directory load_sequence reads

    One scan per submap (voxel centroids in the submap frame, zero intensity)
    with raw labels, poses.txt, times.txt and revisits.jsonl.
    """
    root = Path(out_dir)
    (root / "velodyne").mkdir(parents=True, exist_ok=True)
    (root / "labels").mkdir(parents=True, exist_ok=True)

    for entry in world.entries:
        grid = entry.submap.grid
        name = f"{entry.submap.id:06d}"
        write_scan(root / "velodyne" / f"{name}.bin", grid.centroids)
        write_labels(root / "labels" / f"{name}.label", unmap_labels(grid.cell_classes))

    write_poses(root / "poses.txt", [e.pose for e in world.entries])
    write_times(root / "times.txt", [e.timestamp for e in world.entries])
    with open(root / "revisits.jsonl", "w") as f:
        for query, match in world.revisits:
            f.write(json.dumps({"query": query, "match": match}) + "\n")

    logger.info(f"Wrote {len(world)} submaps to {root}")
    return root


def read_revisits(path: PathLike) -> List[Tuple[int, int]]:
    """(query id, match id) pairs of a revisits.jsonl file"""
    path = _existing(path)
    pairs = []
    with open(path, "r") as f:
        for line in f:
            if line.strip():
                record = json.loads(line)
                pairs.append((int(record["query"]), int(record["match"])))
    return pairs
