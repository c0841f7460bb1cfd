"""
Command runner

Every command reads its inputs from explicit paths or from the standard file
names inside the output directory, so `synth`, `build`, `extract`, `index`,
`query`, `eval-pr` and `eval-reg` chain with one --out directory.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table

from ..config import PipelineConfig, ensure_directories, parse_overrides, reload_pipeline_config
from ..database import load_graph_records, load_submaps, save_graph_records, save_submaps, save_weights
from ..errors import CommandUsageError
from ..middleware import CommandErrorHandler, CommandLoggingHandler
from ..models import (
    ClassificationMode,
    IndexRecord,
    PlaceRecognitionReport,
    Pose,
    RegistrationReport,
    RevisitDecision,
    WorldSpec,
)
from ..services import (
    GraphRegistrar,
    InsufficientDataError,
    LoopClosureDetector,
    PlaceIndex,
    SubmapProcessor,
    aggregate_registration,
    build_submaps,
    eval_place_recognition,
    eval_registration,
    generate_world,
    initialize_weights,
    relative,
)
from ..utils import load_sequence, read_jsonl, write_jsonl, write_world


logger = logging.getLogger(__name__)

SEQUENCE_DIR = "sequence"
SUBMAPS_FILE = "submaps.rgrc"
GRAPHS_FILE = "graphs.rgrc"
INDEX_FILE = "index.rgrc"
WEIGHTS_FILE = "weights.rgrc"
DECISIONS_FILE = "decisions.jsonl"
PR_CURVE_FILE = "pr_curve.jsonl"
METRICS_FILE = "metrics.jsonl"
REGISTRATIONS_FILE = "registrations.jsonl"
PAIRS_FILE = "pairs.jsonl"


def _option(options: Dict[str, Any], key: str, default: Any) -> Any:
    value = options.get(key)
    return default if value is None else value


def _input(options: Dict[str, Any], key: str, out: Path, default_name: str) -> Path:
    """Explicit input path, or the standard file in the output directory"""
    value = options.get(key)
    path = Path(value) if value else out / default_name
    if not path.exists():
        raise CommandUsageError(f"Missing input {path}; pass --{key.replace('_', '-')}")
    return path


def _ordered(records: Iterable[IndexRecord]) -> List[IndexRecord]:
    return sorted(records, key=lambda r: (r.timestamp, r.id))


def _map(func: Callable, items: Sequence, workers: int) -> List:
    """Ordered map over a bounded thread pool"""
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def run_synth(config: PipelineConfig, out: Path, **options) -> int:
    """Generate a synthetic world and emit it as a sequence directory"""
    defaults = WorldSpec()
    spec = WorldSpec(
        seed=config.seed,
        submap_count=_option(options, "submaps", defaults.submap_count),
        revisit_fraction=_option(options, "revisit_fraction", defaults.revisit_fraction),
        noise_sigma=_option(options, "noise", defaults.noise_sigma),
        dropout=_option(options, "dropout", defaults.dropout),
        num_classes=config.num_classes,
    )
    world = generate_world(spec, voxel_size=config.voxel_size)
    write_world(world, out / SEQUENCE_DIR)
    return 0


def run_build(config: PipelineConfig, out: Path, **options) -> int:
    """Scans -> submap container"""
    sequence = _input(options, "sequence", out, SEQUENCE_DIR)
    scans = load_sequence(sequence, config.num_classes, limit=options.get("limit"))
    if not scans:
        raise CommandUsageError(f"No scans found in {sequence}")
    submaps = build_submaps(scans, config.max_span, config.voxel_size)
    save_submaps(out / SUBMAPS_FILE, submaps)
    return 0


def run_extract(config: PipelineConfig, out: Path, **options) -> int:
    """Submaps -> scene graphs with embeddings"""
    submaps = load_submaps(_input(options, "submaps", out, SUBMAPS_FILE))
    processor = SubmapProcessor(config)
    records = processor.records(submaps, config.workers)
    save_graph_records(out / GRAPHS_FILE, records)
    return 0


def run_index(config: PipelineConfig, out: Path, **options) -> int:
    """Graph records -> retrieval index"""
    records = load_graph_records(_input(options, "graphs", out, GRAPHS_FILE))
    PlaceIndex(_ordered(records)).flush(out / INDEX_FILE)
    return 0


def _decide_all(
    detector: LoopClosureDetector, queries: Sequence[IndexRecord], workers: int
) -> List[Dict[ClassificationMode, RevisitDecision]]:
    return _map(lambda q: detector.classify_all(q.id, q.graph, q.timestamp), queries, workers)


def run_query(config: PipelineConfig, out: Path, **options) -> int:
    """Per-query revisit decisions against an index"""
    index = PlaceIndex.load(_input(options, "index", out, INDEX_FILE))
    queries = _ordered(load_graph_records(_input(options, "graphs", out, GRAPHS_FILE)))
    if len(index) == 0:
        logger.warning("Index is empty; no decisions to make")
        write_jsonl(out / DECISIONS_FILE, [])
        return 0

    mode = ClassificationMode(config.classification)
    decisions = [d[mode] for d in _decide_all(LoopClosureDetector(index, config), queries, config.workers)]
    write_jsonl(out / DECISIONS_FILE, decisions)
    logger.info(f"{sum(d.is_revisit for d in decisions)} of {len(decisions)} queries declared revisits")
    return 0


def _read_pairs(path: Path) -> List[Tuple[int, int]]:
    pairs = []
    for record in read_jsonl(path):
        if "query" not in record or "candidate" not in record:
            raise CommandUsageError(f"{path}: pair records need 'query' and 'candidate'")
        pairs.append((int(record["query"]), int(record["candidate"])))
    return pairs


def _registration_record(result) -> Dict:
    return {
        "query": result.query_id,
        "candidate": result.candidate_id,
        "transform": result.refined.transform.as_matrix().tolist(),
        "coarse_transform": result.coarse.transform.as_matrix().tolist(),
        "inliers": len(result.coarse.inliers),
        "rmse": result.refined.rmse,
        "degraded": result.refined.degraded,
    }


def _register_pairs(
    config: PipelineConfig, records: Dict[int, IndexRecord], pairs: Sequence[Tuple[int, int]]
) -> List[Tuple[Tuple[int, int], Optional[Any]]]:
    registrar = GraphRegistrar(config)

    def register(pair: Tuple[int, int]):
        query, candidate = records[pair[0]], records[pair[1]]
        try:
            return pair, registrar.register(query.graph, candidate.graph, query.id, candidate.id)
        except InsufficientDataError as e:
            logger.warning(f"Pair {pair[0]}/{pair[1]} not registered: {e}")
            return pair, None

    return _map(register, pairs, config.workers)


def run_register(config: PipelineConfig, out: Path, **options) -> int:
    """Transforms for listed query/candidate pairs"""
    records = {r.id: r for r in load_graph_records(_input(options, "graphs", out, GRAPHS_FILE))}
    pairs = _read_pairs(_input(options, "pairs", out, PAIRS_FILE))
    missing = sorted({i for pair in pairs for i in pair} - set(records))
    if missing:
        raise CommandUsageError(f"Pairs reference unknown submaps: {missing[:10]}")

    results = [
        _registration_record(result) if result else {"query": q, "candidate": c, "transform": None}
        for (q, c), result in _register_pairs(config, records, pairs)
    ]
    write_jsonl(out / REGISTRATIONS_FILE, results)
    return 0


def pairs_within(records: Sequence[IndexRecord], radius: float) -> List[Tuple[int, int]]:
    """(later id, earlier id) for every record pair whose ground-truth positions lie within radius"""
    ordered = _ordered(records)
    positions = np.stack([r.position for r in ordered]) if ordered else np.zeros((0, 3))
    pairs = []
    for j in range(len(ordered)):
        distances = np.linalg.norm(positions[:j] - positions[j], axis=1)
        pairs.extend((ordered[j].id, ordered[i].id) for i in np.flatnonzero(distances <= radius))
    return pairs


def _print_place_table(reports: Sequence[PlaceRecognitionReport], console: Console) -> None:
    table = Table(title="Place recognition")
    for column in ("mode", "queries", "revisits", "R@1", "R@5", "F1max", "threshold"):
        table.add_column(column)
    for r in reports:
        threshold = "-" if r.f1_threshold is None else f"{r.f1_threshold:.4f}"
        table.add_row(
            r.mode, str(r.query_count), str(r.revisit_count),
            f"{r.recall_at_1:.3f}", f"{r.recall_at_5:.3f}", f"{r.f1_max:.3f}", threshold,
        )
    console.print(table)


def run_eval_pr(config: PipelineConfig, out: Path, **options) -> int:
    """Online place recognition over a sequence of graph records, every mode"""
    records = _ordered(load_graph_records(_input(options, "graphs", out, GRAPHS_FILE)))
    positions = {r.id: r.position for r in records}
    timestamps = {r.id: r.timestamp for r in records}

    if options.get("decisions"):
        decisions = [RevisitDecision(**d) for d in read_jsonl(_input(options, "decisions", out, DECISIONS_FILE))]
        by_mode: Dict[ClassificationMode, List[RevisitDecision]] = {}
        for decision in decisions:
            by_mode.setdefault(decision.mode, []).append(decision)
    else:
        index = PlaceIndex(records)
        all_decisions = _decide_all(LoopClosureDetector(index, config), records, config.workers)
        by_mode = {mode: [d[mode] for d in all_decisions] for mode in ClassificationMode}
        write_jsonl(
            out / DECISIONS_FILE, [d[ClassificationMode(config.classification)] for d in all_decisions]
        )

    reports = [
        eval_place_recognition(
            decisions, positions, timestamps, config.exclusion_s, config.r_tp, config.r_fp, mode=mode.value
        )
        for mode, decisions in by_mode.items()
    ]
    write_jsonl(out / METRICS_FILE, [r.model_dump(exclude={"curve"}) for r in reports])
    write_jsonl(
        out / PR_CURVE_FILE,
        [{"mode": r.mode, **point.model_dump()} for r in reports for point in r.curve],
    )
    _print_place_table(reports, Console())
    return 0


def _print_registration_table(report: RegistrationReport, console: Console) -> None:
    row = report.as_row()
    table = Table(title=f"Registration (success: RRE <= {report.rre_max} deg, RTE <= {report.rte_max} m)")
    for column in row:
        table.add_column(column)
    table.add_row(*row.values())
    console.print(table)


def run_eval_reg(config: PipelineConfig, out: Path, **options) -> int:
    """Register every submap pair within register_radius and score against ground truth"""
    records = load_graph_records(_input(options, "graphs", out, GRAPHS_FILE))
    by_id = {r.id: r for r in records}
    pairs = pairs_within(records, config.register_radius)
    logger.info(f"Registering {len(pairs)} pairs within {config.register_radius} m")

    rows, evaluations = [], []
    for (q, c), result in _register_pairs(config, by_id, pairs):
        gt = relative(by_id[q].world_pose, by_id[c].world_pose)
        # unregistered pairs count with the identity estimate
        estimate = result.refined.transform if result else Pose.identity()
        evaluation = eval_registration(estimate, gt, config.rre_max, config.rte_max)
        row = _registration_record(result) if result else {"query": q, "candidate": c, "transform": None}
        rows.append({**row, **evaluation.model_dump()})
        evaluations.append(evaluation)

    report = aggregate_registration(evaluations, config.rre_max, config.rte_max)
    write_jsonl(out / REGISTRATIONS_FILE, rows)
    write_jsonl(out / METRICS_FILE, [report])
    _print_registration_table(report, Console())
    return 0


def run_init_weights(config: PipelineConfig, out: Path, **options) -> int:
    """Seeded random network weights"""
    weights = initialize_weights(
        seed=config.weights_seed,
        hidden_dim=config.egnn_hidden,
        layers=config.egnn_layers,
        enriched_dim=config.enriched_dim,
        embedding_dim=config.embedding_dim,
        slices=config.tnn_slices,
        gem_lambda=config.gem_lambda,
    )
    save_weights(out / WEIGHTS_FILE, weights)
    return 0


COMMANDS: Dict[str, Callable[..., int]] = {
    "synth": run_synth,
    "build": run_build,
    "extract": run_extract,
    "index": run_index,
    "query": run_query,
    "register": run_register,
    "eval-pr": run_eval_pr,
    "eval-reg": run_eval_reg,
    "init-weights": run_init_weights,
}


def _dispatch(command: str, config: PipelineConfig, out: Optional[str], options: Dict[str, Any]) -> int:
    if command not in COMMANDS:
        raise CommandUsageError(f"Unknown command '{command}'; available: {sorted(COMMANDS)}")
    out_dir = Path(out or config.out_dir)
    ensure_directories(out_dir)
    return COMMANDS[command](config, out_dir, **options)


def run(command: str, config: Optional[PipelineConfig] = None, out: Optional[str] = None, **options) -> int:
    """Run one command; returns its exit status"""
    config = config or PipelineConfig()
    handler = CommandErrorHandler(command)
    with CommandLoggingHandler(command, handler.run_id):
        return handler.run(_dispatch, command, config, out, options)


def invoke(
    command: str,
    config_file: Optional[str] = None,
    overrides: Sequence[str] = (),
    out: Optional[str] = None,
    **options,
) -> int:
    """Load the configuration (file, then key=value overrides) and run a command"""
    handler = CommandErrorHandler(command)

    def load_and_dispatch() -> int:
        config = reload_pipeline_config(config_file, parse_overrides(overrides))
        return _dispatch(command, config, out, options)

    with CommandLoggingHandler(command, handler.run_id):
        return handler.run(load_and_dispatch)
