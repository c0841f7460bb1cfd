"""
Command-line interface
"""

from dataclasses import dataclass, field
from typing import List, Optional

import click

from ..config import get_settings
from ..utils import configure_logging
from .runner import invoke


@dataclass
class CommandContext:
    """Group-level options shared by every command"""

    config_file: Optional[str] = None
    out: Optional[str] = None
    overrides: List[str] = field(default_factory=list)


def _run(ctx: click.Context, command: str, **options) -> None:
    obj: CommandContext = ctx.obj
    ctx.exit(invoke(command, obj.config_file, obj.overrides, obj.out, **options))


@click.group()
@click.option("--config", "config_file", type=click.Path(dir_okay=False), default=None,
              help="Pipeline configuration (YAML or key = value text)")
@click.option("--seed", type=int, default=None, help="Seed for RANSAC and synthetic generation")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker pool size")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory")
@click.option("-o", "--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override one configuration key; repeatable")
@click.option("--log-level", default=None, help="Logging level (overrides GRAPHLOC_LOG_LEVEL)")
@click.pass_context
def cli(ctx, config_file, seed, workers, out, overrides, log_level):
    """Object-centric LiDAR place recognition and registration"""
    settings = get_settings()
    configure_logging(settings, level=log_level)

    flags = list(overrides)
    if seed is not None:
        flags.append(f"seed={seed}")
    if workers is not None:
        flags.append(f"workers={workers}")
    ctx.obj = CommandContext(config_file=config_file or settings.default_config, out=out, overrides=flags)


@cli.command()
@click.option("--submaps", type=click.IntRange(min=1), default=None, help="Number of submaps")
@click.option("--revisit-fraction", type=click.FloatRange(0, 1), default=None, help="Share of revisiting submaps")
@click.option("--noise", type=click.FloatRange(min=0), default=None, help="Point noise on revisits, meters")
@click.option("--dropout", type=click.FloatRange(0, 1, max_open=True), default=None, help="Object dropout on revisits")
@click.pass_context
def synth(ctx, submaps, revisit_fraction, noise, dropout):
    """Generate a synthetic world as a sequence directory"""
    _run(ctx, "synth", submaps=submaps, revisit_fraction=revisit_fraction, noise=noise, dropout=dropout)


@cli.command()
@click.option("--sequence", type=click.Path(file_okay=False), default=None, help="Sequence directory")
@click.option("--limit", type=click.IntRange(min=1), default=None, help="Read only the first scans")
@click.pass_context
def build(ctx, sequence, limit):
    """Fuse scans into voxelized submaps"""
    _run(ctx, "build", sequence=sequence, limit=limit)


@cli.command()
@click.option("--submaps", type=click.Path(dir_okay=False), default=None, help="Submap container")
@click.pass_context
def extract(ctx, submaps):
    """Scene graphs and embeddings of submaps"""
    _run(ctx, "extract", submaps=submaps)


@cli.command()
@click.option("--graphs", type=click.Path(dir_okay=False), default=None, help="Graph container")
@click.pass_context
def index(ctx, graphs):
    """Build the retrieval index"""
    _run(ctx, "index", graphs=graphs)


@cli.command()
@click.option("--index", "index_path", type=click.Path(dir_okay=False), default=None, help="Index container")
@click.option("--graphs", type=click.Path(dir_okay=False), default=None, help="Query graph container")
@click.pass_context
def query(ctx, index_path, graphs):
    """Revisit decisions for query graphs"""
    _run(ctx, "query", index=index_path, graphs=graphs)


@cli.command()
@click.option("--graphs", type=click.Path(dir_okay=False), default=None, help="Graph container")
@click.option("--pairs", type=click.Path(dir_okay=False), default=None, help="JSONL of {query, candidate}")
@click.pass_context
def register(ctx, graphs, pairs):
    """Register listed submap pairs"""
    _run(ctx, "register", graphs=graphs, pairs=pairs)


@cli.command("eval-pr")
@click.option("--graphs", type=click.Path(dir_okay=False), default=None, help="Graph container")
@click.option("--decisions", type=click.Path(dir_okay=False), default=None,
              help="Evaluate stored decisions instead of running queries")
@click.pass_context
def eval_pr(ctx, graphs, decisions):
    """Place-recognition metrics"""
    _run(ctx, "eval-pr", graphs=graphs, decisions=decisions)


@cli.command("eval-reg")
@click.option("--graphs", type=click.Path(dir_okay=False), default=None, help="Graph container")
@click.pass_context
def eval_reg(ctx, graphs):
    """Registration metrics over submap pairs within register_radius"""
    _run(ctx, "eval-reg", graphs=graphs)


@cli.command("init-weights")
@click.pass_context
def init_weights(ctx):
    """Write seeded random network weights"""
    _run(ctx, "init-weights")
