"""
Line-delimited report records
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Union

from pydantic import BaseModel


logger = logging.getLogger(__name__)


def _record(item: Any) -> str:
    if isinstance(item, BaseModel):
        return item.model_dump_json()
    return json.dumps(item, default=float)


def write_jsonl(path: Union[str, Path], items: Iterable[Any]) -> int:
    """Write one JSON record per line; returns the record count"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w") as f:
        for item in items:
            f.write(_record(item) + "\n")
            count += 1
    logger.debug(f"Wrote {count} records to {path}")
    return count


def read_jsonl(path: Union[str, Path]) -> List[dict]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, "r") as f:
        return [json.loads(line) for line in f if line.strip()]
