"""Result persistence: atomic file writes, CSV/JSON formats and run records.

JSON keeps full double precision; CSV numbers carry 9 significant digits.
Every file is written to a temporary sibling and renamed into place, so a
reader never sees a partial file.
"""

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from utils.unit_utils import format_number

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def plain(value: Any) -> Any:
    """Convert numpy values, tuples and paths into JSON-native objects."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return value.as_posix()
    return value


def dumps(value: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(plain(value), sort_keys=True, indent=2) + '\n'


def write_text_atomic(path: PathLike, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file and ``os.replace``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info('Wrote %s', path)
    return path


def write_json(path: PathLike, value: Any) -> Path:
    return write_text_atomic(path, dumps(value))


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV with floats at 9 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return write_text_atomic(path, csv_text(header, rows))


def sha256_file(path: PathLike) -> str:
    """Hex SHA-256 digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


@dataclass
class RunRecord:
    """Provenance and results of one command run.

    Timestamps live only here, never in the primary result files.
    ``to_json`` is canonical, so ``RunRecord.from_json(text).to_json() == text``
    for any text it produced.

    Attributes:
        command: Command that ran.
        version: Package version that produced the record.
        config: Snapshot of the validated parameters.
        started: UTC start time, ISO 8601.
        finished: UTC end time, ISO 8601; empty while running.
        fixtures: Input file path mapped to its SHA-256 digest.
        outputs: Result files written, relative to the output directory.
        results: Primary results.
        metrics: Derived figures of merit.
        failures: One entry per failed sub-task.
    """
    command: str
    version: str
    config: Dict[str, Any]
    started: str = field(default_factory=utc_timestamp)
    finished: str = ''
    fixtures: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)
    metrics: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    def add_fixture(self, path: PathLike) -> str:
        digest = sha256_file(path)
        self.fixtures[Path(path).as_posix()] = digest
        return digest

    def finish(self) -> None:
        self.finished = utc_timestamp()

    def to_json(self) -> str:
        return dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> 'RunRecord':
        return cls(**json.loads(text))

    @classmethod
    def load(cls, path: PathLike) -> 'RunRecord':
        return cls.from_json(Path(path).read_text(encoding='utf-8'))

    def save(self, out_dir: PathLike, name: Optional[str] = None) -> Path:
        return write_text_atomic(Path(out_dir) / (name or f'{self.command}_run.json'), self.to_json())
