"""Pulse-table CSV files: ``operation,pulse,theta,phi_1,...,phi_{d-1}``.

Rows are grouped by operation name in file order and sorted by the pulse
column within each operation. Numbers are parsed as doubles and written back
with nine significant digits, which reproduces every printed table value.
"""

import csv
import io
import logging
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from control.tones import PulseParams, PulseSequence
from numerics.errors import PulseTableError
from utils.unit_utils import format_number

logger = logging.getLogger(__name__)

BASE_COLUMNS = ('operation', 'pulse', 'theta')


def pulse_table_header(d: int) -> Tuple[str, ...]:
    """Header for a d-level table."""
    return BASE_COLUMNS + tuple(f'phi_{k}' for k in range(1, d))


@dataclass(frozen=True)
class PulseTableRow:
    """One parsed table row with its source line."""
    operation: str
    pulse: int
    params: PulseParams
    line: int


@dataclass(frozen=True)
class PulseTable:
    """A parsed pulse table.

    Attributes:
        d: Qudit dimension inferred from the number of phase columns.
        rows: Rows in file order.
        source: File the table was read from.
    """
    d: int
    rows: Tuple[PulseTableRow, ...]
    source: str = '<memory>'

    def operations(self) -> 'OrderedDict[str, PulseSequence]':
        """Map each operation name, in first-seen order, to its pulse sequence."""
        grouped: Dict[str, List[PulseTableRow]] = OrderedDict()
        for row in self.rows:
            grouped.setdefault(row.operation, []).append(row)
        result = OrderedDict()
        for name, rows in grouped.items():
            ordered = sorted(rows, key=lambda r: r.pulse)
            result[name] = PulseSequence(d=self.d, pulses=tuple(r.params for r in ordered))
        return result

    def __len__(self) -> int:
        return len(self.rows)


def _parse_number(text: str, column: str, path: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise PulseTableError(f'column {column!r} is not a number: {text!r}', path, line) from None


def parse_pulse_table(text: str, source: str = '<memory>') -> PulseTable:
    """Parse pulse-table CSV text.

    Raises:
        PulseTableError: For a bad header, a row with the wrong number of
            columns, a non-numeric value or a duplicated pulse index.
    """
    reader = csv.reader(io.StringIO(text))
    header: Optional[List[str]] = None
    rows = []
    seen = set()
    for line, record in enumerate(reader, start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        cells = [cell.strip() for cell in record]
        if header is None:
            header = cells
            d = len(header) - len(BASE_COLUMNS) + 1
            if d < 2 or tuple(header) != pulse_table_header(d):
                raise PulseTableError(f'unexpected header {header}', source, line)
            continue
        if len(cells) != len(header):
            raise PulseTableError(f'expected {len(header)} columns, got {len(cells)}', source, line)
        operation = cells[0]
        if not operation:
            raise PulseTableError('empty operation name', source, line)
        pulse_value = _parse_number(cells[1], 'pulse', source, line)
        if pulse_value != int(pulse_value):
            raise PulseTableError(f'pulse index must be an integer, got {cells[1]!r}', source, line)
        pulse = int(pulse_value)
        if (operation, pulse) in seen:
            raise PulseTableError(f'duplicate pulse {pulse} for operation {operation!r}', source, line)
        seen.add((operation, pulse))
        theta = _parse_number(cells[2], 'theta', source, line)
        phases = tuple(_parse_number(c, header[i + 3], source, line) for i, c in enumerate(cells[3:]))
        rows.append(PulseTableRow(operation, pulse, PulseParams(theta=theta, phases=phases), line))
    if header is None:
        raise PulseTableError('missing header', source, None)
    return PulseTable(d=len(header) - len(BASE_COLUMNS) + 1, rows=tuple(rows), source=source)


def read_pulse_table(path: Union[str, Path]) -> PulseTable:
    """Read a pulse-table CSV file.

    Raises:
        FileNotFoundError: If the file does not exist (message names it).
        PulseTableError: If the file is malformed.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f'Pulse table not found: {path}')
    table = parse_pulse_table(path.read_text(encoding='utf-8'), str(path))
    logger.info('Read %d pulse rows (d=%d) from %s', len(table), table.d, path)
    return table


def pulse_table_rows(operations: Mapping[str, PulseSequence]) -> List[Tuple[str, ...]]:
    """Rows for writing ``operations`` with ``pulse_table_header``; pulses numbered from 1."""
    rows = []
    for name, seq in operations.items():
        for index, pulse in enumerate(seq.pulses, start=1):
            rows.append((name, str(index), format_number(pulse.theta),
                         *(format_number(p) for p in pulse.phases)))
    return rows


def format_pulse_table(operations: Mapping[str, PulseSequence]) -> str:
    """Render ``operations`` as pulse-table CSV text."""
    if not operations:
        raise ValueError('Cannot format an empty pulse table')
    d = next(iter(operations.values())).d
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(pulse_table_header(d))
    writer.writerows(pulse_table_rows(operations))
    return buffer.getvalue()
