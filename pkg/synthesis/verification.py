"""Checking published pulse tables against their analytic targets.

Every operation of a table is composed under every ``PulseConvention`` and
compared with the gate it is named after. The convention with the highest
mean fidelity over the recognized operations wins the table.

A table gate can be wrong as a unitary and still act correctly on the state
a Grover round feeds it. Each unitary row therefore also gets an action
fidelity on the equal superposition, and rows that only fit a convention
other than the winner are listed as outliers.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from control.gates import compose
from control.pulse_table import PulseTable
from control.tones import PulseConvention, PulseSequence
from grover.algorithm import oracle_matrix, parse_operation_name, reflection_matrix
from numerics.linalg import equal_superposition, unitary_fidelity
from synthesis.targets import TargetSpec

logger = logging.getLogger(__name__)

WIN_TOL = 1e-6
# A row counts as reproducing its gate at or above this fidelity.
FIT_LEVEL = 0.99


def operation_target(name: str, d: int) -> Optional[TargetSpec]:
    """Analytic target named by a table operation, or None if unrecognized.

    Mark m is the phase oracle on level m, the preparation maps |0> to the
    equal superposition and the reflection is the scaled 2|s><s| - I.
    """
    parsed = parse_operation_name(name)
    if parsed is None:
        return None
    kind, level = parsed
    if kind == 'mark':
        if level >= d:
            return None
        return TargetSpec.unitary(oracle_matrix(d, level))
    if kind == 'prep':
        return TargetSpec.state(equal_superposition(d))
    return TargetSpec.unitary(reflection_matrix(d))


def target_fidelity(seq: PulseSequence, target: TargetSpec, convention: PulseConvention) -> float:
    """|Tr(Ut^dagger U)|/d for unitary targets, |<psi_t|U|0>|^2 for state maps."""
    u = compose(seq, convention)
    if target.is_state:
        return float(min(1.0, abs(np.vdot(target.target, u[:, 0])) ** 2))
    return unitary_fidelity(target.target, u)


def action_fidelity(seq: PulseSequence, target: TargetSpec, convention: PulseConvention) -> float:
    """|<Ut s|U s>|^2 for the equal superposition s; state targets use ``target_fidelity``."""
    if target.is_state:
        return target_fidelity(seq, target, convention)
    s = equal_superposition(target.d)
    overlap = np.vdot(target.target @ s, compose(seq, convention) @ s)
    return float(min(1.0, abs(overlap) ** 2))


@dataclass
class OperationCheck:
    """Fidelities of one table operation under every convention tried.

    ``fidelities`` compares full unitaries; ``action_fidelities`` compares
    only the images of the equal superposition.
    """
    operation: str
    n_pulses: int
    fidelities: Dict[str, float] = field(default_factory=dict)
    action_fidelities: Dict[str, float] = field(default_factory=dict)
    recognized: bool = True

    @property
    def best_convention(self) -> Optional[str]:
        if not self.fidelities:
            return None
        # dict order is grid order, so max keeps the first of equal values
        return max(self.fidelities, key=lambda name: self.fidelities[name])

    @property
    def best_fidelity(self) -> Optional[float]:
        best = self.best_convention
        return None if best is None else self.fidelities[best]


@dataclass
class VerificationReport:
    """Per-operation checks and the winning convention of one or more tables."""
    d: int
    checks: List[OperationCheck] = field(default_factory=list)
    conventions: Tuple[str, ...] = ()
    sources: Tuple[str, ...] = ()

    def recognized(self) -> List[OperationCheck]:
        return [c for c in self.checks if c.recognized]

    def mean_fidelity(self, convention: str) -> float:
        checks = self.recognized()
        if not checks:
            return 0.0
        return float(np.mean([c.fidelities[convention] for c in checks]))

    @property
    def winner(self) -> Optional[str]:
        """Convention with the highest mean fidelity; ties go to grid order."""
        if not self.recognized():
            return None
        return max(self.conventions, key=self.mean_fidelity)

    @property
    def single_convention(self) -> bool:
        """True when the winner is also the best convention for every operation."""
        winner = self.winner
        if winner is None:
            return False
        return all(c.fidelities[winner] >= c.best_fidelity - WIN_TOL for c in self.recognized())

    def check(self, operation: str) -> OperationCheck:
        for entry in self.checks:
            if entry.operation == operation:
                return entry
        raise KeyError(f'No operation {operation!r} in report')

    def fidelity(self, operation: str, convention: Optional[str] = None) -> float:
        """Fidelity of ``operation`` under ``convention`` (default: the winner)."""
        return self.check(operation).fidelities[convention or self.winner]

    def outliers(self, convention: Optional[str] = None) -> List[OperationCheck]:
        """Rows that reproduce their gate only under some other convention."""
        chosen = convention or self.winner
        if chosen is None:
            return []
        return [c for c in self.recognized()
                if c.fidelities[chosen] < FIT_LEVEL <= c.best_fidelity]

    def to_records(self, convention: Optional[str] = None) -> List[dict]:
        """JSON records ``{operation, fidelity, action_fidelity, convention, ...}``."""
        chosen = convention or self.winner
        records = []
        for entry in self.checks:
            record = {'operation': entry.operation, 'n_pulses': entry.n_pulses,
                      'recognized': entry.recognized, 'convention': chosen,
                      'fidelity': entry.fidelities.get(chosen) if entry.recognized else None,
                      'action_fidelity': (entry.action_fidelities.get(chosen)
                                          if entry.recognized else None),
                      'best_fidelity': entry.best_fidelity,
                      'best_convention': entry.best_convention}
            records.append(record)
        return records

    def to_dict(self, convention: Optional[str] = None) -> dict:
        """Summary under ``convention`` (default: this report's winner)."""
        chosen = convention or self.winner
        return {'d': self.d, 'sources': list(self.sources), 'winner': self.winner,
                'convention': chosen,
                'single_convention': self.single_convention,
                'operations': self.to_records(chosen),
                'outliers': [{'operation': c.operation, 'best_convention': c.best_convention,
                              'best_fidelity': c.best_fidelity} for c in self.outliers(chosen)]}


def verify_pulse_table(table: PulseTable,
                       conventions: Optional[Sequence[PulseConvention]] = None) -> VerificationReport:
    """Compose every operation of ``table`` under every convention and score it.

    Unknown operation names are kept in the report with ``recognized=False``
    and a warning; they never abort the check. An empty table gives an empty
    report.
    """
    grid = list(conventions) if conventions is not None else PulseConvention.grid()
    report = VerificationReport(d=table.d, conventions=tuple(c.name for c in grid),
                                sources=(table.source,))
    for name, seq in table.operations().items():
        target = operation_target(name, table.d)
        entry = OperationCheck(operation=name, n_pulses=len(seq))
        if target is None:
            logger.warning('%s: unknown operation %r, not verified', table.source, name)
            entry.recognized = False
        else:
            entry.fidelities = {c.name: target_fidelity(seq, target, c) for c in grid}
            entry.action_fidelities = {c.name: action_fidelity(seq, target, c) for c in grid}
            logger.debug('%s: %s best %.6f under %s', table.source, name,
                         entry.best_fidelity, entry.best_convention)
        report.checks.append(entry)
    if report.winner is not None:
        logger.info('%s: winning convention %s (mean fidelity %.6f)',
                    table.source, report.winner, report.mean_fidelity(report.winner))
        for entry in report.outliers():
            logger.warning('%s: %s fits only %s (fidelity %.6f)', table.source,
                           entry.operation, entry.best_convention, entry.best_fidelity)
    return report


def combined_winner(reports: Sequence[VerificationReport]) -> Optional[str]:
    """Convention with the highest mean fidelity over every recognized row of ``reports``."""
    if not reports:
        return None
    names = reports[0].conventions
    checks = [c for r in reports for c in r.recognized()]
    if not checks:
        return None
    return max(names, key=lambda n: float(np.mean([c.fidelities[n] for c in checks])))
