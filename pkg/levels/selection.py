"""Ranking of qudit state assignments and the off-resonant error budget.

A qudit assignment is a chain of d distinct levels in which consecutive
levels are linked by an allowed transition (strength > 0). A chain and its
reverse encode the same level set, so only chains with
``state_indices[0] < state_indices[-1]`` are reported.

The score of a chain is

    w_strength * min link strength
    - w_sensitivity * max |link sensitivity|
    + w_separation * min(separation, separation_cap)

where ``separation`` is the smallest frequency gap between a link transition
and any other transition touching a chain level. With non-negative weights
each term can only decrease as a chain grows, so the score of a partial chain
bounds every completion and branch-and-bound pruning is exact.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from levels.transitions import Transition
from numerics.errors import DegenerateSpectrumError, InvalidDimensionError

logger = logging.getLogger(__name__)

ASSIGNMENT_CSV_HEADER = ('rank', 'score', 'states', 'tone_frequencies_mhz', 'coupling_strengths')
MAX_LEVELS = 24


@dataclass(frozen=True)
class ScoringWeights:
    """Weights of the state-selection score.

    Attributes:
        strength: Weight of the weakest link strength.
        sensitivity: Weight of the largest |field sensitivity| (MHz/G).
        separation: Weight of the smallest spectral separation (MHz).
        separation_cap: Separation above which crowding no longer matters (MHz).
    """
    strength: float = 1.0
    sensitivity: float = 1.0
    separation: float = 1.0
    separation_cap: float = 1.0

    def __post_init__(self):
        for name in ('strength', 'sensitivity', 'separation'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f'Scoring weight {name} must be finite and non-negative, got {value}')
        if not math.isfinite(self.separation_cap) or self.separation_cap <= 0:
            raise ValueError(f'Separation cap must be finite and positive, got {self.separation_cap}')


@dataclass(frozen=True)
class QuditAssignment:
    """A chain of levels encoding a d-level qudit.

    Attributes:
        d: Qudit dimension.
        state_indices: Level indices for qudit levels 0..d-1.
        tone_frequencies: Link transition frequencies in MHz (d-1 values).
        coupling_strengths: Link transition strengths (d-1 values).
        sensitivities: Link field sensitivities in MHz/G (d-1 values).
        score: Selection score.
    """
    d: int
    state_indices: Tuple[int, ...]
    tone_frequencies: Tuple[float, ...]
    coupling_strengths: Tuple[float, ...]
    sensitivities: Tuple[float, ...] = field(default=())
    score: float = 0.0

    def __post_init__(self):
        if len(self.state_indices) != self.d:
            raise ValueError(f'Assignment needs {self.d} states, got {len(self.state_indices)}')
        if len(set(self.state_indices)) != self.d:
            raise ValueError(f'Assignment states must be distinct: {self.state_indices}')
        if len(self.tone_frequencies) != self.d - 1 or len(self.coupling_strengths) != self.d - 1:
            raise ValueError('Assignment needs d-1 tone frequencies and coupling strengths')
        if any(s <= 0 for s in self.coupling_strengths):
            raise ValueError('Every link of an assignment must have non-zero strength')


def _pair(a: int, b: int) -> Tuple[int, int]:
    return (a, b) if a < b else (b, a)


class _ChainSearch:
    """Depth-first chain enumeration with optional top-k pruning."""

    def __init__(self, table: Sequence[Transition], d: int, weights: ScoringWeights,
                 top_k: Optional[int]):
        self.d = d
        self.weights = weights
        self.top_k = top_k
        self.links: Dict[Tuple[int, int], Transition] = {}
        self.touching: Dict[int, List[Transition]] = {}
        for t in table:
            self.touching.setdefault(t.lower, []).append(t)
            self.touching.setdefault(t.upper, []).append(t)
            if t.strength > 0:
                self.links[(t.lower, t.upper)] = t
        self.neighbours: Dict[int, List[int]] = {}
        for a, b in self.links:
            self.neighbours.setdefault(a, []).append(b)
            self.neighbours.setdefault(b, []).append(a)
        for values in self.neighbours.values():
            values.sort()
        self.best: List[Tuple[float, Tuple[int, ...]]] = []
        self.found: List[Tuple[float, Tuple[int, ...]]] = []

    def score(self, chain: Sequence[int]) -> float:
        w = self.weights
        chain_links = [self.links[_pair(a, b)] for a, b in zip(chain, chain[1:])]
        if not chain_links:
            return math.inf
        involved = {id(t): t for s in chain for t in self.touching.get(s, [])}
        separation = w.separation_cap
        for link in chain_links:
            for other in involved.values():
                if other is not link:
                    separation = min(separation, abs(link.frequency - other.frequency))
        return (w.strength * min(t.strength for t in chain_links)
                - w.sensitivity * max(abs(t.sensitivity) for t in chain_links)
                + w.separation * separation)

    def _threshold(self) -> float:
        if self.top_k is None or len(self.best) < self.top_k:
            return -math.inf
        return self.best[0][0]

    def _record(self, score: float, chain: Tuple[int, ...]) -> None:
        self.found.append((score, chain))
        if self.top_k is None:
            return
        # Min-heap keyed so that the root is the worst retained candidate.
        entry = (score, tuple(-s for s in chain))
        if len(self.best) < self.top_k:
            heapq.heappush(self.best, entry)
        elif entry > self.best[0]:
            heapq.heapreplace(self.best, entry)

    def extend(self, chain: List[int]) -> None:
        if len(chain) == self.d:
            if chain[0] < chain[-1]:
                self._record(self.score(chain), tuple(chain))
            return
        for nxt in self.neighbours.get(chain[-1], []):
            if nxt in chain:
                continue
            chain.append(nxt)
            if self.score(chain) >= self._threshold():
                self.extend(chain)
            chain.pop()

    def run(self) -> List[Tuple[float, Tuple[int, ...]]]:
        for start in sorted(self.neighbours):
            self.extend([start])
        ranked = sorted(self.found, key=lambda item: (-item[0], item[1]))
        return ranked if self.top_k is None else ranked[:self.top_k]


def score_qudit_candidates(table: Sequence[Transition], d: int,
                           weights: Optional[ScoringWeights] = None,
                           top_k: Optional[int] = None) -> List[QuditAssignment]:
    """Rank chains of d levels linked by allowed transitions.

    Args:
        table: Transition table (at most 24 levels).
        d: Qudit dimension.
        weights: Score weights; defaults to unit weights.
        top_k: Keep only the k best chains, pruning the search exactly.
            None enumerates every chain.

    Returns:
        list of QuditAssignment: Descending score, ties broken by state
        indices in lexicographic order. Empty if no chain of length d exists.

    Raises:
        InvalidDimensionError: If d < 2.
        ValueError: If the table is empty or spans more than 24 levels.
    """
    if d < 2:
        raise InvalidDimensionError(f'Dimension must be at least 2, got {d}')
    if not table:
        raise ValueError('Transition table is empty')
    if top_k is not None and top_k < 1:
        raise ValueError(f'top_k must be positive, got {top_k}')
    span = {t.lower for t in table} | {t.upper for t in table}
    if len(span) > MAX_LEVELS:
        raise ValueError(f'Transition table spans {len(span)} levels; at most {MAX_LEVELS} supported')
    search = _ChainSearch(table, d, weights or ScoringWeights(), top_k)
    ranked = search.run()
    if not ranked:
        logger.warning('No chain of %d levels connected by allowed transitions', d)
    assignments = []
    for score, chain in ranked:
        links = [search.links[_pair(a, b)] for a, b in zip(chain, chain[1:])]
        assignments.append(QuditAssignment(
            d=d, state_indices=chain,
            tone_frequencies=tuple(t.frequency for t in links),
            coupling_strengths=tuple(t.strength for t in links),
            sensitivities=tuple(t.sensitivity for t in links),
            score=score))
    return assignments


def off_resonant_error(assignment: QuditAssignment, table: Sequence[Transition],
                       omega: float) -> float:
    """Estimate the population driven into spectator transitions.

    Every tone of the assignment is detuned from every spectator transition
    (a transition touching a qudit level that is not one of the driven
    links). Each contributes (Omega_ik / delta_ik)^2 with
    Omega_ik = omega * spectator strength.

    Args:
        assignment: The chosen qudit chain.
        table: Transition table the assignment was drawn from.
        omega: Drive scale in kHz per unit strength.

    Returns:
        float: Summed error estimate.

    Raises:
        DegenerateSpectrumError: If a tone is exactly resonant with a spectator.

    Examples:
        A single spectator of unit strength 1 MHz away from a 1 kHz tone
        gives (1 kHz / 1 MHz)^2 = 1e-6.
    """
    driven = {_pair(a, b) for a, b in zip(assignment.state_indices, assignment.state_indices[1:])}
    spectators = [t for t in table
                  if t.touches(assignment.state_indices) and (t.lower, t.upper) not in driven]
    total = 0.0
    for tone in assignment.tone_frequencies:
        for t in spectators:
            detuning_khz = 1000.0 * (t.frequency - tone)
            if abs(detuning_khz) < 1e-12:
                raise DegenerateSpectrumError(
                    f'Tone at {tone} MHz is resonant with spectator {t.lower}->{t.upper}')
            total += (omega * t.strength / detuning_khz) ** 2
    return total


def assignment_rows(assignments: Sequence[QuditAssignment]) -> List[Tuple]:
    """Rows matching ``ASSIGNMENT_CSV_HEADER``; list fields are joined with ';'."""
    return [(rank, a.score, ';'.join(str(s) for s in a.state_indices),
             ';'.join(f'{f:.9g}' for f in a.tone_frequencies),
             ';'.join(f'{s:.9g}' for s in a.coupling_strengths))
            for rank, a in enumerate(assignments, start=1)]
