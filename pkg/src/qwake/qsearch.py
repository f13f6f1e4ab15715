"""Amplitude-faithful simulation of bounded-budget quantum search.

A search invocation over N ports with C marked ones is simulated in the
two-dimensional rotation subspace: a run of k amplification iterations
measures a marked element with probability sin^2((2k+1) * asin(sqrt(C/N))),
and the measured marked element is uniform over the marked set. Iteration
counts follow the classic growing-window schedule for an unknown marked
count; the whole schedule is repeated up to a repetition factor to reach the
high-probability contract. Every oracle call is charged, including the
verification of each measured candidate, and the total never exceeds
ceil(c * sqrt(N / max(1, C)) * log2 n).

The inner loop lives in a compiled kernel when available, with a
pure-Python fallback selected at import time (identical streams, identical
results). Set QWAKE_PURE_PYTHON=1 to force the fallback.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import _search_py

if os.environ.get("QWAKE_PURE_PYTHON"):
    _kernel = _search_py
else:
    try:
        from . import _search_cy as _kernel  # type: ignore[attr-defined]
    except ImportError:
        _kernel = _search_py

BACKEND: str = _kernel.BACKEND
search_invocation = _kernel.search_invocation

#: Budget constant c for a single invocation.
DEFAULT_SEARCH_C = 20.0
#: Budget constant c' for an iterated search; 3c makes the iterated bound a
#: consequence of the per-invocation caps.
DEFAULT_ITER_C = 60.0
#: Exponent of the high-probability contract (failure ~ 1/n^WHP_EXPONENT).
WHP_EXPONENT = 2


def log2n(n_global: int) -> float:
    return math.log2(max(n_global, 2))


def default_repetitions(n_global: int) -> int:
    return math.ceil(3 * log2n(n_global))


def success_probability(n_range: int, n_marked: int, k: int) -> float:
    """Probability that k amplification iterations measure a marked element."""
    if not (0 <= n_marked <= n_range) or n_range < 1:
        raise ValueError("need 0 <= marked <= range size, range nonempty")
    if n_marked == 0:
        return 0.0
    s = math.sin((2 * k + 1) * math.asin(math.sqrt(n_marked / n_range)))
    return s * s


def invocation_budget(n_range: int, n_marked: int, n_global: int, c: float = DEFAULT_SEARCH_C) -> int:
    return math.ceil(c * math.sqrt(n_range / max(1, n_marked)) * log2n(n_global))


def iterated_budget(n_range: int, n_marked: int, n_global: int, c_iter: float = DEFAULT_ITER_C) -> int:
    return math.ceil(c_iter * math.sqrt(n_range * max(1, n_marked)) * log2n(n_global))


@dataclass(frozen=True)
class SearchSpec:
    """One search problem: an ordered port range and a frozen predicate."""

    range: tuple[int, ...]
    marked_predicate: Callable[[int], bool]
    n_global: int
    repetition_factor: int | None = None
    search_c: float = DEFAULT_SEARCH_C

    def __post_init__(self):
        if not self.range:
            raise ValueError("search range must be nonempty")

    @property
    def repetitions(self) -> int:
        if self.repetition_factor is not None:
            return self.repetition_factor
        return default_repetitions(self.n_global)


@dataclass(frozen=True)
class SearchTranscript:
    result: int | None
    oracle_calls: int
    quantum_messages: int
    rounds: int


@dataclass(frozen=True)
class IteratedTranscript:
    oracle_calls: int
    quantum_messages: int
    rounds: int
    invocations: tuple[SearchTranscript, ...]


def quantum_search(spec: SearchSpec, rng) -> SearchTranscript:
    """Find one marked port, or NULL; exact call and message accounting."""
    ports = list(spec.range)
    marked = [x for x in ports if spec.marked_predicate(x)]
    budget = invocation_budget(len(ports), len(marked), spec.n_global, spec.search_c)
    idx, calls = search_invocation(len(ports), len(marked), budget, spec.repetitions, rng)
    result = marked[idx] if idx >= 0 else None
    return SearchTranscript(result, calls, 2 * calls, calls)


def iterated_quantum_search(spec: SearchSpec, rng) -> tuple[set[int], IteratedTranscript]:
    """Find every marked port by repeated search, removing found elements
    from the local range until a search returns NULL."""
    remaining = list(spec.range)
    found: set[int] = set()
    invocations: list[SearchTranscript] = []
    while remaining:
        sub = SearchSpec(
            tuple(remaining),
            spec.marked_predicate,
            spec.n_global,
            spec.repetition_factor,
            spec.search_c,
        )
        t = quantum_search(sub, rng)
        invocations.append(t)
        if t.result is None:
            break
        found.add(t.result)
        remaining.remove(t.result)
    calls = sum(t.oracle_calls for t in invocations)
    return found, IteratedTranscript(
        calls,
        sum(t.quantum_messages for t in invocations),
        sum(t.rounds for t in invocations),
        tuple(invocations),
    )
