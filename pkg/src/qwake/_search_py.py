"""Pure-Python search kernel: one bounded-budget search invocation.

This is the hot loop of the whole simulator, mirrored by the compiled
kernel in ``_search_cy.pyx``. Both consume the supplied numpy Generator
stream identically (one uniform for the iteration count, one for the
measurement outcome, one more only on success), so transcripts are
byte-identical regardless of which backend is active.

Schedule: repetitions of a growing-window loop. Within a repetition the
window m starts at 1 and is multiplied by 6/5 after each failed attempt,
capped at ceil(sqrt(N)); the repetition ends after one attempt at the cap.
An attempt draws k uniformly from [0, m), charges k oracle calls for the
amplitude iterations plus one for verifying the measured element, and
succeeds with probability sin^2((2k+1) * asin(sqrt(C/N))). The budget is a
hard cap: k is clamped so the charge never exceeds it, and the invocation
returns NULL once the budget is exhausted.
"""
from __future__ import annotations

import math

BACKEND = "python"


def search_invocation(n_range: int, n_marked: int, budget: int, reps: int, gen) -> tuple[int, int]:
    """Run one search invocation.

    Returns (found_index, oracle_calls) where found_index is a uniform index
    into the marked set, or -1 when the invocation returns NULL.
    """
    theta = math.asin(math.sqrt(n_marked / n_range)) if n_marked > 0 else 0.0
    cap = float(math.isqrt(n_range - 1) + 1) if n_range > 1 else 1.0
    calls = 0
    rand = gen.random
    for _ in range(reps):
        m = 1.0
        while True:
            rem = budget - calls
            if rem <= 0:
                return -1, calls
            k = int(rand() * m)
            if k > rem - 1:
                k = rem - 1
            calls += k + 1
            u = rand()
            s = math.sin((2 * k + 1) * theta)
            if n_marked > 0 and u < s * s:
                idx = int(rand() * n_marked)
                if idx == n_marked:  # guard the u == 1.0-epsilon float edge
                    idx = n_marked - 1
                return idx, calls
            if m >= cap:
                break
            m = m * 1.2
            if m > cap:
                m = cap
    return -1, calls
