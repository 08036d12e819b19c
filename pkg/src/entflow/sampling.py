"""Seeded random networks with a valid path grown alongside them.

Used by the randomized verification suites: the path and the network grow
together, so every placement is checked against the cells the path has
already swept and the result is valid by construction.  All tracks are
qubits; projector labels are random complex matrices; unitaries are Haar
random.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .labels import ANTILINEAR, FunctionalLabel, Linearity
from .linalg import random_complex, random_unitary
from .network import Network, NetworkBuilder
from .paths import Path, PathStep, start_at_input

GRID_TIME = 40


@dataclass(frozen=True)
class SampledCase:
    network: Network
    path: Path


def random_network_with_path(seed: int, *, max_tracks: int = 6,
                             max_projectors: int = 8, max_unitaries: int = 3,
                             linearity: Linearity = ANTILINEAR) -> SampledCase:
    """Grow a network and a forward-start path through it."""
    for attempt in range(20):
        try:
            return _grow(np.random.default_rng([seed, attempt]), max_tracks,
                         max_projectors, max_unitaries, linearity)
        except _GrowthDeadEnd:
            continue
    raise RuntimeError(f"could not grow a valid case for seed {seed}")


class _GrowthDeadEnd(Exception):
    pass


def _grow(rng: np.random.Generator, max_tracks: int, max_projectors: int,
          max_unitaries: int, linearity: Linearity) -> SampledCase:
    n_tracks = int(rng.integers(2, max_tracks + 1))
    n_proj = int(rng.integers(1, max_projectors // 2 + 1)) * 2  # even: ends forward
    n_unit = int(rng.integers(0, max_unitaries + 1))

    builder = NetworkBuilder()
    for t in range(1, n_tracks + 1):
        builder.add_track(t, 2)

    blocked: set[tuple[int, int]] = set()  # event cells and swept segments

    def sweep(tr: int, a: int, b: int) -> None:
        lo, hi = sorted((a, b))
        for s in range(lo, hi + 1):
            blocked.add((tr, s))

    start_track = track = int(rng.integers(1, n_tracks + 1))
    time = 0
    direction = 1  # +1 up, -1 down
    steps: list[PathStep] = []
    unit_budget = n_unit

    for k in range(n_proj):
        last = k == n_proj - 1
        partners = list(rng.permutation([t for t in range(1, n_tracks + 1) if t != track]))
        placed = False
        for partner in partners:
            if direction > 0:
                window = range(time + 1, GRID_TIME)
            else:
                window = range(time - 1, 0, -1)
            candidates = []
            for t_ev in window:
                if (track, t_ev) in blocked or (partner, t_ev) in blocked:
                    continue
                seg_clear = all(
                    (track, s) not in blocked
                    for s in range(min(time, t_ev) + 1, max(time, t_ev))
                )
                if not seg_clear:
                    continue
                if last:
                    # The path exits through the open top of the partner track.
                    top_clear = all(
                        (partner, s) not in blocked for s in range(t_ev + 1, GRID_TIME)
                    )
                    if not top_clear:
                        continue
                candidates.append(t_ev)
            if not candidates:
                continue
            t_ev = int(rng.choice(candidates))

            if unit_budget > 0 and rng.random() < 0.5:
                lo, hi = sorted((time, t_ev))
                seg = [s for s in range(lo + 1, hi) if (track, s) not in blocked]
                if seg:
                    u_time = int(rng.choice(seg))
                    u_name = builder.add_unitary(u_time, track, random_unitary(rng, 2))
                    steps.append(PathStep(u_name))
                    unit_budget -= 1

            label = FunctionalLabel(random_complex(rng, 2, 2), linearity)
            if rng.random() < 0.75:
                dom, cod, enter = track, partner, "dom"
            else:
                dom, cod, enter = partner, track, "cod"
            name = builder.add_projector(t_ev, dom, cod, label)
            steps.append(PathStep(name, enter=enter))
            sweep(track, time, t_ev)
            blocked.add((partner, t_ev))
            track, time, direction = partner, t_ev, -direction
            placed = True
            break
        if not placed:
            raise _GrowthDeadEnd
    sweep(track, time, GRID_TIME - 1)

    builder.set_input(start_track, random_complex(rng, 2))
    network = builder.build()
    path = Path(start_at_input(start_track), tuple(steps), end_tracks=(track,))
    return SampledCase(network, path)
