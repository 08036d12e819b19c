"""Paths through a network and the functional composite they induce.

A path progresses along tracks forward or backward in time.  At a directed
projector it enters one leg and leaves the other on the same temporal side
(it bounces, flipping its vertical direction); it passes local unitaries
unaltered; and it may not end at a time before any time it covers.

The composite folds the per-event labels in traversal order: a projector
traversed domain-to-codomain contributes its label, the reverse traversal
contributes the adjoint, a unitary contributes itself forward and its
dagger backward.  With anti-linear labels the fold is the plain linearity
algebra.  With linear labels (forward-start paths) the fold instead
conjugates the entries of every contribution the path leaves moving toward
earlier times, which for projectors is exactly the entered-and-left-from-
below rule; the two formulations yield the same matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import labels as lb
from .labels import ANTILINEAR, LINEAR, FunctionalLabel
from .linalg import prop_eq, random_complex
from .network import (
    BipartiteProjector,
    Diagnostic,
    LocalUnitary,
    Network,
    UnipartiteProjector,
)

UP = "up"
DOWN = "down"
BELOW = "below"
ABOVE = "above"
DOM = "dom"
COD = "cod"


class PathError(ValueError):
    """Raised when a composite is requested for an inconsistent path."""


@dataclass(frozen=True)
class PathStart:
    kind: str                      # "input" | "free" | "anchor"
    tracks: tuple[int, ...] = ()
    time: int | None = None        # free starts only; inputs start at 0
    direction: str = UP
    anchor: str | None = None      # unipartite projector name for anchors

    def __post_init__(self):
        trks = self.tracks
        if isinstance(trks, int):
            trks = (trks,)
        object.__setattr__(self, "tracks", tuple(trks))


def start_at_input(tracks) -> PathStart:
    """Start at the bottom of the track(s) carrying a pure input, moving up."""
    return PathStart("input", tracks=tracks, time=0, direction=UP)


def start_free(track: int, time: int, direction: str = DOWN) -> PathStart:
    """Start mid-track with no input site (the open end of a function output)."""
    return PathStart("free", tracks=track, time=time, direction=direction)


def start_at_anchor(anchor: str, direction: str = DOWN) -> PathStart:
    """Start at a unipartite projector that feeds the path its input."""
    return PathStart("anchor", anchor=anchor, direction=direction)


@dataclass(frozen=True)
class PathStep:
    """One event visit.  enter/enter_from may be omitted and inferred."""

    event: str
    enter: str | None = None       # "dom" | "cod" for projectors, None for unitaries
    enter_from: str | None = None  # "below" | "above"


@dataclass(frozen=True)
class Path:
    start: PathStart
    steps: tuple[PathStep, ...]
    end_tracks: tuple[int, ...]
    end_time: int | None = None    # None = the open top of the end tracks

    def __post_init__(self):
        steps = tuple(
            s if isinstance(s, PathStep) else PathStep(s) for s in self.steps
        )
        object.__setattr__(self, "steps", steps)
        ends = self.end_tracks
        if isinstance(ends, int):
            ends = (ends,)
        object.__setattr__(self, "end_tracks", tuple(ends))

    def output_tracks(self, network: Network) -> tuple[int, ...]:
        return self.end_tracks


@dataclass(frozen=True)
class ResolvedStep:
    event: object
    enter: str | None
    enter_from: str
    strand_tracks: tuple[int, ...]  # position (leg order) when leaving the event


@dataclass
class Walk:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    resolved: list[ResolvedStep] = field(default_factory=list)
    input_tracks: tuple[int, ...] = ()
    final_tracks: tuple[int, ...] = ()
    final_direction: str = UP

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def _events_between(network: Network, track: int, t_lo: int, t_hi: int) -> list:
    return [
        e for e in network.events
        if track in e.tracks and t_lo < e.time < t_hi
    ]


def walk_path(network: Network, path: Path) -> Walk:
    """Trace the path through the network, inferring and checking geometry."""
    w = Walk()

    def bad(code: str, msg: str) -> Walk:
        w.diagnostics.append(Diagnostic(code, msg))
        return w

    start = path.start
    if start.direction not in (UP, DOWN):
        return bad("bad-start", f"unknown start direction {start.direction!r}")
    if start.kind == "input":
        missing = [t for t in start.tracks if t not in network.track_indices]
        if missing or not start.tracks:
            return bad("dangling-track", f"bad start tracks {start.tracks}")
        tracks: tuple[int, ...] = start.tracks
        times = {t: 0 for t in start.tracks}
        direction = UP
    elif start.kind == "free":
        missing = [t for t in start.tracks if t not in network.track_indices]
        if missing or len(start.tracks) != 1:
            return bad("dangling-track", f"bad start tracks {start.tracks}")
        tracks = start.tracks
        times = {start.tracks[0]: start.time}
        direction = start.direction
    elif start.kind == "anchor":
        try:
            anchor = network.event(start.anchor)
        except KeyError:
            return bad("dangling-ref", f"no anchor event named {start.anchor!r}")
        if not isinstance(anchor, UnipartiteProjector):
            return bad("bad-anchor", f"anchor {start.anchor!r} is not a unipartite projector")
        tracks = (anchor.track,)
        times = {anchor.track: anchor.time}
        direction = start.direction
    else:
        return bad("bad-start", f"unknown start kind {start.kind!r}")

    w.input_tracks = tracks
    covered_max = max(times.values())

    for n, step in enumerate(path.steps):
        try:
            event = network.event(step.event)
        except KeyError:
            return bad("dangling-ref", f"step {n}: no event named {step.event!r}")
        expected_from = BELOW if direction == UP else ABOVE
        if step.enter_from is not None and step.enter_from != expected_from:
            return bad(
                "bad-temporal",
                f"step {n}: declared entry from {step.enter_from}, "
                f"but the path is moving {direction}",
            )

        if isinstance(event, LocalUnitary):
            if event.track not in tracks:
                return bad(
                    "off-track",
                    f"step {n}: unitary {event.name!r} is on track {event.track}, "
                    f"path is on {tracks}",
                )
            t_prev = times[event.track]
            if direction == UP and not event.time > t_prev:
                return bad("bad-order", f"step {n}: {event.name!r} is not above the path")
            if direction == DOWN and not event.time < t_prev:
                return bad("bad-order", f"step {n}: {event.name!r} is not below the path")
            lo, hi = sorted((t_prev, event.time))
            crossed = [
                e.name for e in _events_between(network, event.track, lo, hi)
                if e.name != event.name
            ]
            if crossed:
                return bad(
                    "crossed-event",
                    f"step {n}: path crosses {crossed} on track {event.track}",
                )
            times[event.track] = event.time
            covered_max = max(covered_max, event.time)
            w.resolved.append(ResolvedStep(event, None, expected_from, tracks))
            continue

        if not isinstance(event, BipartiteProjector):
            return bad(
                "bad-step",
                f"step {n}: {event.name!r} is not a directed projector or unitary",
            )
        legs = {DOM: event.dom_tracks, COD: event.cod_tracks}
        enter = step.enter
        if enter is None:
            matches = [side for side, leg in legs.items() if set(leg) == set(tracks)]
            if len(matches) != 1:
                return bad(
                    "ambiguous-leg",
                    f"step {n}: cannot infer entry leg of {event.name!r} from tracks {tracks}",
                )
            enter = matches[0]
        if set(legs[enter]) != set(tracks):
            return bad(
                "off-track",
                f"step {n}: path on {tracks} cannot enter the {enter} leg "
                f"{legs[enter]} of {event.name!r}",
            )
        if len(tracks) > 1 and tuple(legs[enter]) != tuple(tracks):
            # Multi-strand legs must chain in identical track order, or the
            # composite's joint-index convention would silently permute.
            return bad(
                "leg-order",
                f"step {n}: entered leg order {legs[enter]} does not match "
                f"the strand order {tracks}",
            )
        for tr in tracks:
            t_prev = times[tr]
            if direction == UP and not event.time > t_prev:
                return bad("bad-order", f"step {n}: {event.name!r} is not above the path")
            if direction == DOWN and not event.time < t_prev:
                return bad("bad-order", f"step {n}: {event.name!r} is not below the path")
            lo, hi = sorted((t_prev, event.time))
            crossed = [
                e.name for e in _events_between(network, tr, lo, hi)
                if e.name != event.name
            ]
            if crossed:
                return bad(
                    "crossed-event",
                    f"step {n}: path crosses {crossed} on track {tr}",
                )
        exit_leg = legs[COD if enter == DOM else DOM]
        tracks = exit_leg
        times = {tr: event.time for tr in tracks}
        direction = DOWN if direction == UP else UP
        covered_max = max(covered_max, event.time)
        w.resolved.append(ResolvedStep(event, enter, expected_from, tracks))

    if set(path.end_tracks) != set(tracks):
        bad("bad-end", f"path finishes on tracks {tracks}, declared end {path.end_tracks}")
        return w
    if len(tracks) > 1 and tuple(path.end_tracks) != tuple(tracks):
        bad("leg-order", f"declared end order {path.end_tracks} does not match "
                         f"the final strand order {tracks}")
        return w
    if direction != UP:
        bad("bad-end", "path ends moving backward in time (violates the ending rule)")
        return w
    end_time = path.end_time
    for tr in tracks:
        blockers = sorted({
            e.name for e in network.events
            if tr in e.tracks and e.time > times[tr]
            and (end_time is None or e.time <= end_time)
        })
        if blockers:
            bad("crossed-event", f"path end on track {tr} crosses {blockers}")
    if end_time is not None and end_time < covered_max:
        bad(
            "ends-early",
            f"path ends at time {end_time} but covers time {covered_max}",
        )
    w.final_tracks = tuple(tracks)
    w.final_direction = direction
    return w


def validate_path(network: Network, path: Path) -> list[Diagnostic]:
    """Diagnostics for geometric and structural path consistency."""
    problems = network.validate()
    if problems:
        return problems
    return walk_path(network, path).diagnostics


def path_input_dims(network: Network, path: Path) -> tuple[int, ...]:
    start = path.start
    if start.kind == "anchor":
        anchor = network.event(start.anchor)
        return (network.dim_of(anchor.track),)
    return tuple(network.dim_of(t) for t in start.tracks)


def apply_path_input(network: Network, path: Path, phi_in) -> Network:
    """Return a copy of the network feeding phi_in to the path's input site."""
    start = path.start
    if start.kind == "input":
        return network.with_input(start.tracks, phi_in)
    if start.kind == "anchor":
        anchor = network.event(start.anchor)
        return network.with_event_replaced(
            anchor.name,
            UnipartiteProjector(anchor.name, anchor.time, anchor.track,
                                np.asarray(phi_in, dtype=complex),
                                anchor.is_preparation),
        )
    raise PathError("free-start paths have no input site; anchor one first")


def _expanded_unitary(network: Network, strand_tracks: tuple[int, ...],
                      event: LocalUnitary, dagger: bool) -> np.ndarray:
    mat = np.conj(event.matrix).T if dagger else event.matrix
    out = np.eye(1, dtype=complex)
    for tr in strand_tracks:
        out = np.kron(out, mat if tr == event.track else np.eye(network.dim_of(tr)))
    return out


def composite(network: Network, path: Path) -> FunctionalLabel:
    """The functional label a valid path induces (the flow prediction).

    Anti-linear projector labels fold through the linearity algebra; when
    every projector label on the path is linear and the path starts forward
    at an input, the fold instead multiplies plain matrices with the
    leaves-downward entries conjugated.  Mixed ingestion falls back to the
    anti-linear reading of each label (same matrix, same projected state).
    """
    wk = walk_path(network, path)
    if not wk.ok:
        raise PathError("invalid path: " + "; ".join(str(d) for d in wk.diagnostics))

    proj_steps = [s for s in wk.resolved if isinstance(s.event, BipartiteProjector)]
    all_linear = bool(proj_steps) and all(
        s.event.label.linearity is LINEAR for s in proj_steps
    )
    if all_linear and path.start.kind == "input":
        return _linear_composite(network, wk)
    return _antilinear_composite(network, wk)


def _contributions(wk: Walk):
    """Yield (resolved step, leaving_down) pairs in traversal order."""
    for step in wk.resolved:
        entered_up = step.enter_from == BELOW
        if isinstance(step.event, LocalUnitary):
            leaving_down = not entered_up  # passes through unaltered
        else:
            leaving_down = entered_up      # bounce: leaves on the entry side
        yield step, leaving_down


def _antilinear_composite(network: Network, wk: Walk) -> FunctionalLabel:
    acc: FunctionalLabel | None = None
    for step, _leaving_down in _contributions(wk):
        if isinstance(step.event, LocalUnitary):
            dagger = step.enter_from == ABOVE
            mat = _expanded_unitary(network, step.strand_tracks, step.event, dagger)
            contrib = FunctionalLabel(mat, LINEAR)
        else:
            label = FunctionalLabel(step.event.label.matrix, ANTILINEAR)
            contrib = label if step.enter == DOM else lb.adjoint(label)
        acc = contrib if acc is None else lb.compose(contrib, acc)
    if acc is None:
        dim = int(np.prod([network.dim_of(t) for t in wk.final_tracks]))
        return FunctionalLabel(np.eye(dim), LINEAR)
    return acc


def _linear_composite(network: Network, wk: Walk) -> FunctionalLabel:
    acc: np.ndarray | None = None
    for step, leaving_down in _contributions(wk):
        if isinstance(step.event, LocalUnitary):
            dagger = step.enter_from == ABOVE
            mat = _expanded_unitary(network, step.strand_tracks, step.event, dagger)
        else:
            # Reversal transposes the matrix; the entered-from-below rule
            # then conjugates independently (together they give the dagger).
            mat = step.event.label.matrix
            if step.enter != DOM:
                mat = mat.T
        if leaving_down:
            mat = np.conj(mat)
        if acc is None:
            acc = mat
        else:
            if mat.shape[1] != acc.shape[0]:
                raise PathError(
                    f"dimension mismatch along the fold: {mat.shape} after {acc.shape}"
                )
            acc = mat @ acc
    if acc is None:
        dim = int(np.prod([network.dim_of(t) for t in wk.final_tracks]))
        acc = np.eye(dim)
    return FunctionalLabel(acc, LINEAR)


def equivalent(network: Network, p1: Path, p2: Path, *, tol: float = 1e-9,
               trials: int = 0, seed: int = 0) -> bool:
    """True iff the two paths produce the same output for every input.

    Sufficient check: the composites agree up to a nonzero scalar and share
    linearity.  With trials > 0 the agreement is additionally sampled on
    random inputs.
    """
    w1, w2 = walk_path(network, p1), walk_path(network, p2)
    if not (w1.ok and w2.ok):
        raise PathError("both paths must be valid")
    if set(w1.input_tracks) != set(w2.input_tracks) or \
            set(w1.final_tracks) != set(w2.final_tracks):
        raise PathError("paths have incompatible endpoints")
    c1 = composite(network, p1)
    c2 = composite(network, p2)
    if c1.linearity is not c2.linearity:
        return False
    if not prop_eq(c1.matrix, c2.matrix, tol):
        return False
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        v = random_complex(rng, c1.dom_dim)
        if not prop_eq(c1(v), c2(v), tol):
            return False
    return True
