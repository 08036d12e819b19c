"""Entanglement specification networks: tracks, discrete times, events.

Tracks are the time-lines of the tensor factors.  Events sit at positive
integer times; at most one event touches a given track at a given time.
Projector events are rank-one and unnormalized throughout; a preparation
is just a projector flagged as such (the flag matters to the protocol
compiler, not to the simulator).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .labels import FunctionalLabel, state_of
from .linalg import as_matrix, as_vector

MAX_TOTAL_DIM = 2 ** 14
UNITARY_TOL = 1e-9


class NetworkError(ValueError):
    """Raised by builders on eager invariant violations."""


@dataclass(frozen=True)
class Track:
    index: int
    dim: int


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int | None = None
    column: int | None = None

    def __str__(self):
        loc = f"{self.line}:{self.column}: " if self.line is not None else ""
        return f"{loc}{self.code}: {self.message}"


@dataclass(frozen=True)
class BipartiteProjector:
    """Directed rank-one projector between two track groups.

    The label's domain spans dom_tracks and its codomain cod_tracks, each in
    the listed order.  The projected state on dom_tracks + cod_tracks is
    state_of(label) with that index order.
    """

    name: str
    time: int
    dom_tracks: tuple[int, ...]
    cod_tracks: tuple[int, ...]
    label: FunctionalLabel
    is_preparation: bool = False

    @property
    def tracks(self) -> tuple[int, ...]:
        return self.dom_tracks + self.cod_tracks

    def state(self) -> np.ndarray:
        return state_of(self.label)


@dataclass(frozen=True)
class LocalUnitary:
    name: str
    time: int
    track: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = as_matrix(self.matrix)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def tracks(self) -> tuple[int, ...]:
        return (self.track,)


@dataclass(frozen=True)
class UnipartiteProjector:
    name: str
    time: int
    track: int
    state_vector: np.ndarray
    is_preparation: bool = False

    def __post_init__(self):
        vec = as_vector(self.state_vector)
        vec.setflags(write=False)
        object.__setattr__(self, "state_vector", vec)

    @property
    def tracks(self) -> tuple[int, ...]:
        return (self.track,)

    def state(self) -> np.ndarray:
        return self.state_vector


@dataclass(frozen=True)
class MultiProjector:
    """Undirected rank-one projector on three or more tracks.

    Amplitudes are indexed by the tracks in the listed order.  These events
    carry no functional direction, so they never sit on paths; predictions
    about them go through the multipartite currying interpretations.
    """

    name: str
    time: int
    track_group: tuple[int, ...]
    amplitudes: np.ndarray
    is_preparation: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tracks(self) -> tuple[int, ...]:
        return self.track_group

    def state(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)


Event = BipartiteProjector | LocalUnitary | UnipartiteProjector | MultiProjector


@dataclass(frozen=True)
class Network:
    """Tracks, events, and pure inputs at time zero.

    Inputs are keyed by track groups so a joint (possibly entangled) pure
    input can cover several tracks; the single-track case is the common one.
    """

    tracks: tuple[Track, ...]
    events: tuple[Event, ...] = ()
    inputs: tuple[tuple[tuple[int, ...], np.ndarray], ...] = ()

    def dim_of(self, track: int) -> int:
        for t in self.tracks:
            if t.index == track:
                return t.dim
        raise KeyError(f"no track {track}")

    @property
    def track_indices(self) -> tuple[int, ...]:
        return tuple(t.index for t in self.tracks)

    @property
    def total_dim(self) -> int:
        return int(np.prod([t.dim for t in self.tracks])) if self.tracks else 1

    @property
    def max_time(self) -> int:
        return max((e.time for e in self.events), default=0)

    def event(self, name: str) -> Event:
        for e in self.events:
            if e.name == name:
                return e
        raise KeyError(f"no event named {name!r}")

    def has_event(self, name: str) -> bool:
        return any(e.name == name for e in self.events)

    def input_for(self, tracks) -> np.ndarray | None:
        key = _as_track_tuple(tracks)
        for group, vec in self.inputs:
            if group == key:
                return vec
        return None

    def input_covers(self, track: int) -> bool:
        return any(track in group for group, _ in self.inputs)

    def events_on_track(self, track: int) -> list[Event]:
        return sorted((e for e in self.events if track in e.tracks), key=lambda e: e.time)

    def with_input(self, tracks, state) -> "Network":
        """Copy with the pure input on a track group replaced (added if absent)."""
        group = _as_track_tuple(tracks)
        vec = as_vector(state)
        want = int(np.prod([self.dim_of(t) for t in group]))
        if vec.shape[0] != want:
            raise NetworkError(f"input length {vec.shape[0]} != joint dim {want}")
        kept = tuple((g, v) for g, v in self.inputs if set(g) != set(group))
        for g, _ in kept:
            if set(g) & set(group):
                raise NetworkError(f"input group {group} overlaps existing group {g}")
        return replace(self, inputs=kept + ((group, vec),))

    def with_event_replaced(self, name: str, event: Event) -> "Network":
        if not self.has_event(name):
            raise KeyError(f"no event named {name!r}")
        return replace(
            self, events=tuple(event if e.name == name else e for e in self.events)
        )

    def with_events_added(self, *events: Event) -> "Network":
        return replace(self, events=self.events + tuple(events))

    def validate(self) -> list[Diagnostic]:
        """Structural diagnostics; empty iff all network invariants hold."""
        out: list[Diagnostic] = []
        seen_tracks: set[int] = set()
        for t in self.tracks:
            if t.index in seen_tracks:
                out.append(Diagnostic("duplicate-track", f"track {t.index} defined twice"))
            seen_tracks.add(t.index)
            if t.dim < 1:
                out.append(Diagnostic("bad-dim", f"track {t.index} has dim {t.dim}"))

        names: set[str] = set()
        occupied: set[tuple[int, int]] = set()
        for e in self.events:
            if e.name in names:
                out.append(Diagnostic("duplicate-name", f"event name {e.name!r} reused"))
            names.add(e.name)
            if e.time < 1:
                out.append(Diagnostic("bad-time", f"event {e.name!r} at time {e.time} < 1"))
            missing = [tr for tr in e.tracks if tr not in seen_tracks]
            if missing:
                out.append(
                    Diagnostic("dangling-track", f"event {e.name!r} references tracks {missing}")
                )
                continue
            if len(set(e.tracks)) != len(e.tracks):
                out.append(Diagnostic("track-overlap", f"event {e.name!r} repeats a track"))
            for tr in e.tracks:
                key = (tr, e.time)
                if key in occupied:
                    out.append(
                        Diagnostic(
                            "collision",
                            f"two events touch track {tr} at time {e.time}",
                        )
                    )
                occupied.add(key)
            out.extend(self._check_event_dims(e))

        covered: set[int] = set()
        for group, vec in self.inputs:
            missing = [t for t in group if t not in seen_tracks]
            if missing:
                out.append(Diagnostic("dangling-track", f"input on unknown tracks {missing}"))
                continue
            if set(group) & covered:
                out.append(Diagnostic("collision", f"input group {group} overlaps another"))
            covered.update(group)
            want = int(np.prod([self.dim_of(t) for t in group]))
            if vec.shape[0] != want:
                out.append(
                    Diagnostic("bad-dim", f"input on tracks {group} has length {vec.shape[0]}")
                )
        return out

    def _check_event_dims(self, e: Event) -> list[Diagnostic]:
        out: list[Diagnostic] = []
        if isinstance(e, BipartiteProjector):
            dom = int(np.prod([self.dim_of(t) for t in e.dom_tracks]))
            cod = int(np.prod([self.dim_of(t) for t in e.cod_tracks]))
            if (e.label.dom_dim, e.label.cod_dim) != (dom, cod):
                out.append(
                    Diagnostic(
                        "bad-dim",
                        f"event {e.name!r} label is {e.label.cod_dim}x{e.label.dom_dim}, "
                        f"tracks give {cod}x{dom}",
                    )
                )
        elif isinstance(e, LocalUnitary):
            d = self.dim_of(e.track)
            if e.matrix.shape != (d, d):
                out.append(Diagnostic("bad-dim", f"unitary {e.name!r} shape {e.matrix.shape}"))
            else:
                dev = np.max(np.abs(e.matrix.conj().T @ e.matrix - np.eye(d)))
                if dev > UNITARY_TOL:
                    out.append(
                        Diagnostic("not-unitary", f"event {e.name!r} deviates by {dev:.2e}")
                    )
        elif isinstance(e, UnipartiteProjector):
            if e.state_vector.shape[0] != self.dim_of(e.track):
                out.append(Diagnostic("bad-dim", f"state of {e.name!r} has wrong length"))
        elif isinstance(e, MultiProjector):
            dims = tuple(self.dim_of(t) for t in e.track_group)
            if e.amplitudes.shape != dims and e.amplitudes.shape != (int(np.prod(dims)),):
                out.append(Diagnostic("bad-dim", f"amplitudes of {e.name!r} have wrong shape"))
        return out


def _as_track_tuple(tracks) -> tuple[int, ...]:
    try:
        return (int(tracks),)
    except TypeError:
        return tuple(int(t) for t in tracks)


@dataclass
class NetworkBuilder:
    """Incremental construction with eager invariant checks."""

    _tracks: dict[int, int] = field(default_factory=dict)
    _events: list[Event] = field(default_factory=list)
    _inputs: dict[tuple[int, ...], np.ndarray] = field(default_factory=dict)
    _auto: int = 0

    def add_track(self, index: int, dim: int = 2) -> "NetworkBuilder":
        if index in self._tracks:
            raise NetworkError(f"track {index} already defined")
        if dim < 1:
            raise NetworkError(f"track dim must be >= 1, got {dim}")
        self._tracks[index] = dim
        return self

    def _fresh_name(self, prefix: str) -> str:
        self._auto += 1
        return f"{prefix}{self._auto}"

    def _check_placement(self, tracks: tuple[int, ...], time: int, name: str) -> None:
        if time < 1:
            raise NetworkError(f"event time must be >= 1, got {time}")
        if len(set(tracks)) != len(tracks):
            raise NetworkError(f"event {name!r} repeats a track")
        for tr in tracks:
            if tr not in self._tracks:
                raise NetworkError(f"event {name!r} references unknown track {tr}")
            for e in self._events:
                if e.time == time and tr in e.tracks:
                    raise NetworkError(f"track {tr} already occupied at time {time}")
        if any(e.name == name for e in self._events):
            raise NetworkError(f"event name {name!r} reused")

    def add_projector(self, time: int, dom, cod, label: FunctionalLabel, *,
                      name: str | None = None, is_preparation: bool = False) -> str:
        dom_tracks = _as_track_tuple(dom)
        cod_tracks = _as_track_tuple(cod)
        name = name or self._fresh_name("p")
        self._check_placement(dom_tracks + cod_tracks, time, name)
        dom_dim = int(np.prod([self._tracks[t] for t in dom_tracks]))
        cod_dim = int(np.prod([self._tracks[t] for t in cod_tracks]))
        if (label.dom_dim, label.cod_dim) != (dom_dim, cod_dim):
            raise NetworkError(
                f"label of {name!r} is {label.cod_dim}x{label.dom_dim}, "
                f"tracks give {cod_dim}x{dom_dim}"
            )
        self._events.append(
            BipartiteProjector(name, time, dom_tracks, cod_tracks, label, is_preparation)
        )
        return name

    def add_prep(self, time: int, dom, cod, label: FunctionalLabel, *,
                 name: str | None = None) -> str:
        return self.add_projector(time, dom, cod, label, name=name, is_preparation=True)

    def add_unitary(self, time: int, track: int, matrix, *, name: str | None = None) -> str:
        name = name or self._fresh_name("u")
        self._check_placement((track,), time, name)
        mat = as_matrix(matrix)
        d = self._tracks[track]
        if mat.shape != (d, d):
            raise NetworkError(f"unitary {name!r} has shape {mat.shape}, track dim {d}")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(d)))
        if dev > UNITARY_TOL:
            raise NetworkError(f"matrix of {name!r} is not unitary (deviation {dev:.2e})")
        self._events.append(LocalUnitary(name, time, track, mat))
        return name

    def add_uniprojector(self, time: int, track: int, state, *,
                         name: str | None = None, is_preparation: bool = False) -> str:
        name = name or self._fresh_name("q")
        self._check_placement((track,), time, name)
        vec = as_vector(state)
        if vec.shape[0] != self._tracks[track]:
            raise NetworkError(f"state of {name!r} has length {vec.shape[0]}")
        self._events.append(UnipartiteProjector(name, time, track, vec, is_preparation))
        return name

    def add_multiprojector(self, time: int, tracks, amplitudes, *,
                           name: str | None = None, is_preparation: bool = False) -> str:
        track_group = _as_track_tuple(tracks)
        name = name or self._fresh_name("m")
        self._check_placement(track_group, time, name)
        dims = tuple(self._tracks[t] for t in track_group)
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != dims and amps.shape != (int(np.prod(dims)),):
            raise NetworkError(f"amplitudes of {name!r} have shape {amps.shape}")
        self._events.append(MultiProjector(name, time, track_group, amps, is_preparation))
        return name

    def set_input(self, tracks, state) -> "NetworkBuilder":
        group = _as_track_tuple(tracks)
        for tr in group:
            if tr not in self._tracks:
                raise NetworkError(f"input on unknown track {tr}")
            for other in self._inputs:
                if tr in other and other != group:
                    raise NetworkError(f"input group {group} overlaps {other}")
        vec = as_vector(state)
        want = int(np.prod([self._tracks[t] for t in group]))
        if vec.shape[0] != want:
            raise NetworkError(f"input on tracks {group} has length {vec.shape[0]}")
        self._inputs[group] = vec
        return self

    def build(self) -> Network:
        tracks = tuple(Track(i, d) for i, d in sorted(self._tracks.items()))
        net = Network(
            tracks=tracks,
            events=tuple(self._events),
            inputs=tuple(sorted(self._inputs.items())),
        )
        problems = net.validate()
        if problems:
            raise NetworkError("; ".join(str(p) for p in problems))
        return net
