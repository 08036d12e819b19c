"""Brute-force unnormalized state-vector simulator.

Every event is applied literally to a dense amplitude tensor: rank-one
projectors by the index-substitution contraction

    psi'[i..] = sum_j psi[i.. with j on the projected axes]
                * conj(phi[j]) * phi[i on the projected axes]

and local unitaries by a single-axis tensordot.  No normalization is ever
applied; all comparisons downstream are scale-free.  This module is the
independent ground truth the path predictions are checked against, so it
must never import the path engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .labels import ANTILINEAR, FunctionalLabel, Linearity
from .linalg import random_complex
from .network import (
    BipartiteProjector,
    LocalUnitary,
    MultiProjector,
    Network,
    UnipartiteProjector,
    MAX_TOTAL_DIM,
)

ZERO_RATIO = 1e-12


class ZeroAmplitudeError(RuntimeError):
    """The post-selected branch has (numerically) zero amplitude."""


class CapacityError(RuntimeError):
    """The network exceeds the dense-tensor size cap."""


@dataclass(frozen=True)
class StateTensor:
    """Unnormalized joint state, one tensor axis per track (sorted by index)."""

    track_indices: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != len(self.track_indices):
            raise ValueError("amplitude rank does not match track count")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.amplitudes.shape

    def axis_of(self, track: int) -> int:
        return self.track_indices.index(track)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.amplitudes))) if self.amplitudes.size else 0.0


@dataclass(frozen=True)
class FactorReport:
    """Best rank-one split of a state across a track bipartition."""

    track_subset: tuple[int, ...]
    factor: np.ndarray            # amplitudes on track_subset, in that order
    remainder: np.ndarray         # amplitudes on the complement, sorted
    residual: float               # second/first singular value across the cut

    def factor_label(self, linearity: Linearity = ANTILINEAR) -> FunctionalLabel:
        """Read a two-track factor as a functional label (first track = domain)."""
        if len(self.track_subset) != 2:
            raise ValueError("factor_label needs exactly two tracks")
        d = int(round(np.sqrt(self.factor.size)))
        from .labels import label_of  # local import to keep module edges thin

        return label_of(self.factor, d, self.factor.size // d, linearity)


def initial_state(network: Network, *, seed: int) -> StateTensor:
    """Pure inputs on input tracks, a seeded generic joint state elsewhere.

    The joint remainder is entangled across all tracks without a declared
    input, with amplitudes uniform on the complex unit disk.
    """
    if network.total_dim > MAX_TOTAL_DIM:
        raise CapacityError(
            f"total dimension {network.total_dim} exceeds cap {MAX_TOTAL_DIM}"
        )
    rng = np.random.default_rng(seed)
    order = network.track_indices
    dims = {t.index: t.dim for t in network.tracks}
    groups = sorted(network.inputs, key=lambda gv: gv[0])
    in_tracks = [t for g, _ in groups for t in g]
    free = [t for t in order if t not in in_tracks]

    # Assemble on (input groups..., free...) axes, then permute to track order.
    amps = np.ones((), dtype=complex)
    for group, vec in groups:
        shaped = np.asarray(vec, dtype=complex).reshape([dims[t] for t in group])
        amps = np.tensordot(amps, shaped, axes=0)
    if free:
        amps = np.tensordot(amps, random_complex(rng, *[dims[t] for t in free]), axes=0)
    assembled_order = in_tracks + free
    perm = [assembled_order.index(t) for t in order]
    if order:
        amps = np.transpose(amps, perm)
    else:
        amps = amps.reshape(())
    return StateTensor(order, np.ascontiguousarray(amps))


def apply_projector(state: StateTensor, tracks, phi) -> StateTensor:
    """Apply the unnormalized rank-one projector onto phi on the given tracks.

    phi is indexed by the tracks in the order given.  Zero output is allowed
    here; run() is responsible for flagging dead branches.
    """
    track_list = list(tracks)
    if not track_list:
        raise ValueError("projector needs at least one track")
    axes = [state.axis_of(t) for t in track_list]
    sub_dims = tuple(state.dims[a] for a in axes)
    phi_arr = np.asarray(phi, dtype=complex).reshape(sub_dims)

    moved = np.moveaxis(state.amplitudes, axes, range(len(axes)))
    k = len(axes)
    # <phi| contraction over the projected axes, then re-tensor with phi.
    contracted = np.tensordot(np.conj(phi_arr), moved, axes=(range(k), range(k)))
    new = np.tensordot(phi_arr, contracted, axes=0)
    new = np.moveaxis(new, range(len(axes)), axes)
    return StateTensor(state.track_indices, np.ascontiguousarray(new))


def apply_unitary(state: StateTensor, track: int, matrix) -> StateTensor:
    axis = state.axis_of(track)
    mat = np.asarray(matrix, dtype=complex)
    new = np.tensordot(mat, state.amplitudes, axes=([1], [axis]))
    new = np.moveaxis(new, 0, axis)
    return StateTensor(state.track_indices, np.ascontiguousarray(new))


def apply_event(state: StateTensor, network: Network, event) -> StateTensor:
    if isinstance(event, BipartiteProjector):
        return apply_projector(state, event.tracks, event.state())
    if isinstance(event, UnipartiteProjector):
        return apply_projector(state, event.tracks, event.state())
    if isinstance(event, MultiProjector):
        return apply_projector(state, event.tracks, event.state())
    if isinstance(event, LocalUnitary):
        return apply_unitary(state, event.track, event.matrix)
    raise TypeError(f"unknown event type {type(event).__name__}")


def run(network: Network, *, seed: int, event_log: list | None = None) -> StateTensor:
    """Apply all events in time order and return the final unnormalized state.

    Simultaneous events touch disjoint tracks (validated), so any fixed
    order works; we sort by (time, first track) for determinism.  Raises
    ZeroAmplitudeError if the final amplitude is numerically zero relative
    to the initial one.  Pass event_log=[] to collect (event name, max
    amplitude after the event) pairs for diagnosing which projector killed
    a branch.
    """
    problems = network.validate()
    if problems:
        raise ValueError("invalid network: " + "; ".join(str(p) for p in problems))
    state = initial_state(network, seed=seed)
    ref = state.max_abs()
    for event in sorted(network.events, key=lambda e: (e.time, min(e.tracks))):
        state = apply_event(state, network, event)
        if event_log is not None:
            event_log.append((event.name, state.max_abs()))
    if ref > 0 and state.max_abs() < ZERO_RATIO * ref:
        raise ZeroAmplitudeError(
            "final state has zero amplitude; the post-selected branch is impossible"
        )
    return state


def extract_factor(state: StateTensor, tracks) -> FactorReport:
    """Best rank-one split across the (tracks | complement) bipartition."""
    subset = tuple(tracks)
    if state.max_abs() == 0.0:
        raise ValueError("cannot factor the zero state")
    axes = [state.axis_of(t) for t in subset]
    other_axes = [a for a in range(len(state.track_indices)) if a not in axes]
    moved = np.transpose(state.amplitudes, axes + other_axes)
    left = int(np.prod([state.dims[a] for a in axes])) if axes else 1
    mat = moved.reshape(left, -1)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    residual = float(s[1] / s[0]) if s.size > 1 and s[0] > 0 else 0.0
    factor = u[:, 0] * np.sqrt(s[0])
    remainder = vh[0, :] * np.sqrt(s[0])
    return FactorReport(subset, factor, remainder, residual)


@dataclass(frozen=True)
class TrialResult:
    index: int
    zero_amplitude: bool
    passed: bool
    factor_residual: float
    match_deviation: float


@dataclass(frozen=True)
class TheoremReport:
    trials: tuple[TrialResult, ...]

    @property
    def passed_count(self) -> int:
        return sum(1 for t in self.trials if t.passed and not t.zero_amplitude)

    @property
    def failed_count(self) -> int:
        return sum(1 for t in self.trials if not t.passed and not t.zero_amplitude)

    @property
    def zero_count(self) -> int:
        return sum(1 for t in self.trials if t.zero_amplitude)

    @property
    def all_passed(self) -> bool:
        return self.failed_count == 0


def verify_theorem(network: Network, path, *, trials: int, seed: int,
                   tol: float = 1e-9) -> TheoremReport:
    """Check the path prediction against the oracle over random inputs.

    Per trial: draw a random input for the path, run the simulator, extract
    the output-track factor and compare it (up to scalar) with the composite
    label applied to the input.  Zero-amplitude trials are reported
    separately; they mean the branch precondition was unmet, not a failure.
    """
    from .linalg import prop_deviation
    from .paths import composite, path_input_dims, apply_path_input

    pred = composite(network, path)
    in_dim = int(np.prod(path_input_dims(network, path)))
    results = []
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        phi_in = random_complex(rng, in_dim)
        trial_net = apply_path_input(network, path, phi_in)
        try:
            final = run(trial_net, seed=int(rng.integers(2 ** 31)))
        except ZeroAmplitudeError:
            results.append(TrialResult(i, True, False, float("nan"), float("nan")))
            continue
        report = extract_factor(final, path.output_tracks(network))
        expected = pred(phi_in)
        dev = prop_deviation(report.factor, expected)
        results.append(TrialResult(i, False, dev <= tol, report.residual, dev))
    return TheoremReport(tuple(results))
