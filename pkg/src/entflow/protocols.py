"""Protocol trees, branch instantiation, and unconditional compilation.

A conditional protocol fixes one outcome per measurement; the tree of all
outcomes carries classical tokens on its edges and one network per
root-to-leaf walk.  Compilation synthesizes, for every branch, the unitary
correction at the end of the path that makes the branch realize the same
target map as the designated branch, turning the conditional protocol into
an unconditional one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from . import labels as lb
from .labels import (
    ANTILINEAR,
    FunctionalLabel,
    Measurement,
    bell_id,
    bell_labels,
    bell_measurement,
)
from .linalg import kron_factor, prop_deviation, prop_eq, random_complex
from .network import (
    BipartiteProjector,
    LocalUnitary,
    Network,
    NetworkBuilder,
    Track,
    UnipartiteProjector,
)
from .oracle import ZeroAmplitudeError, extract_factor, run
from .paths import (
    Path,
    PathStep,
    apply_path_input,
    composite,
    start_at_anchor,
    start_at_input,
    start_free,
    walk_path,
)

UNITARY_TOL = 1e-9


class NotCompilableError(RuntimeError):
    """A branch does not admit a local unitary end-of-path correction."""

    def __init__(self, tokens: tuple[str, ...], reason: str):
        super().__init__(f"branch {'.'.join(tokens)}: {reason}")
        self.tokens = tokens
        self.reason = reason


@dataclass(frozen=True)
class BranchPoint:
    """A measurement whose outcome projector occupies a fixed placement."""

    name: str                       # event name of the instantiated projector
    measurement: Measurement
    time: int
    dom_tracks: tuple[int, ...]
    cod_tracks: tuple[int, ...]
    children: tuple[tuple[str, "ProtocolNode"], ...]

    def child(self, token: str) -> "ProtocolNode":
        for t, node in self.children:
            if t == token:
                return node
        raise KeyError(f"unknown outcome token {token!r}")

    def projector_for(self, token: str) -> BipartiteProjector:
        label = self.measurement.label_for(token)
        if not isinstance(label, FunctionalLabel):
            raise TypeError("branch outcomes must be functional labels")
        return BipartiteProjector(self.name, self.time, self.dom_tracks,
                                  self.cod_tracks, label)


@dataclass(frozen=True)
class ProtocolNode:
    steps: tuple[object, ...] = ()          # events applied before branching
    branch: BranchPoint | None = None       # None marks a leaf


@dataclass(frozen=True)
class ProtocolTree:
    tracks: tuple[Track, ...]
    inputs: tuple[tuple[int, np.ndarray], ...]
    root: ProtocolNode

    @property
    def leaf_count(self) -> int:
        def count(node: ProtocolNode) -> int:
            if node.branch is None:
                return 1
            return sum(count(child) for _, child in node.branch.children)
        return count(self.root)

    def branch_tokens(self) -> list[tuple[str, ...]]:
        out: list[tuple[str, ...]] = []

        def walk(node: ProtocolNode, prefix: tuple[str, ...]):
            if node.branch is None:
                out.append(prefix)
                return
            for token, child in node.branch.children:
                walk(child, prefix + (token,))

        walk(self.root, ())
        return out


def tree_of_network(network: Network) -> ProtocolTree:
    """A branchless protocol tree; instantiating it returns the network as is."""
    return ProtocolTree(
        tracks=tuple(Track(t.index, t.dim) for t in network.tracks),
        inputs=network.inputs,
        root=ProtocolNode(steps=network.events),
    )


def instantiate(tree: ProtocolTree, tokens) -> Network:
    """The network of one root-to-leaf walk: one token per branching node."""
    tokens = tuple(tokens)
    events = []
    node = tree.root
    used = 0
    while True:
        events.extend(node.steps)
        if node.branch is None:
            break
        if used >= len(tokens):
            raise KeyError("not enough tokens for the protocol's branching nodes")
        token = tokens[used]
        events.append(node.branch.projector_for(token))
        node = node.branch.child(token)
        used += 1
    if used != len(tokens):
        raise KeyError(f"expected {used} tokens, got {len(tokens)}")
    return Network(tree.tracks, tuple(events), tree.inputs)


@dataclass(frozen=True)
class CompiledProtocol:
    """An unconditional protocol: every corrected branch realizes target."""

    tree: ProtocolTree
    corrections: dict[tuple[str, ...], np.ndarray]
    target: FunctionalLabel
    path: Path
    branch_order: tuple[str, ...]            # measured event names, time order
    designated: tuple[str, ...]              # tokens of the designated branch
    branch_corrections: dict[tuple[str, ...], tuple[LocalUnitary, ...]] | None = None

    def branches(self) -> list[tuple[str, ...]]:
        return self.tree.branch_tokens()

    def network_for(self, tokens) -> Network:
        return instantiate(self.tree, tokens)


def _phase_normalize(matrix: np.ndarray) -> np.ndarray:
    flat = matrix.reshape(-1)
    idx = int(np.argmax(np.abs(flat)))
    pivot = flat[idx]
    if pivot == 0:
        return matrix
    return matrix * (np.conj(pivot) / abs(pivot))


def synthesize_correction(branch_composite: FunctionalLabel,
                          target: FunctionalLabel,
                          tokens: tuple[str, ...],
                          tol: float = UNITARY_TOL) -> np.ndarray:
    """Solve K @ C_b = c * target for a unitary K, or raise NotCompilableError."""
    c_mat = branch_composite.matrix
    t_mat = target.matrix
    if branch_composite.linearity is not target.linearity:
        raise NotCompilableError(tokens, "branch changes the composite linearity")
    if c_mat.shape != t_mat.shape:
        raise NotCompilableError(tokens, "branch changes the composite shape")
    if c_mat.shape[0] != c_mat.shape[1]:
        raise NotCompilableError(tokens, "non-square composite; no end correction exists")
    if abs(np.linalg.det(c_mat)) < 1e-300:
        raise NotCompilableError(tokens, "singular branch composite")
    k = t_mat @ np.linalg.inv(c_mat)
    gram = k.conj().T @ k
    scale = np.sqrt(np.trace(gram).real / k.shape[0])
    if scale == 0:
        raise NotCompilableError(tokens, "zero correction")
    k = k / scale
    dev = np.max(np.abs(k.conj().T @ k - np.eye(k.shape[0])))
    if dev > tol:
        raise NotCompilableError(
            tokens, f"correction is not unitary (deviation {dev:.2e})"
        )
    return _phase_normalize(k)


def _correction_events(network: Network, out_tracks: tuple[int, ...],
                       k: np.ndarray, time: int,
                       tokens: tuple[str, ...], tol: float) -> list[LocalUnitary]:
    if len(out_tracks) == 1:
        return [LocalUnitary(f"corr_{'.'.join(tokens) or 'x'}", time, out_tracks[0], k)]
    if len(out_tracks) == 2:
        dims = tuple(network.dim_of(t) for t in out_tracks)
        a, b, residual = kron_factor(k, dims)
        if residual > tol:
            raise NotCompilableError(
                tokens,
                f"correction does not factor into local unitaries (residual {residual:.2e})",
            )
        # Rebalance so both factors are unitary.
        a = a / np.sqrt(np.trace(a.conj().T @ a).real / dims[0])
        b = b / np.sqrt(np.trace(b.conj().T @ b).real / dims[1])
        tag = ".".join(tokens) or "x"
        return [
            LocalUnitary(f"corr_{tag}_a", time, out_tracks[0], _phase_normalize(a)),
            LocalUnitary(f"corr_{tag}_b", time, out_tracks[1], _phase_normalize(b)),
        ]
    raise NotCompilableError(tokens, "corrections on 3+ tracks are not supported")


def compile_unconditional(network: Network, path: Path,
                          measurements: dict[str, Measurement],
                          target: FunctionalLabel | None = None,
                          *, tol: float = UNITARY_TOL) -> CompiledProtocol:
    """Compile the conditional protocol into an unconditional one.

    ``measurements`` maps names of measured projector events to the
    measurement families they belong to; each family must contain the
    event's current label (the designated outcome).  Corrections are
    synthesized by direct inversion at the end of the path and placed on
    the output tracks; a branch whose composite is singular or whose
    correction is not unitary (or not a product of local unitaries)
    raises NotCompilableError.
    """
    wk = walk_path(network, path)
    if not wk.ok:
        raise ValueError("invalid path: " + "; ".join(str(d) for d in wk.diagnostics))
    measured = []
    for name in measurements:
        event = network.event(name)
        if not isinstance(event, BipartiteProjector):
            raise ValueError(f"measured event {name!r} is not a projector")
        if event.is_preparation:
            raise ValueError(f"measured event {name!r} is a preparation")
        measured.append(event)
    measured.sort(key=lambda e: (e.time, min(e.tracks)))
    branch_order = tuple(e.name for e in measured)

    designated = []
    for event in measured:
        family = measurements[event.name]
        token = None
        for t in family.tokens:
            outcome = family.label_for(t)
            if isinstance(outcome, FunctionalLabel) and \
                    outcome.matrix.shape == event.label.matrix.shape and \
                    prop_eq(outcome.matrix, event.label.matrix, 1e-9):
                token = t
                break
        if token is None:
            raise ValueError(
                f"measurement for {event.name!r} does not contain the designated label"
            )
        designated.append(token)
    designated = tuple(designated)

    base_target = composite(network, path)
    if target is None:
        target = base_target
    elif target.linearity is not base_target.linearity or \
            not prop_eq(target.matrix, base_target.matrix, 1e-9):
        raise ValueError("target does not match the designated branch composite")

    out_tracks = path.end_tracks
    corr_time = network.max_time + 1
    token_sets = [measurements[name].tokens for name in branch_order]
    corrections: dict[tuple[str, ...], np.ndarray] = {}
    branch_events: dict[tuple[str, ...], list[LocalUnitary]] = {}
    for combo in itertools.product(*token_sets):
        net_b = network
        for name, token in zip(branch_order, combo):
            event = network.event(name)
            outcome = measurements[name].label_for(token)
            net_b = net_b.with_event_replaced(name, replace(event, label=outcome))
        c_b = composite(net_b, path)
        k = synthesize_correction(c_b, target, combo, tol)
        corrections[combo] = k
        branch_events[combo] = _correction_events(network, out_tracks, k,
                                                  corr_time, combo, tol)

    base_events = tuple(e for e in network.events if e.name not in measurements)

    def build_node(prefix: tuple[str, ...], remaining: list[str]) -> ProtocolNode:
        if not remaining:
            return ProtocolNode(steps=tuple(branch_events[prefix]))
        name = remaining[0]
        event = network.event(name)
        family = measurements[name]
        children = tuple(
            (token, build_node(prefix + (token,), remaining[1:]))
            for token in family.tokens
        )
        bp = BranchPoint(name, family, event.time, event.dom_tracks,
                         event.cod_tracks, children)
        return ProtocolNode(steps=(), branch=bp)

    root_inner = build_node((), list(branch_order))
    root = ProtocolNode(steps=base_events, branch=root_inner.branch) \
        if not root_inner.steps else ProtocolNode(steps=base_events + root_inner.steps)
    tree = ProtocolTree(
        tracks=tuple(Track(t.index, t.dim) for t in network.tracks),
        inputs=network.inputs,
        root=root,
    )
    return CompiledProtocol(tree, corrections, target, path, branch_order,
                            designated,
                            {k: tuple(v) for k, v in branch_events.items()})


def anchored_for_input(network: Network, path: Path) -> tuple[Network, Path]:
    """Attach an input site to a free-start path (a unipartite projector on top)."""
    if path.start.kind != "free":
        return network, path
    track = path.start.tracks[0]
    time = network.max_time + 2
    dim = network.dim_of(track)
    anchored = network.with_events_added(
        UnipartiteProjector("input_anchor", time, track, np.zeros(dim, dtype=complex))
    )
    new_path = replace(path, start=start_at_anchor("input_anchor", "down"))
    return anchored, new_path


@dataclass(frozen=True)
class BranchTrial:
    index: int
    zero_amplitude: bool
    passed: bool
    deviation: float


@dataclass(frozen=True)
class BranchCheck:
    tokens: tuple[str, ...]
    trials: tuple[BranchTrial, ...]

    @property
    def passed(self) -> int:
        return sum(1 for t in self.trials if t.passed)

    @property
    def failed(self) -> int:
        return sum(1 for t in self.trials if not t.passed and not t.zero_amplitude)

    @property
    def zero(self) -> int:
        return sum(1 for t in self.trials if t.zero_amplitude)

    @property
    def worst_deviation(self) -> float:
        live = [t.deviation for t in self.trials if not t.zero_amplitude]
        return max(live) if live else 0.0


def verify_compiled(compiled: CompiledProtocol, *, trials: int, seed: int,
                    tol: float = 1e-9) -> list[BranchCheck]:
    """Oracle check: every corrected branch sends phi to target(phi)."""
    results = []
    for branch_no, tokens in enumerate(compiled.branches()):
        net = compiled.network_for(tokens)
        net, path = anchored_for_input(net, compiled.path)
        in_dim = compiled.target.dom_dim
        rows = []
        for i in range(trials):
            rng = np.random.default_rng([seed, branch_no, i])
            phi = random_complex(rng, in_dim)
            trial_net = apply_path_input(net, path, phi)
            try:
                final = run(trial_net, seed=int(rng.integers(2 ** 31)))
            except ZeroAmplitudeError:
                rows.append(BranchTrial(i, True, False, float("nan")))
                continue
            factor = extract_factor(final, path.end_tracks).factor
            dev = prop_deviation(factor, compiled.target(phi))
            rows.append(BranchTrial(i, False, dev <= tol, dev))
        results.append(BranchCheck(tokens, tuple(rows)))
    return results


@dataclass(frozen=True)
class Builtin:
    """A ready-to-compile quadruple: network, path, measurement families, target."""

    network: Network
    path: Path
    measurements: dict[str, Measurement]
    target: FunctionalLabel

    def compile(self, *, tol: float = UNITARY_TOL) -> CompiledProtocol:
        return compile_unconditional(self.network, self.path, self.measurements,
                                     self.target, tol=tol)


def builtin_teleportation(two_stage: bool = False) -> Builtin:
    """Teleport one qubit; optionally with the two one-bit virtual measurements.

    The flat variant measures in the Bell basis (four outcomes).  The
    two-stage variant chains two one-bit measured projectors through an
    extra entangled pair so the path composes their labels, reproducing
    the Bell set by composition.
    """
    if not two_stage:
        b = NetworkBuilder()
        for t in (1, 2, 3):
            b.add_track(t, 2)
        b.add_prep(1, 2, 3, bell_id(), name="pair")
        b.add_projector(2, 1, 2, bell_id(), name="m")
        net = b.build()
        path = Path(start_at_input(1), (PathStep("m"), PathStep("pair")),
                    end_tracks=(3,))
        return Builtin(net, path, {"m": bell_measurement()},
                       composite(net, path))

    first, second = lb.virtual_factorization()
    b = NetworkBuilder()
    for t in (1, 2, 3, 4, 5):
        b.add_track(t, 2)
    b.add_projector(2, 1, 2, bell_id(), name="m1")
    b.add_prep(1, 2, 3, bell_id(), name="pair1")
    b.add_projector(2, 3, 4, bell_id(), name="m2")
    b.add_prep(1, 4, 5, bell_id(), name="pair2")
    net = b.build()
    path = Path(
        start_at_input(1),
        (PathStep("m1"), PathStep("pair1"), PathStep("m2"), PathStep("pair2")),
        end_tracks=(5,),
    )
    return Builtin(net, path, {"m1": first, "m2": second}, composite(net, path))


def tensor_bell_measurement(pairs: int) -> Measurement:
    """Bell measurements on each of ``pairs`` qubit pairs, tokens concatenated."""
    singles = bell_labels()
    outcomes = []
    for combo in itertools.product(sorted(singles), repeat=pairs):
        label = None
        for token in combo:
            label = singles[token] if label is None else lb.tensor(label, singles[token])
        outcomes.append(("".join(combo), label))
    return Measurement((2,) * (2 * pairs), tuple(outcomes))


def builtin_gate_teleportation(g: FunctionalLabel) -> Builtin:
    """Teleport a state through the preparation of the g-labeled state.

    g must be square with a power-of-two dimension; the measurement is the
    tensor of Bell measurements on the input qubit pairs, so corrections
    exist whenever g conjugates tensor-Paulis to local unitaries.
    """
    if g.dom_dim != g.cod_dim:
        raise ValueError("gate label must be square")
    m = int(np.log2(g.dom_dim))
    if 2 ** m != g.dom_dim:
        raise ValueError("gate dimension must be a power of two")
    b = NetworkBuilder()
    for t in range(1, 3 * m + 1):
        b.add_track(t, 2)
    ins = tuple(range(1, m + 1))
    mids = tuple(range(m + 1, 2 * m + 1))
    outs = tuple(range(2 * m + 1, 3 * m + 1))
    gate_label = FunctionalLabel(g.matrix, ANTILINEAR)
    b.add_prep(1, mids, outs, gate_label, name="gate")
    meas_label = FunctionalLabel(np.eye(2 ** m), ANTILINEAR)
    b.add_projector(2, ins, mids, meas_label, name="m")
    net = b.build()
    path = Path(start_at_input(ins), (PathStep("m"), PathStep("gate")),
                end_tracks=outs)
    return Builtin(net, path, {"m": tensor_bell_measurement(m)},
                   composite(net, path))


def builtin_swap() -> Builtin:
    """Entanglement swapping: two pairs, a Bell measurement in the middle."""
    b = NetworkBuilder()
    for t in (1, 2, 3, 4):
        b.add_track(t, 2)
    b.add_prep(1, 1, 2, bell_id(), name="pair12")
    b.add_prep(1, 3, 4, bell_id(), name="pair34")
    b.add_projector(2, 2, 3, bell_id(), name="m")
    net = b.build()
    path = Path(start_free(1, 3, "down"),
                (PathStep("pair12"), PathStep("m"), PathStep("pair34")),
                end_tracks=(4,))
    return Builtin(net, path, {"m": bell_measurement()}, composite(net, path))


def builtin_parallel(fs: list[FunctionalLabel]) -> Builtin:
    """Realize the composite of a gate list with all gates applied in parallel.

    Each gate becomes a preparation; Bell measurements stitch the chain
    together, so sequential composition turns into simultaneous
    preparations plus measurements with end-of-path corrections.
    """
    if not fs:
        raise ValueError("need at least one gate")
    dim = fs[0].dom_dim
    for f in fs:
        if f.matrix.shape != (dim, dim):
            raise ValueError("gates must form a composable square chain")
    if dim != 2:
        raise ValueError("parallel composition is built for qubit gates")
    m = len(fs)
    b = NetworkBuilder()
    for t in range(1, 2 * m + 2):
        b.add_track(t, 2)
    steps = []
    measurements = {}
    for i, f in enumerate(fs, start=1):
        left = 2 * i - 1
        meas = b.add_projector(2, left, left + 1, bell_id(), name=f"m{i}")
        prep = b.add_prep(1, left + 1, left + 2,
                          FunctionalLabel(f.matrix, ANTILINEAR), name=f"gate{i}")
        steps.extend([PathStep(meas), PathStep(prep)])
        measurements[meas] = bell_measurement()
    net = b.build()
    path = Path(start_at_input(1), tuple(steps), end_tracks=(2 * m + 1,))
    return Builtin(net, path, measurements, composite(net, path))


def beta_input(network: Network, track: int, phi_in) -> Network:
    """Feed a network-produced function an argument via a unipartite projector."""
    if network.input_covers(track):
        raise ValueError(f"track {track} already carries an input")
    for e in network.events:
        if isinstance(e, UnipartiteProjector) and e.track == track:
            raise ValueError(f"track {track} is already consumed by {e.name!r}")
    phi = np.asarray(phi_in, dtype=complex)
    if phi.shape != (network.dim_of(track),):
        raise ValueError("input length does not match the track dimension")
    return network.with_events_added(
        UnipartiteProjector(f"beta_{track}", network.max_time + 1, track, phi)
    )
