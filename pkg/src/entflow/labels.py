"""Functional labels: the bijection between bipartite states and (anti-)linear maps.

A label stores the conventional matrix of a map from a domain space to a
codomain space plus a linearity flag.  The same matrix simultaneously
denotes a bipartite state (and hence its rank-one projector), which is what
lets network projectors be read as functions acting on an information flow.

Index convention, fixed once for the whole package: the state vector on
dom (x) cod, flattened with the domain index slowest, has entry
state[(a, b)] = matrix[b, a].  Equivalently state = matrix.T.reshape(-1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, as_matrix, as_vector, kron, prop_eq, rank_one


class Linearity(enum.Enum):
    LINEAR = "linear"
    ANTILINEAR = "antilinear"

    def __invert__(self) -> "Linearity":
        return Linearity.LINEAR if self is Linearity.ANTILINEAR else Linearity.ANTILINEAR


LINEAR = Linearity.LINEAR
ANTILINEAR = Linearity.ANTILINEAR


@dataclass(frozen=True)
class FunctionalLabel:
    """A linear or anti-linear map dom -> cod, stored as a cod x dom matrix.

    Linear labels act as v -> matrix @ v; anti-linear labels act as
    v -> matrix @ conj(v).
    """

    matrix: np.ndarray
    linearity: Linearity = ANTILINEAR

    def __post_init__(self):
        mat = as_matrix(self.matrix)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dom_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def cod_dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, v) -> np.ndarray:
        vec = as_vector(v)
        if vec.shape[0] != self.dom_dim:
            raise ValueError(f"argument length {vec.shape[0]} != dom_dim {self.dom_dim}")
        if self.linearity is ANTILINEAR:
            return self.matrix @ np.conj(vec)
        return self.matrix @ vec

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.matrix)) <= tol) if self.matrix.size else True

    def __repr__(self):  # compact, deterministic
        return f"FunctionalLabel({self.matrix.tolist()!r}, {self.linearity.value})"


def state_of(label: FunctionalLabel) -> np.ndarray:
    """The bipartite state on dom (x) cod canonically denoted by the label."""
    return np.ascontiguousarray(label.matrix.T).reshape(-1)


def label_of(state, dom_dim: int, cod_dim: int,
             linearity: Linearity = ANTILINEAR) -> FunctionalLabel:
    """Inverse of state_of: read a length dom_dim*cod_dim state as a label."""
    vec = as_vector(state)
    if vec.shape[0] != dom_dim * cod_dim:
        raise ValueError(f"state length {vec.shape[0]} != {dom_dim}*{cod_dim}")
    return FunctionalLabel(vec.reshape(dom_dim, cod_dim).T, linearity)


def compose(g: FunctionalLabel, f: FunctionalLabel) -> FunctionalLabel:
    """Pointwise composition g after f, with the linearity algebra.

    Two anti-linear maps compose to a linear one; mixed pairs stay
    anti-linear.  The matrix is G @ F when g is linear and G @ conj(F)
    when g is anti-linear, so the result acts exactly as v -> g(f(v)).
    """
    if f.cod_dim != g.dom_dim:
        raise ValueError(f"cannot compose: f.cod_dim {f.cod_dim} != g.dom_dim {g.dom_dim}")
    if g.linearity is ANTILINEAR:
        matrix = g.matrix @ np.conj(f.matrix)
        linearity = ~f.linearity
    else:
        matrix = g.matrix @ f.matrix
        linearity = f.linearity
    return FunctionalLabel(matrix, linearity)


def adjoint(label: FunctionalLabel) -> FunctionalLabel:
    """Adjoint map, same linearity.

    For anti-linear labels the adjoint matrix is the plain transpose; for
    linear labels it is the conjugate transpose.
    """
    if label.linearity is ANTILINEAR:
        return FunctionalLabel(label.matrix.T, ANTILINEAR)
    return FunctionalLabel(np.conj(label.matrix).T, LINEAR)


def tensor(f: FunctionalLabel, g: FunctionalLabel) -> FunctionalLabel:
    """Tensor of two labels of equal linearity: Kronecker of matrices.

    The resulting label lives on (dom_f (x) dom_g) -> (cod_f (x) cod_g);
    its state is the (d_f, d_g, c_f, c_g)-ordered permutation of
    kron(state_of(f), state_of(g)).  Network placement supplies the actual
    track bindings.
    """
    if f.linearity is not g.linearity:
        raise ValueError("cannot tensor labels of mixed linearity")
    return FunctionalLabel(kron(f.matrix, g.matrix), f.linearity)


def tensor_state_permutation(f: FunctionalLabel, g: FunctionalLabel) -> np.ndarray:
    """Permute kron(state_of(f), state_of(g)) into state_of(tensor(f, g)).

    kron orders indices (d_f, c_f, d_g, c_g); the tensor label orders them
    (d_f, d_g, c_f, c_g).  Returns the permuted kron state.
    """
    s = kron(state_of(f), state_of(g))
    shaped = s.reshape(f.dom_dim, f.cod_dim, g.dom_dim, g.cod_dim)
    return np.ascontiguousarray(shaped.transpose(0, 2, 1, 3)).reshape(-1)


def projector_of(label: FunctionalLabel) -> np.ndarray:
    """Unnormalized rank-one projector |s><s| on the label's state s."""
    s = state_of(label)
    if not np.any(s):
        raise ValueError("zero label has no projector")
    return np.outer(s, np.conj(s))


def is_disentangled(label: FunctionalLabel, tol: float = DEFAULT_TOL) -> bool:
    """True iff the labeled bipartite state is a product state (rank-one matrix)."""
    return rank_one(label.matrix, tol)


# The four Bell labels, as anti-linear maps on one qubit.
def bell_id() -> FunctionalLabel:
    return FunctionalLabel(np.eye(2), ANTILINEAR)


def bell_pi() -> FunctionalLabel:
    return FunctionalLabel(np.array([[0, 1], [1, 0]]), ANTILINEAR)


def bell_id_star() -> FunctionalLabel:
    return FunctionalLabel(np.array([[1, 0], [0, -1]]), ANTILINEAR)


def bell_pi_star() -> FunctionalLabel:
    return FunctionalLabel(np.array([[0, -1], [1, 0]]), ANTILINEAR)


BELL_TOKENS = ("00", "01", "10", "11")


def bell_labels() -> dict[str, FunctionalLabel]:
    """Token -> label map for the four Bell states: 00, 01, 10, 11."""
    return {
        "00": bell_id(),
        "01": bell_pi(),
        "10": bell_id_star(),
        "11": bell_pi_star(),
    }


# Pauli matrices, for callers who think in gate terms: X = pi, Y = i*pi*, Z = id*.
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Measurement:
    """A set of mutually orthogonal rank-one outcome projectors with tokens.

    Outcomes are (token, label) pairs for multipartite projectors or
    (token, vector) pairs for unipartite ones.  Orthogonality is enforced
    at construction; completeness on the full spanned tensor space is
    exposed via is_complete (the 'virtual' one-bit families are not
    complete and do not need to be).
    """

    dims: tuple[int, ...]
    outcomes: tuple[tuple[str, object], ...]
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        if not self.outcomes:
            raise ValueError("measurement needs at least one outcome")
        tokens = [t for t, _ in self.outcomes]
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate outcome tokens")
        states = self.outcome_states()
        for s in states:
            if not np.any(s):
                raise ValueError("zero outcome state")
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                overlap = abs(np.vdot(states[i], states[j]))
                norm = np.linalg.norm(states[i]) * np.linalg.norm(states[j])
                if overlap > self.tol * norm:
                    raise ValueError(
                        f"outcomes {tokens[i]!r} and {tokens[j]!r} are not orthogonal"
                    )

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.outcomes)

    def outcome_states(self) -> list[np.ndarray]:
        out = []
        for _, obj in self.outcomes:
            if isinstance(obj, FunctionalLabel):
                out.append(state_of(obj))
            else:
                out.append(as_vector(obj))
        for s in out:
            if s.shape[0] != self.total_dim:
                raise ValueError("outcome dimension does not match measurement dims")
        return out

    def label_for(self, token: str):
        for t, obj in self.outcomes:
            if t == token:
                return obj
        raise KeyError(f"unknown outcome token {token!r}")

    def projector_sum(self) -> np.ndarray:
        """Sum of the normalized outcome projectors."""
        total = np.zeros((self.total_dim, self.total_dim), dtype=complex)
        for s in self.outcome_states():
            total += np.outer(s, np.conj(s)) / np.vdot(s, s).real
        return total

    def is_complete(self, tol: float = DEFAULT_TOL) -> bool:
        """True iff the normalized projectors sum to the identity."""
        dev = self.projector_sum() - np.eye(self.total_dim)
        return bool(np.max(np.abs(dev)) <= tol)


def bell_measurement() -> Measurement:
    """The four-outcome Bell-basis measurement on a pair of qubits."""
    return Measurement((2, 2), tuple(bell_labels().items()))


def virtual_factorization() -> tuple[Measurement, Measurement]:
    """Two one-bit 'virtual' measurements whose label composition is the Bell set.

    Returns (first, second) in path order; composing second after first over
    all outcome pairs reproduces all four Bell labels.  The factorization
    lives at the level of functional labels: it does not hold for tensor
    products nor for composition of projector actions.
    """
    first = Measurement((2, 2), (("0", bell_id()), ("1", bell_id_star())))
    second = Measurement((2, 2), (("0", bell_id()), ("1", bell_pi())))
    return first, second


def virtual_token_to_bell(first_token: str, second_token: str) -> str:
    """Map a (first, second) virtual outcome pair to the flat Bell token."""
    f, s = virtual_factorization()
    composed = compose(s.label_for(second_token), f.label_for(first_token))
    for token, label in bell_labels().items():
        if prop_eq(composed.matrix, label.matrix, 1e-12):
            return token
    raise ValueError("virtual outcome pair does not compose to a Bell label")
