"""Tripartite tensors read as first- and second-order anti-linear functions.

A tripartite coefficient tensor can be curried either as a map from the
first space into bipartite labels, or as a map eating a bipartite label and
returning a vector.  These readings are *predictions only*: the simulator
always applies tripartite projectors as plain rank-one projectors, which
keeps the oracle independent of the functional interpretation.

The eight-track configuration wires three tripartite projectors together
with two bipartite ones and two unipartite inputs; its predicted output is
the explicit eight-index contraction checked against the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .labels import ANTILINEAR, FunctionalLabel, label_of
from .linalg import as_vector
from .network import Network, NetworkBuilder


@dataclass(frozen=True)
class TripartiteLabel:
    """Coefficient tensor M[a, b, c] over three spaces."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=complex)
        if coeff.ndim != 3:
            raise ValueError(f"need a rank-3 tensor, got shape {coeff.shape}")
        coeff.setflags(write=False)
        object.__setattr__(self, "coefficients", coeff)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.coefficients.shape

    def state(self) -> np.ndarray:
        return self.coefficients.reshape(-1)


def as_first_order(t: TripartiteLabel):
    """Curry as space1 -> (space2 -> space3): vector in, bipartite label out.

    The argument's coefficients enter conjugated (the map is anti-linear);
    the result is the anti-linear label with coefficients
    n[b, c] = sum_a conj(psi[a]) * M[a, b, c].
    """
    d1, d2, d3 = t.dims

    def apply(psi) -> FunctionalLabel:
        vec = as_vector(psi)
        if vec.shape[0] != d1:
            raise ValueError(f"argument length {vec.shape[0]} != {d1}")
        n = np.einsum("a,abc->bc", np.conj(vec), t.coefficients)
        return label_of(n.reshape(-1), d2, d3, ANTILINEAR)

    return apply


def as_second_order(t: TripartiteLabel):
    """Curry as (space1 -> space2) -> space3: bipartite label in, vector out.

    v[c] = sum_ab conj(m[a, b]) * M[a, b, c], where m is the argument's
    coefficient array (its matrix transposed back to coefficient order).
    """
    d1, d2, d3 = t.dims

    def apply(label: FunctionalLabel) -> np.ndarray:
        if label.linearity is not ANTILINEAR:
            raise ValueError("second-order application needs an anti-linear argument")
        if (label.dom_dim, label.cod_dim) != (d1, d2):
            raise ValueError(
                f"argument is {label.cod_dim}x{label.dom_dim}, need {d2}x{d1}"
            )
        coeffs = label.matrix.T  # coefficient order: [domain, codomain]
        return np.einsum("ab,abc->c", np.conj(coeffs), t.coefficients)

    return apply


def worked_example_predict(m1: TripartiteLabel, m2: TripartiteLabel,
                           m3: TripartiteLabel, g1: np.ndarray, g2: np.ndarray,
                           phi1, phi2) -> np.ndarray:
    """Predicted output on the last track of the eight-track configuration.

    g1 couples tracks (3,4) and g2 couples tracks (2,5), both as coefficient
    arrays; phi1 and phi2 are the unipartite inputs on tracks 1 and 7.  The
    prediction is the explicit contraction

        out[a8] = sum conj(phi2[a7]) g1[a3,a4] phi1[a1] conj(M1[a1,a2,a3])
                  g2[a2,a5] conj(M2[a4,a5,a6]) M3[a6,a7,a8]
    """
    p1 = as_vector(phi1)
    p2 = as_vector(phi2)
    g1a = np.asarray(g1, dtype=complex)
    g2a = np.asarray(g2, dtype=complex)
    return np.einsum(
        "g,cd,a,abc,be,def,fgh->h",
        np.conj(p2), g1a, p1,
        np.conj(m1.coefficients), g2a, np.conj(m2.coefficients), m3.coefficients,
    )


def worked_example_network(m1: TripartiteLabel, m2: TripartiteLabel,
                           m3: TripartiteLabel, g1: np.ndarray, g2: np.ndarray,
                           phi1, phi2) -> Network:
    """The eight-track configuration the prediction formula describes.

    Tripartite projectors sit on (1,2,3) at t=4, (4,5,6) at t=3 and
    (6,7,8) at t=2; bipartite couplers on (3,4) at t=2 and (2,5) at t=1;
    unipartite inputs on track 1 and track 7 at t=3.
    """
    g1a = np.asarray(g1, dtype=complex)
    g2a = np.asarray(g2, dtype=complex)
    dims = {
        1: m1.dims[0], 2: m1.dims[1], 3: m1.dims[2],
        4: m2.dims[0], 5: m2.dims[1], 6: m2.dims[2],
        7: m3.dims[1], 8: m3.dims[2],
    }
    if m3.dims[0] != dims[6]:
        raise ValueError("track 6 dims disagree between the last two tensors")
    if g1a.shape != (dims[3], dims[4]):
        raise ValueError(f"coupler (3,4) has shape {g1a.shape}, need {(dims[3], dims[4])}")
    if g2a.shape != (dims[2], dims[5]):
        raise ValueError(f"coupler (2,5) has shape {g2a.shape}, need {(dims[2], dims[5])}")
    if as_vector(phi1).shape[0] != dims[1]:
        raise ValueError("phi1 length does not match track 1")
    if as_vector(phi2).shape[0] != dims[7]:
        raise ValueError("phi2 length does not match track 7")

    b = NetworkBuilder()
    for tr in range(1, 9):
        b.add_track(tr, dims[tr])
    b.add_multiprojector(4, (1, 2, 3), m1.coefficients, name="t123")
    b.add_multiprojector(3, (4, 5, 6), m2.coefficients, name="t456")
    b.add_multiprojector(2, (6, 7, 8), m3.coefficients, name="t678")
    b.add_projector(2, 3, 4, label_of(g1a.reshape(-1), dims[3], dims[4], ANTILINEAR),
                    name="c34")
    b.add_projector(1, 2, 5, label_of(g2a.reshape(-1), dims[2], dims[5], ANTILINEAR),
                    name="c25")
    b.add_uniprojector(3, 1, as_vector(phi1), name="in1")
    b.add_uniprojector(3, 7, as_vector(phi2), name="in2")
    return b.build()
