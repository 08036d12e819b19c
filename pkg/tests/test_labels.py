import numpy as np
import pytest

from entflow.labels import (
    ANTILINEAR,
    LINEAR,
    FunctionalLabel,
    Measurement,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    adjoint,
    bell_id,
    bell_id_star,
    bell_labels,
    bell_measurement,
    bell_pi,
    bell_pi_star,
    compose,
    is_disentangled,
    label_of,
    projector_of,
    state_of,
    tensor,
    tensor_state_permutation,
    virtual_factorization,
    virtual_token_to_bell,
)
from entflow.linalg import kron, prop_eq, random_complex

RNG = np.random.default_rng(99)


def rand_label(cod=2, dom=2, linearity=ANTILINEAR):
    return FunctionalLabel(random_complex(RNG, cod, dom), linearity)


class TestStateCorrespondence:
    def test_bell_states(self):
        assert np.array_equal(state_of(bell_id()), [1, 0, 0, 1])       # |00>+|11>
        assert np.array_equal(state_of(bell_pi()), [0, 1, 1, 0])       # |01>+|10>
        assert np.array_equal(state_of(bell_id_star()), [1, 0, 0, -1])  # |00>-|11>
        assert np.array_equal(state_of(bell_pi_star()), [0, 1, -1, 0])  # |01>-|10>

    def test_round_trip_rectangular(self):
        for _ in range(5):
            label = rand_label(cod=2, dom=3)
            back = label_of(state_of(label), 3, 2, ANTILINEAR)
            assert np.array_equal(back.matrix, label.matrix)

    def test_round_trip_state(self):
        s = random_complex(RNG, 6)
        assert np.array_equal(state_of(label_of(s, 2, 3)), s)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            label_of(np.zeros(5), 2, 2)


class TestActions:
    def test_linear_action(self):
        label = FunctionalLabel(PAULI_X, LINEAR)
        assert np.array_equal(label(np.array([1, 0])), [0, 1])

    def test_antilinear_conjugates(self):
        label = FunctionalLabel(np.eye(2), ANTILINEAR)
        v = np.array([1j, 2.0])
        assert np.array_equal(label(v), np.conj(v))


class TestCompose:
    def test_bell_table_pi_after_id_star(self):
        assert np.array_equal(compose(bell_pi(), bell_id_star()).matrix,
                              bell_pi_star().matrix)

    def test_identity_neutral(self):
        f = rand_label()
        out = compose(bell_id(), f)
        # two anti-linear maps compose to a linear one
        assert out.linearity is LINEAR
        assert np.array_equal(out.matrix, np.conj(f.matrix))

    def test_pointwise_oracle(self):
        for _ in range(10):
            f = rand_label(3, 2)
            g = rand_label(2, 3)
            v = random_complex(RNG, 2)
            assert np.max(np.abs(compose(g, f)(v) - g(f(v)))) < 1e-12

    def test_pointwise_mixed(self):
        f = rand_label(2, 2, LINEAR)
        g = rand_label(2, 2, ANTILINEAR)
        v = random_complex(RNG, 2)
        assert np.max(np.abs(compose(g, f)(v) - g(f(v)))) < 1e-12
        assert compose(g, f).linearity is ANTILINEAR
        assert compose(f, g).linearity is ANTILINEAR

    def test_linearity_algebra(self):
        al, li = rand_label(), rand_label(linearity=LINEAR)
        assert compose(al, al).linearity is LINEAR
        assert compose(li, li).linearity is LINEAR
        assert compose(al, li).linearity is ANTILINEAR

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            compose(rand_label(2, 2), rand_label(3, 2))


class TestAdjoint:
    def test_bell_signs(self):
        assert np.array_equal(adjoint(bell_pi()).matrix, bell_pi().matrix)
        assert np.array_equal(adjoint(bell_id_star()).matrix, bell_id_star().matrix)
        assert np.array_equal(adjoint(bell_pi_star()).matrix, -bell_pi_star().matrix)
        assert np.array_equal(adjoint(bell_id()).matrix, bell_id().matrix)

    def test_involution(self):
        f = rand_label(3, 2)
        assert np.array_equal(adjoint(adjoint(f)).matrix, f.matrix)

    def test_antilinear_adjoint_identity(self):
        # <f(u), v> == <f'(v), u> for the anti-linear adjoint f'
        for _ in range(10):
            f = rand_label(3, 2)
            u = random_complex(RNG, 2)
            v = random_complex(RNG, 3)
            lhs = np.vdot(f(u), v)
            rhs = np.vdot(adjoint(f)(v), u)
            assert abs(lhs - rhs) < 1e-12

    def test_linear_adjoint_identity(self):
        f = rand_label(3, 2, LINEAR)
        u = random_complex(RNG, 2)
        v = random_complex(RNG, 3)
        assert abs(np.vdot(v, f(u)) - np.vdot(adjoint(f)(v), u)) < 1e-12


class TestTensor:
    def test_state_permutation(self):
        # the tensor label's state is the documented permutation of the kron
        for _ in range(5):
            f = rand_label(2, 3)
            g = rand_label(2, 2)
            assert np.max(np.abs(state_of(tensor(f, g)) -
                                 tensor_state_permutation(f, g))) < 1e-12

    def test_projector_factorizes_under_permutation(self):
        f, g = rand_label(), rand_label()
        perm = np.arange(16).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(-1)
        lhs = projector_of(tensor(f, g))
        rhs = kron(projector_of(f), projector_of(g))[np.ix_(perm, perm)]
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_pair_of_identities_labels_uniform_pair_state(self):
        t = tensor(bell_id(), bell_id())
        s = state_of(t).reshape(2, 2, 2, 2)
        for a in range(2):
            for b in range(2):
                assert s[a, b, a, b] == 1.0
        assert np.sum(np.abs(s)) == 4.0

    def test_trivial_factor(self):
        f = rand_label()
        one = FunctionalLabel(np.eye(1), ANTILINEAR)
        assert np.array_equal(tensor(f, one).matrix, f.matrix)

    def test_mixed_linearity_rejected(self):
        with pytest.raises(ValueError):
            tensor(rand_label(), rand_label(linearity=LINEAR))


class TestProjector:
    def test_epr_projector(self):
        p = projector_of(bell_id())
        s = np.array([1, 0, 0, 1], dtype=complex)
        assert np.allclose(p, np.outer(s, s))
        assert abs(np.trace(p) - 2.0) < 1e-12

    def test_idempotent_after_normalization(self):
        f = rand_label()
        p = projector_of(f)
        pn = p / np.trace(p)
        assert np.max(np.abs(pn @ pn - pn)) < 1e-12

    def test_applies_to_own_state(self):
        f = rand_label()
        s = state_of(f)
        out = projector_of(f) @ s
        norm2 = np.vdot(s, s)
        assert np.max(np.abs(out - norm2 * s)) < 1e-12

    def test_zero_label_rejected(self):
        with pytest.raises(ValueError):
            projector_of(FunctionalLabel(np.zeros((2, 2))))


class TestDisentangled:
    def test_product_state(self):
        psi = random_complex(RNG, 2)
        chi = random_complex(RNG, 2)
        label = label_of(np.kron(psi, chi), 2, 2)
        assert is_disentangled(label)

    def test_basis_product(self):
        assert is_disentangled(label_of(np.array([0, 1, 0, 0]), 2, 2))

    def test_epr_is_entangled(self):
        assert not is_disentangled(bell_id())


class TestMeasurements:
    def test_bell_complete_and_orthogonal(self):
        m = bell_measurement()
        assert m.is_complete()
        assert np.max(np.abs(m.projector_sum() - np.eye(4))) < 1e-12

    def test_tokens_are_two_bit_labels(self):
        assert bell_measurement().tokens == ("00", "01", "10", "11")
        assert set(bell_labels()) == {"00", "01", "10", "11"}

    def test_non_orthogonal_rejected(self):
        with pytest.raises(ValueError):
            Measurement((2, 2), (("a", bell_id()), ("b", bell_id())))

    def test_virtual_measurements_are_partial(self):
        first, second = virtual_factorization()
        assert not first.is_complete()
        assert not second.is_complete()

    def test_virtual_composition_reproduces_bell_set(self):
        first, second = virtual_factorization()
        seen = set()
        for a in first.tokens:
            for b in second.tokens:
                seen.add(virtual_token_to_bell(a, b))
        assert seen == {"00", "01", "10", "11"}
        # the specific table entry: pi after id* gives pi*
        composed = compose(second.label_for("1"), first.label_for("1"))
        assert prop_eq(composed.matrix, bell_pi_star().matrix, 1e-12)


def test_pauli_constants_relate_to_bell_matrices():
    assert np.array_equal(PAULI_X, bell_pi().matrix)
    assert np.array_equal(PAULI_Z, bell_id_star().matrix)
    assert np.array_equal(PAULI_Y, 1j * bell_pi_star().matrix)
