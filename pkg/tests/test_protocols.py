import numpy as np
import pytest

from entflow.labels import (
    ANTILINEAR,
    LINEAR,
    FunctionalLabel,
    Measurement,
    bell_id,
    bell_labels,
    bell_measurement,
    compose,
    virtual_token_to_bell,
)
from entflow.linalg import kron, kron_factor, prop_eq, random_complex, random_unitary
from entflow.network import LocalUnitary, NetworkBuilder
from entflow.oracle import extract_factor, run
from entflow.protocols import (
    NotCompilableError,
    beta_input,
    builtin_gate_teleportation,
    builtin_parallel,
    builtin_swap,
    builtin_teleportation,
    compile_unconditional,
    instantiate,
    tensor_bell_measurement,
    verify_compiled,
)

RNG = np.random.default_rng(311)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                dtype=complex)


class TestInstantiate:
    def test_designated_token_recovers_projector(self):
        compiled = builtin_teleportation().compile()
        net = instantiate(compiled.tree, ("00",))
        assert np.array_equal(net.event("m").label.matrix, np.eye(2))

    def test_all_tokens_give_distinct_valid_networks(self):
        compiled = builtin_teleportation().compile()
        nets = {tokens: instantiate(compiled.tree, tokens)
                for tokens in compiled.branches()}
        assert len(nets) == 4
        mats = [tuple(net.event("m").label.matrix.reshape(-1))
                for net in nets.values()]
        assert len(set(mats)) == 4
        for net in nets.values():
            assert net.validate() == []

    def test_leaf_count(self):
        compiled = builtin_teleportation().compile()
        assert compiled.tree.leaf_count == 4

    def test_wrong_token_count(self):
        compiled = builtin_teleportation().compile()
        with pytest.raises(KeyError):
            instantiate(compiled.tree, ())
        with pytest.raises(KeyError):
            instantiate(compiled.tree, ("00", "00"))

    def test_unknown_token(self):
        compiled = builtin_teleportation().compile()
        with pytest.raises(KeyError):
            instantiate(compiled.tree, ("xx",))

    def test_branchless_tree_returns_network_unchanged(self):
        from entflow.protocols import tree_of_network
        net = builtin_teleportation().network
        tree = tree_of_network(net)
        assert tree.leaf_count == 1
        again = instantiate(tree, ())
        assert again.events == net.events
        assert again.tracks == net.tracks


class TestTeleportation:
    def test_corrections_match_bell_list_up_to_phase(self):
        compiled = builtin_teleportation().compile()
        expected = {
            ("00",): np.eye(2),
            ("01",): np.array([[0, 1], [1, 0]]),
            ("10",): np.array([[1, 0], [0, -1]]),
            ("11",): np.array([[0, -1], [1, 0]]),
        }
        for tokens, matrix in compiled.corrections.items():
            assert prop_eq(matrix, expected[tokens], 1e-12)

    def test_every_branch_teleports(self):
        compiled = builtin_teleportation().compile()
        checks = verify_compiled(compiled, trials=20, seed=0)
        for check in checks:
            assert check.failed == 0 and check.zero == 0
            assert check.worst_deviation < 1e-9

    def test_target_is_the_identity(self):
        compiled = builtin_teleportation().compile()
        assert compiled.target.linearity is LINEAR
        assert prop_eq(compiled.target.matrix, np.eye(2), 1e-12)

    def test_two_stage_variant_matches_flat_branchwise(self):
        flat = builtin_teleportation().compile()
        staged = builtin_teleportation(two_stage=True).compile()
        assert staged.tree.leaf_count == 4
        for (a, b), correction in staged.corrections.items():
            flat_token = virtual_token_to_bell(a, b)
            assert prop_eq(correction, flat.corrections[(flat_token,)], 1e-12)
        checks = verify_compiled(staged, trials=10, seed=1)
        assert all(c.failed == 0 for c in checks)

    def test_two_stage_composites_match_flat(self):
        from entflow.paths import composite
        import dataclasses
        flat = builtin_teleportation()
        staged = builtin_teleportation(two_stage=True)
        for a in ("0", "1"):
            for b in ("0", "1"):
                net = staged.network
                net = net.with_event_replaced("m1", dataclasses.replace(
                    net.event("m1"), label=staged.measurements["m1"].label_for(a)))
                net = net.with_event_replaced("m2", dataclasses.replace(
                    net.event("m2"), label=staged.measurements["m2"].label_for(b)))
                staged_c = composite(net, staged.path)
                flat_token = virtual_token_to_bell(a, b)
                fnet = flat.network.with_event_replaced(
                    "m", dataclasses.replace(
                        flat.network.event("m"),
                        label=bell_labels()[flat_token]))
                flat_c = composite(fnet, flat.path)
                assert staged_c.linearity is flat_c.linearity
                assert prop_eq(staged_c.matrix, flat_c.matrix, 1e-12)


class TestGateTeleportation:
    def test_cnot_sixteen_branches_correct_and_factor(self):
        compiled = builtin_gate_teleportation(
            FunctionalLabel(CNOT, ANTILINEAR)).compile()
        assert len(compiled.branches()) == 16
        for tokens, correction in compiled.corrections.items():
            a, b, residual = kron_factor(correction, (2, 2))
            assert residual <= 1e-9
        checks = verify_compiled(compiled, trials=5, seed=2)
        for check in checks:
            assert check.failed == 0
            assert check.worst_deviation < 1e-9

    def test_cnot_output_is_the_gate_applied(self):
        compiled = builtin_gate_teleportation(FunctionalLabel(CNOT, ANTILINEAR))
        assert compiled.target.linearity is LINEAR
        assert prop_eq(compiled.target.matrix, CNOT, 1e-12)

    def test_branch_corrections_are_local_unitaries(self):
        compiled = builtin_gate_teleportation(
            FunctionalLabel(CNOT, ANTILINEAR)).compile()
        for tokens, events in compiled.branch_corrections.items():
            assert len(events) == 2
            assert {e.track for e in events} == {5, 6}
            joint = kron(events[0].matrix, events[1].matrix)
            assert prop_eq(joint, compiled.corrections[tokens], 1e-9)

    def test_single_qubit_gate_reduces_to_three_tracks(self):
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        compiled = builtin_gate_teleportation(FunctionalLabel(h, ANTILINEAR)).compile()
        assert len(compiled.branches()) == 4
        checks = verify_compiled(compiled, trials=10, seed=3)
        assert all(c.failed == 0 for c in checks)

    def test_tensor_bell_measurement_complete(self):
        m = tensor_bell_measurement(2)
        assert len(m.tokens) == 16
        assert m.is_complete()

    def test_non_square_gate_rejected(self):
        with pytest.raises(ValueError):
            builtin_gate_teleportation(
                FunctionalLabel(random_complex(RNG, 2, 4), ANTILINEAR))


class TestSwap:
    def test_final_state_factors_into_two_pairs(self):
        net = builtin_swap().network
        final = run(net, seed=4)
        r14 = extract_factor(final, (1, 4))
        r23 = extract_factor(final, (2, 3))
        assert r14.residual <= 1e-9
        assert r23.residual <= 1e-9
        pair = np.array([1, 0, 0, 1])
        assert prop_eq(r14.factor, pair, 1e-9)
        assert prop_eq(r23.factor, pair, 1e-9)

    def test_compiled_branches_all_realize_the_pair_function(self):
        compiled = builtin_swap().compile()
        checks = verify_compiled(compiled, trials=10, seed=5)
        assert all(c.failed == 0 and c.zero == 0 for c in checks)

    def test_target_function_is_identity_label(self):
        compiled = builtin_swap().compile()
        assert compiled.target.linearity is ANTILINEAR
        assert prop_eq(compiled.target.matrix, np.eye(2), 1e-12)


class TestParallel:
    def test_three_random_gates(self):
        rng = np.random.default_rng(6)
        gates = [FunctionalLabel(random_unitary(rng, 2), ANTILINEAR)
                 for _ in range(3)]
        compiled = builtin_parallel(gates).compile()
        assert len(compiled.branches()) == 64
        product = gates[2].matrix @ gates[1].matrix @ gates[0].matrix
        assert compiled.target.linearity is LINEAR
        assert prop_eq(compiled.target.matrix, product, 1e-12)
        checks = verify_compiled(compiled, trials=2, seed=7)
        assert all(c.failed == 0 for c in checks)

    def test_single_identity_reduces_to_teleportation(self):
        compiled = builtin_parallel([bell_id()]).compile()
        tele = builtin_teleportation().compile()
        assert prop_eq(compiled.target.matrix, tele.target.matrix, 1e-12)
        for tokens, correction in compiled.corrections.items():
            assert prop_eq(correction, tele.corrections[tokens], 1e-12)


class TestCompileGuards:
    def test_rank_deficient_outcome_not_compilable(self):
        builtin = builtin_teleportation()
        outcomes = (
            ("00", bell_id()),
            ("xx", FunctionalLabel(np.array([[0, 1], [0, 0]]), ANTILINEAR)),
        )
        family = Measurement((2, 2), outcomes)
        with pytest.raises(NotCompilableError):
            compile_unconditional(builtin.network, builtin.path, {"m": family})

    def test_missing_designated_label_rejected(self):
        builtin = builtin_swap()
        family = Measurement((2, 2), (("a", bell_labels()["01"]),
                                      ("b", bell_labels()["10"])))
        with pytest.raises(ValueError):
            compile_unconditional(builtin.network, builtin.path, {"m": family})

    def test_non_unitary_correction_rejected(self):
        # trace-free (so orthogonal to the uniform pair state) but not
        # proportional to any unitary: the synthesized ratio cannot be one
        builtin = builtin_teleportation()
        squash = FunctionalLabel(np.array([[1, 2], [0, -1]]), ANTILINEAR)
        family = Measurement((2, 2), (("00", bell_id()), ("ns", squash)))
        with pytest.raises(NotCompilableError):
            compile_unconditional(builtin.network, builtin.path, {"m": family})

    def test_preparations_cannot_be_measured(self):
        builtin = builtin_teleportation()
        with pytest.raises(ValueError):
            compile_unconditional(builtin.network, builtin.path,
                                  {"pair": bell_measurement()})

    def test_explicit_target_mismatch_rejected(self):
        builtin = builtin_teleportation()
        wrong = FunctionalLabel(np.array([[0, 1], [1, 0]]), LINEAR)
        with pytest.raises(ValueError):
            compile_unconditional(builtin.network, builtin.path,
                                  builtin.measurements, wrong)

    def test_designated_branch_network_has_corrections_appended(self):
        compiled = builtin_teleportation().compile()
        net = compiled.network_for(compiled.designated)
        corr = [e for e in net.events if isinstance(e, LocalUnitary)]
        assert len(corr) == 1
        assert prop_eq(corr[0].matrix, np.eye(2), 1e-12)


class TestMeasurementFamilies:
    def test_bell_family_completeness(self):
        assert bell_measurement().is_complete(1e-9)

    def test_tensor_family_completeness(self):
        assert tensor_bell_measurement(2).is_complete(1e-9)


class TestBetaInput:
    def test_single_projector_applies_function(self):
        f = FunctionalLabel(random_complex(RNG, 2, 2), ANTILINEAR)
        b = NetworkBuilder()
        b.add_track(1, 2).add_track(2, 2)
        b.add_projector(1, 1, 2, f, name="f")
        net = b.build()
        phi = random_complex(RNG, 2)
        fed = beta_input(net, 1, phi)
        final = run(fed, seed=8)
        factor = extract_factor(final, (2,)).factor
        assert prop_eq(factor, f(phi), 1e-9)

    def test_identity_function_returns_conjugate_free_input_when_real(self):
        b = NetworkBuilder()
        b.add_track(1, 2).add_track(2, 2)
        b.add_projector(1, 1, 2, bell_id(), name="f")
        net = b.build()
        phi = np.array([0.6, 0.8])
        final = run(beta_input(net, 1, phi), seed=9)
        assert prop_eq(extract_factor(final, (2,)).factor, phi, 1e-9)

    def test_track_already_consumed(self):
        b = NetworkBuilder()
        b.add_track(1, 2).add_track(2, 2)
        b.add_projector(1, 1, 2, bell_id(), name="f")
        net = beta_input(b.build(), 1, [1, 0])
        with pytest.raises(ValueError):
            beta_input(net, 1, [0, 1])

    def test_feeding_swap_output_teleports_across_four_tracks(self):
        net = builtin_swap().network
        phi = random_complex(np.random.default_rng(10), 2)
        fed = beta_input(net, 1, phi)
        final = run(fed, seed=11)
        factor = extract_factor(final, (4,)).factor
        # feeding half of the swapped pair steers the far end to conj(phi)
        assert prop_eq(factor, np.conj(phi), 1e-9)
