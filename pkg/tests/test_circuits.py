import math

import numpy as np
import pytest

from qec_spinsim.circuits import (
    ANCILLAS,
    BsPrepProtocol,
    CzLayer,
    DATA_QUBITS,
    MeasureLayer,
    N_QUBITS,
    PrepLayer,
    QecStepProtocol,
    RotationLayer,
    SurfacePrepProtocol,
    X_ANCILLAS,
    Z_ANCILLAS,
    build_ghz_prep,
    build_half_round,
    build_round,
    dump_circuit,
    enumerate_fault_locations,
    ideal_ec,
    location_counts,
    perfect_plus_state,
    run_bs_plus_prep,
    run_qec_step,
    run_surface_plus_prep,
)
from qec_spinsim.codes import bs17_spec, surface17_spec
from qec_spinsim.noise import apply_override, table1_defaults
from qec_spinsim.tableau import PauliString, new_tableau

HYBRID = table1_defaults("hybrid")
ALL_LD = table1_defaults("all-ld")
RNG = np.random.default_rng(77)


def loc_index(protocol, **match):
    hits = [i for i, loc in enumerate(protocol.locations)
            if all(getattr(loc, k) == v for k, v in match.items())]
    assert hits, f"no location matching {match}"
    return hits[0]


class TestBuildRound:
    def test_cz_count_is_24(self):
        assert build_round("hybrid", HYBRID).cz_count() == 24

    def test_duration_identity(self):
        # sum of layer durations == 8 t_CZ + t_readout, exactly
        for encoding, params, expect in (("hybrid", HYBRID, 2.72),
                                         ("all-ld", ALL_LD, 24.32)):
            circ = build_round(encoding, params)
            durations = [layer.duration for layer in circ.layers]
            assert math.fsum(durations) == 8 * params.data.t_cz + params.ancilla.t_readout
            assert circ.duration() == pytest.approx(expect, abs=1e-9)

    def test_round_is_code_agnostic(self):
        # the gate schedule never references a code; dumps are byte-identical
        a = dump_circuit(build_round("hybrid", HYBRID))
        b = dump_circuit(build_round("hybrid", HYBRID))
        assert a == b
        qec_s = QecStepProtocol(surface17_spec(), HYBRID)
        qec_b = QecStepProtocol(bs17_spec(), HYBRID)
        assert dump_circuit(qec_s.circuit) == dump_circuit(qec_b.circuit)

    def test_unknown_encoding_rejected(self):
        with pytest.raises(ValueError):
            table1_defaults("mixed")

    def test_layer_structure(self):
        circ = build_round("hybrid", HYBRID)
        kinds = [type(layer).__name__ for layer in circ.layers]
        assert kinds == (["PrepLayer", "RotationLayer"] + ["CzLayer"] * 4
                         + ["RotationLayer"] + ["CzLayer"] * 4
                         + ["RotationLayer", "MeasureLayer"])
        for layer in circ.layers:
            if isinstance(layer, CzLayer):
                qubits = [q for pair in layer.pairs for q in pair]
                assert len(set(qubits)) == len(qubits)

    def test_noiseless_round_on_logical_plus_gives_all_plus(self):
        proto = QecStepProtocol(surface17_spec(), HYBRID)
        out = proto.run(frozenset(), RNG)
        syn = out.syndrome_history[0]
        assert syn.x_bits == (1, 1, 1, 1) and syn.z_bits == (1, 1, 1, 1)

    def test_golden_dump(self):
        text = dump_circuit(build_round("hybrid", HYBRID))
        lines = text.splitlines()
        assert lines[0].startswith("0.0 PREP(9)")
        assert lines[-1] == ("2.4 MEAS(9) MEAS(10) MEAS(11) MEAS(12) "
                             "MEAS(13) MEAS(14) MEAS(15) MEAS(16)")
        assert sum(line.count("CZ(") for line in lines) == 24


class TestFaultEnumeration:
    def test_round_counts(self):
        circ = build_round("hybrid", HYBRID)
        counts = location_counts(circ.locations)
        assert counts[0] == 8     # ancilla preparations
        assert counts[3] == 24    # CZ gates
        assert counts[5] == 9     # data idling during readout
        assert counts == (8, 8, 34, 24, 9, 9, 48, 40)

    def test_qec_step_unrolling_counts(self):
        proto = QecStepProtocol(surface17_spec(), HYBRID)
        assert proto.counts == (16, 16, 68, 48, 18, 18, 96, 80)
        assert sum(proto.counts) == len(proto.locations)

    def test_surface_prep_unrolling_counts(self):
        proto = SurfacePrepProtocol(HYBRID)
        assert proto.counts == (29, 20, 85, 60, 45, 45, 120, 20)

    def test_bs_prep_counts(self):
        proto = BsPrepProtocol(ALL_LD, bs17_spec())
        assert proto.counts == (9, 0, 15, 6, 0, 0, 6, 0)

    def test_category_pauli_kinds(self):
        proto = QecStepProtocol(surface17_spec(), HYBRID)
        kinds = {1: "X", 2: "X", 3: "Y", 4: "ZZ", 5: "Z", 6: "Z", 7: "Z", 8: "Z"}
        for loc in proto.locations:
            assert loc.pauli == kinds[loc.category]

    def test_ghz_circuit_depth(self):
        circ = build_ghz_prep(ALL_LD)
        kinds = [type(layer).__name__ for layer in circ.layers]
        assert kinds == ["PrepLayer", "RotationLayer", "CzLayer", "CzLayer",
                         "RotationLayer"]


class TestIdealEc:
    def test_codespace_state_passes(self):
        state = perfect_plus_state()
        assert ideal_ec(surface17_spec(), state) is False

    def test_single_x_corrected(self):
        state = perfect_plus_state()
        state.apply_pauli(PauliString.from_label(N_QUBITS, "X0"))
        assert ideal_ec(surface17_spec(), state) is False

    def test_weight_one_exhaustive(self):
        for code in (surface17_spec(), bs17_spec()):
            for q in range(9):
                for kind in "XYZ":
                    state = perfect_plus_state()
                    state.apply_pauli(PauliString.from_label(N_QUBITS, f"{kind}{q}"))
                    assert ideal_ec(code, state) is False, (code.name, kind, q)

    def test_diagonal_logical_z_fails(self):
        # Z0 Z4 Z8 is a logical Z times stabilizers: trivial syndrome, X_L flip
        state = perfect_plus_state()
        state.apply_pauli(PauliString.from_label(N_QUBITS, "Z0Z4Z8"))
        assert ideal_ec(surface17_spec(), state) is True


class TestQecStepProtocol:
    def test_zero_faults(self):
        out = run_qec_step(surface17_spec(), "hybrid", HYBRID, frozenset(), RNG)
        assert out.rounds == 1
        assert out.logical_failure is False
        assert out.correction.weight == 0

    def test_data_x_error_before_round_one(self):
        class Seeded(QecStepProtocol):
            def _initial_state(self):
                state = perfect_plus_state()
                state.apply_pauli(PauliString.from_label(N_QUBITS, "X4"))
                return state

        out = Seeded(surface17_spec(), HYBRID).run(frozenset(), RNG)
        assert out.rounds == 2                      # detected in round 1
        assert out.correction.label() == "+X4"      # corrected from round 2
        assert out.logical_failure is False

    def test_single_cz_fault_triggers_second_round(self):
        proto = QecStepProtocol(surface17_spec(), HYBRID)
        idx = next(i for i, loc in enumerate(proto.locations)
                   if loc.category == 4 and loc.layer < 13)
        out = proto.run(frozenset([idx]), RNG)
        assert out.rounds == 2
        assert out.logical_failure is False

    @pytest.mark.parametrize("code_name", ["surface17", "bs17"])
    def test_single_fault_tolerance_exhaustive(self, code_name):
        code = surface17_spec() if code_name == "surface17" else bs17_spec()
        for encoding, params in (("hybrid", HYBRID), ("all-ld", ALL_LD)):
            proto = QecStepProtocol(code, params)
            failures = [i for i in range(len(proto.locations))
                        if proto.run(frozenset([i]), RNG).logical_failure]
            assert failures == [], (code_name, encoding, failures)


class TestSurfacePrepProtocol:
    def test_zero_faults(self):
        out = run_surface_plus_prep("hybrid", HYBRID, frozenset(), RNG)
        assert out.rounds == 2              # two Z rounds, one X round
        assert len(out.syndrome_history) == 3
        assert out.logical_failure is False

    def test_measurement_fault_forces_third_round(self):
        proto = SurfacePrepProtocol(HYBRID)
        # measurement flip on one Z ancilla in the first post-projection Z round
        p2_start, _ = proto.segments["p2"]
        idx = next(i for i, loc in enumerate(proto.locations)
                   if loc.category == 2 and loc.layer >= p2_start
                   and loc.qubits[0] in Z_ANCILLAS)
        out = proto.run(frozenset([idx]), RNG)
        assert out.rounds == 3
        assert out.logical_failure is False

    def test_single_fault_tolerance_exhaustive(self):
        proto = SurfacePrepProtocol(HYBRID)
        failures = [i for i in range(len(proto.locations))
                    if proto.run(frozenset([i]), RNG).logical_failure]
        assert failures == []

    def test_zero_basis_variant(self):
        proto = SurfacePrepProtocol(HYBRID, basis="zero")
        out = proto.run(frozenset(), RNG)
        assert out.rounds == 2 and out.logical_failure is False
        failures = [i for i in range(len(proto.locations))
                    if proto.run(frozenset([i]), RNG).logical_failure]
        assert failures == []


class TestBsPrepProtocol:
    def test_zero_faults(self):
        out = run_bs_plus_prep(ALL_LD, frozenset(), RNG)
        assert out.logical_failure is False

    def test_single_fault_tolerance_exhaustive(self):
        proto = BsPrepProtocol(ALL_LD, bs17_spec())
        failures = [i for i in range(len(proto.locations))
                    if proto.run(frozenset([i]), RNG).logical_failure]
        assert failures == []

    def test_prepared_state_is_bs_logical_plus(self):
        proto = BsPrepProtocol(ALL_LD, bs17_spec())
        state = new_tableau(N_QUBITS)
        proto._execute_segment("ghz", state, {}, RNG)
        bs = bs17_spec()
        for s in bs.stabilizer_generators():
            assert state.eigenvalue_of(s.padded(N_QUBITS)) == 1
        assert state.eigenvalue_of(bs.logical_x.padded(N_QUBITS)) == 1


class TestEffectiveReadoutError:
    """First-order ancilla flip rates: p_prep + p_readout, and 2 p_1q."""

    @staticmethod
    def _flip_rates(proto, active_categories, shots=100_000):
        from qec_spinsim.frames import FrameRunner
        runner = FrameRunner(proto)
        p_loc = np.array([proto.probabilities[loc.category - 1]
                          if loc.category in active_categories else 0.0
                          for loc in proto.locations])
        rng = np.random.default_rng(4242)
        acts = rng.random((shots, p_loc.size)) < p_loc
        collect = {}
        runner.run(acts, collect)
        return collect["round1_flips"].mean(axis=0)

    def test_prep_and_measurement_noise(self):
        proto = QecStepProtocol(surface17_spec(), HYBRID)
        rates = self._flip_rates(proto, {1, 2})
        p, q = proto.probabilities[0], proto.probabilities[1]
        expect = p + q - 2 * p * q
        sigma = math.sqrt(expect * (1 - expect) / 100_000)
        for check_rate in rates:
            assert abs(check_rate - expect) < 3 * sigma + 1e-4

    def test_ancilla_rotation_noise(self):
        proto = QecStepProtocol(surface17_spec(), HYBRID)
        from qec_spinsim.frames import FrameRunner
        runner = FrameRunner(proto)
        # only the two basis-change rotations on each ancilla carry noise
        p1q = proto.probabilities[2]
        p_loc = np.array([p1q if (loc.category == 3 and loc.qubits[0] in ANCILLAS)
                          else 0.0 for loc in proto.locations])
        rng = np.random.default_rng(999)
        shots = 100_000
        acts = rng.random((shots, p_loc.size)) < p_loc
        collect = {}
        runner.run(acts, collect)
        rates = collect["round1_flips"].mean(axis=0)
        expect = 2 * p1q * (1 - p1q)  # XOR of the two rotation locations
        sigma = math.sqrt(expect * (1 - expect) / shots)
        for check_rate in rates:
            assert abs(check_rate - expect) < 3 * sigma + 1e-4
