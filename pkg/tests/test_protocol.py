import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

from densecoding.channels import NoiseParams, amplitude_damping, apply_channel, composite_channel_apply
from densecoding.metrics import correlation_report
from densecoding.protocol import (
    ALL_MESSAGES,
    Message,
    ProtocolConfig,
    bell_measure,
    channel_capacity,
    encode_message,
    encoded_bell_state,
    measure_pilots,
    pilot_tomography,
    run_protocol,
    sample_distribution,
    transmit,
)
from densecoding.states import BellKind, DensityMatrix, bell_state

from .strategies import density_matrices, seeds, unit

KIND = {"00": BellKind.PHI_PLUS, "01": BellKind.PSI_PLUS, "10": BellKind.PHI_MINUS, "11": BellKind.PSI_MINUS}


class TestMessage:
    def test_parse_and_str(self):
        assert Message.parse("10") == Message(1, 0)
        assert str(Message(0, 1)) == "01"

    @pytest.mark.parametrize("text", ["2", "012", "ab", ""])
    def test_bad_text(self, text):
        with pytest.raises(ValueError):
            Message.parse(text)

    def test_order(self):
        assert [str(m) for m in sorted(ALL_MESSAGES)] == ["00", "01", "10", "11"]


class TestEncoding:
    @pytest.mark.parametrize("bits", ["00", "01", "10", "11"])
    def test_maps_to_bell_basis(self, bits):
        out = encode_message(bell_state(), Message.parse(bits))
        assert_allclose(out.matrix, bell_state(KIND[bits]).matrix, atol=1e-15)

    def test_encoded_states_orthogonal(self):
        for a in ALL_MESSAGES:
            for b in ALL_MESSAGES:
                overlap = np.trace(encoded_bell_state(a).matrix @ encoded_bell_state(b).matrix).real
                assert overlap == pytest.approx(float(a == b), abs=1e-14)


class TestBellMeasure:
    @pytest.mark.parametrize("msg", ALL_MESSAGES, ids=str)
    def test_perfect_readout(self, msg):
        dist = bell_measure(encoded_bell_state(msg))
        assert dist[msg] == pytest.approx(1.0, abs=1e-14)

    def test_maximally_mixed_uniform(self):
        dist = bell_measure(DensityMatrix.maximally_mixed(2))
        assert all(v == pytest.approx(0.25, abs=1e-14) for v in dist.values())

    def test_damped_bell(self):
        noisy = apply_channel(amplitude_damping(0.36), bell_state(), [0])
        assert bell_measure(noisy)[Message(0, 0)] == pytest.approx(0.81, abs=1e-12)

    @given(density_matrices(2))
    def test_distribution(self, rho):
        dist = bell_measure(rho)
        assert set(dist) == set(ALL_MESSAGES)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)
        assert min(dist.values()) >= 0.0

    def test_rejects_three_qubits(self):
        with pytest.raises(ValueError):
            bell_measure(DensityMatrix.basis("000"))

    def test_sampling(self):
        dist = {m: 0.25 for m in ALL_MESSAGES}
        a = sample_distribution(dist, 1000, np.random.default_rng(3))
        b = sample_distribution(dist, 1000, np.random.default_rng(3))
        assert a == b and sum(a.values()) == pytest.approx(1.0)


class TestCapacity:
    def test_bell(self):
        assert channel_capacity(bell_state()) == pytest.approx(2.0, abs=1e-12)

    def test_product(self):
        rho = DensityMatrix.basis("0").tensor(DensityMatrix.maximally_mixed(1))
        assert channel_capacity(rho) == pytest.approx(1.0, abs=1e-12)

    @given(density_matrices(2))
    def test_at_most_two(self, rho):
        assert channel_capacity(rho) <= 2.0 + 1e-9

    @staticmethod
    def _caps(q, ps):
        return [channel_capacity(composite_channel_apply(NoiseParams(p, q), bell_state(), 0)) for p in ps]

    def test_decreasing_in_p_without_dephasing(self):
        assert np.all(np.diff(self._caps(0.0, np.linspace(0, 1, 21))) <= 1e-9)

    def test_decreasing_in_q(self):
        for p in (0.0, 0.4, 1.0):
            caps = [channel_capacity(composite_channel_apply(NoiseParams(p, q), bell_state(), 0))
                    for q in np.linspace(0, 1, 21)]
            assert np.all(np.diff(caps) <= 1e-9)

    def test_full_damping_gives_one_bit(self):
        assert self._caps(0.7, [1.0])[0] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.xfail(strict=True, reason="full damping resets Alice to |0>, so capacity climbs back to 1 bit as p -> 1")
    def test_decreasing_in_p_on_full_grid(self):
        grid = np.linspace(0, 1, 21)
        for q in grid:
            assert np.all(np.diff(self._caps(q, grid)) <= 1e-9)


class TestTomography:
    def test_converges(self):
        rho = composite_channel_apply(NoiseParams(0.3, 0.2), bell_state(), 0)
        est = pilot_tomography(rho, 200000, np.random.default_rng(0))
        assert np.max(np.abs(est.matrix - rho.matrix)) < 0.01

    @given(density_matrices(2), seeds)
    @settings(max_examples=15)
    def test_valid_state(self, rho, seed):
        pilot_tomography(rho, 64, np.random.default_rng(seed)).validate()


class TestTransmit:
    def test_noiseless_with_qec_is_identity(self):
        out = transmit(bell_state(), NoiseParams(), use_qec=True)
        assert_allclose(out.matrix, bell_state().matrix, atol=1e-9)

    def test_without_qec_is_single_channel_use(self):
        noise = NoiseParams(0.2, 0.3)
        out = transmit(bell_state(), noise, use_qec=False)
        assert_allclose(out.matrix, composite_channel_apply(noise, bell_state(), 0).matrix)

    def test_sampled_qec_is_a_valid_pair(self):
        out = transmit(bell_state(), NoiseParams(0.1, 0.1), use_qec=True, exact=False, rng=np.random.default_rng(5))
        assert out.num_qubits == 2
        out.validate()


class TestRunProtocol:
    @pytest.mark.parametrize("msg", ALL_MESSAGES, ids=str)
    def test_noiseless(self, msg):
        res = run_protocol(ProtocolConfig(), msg)
        assert res.success_probability == pytest.approx(1.0, abs=1e-12)
        assert res.bell_fidelity == pytest.approx(1.0, abs=1e-12)
        assert res.capacity == pytest.approx(2.0, abs=1e-9)
        assert res.pilot_metrics.qd == pytest.approx(1.0, abs=1e-9)
        assert res.pilot_metrics.eof == pytest.approx(1.0, abs=1e-9)

    @given(unit, unit)
    @settings(max_examples=20)
    def test_distribution_sums_to_one(self, p, q):
        res = run_protocol(ProtocolConfig(noise=NoiseParams(p, q)), Message(1, 1))
        assert sum(res.decoded_distribution.values()) == pytest.approx(1.0, abs=1e-9)
        assert 0.0 <= res.bell_fidelity <= 1.0

    def test_success_equals_closed_form_fidelity(self):
        p, q = 0.3, 0.2
        res = run_protocol(ProtocolConfig(noise=NoiseParams(p, q)), Message(0, 0))
        f = (2 - p) / 4 + np.sqrt(1 - p) * (1 - q) / 2
        assert res.success_probability == pytest.approx(f, abs=1e-9)
        assert res.bell_fidelity == pytest.approx(f, abs=1e-9)

    def test_messages_symmetric(self):
        noise = NoiseParams(0.25, 0.15)
        base = run_protocol(ProtocolConfig(noise=noise), Message(0, 0)).decoded_distribution
        for m in ALL_MESSAGES:
            dist = run_protocol(ProtocolConfig(noise=noise), m).decoded_distribution
            for k, v in base.items():
                assert dist[Message(k.i ^ m.i, k.j ^ m.j)] == pytest.approx(v, abs=1e-12)

    def test_qec_helps_at_low_noise(self):
        noise = NoiseParams(0.1, 0.1)
        on = run_protocol(ProtocolConfig(noise=noise, use_qec=True), Message(0, 0))
        off = run_protocol(ProtocolConfig(noise=noise), Message(0, 0))
        assert on.bell_fidelity >= off.bell_fidelity
        assert on.bell_fidelity == pytest.approx(0.92313, abs=1e-5)

    def test_pilot_metrics_match_direct(self):
        noise = NoiseParams(0.4, 0.1)
        res = run_protocol(ProtocolConfig(noise=noise), Message(0, 1))
        direct = correlation_report(composite_channel_apply(noise, bell_state(), 0))
        assert res.pilot_metrics.qd == pytest.approx(direct.qd, abs=1e-12)
        assert res.pilot_metrics.eof == pytest.approx(direct.eof, abs=1e-12)

    def test_pilot_count_irrelevant_in_exact_mode(self):
        noise = NoiseParams(0.2, 0.2)
        assert measure_pilots(noise, 1) == measure_pilots(noise, 5)

    def test_sampled_mode_deterministic_per_seed(self):
        cfg = ProtocolConfig(noise=NoiseParams(0.2, 0.1), exact=False, shots=256, seed=11, pilot_count=2)
        a = run_protocol(cfg, Message(1, 0)).as_dict()
        b = run_protocol(cfg, Message(1, 0)).as_dict()
        assert a == b
        assert sum(a["decoded_distribution"].values()) == pytest.approx(1.0)

    def test_adaptive_path_reports_choices(self):
        cfg = ProtocolConfig(noise=NoiseParams(0.1, 0.1), use_adaptive_purification=True)
        res = run_protocol(cfg, Message(0, 0))
        assert res.chosen_angles is not None and res.noise_estimate is not None
        plain = run_protocol(ProtocolConfig(noise=NoiseParams(0.1, 0.1)), Message(0, 0))
        assert res.bell_fidelity >= plain.bell_fidelity - 1e-9

    @pytest.mark.parametrize("kwargs", [{"shots": 0}, {"pilot_count": 0}, {"table_step": 0.05}])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            ProtocolConfig(**kwargs)
