import math

import numpy as np
import pytest

from shapejc.errors import DomainError
from shapejc.evolution import (
    c_operator,
    d_operator,
    evolution_series,
    evolve_state,
    interaction_frequencies,
    propagator,
    schrodinger_residual,
    second_derivative_residual,
)
from shapejc.operator_core import CouplingConfig, EnergyLadder, ShapeInvariantModel, energy_ladder, sqrt_shift_down
from shapejc.oracle import exact_propagator
from shapejc.spectrum import TwoChannelState, dressed_state, mixing_coefficients


def test_frequencies_examples(ho16):
    f = interaction_frequencies(ho16, CouplingConfig(0.2, 0.0))
    assert f.omega1[0] == pytest.approx(0.2, abs=1e-16)
    assert f.omega2[0] == 0.0
    g = interaction_frequencies(ho16, CouplingConfig(0.2, 0.3))
    assert g.omega1[1] == pytest.approx(math.sqrt(0.17), abs=1e-15)
    assert len(g.omega1) == len(g.omega2) == 16


def test_frequencies_rung_matching_exact(scaling16, mode):
    f = interaction_frequencies(scaling16, CouplingConfig(0.37, -0.21, mode))
    assert np.array_equal(f.omega2[1:], f.omega1[:-1])


def test_frequencies_intensity(ho16):
    f = interaction_frequencies(ho16, CouplingConfig(0.5, 0.3, "intensity"))
    assert f.omega1[2] == pytest.approx(math.hypot(1.5, 0.3))


def test_c_operator(ho16):
    c = c_operator(ho16)
    assert c.shape == (15, 16)
    assert np.all(c[:, 0] == 0)
    assert np.allclose(np.diag(c, 1), 1j, atol=1e-15)
    cc = c @ c.conj().T
    assert np.allclose(cc, np.eye(15), atol=1e-15)
    ctc = c.conj().T @ c
    assert np.allclose(ctc[1:, 1:], np.eye(15), atol=1e-15)
    assert np.array_equal(d_operator(ho16), -c.conj().T)
    # C sqrt(B+ T^dagger) = i H2^(1/4)
    prod = c @ sqrt_shift_down(ho16).T
    assert np.allclose(prod, 1j * np.diag(ho16.h2 ** 0.25), atol=1e-14)


def test_c_operator_domain():
    class Fake:
        h2 = np.array([1.0, 0.0])

    fake = Fake()
    with pytest.raises(DomainError):
        c_operator(fake)


def test_intertwining(scaling16):
    f = interaction_frequencies(scaling16, CouplingConfig(0.3, 0.2))
    shift = sqrt_shift_down(scaling16) != 0
    w1, w2 = f.omega1[:15], f.omega2
    for func in (lambda w: np.sin(w * 1.3), lambda w: np.cos(w * 2.1)) + tuple((lambda w, n=n: w ** n) for n in range(7)):
        left = shift * func(w2)[None, :]
        right = func(w1)[:, None] * shift
        assert np.array_equal(left, right)


def test_propagator_identity_at_zero(ho16, mode):
    u = propagator(ho16, CouplingConfig(0.2, 0.3, mode), 0.0)
    assert np.array_equal(u.dense(), np.eye(31))


def test_propagator_rung_form(ho16, detuned):
    t = 1.7
    u = propagator(ho16, detuned, t)
    w = interaction_frequencies(ho16, detuned).omega1
    for m in (0, 5, 14):
        th = w[m] * t
        assert np.allclose(u.rung_block(m), [[math.cos(th), 1j * math.sin(th)], [1j * math.sin(th), math.cos(th)]], atol=1e-15)


def test_half_rabi_cycle(ho16):
    u = propagator(ho16, CouplingConfig(0.2, 0.0), math.pi / 0.4)
    blk = u.rung_block(0)
    assert abs(blk[0, 0]) <= 1e-15
    assert abs(blk[0, 1]) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("delta", [0.0, 0.3, -0.8])
def test_unitarity(scaling16, mode, delta):
    c = CouplingConfig(0.4, delta, mode)
    for t in np.linspace(0, 20, 13):
        assert propagator(scaling16, c, t).unitarity_defect() <= 1e-12


def test_literal_singleton_is_not_unitary(ho16, detuned):
    u = propagator(ho16, detuned, 1.7, literal_singleton=True)
    assert u.op.ll[0, 0] == pytest.approx(math.cos(0.3 * 1.7))
    assert u.unitarity_defect() > 0.1
    assert propagator(ho16, detuned, 1.7).op.ll[0, 0] == pytest.approx(np.exp(0.51j))


def test_rung_periodicity(ho16, detuned):
    w = interaction_frequencies(ho16, detuned).omega1
    for m in (0, 7):
        period = 2 * math.pi / w[m]
        a = propagator(ho16, detuned, 0.9).rung_block(m)
        b = propagator(ho16, detuned, 0.9 + period).rung_block(m)
        assert np.allclose(a, b, atol=1e-13)


def test_resonant_magnitudes_match_oracle(scaling16, mode):
    c = CouplingConfig(0.3, 0.0, mode)
    for t in (0.4, 2.2, 9.1):
        u = propagator(scaling16, c, t).dense()
        ref = exact_propagator(scaling16, c, t).dense()
        assert np.max(np.abs(np.abs(u) - np.abs(ref))) <= 1e-10


def test_schrodinger_residual(ho16, mode):
    c0 = CouplingConfig(0.2, 0.0, mode)
    for t in (0.3, 1.0, 4.4):
        assert schrodinger_residual(ho16, c0, t, conjugate_offdiagonal=True) <= 1e-12
        # as printed, the +i convention misses by twice the largest rung coupling
        assert schrodinger_residual(ho16, c0, t) > 0.1
    assert schrodinger_residual(ho16, CouplingConfig(0.2, 0.3, mode), 1.0) > 0


def test_schrodinger_residual_regression(ho16, detuned):
    assert schrodinger_residual(ho16, detuned, 1.0) == pytest.approx(1.6330513266188644, rel=1e-12)


@pytest.mark.parametrize("delta", [0.0, 0.3])
def test_second_order_analytic(ho16, mode, delta):
    c = CouplingConfig(0.2, delta, mode)
    for t in (0.0, 1.3, 7.9):
        assert second_derivative_residual(ho16, c, t) <= 1e-10


def test_second_order_finite_difference_rate(mode):
    ladder = energy_ladder(ShapeInvariantModel.harmonic(), 64)
    c = CouplingConfig(0.5, 0.3, mode)
    for t in (0.3, 2.5):
        r = second_derivative_residual(ladder, c, t, 1e-3) / second_derivative_residual(ladder, c, t, 5e-4)
        assert 3.6 <= r <= 4.4


def test_evolve_state_zero_time(ho16, detuned):
    s = dressed_state(ho16, detuned, 2, 1)
    out = evolve_state(s, ho16, detuned, 0.0)
    assert np.array_equal(out.vector(), s.vector())


def test_evolve_state_dressed_pure_phase(ho16, mode):
    c = CouplingConfig(0.2, 0.0, mode)
    s = dressed_state(ho16, c, 3, -1)
    for t in (0.5, 3.3, 12.0):
        out = evolve_state(s, ho16, c, t)
        assert abs(abs(s.overlap(out)) - 1) <= 1e-10
        assert abs(out.norm - 1) <= 1e-12


def test_evolve_state_norm(scaling16, detuned):
    rng = np.random.default_rng(1)
    v = rng.normal(size=31) + 1j * rng.normal(size=31)
    s = TwoChannelState.from_vector(v / np.linalg.norm(v), 15)
    for t in (0.7, 5.0):
        assert abs(evolve_state(s, scaling16, detuned, t).norm - 1) <= 1e-12


def test_evolve_state_singleton_phase(ho16, detuned):
    lower = np.zeros(16, complex)
    lower[0] = 1
    s = TwoChannelState(np.zeros(15), lower)
    out = evolve_state(s, ho16, detuned, 2.0)
    assert out.lower[0] == pytest.approx(np.exp(0.6j), abs=1e-15)


def test_evolve_state_dimension_mismatch(ho16, detuned):
    with pytest.raises(ValueError):
        evolve_state(TwoChannelState(np.ones(3), np.ones(4)), ho16, detuned, 1.0)


def test_evolution_series_csv(ho16, detuned):
    s = dressed_state(ho16, detuned, 0, 1)
    text = evolution_series(s, ho16, detuned, [0.0, 0.5])
    lines = text.splitlines()
    assert lines[0] == "t,channel,index,re,im,prob"
    assert len(lines) == 1 + 2 * 31
    probs = [float(line.split(",")[-1]) for line in lines[1:32]]
    assert sum(probs) == pytest.approx(1.0, abs=1e-12)
