import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapejc.errors import DegenerateCouplingError, DomainError, ModelValidityError, OutOfRangeError
from shapejc.operator_core import (
    BlockOperator,
    CouplingConfig,
    EnergyLadder,
    ShapeInvariantModel,
    coupling_operator,
    diag_function,
    energy_ladder,
    h0_operator,
    h_int_operator,
    remainder_sequence,
    rung_system,
    s_operator,
    sigma3_operator,
    sqrt_shift_down,
)


def test_remainders_harmonic():
    assert list(remainder_sequence(ShapeInvariantModel.harmonic(1.0), 3)) == [1.0, 1.0, 1.0]
    assert list(remainder_sequence(ShapeInvariantModel.harmonic(2.0, hbar=0.5), 2)) == [1.0, 1.0]


def test_remainders_scaling():
    assert list(remainder_sequence(ShapeInvariantModel.scaling(1.0, 2.0), 2)) == [2.0, 2.0]
    assert list(remainder_sequence(ShapeInvariantModel.scaling(0.5, 1.0), 3)) == [1.0, 0.5, 0.25]


def test_remainders_explicit_limit():
    model = ShapeInvariantModel.explicit([1.0, 2.0, 3.0])
    assert list(remainder_sequence(model, 3)) == [1.0, 2.0, 3.0]
    with pytest.raises(OutOfRangeError, match="maximum 3"):
        remainder_sequence(model, 4)


@pytest.mark.parametrize(
    "builder",
    [
        lambda: ShapeInvariantModel.explicit([1.0, -2.0]),
        lambda: ShapeInvariantModel.explicit([]),
        lambda: ShapeInvariantModel.harmonic(0.0),
        lambda: ShapeInvariantModel.scaling(1.5, 1.0),
        lambda: ShapeInvariantModel.scaling(0.5, -1.0),
        lambda: ShapeInvariantModel("morse"),
        lambda: ShapeInvariantModel.harmonic(1.0, hbar=0.0),
    ],
)
def test_invalid_models(builder):
    with pytest.raises(ModelValidityError):
        builder()


def test_energy_ladder_examples():
    assert list(energy_ladder(ShapeInvariantModel.harmonic(1.0), 4).energies) == [0, 1, 2, 3, 4]
    lad = energy_ladder(ShapeInvariantModel.scaling(0.5, 1.0), 3)
    assert lad.energies[0] == 0.0
    assert lad.energies[3] == 1.75
    assert lad.dim == 3


def test_energy_ladder_rejects_small_dim():
    with pytest.raises(OutOfRangeError):
        energy_ladder(ShapeInvariantModel.harmonic(), 1)


def test_energy_ladder_is_read_only(ho16):
    with pytest.raises(ValueError):
        ho16.energies[1] = 5.0


def test_energy_ladder_validation():
    with pytest.raises(ModelValidityError):
        EnergyLadder(np.array([0.0, 2.0, 1.0]))
    with pytest.raises(ModelValidityError):
        EnergyLadder(np.array([0.1, 1.0, 2.0]))
    with pytest.raises(ModelValidityError):
        EnergyLadder(np.array([0.0, 0.0, 1.0]))


def test_geometric_ladder_saturates_in_double_precision():
    # q^63 is far below the spacing of doubles near 2
    lad = energy_ladder(ShapeInvariantModel.scaling(0.5, 1.0), 64)
    assert lad.energies[-1] == lad.energies[-2] == 2.0
    assert np.all(np.diff(lad.energies) >= 0)


@settings(max_examples=50, deadline=None)
@given(
    rem=st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=40),
)
def test_ladder_differences_reproduce_remainders(rem):
    model = ShapeInvariantModel.explicit(rem)
    lad = energy_ladder(model, len(rem))
    diffs = np.diff(lad.energies)
    # differencing partial sums loses digits relative to E_n, not to R_n
    assert np.all(np.abs(diffs - rem) <= 1e-14 * lad.energies[1:])


def test_ladder_differences_bitwise_for_harmonic():
    lad = energy_ladder(ShapeInvariantModel.harmonic(1.0), 64)
    assert np.array_equal(np.diff(lad.energies), np.ones(64))


def test_coupling_config():
    c = CouplingConfig(0.2, 0.3)
    assert c.beta == pytest.approx(1.5)
    assert c.replace(delta=0.6).beta == pytest.approx(3.0)
    with pytest.raises(DegenerateCouplingError):
        CouplingConfig(0.0, 0.3).beta
    with pytest.raises(ModelValidityError):
        CouplingConfig(-0.1, 0.3)
    with pytest.raises(ModelValidityError):
        CouplingConfig(0.1, 0.3, "quadratic")
    assert CouplingConfig.from_dict({"alpha": 1, "delta": 0}).to_dict() == {"alpha": 1.0, "delta": 0.0, "mode": "linear"}


def test_model_dict_roundtrip():
    for m in (ShapeInvariantModel.harmonic(2.0), ShapeInvariantModel.scaling(0.3, 1.2), ShapeInvariantModel.explicit([1, 2])):
        assert ShapeInvariantModel.from_dict(m.to_dict()) == m


def test_rung_amplitudes(ho16):
    lin = rung_system(ho16, CouplingConfig(0.2, 0.0))
    assert np.allclose(lin.rung_amplitudes, np.sqrt(np.arange(1, 17)), rtol=0, atol=1e-15)
    inten = rung_system(ho16, CouplingConfig(0.2, 0.0, "intensity"))
    assert np.array_equal(inten.rung_amplitudes, np.arange(1, 17, dtype=float))
    assert rung_system(ho16, CouplingConfig(0.2, 0.3)).singleton_energy == -0.3


def test_rung_system_requires_same_hbar(ho16):
    with pytest.raises(ModelValidityError):
        rung_system(ho16, CouplingConfig(0.2, 0.3, hbar=2.0))


def test_rung_matrix(ho16):
    rs = rung_system(ho16, CouplingConfig(0.2, 0.3))
    assert np.allclose(rs.rung_matrix(1), [[0.3, 0.2 * math.sqrt(2)], [0.2 * math.sqrt(2), -0.3]])
    with pytest.raises(OutOfRangeError):
        rs.rung_matrix(15)


def test_h_int_is_block_diagonal_over_rungs(scaling16, mode):
    rs = rung_system(scaling16, CouplingConfig(0.3, -0.2, mode))
    h = h_int_operator(rs).dense().real
    nu = scaling16.n_upper
    rebuilt = np.zeros_like(h)
    for m in range(rs.n_rungs):
        idx = [m, nu + m + 1]
        rebuilt[np.ix_(idx, idx)] = rs.rung_matrix(m)
    rebuilt[nu, nu] = rs.singleton_energy
    assert np.array_equal(h, rebuilt)


def test_s_squared_is_h0(scaling16):
    s = s_operator(scaling16)
    assert ((s @ s) - h0_operator(scaling16)).max_abs() <= 1e-14


def test_sqrt_shift_product(ho16):
    r = sqrt_shift_down(ho16)
    assert np.allclose(r @ r.T, np.diag(np.sqrt(ho16.h2)), atol=1e-14)


def test_intensity_operator_amplitude(ho16):
    s = coupling_operator(ho16, "intensity")
    assert s.ul[2, 3] == 3.0
    assert s.is_hermitian()


def test_sigma3_anticommutes_with_s(ho16):
    s, s3 = s_operator(ho16), sigma3_operator(ho16)
    assert ((s @ s3) + (s3 @ s)).max_abs() == 0.0


def test_block_operator_algebra():
    rng = np.random.default_rng(0)
    dense = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    op = BlockOperator.from_dense(dense, 2)
    assert np.array_equal(op.dense(), dense)
    assert np.array_equal(op.adjoint().adjoint().dense(), dense)
    assert np.array_equal(op.adjoint().dense(), dense.conj().T)
    other = BlockOperator.from_dense(rng.normal(size=(5, 5)), 2)
    assert np.allclose((op @ other).dense(), dense @ other.dense())
    assert np.allclose((op + other - other).dense(), dense)
    assert np.allclose((2 * op).dense(), 2 * dense)
    with pytest.raises(ValueError):
        BlockOperator(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((3, 2)), np.zeros((3, 3)))


def test_diag_function_examples():
    assert list(diag_function([0, 1, 4], math.sqrt)) == [0, 1, 2]
    assert list(diag_function([1], lambda x: x ** 0.25)) == [1.0]
    assert diag_function([2], lambda x: math.cos(x * 0.5))[0] == pytest.approx(0.540302, abs=1e-6)


def test_diag_function_names_bad_eigenvalue():
    with pytest.raises(DomainError, match="-4"):
        diag_function([1.0, -4.0], math.sqrt)
    with pytest.raises(DomainError, match="0.0"):
        diag_function([0.0], lambda x: 1 / x)
