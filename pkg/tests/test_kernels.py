"""Both series backends against each other and against quadrature."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapejc import _backend, _kernels_py
from shapejc.inversion import f_series
from shapejc.oracle import quad_f

from conftest import BACKENDS

KINDS = ["CC", "CS", "SC", "SS"]


def test_backend_selected():
    assert _backend.BACKEND in ("cython", "python")
    assert _backend.get_kernels("python") is _kernels_py
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


@pytest.mark.parametrize("kind", KINDS)
def test_frozen_values(backend, kind):
    frozen = {
        "CC": (1.0, 2.0, 1.0, 0.44425549374725937),
        "CS": (0.0, 2.0, 1.0, 0.7080734182735712),
        "SC": (2.0, 0.0, 1.0, 0.7080734182735712),
        "SS": (1.0, 1.0, math.pi, math.pi / 2),
    }
    x, w, t, ref = frozen[kind]
    assert f_series(kind, x, w, t, 40, backend=backend) == pytest.approx(ref, abs=1e-12)


def test_trivial_cases(backend):
    assert f_series("CC", 0.0, 0.0, 1.7, backend=backend) == pytest.approx(1.7, abs=1e-15)
    assert f_series("SS", 1.3, 0.0, 1.7, backend=backend) == 0.0
    assert f_series("CC", 2.0, 1.0, 0.0, backend=backend) == 0.0


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernel not built")
@settings(max_examples=200, deadline=None)
@given(
    kind=st.sampled_from(KINDS),
    x=st.floats(-8, 8),
    w=st.floats(-8, 8),
    t=st.floats(0, 3),
    order=st.integers(1, 60),
)
def test_backends_agree(kind, x, w, t, order):
    a = f_series(kind, x, w, t, order, backend="python")
    b = f_series(kind, x, w, t, order, backend="cython")
    # summation order differs; cancellation scales with the largest partial term
    tol = 1e-14 * (1.0 + t) * math.exp(abs(x * t) + abs(w * t))
    assert abs(a - b) <= tol


@settings(max_examples=100, deadline=None)
@given(kind=st.sampled_from(KINDS), x=st.floats(-3, 3), w=st.floats(-3, 3), t=st.floats(0, 2))
def test_series_matches_quadrature(kind, x, w, t):
    assert abs(f_series(kind, x, w, t, 40) - quad_f(kind, x, w, t)) <= 1e-8


def test_many_matches_scalar(backend):
    k = _backend.get_kernels(backend)
    x = np.linspace(-2, 2, 7)
    w = np.linspace(3, -1, 7)
    many = k.f_series_many(1, 0, x, w, 1.3, 40)
    single = [k.f_series(1, 0, a, b, 1.3, 40) for a, b in zip(x, w)]
    assert np.array_equal(many, np.array(single))
