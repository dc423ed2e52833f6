import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biphoton.errors import InvalidArgument
from biphoton.special import erfc_complex, faddeeva
from tests.oracles.faddeeva_series import DATA, dawson_series, erfc_series, sample_points, w_series

finite = st.floats(-6, 6, allow_nan=False, allow_infinity=False)


def test_origin():
    assert faddeeva(0) == pytest.approx(1.0, abs=1e-15)
    assert erfc_complex(0) == pytest.approx(1.0, abs=1e-15)


def test_decay_along_imaginary_axis():
    vals = [abs(faddeeva(1j * y)) for y in (1.0, 10.0, 100.0, 1e4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # w(iy) ~ 1/(sqrt(pi) y)
    assert vals[-1] == pytest.approx(1 / (np.sqrt(np.pi) * 1e4), rel=1e-7)


def test_real_one_against_series():
    ref = w_series(1.0 + 0j, digits=30)
    assert abs(faddeeva(1.0) - ref) / abs(ref) < 1e-14


def test_erfc_half_half_against_series():
    z = 0.5 + 0.5j
    ref = erfc_series(z)
    assert abs(erfc_complex(z) - ref) / abs(ref) < 1e-12


def test_live_oracle_sample():
    z = sample_points(200, seed=7)
    ref = np.array([w_series(complex(x)) for x in z])
    err = np.abs(faddeeva(z) - ref) / np.abs(ref)
    assert err.max() < 1e-12


def test_frozen_oracle_bulk():
    d = np.load(DATA)
    err = np.abs(faddeeva(d["z"]) - d["w"]) / np.abs(d["w"])
    assert err.max() < 1e-12


def test_beyond_split_radius():
    z = np.array([5 + 0.01j, 9 - 0.3j, -12 + 2j, 30j, 4.5 - 4.5j, 20 + 0.0j])
    ref = np.array([w_series(complex(x)) for x in z])
    assert np.max(np.abs(faddeeva(z) - ref) / np.abs(ref)) < 1e-10


def test_dawson_identity_small_z():
    rng = np.random.default_rng(3)
    z = 1.5 * (rng.random(50) - 0.5) + 1.5j * (rng.random(50) - 0.5)
    d = np.array([dawson_series(complex(x)) for x in z])
    rhs = np.exp(-z * z) + 2j / np.sqrt(np.pi) * d
    assert np.max(np.abs(faddeeva(z) - rhs) / np.abs(rhs)) < 1e-10


@settings(max_examples=300, deadline=None)
@given(finite, finite)
def test_reflection_symmetry(x, y):
    z = complex(x, y)
    assert abs(faddeeva(-z.conjugate()) - np.conj(faddeeva(z))) <= 1e-12 * abs(faddeeva(z))


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_erfc_reflection(x, y):
    z = complex(x, y)
    assert abs(erfc_complex(z) + erfc_complex(-z) - 2) < 1e-10 * max(1.0, abs(erfc_complex(z)))


def test_shape_preserved():
    z = np.zeros((3, 4), dtype=complex)
    assert faddeeva(z).shape == (3, 4)


@pytest.mark.parametrize("bad", [np.nan, np.inf, complex(1, np.inf)])
def test_non_finite_rejected(bad):
    with pytest.raises(InvalidArgument):
        faddeeva(bad)
