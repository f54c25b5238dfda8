import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochastic_spacetime.core import (
    CoordinateFrameError,
    NonphysicalDeterminantError,
    ParameterDomainError,
    PerturbationRegimeError,
    SingularTransformError,
)
from stochastic_spacetime.metric_algebra import (
    W_ZT,
    Metric4,
    MetricMixture,
    PlaneWavePhase,
    congruence_transform,
    det4,
    f_metric_catalog,
    interference_pattern,
    minkowski,
    parse_transform_table,
    perturbed_metric,
    plane_wave_metric,
    probability_density,
    superpose,
    two_slit_metric,
    w_zt_block,
)

angles = st.floats(-20, 20, allow_nan=False)
entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(st.lists(entries, min_size=16, max_size=16))
def test_det4_matches_lu(values):
    m = np.array(values).reshape(4, 4)
    ref = np.linalg.det(m)
    assert abs(det4(m) - ref) <= 1e-9 * max(1.0, abs(ref), np.abs(m).max() ** 4)


def test_det4_stacks():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(7, 4, 4)) + 1j * rng.normal(size=(7, 4, 4))
    np.testing.assert_allclose(det4(m), np.linalg.det(m), atol=1e-12)


def test_minkowski_density_is_one():
    assert probability_density(minkowski()) == 1.0


def test_positive_determinant_rejected():
    with pytest.raises(NonphysicalDeterminantError):
        probability_density(Metric4(np.eye(4)))


def test_asymmetric_input_symmetrised():
    m = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    m[0, 1] = 0.2
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        g = Metric4(m)
    assert caught and g[0, 1] == g[1, 0] == 0.1


def test_bad_shape_rejected():
    with pytest.raises(ParameterDomainError):
        Metric4(np.eye(3))


def test_json_roundtrip():
    g = plane_wave_metric(0.7)
    assert Metric4.from_json(g.to_json()).allclose(g.entries, atol=0)


@given(angles)
def test_plane_wave_unit_density(a):
    assert abs(probability_density(plane_wave_metric(a)) - 1.0) < 1e-12


def test_phase_object_matches_scalar():
    p = PlaneWavePhase(1.2, 0.4, 0.5, 2.0)
    assert plane_wave_metric(p).allclose(plane_wave_metric(1.2 * 0.5 - 0.4 * 2.0).entries)


@given(angles, angles)
def test_interference_closed_forms(a, b):
    (_, d76), = interference_pattern([a], b, "two_slit_1976")
    (_, d16), = interference_pattern([a], b, "plane_wave_2016")
    assert abs(d76 - abs(math.cos((a - b) / 2))) < 1e-10
    assert abs(d16 - math.cos((a - b) / 2) ** 2) < 1e-10


@given(angles)
def test_interference_symmetric_in_phases(a):
    (_, x), = interference_pattern([a], 0.3)
    (_, y), = interference_pattern([0.3], a)
    assert abs(x - y) < 1e-12


def test_mixture_weights_validated():
    with pytest.raises(ParameterDomainError):
        MetricMixture([(0.7, minkowski()), (0.7, minkowski())])
    with pytest.raises(ParameterDomainError):
        MetricMixture([])


def test_superpose_frame_mismatch():
    other = Metric4(np.diag([1.0, 1, 1, -1]), ("r", "theta", "phi", "t"))
    with pytest.raises(CoordinateFrameError):
        superpose([(0.5, minkowski()), (0.5, other)])


def test_perturbation_bound():
    with pytest.raises(PerturbationRegimeError):
        perturbed_metric(0.0, 1.0)
    assert perturbed_metric(0.3, 0.0).allclose(minkowski().entries)


@given(angles)
def test_w_congruence_real_block(a):
    g = congruence_transform(two_slit_metric(a), W_ZT)
    assert g.is_real
    np.testing.assert_allclose(g.entries[2:, 2:].real, w_zt_block(a), atol=1e-12)
    np.testing.assert_allclose(g.entries[:2, :2], np.eye(2), atol=1e-12)


def test_w_unimodular():
    assert abs(abs(det4(W_ZT)) - 1) < 1e-12


def test_singular_transform_rejected():
    with pytest.raises(SingularTransformError):
        congruence_transform(minkowski(), np.zeros((4, 4)))


def test_parse_table():
    a = parse_transform_table(("x", "-y", "iz+t", "-it"))
    expected = np.array([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1j, 1], [0, 0, 0, -1j]])
    np.testing.assert_array_equal(a, expected)
    with pytest.raises(ParameterDomainError):
        parse_transform_table(("x*2", "y", "z", "t"))


@pytest.mark.parametrize("f", f_metric_catalog(), ids=lambda f: f.name)
def test_f_metrics_real_symmetric_singular(f):
    for a in np.linspace(0, 2 * np.pi, 9):
        g = f(a)
        assert g.is_real
        assert abs(det4(g.entries)) < 1e-9
