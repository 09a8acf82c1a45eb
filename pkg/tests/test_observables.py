import math

import numpy as np
import pytest

from bellsim.linalg import PAULI_X, PAULI_Z
from bellsim.observables import (
    PolarAngles,
    UnitVector3,
    X_AXIS,
    Z_AXIS,
    commutes,
    from_polar,
    spin_observable,
    to_polar,
)

rng = np.random.default_rng(52)


def random_direction():
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return UnitVector3(*v)


# --- directions ---------------------------------------------------------------


def test_unit_vector_rejects_far_from_unit():
    with pytest.raises(ValueError):
        UnitVector3(1.1, 0.0, 0.0)
    with pytest.raises(ValueError):
        UnitVector3(0.0, 0.0, 0.0)


def test_unit_vector_renormalizes_small_drift():
    v = UnitVector3(1.0 + 5e-10, 0.0, 0.0)
    assert v.x == 1.0
    norm = math.sqrt(v.x**2 + v.y**2 + v.z**2)
    assert abs(norm - 1.0) <= 1e-15


def test_polar_angles_ranges():
    PolarAngles(0.0, 0.0)
    PolarAngles(math.pi, 2 * math.pi - 1e-12)
    for theta, phi in [(-0.1, 0.0), (math.pi + 0.1, 0.0), (0.5, -0.1), (0.5, 2 * math.pi)]:
        with pytest.raises(ValueError):
            PolarAngles(theta, phi)


def test_from_polar_examples():
    north = from_polar(PolarAngles(0.0, 0.0))
    assert (north.x, north.y, north.z) == (0.0, 0.0, 1.0)

    equator = from_polar(PolarAngles(math.pi / 2, 0.0))
    assert abs(equator.x - 1.0) <= 1e-15
    assert abs(equator.z) <= 1e-15

    diag = from_polar(PolarAngles(math.pi / 4, 0.0))
    assert abs(diag.x - 1 / math.sqrt(2)) <= 1e-15
    assert abs(diag.z - 1 / math.sqrt(2)) <= 1e-15


def test_to_polar_roundtrip():
    for _ in range(200):
        v = random_direction()
        w = from_polar(to_polar(v))
        assert abs(v.x - w.x) <= 1e-12
        assert abs(v.y - w.y) <= 1e-12
        assert abs(v.z - w.z) <= 1e-12


# --- spin observables ------------------------------------------------------------


def test_spin_observable_axes():
    assert np.allclose(spin_observable(Z_AXIS).matrix.entries, PAULI_Z.entries)
    assert np.allclose(spin_observable(X_AXIS).matrix.entries, PAULI_X.entries)


def test_spin_observable_diagonal_direction():
    inv = 1 / math.sqrt(2)
    obs = spin_observable(UnitVector3(inv, 0.0, inv))
    assert np.allclose(obs.matrix.entries, [[inv, inv], [inv, -inv]])
    eigs = np.linalg.eigvalsh(obs.matrix.entries)
    assert np.allclose(eigs, [-1.0, 1.0], atol=1e-12)


def test_spin_observable_random_directions():
    for _ in range(1000):
        m = spin_observable(random_direction()).matrix.entries
        assert np.max(np.abs(m @ m - np.eye(2))) <= 1e-12
        assert abs(np.trace(m)) <= 1e-15
        assert np.max(np.abs(m - m.conj().T)) <= 1e-15


# --- commutation ------------------------------------------------------------------


def test_commutes_parallel_and_antiparallel():
    oz = spin_observable(Z_AXIS)
    assert commutes(oz, oz)
    assert commutes(oz, spin_observable(-Z_AXIS))


def test_commutes_orthogonal_is_false():
    # [sigma_z, sigma_x] = 2i sigma_y, entrywise magnitude 2
    assert not commutes(spin_observable(Z_AXIS), spin_observable(X_AXIS))


def test_commutes_iff_colinear():
    for _ in range(300):
        m = random_direction()
        n = random_direction()
        colinear = abs(m.dot(n)) >= 1.0 - 1e-12
        assert commutes(spin_observable(m), spin_observable(n)) == colinear
    for _ in range(50):
        m = random_direction()
        assert commutes(spin_observable(m), spin_observable(m))
        assert commutes(spin_observable(m), spin_observable(-m))
