"""Radial transport map: construction, identity, inversion, persistence."""

import math

import numpy as np
import pytest

from relfk.errors import DomainError, MapError
from relfk.levy import ModelParams, tail_mass
from relfk.radial_map import RadialMap, build_radial_map, get_radial_map

L_D1_M1_AT_1 = 3.6546935588589902   # 30-digit oracle, rounded


@pytest.fixture(scope="module")
def map_d1_m1():
    return build_radial_map(1, 1.0)


class TestConstruction:
    def test_oracle_pin(self, map_d1_m1):
        assert map_d1_m1.l(1.0) == pytest.approx(L_D1_M1_AT_1, rel=1e-8)
        assert map_d1_m1.l_exact(1.0) == pytest.approx(L_D1_M1_AT_1,
                                                       rel=1e-10)

    def test_tail_matching_identity(self):
        # the defining property: massive tail mass at r equals massless
        # tail mass at l(r)
        for d, m in [(1, 1.0), (2, 0.5), (3, 1.0), (1, 0.01)]:
            mp = build_radial_map(d, m)
            pm, p0 = ModelParams(d, m), ModelParams(d, 0.0)
            for r in (1e-4, 0.1, 1.0, 7.0):
                lhs = tail_mass(r, pm)
                rhs = tail_mass(float(mp.l(r)), p0)
                assert lhs == pytest.approx(rhs, rel=1e-7), (d, m, r)

    def test_expands_radii(self, map_d1_m1):
        r = np.geomspace(1e-5, 100.0, 40)
        lv = map_d1_m1.l(r)
        assert np.all(lv >= r)
        assert np.all(np.diff(lv) > 0)

    def test_identity_like_at_small_radii(self, map_d1_m1):
        # thinning is invisible well below 1/m, so l(r) ~ r there
        assert map_d1_m1.l(1e-5) == pytest.approx(1e-5, rel=1e-3)

    def test_domain_validation(self):
        with pytest.raises(DomainError):
            build_radial_map(1, 0.0)
        with pytest.raises(DomainError):
            build_radial_map(4, 1.0)


class TestInversion:
    def test_roundtrip_machine_precision(self, map_d1_m1):
        r = np.geomspace(1e-5, 500.0, 64)
        back = map_d1_m1.l_inverse(map_d1_m1.l(r))
        np.testing.assert_allclose(back, r, rtol=1e-12)

    def test_inverse_agrees_with_exact_bisection(self, map_d1_m1):
        for x in (0.01, 1.0, 10.0):
            fast = map_d1_m1.l_inverse(x)
            slow = map_d1_m1.l_inverse_exact(x)
            assert fast == pytest.approx(slow, rel=1e-8)

    def test_inverse_contracts(self, map_d1_m1):
        x = np.geomspace(1e-4, 1e3, 30)
        assert np.all(map_d1_m1.l_inverse(x) <= x)

    def test_out_of_range_falls_back_to_exact(self, map_d1_m1):
        # below the table window the exact route must take over seamlessly
        # (above it l is beyond float range, so no finite query lands there)
        r = 1e-8
        assert map_d1_m1.l(r) == pytest.approx(map_d1_m1.l_exact(r),
                                               rel=1e-9)
        assert map_d1_m1.l_inverse(map_d1_m1.l_exact(r)) == pytest.approx(
            r, rel=1e-6)
        assert map_d1_m1.l_inverse(2e7) < 2e7


class TestVectorTransport:
    def test_phi_keeps_direction_d1(self, map_d1_m1):
        z = np.array([-2.0, 0.5, 3.0])
        out = map_d1_m1.phi(z)
        assert np.all(np.sign(out) == np.sign(z))
        assert np.abs(out[0]) == pytest.approx(
            float(map_d1_m1.l_inverse(2.0)), rel=1e-12)

    def test_phi_phi_inverse_roundtrip_d2(self):
        mp = build_radial_map(2, 0.7)
        rng = np.random.default_rng(5)
        z = rng.normal(size=(50, 2))
        back = mp.phi_inverse(mp.phi(z))
        np.testing.assert_allclose(back, z, rtol=1e-10)

    def test_phi_rejects_zero(self, map_d1_m1):
        with pytest.raises(DomainError):
            map_d1_m1.phi(np.array([0.0, 1.0]))


class TestPersistence:
    def test_save_load_roundtrip(self, tmp_path, map_d1_m1):
        path = tmp_path / "map.txt"
        map_d1_m1.save(path)
        loaded = RadialMap.load(path)
        assert loaded.d == 1 and loaded.m == 1.0
        r = np.geomspace(1e-4, 10, 17)
        np.testing.assert_array_equal(loaded.l(r), map_d1_m1.l(r))

    def test_load_rejects_unknown_format(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("# some other table\n0 0\n")
        with pytest.raises(MapError):
            RadialMap.load(path)

    def test_cache_returns_same_object(self):
        a = get_radial_map(1, 0.25)
        b = get_radial_map(1, 0.25)
        assert a is b


class TestInternalConsistency:
    def test_monotone_node_arrays(self, map_d1_m1):
        assert np.all(np.diff(map_d1_m1.log_r) > 0)
        assert np.all(np.diff(map_d1_m1.log_l) > 0)
        assert np.all(map_d1_m1.log_l >= map_d1_m1.log_r)

    def test_rejects_shrinking_table(self):
        log_r = np.linspace(0.0, 1.0, 50)
        with pytest.raises(MapError):
            RadialMap(d=1, m=1.0, log_r=log_r, log_l=log_r - 0.1)
