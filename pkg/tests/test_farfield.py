import cmath
import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import j1

from shapegen import farfield as ff
from shapegen import geometry as g
from shapegen.errors import ConfigError, SupportError


def bessel_disk(R, w):
    q = np.linalg.norm(w, axis=1)
    return 2 * np.pi * R * j1(q * R) / q


def rect_integral(w, L):
    # int over the centred box of exp(-i w.y), with sin(x)/x written out
    out = np.ones(len(w), dtype=complex)
    for j, Lj in enumerate(L):
        x = w[:, j] * Lj / 2
        out *= np.where(x == 0, Lj, 2 * np.sin(x) / np.where(x == 0, 1, w[:, j]))
    return out


# --- admissible set -------------------------------------------------------------

def test_admissible_entries_and_zero_sample():
    adm = ff.admissible_set(2, 2 * math.pi, 0.1, 1)
    i = adm.index((1, 0))
    assert adm.k[i] == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_array_equal(adm.xhat[i], [1.0, 0.0])
    z = adm.index((0, 0))
    assert z == adm.zero_index
    assert adm.k[z] == pytest.approx(0.1, rel=1e-15)
    np.testing.assert_array_equal(adm.xhat[z], [1.0, 0.0])


def test_admissible_count_3d():
    assert len(ff.admissible_set(3, 1.0, 0.5, 19)) == 39**3


def test_admissible_lexicographic_order():
    adm = ff.admissible_set(3, 1.0, 0.3, 2)
    keys = [tuple(x) for x in adm.xi]
    assert keys == sorted(keys)
    assert keys[0] == (-2, -2, -2) and keys[-1] == (2, 2, 2)
    assert all(adm.index(x) == i for i, x in enumerate(keys))


@settings(max_examples=30)
@given(st.sampled_from([2, 3]), st.floats(0.5, 20), st.floats(0.01, 0.99), st.integers(1, 4))
def test_k_xhat_matches_lattice(d, a, mu, N):
    adm = ff.admissible_set(d, a, mu, N)
    w = adm.k[:, None] * adm.xhat
    nz = np.any(adm.xi != 0, axis=1)
    np.testing.assert_allclose(w[nz], (2 * np.pi / a) * adm.xi[nz], rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(np.linalg.norm(adm.xhat, axis=1), 1.0, rtol=1e-14)


@pytest.mark.parametrize("args", [(1, 1.0, 0.1, 2), (2, -1.0, 0.1, 2), (2, 1.0, 0.0, 2),
                                  (2, 1.0, 1.0, 2), (2, 1.0, 0.1, 0)])
def test_admissible_rejects_bad_parameters(args):
    with pytest.raises(ConfigError):
        ff.admissible_set(*args)


# --- constants ------------------------------------------------------------------

def test_c_const_values():
    c2 = ff.c_const(2, 3.7)
    assert c2.real == pytest.approx(-0.141047, abs=1e-6)
    assert c2.imag == pytest.approx(-0.141047, abs=1e-6)
    c3 = ff.c_const(3, 2 * math.pi)
    assert c3.real == pytest.approx(-0.199471, abs=1e-6)
    assert abs(c3.imag) < 1e-15


@given(st.floats(1e-3, 1e3))
def test_c_const_modulus_2d(k):
    assert abs(ff.c_const(2, k)) == pytest.approx(1 / math.sqrt(8 * math.pi), rel=1e-14)


# --- quadrature -----------------------------------------------------------------

def test_disk_against_bessel():
    adm = ff.admissible_set(2, 4.0, 0.1, 20)
    gen = ff.farfield(g.disk(1.0), adm, ff.QuadratureConfig(1024))
    ref = bessel_disk(1.0, adm.omega)
    np.testing.assert_allclose(gen.integrals(), ref, rtol=1e-10)
    i = adm.index((1, 0))
    assert gen.integrals()[i].real == pytest.approx(2 * np.pi * j1(np.pi / 2) / (np.pi / 2), rel=1e-12)


def test_rectangle_example_value():
    adm = ff.admissible_set(2, 4.0, 0.1, 3)
    I = ff.fourier_integrals(g.rectangle(2, 1), adm, ff.QuadratureConfig(1024))
    assert I[adm.index((1, 0))] == pytest.approx(4 / np.pi, rel=1e-14)


@pytest.mark.parametrize("shape,a", [(g.rectangle(2.0, 1.0), 4.0), (g.box(1.0, 0.5, 1.5), 2.0)])
def test_midpoint_route_on_cell_aligned_boxes(shape, a):
    # box faces on cell boundaries: the cell-exact midpoint rule is exact
    adm = ff.admissible_set(shape.dim, a, 0.1, 6 if shape.dim == 2 else 3)
    cells = 1024 if shape.dim == 2 else 128
    mid = ff.fourier_integrals(shape, adm, ff.QuadratureConfig(cells, "midpoint"))
    ref = rect_integral(adm.omega, shape.params)
    np.testing.assert_allclose(mid, ref, rtol=1e-6, atol=1e-12)


def test_midpoint_converges_on_disk():
    adm = ff.admissible_set(2, 4.0, 0.1, 6)
    ref = bessel_disk(1.0, adm.omega)
    errs = [np.abs(ff.fourier_integrals(g.disk(1.0), adm, ff.QuadratureConfig(c, "midpoint")) - ref).max()
            for c in (128, 256, 512, 1024)]
    assert errs[-1] < 2e-3
    rate = np.polyfit(np.log([128, 256, 512, 1024]), np.log(errs), 1)[0]
    assert rate < -1.0


@pytest.mark.parametrize("shape", [g.kite(1.2, 0.9), g.apple(1.4), g.rounded_triangle(1.1)])
def test_boundary_route_against_midpoint(shape):
    adm = ff.admissible_set(2, 8.0, 0.1, 5)
    ex = ff.fourier_integrals(shape, adm, ff.QuadratureConfig(1024))
    mid = ff.fourier_integrals(shape, adm, ff.QuadratureConfig(2048, "midpoint"))
    assert np.abs(ex - mid).max() < 2e-3 * g.measure(shape)
    # the zero-frequency sample is close to the area
    assert abs(ex[adm.zero_index]) <= g.measure(shape) * (1 + 1e-12)


def test_mannequin_closed_form_against_midpoint():
    adm = ff.admissible_set(3, 2.8, 0.1, 3)
    shape = g.mannequin(1.7, 1.0)
    ex = ff.fourier_integrals(shape, adm, ff.QuadratureConfig(128))
    mid = ff.fourier_integrals(shape, adm, ff.QuadratureConfig(256, "midpoint"))
    assert ex[adm.zero_index].real == pytest.approx(g.measure(shape), rel=0.02)
    assert np.abs(ex - mid).max() < 0.02 * g.measure(shape)


def test_ball_factor_series_matches_direct():
    q = np.array([1e-3, 5e-3, 9.9e-3, 1.01e-2, 0.5])
    direct = 3 * (np.sin(q) - q * np.cos(q)) / q**3
    np.testing.assert_allclose(ff._ball_factor(q), direct, rtol=1e-7)


def test_ellipsoid_transform_single_point():
    # one-ellipsoid reference by adaptive cubature of the real part at one frequency
    semi = np.array([0.3, 0.2, 0.25])
    w = np.array([2.0, -1.0, 3.0])
    vol = 4 / 3 * np.pi * semi.prod()
    q = np.linalg.norm(w * semi)
    closed = vol * ff._ball_factor(q)
    f = lambda r, th, ph: np.cos(w @ (semi * [r * np.sin(th) * np.cos(ph), r * np.sin(th) * np.sin(ph),
                                                r * np.cos(th)])) * r**2 * np.sin(th)
    val, _ = integrate.tplquad(lambda ph, th, r: f(r, th, ph), 0, 1, 0, np.pi, 0, 2 * np.pi, epsabs=1e-10)
    assert closed == pytest.approx(val * semi.prod(), rel=1e-7)


def test_zero_sample_modulus_bound():
    adm = ff.admissible_set(2, 6.0, 0.4, 2)
    for shape in (g.kite(1, 1), g.disk(1.3), g.rectangle(1, 2)):
        I0 = ff.fourier_integrals(shape, adm, ff.QuadratureConfig(256))[adm.zero_index]
        assert abs(I0) <= g.measure(shape) * (1 + 1e-12)


@pytest.mark.parametrize("method", ["exact", "midpoint"])
def test_conjugate_symmetry(method):
    adm = ff.admissible_set(2, 8.0, 0.1, 6)
    I = ff.fourier_integrals(g.kite(1.3, 0.7), adm, ff.QuadratureConfig(256, method))
    nz = np.any(adm.xi != 0, axis=1)
    flip = np.array([adm.index(-x) for x in adm.xi])
    np.testing.assert_allclose(I[flip][nz], np.conj(I[nz]), atol=1e-12 * np.abs(I).max())


def test_generator_value_relation_for_negated_xi():
    adm = ff.admissible_set(3, 3.0, 0.1, 2)
    gen = ff.farfield(g.box(1.0, 1.5, 0.7), adm)
    for xi in ((1, 0, 0), (1, -2, 1)):
        c = ff.c_const(3, adm.k[adm.index(xi)])
        assert gen.value(tuple(-v for v in xi)) == pytest.approx(c / np.conj(c) * np.conj(gen.value(xi)), rel=1e-12)


def test_translation_gives_phase():
    adm = ff.admissible_set(2, 10.0, 0.1, 4)
    a = ff.fourier_integrals(g.disk(1.0), adm, ff.QuadratureConfig(512))
    b = ff.fourier_integrals(g.disk(1.0, (0.7, -1.1)), adm, ff.QuadratureConfig(512))
    np.testing.assert_allclose(b, a * np.exp(-1j * adm.omega @ [0.7, -1.1]), atol=1e-12)


def test_support_and_resolution_errors():
    adm = ff.admissible_set(2, 2.0, 0.1, 2)
    with pytest.raises(SupportError):
        ff.farfield(g.disk(1.0), adm)
    with pytest.raises(ConfigError):
        ff.QuadratureConfig(8)
    with pytest.raises(ConfigError):
        ff.farfield(g.box(1, 1, 1), adm)


def test_injectivity_on_sample_kites():
    adm = ff.admissible_set(2, 10.0, 0.1, 20)
    ks = np.linspace(0.5, 1.8, 14)[::3]
    gens = [ff.farfield(g.kite(b1, b2), adm).values for b1 in ks for b2 in ks]
    gens = np.array(gens)
    dist = np.linalg.norm(gens[:, None] - gens[None], axis=2)
    off = dist[~np.eye(len(gens), dtype=bool)]
    # quadrature error of the boundary rule is ~1e-12 of the norm
    assert off.min() > 1e3 * 1e-12 * np.linalg.norm(gens, axis=1).max()


# --- noise -----------------------------------------------------------------------

def _gen():
    adm = ff.admissible_set(2, 6.0, 0.1, 5)
    return ff.farfield(g.kite(1, 1), adm)


def test_noise_zero_is_identity():
    gen = _gen()
    assert ff.add_noise(gen, 0.0, 5) == gen


@given(st.floats(1e-4, 0.5), st.integers(0, 2**31))
@settings(max_examples=25)
def test_noise_level_is_exact(delta, seed):
    gen = _gen()
    out = ff.add_noise(gen, delta, seed)
    assert np.linalg.norm(out.values - gen.values) / np.linalg.norm(gen.values) == pytest.approx(delta, rel=1e-12)


def test_noise_is_seeded():
    gen = _gen()
    assert ff.add_noise(gen, 0.01, 7) == ff.add_noise(gen, 0.01, 7)
    assert ff.add_noise(gen, 0.01, 7) != ff.add_noise(gen, 0.01, 8)
    with pytest.raises(ConfigError):
        ff.add_noise(gen, -0.1, 0)


# --- serialisation -----------------------------------------------------------------

def test_generator_json_and_csv(tmp_path):
    gen = _gen()
    back = ff.ShapeGenerator.from_json(gen.to_json())
    assert back == gen
    path = tmp_path / "gen.csv"
    gen.write_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["xi1", "xi2", "k", "re", "im"]
    assert len(rows) == 1 + len(gen.adm)
    z = rows[1 + gen.adm.zero_index]
    assert z[:2] == ["0", "0"] and float(z[2]) == pytest.approx(2 * math.pi * 0.1 / 6.0)
    assert complex(float(z[3]), float(z[4])) == gen.value((0, 0))
    assert cmath.isfinite(gen.value((5, -5)))
