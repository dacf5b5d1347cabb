import math

import numpy as np
import pytest

import manidel


def test_equilateral_triangle_thickness_and_circumball():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    # altitude / (dim * longest edge) for the equilateral triangle
    assert manidel.thickness(tri) == pytest.approx(math.sqrt(3) / 4, rel=1e-12)
    centre, radius = manidel.circumball(tri)
    assert radius == pytest.approx(1 / math.sqrt(3), rel=1e-12)
    assert np.allclose(centre, [0.5, math.sqrt(3) / 6])
    assert manidel.is_gamma_good(tri, 0.4)
    assert not manidel.is_gamma_good(tri, 0.7)


def test_collinear_triangle_is_not_good():
    flat = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert manidel.thickness(flat) == 0.0
    assert not manidel.is_gamma_good(flat, 0.01)


def test_square_with_centre_is_flake():
    quad = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1e-4]])
    assert manidel.is_flake(quad, 0.1)


def test_gram_of_unit_triangle():
    l = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    pd, lam = manidel.gram_min_eigenvalue(l)
    assert pd
    assert lam == pytest.approx(0.5, rel=1e-12)
    bad = np.array([[0.0, 1.0, 3.0], [1.0, 0.0, 1.0], [3.0, 1.0, 0.0]])
    assert not manidel.gram_min_eigenvalue(bad)[0]


def test_params():
    p = manidel.practical_params(2, 0.5)
    assert p.gamma0 == 0.01
    assert p.delta0 == pytest.approx(1e-6)
    assert not p.certified
    d = manidel.derive_params(2, 0.5, 0.01)
    assert d.C == pytest.approx(2 ** 1.5 * 4.0 ** 47, rel=1e-9)
    assert d.to_dict()["m"] == 2
    with pytest.raises(manidel.ManidelError):
        manidel.derive_params(2, 0.5, -1.0)


def test_planted_cocircular_configuration_is_found():
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    scan = manidel.forbidden_scan(pts, eps_prime=1.0, delta=1e-3, gamma0=0.1)
    assert len(scan) == 1
    assert scan[0]["simplex"] == [0, 1, 2, 3]
    assert scan[0]["witness_distance"] < 1e-12


def test_small_torus_end_to_end():
    atlas = manidel.Atlas.flat_torus(200, 0.5, 3)
    assert atlas.n == 200 and atlas.m == 2
    params = manidel.practical_params(2, 0.5)
    report = manidel.run(atlas, params)
    assert report["scan_empty"]
    cert = manidel.certify(atlas, params)
    assert cert["star_consistency"]["ok"]
    assert cert["manifold"]["ok"]
    assert cert["euler_characteristic"] == 0
    assert cert["torus_oracle"]["empty"]
    again = manidel.Atlas.from_json(atlas.to_json())
    assert again.n == atlas.n
    assert np.allclose(again.position(5), atlas.position(5))


def test_lemma_check():
    rep = manidel.lemma_check(2, trials=200, xi0=1e-6, seed=4)
    assert rep["total_violations"] == 0
