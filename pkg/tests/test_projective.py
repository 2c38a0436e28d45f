"""Sphere-point arithmetic: normalization, the chordal metric, clustering."""

import math

import numpy as np
import pytest

from kmsdyn.projective import (
    SpherePoint,
    chordal_distance,
    cluster,
    merge_weighted,
    sphere_point_from_json,
)


def test_from_affine_examples():
    p = SpherePoint.from_affine(0)
    assert p.z == 0 and p.w == 1
    q = SpherePoint.infinity()
    assert q.z == 1 and q.w == 0
    r = SpherePoint.from_affine(3 + 4j)
    assert max(abs(r.z), abs(r.w)) == 1.0
    assert abs(r.to_affine() - (3 + 4j)) < 1e-15


def test_zero_pair_rejected():
    with pytest.raises(ValueError):
        SpherePoint(0.0, 0.0)


def test_normalization_idempotent_bitwise():
    rng = np.random.default_rng(7)
    for _ in range(200):
        z = complex(rng.normal(), rng.normal())
        w = complex(rng.normal(), rng.normal())
        if z == 0 and w == 0:
            continue
        p = SpherePoint(z, w)
        q = SpherePoint(p.z, p.w)
        assert q.z == p.z and q.w == p.w


def test_chordal_examples():
    assert chordal_distance(SpherePoint.zero(), SpherePoint.infinity()) == 2.0
    p = SpherePoint.from_affine(0.3 - 0.7j)
    assert chordal_distance(p, p) == 0.0
    # direct evaluation: 2|0*1 - 1*1| / (1 * sqrt(2))
    d = chordal_distance(SpherePoint.zero(), SpherePoint.from_affine(1))
    assert d == pytest.approx(math.sqrt(2), abs=1e-15)


def test_chordal_metric_properties_random_triples():
    rng = np.random.default_rng(42)
    pts = [SpherePoint(complex(a, b), complex(c, d))
           for a, b, c, d in rng.normal(size=(60, 4))]
    for k in range(0, 60, 3):
        p, q, r = pts[k], pts[k + 1], pts[k + 2]
        assert chordal_distance(p, q) >= 0
        assert chordal_distance(p, q) == pytest.approx(chordal_distance(q, p), rel=1e-14)
        assert chordal_distance(p, q) <= 2.0 + 1e-15
        assert chordal_distance(p, r) <= chordal_distance(p, q) + chordal_distance(q, r) + 1e-12


def test_scale_invariance():
    rng = np.random.default_rng(3)
    for _ in range(100):
        z = complex(rng.normal(), rng.normal())
        w = complex(rng.normal(), rng.normal())
        lam = 10.0 ** rng.uniform(-6, 6) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        d = chordal_distance(SpherePoint(z, w), SpherePoint(lam * z, lam * w))
        assert d < 1e-12


def test_cluster_near_duplicates():
    pts = [SpherePoint.from_affine(1), SpherePoint.from_affine(1 + 1e-14),
           SpherePoint.from_affine(-1)]
    out = cluster(pts, 1e-9)
    assert [(p.to_affine(), m) for p, m in out] == [(1 + 0j, 2), (-1 + 0j, 1)]


def test_cluster_empty():
    assert cluster([], 1e-9) == []


def test_cluster_circle_points_stay_distinct():
    pts = [SpherePoint.from_affine(np.exp(2j * np.pi * k / 8)) for k in range(8)]
    out = cluster(pts, 1e-9)
    assert len(out) == 8
    assert all(m == 1 for _p, m in out)


def test_cluster_multiplicities_sum():
    rng = np.random.default_rng(11)
    pts = [SpherePoint.from_affine(complex(a, b)) for a, b in rng.normal(size=(40, 2))]
    pts += pts[:13]  # force duplicates
    out = cluster(pts, 1e-9)
    assert sum(m for _p, m in out) == len(pts)
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            assert chordal_distance(out[i][0], out[j][0]) > 1e-9


def test_merge_weighted_sums_weights():
    pairs = [(SpherePoint.from_affine(2), 0.25),
             (SpherePoint.from_affine(2 + 1e-12), 0.5),
             (SpherePoint.infinity(), 1.0)]
    out = merge_weighted(pairs, 1e-9)
    out.sort(key=lambda pw: pw[0].sort_key())
    assert len(out) == 2
    assert out[0][1] == pytest.approx(0.75)
    assert out[1][0].is_infinity() and out[1][1] == 1.0


def test_json_round_trip():
    for p in (SpherePoint.from_affine(1.5 - 2.25j), SpherePoint.infinity(), SpherePoint.zero()):
        q = sphere_point_from_json(p.to_jsonable())
        assert chordal_distance(p, q) < 1e-15


def test_reciprocal_conjugation():
    assert SpherePoint.zero().reciprocal().is_infinity()
    assert SpherePoint.infinity().reciprocal().to_affine() == 0
    p = SpherePoint.from_affine(2 - 1j)
    assert p.reciprocal().to_affine() == pytest.approx(1 / (2 - 1j))


def test_embedding_unit_norm():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = SpherePoint(complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal()))
        x = np.array(p.embedding())
        assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-12)
    assert SpherePoint.infinity().embedding() == (0.0, 0.0, 1.0)
    assert SpherePoint.zero().embedding() == (0.0, 0.0, -1.0)
