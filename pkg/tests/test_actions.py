import json

import numpy as np
import pytest

from sectint.fields import ScalarField
from sectint.matrices import eye, mat, to_real_vector, zeros
from sectint.groups import Family, GroupSpec, haar_sample
from sectint.actions import (
    ConjugationAction,
    DirectSumAction,
    RegularityClass,
    act,
    action_from_json,
    action_to_json,
    algebra_split,
    canonical_coordinate,
    classify_point,
    embed_section,
    isotropy_algebra,
    killing_field,
    normalizer_sample,
    orbit_normal,
    orbit_tangent,
    random_ambient_point,
    random_regular_section_point,
    reduce_to_section,
    section_coordinate,
    section_frame,
    section_residual,
    torus_angles,
)

R, C, H = ScalarField.REAL, ScalarField.COMPLEX, ScalarField.QUATERNION

TABLE_ACTIONS = [
    DirectSumAction(R, 3, 2),
    DirectSumAction(R, 5, 3),
    DirectSumAction(C, 3, 2),
    DirectSumAction(C, 4, 3),
    DirectSumAction(H, 3, 2),
]
POLAR_ACTIONS = [DirectSumAction(R, 4, 1), DirectSumAction(C, 3, 1), DirectSumAction(H, 2, 1)]
CONJ_ACTIONS = [
    ConjugationAction(GroupSpec(Family.SU, 2)),
    ConjugationAction(GroupSpec(Family.SU, 3)),
    ConjugationAction(GroupSpec(Family.SO, 4)),
    ConjugationAction(GroupSpec(Family.SO, 5)),
    ConjugationAction(GroupSpec(Family.SP, 2)),
]


def test_table_dimensions():
    for a in TABLE_ACTIONS:
        d, k = a.field.dim, a.k
        copol = {1: k * (k - 1) // 2, 2: k * k, 4: k * (2 * k + 1)}[d]
        cohom = {1: k * (k + 1) // 2, 2: k * k, 4: k * (2 * k - 1)}[d]
        assert a.copolarity == copol
        assert a.cohomogeneity == cohom
        assert a.section_dim == d * k * k
        split = algebra_split(a)
        assert len(split.w_basis) == copol
        assert len(split.m_basis) == d * k * (a.n - a.k)
        assert len(split.h_basis) == GroupSpec(a.group.family, a.n - a.k).algebra_dim


def test_polar_case_dimensions():
    for a in POLAR_ACTIONS:
        assert a.copolarity == 0 and a.section_dim == 1
        split = algebra_split(a)
        assert not split.w_basis
        assert len(split.m_basis) == a.field.dim * a.n - 1


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        DirectSumAction(R, 3, 3)
    with pytest.raises(ValueError):
        DirectSumAction(R, 3, 0)


def test_json_round_trip():
    for a in TABLE_ACTIONS + POLAR_ACTIONS + CONJ_ACTIONS:
        assert action_from_json(json.loads(json.dumps(action_to_json(a)))) == a
    with pytest.raises(ValueError):
        action_from_json({"kind": "nonsense"})


def test_split_orthonormal_all():
    for a in TABLE_ACTIONS + POLAR_ACTIONS + CONJ_ACTIONS:
        split = algebra_split(a)
        allb = split.h_basis + split.w_basis + split.m_basis
        rows = np.stack([to_real_vector(b) for b in allb])
        np.testing.assert_allclose(rows @ rows.T, np.eye(len(allb)), atol=1e-10)
        assert len(allb) == a.group.algebra_dim


def test_stabilizer_killing_fields_vanish_on_section():
    rng = np.random.default_rng(0)
    for a in TABLE_ACTIONS:
        split = algebra_split(a)
        s = random_regular_section_point(a, rng)
        for b in split.h_basis:
            assert killing_field(a, b, s).norm() < 1e-12


def test_killing_block_image():
    # the perpendicular-part generator with a single elementary slot maps
    # a section point with coordinate B to (0; E B / sqrt(2))
    a = DirectSumAction(R, 3, 2)
    split = algebra_split(a)
    b = mat(R, [[1.0, 2.0], [3.0, 4.0]])
    s = embed_section(a, b)
    # m_basis is ordered by (row, column); element 0 hits ambient row 2, col 0
    img = killing_field(a, split.m_basis[0], s)
    expect = np.zeros((3, 2))
    expect[2] = b.data[0] / np.sqrt(2.0)
    np.testing.assert_allclose(img.data, expect, atol=1e-14)


def test_conjugation_killing_vanishes_at_identity():
    a = ConjugationAction(GroupSpec(Family.SU, 2))
    for b in algebra_split(a).m_basis + algebra_split(a).h_basis:
        assert killing_field(a, b, eye(C, 2)).norm() < 1e-15


def test_orbit_tangent_dimensions():
    a = DirectSumAction(R, 3, 2)
    s = embed_section(a, np.eye(2))
    assert orbit_tangent(a, s).shape[0] == 3
    assert orbit_tangent(a, zeros(R, 3, 2)).shape[0] == 0
    c = ConjugationAction(GroupSpec(Family.SU, 2))
    rng = np.random.default_rng(1)
    s = random_regular_section_point(c, rng)
    assert orbit_tangent(c, s).shape[0] == 2


def test_orbit_normal_inside_section_tangent():
    # orbit normal spaces at regular section points sit inside the section
    # tangent with codimension equal to the copolarity
    rng = np.random.default_rng(2)
    for a in TABLE_ACTIONS + CONJ_ACTIONS[:2]:
        for _ in range(5):
            s = random_regular_section_point(a, rng)
            frame = section_frame(a, s)
            normal = orbit_normal(a, s)
            proj = normal @ frame.tangent.T
            lost = np.abs(np.linalg.norm(normal, axis=1) ** 2 - np.linalg.norm(proj, axis=1) ** 2)
            assert lost.max() < 1e-10
            assert frame.tangent.shape[0] - normal.shape[0] == a.copolarity


def test_classification():
    a = DirectSumAction(R, 3, 2)
    assert classify_point(a, embed_section(a, np.eye(2))) is RegularityClass.REGULAR
    assert classify_point(a, zeros(R, 3, 2)) is RegularityClass.SINGULAR
    assert classify_point(a, embed_section(a, [[1.0, 0.0], [0.0, 0.0]])) is RegularityClass.SINGULAR
    c = ConjugationAction(GroupSpec(Family.SU, 2))
    assert classify_point(c, eye(C, 2)) is RegularityClass.SINGULAR
    from sectint.groups import torus_point

    assert classify_point(c, torus_point(c.group, [1.0])) is RegularityClass.REGULAR


def test_isotropy_constancy_along_regular_section():
    rng = np.random.default_rng(3)
    for a in TABLE_ACTIONS[:3]:
        split = algebra_split(a)
        h_rows = split.h_rows
        for _ in range(5):
            s = random_regular_section_point(a, rng)
            iso = isotropy_algebra(a, s)
            assert len(iso) == len(split.h_basis)
            if iso:
                rows = np.stack([to_real_vector(b) for b in iso])
                resid = rows - (rows @ h_rows.T) @ h_rows
                assert np.abs(resid).max() < 1e-8


def test_reduce_to_section_properties():
    rng = np.random.default_rng(4)
    for a in TABLE_ACTIONS + POLAR_ACTIONS + CONJ_ACTIONS:
        for _ in range(5):
            x = random_ambient_point(a, rng)
            s, g = reduce_to_section(a, x)
            assert (act(a, g, x) - s).norm() < 1e-8 * max(1.0, x.norm())
            assert section_residual(a, s) < 1e-8


def test_reduce_rank_deficient():
    a = DirectSumAction(R, 5, 2)
    x = zeros(R, 5, 2)
    x.data[:, 0] = [1.0, 2.0, 0.0, 1.0, -1.0]
    x.data[:, 1] = 2.0 * x.data[:, 0]
    s, g = reduce_to_section(a, x)
    assert (act(a, g, x) - s).norm() < 1e-10
    assert np.abs(s.data[2:]).max() < 1e-12
    assert classify_point(a, s) is RegularityClass.SINGULAR


def test_reduction_lands_in_same_weyl_orbit():
    rng = np.random.default_rng(5)
    for a in TABLE_ACTIONS + CONJ_ACTIONS[:3]:
        for _ in range(5):
            x = random_ambient_point(a, rng)
            h = haar_sample(a.group, rng)
            c1 = canonical_coordinate(a, reduce_to_section(a, x)[0])
            c2 = canonical_coordinate(a, reduce_to_section(a, act(a, h, x))[0])
            if isinstance(a, DirectSumAction):
                assert (c1 - c2).norm() < 1e-8 * max(1.0, c1.norm())
            else:
                assert np.abs(c1 - c2).max() < 1e-7


def test_normalizer_maps_section_to_section():
    rng = np.random.default_rng(6)
    for a in TABLE_ACTIONS + POLAR_ACTIONS + CONJ_ACTIONS:
        s = random_regular_section_point(a, rng)
        for _ in range(5):
            w = normalizer_sample(a, rng)
            m = w.matrix
            assert ((m.h @ m) - eye(a.field, m.rows)).norm() < 1e-10
            if a.group.family is not Family.SP:
                assert abs(np.linalg.det(np.asarray(m.data)) - 1.0) < 1e-10
            assert section_residual(a, act(a, w, s)) < 1e-8


def test_reduce_conjugation_singular_points():
    # eigenvalue +-1 clusters exercise the block-pairing paths
    from sectint.groups import torus_point

    so4 = ConjugationAction(GroupSpec(Family.SO, 4))
    for angles in ([np.pi, np.pi], [0.0, np.pi], [0.0, 0.0]):
        p = torus_point(so4.group, np.array(angles))
        s, g = reduce_to_section(so4, p)
        assert (act(so4, g, p) - s).norm() < 1e-10
    so5 = ConjugationAction(GroupSpec(Family.SO, 5))
    p = torus_point(so5.group, np.array([np.pi, 0.0]))
    s, g = reduce_to_section(so5, p)
    assert (act(so5, g, p) - s).norm() < 1e-10
    su3 = ConjugationAction(GroupSpec(Family.SU, 3))
    p = eye(ScalarField.COMPLEX, 3)
    s, g = reduce_to_section(su3, p)
    assert (act(su3, g, p) - s).norm() < 1e-10


def test_reduce_abelian_conjugation_is_identity():
    # SO(2) is abelian: conjugation moves nothing, so the canonical
    # representative must be the point itself even for negative angles
    from sectint.groups import torus_point

    so2 = ConjugationAction(GroupSpec(Family.SO, 2))
    for th in (-0.5, 0.5, 3.0, np.pi):
        p = torus_point(so2.group, [th])
        s, g = reduce_to_section(so2, p)
        assert (act(so2, g, p) - s).norm() < 1e-12
        assert (s - p).norm() < 1e-12


def test_reduce_sp1_conjugation():
    sp1 = ConjugationAction(GroupSpec(Family.SP, 1))
    rng = np.random.default_rng(14)
    for _ in range(20):
        x = random_ambient_point(sp1, rng)
        s, g = reduce_to_section(sp1, x)
        assert (act(sp1, g, x) - s).norm() < 1e-12


def test_perpendicular_killing_fields_on_all_of_section():
    # complement Killing fields are perpendicular to the section at every
    # section point, regular or not
    rng = np.random.default_rng(12)
    from sectint.actions import random_section_point

    for a in [DirectSumAction(ScalarField.REAL, 3, 2), DirectSumAction(ScalarField.QUATERNION, 3, 2)]:
        split = algebra_split(a)
        for _ in range(50):
            s = random_section_point(a, rng)
            frame = section_frame(a, s)
            for b in split.m_basis:
                img = to_real_vector(killing_field(a, b, s))
                assert np.abs(frame.tangent @ img).max() < 1e-10 * max(1.0, np.linalg.norm(img))


def test_property_c_fifty_points():
    rng = np.random.default_rng(13)
    a = DirectSumAction(ScalarField.REAL, 3, 2)
    for _ in range(50):
        s = random_regular_section_point(a, rng)
        frame = section_frame(a, s)
        normal = orbit_normal(a, s)
        proj = normal @ frame.tangent.T
        lost = np.abs(np.linalg.norm(normal, axis=1) ** 2 - np.linalg.norm(proj, axis=1) ** 2)
        assert lost.max() < 1e-10
        assert frame.tangent.shape[0] - normal.shape[0] == a.copolarity


def test_torus_angles_strictness():
    c = ConjugationAction(GroupSpec(Family.SU, 2))
    rng = np.random.default_rng(7)
    g = haar_sample(c.group, rng).matrix
    with pytest.raises(ValueError):
        torus_angles(c, g)


def test_section_coordinate_round_trip():
    a = DirectSumAction(H, 3, 2)
    rng = np.random.default_rng(8)
    s = random_regular_section_point(a, rng)
    b = section_coordinate(a, s)
    np.testing.assert_allclose(embed_section(a, b).data, s.data, atol=1e-15)
