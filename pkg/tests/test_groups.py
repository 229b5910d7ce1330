import numpy as np
from scipy import stats as sps

from sectint.fields import ScalarField
from sectint.matrices import eye, inner, mat, to_real_vector
from sectint.groups import (
    Family,
    GroupSpec,
    adjoint,
    algebra_basis,
    det_residual,
    exp_map,
    haar_sample,
    haar_sample_batch,
    random_algebra_element,
    skewness_residual,
    torus_basis,
    torus_point,
    unitarity_residual,
)

ALL_GROUPS = [GroupSpec(f, n) for f in Family for n in range(2, 7)]


def test_algebra_dimension_table():
    for g in ALL_GROUPS:
        n = g.n
        expect = {
            Family.SO: n * (n - 1) // 2,
            Family.SU: n * n - 1,
            Family.SP: n * (2 * n + 1),
        }[g.family]
        assert g.algebra_dim == expect
        assert len(algebra_basis(g)) == expect


def test_small_dims_match_spot_values():
    assert GroupSpec(Family.SO, 3).algebra_dim == 3
    assert GroupSpec(Family.SU, 2).algebra_dim == 3
    assert GroupSpec(Family.SP, 2).algebra_dim == 10


def test_basis_orthonormal_and_skew():
    for g in [GroupSpec(Family.SO, 4), GroupSpec(Family.SU, 3), GroupSpec(Family.SP, 2)]:
        basis = algebra_basis(g)
        rows = np.stack([to_real_vector(b) for b in basis])
        np.testing.assert_allclose(rows @ rows.T, np.eye(len(basis)), atol=1e-12)
        for b in basis:
            assert skewness_residual(b) < 1e-14
            assert abs(inner(b, b) - 1.0) < 1e-14
            if g.family is Family.SU:
                assert abs(np.trace(b.data)) < 1e-14


def test_bracket_closure_sp2():
    g = GroupSpec(Family.SP, 2)
    basis = algebra_basis(g)
    rows = np.stack([to_real_vector(b) for b in basis])
    worst = 0.0
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            br = basis[i] @ basis[j] - basis[j] @ basis[i]
            v = to_real_vector(br)
            worst = max(worst, np.linalg.norm(v - rows.T @ (rows @ v)))
    assert worst < 1e-10


def test_exp_zero_and_inverse():
    rng = np.random.default_rng(0)
    for g in [GroupSpec(Family.SO, 3), GroupSpec(Family.SU, 3), GroupSpec(Family.SP, 2)]:
        e = exp_map(g, 0.0 * random_algebra_element(g, rng))
        assert (e.matrix - eye(g.field, g.n)).norm() < 1e-14
        x = random_algebra_element(g, rng)
        a, b = exp_map(g, x), exp_map(g, -1.0 * x)
        assert ((a.matrix @ b.matrix) - eye(g.field, g.n)).norm() < 1e-10
        assert unitarity_residual(a) < 1e-12
        assert det_residual(a) < 1e-12


def test_exp_rotation_closed_form():
    g = GroupSpec(Family.SO, 3)
    gen = np.zeros((3, 3))
    gen[0, 1], gen[1, 0] = -1.0, 1.0
    theta = np.pi / 3
    e = exp_map(g, mat(ScalarField.REAL, theta * gen)).matrix.data
    expect = np.eye(3)
    expect[:2, :2] = [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    np.testing.assert_allclose(e, expect, atol=1e-13)


def test_exp_matches_finite_differences():
    rng = np.random.default_rng(4)
    eps = 1e-5
    for g in [GroupSpec(Family.SO, 3), GroupSpec(Family.SU, 2), GroupSpec(Family.SP, 2)]:
        for x in algebra_basis(g)[:3]:
            plus = exp_map(g, eps * x).matrix
            minus = exp_map(g, -eps * x).matrix
            diff = (1.0 / (2 * eps)) * (plus - minus)
            assert (diff - x).norm() < 1e-6


def test_haar_sample_in_group():
    rng = np.random.default_rng(1)
    for g in ALL_GROUPS:
        h = haar_sample(g, rng)
        assert unitarity_residual(h) < 1e-10
        assert det_residual(h) < 1e-10


def test_haar_entry_mean_vanishes():
    # Haar symmetry makes every matrix entry mean-zero
    g = GroupSpec(Family.SO, 4)
    rng = np.random.default_rng(8)
    batch = haar_sample_batch(g, rng, 100_000)
    m = batch[:, 0, 0].mean()
    assert abs(m) < 4.0 / np.sqrt(batch.shape[0])


def test_haar_left_invariance_ks():
    # marginals of h.g match marginals of g at the 1 percent level
    g = GroupSpec(Family.SO, 4)
    rng = np.random.default_rng(9)
    a = haar_sample_batch(g, rng, 100_000)
    b = haar_sample_batch(g, rng, 100_000)
    h = haar_sample(g, np.random.default_rng(123)).matrix.data
    hb = np.einsum("ij,mjk->mik", h, b)
    stat = sps.ks_2samp(a[:, 0, 0], hb[:, 0, 0])
    assert stat.pvalue > 0.01


def test_su2_trace_matches_weight_density():
    # the angle distribution of Haar SU(2) follows the weight function
    # computed by the weights module
    from sectint.actions import ConjugationAction
    from sectint.weights import delta_e_generic

    group = GroupSpec(Family.SU, 2)
    action = ConjugationAction(group)
    rng = np.random.default_rng(10)
    batch = haar_sample_batch(group, rng, 100_000)
    theta = np.arccos(np.clip(np.einsum("mii->m", batch).real / 2.0, -1, 1))
    bins = 40
    edges = np.linspace(0, np.pi, bins + 1)
    masses = np.empty(bins)
    for i in range(bins):
        grid = np.linspace(edges[i], edges[i + 1], 64, endpoint=False)
        grid += 0.5 * (edges[i + 1] - edges[i]) / 64
        masses[i] = np.mean([delta_e_generic(action, torus_point(group, [t])) for t in grid])
        masses[i] *= edges[i + 1] - edges[i]
    masses /= masses.sum()
    counts, _ = np.histogram(theta, bins=edges)
    chi2 = np.sum((counts - len(theta) * masses) ** 2 / (len(theta) * masses))
    p = sps.chi2.sf(chi2, bins - 1)
    assert p > 0.01


def test_adjoint_isometry_and_closure():
    rng = np.random.default_rng(2)
    for g in [GroupSpec(Family.SO, 4), GroupSpec(Family.SU, 3), GroupSpec(Family.SP, 2)]:
        x, y = random_algebra_element(g, rng), random_algebra_element(g, rng)
        h = haar_sample(g, rng)
        assert (adjoint(GroupSpecIdentity(g), x) - x).norm() < 1e-14
        assert abs(inner(adjoint(h, x), adjoint(h, y)) - inner(x, y)) < 1e-10
        assert skewness_residual(adjoint(h, x)) < 1e-12


def GroupSpecIdentity(g):
    from sectint.groups import GroupElement

    return GroupElement(g, eye(g.field, g.n))


def test_torus_basis_and_point():
    for g in [GroupSpec(Family.SO, 5), GroupSpec(Family.SU, 3), GroupSpec(Family.SP, 2)]:
        tb = torus_basis(g)
        assert len(tb) == g.rank
        rows = np.stack([to_real_vector(b) for b in tb])
        np.testing.assert_allclose(rows @ rows.T, np.eye(g.rank), atol=1e-13)
    tp = torus_point(GroupSpec(Family.SU, 2), [0.7])
    np.testing.assert_allclose(tp.data, np.diag([np.exp(0.7j), np.exp(-0.7j)]), atol=1e-15)
