import numpy as np
import pytest

from sectint.fields import ScalarField
from sectint.groups import Family, GroupSpec
from sectint.actions import (
    ConjugationAction,
    DirectSumAction,
    act,
    normalizer_sample,
    random_ambient_point,
    random_regular_section_point,
    reduce_to_section,
    section_coordinate,
)
from sectint.ensembles import (
    EnsembleSpec,
    _reference_sample,
    compare_densities,
    sample_ensemble,
)

R, H = ScalarField.REAL, ScalarField.QUATERNION
SO3K2 = DirectSumAction(R, 3, 2)
SU2CONJ = ConjugationAction(GroupSpec(Family.SU, 2))


def test_empty_stream():
    assert sample_ensemble(EnsembleSpec(SO3K2), seed=0, n=0).size == 0


def test_reduction_preserves_norm():
    # the section representative of each sample keeps the ambient norm
    rng = np.random.default_rng(0)
    for action in [SO3K2, DirectSumAction(H, 3, 2)]:
        for _ in range(50):
            x = random_ambient_point(action, rng)
            s, _ = reduce_to_section(action, x)
            assert abs(s.norm() - x.norm()) <= 1e-10 * max(1.0, x.norm())


def test_norm_statistic_equals_ambient_norm():
    spec = EnsembleSpec(SO3K2, 1.0, "coordinate_norm")
    stats = sample_ensemble(spec, seed=5, n=2000)
    # redo the sampling stream to recover the ambient samples
    from sectint.mc import chunk_rngs, chunk_sizes

    rngs, sizes = chunk_rngs(5, 16), chunk_sizes(2000, 16)
    norms = []
    for rng, size in zip(rngs, sizes):
        x = rng.standard_normal((size, 3, 2))
        norms.append(np.linalg.norm(x.reshape(size, -1), axis=1))
    norms = np.concatenate(norms)
    np.testing.assert_allclose(stats, norms, atol=1e-10)


def test_statistics_weyl_invariant():
    rng = np.random.default_rng(1)
    for action, stat in [(SO3K2, "coordinate_det"), (SO3K2, "coordinate_norm")]:
        spec = EnsembleSpec(action, 1.0, stat)
        from sectint.ensembles import _stat_from_coordinate

        s = random_regular_section_point(action, rng)
        base = _stat_from_coordinate(spec, section_coordinate(action, s))
        for _ in range(10):
            w = normalizer_sample(action, rng)
            moved = _stat_from_coordinate(spec, section_coordinate(action, act(action, w, s)))
            assert abs(moved - base) <= 1e-10 * (1.0 + abs(base))


def test_det_second_moment_two_sided():
    spec = EnsembleSpec(SO3K2, 1.0, "coordinate_det")
    stats = sample_ensemble(spec, seed=3, n=50_000)
    m_mean = np.mean(stats ** 2)
    m_se = np.std(stats ** 2, ddof=1) / np.sqrt(stats.size)
    rs, rw = _reference_sample(spec, 4, 2_000_000)
    s_mean = np.sum(rw * rs ** 2)
    assert abs(m_mean - s_mean) <= 4 * m_se


def test_reference_weights_normalized():
    for spec in [EnsembleSpec(SO3K2, 1.0, "coordinate_det"), EnsembleSpec(SU2CONJ, 1.0, "torus_angle")]:
        _, w = _reference_sample(spec, 0, 10_000)
        assert abs(w.sum() - 1.0) < 1e-12


def test_chi2_direct_sum_det():
    cmp_ = compare_densities(EnsembleSpec(SO3K2, 1.0, "coordinate_det"), seed=22, n=50_000, bins=30)
    assert abs(cmp_.empirical.sum() - 1.0) < 1e-12
    assert abs(cmp_.reference.sum() - 1.0) < 1e-12
    assert cmp_.p_value >= 0.01


def test_chi2_su2_angle():
    cmp_ = compare_densities(EnsembleSpec(SU2CONJ, 1.0, "torus_angle"), seed=22, n=50_000, bins=30)
    assert cmp_.p_value >= 0.01


def test_constant_statistic_gives_p_one():
    cmp_ = compare_densities(EnsembleSpec(SO3K2, 1.0, "constant"), seed=1, n=2000, bins=10)
    assert cmp_.p_value == pytest.approx(1.0)


def test_histograms_seed_reproducible():
    a = compare_densities(EnsembleSpec(SO3K2, 1.0, "coordinate_det"), seed=9, n=5000, bins=12)
    b = compare_densities(EnsembleSpec(SO3K2, 1.0, "coordinate_det"), seed=9, n=5000, bins=12)
    np.testing.assert_array_equal(a.empirical, b.empirical)
    np.testing.assert_array_equal(a.reference, b.reference)
    assert a.chi2 == b.chi2


def test_csv_output(tmp_path):
    cmp_ = compare_densities(EnsembleSpec(SO3K2, 1.0, "coordinate_det"), seed=2, n=4000, bins=8)
    path = tmp_path / "hist.csv"
    cmp_.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "bin_lo,bin_hi,empirical,reference"
    assert len(lines) == 9
    row = lines[1].split(",")
    assert len(row) == 4
    float(row[0]), float(row[3])


def test_singular_value_statistic():
    spec = EnsembleSpec(DirectSumAction(H, 3, 2), 1.0, "singular_value", stat_index=0)
    stats = sample_ensemble(spec, seed=7, n=200)
    assert np.all(stats > 0)
    # largest quaternionic singular value bounded by the ambient norm
    assert np.all(stats <= 10.0)
