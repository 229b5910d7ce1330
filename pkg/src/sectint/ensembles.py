"""Matrix ensembles pushed to the section.

Sampling an invariant density on the ambient space and reducing every
sample to its canonical section representative realizes the section as
an eigenvalue-like manifold: the distribution of any Weyl-invariant
statistic must match the weighted density p(s) * weight(s) on the
section.  This module draws both sides and compares them with a
chi-square test.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .fields import ScalarField
from .matrices import MatK, qr
from .groups import haar_sample, torus_point
from .actions import (
    ActionSpec,
    ConjugationAction,
    DirectSumAction,
    canonical_coordinate,
    reduce_to_section,
    section_coordinate,
    torus_angles,
)
from .integrate import _coords_to_complex_square, _torus_grid, _subseed
from .weights import delta_e_generic
from .mc import chunk_rngs, chunk_sizes

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class EnsembleSpec:
    """Invariant sampling density plus a Weyl-invariant section statistic."""

    action: ActionSpec
    scale: float = 1.0            # gaussian scale of the ambient density
    statistic: str = "coordinate_det"
    stat_index: int = 0

    def to_json(self) -> dict:
        from .actions import action_to_json

        return {
            "action": action_to_json(self.action),
            "scale": self.scale,
            "statistic": self.statistic,
            "stat_index": self.stat_index,
        }


def _stat_from_coordinate(spec: EnsembleSpec, b: MatK) -> float:
    from .matrices import det_modulus

    if spec.statistic == "constant":
        return 1.0
    if spec.statistic == "coordinate_det":
        return det_modulus(b)
    if spec.statistic == "coordinate_norm":
        return b.norm()
    if spec.statistic == "singular_value":
        from .matrices import complex_embedding

        sv = np.linalg.svd(complex_embedding(b), compute_uv=False)
        d = spec.action.field.dim
        sv = sv[:: 2] if d == 4 else sv  # quaternion embedding doubles each value
        return float(sv[spec.stat_index])
    raise ValueError(f"statistic {spec.statistic!r} not defined for direct sums")


def _stats_batch_direct(spec: EnsembleSpec, z: np.ndarray) -> np.ndarray:
    """Statistics of section coordinates given as flat rows (vectorized)."""
    action = spec.action
    k = action.k
    if spec.statistic == "constant":
        return np.ones(z.shape[0])
    if spec.statistic == "coordinate_norm":
        return np.linalg.norm(z, axis=1)
    b = _coords_to_complex_square(action.field, z, k)
    if spec.statistic == "coordinate_det":
        dets = np.abs(np.linalg.det(b))
        return np.sqrt(dets) if action.field is ScalarField.QUATERNION else dets
    if spec.statistic == "singular_value":
        sv = np.linalg.svd(b, compute_uv=False)
        if action.field is ScalarField.QUATERNION:
            sv = sv[:, ::2]
        return sv[:, spec.stat_index]
    raise ValueError(f"statistic {spec.statistic!r} not defined for direct sums")


def _reduce_batch_real(action: DirectSumAction, x: np.ndarray) -> np.ndarray:
    """Canonical coordinates of real samples via Cholesky of x^t x.

    The canonical Weyl representative is the upper triangular QR factor
    with nonnegative diagonal, which coincides with the transposed
    Cholesky factor of x^t x for full-rank samples.
    """
    g = np.einsum("mij,mik->mjk", x, x)
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        rows = []
        for sample in x:
            rows.append(qr(MatK(ScalarField.REAL, sample)).r.data)
        return np.stack(rows)
    return np.transpose(chol, (0, 2, 1))


def sample_ensemble(
    spec: EnsembleSpec,
    seed: int,
    n: int,
    chunks: int = 16,
    workers: int | None = None,
) -> np.ndarray:
    """Statistics of n ambient samples reduced to the section.

    Every sample is reduced to its canonical Weyl representative; the
    statistic is then read off the section coordinate (all supported
    statistics are Weyl invariant, so the representative choice is
    immaterial).
    """
    action = spec.action
    sizes = chunk_sizes(n, chunks)
    rngs = chunk_rngs(seed, chunks)
    out = []
    for rng, size in zip(rngs, sizes):
        if size == 0:
            continue
        if isinstance(action, DirectSumAction):
            if action.field is ScalarField.REAL and action.k >= 2:
                x = rng.standard_normal((size, action.n, action.k)) * spec.scale
                bs = _reduce_batch_real(action, x)
                out.append(_stats_batch_direct(spec, bs.reshape(size, -1)))
            else:
                vals = np.empty(size)
                for i in range(size):
                    from .matrices import gaussian

                    x = spec.scale * gaussian(action.field, action.n, action.k, rng)
                    s, _ = reduce_to_section(action, x)
                    vals[i] = _stat_from_coordinate(spec, section_coordinate(action, s))
                out.append(vals)
        else:
            if spec.statistic != "torus_angle":
                raise ValueError("conjugation ensembles support the torus_angle statistic")
            from .groups import Family, haar_sample_batch

            if action.group.family is Family.SU:
                # eigenvalue angles sorted ascending are exactly the
                # canonical coordinates, so no eigenvectors are needed
                batch = haar_sample_batch(action.group, rng, size)
                ang = np.sort(np.mod(np.angle(np.linalg.eigvals(batch)), TWO_PI), axis=1)
                out.append(ang[:, spec.stat_index])
            else:
                vals = np.empty(size)
                for i in range(size):
                    g = haar_sample(action.group, rng).matrix
                    s, _ = reduce_to_section(action, g)
                    vals[i] = torus_angles(action, s)[spec.stat_index]
                out.append(vals)
    return np.concatenate(out) if out else np.zeros(0)


def _reference_sample(spec: EnsembleSpec, seed: int, n_ref: int) -> tuple[np.ndarray, np.ndarray]:
    """Section-side statistics with importance weights prop. to p * weight."""
    action = spec.action
    if isinstance(action, DirectSumAction):
        from .integrate import section_weight_batch

        rng = np.random.default_rng(np.random.SeedSequence(seed))
        z = rng.standard_normal((n_ref, action.section_dim)) * spec.scale
        # gaussian importance at the density's own scale cancels p(s)/q(s)
        w = section_weight_batch(action, z)
        stats = (
            np.abs(z[:, 0])
            if action.k == 1 and spec.statistic == "coordinate_norm"
            else _stats_batch_direct(spec, z)
        )
        return stats, w / np.sum(w)
    # conjugation: the ambient density is Haar, so the reference is the
    # weight on a fine angle grid, evaluated at canonical representatives
    rank = action.group.rank
    grid = {1: 4096, 2: 96}.get(rank, 24)
    angles = _torus_grid(rank, grid)
    stats = np.empty(angles.shape[0])
    weights = np.empty(angles.shape[0])
    for i, a in enumerate(angles):
        s = torus_point(action.group, a)
        weights[i] = delta_e_generic(action, s)
        stats[i] = canonical_coordinate(action, s)[spec.stat_index]
    return stats, weights / np.sum(weights)


def _rank1_bin_masses(spec: EnsembleSpec, edges: np.ndarray, points_per_bin: int = 200) -> np.ndarray:
    """Exact-per-bin reference masses for a rank-one torus angle statistic.

    The weight is Weyl symmetric under angle reflection, so the mass of
    a canonical-angle bin is twice the midpoint-rule integral of the
    weight over the bin; no histogram quantization enters.
    """
    action = spec.action
    masses = np.empty(len(edges) - 1)
    for i in range(len(edges) - 1):
        theta = np.linspace(edges[i], edges[i + 1], points_per_bin, endpoint=False)
        theta = theta + 0.5 * (edges[i + 1] - edges[i]) / points_per_bin
        vals = [delta_e_generic(action, torus_point(action.group, [t])) for t in theta]
        masses[i] = np.mean(vals) * (edges[i + 1] - edges[i])
    return masses / np.sum(masses)


@dataclass(frozen=True)
class HistogramComparison:
    spec: EnsembleSpec
    edges: np.ndarray
    empirical: np.ndarray   # frequencies, sum 1
    reference: np.ndarray   # frequencies, sum 1
    n_samples: int
    chi2: float
    dof: int
    p_value: float

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "n_samples": self.n_samples,
            "bins": len(self.edges) - 1,
            "chi2": self.chi2,
            "dof": self.dof,
            "p_value": self.p_value,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "empirical", "reference"])
            for i in range(len(self.edges) - 1):
                w.writerow(
                    [
                        repr(float(self.edges[i])),
                        repr(float(self.edges[i + 1])),
                        repr(float(self.empirical[i])),
                        repr(float(self.reference[i])),
                    ]
                )


def _merge_small_bins(obs: np.ndarray, exp: np.ndarray, threshold: float = 5.0):
    """Merge adjacent bins until every expected count reaches the threshold."""
    obs, exp = list(obs), list(exp)
    i = 0
    while i < len(exp):
        if exp[i] < threshold and len(exp) > 1:
            j = i + 1 if i + 1 < len(exp) else i - 1
            exp[j] += exp[i]
            obs[j] += obs[i]
            del exp[i], obs[i]
            i = 0
        else:
            i += 1
    return np.array(obs), np.array(exp)


def compare_densities(
    spec: EnsembleSpec,
    seed: int,
    n: int,
    bins: int = 30,
    n_ref: int | None = None,
    chunks: int = 16,
    workers: int | None = None,
) -> HistogramComparison:
    """Chi-square comparison of reduced-sample statistics vs the weighted
    section density.

    The reference side is made much tighter than the empirical side (a
    large importance sample, or exact bin quadrature for rank-one torus
    angles) so the chi-square statistic is dominated by sampling noise.
    """
    stats = sample_ensemble(spec, _subseed(seed, 0), n, chunks, workers)
    rank1_conj = isinstance(spec.action, ConjugationAction) and spec.action.group.rank == 1
    if rank1_conj:
        edges = np.linspace(0.0, np.pi, bins + 1)
        ref_freq = _rank1_bin_masses(spec, edges)
    else:
        ref_stats, ref_w = _reference_sample(spec, _subseed(seed, 1), n_ref or max(30 * n, 300_000))
        lo = min(stats.min(), ref_stats.min())
        hi = max(stats.max(), ref_stats.max())
        edges = np.linspace(lo, hi + 1e-12 * max(1.0, abs(hi)), bins + 1)
        ref_freq, _ = np.histogram(ref_stats, bins=edges, weights=ref_w)
        ref_freq = ref_freq / np.sum(ref_freq)
    emp_counts, _ = np.histogram(stats, bins=edges)
    emp_freq = emp_counts / np.sum(emp_counts)

    obs, exp = _merge_small_bins(emp_counts.astype(float), n * ref_freq)
    chi2 = float(np.sum((obs - exp) ** 2 / exp))
    dof = max(len(obs) - 1, 1)
    p = float(sps.chi2.sf(chi2, dof))
    return HistogramComparison(spec, edges, emp_freq, ref_freq, n, chi2, dof, p)
