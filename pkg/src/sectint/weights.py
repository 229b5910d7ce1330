"""The weight function of the reduced integration formula.

For a section point s the orbit map sends a group coset to its image
g . s on the orbit.  Its differential at the identity coset splits into
two blocks: the Weyl part, mapping the normalizer directions onto the
tangent of the Weyl orbit inside the section, and the complementary
part, mapping onto the normal space of the section.  The absolute
determinant of the second block is the weight by which section
integrals reproduce ambient integrals; the first block's determinant
scales Weyl orbit volumes.  Both are evaluated generically from Gram
matrices of Killing field images.  For the stacked standard
representations the weight also has the closed form

    2 ** (-d k (n - k) / 2) * |det B| ** (d (n - k))

with B the top k x k section coordinate and |det| the Dieudonne
determinant modulus when the field is quaternionic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField
from .matrices import MatK, abs_det_between, det_modulus, mat, to_real_vector
from .actions import (
    ActionSpec,
    RegularityClass,
    SectionFrame,
    algebra_split,
    classify_point,
    killing_field,
    section_frame,
)

#: below this fraction of the local scale the weight is reported as exactly 0
SINGULAR_CUTOFF = 1e-12


@dataclass(frozen=True)
class OrbitMapDifferential:
    """Differential of the orbit map at a section point, in fixed frames.

    ``matrix`` has one column per algebra basis element (Weyl part
    first, then the complementary part) and one row per codomain frame
    vector (section-tangent frame first, then section-normal frame).
    At regular points the matrix is block diagonal: Weyl columns hit
    only tangent rows, complementary columns only normal rows.
    """

    action: ActionSpec
    s: MatK
    matrix: np.ndarray
    n_w: int   # number of Weyl-part columns
    n_m: int   # number of complementary columns
    n_tan: int  # number of section-tangent rows

    @property
    def w_block(self) -> np.ndarray:
        return self.matrix[: self.n_tan, : self.n_w]

    @property
    def m_block(self) -> np.ndarray:
        return self.matrix[self.n_tan :, self.n_w :]

    def off_block_residual(self) -> float:
        """Largest stray entry outside the two diagonal blocks."""
        top_right = self.matrix[: self.n_tan, self.n_w :]
        bottom_left = self.matrix[self.n_tan :, : self.n_w]
        worst = 0.0
        for blk in (top_right, bottom_left):
            if blk.size:
                worst = max(worst, float(np.abs(blk).max()))
        return worst

    def delta_d(self) -> float:
        """|det| of the Weyl block as a map onto the Weyl-orbit tangent."""
        if self.n_w == 0:
            return 1.0
        blk = self.w_block
        g = blk.T @ blk
        return float(np.sqrt(max(np.linalg.det(g), 0.0)))

    def delta_e(self) -> float:
        """|det| of the complementary block onto the section normal."""
        blk = self.m_block
        if blk.shape[0] != blk.shape[1]:
            return 0.0
        return float(abs(np.linalg.det(blk))) if blk.size else 1.0

    def total_det(self) -> float:
        """|det| of the whole differential onto the orbit tangent."""
        g = self.matrix.T @ self.matrix
        return float(np.sqrt(max(np.linalg.det(g), 0.0)))


def orbit_map_differential(
    action: ActionSpec, s: MatK, frame: SectionFrame | None = None, split=None
) -> OrbitMapDifferential:
    split = split or algebra_split(action)
    frame = frame or section_frame(action, s)
    codomain = np.concatenate([frame.tangent, frame.normal], axis=0)
    cols = []
    for b in split.w_basis + split.m_basis:
        cols.append(codomain @ to_real_vector(killing_field(action, b, s)))
    matrix = np.stack(cols, axis=1) if cols else np.zeros((codomain.shape[0], 0))
    return OrbitMapDifferential(
        action, s, matrix, len(split.w_basis), len(split.m_basis), frame.tangent.shape[0]
    )


def _local_scale(images: np.ndarray) -> float:
    """Hadamard-style bound used to decide when a weight is exactly 0."""
    if images.size == 0:
        return 1.0
    norms = np.linalg.norm(images, axis=1)
    return float(np.prod(np.maximum(norms, 1e-6)))


def delta_e_generic(action: ActionSpec, s: MatK, split=None) -> float:
    """Weight from the Gram determinant of Killing field images.

    The Killing fields of the complementary part are perpendicular to
    the section all along it, so the Gram matrix of their raw images
    equals that of the normal-block of the differential; no frame is
    needed.  Values below the singular cutoff are reported as exactly 0.
    """
    split = split or algebra_split(action)
    if not split.m_basis:
        return 1.0
    images = np.stack([to_real_vector(killing_field(action, b, s)) for b in split.m_basis])
    value = abs_det_between(images, action.normal_dim)
    if value <= SINGULAR_CUTOFF * _local_scale(images):
        return 0.0
    return value


def delta_e_closed_form(field: ScalarField, n: int, k: int, b: MatK | np.ndarray) -> float:
    """Closed-form weight for the stacked standard representations.

    Only the tabulated range 2 <= k <= n-1 is covered; the polar k = 1
    case is served by the generic evaluator instead.
    """
    if not 2 <= k <= n - 1:
        raise ValueError("closed form requires 2 <= k <= n-1")
    if not isinstance(b, MatK):
        b = mat(field, b)
    if b.shape != (k, k) or b.field is not field:
        raise ValueError(f"section coordinate must be a {k} x {k} matrix over {field.value}")
    d = field.dim
    return 2.0 ** (-d * k * (n - k) / 2.0) * det_modulus(b) ** (d * (n - k))


def delta_d(action: ActionSpec, s: MatK) -> float:
    """Weyl-block determinant; 1 for polar actions by the empty-product rule."""
    split = algebra_split(action)
    if not split.w_basis:
        return 1.0
    if classify_point(action, s) is RegularityClass.SINGULAR:
        return 0.0
    return orbit_map_differential(action, s).delta_d()


@dataclass(frozen=True)
class WeightValue:
    delta_e: float
    delta_d: float
    regularity: RegularityClass


def weight_value(action: ActionSpec, s: MatK) -> WeightValue:
    reg = classify_point(action, s)
    de = delta_e_generic(action, s)
    dd = delta_d(action, s)
    return WeightValue(de, dd, reg)


def orbit_volume(action: ActionSpec, s: MatK, vol_gh: float) -> float:
    """Volume of the orbit through a non-singular section point.

    vol(orbit) = vol(G/H) |det d(orbit map)|; the covering index is 1
    because the supported actions have connected stabilizers along the
    regular section.  Singular orbits are fiber bundles rather than
    quotients and are not supported.
    """
    reg = classify_point(action, s)
    if reg is RegularityClass.SINGULAR:
        raise ValueError("orbit volume through a singular point is not supported")
    return vol_gh * orbit_map_differential(action, s).total_det()


def orbit_volume_ratio(action: ActionSpec, s: MatK, vol_gh: float, vol_w: float, vol_ws: float) -> float:
    """Ratio (vol(orbit)/vol(G/H)) / (vol(Weyl orbit)/vol(W)).

    Equals the weight at regular points; returns 0 at singular points
    by the case split of the volume-scaling identity.
    """
    if classify_point(action, s) is RegularityClass.SINGULAR:
        return 0.0
    if min(vol_gh, vol_w, vol_ws) <= 0:
        raise ValueError("volumes must be positive")
    vol_orbit = orbit_volume(action, s, vol_gh)
    return (vol_orbit / vol_gh) / (vol_ws / vol_w)
