"""Isometric group actions with an explicit minimal section.

Two families are implemented:

* ``DirectSumAction(field, n, k)``: SO(n), SU(n) or Sp(n) acting by
  left multiplication on K^(n x k) (k stacked copies of the standard
  representation).  For 2 <= k <= n-1 the minimal section is the set
  of matrices whose bottom (n-k) x k block vanishes, parameterized by
  the top k x k coordinate B, and the generalized Weyl group O(k),
  U(k) or Sp(k) acts on B from the left.  k = 1 is the polar case with
  the real line through the first basis vector as section.

* ``ConjugationAction(group)``: the group acting on itself by
  conjugation; the section is the standard maximal torus and the Weyl
  group is the classical (finite) one.

Everything downstream is phrased in flat real coordinates, where the
ambient inner product Re(tr(x^* y)) is the Euclidean dot product.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .fields import ScalarField
from .matrices import (
    COMPLEX,
    QUATERNION,
    REAL,
    DimensionError,
    MatK,
    complex_embedding,
    eye,
    from_real_vector,
    gaussian,
    mat,
    qr,
    to_real_vector,
    zeros,
)
from .groups import (
    Family,
    GroupElement,
    GroupSpec,
    algebra_basis,
    haar_sample,
    torus_basis,
    torus_point,
)

SQ2 = np.sqrt(2.0)

_FIELD_TO_FAMILY = {REAL: Family.SO, COMPLEX: Family.SU, QUATERNION: Family.SP}


class RegularityClass(enum.Enum):
    REGULAR = "regular"
    EXCEPTIONAL = "exceptional"
    SINGULAR = "singular"


@dataclass(frozen=True)
class DirectSumAction:
    field: ScalarField
    n: int
    k: int

    def __post_init__(self):
        if self.n < 2 or not (1 <= self.k <= self.n - 1):
            raise ValueError("direct-sum action needs n >= 2 and 1 <= k <= n-1")

    @property
    def group(self) -> GroupSpec:
        return GroupSpec(_FIELD_TO_FAMILY[self.field], self.n)

    @property
    def ambient_dim(self) -> int:
        return self.field.dim * self.n * self.k

    @property
    def section_dim(self) -> int:
        # the k = 1 case is polar with a one-dimensional section
        return 1 if self.k == 1 else self.field.dim * self.k * self.k

    @property
    def copolarity(self) -> int:
        if self.k == 1:
            return 0
        d, k = self.field.dim, self.k
        return {1: k * (k - 1) // 2, 2: k * k, 4: k * (2 * k + 1)}[d]

    @property
    def cohomogeneity(self) -> int:
        return self.section_dim - self.copolarity

    @property
    def normal_dim(self) -> int:
        """Real dimension of the normal space of the section."""
        return self.ambient_dim - self.section_dim

    def __str__(self):
        return f"{self.group}^{self.k} on {self.field.value}^({self.n}x{self.k})"


@dataclass(frozen=True)
class ConjugationAction:
    group: GroupSpec

    @property
    def field(self) -> ScalarField:
        return self.group.field

    @property
    def ambient_dim(self) -> int:
        """Dimension of the embedding space K^(n x n), not of the manifold."""
        return self.field.dim * self.group.n ** 2

    @property
    def manifold_dim(self) -> int:
        return self.group.algebra_dim

    @property
    def section_dim(self) -> int:
        return self.group.rank

    @property
    def copolarity(self) -> int:
        return 0

    @property
    def cohomogeneity(self) -> int:
        return self.group.rank

    @property
    def normal_dim(self) -> int:
        return self.group.algebra_dim - self.group.rank

    def __str__(self):
        return f"{self.group} conjugation"


ActionSpec = Union[DirectSumAction, ConjugationAction]


def action_to_json(action: ActionSpec) -> dict:
    if isinstance(action, DirectSumAction):
        return {"kind": "direct_sum", "field": action.field.value, "n": action.n, "k": action.k}
    return {"kind": "conjugation", "family": action.group.family.value, "n": action.group.n}


def action_from_json(obj: dict) -> ActionSpec:
    kind = obj.get("kind")
    if kind == "direct_sum":
        return DirectSumAction(ScalarField.parse(obj["field"]), int(obj["n"]), int(obj["k"]))
    if kind == "conjugation":
        return ConjugationAction(GroupSpec(Family.parse(obj["family"]), int(obj["n"])))
    raise ValueError(f"unknown action kind {kind!r}")


# --- points, sections and the group action ---------------------------------

def act(action: ActionSpec, g: GroupElement, x: MatK) -> MatK:
    """Apply the group action: g x for representations, g x g^* else."""
    m = g.matrix if isinstance(g, GroupElement) else g
    if isinstance(action, DirectSumAction):
        return m @ x
    return m @ x @ m.h


def killing_field(action: ActionSpec, x_alg: MatK, p: MatK) -> MatK:
    """Value at p of the Killing field induced by the algebra element."""
    if isinstance(action, DirectSumAction):
        return x_alg @ p
    return x_alg @ p - p @ x_alg


def embed_section(action: ActionSpec, coord) -> MatK:
    """Ambient section point from its coordinate.

    Direct sums: coord is the top k x k block B (real scalar times the
    first basis vector when k = 1).  Conjugation: coord is the torus
    angle vector.
    """
    if isinstance(action, ConjugationAction):
        return torus_point(action.group, np.asarray(coord, dtype=float))
    n, k = action.n, action.k
    if isinstance(coord, MatK):
        b = coord
    else:
        b = mat(action.field, coord)
    if b.shape != (k, k):
        raise DimensionError(f"section coordinate must be {k} x {k}")
    s = zeros(action.field, n, k)
    s.data[:k] = b.data
    return s


def section_coordinate(action: DirectSumAction, s: MatK) -> MatK:
    """Top k x k block of an ambient section point."""
    if not isinstance(action, DirectSumAction):
        raise TypeError("section_coordinate applies to direct-sum actions")
    return MatK(action.field, s.data[: action.k].copy())


def section_residual(action: ActionSpec, x: MatK) -> float:
    """Distance of x from the section (coordinate-wise, not orbit-wise)."""
    if isinstance(action, DirectSumAction):
        r = float(np.linalg.norm(x.data[action.k :]))
        if action.k == 1:
            # the k = 1 section is the real line through the first basis vector
            v = to_real_vector(MatK(action.field, x.data[:1].copy()))
            r = float(np.hypot(r, np.linalg.norm(v[1:])))
        return r
    angles = torus_angles(action, x, strict=False)
    return (x - torus_point(action.group, angles)).norm()


def torus_angles(action: ConjugationAction, s: MatK, strict: bool = True) -> np.ndarray:
    """Angle coordinates of a point of the standard maximal torus."""
    fam, n = action.group.family, action.group.n
    d = s.data
    if fam is Family.SO:
        ang = np.array([np.arctan2(d[2 * a + 1, 2 * a], d[2 * a, 2 * a]) for a in range(n // 2)])
    elif fam is Family.SU:
        ang = np.angle(np.diag(d))
    else:
        diag = d[np.arange(n), np.arange(n), :]
        ang = np.arctan2(diag[:, 0].imag, diag[:, 0].real)
    if strict and (s - torus_point(action.group, ang)).norm() > 1e-8 * max(1.0, s.norm()):
        raise ValueError("point is not on the standard maximal torus")
    return ang


# --- frames -----------------------------------------------------------------

def _coordinate_frame_rows(field: ScalarField, n: int, k: int, positions) -> np.ndarray:
    """Realified orthonormal frame vectors for the given entry positions."""
    d = field.dim
    rows = []
    for (a, b) in positions:
        for unit in range(d):
            v = np.zeros(d * n * k)
            v[(a * k + b) * d + unit] = 1.0
            rows.append(v)
    return np.array(rows)


@dataclass(frozen=True)
class SectionFrame:
    """Orthonormal real frames of T_s(section) and of its normal space."""

    action: ActionSpec
    s: MatK
    tangent: np.ndarray  # (dim section, D)
    normal: np.ndarray   # (normal_dim, D)


def section_frame(action: ActionSpec, s: MatK) -> SectionFrame:
    if isinstance(action, DirectSumAction):
        n, k, d = action.n, action.k, action.field.dim
        if action.k == 1:
            tangent = _coordinate_frame_rows(action.field, n, k, [(0, 0)])[:1]
            all_rows = np.eye(d * n * k)
            normal = all_rows[1:]
        else:
            tangent = _coordinate_frame_rows(action.field, n, k, [(a, b) for a in range(k) for b in range(k)])
            normal = _coordinate_frame_rows(action.field, n, k, [(i, m) for i in range(k, n) for m in range(k)])
        return SectionFrame(action, s, tangent, normal)
    # conjugation: translate the algebra split at the identity to s
    split = algebra_split(action)
    tangent = np.stack([to_real_vector(h @ s) for h in split.h_basis])
    normal = np.stack([to_real_vector(x @ s) for x in split.m_basis])
    return SectionFrame(action, s, tangent, normal)


# --- the reductive algebra split -------------------------------------------

@dataclass(frozen=True)
class AlgebraSplit:
    """Orthonormal bases splitting the algebra along the section.

    ``h_basis`` spans the pointwise stabilizer algebra, ``w_basis`` the
    orthogonal representative of the normalizer modulo stabilizer (the
    Weyl part) and ``m_basis`` the orthogonal complement of the
    normalizer algebra, whose Killing fields are perpendicular to the
    section everywhere along it.
    """

    action: ActionSpec
    h_basis: tuple[MatK, ...]
    w_basis: tuple[MatK, ...]
    m_basis: tuple[MatK, ...]

    @property
    def n_basis(self) -> tuple[MatK, ...]:
        return self.h_basis + self.w_basis

    @functools.cached_property
    def h_rows(self) -> np.ndarray:
        return _stack_rows(self.h_basis, self.action)

    @functools.cached_property
    def w_rows(self) -> np.ndarray:
        return _stack_rows(self.w_basis, self.action)

    @functools.cached_property
    def m_rows(self) -> np.ndarray:
        return _stack_rows(self.m_basis, self.action)


def _stack_rows(basis: tuple[MatK, ...], action: ActionSpec) -> np.ndarray:
    if not basis:
        n = action.group.n if isinstance(action, ConjugationAction) else action.n
        return np.zeros((0, action.field.dim * n * n))
    return np.stack([to_real_vector(b) for b in basis])


def _orthonormalize(rows: list[np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for v in rows:
        w = v.astype(float).copy()
        for _ in range(2):
            for u in kept:
                w -= (u @ w) * u
        nw = np.linalg.norm(w)
        if nw > tol:
            kept.append(w / nw)
    return kept


def _complement_basis(group: GroupSpec, sub_rows: np.ndarray) -> tuple[MatK, ...]:
    """Orthonormal basis of the complement of a subspace inside the algebra."""
    out = []
    kept: list[np.ndarray] = [r for r in sub_rows]
    for b in algebra_basis(group):
        v = to_real_vector(b)
        w = v.copy()
        for _ in range(2):
            for u in kept:
                w -= (u @ w) * u
        nw = np.linalg.norm(w)
        if nw > 1e-9:
            w /= nw
            kept.append(w)
            out.append(from_real_vector(group.field, group.n, group.n, w))
    return tuple(out)


def _embedded_block_algebra(field: ScalarField, n: int, offset: int, size: int) -> tuple[MatK, ...]:
    """Algebra basis of the subgroup acting on rows/cols [offset, offset+size)."""
    if size < 1:
        return ()
    sub = algebra_basis(GroupSpec(_FIELD_TO_FAMILY[field], size))
    out = []
    for b in sub:
        m = zeros(field, n, n)
        m.data[offset : offset + size, offset : offset + size] = b.data
        out.append(m)
    return tuple(out)


def _mixed_trace_generator(n: int, k: int) -> MatK:
    """Traceless imaginary diagonal orthogonal to both su blocks (SU case)."""
    diag = np.zeros(n, dtype=complex)
    diag[:k] = 1j
    diag[k:] = -1j * k / (n - k)
    v = mat(COMPLEX, np.diag(diag))
    return (1.0 / v.norm()) * v


@functools.lru_cache(maxsize=None)
def algebra_split(action: ActionSpec) -> AlgebraSplit:
    if isinstance(action, ConjugationAction):
        h = torus_basis(action.group)
        m = _complement_basis(action.group, np.stack([to_real_vector(b) for b in h]))
        return AlgebraSplit(action, tuple(h), (), tuple(m))

    field, n, k = action.field, action.n, action.k
    h = _embedded_block_algebra(field, n, k, n - k)
    if k == 1:
        split_rows = np.stack([to_real_vector(b) for b in h]) if h else np.zeros((0, field.dim * n * n))
        m = _complement_basis(action.group, split_rows)
        return AlgebraSplit(action, h, (), m)

    if field is COMPLEX:
        w = _embedded_block_algebra(field, n, 0, k) + (_mixed_trace_generator(n, k),)
    else:
        w = _embedded_block_algebra(field, n, 0, k)

    d = field.dim
    m_list = []
    units = np.eye(4)[:d] if field is QUATERNION else None
    for i in range(k, n):
        for j in range(k):
            for unit in range(d):
                x = zeros(field, n, n)
                if field is REAL:
                    x.data[i, j] = 1.0 / SQ2
                    x.data[j, i] = -1.0 / SQ2
                elif field is COMPLEX:
                    q = 1.0 if unit == 0 else 1j
                    x.data[i, j] = q / SQ2
                    x.data[j, i] = -np.conj(q) / SQ2
                else:
                    q = units[unit]
                    qc = np.array([q[0], -q[1], -q[2], -q[3]])
                    comp = np.zeros((n, n, 4))
                    comp[i, j] = q / SQ2
                    comp[j, i] = -qc / SQ2
                    x = mat(QUATERNION, comp)
                m_list.append(x)
    return AlgebraSplit(action, h, w, tuple(m_list))


def bracket(x: MatK, y: MatK) -> MatK:
    return x @ y - y @ x


# --- regularity, isotropy, orbit spaces -------------------------------------

def _rank_of(x: MatK, cutoff_rel: float = 1e-8) -> int:
    f = qr(x)
    if x.field is QUATERNION:
        diag = np.array([abs(f.r.data[j, j, 0]) for j in range(x.cols)])
    else:
        diag = np.abs(np.diag(f.r.data))
    return int(np.sum(diag > cutoff_rel * max(x.norm(), 1e-300)))


def isotropy_algebra(action: ActionSpec, p: MatK, tol: float = 1e-8) -> tuple[MatK, ...]:
    """Orthonormal basis of the algebra of the stabilizer of p."""
    group = action.group
    basis = algebra_basis(group)
    cols = np.stack([to_real_vector(killing_field(action, b, p)) for b in basis], axis=1)
    u, sv, vh = np.linalg.svd(cols)
    scale = sv[0] if sv.size and sv[0] > 0 else 1.0
    null = [vh[i] for i in range(len(basis)) if i >= len(sv) or sv[i] <= tol * scale]
    out = []
    for c in null:
        x = zeros(group.field, group.n, group.n)
        for ci, b in zip(c, basis):
            x = x + float(ci) * b
        out.append(x)
    return tuple(out)


def classify_point(action: ActionSpec, p: MatK) -> RegularityClass:
    """Regular / singular classification.

    Direct sums: regular exactly when the point has full rank k (the
    stabilizers along regular section points are connected, so no
    exceptional class occurs).  Conjugation: regular exactly when the
    centralizer has minimal dimension, i.e. the rank of the group.
    """
    if isinstance(action, DirectSumAction):
        return RegularityClass.REGULAR if _rank_of(p) == action.k else RegularityClass.SINGULAR
    iso_dim = len(isotropy_algebra(action, p))
    return RegularityClass.REGULAR if iso_dim == action.group.rank else RegularityClass.SINGULAR


def orbit_tangent(action: ActionSpec, p: MatK) -> np.ndarray:
    """Orthonormal (realified) basis of the tangent space of the orbit."""
    basis = algebra_basis(action.group)
    rows = [to_real_vector(killing_field(action, b, p)) for b in basis]
    return np.array(_orthonormalize(rows, tol=1e-8 * max(p.norm(), 1.0)))


def orbit_normal(action: ActionSpec, p: MatK) -> np.ndarray:
    """Orthonormal basis of the normal space of the orbit inside T_p M."""
    tang = orbit_tangent(action, p)
    if isinstance(action, DirectSumAction):
        ambient = np.eye(action.ambient_dim)
    else:
        split = algebra_split(action)
        ambient = np.stack(
            [to_real_vector(b @ p) for b in split.h_basis + split.w_basis + split.m_basis]
        )
    rows = []
    for v in ambient:
        w = v.copy()
        if tang.size:
            w = w - tang.T @ (tang @ w)
        rows.append(w)
    return np.array(_orthonormalize(rows, tol=1e-8))


# --- reduction to the section ----------------------------------------------

def reduce_to_section(action: ActionSpec, x: MatK) -> tuple[MatK, GroupElement]:
    """Group element g and section point s with g . x = s.

    Direct sums reduce by a full QR factorization (with a determinant
    correction on a trailing column for SO/SU, which leaves the first k
    rows untouched); the resulting coordinate is the canonical Weyl
    representative, upper triangular with nonnegative diagonal.
    Conjugation reduces by diagonalization into the standard torus with
    canonically ordered angles.
    """
    if isinstance(action, DirectSumAction):
        return _reduce_direct_sum(action, x)
    fam = action.group.family
    if fam is Family.SU:
        return _reduce_conj_su(action, x)
    if fam is Family.SO:
        return _reduce_conj_so(action, x)
    return _reduce_conj_sp(action, x)


def _reduce_direct_sum(action: DirectSumAction, x: MatK) -> tuple[MatK, GroupElement]:
    n, k = action.n, action.k
    f = qr(x, full=True)
    qmat = f.q
    if action.group.family is Family.SO:
        d = np.linalg.det(qmat.data)
        if d < 0:
            qmat.data[:, -1] *= -1.0
    elif action.group.family is Family.SU:
        d = np.linalg.det(qmat.data)
        qmat.data[:, -1] *= np.conj(d)
    g = GroupElement(action.group, qmat.h)
    s = zeros(action.field, n, k)
    s.data[:k] = f.r.data[:k]
    return s, g


def _reduce_conj_su(action: ConjugationAction, x: MatK) -> tuple[MatK, GroupElement]:
    group = action.group
    t, q = scipy.linalg.schur(x.data, output="complex")
    ang = np.mod(np.angle(np.diag(t)), 2 * np.pi)
    order = np.argsort(ang, kind="stable")
    q = q[:, order]
    ang = ang[order]
    det = np.linalg.det(q)
    q[:, 0] *= np.conj(det)
    gmat = MatK(COMPLEX, q.conj().T.copy())
    return torus_point(group, ang), GroupElement(group, gmat)


def _reduce_conj_so(action: ConjugationAction, x: MatK) -> tuple[MatK, GroupElement]:
    group = action.group
    n = group.n
    t, q = scipy.linalg.schur(x.data, output="real")
    blocks: list[tuple[float, list[int]]] = []
    minus, plus = [], []
    i = 0
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-10:
            theta = float(np.arctan2(t[i + 1, i], t[i, i]))
            blocks.append((theta, [i, i + 1]))
            i += 2
        else:
            (minus if t[i, i] < 0 else plus).append(i)
            i += 1
    # pair the +-1 eigenvalues into angle 0 / pi rotation blocks; det = 1
    # forces an even count of -1 eigenvalues
    if len(minus) % 2 == 1:
        raise np.linalg.LinAlgError("orthogonal input does not have determinant 1")
    for a in range(0, len(minus), 2):
        blocks.append((np.pi, [minus[a], minus[a + 1]]))
    for a in range(0, len(plus) // 2 * 2, 2):
        blocks.append((0.0, [plus[a], plus[a + 1]]))
    spare = [plus[-1]] if len(plus) % 2 == 1 else []

    cols, angles = [], []
    for theta, idx in sorted(blocks, key=lambda b: abs(b[0])):
        if theta < 0:
            idx = [idx[1], idx[0]]  # column swap flips the angle sign
            theta = -theta
        angles.append(theta)
        cols.extend(idx)
    cols.extend(spare)
    qn = q[:, cols]
    if np.linalg.det(qn) < 0:
        if spare:
            qn[:, -1] *= -1.0
        else:
            flipped = _flip_one_block(qn, angles)
            if not flipped:
                angles[0] = -angles[0]
                qn[:, [0, 1]] = qn[:, [1, 0]]
    g = GroupElement(group, MatK(REAL, qn.T.copy()))
    return torus_point(group, np.array(angles)), g


def _flip_one_block(qn: np.ndarray, angles: list[float]) -> bool:
    """Swap columns inside an angle 0 / pi block; fixes det at no cost."""
    for a, theta in enumerate(angles):
        if abs(theta) < 1e-12 or abs(theta - np.pi) < 1e-12:
            qn[:, [2 * a, 2 * a + 1]] = qn[:, [2 * a + 1, 2 * a]]
            return True
    return False


def _reduce_conj_sp(action: ConjugationAction, x: MatK) -> tuple[MatK, GroupElement]:
    group = action.group
    n = group.n
    t, q = scipy.linalg.schur(complex_embedding(x), output="complex")
    ang = np.angle(np.diag(t))
    order = np.argsort(np.abs(ang), kind="stable")
    # quaternionic eigencolumns: w = v_top + conj(v_bot) j; the plus and
    # minus angle partners span the same quaternionic line, so a
    # quaternionic Gram-Schmidt pass keeps exactly n of them
    kept_cols: list[np.ndarray] = []
    kept_ang: list[float] = []
    for idx in order:
        v = q[:, idx]
        w = np.stack([v[:n], v[n:].conj()], axis=-1)  # (n, 2) pair column
        if ang[idx] < 0:
            # right multiplication by j moves to the +theta eigenvector
            # on the same quaternionic line
            w = np.stack([-w[:, 1], w[:, 0]], axis=-1)
        for _ in range(2):
            for u in kept_cols:
                w = _pair_col_sub(u, w)
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            kept_cols.append(w / nw)
            kept_ang.append(abs(float(ang[idx])))
        if len(kept_cols) == n:
            break
    if len(kept_cols) != n:
        raise np.linalg.LinAlgError("quaternionic eigenbasis extraction failed")
    order2 = np.argsort(kept_ang, kind="stable")
    u = np.stack([kept_cols[i] for i in order2], axis=1)  # (n, n, 2)
    umat = MatK(QUATERNION, u)
    g = GroupElement(group, umat.h)
    return torus_point(group, np.array([kept_ang[i] for i in order2])), g


def _pair_col_sub(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """w -= u <u, w> for quaternionic pair columns (n, 2)."""
    u1, u2, w1, w2 = u[:, 0], u[:, 1], w[:, 0], w[:, 1]
    c1 = np.sum(u1.conj() * w1 + u2 * w2.conj())
    c2 = np.sum(u1.conj() * w2 - u2 * w1.conj())
    p1 = u1 * c1 - u2 * np.conj(c2)
    p2 = u1 * c2 + u2 * np.conj(c1)
    return np.stack([w1 - p1, w2 - p2], axis=-1)


def canonical_coordinate(action: ActionSpec, s: MatK):
    """Canonical Weyl-orbit representative of a section point.

    Direct sums: the upper triangular, nonnegative-diagonal QR factor
    of the coordinate.  Conjugation: the canonically ordered angles.
    """
    if isinstance(action, DirectSumAction):
        return qr(section_coordinate(action, s)).r
    s2, _ = reduce_to_section(action, s)
    return torus_angles(action, s2)


# --- sampling ----------------------------------------------------------------

def random_ambient_point(action: ActionSpec, rng: np.random.Generator, scale: float = 1.0) -> MatK:
    """Gaussian point of K^(n x k), or a Haar point of the group."""
    if isinstance(action, DirectSumAction):
        return scale * gaussian(action.field, action.n, action.k, rng)
    return haar_sample(action.group, rng).matrix


def random_section_point(action: ActionSpec, rng: np.random.Generator, scale: float = 1.0) -> MatK:
    if isinstance(action, DirectSumAction):
        if action.k == 1:
            b = zeros(action.field, 1, 1)
            t = scale * rng.standard_normal()
            if action.field is QUATERNION:
                b.data[0, 0, 0] = t
            else:
                b.data[0, 0] = t
            return embed_section(action, b)
        return embed_section(action, gaussian(action.field, action.k, action.k, rng) * scale)
    return embed_section(action, rng.uniform(0.0, 2 * np.pi, size=action.group.rank))


def random_regular_section_point(
    action: ActionSpec, rng: np.random.Generator, scale: float = 1.0, min_gap: float = 5e-2
) -> MatK:
    """Random section point safely inside the regular set."""
    for _ in range(1000):
        s = random_section_point(action, rng, scale)
        if isinstance(action, DirectSumAction):
            b = section_coordinate(action, s)
            sv = np.linalg.svd(complex_embedding(b), compute_uv=False)
            if sv[-1] > min_gap:
                return s
        else:
            if _torus_angles_regular(action, torus_angles(action, s), min_gap):
                return s
    raise RuntimeError("failed to sample a regular section point")


def _torus_angles_regular(action: ConjugationAction, ang: np.ndarray, gap: float) -> bool:
    fam, n = action.group.family, action.group.n
    if fam is Family.SU:
        full = np.mod(ang if ang.size == n else np.append(ang, -np.sum(ang)), 2 * np.pi)
        diffs = np.abs(full[:, None] - full[None, :])
        diffs = np.minimum(diffs, 2 * np.pi - diffs)
        return bool(np.all(diffs[np.triu_indices(n, 1)] > gap))
    # SO / Sp: root hyperplanes at equal or opposite angles and at 0, pi
    a = np.mod(ang, 2 * np.pi)
    a = np.minimum(a, 2 * np.pi - a)
    if np.any(a < gap) or np.any(np.abs(a - np.pi) < gap):
        return False
    diffs = np.abs(a[:, None] - a[None, :])
    off = diffs[np.triu_indices(len(a), 1)]
    return bool(np.all(off > gap)) if off.size else True


def normalizer_sample(action: ActionSpec, rng: np.random.Generator) -> GroupElement:
    """Haar-like sample of the normalizer of the section."""
    if isinstance(action, DirectSumAction):
        return _normalizer_direct_sum(action, rng)
    return _normalizer_conjugation(action, rng)


def _haar_unitary_block(field: ScalarField, size: int, rng: np.random.Generator) -> MatK:
    if size == 0:
        return zeros(field, 0, 0)
    g = gaussian(field, size, size, rng)
    return qr(g).q


def _normalizer_direct_sum(action: DirectSumAction, rng: np.random.Generator) -> GroupElement:
    field, n, k = action.field, action.n, action.k
    if k == 1 and field is not REAL:
        # the polar section is the real line, so the top block is +-1
        u = eye(field, 1)
        if rng.random() < 0.5:
            u.data[0, 0] = -u.data[0, 0]
    else:
        u = _haar_unitary_block(field, k, rng)
    v = _haar_unitary_block(field, n - k, rng)
    if field is REAL:
        if rng.random() < 0.5:
            u.data[:, -1] *= -1.0
        if np.linalg.det(u.data) * np.linalg.det(v.data) < 0:
            v.data[:, -1] *= -1.0
    elif field is COMPLEX:
        d = np.linalg.det(u.data) * np.linalg.det(v.data)
        v.data[:, -1] *= np.conj(d)
    m = zeros(field, n, n)
    m.data[:k, :k] = u.data
    m.data[k:, k:] = v.data
    return GroupElement(action.group, m)


def _normalizer_conjugation(action: ConjugationAction, rng: np.random.Generator) -> GroupElement:
    group = action.group
    fam, n = group.family, group.n
    t = torus_point(group, rng.uniform(0, 2 * np.pi, size=group.rank))
    if fam is Family.SU:
        perm = rng.permutation(n)
        p = np.zeros((n, n), dtype=complex)
        p[perm, np.arange(n)] = 1.0
        p[:, 0] *= np.linalg.det(p).conj()
        w = MatK(COMPLEX, p)
    elif fam is Family.SO:
        m = n // 2
        perm = rng.permutation(m)
        flips = rng.random(m) < 0.5
        if flips.sum() % 2 == 1:
            if n % 2 == 1:
                pass  # compensated by the spare coordinate below
            else:
                flips[np.argmax(flips)] = False
        p = np.zeros((n, n))
        for a in range(m):
            b = perm[a]
            blk = np.diag([1.0, -1.0]) if flips[a] else np.eye(2)
            p[2 * b : 2 * b + 2, 2 * a : 2 * a + 2] = blk
        if n % 2 == 1:
            p[n - 1, n - 1] = 1.0
        if np.linalg.det(p) < 0:
            # only reachable for odd n, where the spare coordinate absorbs it
            p[:, -1] *= -1.0
        w = MatK(REAL, p)
    else:
        perm = rng.permutation(n)
        flips = rng.random(n) < 0.5
        comp = np.zeros((n, n, 4))
        for a in range(n):
            comp[perm[a], a] = np.array([0.0, 0.0, 1.0, 0.0]) if flips[a] else np.array([1.0, 0.0, 0.0, 0.0])
        w = mat(QUATERNION, comp)
    return GroupElement(group, t @ w)
