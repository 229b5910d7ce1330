"""Classical compact matrix groups SO(n), SU(n), Sp(n).

Provides orthonormal Lie algebra bases for the inner product
Re(tr(x^* y)), the matrix exponential, exact Haar sampling via QR of
Gaussian matrices, and the adjoint action.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

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
    det_modulus,
    eye,
    gaussian,
    inner,
    mat,
    qr,
    zeros,
)

SQ2 = np.sqrt(2.0)


class Family(enum.Enum):
    SO = "SO"
    SU = "SU"
    SP = "Sp"

    @property
    def field(self) -> ScalarField:
        return {Family.SO: REAL, Family.SU: COMPLEX, Family.SP: QUATERNION}[self]

    @classmethod
    def parse(cls, label: str) -> "Family":
        for fam in cls:
            if fam.value.lower() == label.lower():
                return fam
        raise ValueError(f"unknown group family {label!r}, expected SO, SU or Sp")


@dataclass(frozen=True)
class GroupSpec:
    family: Family
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("group size must be positive")

    @property
    def field(self) -> ScalarField:
        return self.family.field

    @property
    def algebra_dim(self) -> int:
        n = self.n
        if self.family is Family.SO:
            return n * (n - 1) // 2
        if self.family is Family.SU:
            return n * n - 1
        return n * (2 * n + 1)

    @property
    def rank(self) -> int:
        if self.family is Family.SO:
            return self.n // 2
        if self.family is Family.SU:
            return self.n - 1
        return self.n

    def __str__(self):
        return f"{self.family.value}({self.n})"


@dataclass(frozen=True)
class GroupElement:
    group: GroupSpec
    matrix: MatK


def _q_unit(axis: int) -> np.ndarray:
    e = np.zeros(4)
    e[axis] = 1.0
    return e


@functools.lru_cache(maxsize=None)
def algebra_basis(group: GroupSpec) -> tuple[MatK, ...]:
    """Orthonormal basis of the Lie algebra under Re(tr(x^* y)).

    Off-diagonal generators are elementary antisymmetric pairs scaled
    by 1/sqrt(2); SU gets the usual symmetric imaginary pairs and
    traceless imaginary diagonals, Sp the three extra imaginary units
    per slot.
    """
    n, field = group.n, group.field
    out: list[MatK] = []
    if field is REAL:
        for a in range(n):
            for b in range(a + 1, n):
                m = np.zeros((n, n))
                m[a, b], m[b, a] = -1.0 / SQ2, 1.0 / SQ2
                out.append(mat(REAL, m))
    elif field is COMPLEX:
        for a in range(n):
            for b in range(a + 1, n):
                m = np.zeros((n, n), dtype=complex)
                m[a, b], m[b, a] = -1.0 / SQ2, 1.0 / SQ2
                out.append(mat(COMPLEX, m))
                m = np.zeros((n, n), dtype=complex)
                m[a, b] = m[b, a] = 1j / SQ2
                out.append(mat(COMPLEX, m))
        for l in range(1, n):
            diag = np.zeros(n, dtype=complex)
            diag[:l] = 1j
            diag[l] = -1j * l
            out.append(mat(COMPLEX, np.diag(diag / np.sqrt(l * (l + 1)))))
    else:
        for a in range(n):
            for b in range(a + 1, n):
                for axis in range(4):
                    q = _q_unit(axis)
                    qc = np.array([q[0], -q[1], -q[2], -q[3]])
                    m = np.zeros((n, n, 4))
                    # X[a,b] = -conj(q)/sqrt(2), X[b,a] = q/sqrt(2) keeps X skew
                    m[a, b] = -qc / SQ2
                    m[b, a] = q / SQ2
                    out.append(mat(QUATERNION, m))
        for a in range(n):
            for axis in range(1, 4):
                m = np.zeros((n, n, 4))
                m[a, a] = _q_unit(axis)
                out.append(mat(QUATERNION, m))
    assert len(out) == group.algebra_dim
    return tuple(out)


@functools.lru_cache(maxsize=None)
def torus_basis(group: GroupSpec) -> tuple[MatK, ...]:
    """Orthonormal basis of the standard maximal torus algebra.

    SO(n): 2x2 rotation generators on consecutive index pairs;
    SU(n): traceless imaginary diagonals; Sp(n): imaginary-i diagonals.
    """
    n, field = group.n, group.field
    out: list[MatK] = []
    if group.family is Family.SO:
        for a in range(n // 2):
            m = np.zeros((n, n))
            m[2 * a, 2 * a + 1], m[2 * a + 1, 2 * a] = -1.0 / SQ2, 1.0 / SQ2
            out.append(mat(REAL, m))
    elif group.family is Family.SU:
        for l in range(1, n):
            diag = np.zeros(n, dtype=complex)
            diag[:l] = 1j
            diag[l] = -1j * l
            out.append(mat(COMPLEX, np.diag(diag / np.sqrt(l * (l + 1)))))
    else:
        for a in range(n):
            m = np.zeros((n, n, 4))
            m[a, a] = _q_unit(1)
            out.append(mat(QUATERNION, m))
    assert len(out) == group.rank
    return tuple(out)


def torus_point(group: GroupSpec, angles: np.ndarray) -> MatK:
    """Element of the standard maximal torus with the given angles.

    SO(n): block rotations R(theta_a); SU(n): diag(exp(i theta_j)) with
    the last angle forced to make the sum vanish mod 2 pi (n - 1 free
    angles if n - 1 are given, otherwise all n are used as supplied);
    Sp(n): diag(exp(i theta_a)).
    """
    n = group.n
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if group.family is Family.SO:
        if angles.size != n // 2:
            raise DimensionError(f"SO({n}) torus needs {n // 2} angles")
        m = np.eye(n)
        for a, t in enumerate(angles):
            c, s = np.cos(t), np.sin(t)
            m[2 * a : 2 * a + 2, 2 * a : 2 * a + 2] = [[c, -s], [s, c]]
        return mat(REAL, m)
    if group.family is Family.SU:
        if angles.size == n - 1:
            angles = np.concatenate([angles, [-np.sum(angles)]])
        elif angles.size != n:
            raise DimensionError(f"SU({n}) torus needs {n - 1} (or {n}) angles")
        return mat(COMPLEX, np.diag(np.exp(1j * angles)))
    if angles.size != n:
        raise DimensionError(f"Sp({n}) torus needs {n} angles")
    m = np.zeros((n, n, 4))
    m[np.arange(n), np.arange(n), 0] = np.cos(angles)
    m[np.arange(n), np.arange(n), 1] = np.sin(angles)
    return mat(QUATERNION, m)


def exp_map(group: GroupSpec, x: MatK) -> GroupElement:
    """Matrix exponential of an algebra element."""
    if x.field is not group.field or x.shape != (group.n, group.n):
        raise DimensionError("algebra element has wrong field or shape")
    if x.field is not QUATERNION:
        return GroupElement(group, MatK(x.field, scipy.linalg.expm(x.data)))
    # exp commutes with the complex adjoint embedding; average the two
    # redundant blocks when projecting back
    n = x.rows
    e = scipy.linalg.expm(complex_embedding(x))
    c1 = 0.5 * (e[:n, :n] + e[n:, n:].conj())
    c2 = 0.5 * (e[n:, :n].conj() - e[:n, n:])
    return GroupElement(group, MatK(QUATERNION, np.stack([c1, c2], axis=-1)))


def group_element(group: GroupSpec, m: MatK) -> GroupElement:
    return GroupElement(group, m)


def unitarity_residual(g: GroupElement) -> float:
    m = g.matrix
    return (m.h @ m - eye(m.field, m.rows)).norm()


def det_residual(g: GroupElement) -> float:
    """Deviation of the determinant from 1 (classical det for SO/SU)."""
    m = g.matrix
    if g.group.family is Family.SP:
        return abs(det_modulus(m) - 1.0)
    return float(abs(np.linalg.det(np.asarray(m.data)) - 1.0))


def haar_sample(group: GroupSpec, rng: np.random.Generator) -> GroupElement:
    """Exact Haar sample: QR of a Gaussian matrix.

    The factorization's nonnegative real diagonal of r is precisely the
    phase correction that makes q Haar on O(n) / U(n) / Sp(n); for SO
    and SU a final column scaling forces det = 1, which pushes Haar
    forward to the subgroup.
    """
    n, field = group.n, group.field
    g = gaussian(field, n, n, rng)
    q = qr(g).q
    if group.family is Family.SO:
        d = np.linalg.det(q.data)
        if d < 0:
            q.data[:, -1] *= -1.0
    elif group.family is Family.SU:
        d = np.linalg.det(q.data)
        q.data[:, -1] *= np.conj(d)
    return GroupElement(group, q)


def haar_sample_batch(group: GroupSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """Stack of Haar samples as raw matrix data, (count, n, n[, pair]).

    Real and complex families use a batched QR with the diagonal phase
    correction (equivalent to haar_sample per draw); quaternionic
    samples fall back to a loop.
    """
    n, field = group.n, group.field
    if field is QUATERNION:
        return np.stack([haar_sample(group, rng).matrix.data for _ in range(count)])
    if field is REAL:
        g = rng.standard_normal((count, n, n))
    else:
        re_im = rng.standard_normal((count, 2, n, n))
        g = re_im[:, 0] + 1j * re_im[:, 1]
    q, r = np.linalg.qr(g)
    d = np.einsum("mii->mi", r)
    phase = d / np.abs(d)
    q = q * phase[:, None, :]
    det = np.linalg.det(q)
    if group.family is Family.SO:
        q[det < 0, :, -1] *= -1.0
    elif group.family is Family.SU:
        q[:, :, -1] *= det.conj()[:, None]
    return q


def adjoint(g: GroupElement, x: MatK) -> MatK:
    """Ad_g x = g x g^{-1}; an isometry of the algebra."""
    m = g.matrix
    return m @ x @ m.h


def skewness_residual(x: MatK) -> float:
    return (x.h + x).norm()


def random_algebra_element(group: GroupSpec, rng: np.random.Generator, scale: float = 1.0) -> MatK:
    basis = algebra_basis(group)
    coeff = rng.standard_normal(len(basis)) * scale
    out = zeros(group.field, group.n, group.n)
    for c, b in zip(coeff, basis):
        out = out + c * b
    return out
