"""Scalar fields underlying the matrix spaces: the reals, the complex
numbers and the quaternions, plus elementwise quaternion arithmetic.

Quaternions are carried as float arrays whose last axis holds the four
components (w, x, y, z) of w + x*i + y*j + z*k.  Internally the matrix
layer prefers the complex-pair form q = c1 + c2*j with c1 = w + x*i and
c2 = y + z*i; converters between the two layouts live here.
"""

from __future__ import annotations

import enum

import numpy as np


class ScalarField(enum.Enum):
    REAL = "R"
    COMPLEX = "C"
    QUATERNION = "H"

    @property
    def dim(self) -> int:
        """Real dimension of the field (1, 2 or 4)."""
        return {ScalarField.REAL: 1, ScalarField.COMPLEX: 2, ScalarField.QUATERNION: 4}[self]

    @classmethod
    def parse(cls, label: str) -> "ScalarField":
        try:
            return cls(label.upper())
        except ValueError:
            raise ValueError(f"unknown scalar field {label!r}, expected one of R, C, H") from None


def quat_mul(p, q):
    """Hamilton product of component arrays with shape (..., 4)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def quat_abs(q):
    q = np.asarray(q, dtype=float)
    return np.sqrt(np.sum(q * q, axis=-1))


QUAT_UNITS = np.eye(4)  # rows: 1, i, j, k


def quat_to_pair(q):
    """(..., 4) float components -> (..., 2) complex pair (c1, c2)."""
    q = np.asarray(q, dtype=float)
    c1 = q[..., 0] + 1j * q[..., 1]
    c2 = q[..., 2] + 1j * q[..., 3]
    return np.stack([c1, c2], axis=-1)


def pair_to_quat(c):
    """(..., 2) complex pair -> (..., 4) float components."""
    c = np.asarray(c, dtype=complex)
    return np.stack(
        [c[..., 0].real, c[..., 0].imag, c[..., 1].real, c[..., 1].imag], axis=-1
    )
