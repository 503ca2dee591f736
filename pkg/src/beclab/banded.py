"""Banded linear algebra on LAPACK band storage.

A square matrix with equal lower and upper bandwidth bw is held as a
(2*bw+1, dim) array `data` with A[i, j] = data[bw + i - j, j]; row bw is the
main diagonal. Factorisation and solves go through LAPACK's gbtrf/gbtrs so
that a singular or near-singular pivot is reported with its index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs

__all__ = [
    "SingularSystemError",
    "BandedMatrix",
    "BandedSystem",
    "BandedLU",
    "solve_banded",
]


class SingularSystemError(RuntimeError):
    """Singular or near-singular pivot encountered at `index`."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"singular pivot at index {index}")


@dataclass
class BandedMatrix:
    bandwidth: int
    data: np.ndarray  # shape (2*bandwidth+1, dim)

    @classmethod
    def zeros(cls, dim: int, bandwidth: int) -> "BandedMatrix":
        if bandwidth < 0 or dim <= 0:
            raise ValueError("need dim > 0 and bandwidth >= 0")
        return cls(bandwidth=bandwidth, data=np.zeros((2 * bandwidth + 1, dim)))

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def set_entry(self, i: int, j: int, value: float) -> None:
        if abs(i - j) > self.bandwidth:
            raise ValueError(f"entry ({i}, {j}) outside bandwidth {self.bandwidth}")
        self.data[self.bandwidth + i - j, j] = value

    def get_entry(self, i: int, j: int) -> float:
        if abs(i - j) > self.bandwidth:
            return 0.0
        return float(self.data[self.bandwidth + i - j, j])

    def add_diagonal(self, offset: int, values: np.ndarray) -> None:
        """Add `values` along diagonal j - i = offset (column-indexed)."""
        if abs(offset) > self.bandwidth:
            raise ValueError(f"offset {offset} outside bandwidth {self.bandwidth}")
        col0 = max(0, offset)
        length = self.dim - abs(offset)
        if len(values) != length:
            raise ValueError(f"diagonal length {len(values)} != {length}")
        self.data[self.bandwidth - offset, col0 : col0 + length] += values

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.zeros_like(x)
        bw, dim = self.bandwidth, self.dim
        for offset in range(-bw, bw + 1):
            col0 = max(0, offset)
            row0 = max(0, -offset)
            length = dim - abs(offset)
            y[row0 : row0 + length] += (
                self.data[bw - offset, col0 : col0 + length] * x[col0 : col0 + length]
            )
        return y

    def to_dense(self) -> np.ndarray:
        bw, dim = self.bandwidth, self.dim
        dense = np.zeros((dim, dim))
        for offset in range(-bw, bw + 1):
            col0 = max(0, offset)
            row0 = max(0, -offset)
            length = dim - abs(offset)
            idx = np.arange(length)
            dense[row0 + idx, col0 + idx] = self.data[bw - offset, col0 : col0 + length]
        return dense

    def symmetry_defect(self) -> float:
        """max |A - A^T| over stored entries."""
        defect = 0.0
        for offset in range(1, self.bandwidth + 1):
            upper = self.data[self.bandwidth - offset, offset:]
            lower = self.data[self.bandwidth + offset, : self.dim - offset]
            defect = max(defect, float(np.max(np.abs(upper - lower), initial=0.0)))
        return defect


@dataclass
class BandedSystem:
    matrix: BandedMatrix
    rhs: np.ndarray


class BandedLU:
    """LU factorisation of a BandedMatrix, reusable for repeated solves.

    Rows are equilibrated (scaled to unit max) before factorisation: the
    assemblies here mix O(1/h^2) stencil rows with O(1) boundary rows, and
    pivot-size diagnostics are meaningless without a common row scale.
    """

    def __init__(self, matrix: BandedMatrix):
        bw, dim = matrix.bandwidth, matrix.dim
        row_max = np.zeros(dim)
        for offset in range(-bw, bw + 1):
            col0 = max(0, offset)
            row0 = max(0, -offset)
            length = dim - abs(offset)
            band = np.abs(matrix.data[bw - offset, col0 : col0 + length])
            np.maximum(row_max[row0 : row0 + length], band, out=row_max[row0 : row0 + length])
        if float(np.min(row_max)) == 0.0:
            raise SingularSystemError(int(np.argmin(row_max)), "zero row")
        row_scale = 1.0 / row_max
        # gbtrf wants kl extra rows on top for fill-in: ab[kl+ku+i-j, j].
        ab = np.zeros((3 * bw + 1, dim))
        for offset in range(-bw, bw + 1):
            col0 = max(0, offset)
            row0 = max(0, -offset)
            length = dim - abs(offset)
            ab[2 * bw - offset, col0 : col0 + length] = (
                matrix.data[bw - offset, col0 : col0 + length]
                * row_scale[row0 : row0 + length]
            )
        gbtrf, = get_lapack_funcs(("gbtrf",), (ab,))
        lu, piv, info = gbtrf(ab, bw, bw)
        if info > 0:
            raise SingularSystemError(info - 1)
        if info < 0:
            raise ValueError(f"gbtrf: illegal argument {-info}")
        udiag = np.abs(lu[2 * bw, :])
        threshold = dim * np.finfo(float).eps  # rows have unit max after scaling
        if float(np.min(udiag)) <= threshold:
            raise SingularSystemError(
                int(np.argmin(udiag)),
                f"near-singular pivot at index {int(np.argmin(udiag))}",
            )
        self._lu = lu
        self._piv = piv
        self._bw = bw
        self._row_scale = row_scale

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        gbtrs, = get_lapack_funcs(("gbtrs",), (self._lu,))
        b = np.asarray(rhs, dtype=float) * self._row_scale
        x, info = gbtrs(self._lu, self._bw, self._bw, b, self._piv)
        if info != 0:
            raise ValueError(f"gbtrs: illegal argument {-info}")
        return x


def solve_banded(system: BandedSystem) -> np.ndarray:
    """Solve the banded system, raising SingularSystemError with the pivot
    index when the factorisation hits a zero or machine-scale pivot."""
    rhs = np.asarray(system.rhs, dtype=float)
    if rhs.shape[0] != system.matrix.dim:
        raise ValueError("rhs length does not match matrix dimension")
    return BandedLU(system.matrix).solve(rhs)
