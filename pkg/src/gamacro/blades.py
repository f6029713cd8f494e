"""Basis blades as bitmaps, metric handling and bilinear product tables.

A blade is an ``int`` whose bit ``i`` marks basis vector ``i`` (``e1`` is
bit 0).  Frames carry a symmetric inner-product matrix; frames whose matrix
is not diagonal are multiplied through an orthogonal internal frame
obtained from an eigendecomposition.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateMetric, NonSymmetricIPM, UnknownBlade

Number = Union[Fraction, float]

KINDS = ("gp", "op", "sp", "lcp", "rcp", "fdp", "hip", "cp", "acp")
ZERO_EIGEN_TOL = 1e-10
SNAP_TOL = 1e-12
MAX_DIM = 12


def grade(b: int) -> int:
    return bin(b).count("1")


def reorder_sign(a: int, b: int) -> int:
    """Sign of the permutation that sorts the factors of ``a`` then ``b``."""
    a >>= 1
    swaps = 0
    while a:
        swaps += grade(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


def orthogonal_gp(a: int, b: int, sig: Sequence[int]) -> Tuple[int, Number]:
    """Geometric product of two blades of a diagonal metric."""
    coef = reorder_sign(a, b)
    shared = a & b
    i = 0
    while shared:
        if shared & 1:
            coef *= sig[i]
            if coef == 0:
                break
        shared >>= 1
        i += 1
    return a ^ b, coef


def blade_indices(b: int) -> List[int]:
    out, i = [], 0
    while b:
        if b & 1:
            out.append(i)
        b >>= 1
        i += 1
    return out


def blade_name(b: int, basis_names: Sequence[str]) -> str:
    if b == 0:
        return "1"
    return "^".join(basis_names[i] for i in blade_indices(b))


def parse_blade(text: str, basis_names: Sequence[str]) -> int:
    """Blade from ``e1^e2`` style text; factors must be in ascending order."""
    text = text.strip()
    if text in ("1", "scalar"):
        return 0
    bits, last = 0, -1
    for part in text.split("^"):
        part = part.strip()
        try:
            i = list(basis_names).index(part)
        except ValueError:
            raise UnknownBlade(f"{part!r} is not a basis vector of this frame") from None
        if i <= last:
            raise UnknownBlade(f"blade {text!r} must list basis vectors in ascending order")
        bits |= 1 << i
        last = i
    return bits


def _snap(x: float) -> Optional[Number]:
    if abs(x) < SNAP_TOL:
        return None
    q = Fraction(x).limit_denominator(1 << 20)
    if abs(float(q) - x) <= SNAP_TOL:
        return q
    return float(x)


def _num(x) -> Number:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    q = _snap(float(x))
    return Fraction(0) if q is None else q


def orthogonalize(ipm) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Signatures and basis-change matrix of an orthogonal equivalent.

    Columns of the returned matrix are the internal basis vectors written
    on the declared basis; each squares to +1, -1 or 0.
    """
    m = np.array([[float(v) for v in row] for row in ipm], dtype=float)
    if not np.allclose(m, m.T, atol=1e-12):
        raise NonSymmetricIPM("inner-product matrix is not symmetric")
    n = m.shape[0]
    if n == 0:
        return (), np.zeros((0, 0))
    if np.count_nonzero(m - np.diag(np.diag(m))) == 0:
        d = np.diag(m)
        sig, cols = [], []
        for i, lam in enumerate(d):
            if abs(lam) < ZERO_EIGEN_TOL:
                sig.append(0)
                cols.append(1.0)
            else:
                sig.append(1 if lam > 0 else -1)
                cols.append(1.0 / np.sqrt(abs(lam)))
        return tuple(sig), np.diag(cols)
    lam, vec = np.linalg.eigh(m)
    sig, bcm = [], np.zeros((n, n))
    for j in range(n):
        if abs(lam[j]) < ZERO_EIGEN_TOL:
            sig.append(0)
            bcm[:, j] = vec[:, j]
        else:
            sig.append(1 if lam[j] > 0 else -1)
            bcm[:, j] = vec[:, j] / np.sqrt(abs(lam[j]))
    return tuple(sig), bcm


def outermorphism_matrix(mat: np.ndarray) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the outermorphism of a vector map."""
    n = mat.shape[0]
    size = 1 << n
    out = np.zeros((size, size))
    out[0, 0] = 1.0
    for b in range(1, size):
        # image(b) = image(b without its top vector) ^ image(top vector)
        top = b.bit_length() - 1
        rest = b & ~(1 << top)
        col = out[:, rest]
        res = np.zeros(size)
        for c in np.nonzero(col)[0]:
            c = int(c)
            for j in range(n):
                if not (c >> j) & 1 and mat[j, top] != 0.0:
                    res[c | (1 << j)] += reorder_sign(c, 1 << j) * col[c] * mat[j, top]
        out[:, b] = res
    return out


def _grade_ok(kind: str, ga: int, gb: int, g: int) -> bool:
    if kind == "gp":
        return True
    if kind == "op":
        return g == ga + gb
    if kind == "lcp":
        return g == gb - ga
    if kind == "rcp":
        return g == ga - gb
    if kind == "sp":
        return g == 0
    if kind == "fdp":
        return g == abs(ga - gb)
    if kind == "hip":
        return ga != 0 and gb != 0 and g == abs(ga - gb)
    raise ValueError(kind)


Entry = Tuple[Tuple[int, Number], ...]


class ProductTable:
    """Lazily filled map (blade, blade) -> ((blade, coefficient), ...)."""

    def __init__(self, kind: str, frame: "Frame"):
        if kind not in KINDS:
            raise ValueError(f"unknown product kind {kind!r}")
        self.kind = kind
        self.frame = frame
        self._entries: Dict[Tuple[int, int], Entry] = {}

    def __getitem__(self, pair: Tuple[int, int]) -> Entry:
        hit = self._entries.get(pair)
        if hit is None:
            hit = self._compute(*pair)
            self._entries[pair] = hit
        return hit

    def lookup(self, a: int, b: int) -> Entry:
        return self[(a, b)]

    def _compute(self, a: int, b: int) -> Entry:
        f = self.frame
        if self.kind in ("cp", "acp"):
            ab = dict(f.blade_gp(a, b))
            ba = dict(f.blade_gp(b, a))
            s = -1 if self.kind == "cp" else 1
            out = {}
            for k in set(ab) | set(ba):
                v = (ab.get(k, 0) + s * ba.get(k, 0)) / 2
                if v != 0:
                    out[k] = _num(v) if isinstance(v, float) else v
            return tuple(sorted(out.items()))
        ga, gb = grade(a), grade(b)
        return tuple((c, v) for c, v in f.blade_gp(a, b) if _grade_ok(self.kind, ga, gb, grade(c)))

    def materialize(self) -> Dict[Tuple[int, int], Entry]:
        size = self.frame.size
        for a in range(size):
            for b in range(size):
                self[(a, b)]
        return dict(self._entries)


@dataclass(frozen=True, eq=False)
class Frame:
    """A named vector basis with its inner-product matrix.

    ``kind`` records how the frame was declared (``diagonal``, ``ipm``,
    ``derived`` or ``subspace``) and ``source`` the frame it came from.
    """

    name: str
    basis_names: Tuple[str, ...]
    ipm: Tuple[Tuple[Number, ...], ...]
    kind: str = "ipm"
    source: Optional[str] = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.basis_names)
        if n > MAX_DIM:
            raise ValueError(f"frames above {MAX_DIM} dimensions are not supported")
        if len(set(self.basis_names)) != n:
            raise ValueError("basis names must be distinct")
        if len(self.ipm) != n or any(len(r) != n for r in self.ipm):
            raise ValueError("inner-product matrix has the wrong shape")
        for i in range(n):
            for j in range(i):
                if abs(float(self.ipm[i][j]) - float(self.ipm[j][i])) > 1e-12:
                    raise NonSymmetricIPM(
                        f"inner-product matrix of frame {self.name!r} is not symmetric "
                        f"at ({i + 1},{j + 1})"
                    )

    # constructors -----------------------------------------------------
    @classmethod
    def diagonal(cls, name: str, basis_names: Sequence[str], signature: Sequence) -> "Frame":
        n = len(basis_names)
        ipm = tuple(
            tuple(_num(signature[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)
        )
        return cls(name, tuple(basis_names), ipm, kind="diagonal")

    @classmethod
    def euclidean(cls, name: str, basis_names: Sequence[str]) -> "Frame":
        return cls.diagonal(name, basis_names, [1] * len(basis_names))

    @classmethod
    def from_ipm(cls, name: str, basis_names: Sequence[str], ipm, kind="ipm", source=None) -> "Frame":
        rows = tuple(tuple(_num(v) for v in row) for row in ipm)
        return cls(name, tuple(basis_names), rows, kind=kind, source=source)

    # basic facts --------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.basis_names)

    @property
    def size(self) -> int:
        return 1 << self.dim

    @property
    def pseudoscalar(self) -> int:
        return self.size - 1

    def inner(self, i: int, j: int) -> Number:
        return self.ipm[i][j]

    @cached_property
    def is_diagonal(self) -> bool:
        n = self.dim
        return all(self.ipm[i][j] == 0 for i in range(n) for j in range(n) if i != j)

    @cached_property
    def diagonal_signature(self) -> Tuple[Number, ...]:
        return tuple(self.ipm[i][i] for i in range(self.dim))

    @cached_property
    def _internal(self):
        sig, bcm = orthogonalize(self.ipm)
        to_internal = np.linalg.inv(bcm) if self.dim else bcm
        return sig, bcm, outermorphism_matrix(to_internal), outermorphism_matrix(bcm)

    @property
    def signatures(self) -> Tuple[int, ...]:
        """Signs of the internal orthogonal basis (+1, -1 or 0)."""
        return self._internal[0]

    @property
    def bcm(self) -> np.ndarray:
        return self._internal[1]

    @property
    def signature_counts(self) -> Tuple[int, int, int]:
        s = self.signatures
        return s.count(1), s.count(-1), s.count(0)

    def to_internal(self, dense: np.ndarray) -> np.ndarray:
        return self._internal[2] @ dense

    def from_internal(self, dense: np.ndarray) -> np.ndarray:
        return self._internal[3] @ dense

    # products -----------------------------------------------------------
    def blade_gp(self, a: int, b: int) -> Entry:
        """Geometric product of two declared basis blades."""
        if self.is_diagonal:
            c, v = orthogonal_gp(a, b, self.diagonal_signature)
            return ((c, v),) if v != 0 else ()
        sig, _, fwd, back = self._internal
        x, y = fwd[:, a], fwd[:, b]
        z = np.zeros(self.size)
        for i in np.nonzero(x)[0]:
            for j in np.nonzero(y)[0]:
                c, v = orthogonal_gp(int(i), int(j), sig)
                if v:
                    z[c] += v * x[i] * y[j]
        res = back @ z
        out = []
        for c in np.nonzero(np.abs(res) >= SNAP_TOL)[0]:
            v = _snap(res[c])
            if v is not None:
                out.append((int(c), v))
        return tuple(out)

    @cached_property
    def tables(self) -> Dict[str, ProductTable]:
        return {k: ProductTable(k, self) for k in KINDS}

    def blade_name(self, b: int) -> str:
        return blade_name(b, self.basis_names)

    def parse_blade(self, text: str) -> int:
        return parse_blade(text, self.basis_names)

    def __repr__(self):
        return f"Frame({self.name!r}, {list(self.basis_names)})"


def build_tables(frame: Frame) -> Dict[str, ProductTable]:
    return frame.tables


def _exact_inverse(m: List[List[Fraction]]) -> Optional[List[List[Fraction]]]:
    n = len(m)
    a = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def matrix_inverse(m) -> Optional[List[List[Number]]]:
    """Inverse of a square matrix; exact when all entries are rational."""
    if all(isinstance(v, Fraction) for row in m for v in row):
        return _exact_inverse([list(r) for r in m])
    arr = np.array([[float(v) for v in row] for row in m])
    if arr.size and abs(np.linalg.det(arr)) < 1e-12:
        return None
    inv = np.linalg.inv(arr) if arr.size else arr
    return [[_num(v) for v in row] for row in inv]


def reciprocal_frame(frame: Frame) -> List[Tuple[Number, ...]]:
    """Reciprocal vectors e^k (as coefficients on the basis) with e_j . e^k = delta."""
    if 0 in frame.signatures:
        raise DegenerateMetric(f"frame {frame.name!r} has a degenerate metric")
    inv = matrix_inverse(frame.ipm)
    if inv is None:
        raise DegenerateMetric(f"frame {frame.name!r} has a degenerate metric")
    n = frame.dim
    return [tuple(inv[j][k] for j in range(n)) for k in range(n)]
