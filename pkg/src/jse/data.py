"""Shared data model: labeled embeddings, directions, subspace bases, projections.

Conventions used throughout the package:

* samples are rows, so an embedding matrix ``Z`` has shape ``(n, d)``;
* both labels are binary in {0, 1};
* each sample belongs to one of four groups derived from the label pair
  ``(y_mt, y_sp)`` via the fixed encoding
  ``(0,0) -> 1, (0,1) -> 2, (1,0) -> 3, (1,1) -> 4``;
* a basis is a ``(d, k)`` matrix with orthonormal columns, where ``k = 0``
  is legal and means "no removal".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHO_TOL = 1e-6
UNIT_TOL = 1e-8


def make_group_ids(y_mt: np.ndarray, y_sp: np.ndarray) -> np.ndarray:
    """Map the label pair to group ids 1..4.

    Encoding: (0,0) -> 1, (0,1) -> 2, (1,0) -> 3, (1,1) -> 4.
    """
    y_mt = np.asarray(y_mt)
    y_sp = np.asarray(y_sp)
    if y_mt.shape != y_sp.shape or y_mt.ndim != 1:
        raise ValueError(
            f"label length mismatch: y_mt has shape {y_mt.shape}, y_sp has shape {y_sp.shape}"
        )
    for name, y in (("y_mt", y_mt), ("y_sp", y_sp)):
        if not np.isin(y, (0, 1)).all():
            bad = y[~np.isin(y, (0, 1))][0]
            raise ValueError(f"non-binary entry {bad!r} in {name}")
    return (1 + 2 * y_mt.astype(np.int64) + y_sp.astype(np.int64)).astype(np.int64)


@dataclass(frozen=True)
class LabeledEmbeddings:
    """n x d embedding matrix plus main-task / spurious binary labels."""

    Z: np.ndarray
    y_mt: np.ndarray
    y_sp: np.ndarray
    group: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        Z = np.ascontiguousarray(np.asarray(self.Z, dtype=np.float64))
        if Z.ndim != 2 or Z.shape[0] < 1 or Z.shape[1] < 1:
            raise ValueError(f"Z must be a nonempty 2-d matrix, got shape {np.shape(self.Z)}")
        y_mt = np.asarray(self.y_mt, dtype=np.int64)
        y_sp = np.asarray(self.y_sp, dtype=np.int64)
        if len(y_mt) != Z.shape[0] or len(y_sp) != Z.shape[0]:
            raise ValueError("labels must match the number of rows of Z")
        group = make_group_ids(y_mt, y_sp)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "y_mt", y_mt)
        object.__setattr__(self, "y_sp", y_sp)
        object.__setattr__(self, "group", group)

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def d(self) -> int:
        return self.Z.shape[1]

    def labels(self, target: str) -> np.ndarray:
        if target == "mt":
            return self.y_mt
        if target == "sp":
            return self.y_sp
        raise ValueError(f"target must be 'mt' or 'sp', got {target!r}")

    def with_Z(self, Z: np.ndarray) -> "LabeledEmbeddings":
        """Same labels, different embedding matrix (e.g. after a projection)."""
        return LabeledEmbeddings(Z, self.y_mt, self.y_sp)


@dataclass(frozen=True)
class Direction:
    """A unit vector with the scale and intercept of a 1-d logistic model.

    The model predicts ``sigmoid(gamma * z @ v + b)``.
    """

    v: np.ndarray
    gamma: float
    b: float
    warn: str | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.v, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("v must be a vector")
        if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
            raise ValueError(f"v must be unit-norm within {UNIT_TOL}, got norm {np.linalg.norm(v)}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "b", float(self.b))

    def predict(self, Z: np.ndarray) -> np.ndarray:
        from .sgd import sigmoid

        return sigmoid(self.gamma * (np.asarray(Z) @ self.v) + self.b)


@dataclass(frozen=True)
class SubspaceBasis:
    """d x k matrix of orthonormal columns; kind is 'spurious' or 'main-task'."""

    V: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        V = np.asarray(self.V, dtype=np.float64)
        if V.ndim != 2:
            raise ValueError("V must be a d x k matrix")
        if self.kind not in ("spurious", "main-task"):
            raise ValueError(f"kind must be 'spurious' or 'main-task', got {self.kind!r}")
        if not orthonormal_check(V, ORTHO_TOL):
            raise ValueError(f"basis columns are not orthonormal within {ORTHO_TOL}")
        object.__setattr__(self, "V", V)

    @property
    def k(self) -> int:
        return self.V.shape[1]

    @property
    def d(self) -> int:
        return self.V.shape[0]

    @staticmethod
    def empty(d: int, kind: str) -> "SubspaceBasis":
        return SubspaceBasis(np.zeros((d, 0)), kind)


def orthonormal_check(V: np.ndarray, tol: float) -> bool:
    """True iff max |V^T V - I| <= tol. An empty basis passes trivially."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise ValueError("V must be 2-d")
    k = V.shape[1]
    if k == 0:
        return True
    gram = V.T @ V
    return bool(np.max(np.abs(gram - np.eye(k))) <= tol)


def _check_projection_args(Z: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Z = np.asarray(Z, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if Z.ndim != 2 or V.ndim != 2:
        raise ValueError("Z and V must be 2-d")
    if Z.shape[1] != V.shape[0]:
        raise ValueError(f"dimension mismatch: Z has d={Z.shape[1]} but V has d={V.shape[0]}")
    if not orthonormal_check(V, ORTHO_TOL):
        raise ValueError("V does not have orthonormal columns")
    return Z, V


def project_out(Z: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Project rows of Z onto the orthogonal complement of span(V): Z (I - V V^T)."""
    Z, V = _check_projection_args(Z, V)
    if V.shape[1] == 0:
        return Z.copy()
    return Z - (Z @ V) @ V.T


def project_onto(Z: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Project rows of Z onto span(V): Z V V^T."""
    Z, V = _check_projection_args(Z, V)
    if V.shape[1] == 0:
        return np.zeros_like(Z)
    return (Z @ V) @ V.T
