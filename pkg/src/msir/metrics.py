"""Metric spaces: point payloads and pairwise distances.

Two payload families are supported.  Vector payloads carry a space tag
(plain Euclidean, the unit square with opposite edges glued, the unit
sphere, or binary indicator vectors) and admit four distances; symmetric
positive definite (SPD) matrix payloads admit six dissimilarities, of
which the S-divergence and the symmetrized Kullback-Leibler divergence
are not true metrics but are used as kernel inputs all the same.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from . import linalg
from .errors import MsirError


class SpaceTag(str, Enum):
    """Domain of a vector payload; constrains coordinates on construction."""

    EUCLIDEAN = "euclidean"
    TORUS = "torus-unit-square"
    SPHERE = "unit-sphere"
    BINARY = "binary"


class MetricKind(str, Enum):
    """String identifiers for the supported distances (CLI / model files)."""

    EUCLIDEAN = "euclidean"
    TORUS_GEODESIC = "torus_geodesic"
    ARC_LENGTH = "arc_length"
    HAMMING = "hamming"
    SPD_AFFINE = "spd_affine"
    SPD_LOG_EUCLIDEAN = "spd_log_euclidean"
    SPD_S_DIVERGENCE = "spd_s_divergence"
    SPD_SYM_KL = "spd_sym_kl"
    SPD_FROBENIUS = "spd_frobenius"
    SPD_PEARSON = "spd_pearson"


VECTOR_KINDS = frozenset(
    {MetricKind.EUCLIDEAN, MetricKind.TORUS_GEODESIC, MetricKind.ARC_LENGTH, MetricKind.HAMMING}
)
SPD_KINDS = frozenset(set(MetricKind) - VECTOR_KINDS)

# Euclidean distance is defined on every vector payload; the other vector
# distances require the payload that defines them.
_TAGS_FOR_KIND = {
    MetricKind.EUCLIDEAN: frozenset(SpaceTag),
    MetricKind.TORUS_GEODESIC: frozenset({SpaceTag.TORUS}),
    MetricKind.ARC_LENGTH: frozenset({SpaceTag.SPHERE}),
    MetricKind.HAMMING: frozenset({SpaceTag.BINARY}),
}

_UNIT_NORM_TOL = 1e-9
_SPD_SYMMETRY_TOL = 1e-10


def as_metric_kind(kind: Union[str, MetricKind]) -> MetricKind:
    """Coerce a string id to a MetricKind, with a helpful error."""
    if isinstance(kind, MetricKind):
        return kind
    try:
        return MetricKind(kind)
    except ValueError:
        valid = ", ".join(k.value for k in MetricKind)
        raise MsirError(f"unknown metric {kind!r}; valid ids: {valid}") from None


@dataclass(frozen=True, eq=False)
class VectorPoint:
    """A vector payload tagged with the space it lives in.

    Coordinates are validated against the tag on construction: unit-square
    points must lie in [0, 1] per coordinate, sphere points must have unit
    norm to 1e-9, and binary points must be exactly 0/1.
    """

    coords: np.ndarray
    space_tag: SpaceTag = SpaceTag.EUCLIDEAN

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 1 or coords.size == 0:
            raise MsirError(f"coords must be a nonempty 1-d array, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise MsirError("coords must be finite")
        tag = SpaceTag(self.space_tag)
        if tag is SpaceTag.TORUS:
            if np.any(coords < 0.0) or np.any(coords > 1.0):
                raise MsirError("torus-unit-square coordinates must lie in [0, 1]")
        elif tag is SpaceTag.SPHERE:
            norm = float(np.linalg.norm(coords))
            if abs(norm - 1.0) > _UNIT_NORM_TOL:
                raise MsirError(f"unit-sphere point has norm {norm!r}, expected 1 within 1e-9")
        elif tag is SpaceTag.BINARY:
            if not np.all((coords == 0.0) | (coords == 1.0)):
                raise MsirError("binary coordinates must be exactly 0 or 1")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "space_tag", tag)

    @property
    def dim(self) -> int:
        return self.coords.size


@dataclass(frozen=True, eq=False)
class SpdPoint:
    """A symmetric positive definite matrix payload.

    Symmetry is checked entrywise to 1e-10 (relative for large entries) and
    positive definiteness via a Cholesky factorization; failures raise
    rather than being silently repaired.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise MsirError(f"SPD payload must be a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise MsirError("SPD payload must be finite")
        dev = np.abs(m - m.T)
        bound = _SPD_SYMMETRY_TOL * np.maximum(1.0, np.abs(m))
        if np.any(dev > bound):
            i, j = np.unravel_index(int(np.argmax(dev - bound)), m.shape)
            raise MsirError(f"matrix is not symmetric at entry ({i}, {j}): |dev| = {dev[i, j]:.3e}")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise MsirError("matrix is not positive definite (Cholesky failed)") from None
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


Point = Union[VectorPoint, SpdPoint]


def _stack_vector_points(points: Sequence[VectorPoint], kind: MetricKind) -> np.ndarray:
    tags = {p.space_tag for p in points}
    if len(tags) != 1:
        raise MsirError(f"points carry mixed space tags: {sorted(t.value for t in tags)}")
    tag = next(iter(tags))
    if tag not in _TAGS_FOR_KIND[kind]:
        raise MsirError(f"metric {kind.value!r} is not defined on {tag.value!r} points")
    dims = {p.dim for p in points}
    if len(dims) != 1:
        raise MsirError(f"points have mixed dimensions: {sorted(dims)}")
    return np.array([p.coords for p in points])


def _vector_cross(kind: MetricKind, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross-distance matrix between raw coordinate blocks (m,p) and (n,p)."""
    m, n, p = a.shape[0], b.shape[0], a.shape[1]
    out = np.empty((m, n))
    # Row-block the broadcast so (block, n, p) stays modest for wide payloads.
    block = max(1, int(2**22 // max(1, n * p)))
    for start in range(0, m, block):
        stop = min(m, start + block)
        diff = a[start:stop, None, :] - b[None, :, :]
        if kind is MetricKind.EUCLIDEAN:
            out[start:stop] = np.sqrt(np.sum(diff * diff, axis=-1))
        elif kind is MetricKind.TORUS_GEODESIC:
            wrap = np.abs(diff)
            wrap = np.minimum(wrap, 1.0 - wrap)
            out[start:stop] = np.sqrt(np.sum(wrap * wrap, axis=-1))
        elif kind is MetricKind.ARC_LENGTH:
            # arccos of the inner product, evaluated through the chord so
            # that coincident points give exactly zero.
            chord = np.sqrt(np.sum(diff * diff, axis=-1))
            out[start:stop] = 2.0 * np.arcsin(np.minimum(chord / 2.0, 1.0))
        elif kind is MetricKind.HAMMING:
            out[start:stop] = np.sum(diff != 0.0, axis=-1, dtype=float)
        else:  # pragma: no cover
            raise MsirError(f"{kind.value!r} is not a vector metric")
    return out


class _SpdCache:
    """Per-matrix precomputations reused across all pairs of one call."""

    def __init__(self, points: Sequence[SpdPoint], kind: MetricKind):
        mats = [p.matrix for p in points]
        dims = {m.shape[0] for m in mats}
        if len(dims) != 1:
            raise MsirError(f"SPD points have mixed sizes: {sorted(dims)}")
        self.mats = mats
        if kind is MetricKind.SPD_AFFINE:
            self.inv_sqrt = [linalg.spd_power(m, -0.5) for m in mats]
        elif kind is MetricKind.SPD_LOG_EUCLIDEAN:
            self.logs = [linalg.spd_matrix_log(m) for m in mats]
        elif kind is MetricKind.SPD_S_DIVERGENCE:
            self.logdets = [linalg.logdet_spd(m) for m in mats]
        elif kind is MetricKind.SPD_SYM_KL:
            self.invs = [linalg.spd_power(m, -1.0) for m in mats]
            self.logdets = [linalg.logdet_spd(m) for m in mats]
        elif kind is MetricKind.SPD_PEARSON:
            self.normalized = [m / np.linalg.norm(m) for m in mats]


def _spd_pair(kind: MetricKind, ca: _SpdCache, i: int, cb: _SpdCache, j: int,
              kl_centered: bool) -> float:
    if kind is MetricKind.SPD_AFFINE:
        c = ca.inv_sqrt[i]
        s = c @ cb.mats[j] @ c
        w, _ = linalg._spd_eigh(s)
        logs = np.log(w)
        return float(np.sqrt(np.sum(logs * logs)))
    if kind is MetricKind.SPD_LOG_EUCLIDEAN:
        return float(np.linalg.norm(ca.logs[i] - cb.logs[j]))
    if kind is MetricKind.SPD_S_DIVERGENCE:
        mid = (ca.mats[i] + cb.mats[j]) / 2.0
        return float(linalg.logdet_spd(mid) - 0.5 * (ca.logdets[i] + cb.logdets[j]))
    if kind is MetricKind.SPD_SYM_KL:
        h_ij = (float(np.sum(ca.invs[i] * cb.mats[j])) + ca.logdets[i] - cb.logdets[j]) / 2.0
        h_ji = (float(np.sum(cb.invs[j] * ca.mats[i])) + cb.logdets[j] - ca.logdets[i]) / 2.0
        d = (h_ij + h_ji) / 2.0
        if kl_centered:
            d -= ca.mats[i].shape[0] / 2.0
        return d
    if kind is MetricKind.SPD_FROBENIUS:
        return float(np.linalg.norm(ca.mats[i] - cb.mats[j]))
    if kind is MetricKind.SPD_PEARSON:
        return float(np.linalg.norm(ca.normalized[i] - cb.normalized[j]))
    raise MsirError(f"{kind.value!r} is not an SPD metric")  # pragma: no cover


def cross_distances(kind, points_a: Sequence[Point], points_b: Sequence[Point],
                    kl_centered: bool = False) -> np.ndarray:
    """Distance matrix between two point collections, shape (len(a), len(b)).

    Entry (i, j) is always evaluated with the row point as the first
    argument, so a single-row call reproduces the rows of
    :func:`pairwise_distances` bit for bit.
    """
    kind = as_metric_kind(kind)
    if len(points_a) == 0 or len(points_b) == 0:
        raise MsirError("point collections must be nonempty")
    first = points_a[0]
    if kind in VECTOR_KINDS:
        if not all(isinstance(p, VectorPoint) for p in points_a) or not all(
            isinstance(p, VectorPoint) for p in points_b
        ):
            raise MsirError(f"metric {kind.value!r} requires vector points")
        a = _stack_vector_points(points_a, kind)
        b = _stack_vector_points(points_b, kind)
        if a.shape[1] != b.shape[1]:
            raise MsirError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
        return _vector_cross(kind, a, b)
    if not all(isinstance(p, SpdPoint) for p in points_a) or not all(
        isinstance(p, SpdPoint) for p in points_b
    ):
        raise MsirError(f"metric {kind.value!r} requires SPD matrix points")
    cache_a = _SpdCache(points_a, kind)
    cache_b = cache_a if points_b is points_a else _SpdCache(points_b, kind)
    if points_a[0].dim != points_b[0].dim:
        raise MsirError(f"size mismatch: {first.dim} vs {points_b[0].dim}")
    out = np.empty((len(points_a), len(points_b)))
    for i in range(len(points_a)):
        for j in range(len(points_b)):
            out[i, j] = _spd_pair(kind, cache_a, i, cache_b, j, kl_centered)
    return out


def pairwise_distances(kind, points: Sequence[Point], kl_centered: bool = False) -> np.ndarray:
    """Full n x n distance matrix of a point collection.

    Both triangles are computed from the symmetric distance; no shortcuts.
    """
    return cross_distances(kind, points, points, kl_centered=kl_centered)


def vector_distance(kind, x: VectorPoint, y: VectorPoint) -> float:
    """Distance between two vector payloads.

    Supported kinds: ``euclidean`` (any tag), ``torus_geodesic`` (unit
    square with wraparound, per-coordinate min(|delta|, 1-|delta|)),
    ``arc_length`` (great-circle distance on the unit sphere), ``hamming``
    (count of differing coordinates on binary vectors).
    """
    kind = as_metric_kind(kind)
    if kind not in VECTOR_KINDS:
        raise MsirError(f"{kind.value!r} is not a vector metric")
    return float(cross_distances(kind, [x], [y])[0, 0])


def spd_distance(kind, m1: SpdPoint, m2: SpdPoint, kl_centered: bool = False) -> float:
    """Dissimilarity between two SPD matrices.

    Kinds and formulas:

    - ``spd_affine``:        ||Log(M1^{-1/2} M2 M1^{-1/2})||_F
    - ``spd_log_euclidean``: ||Log(M1) - Log(M2)||_F
    - ``spd_s_divergence``:  log|(M1+M2)/2| - (1/2) log|M1 M2|
    - ``spd_sym_kl``:        {h(M1,M2) + h(M2,M1)}/2 with
      h(M1,M2) = {tr(M1^{-1} M2) + log|M1| - log|M2|}/2
    - ``spd_frobenius``:     ||M1 - M2||_F
    - ``spd_pearson``:       ||M1/||M1||_F - M2/||M2||_F||_F

    The symmetrized KL divergence as written has self-dissimilarity p/2 on
    p x p inputs; pass ``kl_centered=True`` to subtract p/2 so coincident
    matrices score zero.
    """
    kind = as_metric_kind(kind)
    if kind not in SPD_KINDS:
        raise MsirError(f"{kind.value!r} is not an SPD metric")
    return float(cross_distances(kind, [m1], [m2], kl_centered=kl_centered)[0, 0])
