"""Fixed-length strand geometry.

A strand is a polyline of ``L`` 3D points in meters, root first.  A hairstyle
is a set of strands sharing one ``L``, stored densely as an ``(N, L, 3)``
array so that per-strand operators vectorize over the whole head.

The reconstruction loss combines per-point position, direction (forward
difference of positions), and curvature (forward difference of directions)
terms under L1 norms, summed over points and coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

DEFAULT_POINT_COUNT = 256


class StrandDerivatives(NamedTuple):
    """Forward differences of a strand: L-1 directions, L-2 curvatures."""

    directions: np.ndarray
    curvatures: np.ndarray


def as_strand(points) -> np.ndarray:
    """Validate and return strand points as a float64 ``(L, 3)`` array."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[-1] != 3:
        raise ValueError(f"strand must have shape (L, 3), got {pts.shape}")
    if pts.shape[0] < 2:
        raise ValueError("strand needs at least 2 points")
    if not np.isfinite(pts).all():
        raise ValueError("strand contains non-finite coordinates")
    return pts


@dataclass(frozen=True)
class Hairstyle:
    """A non-empty set of strands with identical point counts.

    ``points`` has shape ``(N, L, 3)``; ``points[:, 0]`` are the roots.
    Instances are treated as immutable: operators return new hairstyles.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 3 or pts.shape[-1] != 3:
            raise ValueError(f"hairstyle points must be (N, L, 3), got {pts.shape}")
        if pts.shape[0] == 0:
            raise ValueError("hairstyle must contain at least one strand")
        if pts.shape[1] < 2:
            raise ValueError("strands need at least 2 points")
        if not np.isfinite(pts).all():
            raise ValueError("hairstyle contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_strands(cls, strands: Sequence[np.ndarray]) -> "Hairstyle":
        arrs = [as_strand(s) for s in strands]
        if len({a.shape[0] for a in arrs}) > 1:
            raise ValueError("all strands must share one point count")
        return cls(np.stack(arrs, axis=0))

    @property
    def strand_count(self) -> int:
        return self.points.shape[0]

    @property
    def point_count(self) -> int:
        return self.points.shape[1]

    @property
    def roots(self) -> np.ndarray:
        return self.points[:, 0]

    def __len__(self) -> int:
        return self.strand_count

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.points)


@dataclass(frozen=True)
class LossConfig:
    """Weights for the strand reconstruction loss.

    ``lambda_kl`` is carried for configuration parity with stochastic codecs;
    the deterministic linear codec ignores it.  ``average`` switches each
    term from a sum to a mean over its own elements (default: sums).
    """

    lambda_dir: float = 2e-3
    lambda_cur: float = 7.8e-2
    lambda_kl: float = 6e-4
    average: bool = False

    def __post_init__(self):
        if self.lambda_dir < 0 or self.lambda_cur < 0 or self.lambda_kl < 0:
            raise ValueError("loss weights must be non-negative")


def derivatives(points) -> StrandDerivatives:
    """Forward-difference directions and curvatures of one or more strands.

    Accepts ``(..., L, 3)`` with L >= 3; returns direction vectors
    ``(..., L-1, 3)`` and curvature vectors ``(..., L-2, 3)``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[-2] < 3:
        raise ValueError(f"need at least 3 points for curvatures, got {pts.shape[-2]}")
    dirs = np.diff(pts, axis=-2)
    curs = np.diff(dirs, axis=-2)
    return StrandDerivatives(dirs, curs)


def segment_lengths(points) -> np.ndarray:
    return np.linalg.norm(np.diff(np.asarray(points, float), axis=-2), axis=-1)


def arc_length(points) -> np.ndarray:
    """Total polyline length; scalar for a strand, ``(N,)`` for a batch."""
    return segment_lengths(points).sum(axis=-1)


def resample(points, target_count: int) -> np.ndarray:
    """Resample one strand to ``target_count`` points uniform in arc length.

    Linear interpolation along the polyline; endpoints are copied exactly.
    Raises on degenerate (zero total length) strands.
    """
    pts = as_strand(points)
    if target_count < 2:
        raise ValueError("target_count must be >= 2")
    seg = segment_lengths(pts)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] <= 0.0:
        raise ValueError("cannot resample a zero-length strand")
    s = np.linspace(0.0, cum[-1], target_count)
    out = np.empty((target_count, 3), dtype=np.float64)
    for k in range(3):
        out[:, k] = np.interp(s, cum, pts[:, k])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def resample_many(polylines: Sequence[np.ndarray], target_count: int) -> np.ndarray:
    """Batched arc-length resampling of ragged polylines to ``(N, T, 3)``.

    Equivalent to calling :func:`resample` per strand but vectorized; used to
    normalize imported or artist guides to the canonical point count.
    """
    if target_count < 2:
        raise ValueError("target_count must be >= 2")
    n = len(polylines)
    if n == 0:
        raise ValueError("no polylines given")
    counts = np.array([np.shape(p)[0] for p in polylines])
    if (counts < 2).any():
        raise ValueError("every polyline needs at least 2 points")
    lmax = int(counts.max())
    pts = np.empty((n, lmax, 3), dtype=np.float64)
    for i, p in enumerate(polylines):
        a = np.asarray(p, dtype=np.float64)
        c = counts[i]
        pts[i, :c] = a
        pts[i, c:] = a[-1]  # pad with the tip: zero-length tail segments
    if not np.isfinite(pts).all():
        raise ValueError("polylines contain non-finite coordinates")

    seg = segment_lengths(pts)
    cum = np.concatenate([np.zeros((n, 1)), np.cumsum(seg, axis=1)], axis=1)
    total = cum[:, -1]
    if (total <= 0.0).any():
        bad = np.nonzero(total <= 0.0)[0][:8].tolist()
        raise ValueError(f"zero-length polylines at indices {bad}")

    s = total[:, None] * np.linspace(0.0, 1.0, target_count)[None, :]
    # Row-offset trick: one global searchsorted over all strands at once.
    # Offsets are exact integers; boundary misplacements land on a shared
    # vertex of the polyline, so interpolation stays continuous.
    offset = (np.arange(n, dtype=np.float64) * 2.0 + 1.0)[:, None] * max(total.max(), 1.0)
    j = np.searchsorted((cum + offset).ravel(), (s + offset).ravel(), side="right") - 1
    j = j.reshape(n, target_count) - np.arange(n)[:, None] * cum.shape[1]
    j = np.clip(j, 0, lmax - 2)

    rows = np.arange(n)[:, None]
    seg_j = seg[rows, j]
    t = np.where(seg_j > 0.0, (s - cum[rows, j]) / np.where(seg_j > 0.0, seg_j, 1.0), 0.0)
    p0 = pts[rows, j]
    out = p0 + t[..., None] * (pts[rows, j + 1] - p0)
    out[:, 0] = pts[:, 0]
    out[:, -1] = pts[:, -1]
    return out


def strand_data_loss(gt, pred, cfg: LossConfig | None = None):
    """Weighted L1 distance between strands over positions, directions,
    and curvatures.

    Accepts ``(..., L, 3)`` pairs with matching L; returns a scalar for
    single strands or an array over leading axes.  Symmetric, non-negative,
    zero only for identical strands, and positively homogeneous of degree 1
    in the coordinates.
    """
    cfg = cfg or LossConfig()
    a = np.asarray(gt, dtype=np.float64)
    b = np.asarray(pred, dtype=np.float64)
    if a.shape[-2:] != b.shape[-2:]:
        raise ValueError(f"strand shapes differ: {a.shape[-2:]} vs {b.shape[-2:]}")
    if a.shape[-2] < 3:
        raise ValueError("loss needs at least 3 points per strand")

    diff = a - b
    pos = np.abs(diff).sum(axis=(-2, -1))
    ddiff = np.diff(diff, axis=-2)
    dirs = np.abs(ddiff).sum(axis=(-2, -1))
    curs = np.abs(np.diff(ddiff, axis=-2)).sum(axis=(-2, -1))
    if cfg.average:
        L = a.shape[-2]
        pos = pos / (L * 3)
        dirs = dirs / ((L - 1) * 3)
        curs = curs / ((L - 2) * 3)
    return pos + cfg.lambda_dir * dirs + cfg.lambda_cur * curs
