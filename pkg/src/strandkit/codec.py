"""Deterministic 64-channel strand codec.

Strands are canonicalized into their root frames (root at the local origin),
mean-centered, and compressed with an orthonormal principal basis.  Latents
are variance-normalized per channel, so equal perturbations of different
channels displace the decoded strand by comparable amounts, and the zero
code decodes to the corpus mean strand.

The codec interface (``encode`` / ``decode`` over a root frame) is what the
rest of the toolkit depends on; any other implementation honoring it can be
swapped in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from strandkit.scalp import FrameSet, RootFrame, ScalpSurface, frames_at_points
from strandkit.strands import Hairstyle, LossConfig, strand_data_loss

LATENT_CHANNELS = 64
DEFAULT_PERTURBATION = 0.8

# Relative floor applied to degenerate trailing scales so encode/decode stays
# defined for corpora whose intrinsic dimension is below the channel count.
_SCALE_FLOOR = 1e-9


@dataclass(frozen=True)
class CodecModel:
    """Linear strand codec: mean strand, orthonormal basis, channel scales.

    ``mean`` is the flattened canonical strand (root-local, root at origin),
    ``basis`` holds one principal direction per row, and ``scales`` are the
    per-channel standard deviations used to normalize latents.
    """

    mean: np.ndarray
    basis: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).ravel()
        basis = np.asarray(self.basis, dtype=np.float64)
        scales = np.asarray(self.scales, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[1] != mean.shape[0]:
            raise ValueError("basis must be (channels, 3L) matching the mean")
        if scales.shape != (basis.shape[0],):
            raise ValueError("scales must have one entry per channel")
        if mean.shape[0] % 3 != 0:
            raise ValueError("mean length must be a multiple of 3")
        if (scales <= 0.0).any():
            raise ValueError("scales must be positive")
        if (np.diff(scales) > 1e-12 * scales[0]).any():
            raise ValueError("scales must be non-increasing")
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-8):
            raise ValueError("basis rows are not orthonormal")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "scales", scales)

    @property
    def channels(self) -> int:
        return self.basis.shape[0]

    @property
    def point_count(self) -> int:
        return self.mean.shape[0] // 3

    def mean_strand(self) -> np.ndarray:
        return self.mean.reshape(-1, 3)


@dataclass(frozen=True)
class ChannelWeights:
    """Normalized per-channel loss weights (non-negative, summing to 1)."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError("weights must be a vector")
        if (w < 0.0).any():
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "w", w)


def canonicalize(hair: Hairstyle, surface: ScalpSurface) -> tuple[np.ndarray, FrameSet]:
    """Express every strand in its root frame; returns ``(N, 3L)`` rows."""
    frames = frames_at_points(surface, hair.roots)
    local = frames.to_local(hair.points)
    return local.reshape(hair.strand_count, -1), frames


def fit_codec(
    corpus: Hairstyle,
    surface: ScalpSurface,
    channels: int = LATENT_CHANNELS,
) -> CodecModel:
    """Fit the linear codec to a strand corpus.

    The corpus must contain at least ``channels + 1`` strands and carry
    nonzero shape variance.  Principal directions are extracted from the
    covariance of the canonicalized strands; reconstruction error is
    non-increasing in the number of channels kept.
    """
    if corpus.strand_count < channels + 1:
        raise ValueError(
            f"corpus of {corpus.strand_count} strands is too small; "
            f"need at least {channels + 1}"
        )
    x, _ = canonicalize(corpus, surface)
    mean = x.mean(axis=0)
    centered = x - mean
    cov = (centered.T @ centered) / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:channels]
    var = np.clip(eigvals[order], 0.0, None)
    if var[0] <= 0.0:
        raise ValueError("corpus has zero shape variance; cannot fit a codec")
    basis = eigvecs[:, order].T
    # Deterministic sign convention: largest-magnitude coefficient positive.
    flips = np.sign(basis[np.arange(channels), np.abs(basis).argmax(axis=1)])
    basis = basis * flips[:, None]
    scales = np.maximum(np.sqrt(var), np.sqrt(var[0]) * _SCALE_FLOOR)
    return CodecModel(mean, basis, scales)


def encode(model: CodecModel, strand, frame: RootFrame) -> np.ndarray:
    """Project a world-space strand onto the codec basis.

    The frame's origin is normally the strand root; encoding is invariant to
    rigid placement as long as the matching frame is supplied.
    """
    pts = np.asarray(strand, dtype=np.float64)
    if pts.shape != (model.point_count, 3):
        raise ValueError(f"strand shape {pts.shape} does not match codec "
                         f"({model.point_count} points)")
    local = frame.to_local(pts).ravel()
    return (model.basis @ (local - model.mean)) / model.scales


def decode(model: CodecModel, z, frame: RootFrame) -> np.ndarray:
    """Reconstruct a world-space strand from a latent code at a root frame.

    ``decode(0)`` is the corpus mean strand placed at the frame, with its
    root exactly at ``frame.origin``.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.channels,):
        raise ValueError(f"latent must have {model.channels} channels, got {z.shape}")
    if not np.isfinite(z).all():
        raise ValueError("latent code contains non-finite values")
    local = model.mean + (z * model.scales) @ model.basis
    return frame.to_world(local.reshape(-1, 3))


def encode_many(model: CodecModel, points: np.ndarray, frames: FrameSet) -> np.ndarray:
    """Vectorized :func:`encode` over ``(N, L, 3)`` strands."""
    local = frames.to_local(points).reshape(points.shape[0], -1)
    return ((local - model.mean) @ model.basis.T) / model.scales


def decode_many(model: CodecModel, z: np.ndarray, frames: FrameSet) -> np.ndarray:
    """Vectorized :func:`decode`; returns ``(N, L, 3)`` world-space strands."""
    z = np.asarray(z, dtype=np.float64)
    local = model.mean + (z * model.scales) @ model.basis
    return frames.to_world(local.reshape(z.shape[0], -1, 3))


def channel_weights(
    model: CodecModel,
    cfg: LossConfig | None = None,
    epsilon: float = DEFAULT_PERTURBATION,
) -> ChannelWeights:
    """Perceptual channel weights from unit latent perturbations.

    Each channel's raw weight is the strand loss between the mean strand and
    the strand decoded from ``epsilon`` on that channel alone; the vector is
    then normalized to sum to 1.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    cfg = cfg or LossConfig()
    frame = RootFrame(np.zeros(3), np.eye(3)[0], np.eye(3)[1], np.eye(3)[2])
    frames = FrameSet(np.zeros((model.channels, 3)),
                      np.broadcast_to(np.eye(3), (model.channels, 3, 3)))
    base = decode(model, np.zeros(model.channels), frame)
    perturbed = decode_many(model, epsilon * np.eye(model.channels), frames)
    raw = strand_data_loss(base[None, :, :], perturbed, cfg)
    total = raw.sum()
    if total <= 0.0:
        raise ValueError("degenerate codec: all channel perturbations decode "
                         "to the mean strand")
    return ChannelWeights(raw / total)
