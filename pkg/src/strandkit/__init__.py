"""strandkit: a strand-based hair toolkit.

Core capabilities:

* fixed-length polyline strands with forward-difference derivatives and a
  weighted position/direction/curvature reconstruction loss (``strands``)
* an analytic ellipsoidal scalp cap with an invertible UV chart (``scalp``)
* procedural grooming: guide interpolation, clumping, curling, noise, and
  scalp collision avoidance with seeded randomization (``groom``)
* a linear 64-channel strand codec with perceptual channel weights (``codec``)
* scalp latent textures: baking, push-pull hole filling, density-driven
  sampling, and full-hairstyle decoding (``texture``)
* elucidated-diffusion numerics: preconditioning, losses, sigma schedules,
  a Heun sampler, and classifier-free guidance plumbing (``diffusion``)
* point-sampled precision/recall/F-score under joint mm/degree thresholds
  (``metrics``)
* binary strand and container file formats plus a batch CLI (``io``, ``cli``)
"""

from strandkit import codec, diffusion, groom, metrics, scalp, strands, texture
from strandkit import io as hair_io

__all__ = [
    "codec",
    "diffusion",
    "groom",
    "hair_io",
    "metrics",
    "scalp",
    "strands",
    "texture",
]

__version__ = "0.1.0"
