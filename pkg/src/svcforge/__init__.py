"""svcforge: desk-scale singing voice conversion toolkit.

Feature extraction (mel, loudness, F0), information perturbation,
speaker pitch conversion, diffusion-model machinery with classifier-free
guidance, contrastive objectives, and corpus composition tooling.
"""

__version__ = "0.1.0"
