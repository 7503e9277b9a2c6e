"""Channel-wise GANs with a shared latent and a central discriminator for multivariate time series."""

__version__ = "0.1.0"
