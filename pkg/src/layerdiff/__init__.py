"""Semi-analytical solver for one-dimensional multilayer diffusion."""
__version__ = "0.1.0"
