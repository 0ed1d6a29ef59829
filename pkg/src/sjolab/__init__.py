"""Modulation-space norms, symbol calculus and Schatten bounds on a discretized torus."""
from .grid import (FourierCoefficients, GridSpec, SampledFunction, convolve, dft, eval_trig,
                   idft, lp_norm, modulate, pointwise_mul, resample, translate)
from .rng import make_rng

__version__ = "0.1.0"
