"""Scalar conservation laws with a flux that switches on the sign of u_x."""

from .errors import GradfluxError
from .flux import Flux, FluxPair, make_flux_pair, parse_flux
from .profile import Bounded, Periodic, Profile, ThetaField

__all__ = [
    "GradfluxError",
    "Flux",
    "FluxPair",
    "make_flux_pair",
    "parse_flux",
    "Bounded",
    "Periodic",
    "Profile",
    "ThetaField",
]
__version__ = "0.1.0"
