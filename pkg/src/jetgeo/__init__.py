"""Geodesics of jet space and their period map via magnetic spaces."""
from .errors import *  # noqa: F401,F403
from .poly import (
    VecPoly, Momentum, PencilMomentum, ThetaCoords, base_poly, from_mu, pencil,
    eval_vecpoly, potential, real_roots, theta_coords, theta_inverse, in_domain,
)

__version__ = "0.1.0"
