"""Lipschitz maps of the unit cube built from simple paths, and their certificates."""
from .certify import (Certificate, ResolutionTooCoarse, certify_displacement, default_resolution,
                      dimension_certificate,
                      game_parameters, parse_certificate)
from .construction import AFPOracle, GridMap, OutOfDomain, PathFunction, build_path_function
from .field import UnsupportedDimension
from .maps import InvalidMixture, afp_dist_query, displacement, estimate_lipschitz, is_eps_fixed_point

__all__ = [
    "AFPOracle", "Certificate", "GridMap", "InvalidMixture", "OutOfDomain", "PathFunction",
    "ResolutionTooCoarse", "UnsupportedDimension", "afp_dist_query", "build_path_function",
    "certify_displacement", "default_resolution", "dimension_certificate", "displacement", "estimate_lipschitz",
    "game_parameters", "is_eps_fixed_point", "parse_certificate",
]
