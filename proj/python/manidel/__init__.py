"""Delaunay triangulation of manifolds from coordinate patches."""

from ._manidel import (
    Atlas,
    ManidelError,
    Params,
    certify,
    circumball,
    derivation_constant,
    derive_params,
    forbidden_scan,
    gram_min_eigenvalue,
    is_flake,
    is_gamma_good,
    lemma_check,
    practical_params,
    run,
    thickness,
)

__all__ = [
    "Atlas",
    "ManidelError",
    "Params",
    "certify",
    "circumball",
    "derivation_constant",
    "derive_params",
    "forbidden_scan",
    "gram_min_eigenvalue",
    "is_flake",
    "is_gamma_good",
    "lemma_check",
    "practical_params",
    "run",
    "thickness",
]
