"""Zeros and spectral values of the partial theta function sum_j q^(j(j+1)/2) z^j."""

from __future__ import annotations

from .mpnum import ComplexBox, DomainError, MPComplex, ParseError, PrecisionError, mp
from .theta_core import ThetaJet, eval_jet, eval_theta, eval_triple_product, eval_truncation

__all__ = [
    "ComplexBox",
    "DomainError",
    "MPComplex",
    "ParseError",
    "PrecisionError",
    "ThetaJet",
    "eval_jet",
    "eval_theta",
    "eval_triple_product",
    "eval_truncation",
    "mp",
]

__version__ = "0.1.0"
