"""Genus-2 Jacobians over small finite fields: classification, endomorphism
rings, and elliptic-factor search, with exact arithmetic throughout."""

from .config import CAPS, CapacityError
from .ff import FieldCtx, FqElem, Poly, field, splitting_ctx

__all__ = [
    "CAPS",
    "CapacityError",
    "FieldCtx",
    "FqElem",
    "Poly",
    "field",
    "splitting_ctx",
]
