"""Persona-grounded synthetic digital footprints."""

from .demographics import DemographicDraw, DemographicPrior, load_prior, sample_draw
from .gateway import CostLedger, Gateway, GenerationRequest, PriceTable
from .mock import MockEmbedder, MockProvider
from .persona import PersonaProfile, generate_profile, validate_profile

__version__ = "0.1.0"

__all__ = [
    "CostLedger",
    "DemographicDraw",
    "DemographicPrior",
    "Gateway",
    "GenerationRequest",
    "MockEmbedder",
    "MockProvider",
    "PersonaProfile",
    "PriceTable",
    "generate_profile",
    "load_prior",
    "sample_draw",
    "validate_profile",
]
