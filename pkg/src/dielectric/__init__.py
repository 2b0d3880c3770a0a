"""Fractional relaxation models for dielectric spectroscopy."""
from __future__ import annotations

from .models import (
    CMV,
    JWS,
    KWW,
    ColeCole,
    DavidsonCole,
    Debye,
    ExcessWing,
    HavriliakNegami,
    model_from_dict,
    model_to_dict,
    relaxation,
    response,
    spectral,
    susceptibility,
    validate,
)

__all__ = [
    "CMV", "JWS", "KWW", "ColeCole", "DavidsonCole", "Debye", "ExcessWing", "HavriliakNegami",
    "model_from_dict", "model_to_dict", "relaxation", "response", "spectral", "susceptibility",
    "validate",
]
