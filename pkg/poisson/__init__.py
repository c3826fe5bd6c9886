# Closed-form first-event times of inhomogeneous Poisson clocks
from .models import AffineRate, ExpRate, RateSpec, SuperpositionRate
from .utils import first_event_affine, first_event_exp, first_event_superposition

__all__ = [
    "AffineRate",
    "ExpRate",
    "RateSpec",
    "SuperpositionRate",
    "first_event_affine",
    "first_event_exp",
    "first_event_superposition",
]
