"""Numerical certification of the weighted integral inequalities behind the decay estimates."""

from .audits import (KernelSample, SeparableSource, check_duhamel_weighted_bounds, check_kernel_bound,
                     check_pointwise_source_bounds, check_source_energy_integral, envelope_field,
                     source_energy_consistency, source_energy_envelope)
from .certify import DomainError, LemmaReport, certify_lemma, evaluate_lemma_lhs
from .quadrature import QuadratureError, TailBoundError, integrate_weak_singular, level
from .registry import REGISTRY, LemmaParams, LemmaSpec, PreconditionError, get_lemma, htilde, lemma_ids

__all__ = [
    "KernelSample",
    "SeparableSource",
    "check_duhamel_weighted_bounds",
    "check_kernel_bound",
    "check_pointwise_source_bounds",
    "check_source_energy_integral",
    "envelope_field",
    "source_energy_consistency",
    "source_energy_envelope",
    "DomainError",
    "LemmaReport",
    "certify_lemma",
    "evaluate_lemma_lhs",
    "QuadratureError",
    "TailBoundError",
    "integrate_weak_singular",
    "level",
    "REGISTRY",
    "LemmaParams",
    "LemmaSpec",
    "PreconditionError",
    "get_lemma",
    "htilde",
    "lemma_ids",
]
