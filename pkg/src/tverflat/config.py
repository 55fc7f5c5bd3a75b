"""Centralised numeric tolerances."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    orthonormality: float = 1e-12
    subspace_equality: float = 1e-10
    certificate_residual: float = 1e-6
    # relative singular-value floor below which a float dependence is ambiguous
    kernel_ambiguity: float = 1e-10
    # |lambda| below this (after l1 normalisation) counts as zero
    zero_coefficient: float = 1e-12
    condition_number: float = 1e12


DEFAULT_TOLERANCES = Tolerances()
