"""Synthetic mutation matrices with planted combinations.

Each tumor sample independently receives each planted combination (all of
its genes at once) with the planted rate, then per-gene background noise.
Normal samples carry only iid noise at their own rate.  One seed fixes the
whole matrix; the random stream has constant per-sample length, so edits to
rates never shift which draws later samples see.
"""

import random
from dataclasses import dataclass

from .data import MutationMatrix, SampleLabel, SampleRecord
from .errors import ValidationError


@dataclass(frozen=True)
class SyntheticSpec:
    n_genes: int
    n_tumor: int
    n_normal: int
    planted: tuple = ()
    planted_rate: float = 1.0
    background_rate: float = 0.0
    normal_rate: float = 0.0

    def __post_init__(self):
        if self.n_genes < 1 or self.n_tumor < 0 or self.n_normal < 0:
            raise ValidationError("synthetic sizes must be positive")
        for rate in (self.planted_rate, self.background_rate, self.normal_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValidationError(f"rate {rate} outside [0, 1]")
        object.__setattr__(
            self, "planted", tuple(tuple(c) for c in self.planted)
        )
        for combo in self.planted:
            if not combo:
                raise ValidationError("planted combination cannot be empty")
            if len(set(combo)) != len(combo):
                raise ValidationError(f"planted combination {combo} repeats a gene")
            for g in combo:
                if not 0 <= g < self.n_genes:
                    raise ValidationError(f"planted gene index {g} out of range")


def _ident(prefix, index, count):
    width = max(4, len(str(count)))
    return f"{prefix}{index + 1:0{width}d}"


def generate_synthetic(spec, seed):
    """Build the matrix for ``spec`` from one integer seed."""
    rng = random.Random(seed)
    gene_ids = tuple(_ident("g", i, spec.n_genes) for i in range(spec.n_genes))
    samples = []
    for i in range(spec.n_tumor):
        row = 0
        for combo in spec.planted:
            if rng.random() < spec.planted_rate:
                for g in combo:
                    row |= 1 << g
        for g in range(spec.n_genes):
            if rng.random() < spec.background_rate:
                row |= 1 << g
        samples.append(
            SampleRecord(_ident("t", i, spec.n_tumor), SampleLabel.TUMOR, row)
        )
    for i in range(spec.n_normal):
        row = 0
        for g in range(spec.n_genes):
            if rng.random() < spec.normal_rate:
                row |= 1 << g
        samples.append(
            SampleRecord(_ident("n", i, spec.n_normal), SampleLabel.NORMAL, row)
        )
    return MutationMatrix(gene_ids, samples)
