"""Candidate generation: ranking, dedup, determinism, caps."""

import itertools
import random

import pytest

from multihit.candidates import (
    GenerationConfig,
    generate_candidates,
    rank_genes_by_tumor_frequency,
    write_candidates,
)
from multihit.data import HitRange, MutationMatrix, SampleLabel, SampleRecord
from multihit.errors import ValidationError

from util import random_matrix, toy_matrix


def test_ranking_on_toy():
    assert rank_genes_by_tumor_frequency(toy_matrix()) == [0, 1, 2, 3, 6, 4, 5]


def test_ranking_matches_counting_pass():
    rng = random.Random(42)
    for _ in range(20):
        m = random_matrix(rng, 12, 15, 5)
        counts = [0] * m.n_genes
        for pos in m.tumor_positions:
            row = m.samples[pos].mutations
            for g in range(m.n_genes):
                if (row >> g) & 1:
                    counts[g] += 1
        expected = sorted(range(m.n_genes), key=lambda g: (-counts[g], g))
        assert rank_genes_by_tumor_frequency(m) == expected


def test_generation_basic_properties():
    rng = random.Random(1)
    m = random_matrix(rng, 20, 25, 10)
    cfg = GenerationConfig(hit_range=HitRange(2, 3), gamma1=8, gamma2=50, seed=7)
    pool = generate_candidates(m, cfg)
    assert len(pool) == 50
    keys = [c.genes for c in pool]
    assert len(set(keys)) == len(keys)
    top = set(rank_genes_by_tumor_frequency(m)[:8])
    for c in pool:
        assert 2 <= len(c.genes) <= 3
        assert set(c.genes) <= top
        assert c.tumor_cover, c.normal_cover == m.coverage(c.genes)


def test_generation_exhausts_small_space():
    rng = random.Random(2)
    m = random_matrix(rng, 9, 10, 4)
    cfg = GenerationConfig(hit_range=HitRange(2, 2), gamma1=5, gamma2=1000, seed=0)
    pool = generate_candidates(m, cfg)
    assert len(pool) == 10  # all pairs over a 5-gene pool
    assert {c.genes for c in pool} == {
        tuple(sorted(p))
        for p in itertools.combinations(rank_genes_by_tumor_frequency(m)[:5], 2)
    }


def test_generation_determinism():
    rng = random.Random(3)
    m = random_matrix(rng, 15, 20, 8)
    cfg = GenerationConfig(hit_range=HitRange(2, 3), gamma1=10, gamma2=40, seed=11)
    a = generate_candidates(m, cfg)
    b = generate_candidates(m, cfg)
    assert [c.genes for c in a] == [c.genes for c in b]
    other = GenerationConfig(hit_range=HitRange(2, 3), gamma1=10, gamma2=40, seed=12)
    c = generate_candidates(m, other)
    assert [x.genes for x in a] != [x.genes for x in c]


def test_generation_refusals():
    no_tumors = MutationMatrix(
        ["g0", "g1"], [SampleRecord("n0", SampleLabel.NORMAL, 0b11)]
    )
    with pytest.raises(ValidationError):
        generate_candidates(
            no_tumors, GenerationConfig(hit_range=HitRange(1, 1), gamma1=2, gamma2=5)
        )
    rng = random.Random(4)
    m = random_matrix(rng, 3, 5, 2)
    with pytest.raises(ValidationError):
        generate_candidates(
            m, GenerationConfig(hit_range=HitRange(2, 4), gamma1=10, gamma2=5)
        )
    with pytest.raises(ValidationError):
        generate_candidates(
            m, GenerationConfig(hit_range=HitRange(2, 3), gamma1=2, gamma2=5)
        )
    with pytest.raises(ValidationError):
        GenerationConfig(hit_range=HitRange(1, 1), gamma1=0)


def test_attempt_cap_with_stuck_sampler():
    rng = random.Random(5)
    m = random_matrix(rng, 8, 10, 4)
    cfg = GenerationConfig(hit_range=HitRange(2, 2), gamma1=6, gamma2=5, seed=0)
    pool = generate_candidates(
        m,
        cfg,
        gene_sampler=lambda r, genes, k: genes[:k],  # always the same pick
    )
    assert len(pool) == 1


def test_sampler_validation():
    rng = random.Random(6)
    m = random_matrix(rng, 8, 10, 4)
    cfg = GenerationConfig(hit_range=HitRange(2, 2), gamma1=6, gamma2=5, seed=0)
    with pytest.raises(ValidationError):
        generate_candidates(m, cfg, size_sampler=lambda r, lo, hi: hi + 1)
    with pytest.raises(ValidationError):
        generate_candidates(m, cfg, gene_sampler=lambda r, genes, k: [genes[0]] * k)


def test_uncovered_combos_kept_by_default():
    # One tumor with no mutations at all: every combination misses it, and
    # pairs over never-mutated genes cover nothing.
    samples = [
        SampleRecord("t0", SampleLabel.TUMOR, 0b0011),
        SampleRecord("t1", SampleLabel.TUMOR, 0b0000),
        SampleRecord("n0", SampleLabel.NORMAL, 0b1100),
    ]
    m = MutationMatrix(["a", "b", "c", "d"], samples)
    cfg = GenerationConfig(hit_range=HitRange(2, 2), gamma1=4, gamma2=100, seed=1)
    pool = generate_candidates(m, cfg)
    assert len(pool) == 6
    assert any(c.tumor_cover == 0 for c in pool)
    filtered = generate_candidates(m, cfg, drop_uncovered=True)
    assert all(c.tumor_cover for c in filtered)
    assert len(filtered) < len(pool)


def test_write_candidates(tmp_path):
    m = toy_matrix()
    pool = [m.combination((0, 1)), m.combination((2, 3, 6))]
    out = tmp_path / "pool.txt"
    write_candidates(pool, m, out)
    assert out.read_text() == "g1,g2\ng3,g4,g7\n"
