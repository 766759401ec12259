"""Shared instance builders for the test suite."""

from multihit.data import MutationMatrix, SampleLabel, SampleRecord


def toy_matrix():
    """Seven genes, three tumors, two normals.

    The pair {g1, g2} covers t1, t2 and the normal n1; {g3, g4} covers only
    t2; t3 is reachable by no pair because only one gene is mutated there.
    Best objective with pairs and a selection budget of 2 is 1.
    """
    rows = {
        "t1": 0b0000011,
        "t2": 0b0001111,
        "t3": 0b1000000,
        "n1": 0b0000011,
        "n2": 0b0000100,
    }
    samples = [
        SampleRecord("t1", SampleLabel.TUMOR, rows["t1"]),
        SampleRecord("t2", SampleLabel.TUMOR, rows["t2"]),
        SampleRecord("t3", SampleLabel.TUMOR, rows["t3"]),
        SampleRecord("n1", SampleLabel.NORMAL, rows["n1"]),
        SampleRecord("n2", SampleLabel.NORMAL, rows["n2"]),
    ]
    return MutationMatrix([f"g{i}" for i in range(1, 8)], samples)


def random_matrix(rng, n_genes, n_tumor, n_normal, density=0.35):
    """I.i.d. random instance from a ``random.Random`` source."""
    samples = []
    for i in range(n_tumor):
        row = sum(1 << g for g in range(n_genes) if rng.random() < density)
        samples.append(SampleRecord(f"t{i}", SampleLabel.TUMOR, row))
    for i in range(n_normal):
        row = sum(1 << g for g in range(n_genes) if rng.random() < density)
        samples.append(SampleRecord(f"n{i}", SampleLabel.NORMAL, row))
    return MutationMatrix([f"g{j}" for j in range(n_genes)], samples)
