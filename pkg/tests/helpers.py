import numpy as np


def planted_blobs(seed, n_rows=29, dims=6, k=3, spread=1.0, separation=10.0):
    """Rows split evenly-ish across k blobs; centres pairwise >= separation * spread apart."""
    rng = np.random.default_rng(seed)
    centres = np.zeros((k, dims))
    for j in range(k):
        centres[j, j % dims] = separation * spread * (1 + j // dims)
    labels = np.arange(n_rows) % k
    rng.shuffle(labels)
    X = centres[labels] + rng.normal(0, spread, size=(n_rows, dims)) / np.sqrt(dims)
    return X, labels


def same_partition(a, b):
    a, b = np.asarray(a), np.asarray(b)
    pairs_a = a[:, None] == a[None, :]
    pairs_b = b[:, None] == b[None, :]
    return bool(np.array_equal(pairs_a, pairs_b))
