"""Independent oracles and corpus generators shared by the tests.

These deliberately avoid the production code paths: cycle enumeration is
plain itertools search, and the spectral oracle goes through characteristic
polynomial roots.
"""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np


def enum_max_cycle_mean(a: np.ndarray) -> float:
    """Maximum geometric mean over all simple cycles, by brute enumeration.

    Products are taken directly (not in logs) so this is an independent
    arithmetic path from the production solver. Returns 0.0 for acyclic
    support. Exponential cost; intended for n <= 7.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    best = 0.0
    for k in range(1, n + 1):
        for subset in combinations(range(n), k):
            first = subset[0]
            rest = subset[1:]
            for order in permutations(rest):
                cycle = (first,) + order
                prod = 1.0
                ok = True
                for i in range(k):
                    entry = a[cycle[i], cycle[(i + 1) % k]]
                    if entry <= 0.0:
                        ok = False
                        break
                    prod *= entry
                if ok:
                    best = max(best, prod ** (1.0 / k))
    return best


def char_poly_rho(a: np.ndarray) -> float:
    """Spectral radius via characteristic polynomial roots (companion-matrix
    eigensolve through numpy.roots); independent of the power iteration."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    coeffs = [1.0]
    mk = np.eye(n)
    for k in range(1, n + 1):
        mk = a @ mk
        ck = -np.trace(mk) / k
        coeffs.append(ck)
        mk = mk + ck * np.eye(n)
    roots = np.roots(coeffs)
    return float(np.abs(roots).max()) if roots.size else 0.0


def dense_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.random((n, n))


def sparse_matrix(rng: np.random.Generator, n: int, density: float = 0.4) -> np.ndarray:
    return rng.random((n, n)) * (rng.random((n, n)) < density)


def mixed_corpus(seed: int, count: int, n_min: int = 2, n_max: int = 6) -> list[np.ndarray]:
    """Seeded corpus of dense and sparse nonnegative matrices."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        if k % 2 == 0:
            out.append(dense_matrix(rng, n))
        else:
            out.append(sparse_matrix(rng, n, density=float(rng.uniform(0.2, 0.8))))
    return out


def positive_diagonal(rng: np.random.Generator, n: int, low: float = 0.5, high: float = 2.0) -> np.ndarray:
    return np.exp(rng.uniform(np.log(low), np.log(high), size=n))
