"""Bose (permutation-symmetric) subspace of N qudits."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_FULL_DIM = 10**6
MAX_PERMUTATION_COPIES = 8


def bose_dim(d: int, n: int) -> int:
    """Dimension binomial(N + d - 1, N) of the symmetric subspace."""
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and N >= 0")
    return math.comb(n + d - 1, n)


def compositions(d: int, n: int) -> list[tuple[int, ...]]:
    """Occupation vectors (n_0, ..., n_{d-1}) summing to N, lexicographically descending."""
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int, slots: int) -> None:
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for k in range(remaining, -1, -1):
            rec(prefix + (k,), remaining - k, slots - 1)

    rec((), n, d)
    return out


def _check_size(d: int, n: int) -> None:
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and N >= 0")
    if d**n > MAX_FULL_DIM:
        raise ValueError(f"d^N = {d}^{n} exceeds the dense size guard {MAX_FULL_DIM}")


@dataclass(frozen=True)
class SymBasis:
    d: int
    n: int
    compositions: tuple[tuple[int, ...], ...]
    isometry: np.ndarray  # d^N x d[N]

    @property
    def dim(self) -> int:
        return len(self.compositions)

    def index_of(self, occupation) -> int:
        return self.compositions.index(tuple(occupation))

    def lift(self, x: np.ndarray) -> np.ndarray:
        """Map symmetric coordinates to the full d^N space."""
        return self.isometry @ x

    def compress(self, x: np.ndarray) -> np.ndarray:
        """Symmetric coordinates of a vector (or column stack) in the full space."""
        return self.isometry.conj().T @ x


@lru_cache(maxsize=64)
def _sym_isometry(d: int, n: int) -> SymBasis:
    _check_size(d, n)
    comps = compositions(d, n)
    index = {c: j for j, c in enumerate(comps)}
    v = np.zeros((d**n, len(comps)))
    for flat, digits in enumerate(itertools.product(range(d), repeat=n)):
        occ = [0] * d
        for digit in digits:
            occ[digit] += 1
        occ_t = tuple(occ)
        weight = math.prod(math.factorial(k) for k in occ_t) / math.factorial(n)
        v[flat, index[occ_t]] = math.sqrt(weight)
    v.setflags(write=False)
    return SymBasis(d, n, tuple(comps), v)


def sym_isometry(d: int, n: int) -> SymBasis:
    """Orthonormal occupation-number basis of the symmetric subspace.

    The column for occupation ``(n_0, ..., n_{d-1})`` is the normalised sum of
    all distinct orderings of the corresponding computational basis string.
    """
    return _sym_isometry(int(d), int(n))


def sym_projector(d: int, n: int) -> np.ndarray:
    v = sym_isometry(d, n).isometry
    return v @ v.T


def permutation_matrix(d: int, perm) -> np.ndarray:
    """Operator permuting N tensor factors: factor k of the input goes to slot perm[k]."""
    n = len(perm)
    dim = d**n
    idx = np.arange(dim).reshape((d,) * n)
    # output axis perm[k] carries input axis k
    out_idx = np.transpose(idx, np.argsort(perm)).reshape(-1)
    p = np.zeros((dim, dim))
    p[np.arange(dim), out_idx] = 1.0
    return p


def sym_projector_by_permutations(d: int, n: int) -> np.ndarray:
    """(1/N!) sum over all permutation operators; cross-check for ``sym_projector``."""
    _check_size(d, n)
    if n > MAX_PERMUTATION_COPIES:
        raise ValueError(f"permutation average capped at N <= {MAX_PERMUTATION_COPIES}")
    total = np.zeros((d**n, d**n))
    for perm in itertools.permutations(range(n)):
        total += permutation_matrix(d, perm)
    return total / math.factorial(n)


def haar_state_average(d: int, k: int) -> np.ndarray:
    """Exact integral of |phi><phi|^{(x)k} over Haar-random pure states."""
    return sym_projector(d, k) / bose_dim(d, k)
