"""Aggregate residual checks run by ``qudit-lab selftest``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conjugation_channel import conjugation_fidelity, estimation_bound, optimal_conjugator
from .covariant_povm import (
    REFERENCE_NAMES,
    SeedParams,
    build_seed,
    completeness_residual,
    hermitian_expand,
    reconstruct,
    reference_operator,
)
from .fidelity_engine import f_local, f_parallel, mean_fidelity
from .rng import RngStream
from .symmetric_space import bose_dim, sym_projector, sym_projector_by_permutations
from .tensor_core import hermitian_eigs, jacobi_hermitian_eigs, partial_transpose_second, vec_identity_residuals


@dataclass
class Check:
    name: str
    residual: float
    tol: float

    def __post_init__(self):
        self.residual = float(self.residual)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)


def _cn(rng: RngStream, *shape) -> np.ndarray:
    return rng.complex_normal(shape)


def _herm(rng: RngStream, n: int) -> np.ndarray:
    g = _cn(rng, n, n)
    return g + g.conj().T


def run_selftest(seed: int = 0x5EEDC0DE) -> list[Check]:
    rng = RngStream(seed)
    checks = []

    worst = 0.0
    for _ in range(100):
        m, n, a, b = _cn(rng, 3, 3), _cn(rng, 3, 3), _cn(rng, 3, 3), _cn(rng, 3, 3)
        worst = max(worst, *vec_identity_residuals(m, n, a, b))
    checks.append(Check("vectorisation identities (100 random 3x3)", worst, 1e-12))

    worst = 0.0
    for d in range(2, 5):
        for n in range(1, 5):
            p = sym_projector(d, n)
            worst = max(worst, np.max(np.abs(p @ p - p)), abs(np.trace(p) - bose_dim(d, n)))
    checks.append(Check("P_sym idempotent with trace d[N], (d, N) <= (4, 4)", worst, 1e-12))

    worst = max(
        np.max(np.abs(sym_projector(d, n) - sym_projector_by_permutations(d, n))) for d, n in [(2, 3), (3, 3), (2, 5)]
    )
    checks.append(Check("P_sym equals permutation average", worst, 1e-12))

    worst = 0.0
    for d in (2, 3, 4):
        for _ in range(5):
            x = _herm(rng, d * d)
            worst = max(worst, np.max(np.abs(reconstruct(hermitian_expand(x, d)) - x)))
    checks.append(Check("Hermitian expansion round trip", worst, 1e-12))

    worst = 0.0
    for d in (2, 3, 4):
        for _ in range(10):
            a, rho = _herm(rng, d * d), _herm(rng, d * d)
            lhs = np.trace(a @ partial_transpose_second(rho, d))
            rhs = np.trace(partial_transpose_second(a, d) @ rho)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    checks.append(Check("partial-transpose duality Tr[a rho^PT] = Tr[a^PT rho]", worst, 1e-12))

    worst = 0.0
    for n in (4, 9):
        x = _herm(rng, n)
        w, v = jacobi_hermitian_eigs(x)
        w2, _ = hermitian_eigs(x)
        worst = max(worst, np.max(np.abs(w - w2)), np.max(np.abs(v @ np.diag(w) @ v.conj().T - x)))
    checks.append(Check("Jacobi eigensolver agrees with LAPACK", worst, 1e-10))

    worst = max(
        abs(conjugation_fidelity(optimal_conjugator(d, n)) - estimation_bound(d, n)) for d, n in [(2, 1), (3, 1), (2, 2)]
    )
    checks.append(Check("optimal conjugator saturates (N+1)/(N+d)", worst, 1e-9))

    worst = max(abs(mean_fidelity(reference_operator("case_one_opt", d)) - f_parallel(d)) for d in range(2, 7))
    worst = max(worst, *(abs(mean_fidelity(reference_operator("psi_local", d)) - f_local(d)) for d in range(2, 7)))
    checks.append(Check("moment operator reproduces closed forms", worst, 1e-10))

    worst = 0.0
    for name in REFERENCE_NAMES[:2]:
        for d in range(2, 6):
            worst = max(worst, *completeness_residual(reference_operator(name, d), trials=0)[:2])
    worst = max(worst, *completeness_residual(build_seed(SeedParams(3)), trials=0)[:2])
    checks.append(Check("completeness of optimal reference seeds", worst, 1e-10))
    return checks
