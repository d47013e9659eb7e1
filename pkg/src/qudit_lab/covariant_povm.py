"""Seed operators of covariant two-copy POVMs.

A covariant POVM is the continuous family ``a_u = u(x)u a0 (u(x)u)^dag``
generated by a seed ``a0`` acting on C^d (x) C^d.  This module builds the
four-parameter seed family invariant under the stabiliser of |00>, checks
completeness through the exact two-copy twirl, and measures positivity for
parallel inputs |phi>|phi> (``a0 >= 0``) and conjugate inputs |phi>|phi*>
(``PT(a0) >= 0``, partial transpose on the second factor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .rng import RngStream, as_stream
from .tensor_core import (
    haar_unitaries,
    haar_unitary,
    hermiticity_residual,
    kron,
    max_eig,
    min_eig,
    partial_transpose_second,
    swap_operator,
)

Case = Literal["parallel", "conjugate"]
CASES: tuple[str, ...] = ("parallel", "conjugate")

# Coefficient of T3_mn (x) T3_mn inside the SU(d-1) Casimir term.
#   "invariant": 2/(d-1), the value that makes the term commute with the
#                stabiliser (the Casimir proper);
#   "printed":   2/(d-2), the literal alternative; not stabiliser-invariant
#                for d >= 3 once delta != 0.
CasimirConvention = Literal["invariant", "printed"]
DEFAULT_CASIMIR: CasimirConvention = "invariant"


def _check_case(case: str) -> str:
    if case not in CASES:
        raise ValueError(f"case must be one of {CASES}, got {case!r}")
    return case


@dataclass(frozen=True)
class SeedParams:
    d: int
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.d == 2 and self.delta != 0:
            raise ValueError("delta must be 0 for d = 2 (the SU(d-1) sum is empty)")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta])

    @classmethod
    def from_array(cls, d: int, x) -> "SeedParams":
        a, b, g, dl = (float(v) for v in x)
        return cls(d, a, b, g, dl if d > 2 else 0.0)


@dataclass
class GeneratorSet:
    d: int
    t3: np.ndarray
    t1: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    t2: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    t3_pair: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    @property
    def gamma_pairs(self) -> list[tuple[int, int]]:
        return [(0, m) for m in range(1, self.d)]

    @property
    def delta_pairs(self) -> list[tuple[int, int]]:
        return [(m, n) for m in range(1, self.d) for n in range(m + 1, self.d)]


@dataclass
class SeedOperator:
    d: int
    matrix: np.ndarray
    params: SeedParams | None = None
    name: str | None = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.d**2, self.d**2):
            raise ValueError(f"seed must be {self.d**2}x{self.d**2}")
        if hermiticity_residual(self.matrix) > 1e-10:
            raise ValueError("seed operator must be Hermitian")

    def effect(self, case: str) -> np.ndarray:
        """The operator that must be PSD and is measured on the case's input."""
        if _check_case(case) == "parallel":
            return self.matrix
        return partial_transpose_second(self.matrix, self.d)


def _unit(d: int, m: int, n: int) -> np.ndarray:
    e = np.zeros((d, d), dtype=complex)
    e[m, n] = 1.0
    return e


def build_generators(d: int) -> GeneratorSet:
    if d < 2:
        raise ValueError("d must be >= 2")
    t3 = np.diag([1.0 - d] + [1.0] * (d - 1)).astype(complex)
    gens = GeneratorSet(d, t3)
    for m in range(d):
        for n in range(m + 1, d):
            gens.t1[m, n] = _unit(d, m, n) + _unit(d, n, m)
            gens.t2[m, n] = -1j * _unit(d, m, n) + 1j * _unit(d, n, m)
            gens.t3_pair[m, n] = _unit(d, m, m) - _unit(d, n, n)
    return gens


def casimir_coefficient(d: int, convention: CasimirConvention = DEFAULT_CASIMIR) -> float:
    if d == 2:
        return 0.0
    if convention == "invariant":
        return 2.0 / (d - 1)
    if convention == "printed":
        return 2.0 / (d - 2)
    raise ValueError(f"unknown Casimir convention {convention!r}")


def seed_terms(d: int, convention: CasimirConvention = DEFAULT_CASIMIR) -> np.ndarray:
    """The four operators multiplying alpha, beta, gamma, delta (stacked)."""
    g = build_generators(d)
    eye = np.eye(d)
    t_alpha = kron(g.t3, eye) + kron(eye, g.t3)
    t_beta = kron(g.t3, g.t3)
    t_gamma = sum(kron(g.t1[p], g.t1[p]) + kron(g.t2[p], g.t2[p]) for p in g.gamma_pairs)
    c = casimir_coefficient(d, convention)
    t_delta = np.zeros((d * d, d * d), dtype=complex)
    for p in g.delta_pairs:
        t_delta += kron(g.t1[p], g.t1[p]) + kron(g.t2[p], g.t2[p]) + c * kron(g.t3_pair[p], g.t3_pair[p])
    return np.stack([t_alpha, t_beta, t_gamma, t_delta])


def build_seed(p: SeedParams, convention: CasimirConvention = DEFAULT_CASIMIR) -> SeedOperator:
    """a0 = I + alpha(T3(x)I + I(x)T3) + beta T3(x)T3 + gamma sum_m [..] + delta sum_{m<n} [..]."""
    terms = seed_terms(p.d, convention)
    mat = np.eye(p.d**2, dtype=complex) + np.tensordot(p.as_array(), terms, axes=1)
    return SeedOperator(p.d, mat, p)


def twirl_coefficients(x: np.ndarray, d: int) -> tuple[float, float]:
    """(a, b) with  int du (u(x)u) X (u(x)u)^dag = a I + b SWAP."""
    x = np.asarray(x)
    tr = np.trace(x).real
    trs = np.trace(x @ swap_operator(d)).real
    a = (tr - trs / d) / (d * d - 1)
    b = (trs - tr / d) / (d * d - 1)
    return a, b


def exact_twirl(x: np.ndarray, d: int) -> np.ndarray:
    a, b = twirl_coefficients(x, d)
    return a * np.eye(d * d) + b * swap_operator(d)


def mc_twirl(x: np.ndarray, d: int, trials: int, rng: RngStream) -> np.ndarray:
    us = haar_unitaries(d, trials, rng)
    uu = np.einsum("tab,tcd->tacbd", us, us).reshape(trials, d * d, d * d)
    return np.einsum("tij,jk,tlk->il", uu, x, uu.conj()) / trials


def completeness_residual(
    s: SeedOperator, trials: int = 2000, rng: RngStream | int | None = None
) -> tuple[float, float, float]:
    """(|Tr a0 - d^2|, |Tr[a0 SWAP] - d|, max-abs(MC twirl - exact twirl)).

    The first two vanish exactly when the covariant family integrates to the
    identity.  The third is a sampling check of the twirl structure and is
    O(1/sqrt(trials)).
    """
    d = s.d
    r_trace = abs(np.trace(s.matrix).real - d * d)
    r_swap = abs(np.trace(s.matrix @ swap_operator(d)).real - d)
    r_mc = 0.0
    if trials > 0:
        stream = as_stream(rng, default_seed=0xC0FFEE)
        r_mc = float(np.max(np.abs(mc_twirl(s.matrix, d, trials, stream) - exact_twirl(s.matrix, d))))
    return float(r_trace), float(r_swap), r_mc


def positivity_margin(s: SeedOperator, case: str) -> float:
    """Smallest eigenvalue of the effect measured on the case's input pair."""
    return min_eig(s.effect(case))


def envelope(s: SeedOperator, case: str) -> float:
    return max_eig(s.effect(case))


# ---------------------------------------------------------------------------
# Hermitian expansion over {I, lambda_m} (x) {I, lambda_n}


def gell_mann_basis(d: int) -> list[np.ndarray]:
    """Generalised Gell-Mann matrices with Tr[l_a l_b] = 2 delta_ab (d^2 - 1 of them)."""
    mats = []
    for m in range(d):
        for n in range(m + 1, d):
            mats.append(_unit(d, m, n) + _unit(d, n, m))
            mats.append(-1j * _unit(d, m, n) + 1j * _unit(d, n, m))
    for k in range(1, d):
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        mats.append(np.diag(diag * math.sqrt(2.0 / (k * (k + 1)))).astype(complex))
    return mats


@dataclass
class HermitianExpansion:
    d: int
    w: float
    r: np.ndarray  # lambda_m (x) I
    s: np.ndarray  # I (x) lambda_m
    t: np.ndarray  # lambda_m (x) lambda_n


def hermitian_expand(x: np.ndarray, d: int) -> HermitianExpansion:
    x = np.asarray(x)
    if x.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} matrix")
    if hermiticity_residual(x) > 1e-10:
        raise ValueError("hermitian_expand needs a Hermitian operator")
    lam = np.stack(gell_mann_basis(d))
    # Tr[(A(x)B)(C(x)D)] = Tr[AC] Tr[BD]; norms: Tr[I]=d, Tr[l^2]=2
    x4 = x.reshape(d, d, d, d)
    w = np.einsum("ikik->", x4).real / d**2
    r = np.einsum("mji,ikjk->m", lam, x4).real / (2 * d)
    s = np.einsum("mlk,ikil->m", lam, x4).real / (2 * d)
    t = np.einsum("mji,nlk,ikjl->mn", lam, lam, x4).real / 4
    return HermitianExpansion(d, float(w), r, s, t)


def reconstruct(e: HermitianExpansion) -> np.ndarray:
    d = e.d
    lam = np.stack(gell_mann_basis(d))
    eye = np.eye(d)
    out = e.w * np.eye(d * d, dtype=complex)
    out += kron(np.tensordot(e.r, lam, axes=1), eye)
    out += kron(eye, np.tensordot(e.s, lam, axes=1))
    out += np.einsum("mn,mab,ncd->acbd", e.t, lam, lam).reshape(d * d, d * d)
    return out


# ---------------------------------------------------------------------------
# Stabiliser covariance


def stabilizer_unitary(d: int, rng: RngStream) -> np.ndarray:
    """diag(e^{i theta}) (+) U' with U' Haar on C^{d-1} and det U' = e^{-i theta}."""
    u = np.zeros((d, d), dtype=complex)
    block = haar_unitary(d - 1, rng)
    theta = -np.angle(np.linalg.det(block))
    u[0, 0] = np.exp(1j * theta)
    u[1:, 1:] = block
    return u


def stabilizer_covariance_residual(
    x: np.ndarray, d: int, trials: int = 50, rng: RngStream | int | None = None
) -> float:
    """max over sampled stabiliser unitaries of ||[X, u (x) u]|| (spectral norm)."""
    x = np.asarray(x)
    stream = as_stream(rng, default_seed=0x57AB)
    worst = 0.0
    for _ in range(trials):
        u = stabilizer_unitary(d, stream)
        uu = kron(u, u)
        worst = max(worst, float(np.linalg.norm(x @ uu - uu @ x, 2)))
    return worst


# ---------------------------------------------------------------------------
# Reference operators


def a_plus(d: int) -> float:
    return 2 * d + math.sqrt(2 * d * (d + 1))


def a_minus(d: int) -> float:
    return 2 * d - math.sqrt(2 * d * (d + 1))


def psi_local_vector(d: int) -> np.ndarray:
    root = math.sqrt(1 + d)
    v = np.zeros(d * d, dtype=complex)
    v[0] = (d - 1) * root + 1
    for i in range(1, d):
        v[i * d + i] = -(root - 1)
    return v / math.sqrt(d)


def psi_perp_vector(d: int) -> np.ndarray:
    ap = a_plus(d)
    v = np.zeros(d * d, dtype=complex)
    v[0] = math.sqrt(d * ap / 2)
    for i in range(1, d):
        v[i * d + i] = -math.sqrt(d / (2 * ap))
    return v


REFERENCE_NAMES = ("case_one_opt", "psi_local", "psi_perp")


def reference_operator(name: str, d: int) -> SeedOperator:
    """Explicit optimal seeds.

    ``case_one_opt``: (d(d+1)/2)|00><00| + (d/2) sum_i |psi_i><psi_i|,
    psi_i = (|0i> - |i0>)/sqrt2, the optimal parallel-pair seed.

    ``psi_local``: seed whose partial transpose is the rank-one projector on
    psi_local (conjugate-pair local optimum).

    ``psi_perp``: seed whose partial transpose is
    (d/(2A+)) sum_{i,j>=1} |ij><ij| + |psi_perp><psi_perp|, as written.  It
    does not satisfy the completeness conditions (see ``completeness_residual``).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if name == "case_one_opt":
        mat = np.zeros((d * d, d * d), dtype=complex)
        mat[0, 0] = d * (d + 1) / 2
        for i in range(1, d):
            psi = np.zeros(d * d, dtype=complex)
            psi[i] = 1 / math.sqrt(2)  # |0i>
            psi[i * d] = -1 / math.sqrt(2)  # |i0>
            mat += (d / 2) * np.outer(psi, psi.conj())
        params = SeedParams(d, -0.75, 0.5, -d / 8, 0.0)
        return SeedOperator(d, mat, params, name)
    if name == "psi_local":
        v = psi_local_vector(d)
        pt = np.outer(v, v.conj())
        return SeedOperator(d, partial_transpose_second(pt, d), None, name)
    if name == "psi_perp":
        v = psi_perp_vector(d)
        pt = np.outer(v, v.conj())
        for i in range(1, d):
            for j in range(1, d):
                k = i * d + j
                pt[k, k] += d / (2 * a_plus(d))
        return SeedOperator(d, partial_transpose_second(pt, d), None, name)
    raise ValueError(f"unknown reference operator {name!r}; choose from {REFERENCE_NAMES}")


def fit_seed_params(
    x: np.ndarray, d: int, convention: CasimirConvention = DEFAULT_CASIMIR
) -> tuple[SeedParams, float]:
    """Least-squares (alpha, beta, gamma, delta) for X - I; returns params and residual norm."""
    terms = seed_terms(d, convention)
    k = 4 if d > 2 else 3
    a = terms[:k].reshape(k, -1).T
    b = (np.asarray(x) - np.eye(d * d)).reshape(-1)
    a_ri = np.concatenate([a.real, a.imag])
    b_ri = np.concatenate([b.real, b.imag])
    coef, *_ = np.linalg.lstsq(a_ri, b_ri, rcond=None)
    coef = np.concatenate([coef, np.zeros(4 - k)])
    p = SeedParams.from_array(d, coef)
    resid = float(np.max(np.abs(build_seed(p, convention).matrix - x)))
    return p, resid
