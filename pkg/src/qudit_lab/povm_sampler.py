"""Operational simulation of a continuous covariant POVM.

Outcomes are unitaries ``u`` with density ``p(u) = Tr[rho a_u]`` relative to
Haar measure, where ``a_u = (u(x)u) a0 (u(x)u)^dag`` for parallel inputs and
its partial transpose for conjugate inputs.  Both reduce to
``p(u) = <psi psi| a0 |psi psi>`` with ``psi = u^dag phi``, which is bounded by
the largest eigenvalue of the case's effect; that bound is the rejection
envelope.  The guess for outcome ``u`` is ``u|0>``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .covariant_povm import SeedOperator, _check_case, completeness_residual, envelope
from .rng import RngStream
from .tensor_core import haar_states, haar_unitaries

COMPLETENESS_TOL = 1e-8


@dataclass
class SimulationResult:
    d: int
    case: str
    requested: int  # proposals drawn
    accepted: int
    empirical_fidelity: float
    stderr: float
    acceptance_rate: float
    envelope: float

    def to_dict(self) -> dict:
        return asdict(self)


def _require_complete(s: SeedOperator) -> None:
    r_tr, r_sw, _ = completeness_residual(s, trials=0)
    if max(r_tr, r_sw) > COMPLETENESS_TOL:
        raise ValueError(
            f"seed violates completeness (trace residual {r_tr:.3e}, swap residual {r_sw:.3e}); "
            "outcome density would not normalise"
        )


def outcome_density(s: SeedOperator, case: str, phi: np.ndarray, us: np.ndarray) -> np.ndarray:
    """p(u) for a stack of unitaries and one state (or a matching stack of states).

    The conjugate case evaluates Tr[PT(a_u) (|phi><phi| (x) |phi*><phi*|)]
    directly, so the partial-transpose duality is exercised rather than assumed.
    """
    _check_case(case)
    d = s.d
    us = np.asarray(us)
    phi = np.broadcast_to(np.asarray(phi), (us.shape[0], d))
    psi = np.einsum("sba,sb->sa", us.conj(), phi)  # u^dag phi
    if case == "parallel":
        pair = np.einsum("sa,sb->sab", psi, psi).reshape(-1, d * d)
        return np.real(np.einsum("si,ij,sj->s", pair.conj(), s.matrix, pair))
    # PT(a_u) = (u (x) u*) PT(a0) (u (x) u*)^dag ; input |phi>|phi*>
    chi = np.einsum("sba,sb->sa", us, phi.conj())  # u^T phi* = (u^dag phi)*
    pair = np.einsum("sa,sb->sab", psi, chi).reshape(-1, d * d)
    return np.real(np.einsum("si,ij,sj->s", pair.conj(), s.effect("conjugate"), pair))


def sample_outcome(
    s: SeedOperator, case: str, phi: np.ndarray, rng: RngStream, max_proposals: int = 10**6
) -> np.ndarray:
    """Draw one outcome unitary for input |phi>|phi> or |phi>|phi*>."""
    _require_complete(s)
    lam = envelope(s, case)
    phi = np.asarray(phi, dtype=complex)
    for _ in range(max_proposals):
        u = haar_unitaries(s.d, 1, rng)
        p = outcome_density(s, case, phi, u)[0]
        if rng.uniform(1)[0] * lam < p:
            return u[0]
    raise RuntimeError("rejection sampler exceeded max_proposals")


def _simulate_chunk(s, case, target, lam, rng, batch):
    d = s.d
    proposals = accepted = 0
    total = total_sq = 0.0
    while accepted < target:
        m = max(batch, 16)
        phi = haar_states(d, m, rng)
        us = haar_unitaries(d, m, rng)
        p = outcome_density(s, case, phi, us)
        keep = rng.uniform(m) * lam < p
        idx = np.flatnonzero(keep)[: target - accepted]
        used = (idx[-1] + 1) if len(idx) and accepted + len(idx) == target else m
        proposals += int(used)
        guesses = us[idx, :, 0]
        score = np.abs(np.einsum("sa,sa->s", guesses.conj(), phi[idx])) ** 2
        total += score.sum()
        total_sq += (score * score).sum()
        accepted += len(idx)
    return proposals, accepted, total, total_sq


def simulate(
    s: SeedOperator,
    case: str,
    d: int,
    samples: int,
    rng: RngStream,
    threads: int = 1,
    batch: int = 8192,
) -> SimulationResult:
    """Run trials until ``samples`` outcomes are accepted and score the guesses.

    Each trial draws a Haar |phi>, an outcome ``u`` by rejection, and scores
    ``|<0|u^dag|phi>|^2``.  With ``threads > 1`` the work is split over child
    streams ``rng.split(k)`` and pooled.
    """
    _check_case(case)
    if s.d != d:
        raise ValueError(f"seed dimension {s.d} does not match d = {d}")
    if samples <= 0:
        raise ValueError("samples must be positive")
    _require_complete(s)
    lam = envelope(s, case)
    threads = max(1, int(threads))
    if threads == 1:
        parts = [_simulate_chunk(s, case, samples, lam, rng, batch)]
    else:
        shares = [samples // threads + (k < samples % threads) for k in range(threads)]
        with ThreadPoolExecutor(threads) as pool:
            futs = [
                pool.submit(_simulate_chunk, s, case, n, lam, rng.split(k), batch)
                for k, n in enumerate(shares)
                if n
            ]
            parts = [f.result() for f in futs]
    proposals = sum(p[0] for p in parts)
    accepted = sum(p[1] for p in parts)
    if accepted == 0:
        raise RuntimeError("no outcomes accepted")
    total = sum(p[2] for p in parts)
    total_sq = sum(p[3] for p in parts)
    mean = total / accepted
    var = max(total_sq / accepted - mean * mean, 0.0) * accepted / max(accepted - 1, 1)
    return SimulationResult(
        d=d,
        case=case,
        requested=proposals,
        accepted=accepted,
        empirical_fidelity=float(mean),
        stderr=float(math.sqrt(var / accepted)),
        acceptance_rate=accepted / proposals,
        envelope=lam,
    )
