"""Channels from N symmetric qudit copies to one qudit, and how well they conjugate.

A channel is stored by Kraus operators in symmetric coordinates: each
``A_mu`` is ``d x d[N]`` and acts on the occupation-number basis of
``sym_isometry(d, N)``.  Trace preservation is then ``sum A^dag A = I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngStream
from .symmetric_space import bose_dim, sym_isometry, sym_projector
from .tensor_core import haar_states, hermitian_eigs, min_eig

TP_ATOL = 1e-10
KRAUS_EIG_CUTOFF = 1e-12


@dataclass
class KrausChannel:
    d: int
    n: int
    kraus: list[np.ndarray]

    def __post_init__(self):
        self.kraus = [np.asarray(k, dtype=complex) for k in self.kraus]
        if not self.kraus:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = (self.d, bose_dim(self.d, self.n))
        for k in self.kraus:
            if k.shape != shape:
                raise ValueError(f"Kraus operator has shape {k.shape}, expected {shape}")

    @property
    def stacked(self) -> np.ndarray:
        return np.stack(self.kraus)

    def lifted(self) -> np.ndarray:
        """Kraus operators as d x d^N maps on the full tensor-power space."""
        v = sym_isometry(self.d, self.n).isometry
        return np.stack([k @ v.T for k in self.kraus])

    def apply(self, rho_sym: np.ndarray) -> np.ndarray:
        """Output state for an input given in symmetric coordinates."""
        return sum(k @ rho_sym @ k.conj().T for k in self.kraus)

    def apply_full(self, rho: np.ndarray) -> np.ndarray:
        """Output state for an input operator on the full d^N space."""
        v = sym_isometry(self.d, self.n).isometry
        return self.apply(v.T @ rho @ v)


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """sum_mu |A_mu>><<A_mu| with the output factor first, size (d d[N])^2."""
    vecs = ch.stacked.reshape(len(ch.kraus), -1)
    return vecs.T @ vecs.conj()


def kraus_from_choi(choi: np.ndarray, d: int, n: int) -> KrausChannel:
    """Kraus operators from a Choi matrix in symmetric input coordinates.

    Eigenpairs below ``KRAUS_EIG_CUTOFF`` are dropped; if the result misses
    trace preservation by more than ``TP_ATOL`` it is corrected by
    ``A <- A S^{-1/2}`` with ``S = sum A^dag A``.
    """
    ds = bose_dim(d, n)
    w, v = hermitian_eigs(choi)
    kraus = [np.sqrt(lam) * v[:, j].reshape(d, ds) for j, lam in enumerate(w) if lam > KRAUS_EIG_CUTOFF]
    s = sum(k.conj().T @ k for k in kraus)
    if np.linalg.norm(s - np.eye(ds)) > TP_ATOL:
        sw, sv = hermitian_eigs(s)
        s_inv_half = (sv / np.sqrt(sw)) @ sv.conj().T
        kraus = [k @ s_inv_half for k in kraus]
    return KrausChannel(d, n, kraus)


def validate_channel(ch: KrausChannel) -> tuple[float, float]:
    """(trace-preservation residual, complete-positivity residual)."""
    ds = bose_dim(ch.d, ch.n)
    s = sum(k.conj().T @ k for k in ch.kraus)
    tp = float(np.linalg.norm(s - np.eye(ds)))
    cp = max(0.0, -min_eig(choi_matrix(ch)))
    return tp, cp


def conjugation_fidelity(ch: KrausChannel) -> float:
    """Exact Haar-averaged overlap between the channel output and |phi*>.

    Averaging |phi><phi|^{(x)N+1} gives the symmetric projector over
    ``d[N+1]``, so the fidelity is
    ``sum_mu <<A*_mu| P_sym^{(N+1)} |A*_mu>> / d[N+1]`` with each ``A_mu``
    lifted to ``d x d^N`` first.
    """
    tp, _ = validate_channel(ch)
    if tp > 1e-8:
        raise ValueError(f"channel is not trace preserving (residual {tp:.3e})")
    vecs = ch.lifted().conj().reshape(len(ch.kraus), -1)
    p = sym_projector(ch.d, ch.n + 1)
    total = np.einsum("ki,ij,kj->", vecs.conj(), p, vecs)
    return float(total.real) / bose_dim(ch.d, ch.n + 1)


def _tensor_power_rows(states: np.ndarray, n: int) -> np.ndarray:
    out = states
    for _ in range(n - 1):
        out = np.einsum("si,sj->sij", out, states).reshape(states.shape[0], -1)
    return out


def conjugation_fidelity_mc(
    ch: KrausChannel, samples: int, rng: RngStream, batch: int = 20000
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the conjugation fidelity."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    v = sym_isometry(ch.d, ch.n).isometry
    kraus = ch.stacked
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        phi = haar_states(ch.d, m, rng)
        coords = _tensor_power_rows(phi, ch.n) @ v  # symmetric coordinates (V real)
        out = np.einsum("kab,sb->ska", kraus, coords)
        # <phi*| A |phi^N> = sum_a phi_a (A c)_a
        amp = np.einsum("sa,ska->sk", phi, out)
        f = np.sum(np.abs(amp) ** 2, axis=1)
        total += f.sum()
        total_sq += (f * f).sum()
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return float(mean), float(np.sqrt(var / samples))


def estimation_bound(d: int, n: int) -> float:
    """Best mean fidelity for estimating a qudit state from N copies: (N+1)/(N+d)."""
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and N >= 1")
    return (n + 1) / (n + d)


def optimal_conjugator(d: int, n: int) -> KrausChannel:
    """Channel whose conjugated Choi matrix is ((N+1)/(N+d)) P_sym^{(N+1)}.

    Every conjugated Kraus vector then lies in the symmetric subspace of
    N+1 copies, which is exactly when the fidelity bound is attained.
    """
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and N >= 1")
    if d ** (n + 1) > 4096:
        raise ValueError(f"d^(N+1) = {d ** (n + 1)} too large for the dense construction")
    conj_choi = estimation_bound(d, n) * sym_projector(d, n + 1)
    w, vecs = hermitian_eigs(conj_choi)
    iso = sym_isometry(d, n).isometry
    kraus = []
    for j, lam in enumerate(w):
        if lam <= KRAUS_EIG_CUTOFF:
            continue
        a_conj = np.sqrt(lam) * vecs[:, j].reshape(d, d**n)
        kraus.append(a_conj.conj() @ iso)
    return KrausChannel(d, n, kraus)


def random_channel(d: int, n: int, kraus_count: int, rng: RngStream) -> KrausChannel:
    """Random CPTP map from a Haar-like isometry into output (x) environment."""
    if kraus_count < 1:
        raise ValueError("kraus_count must be >= 1")
    ds = bose_dim(d, n)
    rows = d * kraus_count
    if rows < ds:
        raise ValueError(f"need d * kraus_count >= d[N] = {ds} for an isometry")
    z = rng.complex_normal((rows, ds))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    w = q * (diag / np.abs(diag))[None, :]
    # row index = a * kraus_count + mu  (output a, environment mu)
    w = w.reshape(d, kraus_count, ds)
    return KrausChannel(d, n, [w[:, mu, :] for mu in range(kraus_count)])


def constant_channel(d: int, n: int, state: np.ndarray) -> KrausChannel:
    """Replace every input by the fixed output ``state``."""
    ds = bose_dim(d, n)
    w, v = hermitian_eigs(np.asarray(state, dtype=complex))
    kraus = []
    for j, lam in enumerate(w):
        if lam <= KRAUS_EIG_CUTOFF:
            continue
        for b in range(ds):
            k = np.zeros((d, ds), dtype=complex)
            k[:, b] = np.sqrt(lam) * v[:, j]
            kraus.append(k)
    return KrausChannel(d, n, kraus)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(d, 1, [np.eye(d)])
