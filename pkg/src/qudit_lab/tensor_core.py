"""Dense complex linear algebra for bipartite qudit operators.

Matrices are plain ``numpy`` complex arrays.  Vectorisation follows the
row-major convention ``|A>> = sum_ij A_ij |i>|j>``: the first tensor factor
is the output (row) space of ``A`` and the second is its input space, so
``vec(A) == A.reshape(-1)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .rng import RngStream

HERMITIAN_ATOL = 1e-10


def kron(*mats: np.ndarray) -> np.ndarray:
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def hermiticity_residual(x: np.ndarray) -> float:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        return np.inf
    return float(np.max(np.abs(x - x.conj().T), initial=0.0))


def is_hermitian(x: np.ndarray, atol: float = 1e-12) -> bool:
    return hermiticity_residual(x) <= atol


def ket(index: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def basis_ket(digits: Sequence[int], d: int) -> np.ndarray:
    """Computational basis vector |i1 i2 ...> of ``len(digits)`` qudits."""
    return ket(int(np.ravel_multi_index(tuple(digits), (d,) * len(digits))), d ** len(digits))


def swap_operator(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1.0
    return s


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1)


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return np.asarray(v).reshape(rows, cols)


def partial_transpose_second(x: np.ndarray, d: int) -> np.ndarray:
    """Transpose the second tensor factor of a d^2 x d^2 operator."""
    x = np.asarray(x)
    if x.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} matrix, got {x.shape}")
    return x.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)


def partial_trace(x: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep`` (positions, 0-based)."""
    x = np.asarray(x)
    dims = [int(k) for k in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if x.shape != (total, total):
        raise ValueError(f"matrix shape {x.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} factors")
    t = x.reshape(dims + dims)
    # trace from the highest axis down so lower axis numbers stay valid
    nrow = n
    for ax in reversed(range(n)):
        if ax in keep:
            continue
        t = np.trace(t, axis1=ax, axis2=ax + nrow)
        nrow -= 1
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kd, kd)


def hermitian_eigs(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvector columns of a Hermitian matrix."""
    x = np.asarray(x)
    res = hermiticity_residual(x)
    if res > HERMITIAN_ATOL * max(1.0, float(np.max(np.abs(x), initial=0.0))):
        raise ValueError(f"matrix is not Hermitian (residual {res:.3e})")
    return np.linalg.eigh((x + x.conj().T) / 2)


def min_eig(x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(np.linalg.eigvalsh((x + x.conj().T) / 2)[0])


def max_eig(x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(np.linalg.eigvalsh((x + x.conj().T) / 2)[-1])


def jacobi_hermitian_eigs(
    x: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    The n x n matrix ``H = A + iB`` is embedded as the real symmetric
    ``[[A, -B], [B, A]]``, whose spectrum is that of ``H`` with every
    eigenvalue doubled.  Jacobi rotations are applied until the off-diagonal
    Frobenius norm drops below ``tol * ||H||``; the doubled spectrum is then
    paired back into ``n`` complex eigenvectors.

    Independent of LAPACK and used as a cross-check for ``hermitian_eigs``.
    """
    x = np.asarray(x, dtype=complex)
    if hermiticity_residual(x) > HERMITIAN_ATOL * max(1.0, float(np.max(np.abs(x), initial=0.0))):
        raise ValueError("matrix is not Hermitian")
    n = x.shape[0]
    h = (x + x.conj().T) / 2
    a = np.block([[h.real, -h.imag], [h.imag, h.real]])
    m = 2 * n
    v = np.eye(m)
    scale = max(np.linalg.norm(a), 1e-300)
    converged = False
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if converged or off <= 1e-300:
            break
        # one sweep past the tolerance: convergence is quadratic and the
        # eigenvector error scales like off-norm / eigenvalue gap
        converged = off <= tol * scale
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a)
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    # Each real eigenvector (y; z) gives the complex vector y + iz.  The doubled
    # spectrum comes in clusters of even size 2k whose complex images span a
    # k-dimensional eigenspace; an SVD per cluster extracts an orthonormal basis.
    cand = v[:n, :] + 1j * v[n:, :]
    gap = 1e-9 * scale
    vecs = []
    start = 0
    while start < m:
        stop = start + 1
        while stop < m and w[stop] - w[stop - 1] <= gap:
            stop += 1
        k = max((stop - start) // 2, 1)
        u, _, _ = np.linalg.svd(cand[:, start:stop], full_matrices=False)
        vecs.extend(u[:, j] for j in range(min(k, u.shape[1])))
        start = stop
    vecs_arr = np.column_stack(vecs[:n])
    vals = np.real(np.einsum("ij,ik,kj->j", vecs_arr.conj(), h, vecs_arr))
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs_arr[:, order]


def haar_unitaries(d: int, count: int, rng: RngStream) -> np.ndarray:
    """Stack of ``count`` Haar-random d x d unitaries (Ginibre + QR phase fix)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    z = rng.complex_normal((count, d, d))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def haar_unitary(d: int, rng: RngStream) -> np.ndarray:
    return haar_unitaries(d, 1, rng)[0]


def haar_states(d: int, count: int, rng: RngStream) -> np.ndarray:
    """Rows are Haar-random unit vectors in C^d."""
    z = rng.complex_normal((count, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def vec_identity_residuals(
    m: np.ndarray, n: np.ndarray, a: np.ndarray, b: np.ndarray
) -> tuple[float, float, float, float]:
    """Max-abs residuals of the four vectorisation identities.

    With ``A, B: H1 -> H2`` (shape ``d2 x d1``), ``M`` on H2 and ``N`` on H1:

    * ``(M (x) N)|A>> = |M A N^T>>``
    * ``Tr_H1 |A>><<B| = A B^dag``   (trace over the second factor)
    * ``Tr_H2 |A>><<B| = A^T B^*``   (trace over the first factor)
    * ``Tr[A M1 A^dag M2] = Tr[|A>><<A| (M2 (x) M1^T)]`` with ``M1 = N``, ``M2 = M``
    """
    m, n, a, b = (np.asarray(t) for t in (m, n, a, b))
    d2, d1 = a.shape
    if b.shape != a.shape or m.shape != (d2, d2) or n.shape != (d1, d1):
        raise ValueError("incompatible shapes for vectorisation identities")
    va, vb = vec(a), vec(b)
    r1 = np.max(np.abs(kron(m, n) @ va - vec(m @ a @ n.T)))
    outer = np.outer(va, vb.conj())
    r2 = np.max(np.abs(partial_trace(outer, [d2, d1], keep=[0]) - a @ b.conj().T))
    r3 = np.max(np.abs(partial_trace(outer, [d2, d1], keep=[1]) - a.T @ b.conj()))
    lhs = np.trace(a @ n @ a.conj().T @ m)
    rhs = np.trace(np.outer(va, va.conj()) @ kron(m, n.T))
    r4 = abs(lhs - rhs)
    return float(r1), float(r2), float(r3), float(r4)
