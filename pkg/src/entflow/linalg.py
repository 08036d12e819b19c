"""Small dense complex linear algebra helpers shared by the whole package.

Vectors and matrices are plain complex ndarrays.  Everything here is
desk-scale: dimensions are tiny, so clarity and numerical robustness win
over performance.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-9


def as_vector(v) -> np.ndarray:
    """Coerce to a 1-d complex array."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise ValueError(f"expected a vector, got shape {arr.shape}")
    return arr


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {arr.shape}")
    return arr


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m, dtype=complex)).T


def transpose(m: np.ndarray) -> np.ndarray:
    return np.asarray(m, dtype=complex).T


def conj(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m, dtype=complex))


def prop_eq(u, v, tol: float = DEFAULT_TOL) -> bool:
    """True iff u = c*v for some nonzero complex c, within elementwise tol.

    Both objects are scaled so their entry of largest magnitude becomes 1
    before comparison, which makes the tolerance scale- and phase-free.
    The zero object is proportional only to the zero object.
    """
    ua = np.asarray(u, dtype=complex)
    va = np.asarray(v, dtype=complex)
    if ua.shape != va.shape:
        raise ValueError(f"shape mismatch: {ua.shape} vs {va.shape}")
    uf = ua.reshape(-1)
    vf = va.reshape(-1)
    unorm = np.max(np.abs(uf)) if uf.size else 0.0
    vnorm = np.max(np.abs(vf)) if vf.size else 0.0
    if unorm == 0.0 or vnorm == 0.0:
        return unorm == vnorm
    # Pick one pivot index for both so exact multiples cancel exactly.
    idx = int(np.argmax(np.abs(uf) * np.abs(vf)))
    if abs(uf[idx]) <= tol * unorm or abs(vf[idx]) <= tol * vnorm:
        return False
    us = uf / uf[idx]
    vs = vf / vf[idx]
    scale = max(np.max(np.abs(us)), np.max(np.abs(vs)))
    return bool(np.max(np.abs(us - vs)) <= tol * max(scale, 1.0))


def prop_deviation(u, v) -> float:
    """Max elementwise deviation after the prop_eq scaling (inf if hopeless)."""
    ua = np.asarray(u, dtype=complex).reshape(-1)
    va = np.asarray(v, dtype=complex).reshape(-1)
    if ua.shape != va.shape:
        raise ValueError("shape mismatch")
    unorm = np.max(np.abs(ua)) if ua.size else 0.0
    vnorm = np.max(np.abs(va)) if va.size else 0.0
    if unorm == 0.0 or vnorm == 0.0:
        return 0.0 if unorm == vnorm else float("inf")
    idx = int(np.argmax(np.abs(ua) * np.abs(va)))
    if ua[idx] == 0 or va[idx] == 0:
        return float("inf")
    return float(np.max(np.abs(ua / ua[idx] - va / va[idx])))


def rank_one(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff the second singular value is at most tol times the first.

    The zero matrix is not rank one.
    """
    arr = as_matrix(m)
    s = np.linalg.svd(arr, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return False
    if s.size == 1:
        return True
    return bool(s[1] <= tol * s[0])


def is_unitary(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        return False
    dev = arr.conj().T @ arr - np.eye(arr.shape[0])
    return bool(np.max(np.abs(dev)) <= tol)


def kron_factor(m: np.ndarray, dims: tuple[int, int]) -> tuple[np.ndarray, np.ndarray, float]:
    """Nearest Kronecker factorization m ~ kron(a, b) for square factors.

    ``dims`` gives the row (= column) sizes of the two factors.  Returns
    (a, b, residual) where residual is the ratio of the second to the first
    singular value of the rearranged matrix; residual 0 means m is exactly
    a Kronecker product.
    """
    d1, d2 = dims
    arr = as_matrix(m)
    if arr.shape != (d1 * d2, d1 * d2):
        raise ValueError(f"matrix shape {arr.shape} does not match dims {dims}")
    # Van Loan-Pitsianis rearrangement: R[(i1,j1),(i2,j2)] = m[(i1,i2),(j1,j2)]
    r = arr.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
    u, s, vh = np.linalg.svd(r)
    a = (u[:, 0] * s[0]).reshape(d1, d1)
    b = vh[0, :].reshape(d2, d2)
    residual = float(s[1] / s[0]) if s.size > 1 and s[0] > 0 else 0.0
    return a, b, residual


def random_complex(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """Complex array with entries uniform on the unit disk."""
    radius = np.sqrt(rng.random(shape))
    angle = rng.random(shape) * 2.0 * np.pi
    return radius * np.exp(1j * angle)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish random unitary via QR with phase fix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases
