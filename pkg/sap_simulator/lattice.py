"""
두 입자 (x₁, x₂) 정사각 격자의 차분 연산자와 대칭 기저

행 우선 인덱스: index = i*n + j ↔ (x₁ = x_i, x₂ = x_j). 교환 = 전치.
대칭 기저: |ii⟩, (|ij⟩ + |ji⟩)/√2 (i < j), np.triu_indices 순서.
"""
from functools import lru_cache

import numpy as np
from scipy import sparse


def fd_laplacian_1d(n: int, h: float, periodic: bool = True) -> sparse.csr_matrix:
    """-½ d²/dx² 의 3-point 차분 행렬"""
    main = np.full(n, 1.0 / h ** 2)
    off = np.full(n - 1, -0.5 / h ** 2)
    mat = sparse.diags([off, main, off], [-1, 0, 1], format="lil")
    if periodic:
        mat[0, n - 1] = -0.5 / h ** 2
        mat[n - 1, 0] = -0.5 / h ** 2
    return mat.tocsr()


def kinetic_dispersion(n: int, h: float) -> np.ndarray:
    """주기 3-point 차분의 Fourier 고유값 (1 - cos kh)/h²"""
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    return (1.0 - np.cos(k * h)) / h ** 2


def two_body_matrix(v1: np.ndarray, g: float, h: float, periodic: bool = True) -> sparse.csr_matrix:
    """kinetic + V(x₁) + V(x₂) + (g/h) δ_ij"""
    n = len(v1)
    t1 = fd_laplacian_1d(n, h, periodic)
    eye = sparse.identity(n, format="csr")
    pot = (v1[:, None] + v1[None, :]).ravel()
    pot[np.arange(n) * (n + 1)] += g / h
    return (sparse.kron(t1, eye) + sparse.kron(eye, t1) + sparse.diags(pot)).tocsr()


@lru_cache(maxsize=8)
def symmetric_basis(n: int) -> sparse.csr_matrix:
    """(n², n(n+1)/2) 직교정규 isometry B. 대칭 벡터 v 에 대해 B Bᵀ v = v."""
    iu, ju = np.triu_indices(n)
    cols = np.arange(len(iu))
    diag = iu == ju
    val = np.where(diag, 1.0, 1.0 / np.sqrt(2.0))
    rows = np.concatenate([iu * n + ju, (ju * n + iu)[~diag]])
    data = np.concatenate([val, val[~diag]])
    cols = np.concatenate([cols, cols[~diag]])
    return sparse.csr_matrix((data, (rows, cols)), shape=(n * n, len(iu)))


def restrict_symmetric(H: sparse.spmatrix, n: int) -> sparse.csc_matrix:
    """Bᵀ H B"""
    B = symmetric_basis(n)
    return (B.T @ H @ B).tocsc()


def to_symmetric(psi: np.ndarray) -> np.ndarray:
    """격자 진폭 (L² 정규화) → 대칭 기저 단위 벡터 계수 (h 곱은 호출자가)"""
    n = psi.shape[0]
    return symmetric_basis(n).T @ psi.ravel()


def from_symmetric(c: np.ndarray, n: int) -> np.ndarray:
    return (symmetric_basis(n) @ c).reshape(n, n)


def inner(a: np.ndarray, b: np.ndarray, h: float) -> complex:
    """Σ conj(a)·b·h²"""
    return complex(np.vdot(a, b) * h * h)


def norm2(a: np.ndarray, h: float) -> float:
    return float(np.sum(np.abs(a) ** 2) * h * h)
