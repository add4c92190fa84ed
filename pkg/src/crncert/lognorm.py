"""Logarithmic norms induced by the l-infinity and l-1 vector norms."""

import numpy as np


def _square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"log norm needs a square matrix, got shape {M.shape}")
    return M


def mu_inf(M) -> float:
    """max_i (m_ii + sum_{j != i} |m_ij|)."""
    M = _square(M)
    if M.size == 0:
        return 0.0
    off = np.abs(M).sum(axis=1) - np.abs(np.diag(M))
    return float(np.max(np.diag(M) + off))


def mu_1(M) -> float:
    """Column-sum form: max_k (m_kk + sum_{j != k} |m_jk|)."""
    return mu_inf(_square(M).T)
