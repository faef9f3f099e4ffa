"""Low-level helpers for amplitude arrays addressed by index labels.

A flat amplitude vector over labels ``order`` stores the value of
``order[0]`` in the least significant bit of the position. ``axes_view``
turns it into an ndarray with one axis per label, ``axes[j] == order[j]``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def axes_view(amps: np.ndarray, k: int) -> np.ndarray:
    """View a flat vector of length ``2**k`` with axis ``j`` holding bit ``j``."""
    if k == 0:
        return amps.reshape(())
    return amps.reshape((2,) * k).transpose(tuple(range(k - 1, -1, -1)))


def flatten_axes(t: np.ndarray) -> np.ndarray:
    """Inverse of :func:`axes_view`; always returns a contiguous copy."""
    k = t.ndim
    if k == 0:
        return np.ascontiguousarray(t.reshape(1))
    return np.ascontiguousarray(t.transpose(tuple(range(k - 1, -1, -1)))).reshape(-1)


def apply_matrix(t: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply a ``2**k`` square matrix to the given axes of ``t``.

    ``axes[0]`` is the most significant bit of the matrix row/column index.
    """
    k = len(axes)
    moved = np.moveaxis(t, list(axes), list(range(k)))
    shape = moved.shape
    out = matrix @ moved.reshape(2**k, -1)
    return np.moveaxis(out.reshape(shape), list(range(k)), list(axes))


def ei_expand(t: np.ndarray, axis: int) -> np.ndarray:
    """Identity-insertion step of a deferred gate on the first-operand side.

    Returns ``t'[..., a'', ..., a', a] = delta(a'', a') * t[..., a, ...]``; the
    old axis becomes ``a''`` in place and ``(a', a)`` are appended.
    """
    moved = np.moveaxis(t, axis, -1)
    out = np.einsum("...z,xy->...xyz", moved, np.eye(2, dtype=t.dtype))
    return np.moveaxis(out, -3, axis)


def e2q_expand(t: np.ndarray, axis: int, gate: np.ndarray) -> np.ndarray:
    """Gate-absorbing step of a deferred gate on the second-operand side.

    ``gate`` is 4x4 with the first operand (the other tensor's qubit) as the
    most significant bit. Returns ``t'[..., b'', ..., a', a] =
    sum_b G[a', b'', a, b] t[..., b, ...]``.
    """
    g4 = np.asarray(gate).reshape(2, 2, 2, 2)
    moved = np.moveaxis(t, axis, -1)
    out = np.einsum("xuzb,...b->...uxz", g4, moved)
    return np.moveaxis(out, -3, axis)


def swap_operands(u: np.ndarray) -> np.ndarray:
    """Re-express a two-qubit matrix with its operands exchanged."""
    return u.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol)
