#!/usr/bin/env python3
"""Deterministic seed splitting.

Every random draw in the package comes from a generator built by ``make_rng``.
The stream for ``(master, role, index...)`` is

    SeedSequence(entropy=master, spawn_key=(role_code(role), *index))

where ``role_code`` is the first four bytes of SHA-256 of the role name. A
stream therefore depends only on its key, never on how work was split across
workers or in which order it ran.
"""

import hashlib
from typing import Tuple

import numpy as np


def role_code(role: str) -> int:
    """Stable 32-bit code for a role name"""
    return int.from_bytes(hashlib.sha256(role.encode("utf-8")).digest()[:4], "big")


def derive_seed(master: int, role: str, *index: int) -> np.random.SeedSequence:
    """Seed sequence for one (master, role, index) key"""
    if master < 0:
        raise ValueError(f"Master seed must be non-negative, got {master}")
    key: Tuple[int, ...] = (role_code(role),) + tuple(int(i) for i in index)
    return np.random.SeedSequence(entropy=int(master), spawn_key=key)


def make_rng(master: int, role: str, *index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, role, *index))


def uniform_parameters(
    master: int, role: str, indices: np.ndarray, count: int
) -> np.ndarray:
    """Rows of U[0, 2π) parameters, row m drawn from the stream (master, role, m)"""
    rows = np.empty((len(indices), count))
    for r, m in enumerate(indices):
        rows[r] = make_rng(master, role, int(m)).uniform(0.0, 2.0 * np.pi, count)
    return rows
