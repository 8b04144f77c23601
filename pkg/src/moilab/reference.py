"""Literal atom-by-atom reference sums for the operator integrals.

These accumulate dense projection products in lexicographic atom order,
share no code with the production contractions in :mod:`moilab.moi`, and
exist purely as independent cross-checks.  They are quadratic-to-cubic in
the number of atoms times a dense product each, so keep instances small.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .linalg import SpectralMeasure


def naive_double_operator_integral(
    phi: Callable,
    E1: SpectralMeasure,
    T,
    E2: SpectralMeasure,
) -> np.ndarray:
    T = np.asarray(T, dtype=np.complex128)
    acc = np.zeros((E1.dim, E2.dim), dtype=np.complex128)
    for atom1 in E1.atoms:
        P = atom1.projection
        for atom2 in E2.atoms:
            weight = complex(np.asarray(phi(atom1.eigenvalue, atom2.eigenvalue)))
            acc += weight * (P @ T @ atom2.projection)
    return acc


def naive_triple_operator_integral(
    phi: Callable,
    E1: SpectralMeasure,
    T1,
    E2: SpectralMeasure,
    T2,
    E3: SpectralMeasure,
) -> np.ndarray:
    T1 = np.asarray(T1, dtype=np.complex128)
    T2 = np.asarray(T2, dtype=np.complex128)
    acc = np.zeros((E1.dim, E3.dim), dtype=np.complex128)
    for atom1 in E1.atoms:
        P = atom1.projection
        for atom2 in E2.atoms:
            left = P @ T1 @ atom2.projection @ T2
            for atom3 in E3.atoms:
                weight = complex(
                    np.asarray(
                        phi(atom1.eigenvalue, atom2.eigenvalue, atom3.eigenvalue)
                    )
                )
                acc += weight * (left @ atom3.projection)
    return acc
