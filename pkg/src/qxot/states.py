"""
Symmetric four-state families and the concrete protocol states.

Families are always indexed in the cyclic order 00 -> 01 -> 11 -> 10, i.e.
``m = 0, 1, 2, 3`` with ``|psi_m> = U^m |psi_00>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import gram_matrix

CYCLIC_LABELS = ("00", "01", "11", "10")
WEIGHT_TOL = 1e-12
FEASIBLE_TOL = 1e-12


class NotRealizableError(ValueError):
    """Raised when (F, G) cannot be the overlaps of a pure symmetric family."""


def bits(label: str) -> tuple[int, int]:
    """``"01" -> (0, 1)``."""
    return int(label[0]), int(label[1])


@dataclass(frozen=True)
class OverlapParams:
    """
    Adjacent overlap ``F = <psi_01|psi_00>`` (complex) and diagonal overlap
    ``G = <psi_00|psi_11>`` (real) of a symmetric family.
    """

    re_f: float
    im_f: float
    g: float

    @classmethod
    def from_complex(cls, f: complex, g: float) -> "OverlapParams":
        f = complex(f)
        return cls(f.real, f.imag, float(g))

    @property
    def f(self) -> complex:
        return complex(self.re_f, self.im_f)

    @property
    def theta_f(self) -> float:
        return cmath.phase(self.f)

    @property
    def fourier_weights(self) -> tuple[float, float, float, float]:
        """Squared amplitudes of |psi_00> on the eigenvectors of U with eigenvalues 1, i, -1, -i."""
        g, rf, imf = self.g, self.re_f, self.im_f
        return (
            (1 + g + 2 * rf) / 4,
            (1 - g - 2 * imf) / 4,
            (1 + g - 2 * rf) / 4,
            (1 - g + 2 * imf) / 4,
        )

    @property
    def realizable(self) -> bool:
        return min(self.fourier_weights) >= -WEIGHT_TOL

    @property
    def honest_feasible(self) -> bool:
        return (
            self.realizable
            and abs(self.f) <= 1 / 3 + FEASIBLE_TOL
            and abs(self.g) <= 1 / 3 + FEASIBLE_TOL
        )

    def negate_f(self) -> "OverlapParams":
        return OverlapParams(-self.re_f, -self.im_f, self.g)

    def exchanged(self) -> "OverlapParams":
        """Swap Re F and Im F and flip the sign of G."""
        return OverlapParams(self.im_f, self.re_f, -self.g)


QUTRIT_PARAMS = OverlapParams(1 / 3, 0.0, -1 / 3)

# (F, G) pairs at which Bob's cheating probability reaches its floor 3/4.
OPTIMAL_CORNERS = (
    OverlapParams(1 / 3, 0.0, -1 / 3),
    OverlapParams(-1 / 3, 0.0, -1 / 3),
    OverlapParams(0.0, 1 / 3, 1 / 3),
    OverlapParams(0.0, -1 / 3, 1 / 3),
)


@dataclass(frozen=True)
class SymmetricFamily:
    states: tuple[np.ndarray, ...]
    u: np.ndarray
    fourier_weights: tuple[float, ...]
    labels: tuple[str, ...] = field(default=CYCLIC_LABELS)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    def gram(self) -> np.ndarray:
        return gram_matrix(self.states)

    def state(self, label: str) -> np.ndarray:
        return self.states[self.labels.index(label)]


def build_symmetric_family(p: OverlapParams) -> SymmetricFamily:
    """
    Realise the four states for overlaps ``p`` in the eigenbasis of the
    cycling unitary.

    Fourier weights that vanish (within ``WEIGHT_TOL``) drop out, so the
    family lives in a space of dimension equal to the number of non-zero
    weights. The qutrit point F = 1/3, G = -1/3 therefore gives a
    three-dimensional family.

    Raises
    ------
    NotRealizableError
        If any weight is below ``-WEIGHT_TOL``.
    """
    weights = p.fourier_weights
    for k, w in enumerate(weights):
        if w < -WEIGHT_TOL:
            raise NotRealizableError(f"Fourier weight lambda_{k} = {w:.3e} is negative for {p}")
    kept = [k for k, w in enumerate(weights) if w > WEIGHT_TOL]
    phases = np.array([1j**k for k in kept])
    u = np.diag(phases)
    seed = np.array([math.sqrt(weights[k]) for k in kept], dtype=complex)
    states = tuple(phases**m * seed for m in range(4))
    return SymmetricFamily(states=states, u=u, fourier_weights=tuple(max(w, 0.0) for w in weights))


def qutrit_states() -> tuple[np.ndarray, ...]:
    """(|0> + (-1)^x1 |1> + (-1)^x0 |2>)/sqrt(3) in cyclic order 00, 01, 11, 10."""
    out = []
    for label in CYCLIC_LABELS:
        x0, x1 = bits(label)
        out.append(np.array([1, (-1) ** x1, (-1) ** x0], dtype=complex) / math.sqrt(3))
    return tuple(out)


def qutrit_unitary() -> np.ndarray:
    return np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=complex)


def qutrit_family() -> SymmetricFamily:
    return SymmetricFamily(
        states=qutrit_states(),
        u=qutrit_unitary(),
        fourier_weights=QUTRIT_PARAMS.fourier_weights,
    )


# Reversed protocol: Bob's state for "bit index b has value v".
REVERSED_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1))
_REVERSED_SUPPORT = {0: (0, 2), 1: (0, 1), 2: (1, 2)}


def reversed_states() -> dict[tuple[int, int], np.ndarray]:
    """
    Bob's six states keyed by ``(b, value)``:
    ``(|i> + (-1)^value |j>)/sqrt(2)`` with ``(i, j)`` = (0, 2), (0, 1), (1, 2)
    for b = 0, 1, 2.
    """
    out = {}
    for b, value in REVERSED_LABELS:
        i, j = _REVERSED_SUPPORT[b]
        v = np.zeros(3, dtype=complex)
        v[i] = 1.0
        v[j] = (-1) ** value
        out[(b, value)] = v / math.sqrt(2)
    return out


def three_qutrit_states() -> tuple[np.ndarray, ...]:
    """
    Three-qutrit states obtained by folding the entangled interactive
    protocol into a single transmission; cyclic order 00, 01, 11, 10.
    Basis index of |i j k> is 9 i + 3 j + k.
    """

    def idx(i: int, j: int, k: int) -> int:
        return 9 * i + 3 * j + k

    out = []
    for label in CYCLIC_LABELS:
        x0, x1 = bits(label)
        v = np.zeros(27, dtype=complex)
        v[idx(0, 0, 0)] += (-1) ** x0
        v[idx(2, 2, 0)] += 1
        v[idx(1, 1, 1)] += (-1) ** x1
        v[idx(2, 2, 1)] += 1
        v[idx(0, 0, 2)] += (-1) ** x0
        v[idx(1, 1, 2)] += (-1) ** x1
        out.append(v / math.sqrt(6))
    return tuple(out)


# Name used by the public interface.
appendix_c_states = three_qutrit_states


def overlaps_of(states) -> OverlapParams:
    """Read (F, G) off a family given in cyclic order."""
    gram = gram_matrix(states)
    f = gram[1, 0]
    return OverlapParams(f.real, f.imag, gram[0, 2].real)
