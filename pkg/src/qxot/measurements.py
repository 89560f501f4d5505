"""
POVMs used by honest and cheating parties, and a minimum-error optimality
certificate based on the Holevo-Helstrom conditions.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Mapping
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .states import CYCLIC_LABELS, bits

COMPLETENESS_TOL = 1e-10
CERTIFICATE_TOL = 1e-9
PRIOR_TOL = 1e-12

# Weight of each elimination operator; 1/4 makes the six sum to the identity.
ELIMINATION_NORMALIZATION = 0.25


class InvalidPovmError(ValueError):
    pass


@dataclass(frozen=True)
class Povm:
    """
    Measurement operators with outcome labels.

    Construction validates positivity and completeness unless ``check=False``.
    """

    operators: tuple[np.ndarray, ...]
    labels: tuple[Hashable, ...]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        ops = tuple(la.as_matrix(o) for o in self.operators)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(ops) != len(self.labels):
            raise InvalidPovmError("one label per operator is required")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidPovmError("outcome labels must be distinct")
        if self.check:
            worst = min(la.min_eigenvalue(o) for o in ops)
            if worst < -la.PSD_TOL:
                raise InvalidPovmError(f"operator with eigenvalue {worst:.3e} is not positive")
            residual = self.completeness_residual()
            if residual > COMPLETENESS_TOL:
                raise InvalidPovmError(f"operators do not sum to identity: residual {residual:.3e}")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_residual(self) -> float:
        total = sum(self.operators)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def operator(self, label) -> np.ndarray:
        return self.operators[self.labels.index(label)]

    def probabilities(self, rho) -> np.ndarray:
        """Born-rule outcome distribution for a density matrix or a ket."""
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim == 1:
            return np.array([np.vdot(rho, o @ rho).real for o in self.operators])
        return np.array([np.trace(rho @ o).real for o in self.operators])

    def conjugated(self, u: np.ndarray) -> "Povm":
        """The POVM {U E U^dagger}."""
        return Povm(tuple(u @ o @ la.dagger(u) for o in self.operators), self.labels)


@dataclass(frozen=True)
class StateEnsemble:
    states: tuple[np.ndarray, ...]
    priors: tuple[float, ...]
    labels: tuple[Hashable, ...]

    def __post_init__(self):
        states = tuple(la.as_matrix(s) for s in self.states)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", tuple(float(p) for p in self.priors))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not (len(states) == len(self.priors) == len(self.labels)):
            raise ValueError("states, priors and labels must have equal length")
        if min(self.priors) < 0 or abs(sum(self.priors) - 1) > PRIOR_TOL:
            raise ValueError(f"priors {self.priors} are not a probability distribution")
        for s in states:
            if abs(np.trace(s).real - 1) > COMPLETENESS_TOL or not la.is_psd(s):
                raise ValueError("ensemble members must be density matrices")

    @classmethod
    def from_kets(cls, kets, priors=None, labels=None) -> "StateEnsemble":
        kets = [la.as_vector(k) for k in kets]
        n = len(kets)
        priors = [1 / n] * n if priors is None else priors
        labels = list(range(n)) if labels is None else labels
        return cls(tuple(la.projector(k) for k in kets), tuple(priors), tuple(labels))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def average(self) -> np.ndarray:
        return sum(p * s for p, s in zip(self.priors, self.states))


def elimination_povm(check: bool = True) -> Povm:
    """
    Honest receiver's six-outcome unambiguous elimination measurement on the
    qutrit. Outcome ``(b, v)`` reveals bit ``x_b = v`` (``x_2 = x0 xor x1``).
    """
    w = ELIMINATION_NORMALIZATION
    vectors = {
        (0, 0): (1, 0, 1),
        (0, 1): (1, 0, -1),
        (1, 0): (1, 1, 0),
        (1, 1): (1, -1, 0),
        (2, 0): (0, 1, 1),
        (2, 1): (0, 1, -1),
    }
    ops = tuple(w * la.projector(la.ket(*v)) for v in vectors.values())
    return Povm(ops, tuple(vectors), check=check)


# Letter names used for the elimination outcomes in tables.
ELIMINATION_NAMES = {(0, 0): "A", (0, 1): "B", (1, 0): "C", (1, 1): "D", (2, 0): "E", (2, 1): "F"}


def value_of_bit(label: str, b: int) -> int:
    x0, x1 = bits(label)
    return (x0, x1, x0 ^ x1)[b]


def eliminated_states(outcome: tuple[int, int]) -> tuple[str, ...]:
    """Family labels ruled out by an elimination outcome."""
    b, v = outcome
    return tuple(lab for lab in CYCLIC_LABELS if value_of_bit(lab, b) != v)


def square_root_measurement(e: StateEnsemble) -> Povm:
    """
    Square-root measurement ``E_i = rho^{-1/2} p_i rho_i rho^{-1/2}`` with
    ``rho = sum_i p_i rho_i``.

    If the ensemble does not span the ambient space an extra outcome
    ``"residual"`` (the projector onto the kernel of ``rho``) completes the
    identity.
    """
    if max(e.priors) - min(e.priors) > PRIOR_TOL:
        raise ValueError("the square-root measurement here requires equal priors")
    for s in e.states:
        if abs(np.trace(s @ s).real - 1) > 1e-9:
            raise ValueError("the square-root measurement here requires pure states")
    rho = e.average()
    inv_sqrt = la.mat_pow_half(rho, -0.5)
    ops = [inv_sqrt @ (p * s) @ inv_sqrt for p, s in zip(e.priors, e.states)]
    labels = list(e.labels)
    kernel = np.eye(e.dim) - la.support_projector(rho)
    if np.max(np.abs(kernel)) > 1e-9:
        ops.append(kernel)
        labels.append("residual")
    return Povm(tuple(ops), tuple(labels))


def _correct_sets(e: StateEnsemble, correct) -> list[set]:
    if correct is None:
        return [{lab} for lab in e.labels]
    out = []
    for lab in e.labels:
        if lab not in correct:
            raise KeyError(f"no correct outcome given for ensemble member {lab!r}")
        c = correct[lab]
        # Labels may themselves be tuples, so only sets denote several outcomes.
        out.append(set(c) if isinstance(c, (set, frozenset)) else {c})
    return out


def success_probability(p: Povm, e: StateEnsemble, correct: Mapping | None = None) -> float:
    """
    ``sum_i prior_i Tr(rho_i E_correct(i))``.

    ``correct`` maps each ensemble label to the outcome label (or a set
    of outcome labels) counted as a success; by default an outcome is correct
    when its label equals the ensemble label.
    """
    sets = _correct_sets(e, correct)
    total = 0.0
    for prior, rho, good in zip(e.priors, e.states, sets):
        for lab in good:
            total += prior * np.trace(rho @ p.operator(lab)).real
    return float(total)


@dataclass(frozen=True)
class Certificate:
    optimal: bool
    max_violation: float
    hermiticity_violation: float
    psd_violations: tuple[float, ...]
    success: float


def grouped_operators(p: Povm, e: StateEnsemble, guess: Mapping | None = None) -> list[np.ndarray]:
    """Sum POVM elements by the hypothesis each outcome is read as."""
    grouped = [np.zeros((p.dim, p.dim), dtype=complex) for _ in e.labels]
    for lab, op in zip(p.labels, p.operators):
        if guess is not None:
            target = guess[lab]
        elif lab in e.labels:
            target = lab
        elif lab == "residual":
            target = e.labels[0]
        else:
            raise KeyError(f"outcome {lab!r} has no matching hypothesis; pass guess=")
        grouped[e.labels.index(target)] += op
    return grouped


def min_error_certificate(p: Povm, e: StateEnsemble, guess: Mapping | None = None) -> Certificate:
    """
    Check the Holevo-Helstrom conditions for ``p`` read through ``guess``.

    With ``Pi_j`` the summed elements guessed as hypothesis ``j``,
    ``Gamma = sum_i p_i rho_i Pi_i`` must be Hermitian and ``Gamma - p_j rho_j``
    positive semidefinite for every ``j``. The report is produced even when
    the conditions fail.
    """
    grouped = grouped_operators(p, e, guess)
    gamma = sum(pr * rho @ pi for pr, rho, pi in zip(e.priors, e.states, grouped))
    herm = la.max_asymmetry(gamma)
    gamma_h = 0.5 * (gamma + la.dagger(gamma))
    psd = tuple(
        max(0.0, -la.min_eigenvalue(gamma_h - pr * rho)) for pr, rho in zip(e.priors, e.states)
    )
    worst = max(herm, *psd)
    success = float(np.trace(gamma).real)
    return Certificate(worst <= CERTIFICATE_TOL, worst, herm, psd, success)


def six_dim_projective_lift() -> dict[str, np.ndarray]:
    """Orthonormal vectors in C^6 whose compressions to C^3 are the elimination operators."""
    rows = {
        "A": (1, 0, 1, 1, 0, -1),
        "B": (1, 0, -1, 1, 0, 1),
        "C": (1, 1, 0, -1, 1, 0),
        "D": (1, -1, 0, -1, -1, 0),
        "E": (0, 1, 1, 0, -1, 1),
        "F": (0, 1, -1, 0, -1, -1),
    }
    return {k: la.ket(*v) / 2 for k, v in rows.items()}


def reversed_receiver_povm() -> Povm:
    """Honest Alice's four-outcome measurement in the reversed protocol, labels in cyclic order."""
    ops = []
    for label in CYCLIC_LABELS:
        x0, x1 = bits(label)
        v = la.ket(1, (-1) ** x1, (-1) ** x0) / 2
        ops.append(la.projector(v))
    return Povm(tuple(ops), CYCLIC_LABELS)


def reversed_cheat_povm() -> Povm:
    """Cheating Alice's three-outcome measurement; outcome b guesses Bob's bit index."""
    p = [la.projector(la.basis(3, i)) for i in range(3)]
    return Povm((0.5 * (p[0] + p[2]), 0.5 * (p[0] + p[1]), 0.5 * (p[1] + p[2])), (0, 1, 2))


def computational_basis_povm(dim: int = 3) -> Povm:
    return Povm(tuple(la.projector(la.basis(dim, i)) for i in range(dim)), tuple(range(dim)))


ALICE_TEST_LABELS = ("+R", "+L", "-+", "--")


def alice_test_povm() -> Povm:
    """
    Four-outcome projective measurement on the cheater's kept register
    (basis |0>..|3> read as two qubits |00>..|11>).

    In the Hadamard-Walsh rotated frame the outcomes are |+>|R>, |+>|L>,
    |->|+>, |->|->, with |R>, |L> = (|0> +- i|1>)/sqrt(2).
    """
    h = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=complex) / 2
    s = 1 / math.sqrt(2)
    frame = [
        la.ket(s, 1j * s, 0, 0),
        la.ket(s, -1j * s, 0, 0),
        la.ket(0, 0, 1, 0),
        la.ket(0, 0, 0, 1),
    ]
    return Povm(tuple(la.projector(h @ w) for w in frame), ALICE_TEST_LABELS)


def hadamard_walsh() -> np.ndarray:
    return np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=complex) / 2


def rotated_outcome(p: Povm, index: int, angle: float, generator: np.ndarray | None = None) -> Povm:
    """
    ``p`` with outcome ``index`` conjugated by ``exp(i angle H)``.

    The result generally breaks completeness, so it is built unchecked; it
    serves as a deliberately wrong measurement in optimality tests. ``H``
    defaults to ``diag(0, 1, ..)`` plus an imaginary nearest-neighbour
    coupling, which has no special relation to any state used here.
    """
    if generator is None:
        n = p.dim
        upper = np.diag(1j * np.ones(n - 1), 1)
        generator = np.diag(np.arange(n, dtype=complex)) + upper + la.dagger(upper)
    w, v = la.hermitian_eig(generator)
    u = (v * np.exp(1j * angle * w)) @ la.dagger(v)
    ops = list(p.operators)
    ops[index] = u @ ops[index] @ la.dagger(u)
    return Povm(tuple(ops), p.labels, check=False)
