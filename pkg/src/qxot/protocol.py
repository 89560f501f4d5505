"""
Executable rounds of the XOT protocols.

Quantum transmission is simulated exactly: the outcome distribution of every
(sent state, measurement) pair is computed once by the Born rule and cached,
then rounds sample from those tables. A round's randomness comes only from
the generator built from its ``seed``, so identical seeds give identical
records.

Seeding scheme for batches: round blocks of ``BLOCK_SIZE`` draw from
``SeedSequence([seed, scenario_index, block_index])``; aggregate counts are
therefore the same however blocks are scheduled, and scenarios sharing a
seed do not share a stream.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import linalg as la
from .cheating import (
    best_guess_success,
    conditional_states,
    entangled_cheat_state,
    injection_guess_table,
    reversed_cheat_state,
    reversed_theta_states,
)
from .measurements import (
    Povm,
    StateEnsemble,
    alice_test_povm,
    computational_basis_povm,
    elimination_povm,
    reversed_cheat_povm,
    reversed_receiver_povm,
    square_root_measurement,
)
from .states import CYCLIC_LABELS, QUTRIT_PARAMS, REVERSED_LABELS, bits, qutrit_states, reversed_states

BLOCK_SIZE = 1 << 16
DEFAULT_TEST_FRACTION = 0.5

ALICE_SUBSTRATEGIES = {
    "direct": ("injection", "entangled"),
    "reversed": ("pairwise", "basis"),
}
BOB_SUBSTRATEGIES = {
    "direct": ("srm",),
    "reversed": ("eigenvector", "entangled"),
}
_DEFAULT_SUB = {
    ("alice", "direct"): "injection",
    ("alice", "reversed"): "pairwise",
    ("bob", "direct"): "srm",
    ("bob", "reversed"): "entangled",
}


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class PartyStrategy:
    """
    One party's behaviour.

    ``substrategy`` names the cheating method; ``None`` picks the default for
    the protocol direction. ``injected`` fixes the basis state an injecting
    sender uses (uniform over |0>, |1>, |2> when ``None``).
    """

    role: str
    mode: str = "honest"
    substrategy: str | None = None
    injected: int | None = None

    def __post_init__(self):
        if self.role not in ("alice", "bob"):
            raise StrategyError(f"unknown role {self.role!r}")
        if self.mode not in ("honest", "cheat"):
            raise StrategyError(f"unknown mode {self.mode!r}")
        if self.mode == "honest" and self.substrategy is not None:
            raise StrategyError("honest parties have no substrategy")
        if self.injected is not None and self.injected not in (0, 1, 2):
            raise StrategyError("injected state must be 0, 1 or 2")

    @property
    def cheating(self) -> bool:
        return self.mode == "cheat"

    def resolved(self, direction: str) -> str | None:
        """Substrategy for ``direction``, validated; ``None`` when honest."""
        if not self.cheating:
            return None
        sub = self.substrategy or _DEFAULT_SUB[(self.role, direction)]
        allowed = (ALICE_SUBSTRATEGIES if self.role == "alice" else BOB_SUBSTRATEGIES)[direction]
        if sub not in allowed:
            raise StrategyError(f"{self.role} cannot use {sub!r} in the {direction} protocol")
        return sub


def honest(role: str) -> PartyStrategy:
    return PartyStrategy(role)


def cheat(role: str, substrategy: str | None = None, injected: int | None = None) -> PartyStrategy:
    return PartyStrategy(role, "cheat", substrategy, injected)


@dataclass(frozen=True)
class RoundRecord:
    """
    One execution. Fields that a variant does not use stay ``None``.

    ``sent`` and ``outcome`` are the labels of the transmitted state and of
    the receiver's measurement result. ``alice_guess`` is her guess of the
    receiver's index (b, or B under the standard wrapper); ``bob_guess`` is
    his guess of ``(x0, x1)``.
    """

    protocol: str
    alice_mode: str
    bob_mode: str
    x0: int | None = None
    x1: int | None = None
    b: int | None = None
    y: int | None = None
    B: int | None = None
    r: int | None = None
    s: tuple[int, int, int] | None = None
    X: tuple[int, int, int] | None = None
    y_prime: int | None = None
    t: tuple[int, int, int] | None = None
    abort: bool = False
    sent: object = None
    outcome: object = None
    alice_guess: int | None = None
    bob_guess: tuple[int, int] | None = None

    @property
    def x2(self) -> int | None:
        if self.x0 is None or self.x1 is None:
            return None
        return self.x0 ^ self.x1

    @property
    def alice_success(self) -> bool | None:
        if self.alice_guess is None:
            return None
        target = self.B if self.B is not None else self.b
        return self.alice_guess == target

    @property
    def bob_success(self) -> bool | None:
        if self.bob_guess is None:
            return None
        return self.bob_guess == (self.x0, self.x1)


def xbit(x0: int, x1: int, c: int) -> int:
    return (x0, x1, x0 ^ x1)[c % 3]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def round_seed(master: int, index: int) -> np.random.SeedSequence:
    """Seed of round ``index`` in a sequence of single-round calls."""
    return np.random.SeedSequence([master, index])


def _sample(rng: np.random.Generator, probs) -> int:
    cdf = np.cumsum(probs)
    return int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), len(cdf) - 1))


def _both_cheating(alice: PartyStrategy, bob: PartyStrategy) -> None:
    if alice.cheating and bob.cheating:
        raise StrategyError("at most one party may cheat")
    if alice.role != "alice" or bob.role != "bob":
        raise StrategyError("strategies passed in the wrong roles")


# ----------------------------------------------------------- Born tables


@dataclass(frozen=True)
class BornTable:
    """``probs[i, j]`` = P(outcome j | row i)."""

    rows: tuple
    cols: tuple
    probs: np.ndarray = field(repr=False)


def _table(kets_or_rhos: dict, povm: Povm) -> BornTable:
    rows = tuple(kets_or_rhos)
    probs = np.array([povm.probabilities(kets_or_rhos[r]) for r in rows])
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    return BornTable(rows, povm.labels, probs)


@lru_cache(maxsize=None)
def direct_honest_table() -> BornTable:
    return _table(dict(zip(CYCLIC_LABELS, qutrit_states())), elimination_povm())


@lru_cache(maxsize=None)
def injection_table() -> BornTable:
    return _table({k: la.basis(3, k) for k in range(3)}, elimination_povm())


@lru_cache(maxsize=None)
def qutrit_srm() -> Povm:
    return square_root_measurement(StateEnsemble.from_kets(qutrit_states(), labels=CYCLIC_LABELS))


@lru_cache(maxsize=None)
def direct_bob_table() -> BornTable:
    return _table(dict(zip(CYCLIC_LABELS, qutrit_states())), qutrit_srm())


@lru_cache(maxsize=None)
def direct_entangled_table() -> BornTable:
    """Joint P(Alice's four-outcome result, Bob's elimination outcome); a single row."""
    psi = entangled_cheat_state(qutrit_states())
    a_povm, b_povm = alice_test_povm(), elimination_povm()
    cols = tuple(itertools.product(a_povm.labels, b_povm.labels))
    probs = [
        np.vdot(psi, la.kron(a, e) @ psi).real for a in a_povm.operators for e in b_povm.operators
    ]
    return BornTable(("joint",), cols, np.clip(np.array([probs]), 0.0, None))


@lru_cache(maxsize=None)
def injection_guesses() -> dict[int, int]:
    """Cheating sender's guess of b for each injected basis state."""
    return {k: g for k, (g, _) in injection_guess_table().items()}


@lru_cache(maxsize=None)
def entangled_guess_map() -> dict:
    return best_guess_success(alice_test_povm(), conditional_states(QUTRIT_PARAMS)).guesses


@lru_cache(maxsize=None)
def reversed_honest_table() -> BornTable:
    return _table(reversed_states(), reversed_receiver_povm())


@lru_cache(maxsize=None)
def reversed_alice_table(substrategy: str) -> BornTable:
    povm = computational_basis_povm(3) if substrategy == "basis" else reversed_cheat_povm()
    return _table(reversed_states(), povm)


@lru_cache(maxsize=None)
def reversed_eigenvector_table() -> BornTable:
    """Bob sends the normalised top eigenvector of Alice's operator for his target pair."""
    povm = reversed_receiver_povm()
    kets = {}
    for lab in CYCLIC_LABELS:
        _, v = la.hermitian_eig(povm.operator(lab))
        kets[lab] = v[:, -1]
    return _table(kets, povm)


@lru_cache(maxsize=None)
def reversed_theta_srm() -> Povm:
    thetas, probs = reversed_theta_states()
    return square_root_measurement(StateEnsemble.from_kets(thetas, priors=probs, labels=CYCLIC_LABELS))


@lru_cache(maxsize=None)
def reversed_entangled_table() -> BornTable:
    """Rows: Bob's guess from his register; columns: Alice's outcome."""
    psi = reversed_cheat_state()
    bob_povm, alice_povm = reversed_theta_srm(), reversed_receiver_povm()
    joint = np.array(
        [[np.vdot(psi, la.kron(eb, ea) @ psi).real for ea in alice_povm.operators] for eb in bob_povm.operators]
    )
    return BornTable(bob_povm.labels, alice_povm.labels, np.clip(joint, 0.0, None))


# ------------------------------------------------------------ direct rounds


def run_semirandom(alice: PartyStrategy, bob: PartyStrategy, seed) -> RoundRecord:
    """
    One round of the qutrit protocol in which Bob learns x0, x1 or x0 xor x1
    at random.
    """
    _both_cheating(alice, bob)
    a_sub, b_sub = alice.resolved("direct"), bob.resolved("direct")
    rng = _rng(seed)
    base = dict(protocol="direct", alice_mode=alice.mode, bob_mode=bob.mode)

    if a_sub == "injection":
        k = alice.injected if alice.injected is not None else int(rng.integers(3))
        tab = injection_table()
        (b, v) = tab.cols[_sample(rng, tab.probs[k])]
        guess = injection_guesses()[k]
        return RoundRecord(**base, b=b, y=v, sent=f"|{k}>", outcome=(b, v), alice_guess=guess)

    if a_sub == "entangled":
        tab = direct_entangled_table()
        a_out, (b, v) = tab.cols[_sample(rng, tab.probs[0])]
        return RoundRecord(
            **base, b=b, y=v, sent="entangled", outcome=(b, v), alice_guess=entangled_guess_map()[a_out]
        )

    x0, x1 = int(rng.integers(2)), int(rng.integers(2))
    label = f"{x0}{x1}"
    if b_sub == "srm":
        tab = direct_bob_table()
        out = tab.cols[_sample(rng, tab.probs[tab.rows.index(label)])]
        return RoundRecord(**base, x0=x0, x1=x1, sent=label, outcome=out, bob_guess=bits(out))

    tab = direct_honest_table()
    b, v = tab.cols[_sample(rng, tab.probs[tab.rows.index(label)])]
    return RoundRecord(**base, x0=x0, x1=x1, b=b, y=v, sent=label, outcome=(b, v))


def wrap_standard(x0: int, x1: int, b: int, y: int, X0: int, X1: int, B: int) -> tuple[int, tuple, int]:
    """
    Post-processing that turns a semi-random round into standard XOT.

    Returns ``(r, s, y_prime)`` with r = (b + 2B) mod 3,
    s_c = x_{(c+r) mod 3} xor X_c and y' = y xor s_B.
    """
    r = (b + 2 * B) % 3
    s0 = xbit(x0, x1, 0 + r) ^ X0
    s1 = xbit(x0, x1, 1 + r) ^ X1
    s = (s0, s1, s0 ^ s1)
    return r, s, y ^ s[B]


def alice_index_from_r(r: int, b_guess: int) -> int:
    """Invert r = b + 2B (mod 3) for B."""
    return (2 * (r - b_guess)) % 3


def bob_inputs_from_guess(guess: tuple[int, int], r: int, s: tuple) -> tuple[int, int, int]:
    """A cheating receiver's reading of all of X from his guess of (x0, x1)."""
    return tuple(xbit(guess[0], guess[1], c + r) ^ s[c] for c in range(3))


def standard_from_semirandom(X0: int, X1: int, B: int, alice: PartyStrategy, bob: PartyStrategy, seed) -> RoundRecord:
    """
    Standard XOT with Alice's chosen bits (X0, X1) and Bob's chosen index B,
    built on one semi-random round over dummy bits.
    """
    if B not in (0, 1, 2):
        raise ValueError(f"B must be 0, 1 or 2, got {B}")
    rng = _rng(seed)
    rec = run_semirandom(alice, bob, rng)
    X = (X0, X1, X0 ^ X1)

    if bob.cheating:
        # No semi-random index exists; any r is consistent, so draw it uniformly.
        r = int(rng.integers(3))
        s0 = xbit(rec.x0, rec.x1, r) ^ X0
        s1 = xbit(rec.x0, rec.x1, 1 + r) ^ X1
        s = (s0, s1, s0 ^ s1)
        decoded = bob_inputs_from_guess(rec.bob_guess, r, s)
        # Guessing X is equivalent to guessing (x0, x1); keep the success flag comparable.
        return replace(rec, B=B, r=r, s=s, X=X, y_prime=decoded[B])

    if alice.cheating:
        # Bits are Alice's own; she answers r with any bits, here her true X.
        r = (rec.b + 2 * B) % 3
        guess_B = alice_index_from_r(r, rec.alice_guess)
        return replace(rec, B=B, r=r, X=X, alice_guess=guess_B)

    r, s, y_prime = wrap_standard(rec.x0, rec.x1, rec.b, rec.y, X0, X1, B)
    return replace(rec, B=B, r=r, s=s, X=X, y_prime=y_prime)


def semirandom_from_standard(alice: PartyStrategy, bob: PartyStrategy, seed, standard=None) -> RoundRecord:
    """
    Semi-random XOT from a standard XOT round: Alice's bits and Bob's index
    are drawn uniformly and fed to ``standard`` (default: the wrapper above).
    The output pair is (b, y) = (B, y').
    """
    standard = standard or standard_from_semirandom
    rng = _rng(seed)
    x0, x1, b = int(rng.integers(2)), int(rng.integers(2)), int(rng.integers(3))
    inner = standard(x0, x1, b, alice, bob, rng)
    return RoundRecord(
        protocol="semirandom-from-standard",
        alice_mode=alice.mode,
        bob_mode=bob.mode,
        x0=x0,
        x1=x1,
        b=b,
        y=inner.y_prime,
        abort=inner.abort,
        alice_guess=inner.alice_guess,
        bob_guess=None if inner.bob_guess is None else _relabel_bob_guess(inner, x0, x1),
    )


def _relabel_bob_guess(inner: RoundRecord, x0: int, x1: int) -> tuple[int, int]:
    # The inner X are the outer (x0, x1): his decoded X is his outer guess.
    decoded = bob_inputs_from_guess(inner.bob_guess, inner.r, inner.s)
    return decoded[0], decoded[1]


# ---------------------------------------------------------- reversed rounds


def run_reversed(alice: PartyStrategy, bob: PartyStrategy, seed) -> RoundRecord:
    """
    One round of the reversed protocol: Bob sends one of six qutrit states,
    Alice measures and obtains (x0, x1).
    """
    _both_cheating(alice, bob)
    a_sub, b_sub = alice.resolved("reversed"), bob.resolved("reversed")
    rng = _rng(seed)
    base = dict(protocol="reversed", alice_mode=alice.mode, bob_mode=bob.mode)

    if b_sub == "eigenvector":
        tab = reversed_eigenvector_table()
        target = tab.rows[int(rng.integers(4))]
        out = tab.cols[_sample(rng, tab.probs[tab.rows.index(target)])]
        x0, x1 = bits(out)
        return RoundRecord(**base, x0=x0, x1=x1, sent=target, outcome=out, bob_guess=bits(target))

    if b_sub == "entangled":
        tab = reversed_entangled_table()
        flat = _sample(rng, tab.probs.ravel())
        g_lab, out = tab.rows[flat // len(tab.cols)], tab.cols[flat % len(tab.cols)]
        guess = bits(g_lab) if g_lab in CYCLIC_LABELS else (0, 0)
        x0, x1 = bits(out)
        return RoundRecord(**base, x0=x0, x1=x1, sent="entangled", outcome=out, bob_guess=guess)

    k = int(rng.integers(6))
    b, v = REVERSED_LABELS[k]
    if a_sub is not None:
        tab = reversed_alice_table(a_sub)
        out = tab.cols[_sample(rng, tab.probs[k])]
        return RoundRecord(**base, b=b, y=v, sent=(b, v), outcome=out, alice_guess=out)

    tab = reversed_honest_table()
    out = tab.cols[_sample(rng, tab.probs[k])]
    x0, x1 = bits(out)
    return RoundRecord(**base, x0=x0, x1=x1, b=b, y=v, sent=(b, v), outcome=out)


def reversed_postprocess(X0: int, X1: int, record: RoundRecord) -> RoundRecord:
    """
    Let Alice fix her bits to (X0, X1): she announces t_c = x_c xor X_c and
    Bob outputs X_b = x_b xor t_b.
    """
    if record.x0 is None or record.b is None or record.y is None:
        raise ValueError("record lacks Alice's pair or Bob's bit")
    t0, t1 = record.x0 ^ X0, record.x1 ^ X1
    t = (t0, t1, t0 ^ t1)
    return replace(record, X=(X0, X1, X0 ^ X1), t=t, y_prime=record.y ^ t[record.b])


# ---------------------------------------------------------------- testing


@dataclass(frozen=True)
class TestReport:
    aborted: bool
    mismatches: int
    tested: int


TestReport.__test__ = False  # not a pytest class


def _direct_test_rows(sender: PartyStrategy, n: int, rng) -> tuple[list, list]:
    """Declared labels and the receiver's outcomes for ``n`` transmissions."""
    sub = sender.resolved("direct")
    elim = elimination_povm()
    if sub is None:
        tab = direct_honest_table()
        decl = rng.integers(4, size=n)
        outs = [tab.cols[_sample(rng, tab.probs[d])] for d in decl]
        return [tab.rows[d] for d in decl], outs
    if sub == "entangled":
        # Alice measures her register in the computational basis to declare.
        psi = entangled_cheat_state(qutrit_states())
        joint = np.array(
            [
                [np.vdot(psi, la.kron(la.projector(la.basis(4, m)), e) @ psi).real for e in elim.operators]
                for m in range(4)
            ]
        ).ravel()
        picks = [_sample(rng, joint) for _ in range(n)]
        return [CYCLIC_LABELS[i // 6] for i in picks], [elim.labels[i % 6] for i in picks]
    tab = injection_table()
    decl, outs = [], []
    for _ in range(n):
        k = sender.injected if sender.injected is not None else int(rng.integers(3))
        decl.append(CYCLIC_LABELS[int(rng.integers(4))])
        outs.append(tab.cols[_sample(rng, tab.probs[k])])
    return decl, outs


def _reversed_test_rows(sender: PartyStrategy, n: int, rng) -> tuple[list, list]:
    sub = sender.resolved("reversed")
    povm = reversed_receiver_povm()
    if sub is None:
        tab = reversed_honest_table()
        picks = rng.integers(6, size=n)
        return [REVERSED_LABELS[k] for k in picks], [tab.cols[_sample(rng, tab.probs[k])] for k in picks]
    if sub == "entangled":
        psi = reversed_cheat_state()
        joint = np.array(
            [
                [np.vdot(psi, la.kron(la.projector(la.basis(6, k)), e) @ psi).real for e in povm.operators]
                for k in range(6)
            ]
        ).ravel()
        picks = [_sample(rng, joint) for _ in range(n)]
        return [REVERSED_LABELS[i // 4] for i in picks], [povm.labels[i % 4] for i in picks]
    tab = reversed_eigenvector_table()
    decl, outs = [], []
    for _ in range(n):
        target = int(rng.integers(4))
        decl.append(REVERSED_LABELS[int(rng.integers(6))])
        outs.append(tab.cols[_sample(rng, tab.probs[target])])
    return decl, outs


def _consistent(direction: str, declared, outcome) -> bool:
    if direction == "direct":
        b, v = outcome
        x0, x1 = bits(declared)
        return xbit(x0, x1, b) == v
    b, v = declared
    x0, x1 = bits(outcome)
    return xbit(x0, x1, b) == v


def testing_subprotocol(
    n_rounds: int,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    sender: PartyStrategy | None = None,
    seed=None,
    direction: str = "direct",
) -> TestReport:
    """
    Declare-then-check: the sender transmits ``n_rounds`` states, then the
    receiver picks a uniformly random subset of ``round(test_fraction * n)``
    positions, the sender declares them, and the receiver aborts on any
    outcome the declared state could not have produced.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    if n_rounds < 1:
        raise ValueError("n_rounds must be positive")
    if direction not in ("direct", "reversed"):
        raise ValueError(f"unknown direction {direction!r}")
    sender = sender or honest("alice" if direction == "direct" else "bob")
    rng = _rng(seed)
    rows = _direct_test_rows if direction == "direct" else _reversed_test_rows
    declared, outcomes = rows(sender, n_rounds, rng)
    k = max(1, round(test_fraction * n_rounds))
    tested = rng.choice(n_rounds, size=k, replace=False)
    mismatches = sum(0 if _consistent(direction, declared[i], outcomes[i]) else 1 for i in tested)
    return TestReport(aborted=mismatches > 0, mismatches=int(mismatches), tested=int(k))


# -------------------------------------------------------------- classical


def classical_protocols(which: int, s: float = 0.5, seed=None, alice=None, bob=None) -> RoundRecord:
    """
    The trivial classical protocols: (1) Alice sends one bit of her choice,
    (2) Alice sends all three bits and Bob reads one, (3) protocol 1 with
    probability ``s`` and protocol 2 otherwise.
    """
    alice = alice or honest("alice")
    bob = bob or honest("bob")
    _both_cheating(alice, bob)
    rng = _rng(seed)
    if which == 3:
        if not 0 <= s <= 1:
            raise ValueError(f"s must lie in [0, 1], got {s}")
        which = 1 if rng.random() < s else 2
        proto = f"classical-3/{which}"
    elif which in (1, 2):
        proto = f"classical-{which}"
    else:
        raise ValueError(f"unknown classical protocol {which}")

    x0, x1 = int(rng.integers(2)), int(rng.integers(2))
    b = int(rng.integers(3))
    base = dict(protocol=proto, alice_mode=alice.mode, bob_mode=bob.mode, x0=x0, x1=x1, b=b, y=xbit(x0, x1, b))
    if which == 1:
        # Alice picks which bit to send, so she knows b.
        if alice.cheating:
            return RoundRecord(**base, alice_guess=b)
        if bob.cheating:
            other = int(rng.integers(2))
            pair = _complete_pair(b, xbit(x0, x1, b), other)
            return RoundRecord(**base, bob_guess=pair)
        return RoundRecord(**base)
    if alice.cheating:
        return RoundRecord(**base, alice_guess=int(rng.integers(3)))
    if bob.cheating:
        return RoundRecord(**base, bob_guess=(x0, x1))
    return RoundRecord(**base)


def _complete_pair(b: int, known: int, guess_next: int) -> tuple[int, int]:
    """(x0, x1) from x_b and a guess of x_{(b+1) mod 3}."""
    vals = {b: known, (b + 1) % 3: guess_next, (b + 2) % 3: known ^ guess_next}
    return vals[0], vals[1]


# ------------------------------------------------------------ enumeration


@dataclass(frozen=True)
class EnumerationResult:
    cases: int
    failures: int

    @property
    def ok(self) -> bool:
        return self.failures == 0


def enumerate_standard_wrapper() -> EnumerationResult:
    """y' = X_B for every (X0, X1, B, x0, x1, b) with y = x_b."""
    cases = failures = 0
    for X0, X1, B, x0, x1, b in itertools.product((0, 1), (0, 1), range(3), (0, 1), (0, 1), range(3)):
        _, _, y_prime = wrap_standard(x0, x1, b, xbit(x0, x1, b), X0, X1, B)
        cases += 1
        failures += y_prime != xbit(X0, X1, B)
    return EnumerationResult(cases, failures)


def enumerate_reversed_postprocess() -> EnumerationResult:
    """Bob's final bit equals X_b for every (X0, X1, x0, x1, b)."""
    cases = failures = 0
    for X0, X1, x0, x1, b in itertools.product((0, 1), (0, 1), (0, 1), (0, 1), range(3)):
        rec = RoundRecord("reversed", "honest", "honest", x0=x0, x1=x1, b=b, y=xbit(x0, x1, b))
        out = reversed_postprocess(X0, X1, rec)
        cases += 1
        failures += out.y_prime != xbit(X0, X1, b)
    return EnumerationResult(cases, failures)


def r_distribution(B: int) -> dict[int, Fraction]:
    """Exact law of r for fixed B with b uniform."""
    dist = {r: Fraction(0) for r in range(3)}
    for b in range(3):
        dist[(b + 2 * B) % 3] += Fraction(1, 3)
    return dist


def alice_view_distribution(B: int) -> dict[tuple, Fraction]:
    """Exact law of Alice's wrapper view (x0, x1, r) for fixed B, honest parties."""
    dist: dict[tuple, Fraction] = {}
    for x0, x1, b in itertools.product((0, 1), (0, 1), range(3)):
        key = (x0, x1, (b + 2 * B) % 3)
        dist[key] = dist.get(key, Fraction(0)) + Fraction(1, 12)
    return dist


def bob_posteriors() -> list[dict[tuple[int, int], Fraction]]:
    """
    For every possible honest-Bob view (B, b, y, r, s), the exact posterior
    over Alice's (X0, X1) under uniform priors on X and on the dummy bits.
    """
    joint: dict[tuple, dict[tuple[int, int], Fraction]] = {}
    w = Fraction(1, 4 * 4 * 3)
    for B in range(3):
        for X0, X1, x0, x1, b in itertools.product((0, 1), (0, 1), (0, 1), (0, 1), range(3)):
            y = xbit(x0, x1, b)
            r, s, _ = wrap_standard(x0, x1, b, y, X0, X1, B)
            view = (B, b, y, r, s)
            joint.setdefault(view, {}).setdefault((X0, X1), Fraction(0))
            joint[view][(X0, X1)] += w
    out = []
    for view, table in joint.items():
        total = sum(table.values())
        out.append({k: v / total for k, v in table.items()} | {"view": view})
    return out


def bob_posterior_uniform() -> bool:
    """
    True iff every honest-Bob view leaves exactly the two X pairs consistent
    with X_B = y', each with posterior 1/2.
    """
    for post in bob_posteriors():
        B, b, y, r, s = post["view"]
        y_prime = y ^ s[B]
        pairs = {k: v for k, v in post.items() if k != "view" and v > 0}
        expected = {(X0, X1) for X0, X1 in itertools.product((0, 1), (0, 1)) if xbit(X0, X1, B) == y_prime}
        if set(pairs) != expected or any(v != Fraction(1, 2) for v in pairs.values()):
            return False
    return True


def enumerate_round_trip() -> EnumerationResult:
    """
    Semi-random from standard from semi-random, with every inner outcome
    enumerated: the outer output always satisfies y = x_b.
    """
    cases = failures = 0
    for x0, x1, b in itertools.product((0, 1), (0, 1), range(3)):
        for d0, d1, inner_b in itertools.product((0, 1), (0, 1), range(3)):
            _, _, y_prime = wrap_standard(d0, d1, inner_b, xbit(d0, d1, inner_b), x0, x1, b)
            cases += 1
            failures += y_prime != xbit(x0, x1, b)
    return EnumerationResult(cases, failures)


# ----------------------------------------------------- batched simulation


SCENARIOS = (
    "direct-honest",
    "direct-alice-cheat",
    "direct-alice-entangled",
    "direct-bob-cheat",
    "reversed-honest",
    "reversed-alice-cheat",
    "reversed-bob-cheat",
    "reversed-bob-eigenvector",
)


@dataclass(frozen=True)
class BatchCounts:
    """Counts of (row, outcome) pairs plus how often the cheating party succeeded."""

    scenario: str
    rows: tuple
    cols: tuple
    counts: np.ndarray
    successes: int
    rounds: int
    theory: np.ndarray = field(repr=False)
    success_theory: float | None = None


def scenario_table(scenario: str, alice_sub: str | None = None) -> tuple[BornTable, np.ndarray, np.ndarray | None]:
    """
    Born table, row priors and success mask for a scenario.

    The mask marks (row, column) cells counted as a successful cheat.
    """
    if scenario == "direct-honest":
        tab = direct_honest_table()
        return tab, np.full(4, 0.25), None
    if scenario == "direct-alice-cheat":
        tab = injection_table()
        guesses = injection_guesses()
        mask = np.array([[lab[0] == guesses[k] for lab in tab.cols] for k in tab.rows])
        return tab, np.full(3, 1 / 3), mask
    if scenario == "direct-alice-entangled":
        joint = direct_entangled_table()
        a_labels = alice_test_povm().labels
        b_labels = elimination_povm().labels
        probs = joint.probs[0].reshape(len(a_labels), len(b_labels))
        priors = probs.sum(axis=1)
        tab = BornTable(a_labels, b_labels, probs / priors[:, None])
        guesses = entangled_guess_map()
        mask = np.array([[c[0] == guesses[r] for c in tab.cols] for r in tab.rows])
        return tab, priors / priors.sum(), mask
    if scenario == "reversed-bob-eigenvector":
        tab = reversed_eigenvector_table()
        mask = np.array([[r == c for c in tab.cols] for r in tab.rows])
        return tab, np.full(4, 0.25), mask
    if scenario == "direct-bob-cheat":
        tab = direct_bob_table()
        mask = np.array([[r == c for c in tab.cols] for r in tab.rows])
        return tab, np.full(4, 0.25), mask
    if scenario == "reversed-honest":
        tab = reversed_honest_table()
        return tab, np.full(6, 1 / 6), None
    if scenario == "reversed-alice-cheat":
        tab = reversed_alice_table(alice_sub or "basis")
        mask = np.array([[r[0] == c for c in tab.cols] for r in tab.rows])
        return tab, np.full(6, 1 / 6), mask
    if scenario == "reversed-bob-cheat":
        joint = reversed_entangled_table()
        keep = [i for i, r in enumerate(joint.rows) if r in CYCLIC_LABELS]
        probs = joint.probs[keep]
        priors = probs.sum(axis=1)
        tab = BornTable(tuple(joint.rows[i] for i in keep), joint.cols, probs / priors[:, None])
        mask = np.array([[r == c for c in tab.cols] for r in tab.rows])
        return tab, priors / priors.sum(), mask
    raise ValueError(f"unknown scenario {scenario!r}")


def simulate_counts(scenario: str, rounds: int, seed: int = 42, alice_sub: str | None = None) -> BatchCounts:
    """
    Vectorised Monte Carlo of ``rounds`` rounds.

    Rows are drawn from the scenario's priors, outcomes from the Born table;
    block ``k`` of ``BLOCK_SIZE`` rounds uses ``SeedSequence([seed, SCENARIOS.index(scenario), k])``.
    """
    if rounds < 1:
        raise ValueError("rounds must be positive")
    tab, priors, mask = scenario_table(scenario, alice_sub)
    n_rows, n_cols = tab.probs.shape
    cdf = np.cumsum(tab.probs, axis=1)
    cdf[:, -1] = 1.0
    row_cdf = np.cumsum(priors)
    row_cdf[-1] = 1.0
    counts = np.zeros((n_rows, n_cols), dtype=np.int64)
    stream = SCENARIOS.index(scenario)
    for block in range(math.ceil(rounds / BLOCK_SIZE)):
        size = min(BLOCK_SIZE, rounds - block * BLOCK_SIZE)
        rng = np.random.default_rng(np.random.SeedSequence([seed, stream, block]))
        u = rng.random((size, 2))
        rows = np.searchsorted(row_cdf, u[:, 0], side="right")
        cols = (u[:, 1:2] >= cdf[rows]).sum(axis=1)
        np.add.at(counts, (rows, cols), 1)
    successes = int(counts[mask].sum()) if mask is not None else 0
    success_theory = float((priors[:, None] * tab.probs)[mask].sum()) if mask is not None else None
    return BatchCounts(scenario, tab.rows, tab.cols, counts, successes, rounds, tab.probs, success_theory)
