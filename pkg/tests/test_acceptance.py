"""
Acceptance suite: one test per criterion, each printing a single PASS/FAIL
line with its measured residual and runtime. Run with ``pytest -m acceptance``
or directly as ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from qxot import linalg as la
from qxot import measurements as m
from qxot import protocol as pr
from qxot.cheating import (
    EigProblem,
    alice_notest_closed_form,
    alice_notest_oracle,
    alice_test_bound_closed_form,
    alice_test_certificate,
    alice_test_oracle,
    bob_cheat_closed_form,
    bob_cheat_oracle,
    classical_tradeoff,
    family_ensemble,
    margin_comparison,
    reversed_alice_ensemble,
    tradeoff_metric,
)
from qxot.reports import grid_values, random_realizable, simulate_table
from qxot.states import OPTIMAL_CORNERS, QUTRIT_PARAMS, OverlapParams, qutrit_states, three_qutrit_states

pytestmark = pytest.mark.acceptance

SEED = 20240601


class Verdict:
    def __init__(self):
        self.ok = True
        self.notes: list[str] = []

    def require(self, cond: bool, note: str) -> None:
        self.ok = self.ok and bool(cond)
        self.notes.append(("" if cond else "!") + note)


@contextmanager
def criterion(number: int, title: str, limit: float, log):
    v = Verdict()
    t0 = time.perf_counter()
    try:
        yield v
    except Exception as exc:
        v.require(False, f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - t0
    v.require(elapsed < limit, f"{elapsed:.2f}s < {limit:g}s")
    line = f"[{'PASS' if v.ok else 'FAIL'}] {number}. {title}: " + "; ".join(v.notes)
    print(line)
    log(line)
    assert v.ok, line


def test_1_exact_values(acceptance_log):
    with criterion(1, "exact qutrit values", 1.0, acceptance_log) as v:
        b = bob_cheat_closed_form(QUTRIT_PARAMS)
        a_test = alice_test_bound_closed_form(QUTRIT_PARAMS)
        a_notest = alice_notest_closed_form(QUTRIT_PARAMS).overall
        res = max(abs(b - 0.75), abs(a_test - 0.5), abs(a_notest - 0.5))
        v.require(res <= 1e-12, f"B_OT={b:.15g}, A_OT test={a_test:.15g}, no test={a_notest:.15g}, residual {res:.1e}")


def _lambda_residual(p: OverlapParams, nt) -> float:
    """Compare every supported closed-form eigenvalue with the Jacobi spectrum."""
    ep = EigProblem.from_params(p)
    worst = 0.0
    for closed, op in ((nt.lam_0, ep.m0), (nt.lam_2, ep.m2)):
        spectrum = np.sort(la.hermitian_eig(ep.rescaled(op))[0])
        finite = np.sort([x for x in closed if not math.isnan(x)])
        if len(finite) != len(spectrum):
            return math.inf
        worst = max(worst, float(np.max(np.abs(spectrum - finite))))
    return worst


def test_2_oracle_equivalence(acceptance_log):
    with criterion(2, "closed forms vs numerical oracles", 10.0, acceptance_log) as v:
        pts = random_realizable(np.random.default_rng(SEED), 200)
        b_res = a_res = l_res = 0.0
        for p in pts:
            b_res = max(b_res, abs(bob_cheat_oracle(p) - bob_cheat_closed_form(p)))
            a_res = max(a_res, abs(alice_test_oracle(p) - alice_test_bound_closed_form(p)))
            nt, orc = alice_notest_closed_form(p), alice_notest_oracle(p)
            l_res = max(l_res, abs(nt.p01 - orc.p01), abs(nt.p2 - orc.p2), _lambda_residual(p, nt))
        v.require(len(pts) == 200, "200 points")
        v.require(b_res <= 1e-8, f"SRM {b_res:.1e}")
        v.require(a_res <= 1e-8, f"four-outcome {a_res:.1e}")
        v.require(l_res <= 1e-8, f"eigenvalues {l_res:.1e}")


def test_3_optimality_certificates(acceptance_log):
    with criterion(3, "Helstrom certificates", 5.0, acceptance_log) as v:
        qe = family_ensemble(QUTRIT_PARAMS)
        srm = m.square_root_measurement(qe)
        cert = m.min_error_certificate(srm, qe)
        v.require(cert.max_violation <= 1e-9, f"SRM qutrit {cert.max_violation:.1e}")

        pts = random_realizable(np.random.default_rng(SEED), 20, feasible=True)
        viol = [alice_test_certificate(p).max_violation for p in pts]
        bad = sum(x > 1e-9 for x in viol)
        v.require(bad == 0, f"four-outcome at 20 random points: {bad} fail, worst {max(viol):.3g}")

        re = reversed_alice_ensemble()
        rv = max(m.min_error_certificate(p, re).max_violation for p in (m.reversed_cheat_povm(), m.computational_basis_povm(3)))
        v.require(rv <= 1e-9, f"reversed measurements {rv:.1e}")

        bent = m.min_error_certificate(m.rotated_outcome(srm, 0, 0.05), qe)
        v.require(not bent.optimal, f"perturbed POVM rejected ({bent.max_violation:.1e})")


def test_4_floor(acceptance_log):
    with criterion(4, "B_OT floor over 201x201 planes", 5.0, acceptance_log) as v:
        vals = grid_values(201)
        best, argmins = math.inf, set()
        for x in vals:
            for g in vals:
                for p in (OverlapParams(x, 0.0, g), OverlapParams(0.0, x, g)):
                    if not (p.realizable and p.honest_feasible):
                        continue
                    b = bob_cheat_closed_form(p)
                    if b < best - 1e-12:
                        best, argmins = b, {p}
                    elif abs(b - best) <= 1e-12:
                        argmins.add(p)
        v.require(best >= 0.75 - 1e-9, f"minimum {best:.15g}")
        v.require(argmins == set(OPTIMAL_CORNERS), f"attained at {len(argmins)} points, all corners")


def test_5_reductions(acceptance_log):
    with criterion(5, "reduction enumerations", 1.0, acceptance_log) as v:
        a = pr.enumerate_standard_wrapper()
        v.require(a.cases == 144 and a.failures == 0, f"y' = X_B in {a.cases}/{a.cases} cases")
        b = pr.enumerate_reversed_postprocess()
        v.require(b.cases == 48 and b.failures == 0, f"X_b = x_b xor t_b in {b.cases}/{b.cases} cases")
        r_law = [pr.r_distribution(B) for B in range(3)]
        v.require(all(d == {0: Fraction(1, 3), 1: Fraction(1, 3), 2: Fraction(1, 3)} for d in r_law), "r uniform for each B")
        views = [pr.alice_view_distribution(B) for B in range(3)]
        v.require(views[0] == views[1] == views[2], "Alice's view independent of B")
        v.require(pr.bob_posterior_uniform(), "Bob's posterior uniform")


EXPECTED_SUCCESS = {
    "direct-alice-cheat": 0.5,
    "direct-alice-entangled": 0.5,
    "direct-bob-cheat": 0.75,
    "reversed-alice-cheat": 0.5,
    "reversed-bob-cheat": 0.75,
    "reversed-bob-eigenvector": 0.75,
}


def test_6_monte_carlo(acceptance_log):
    with criterion(6, "Monte Carlo vs theory columns, 600k rounds each", 60.0, acceptance_log) as v:
        for sc in pr.SCENARIOS:
            t = simulate_table(sc, 600_000, SEED)
            if sc.endswith("honest"):
                allowed = (0.0, 1 / 3) if sc.startswith("direct") else (0.0, 0.5)
                entries = all(min(abs(c.p_t - a) for a in allowed) <= 1e-12 for c in t.cells)
                v.require(entries, f"{sc} p_t in {{{', '.join(f'{a:.3g}' for a in allowed)}}}")
            else:
                expected = EXPECTED_SUCCESS[sc]
                v.require(abs(t.success_theory - expected) <= 1e-12, f"{sc} theory {t.success_theory:.12g}")
                v.require(t.success_z <= 5, f"success {t.success_frequency:.5f} ({t.success_z:.2f} sigma)")
            v.require(t.max_z <= 5, f"cells {t.max_z:.2f} sigma")


def test_7_classical_baseline(acceptance_log):
    with criterion(7, "classical tradeoff line", 1.0, acceptance_log) as v:
        metrics = [classical_tradeoff(Fraction(i, 100))[2] for i in range(101)]
        v.require(all(x == 5 for x in metrics), "3A + 4B = 5 at 101 points")
        q = tradeoff_metric(0.5, 0.75)
        v.require(q == 4.5, f"quantum point {q}")
        mc = margin_comparison()
        v.require(mc.xot_margin == 1 and abs(mc.ot_margin - 0.147) < 1e-12 and mc.xot_advantage_larger,
                  f"margins {mc.xot_margin:g} > {mc.ot_margin:.3f}")


def test_8_folded_gram(acceptance_log):
    with criterion(8, "three-qutrit Gram matrix", 1.0, acceptance_log) as v:
        res = float(np.max(np.abs(la.gram_matrix(three_qutrit_states()) - la.gram_matrix(qutrit_states()))))
        v.require(res <= 1e-12, f"max deviation {res:.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
