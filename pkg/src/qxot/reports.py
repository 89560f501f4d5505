"""
Datasets and reports behind the command line: overlap sweeps, Monte-Carlo
frequency tables, the classical tradeoff line and the verification suite.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from . import measurements
from .cheating import (
    REFERENCE_LOWER_BOUNDS,
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
    reversed_alice_cheat,
    reversed_alice_ensemble,
    reversed_bob_cheat,
    tradeoff_metric,
)
from .linalg import gram_matrix
from .measurements import (
    computational_basis_povm,
    elimination_povm,
    min_error_certificate,
    reversed_cheat_povm,
    square_root_measurement,
)
from .protocol import (
    BatchCounts,
    bob_posterior_uniform,
    enumerate_reversed_postprocess,
    enumerate_standard_wrapper,
    r_distribution,
    simulate_counts,
)
from .states import (
    OPTIMAL_CORNERS,
    QUTRIT_PARAMS,
    OverlapParams,
    three_qutrit_states,
    qutrit_family,
    qutrit_states,
)

SWEEP_HEADER = (
    "re_f",
    "im_f",
    "g",
    "realizable",
    "honest_feasible",
    "b_ot",
    "a_test_bound",
    "a_notest_overall",
    "a_notest_p01",
    "a_notest_p2",
    "dominant_branch",
)
_SWEEP_VALUES = SWEEP_HEADER[5:10]
PLANES = ("reF-g", "imF-g", "3d")
DEFAULT_GRID = {"reF-g": 201, "imF-g": 201, "3d": 51}
DEFAULT_EXTENT = Fraction(1, 3)
FREQUENCY_TOL = 1e-12
SIGMA_LIMIT = 5.0


def fmt_real(x: float | None) -> str:
    """17 significant digits; empty for an absent value."""
    if x is None:
        return ""
    return format(float(x), ".17g")


def parse_real(s: str) -> float | None:
    return None if s == "" else float(s)


def fmt_flag(v: bool) -> str:
    return "true" if v else "false"


def parse_flag(s: str) -> bool:
    if s not in ("true", "false"):
        raise ValueError(f"not a flag: {s!r}")
    return s == "true"


# ----------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepRow:
    re_f: float
    im_f: float
    g: float
    realizable: bool
    honest_feasible: bool
    b_ot: float | None = None
    a_test_bound: float | None = None
    a_notest_overall: float | None = None
    a_notest_p01: float | None = None
    a_notest_p2: float | None = None
    dominant_branch: str | None = None

    @property
    def params(self) -> OverlapParams:
        return OverlapParams(self.re_f, self.im_f, self.g)

    def as_strings(self) -> list[str]:
        return [
            fmt_real(self.re_f),
            fmt_real(self.im_f),
            fmt_real(self.g),
            fmt_flag(self.realizable),
            fmt_flag(self.honest_feasible),
            *(fmt_real(getattr(self, k)) for k in _SWEEP_VALUES),
            self.dominant_branch or "",
        ]

    def as_json(self) -> dict:
        return {k: getattr(self, k) for k in SWEEP_HEADER}

    @classmethod
    def from_mapping(cls, d: dict) -> "SweepRow":
        """Build from a CSV record (all strings) or a JSON record."""

        def real(v):
            return parse_real(v) if isinstance(v, str) else (None if v is None else float(v))

        def flag(v):
            return parse_flag(v) if isinstance(v, str) else bool(v)

        return cls(
            re_f=real(d["re_f"]),
            im_f=real(d["im_f"]),
            g=real(d["g"]),
            realizable=flag(d["realizable"]),
            honest_feasible=flag(d["honest_feasible"]),
            **{k: real(d[k]) for k in _SWEEP_VALUES},
            dominant_branch=d["dominant_branch"] or None,
        )


def sweep_row(p: OverlapParams) -> SweepRow:
    """Evaluate every closed form at ``p``; values stay absent when ``p`` is not realisable."""
    if not p.realizable:
        return SweepRow(p.re_f, p.im_f, p.g, False, False)
    nt = alice_notest_closed_form(p)
    return SweepRow(
        p.re_f,
        p.im_f,
        p.g,
        True,
        p.honest_feasible,
        b_ot=bob_cheat_closed_form(p),
        a_test_bound=alice_test_bound_closed_form(p),
        a_notest_overall=nt.overall,
        a_notest_p01=nt.p01,
        a_notest_p2=nt.p2,
        dominant_branch=nt.dominant_branch,
    )


def grid_values(n: int, extent: Fraction = DEFAULT_EXTENT) -> list[float]:
    """``n`` evenly spaced points on [-extent, extent], computed exactly then rounded once."""
    if n < 2:
        raise ValueError(f"grid must be at least 2, got {n}")
    extent = Fraction(extent)
    return [float(Fraction(2 * i - (n - 1), n - 1) * extent) for i in range(n)]


def sweep(plane: str, grid: int, extent: Fraction = DEFAULT_EXTENT) -> list[SweepRow]:
    """Rows over a plane (the third coordinate held at 0) or the cube, lexicographic in (re_f, im_f, g)."""
    vals = grid_values(grid, extent)
    if plane == "reF-g":
        points = [(x, 0.0, g) for x in vals for g in vals]
    elif plane == "imF-g":
        points = [(0.0, y, g) for y in vals for g in vals]
    elif plane == "3d":
        points = [(x, y, g) for x in vals for y in vals for g in vals]
    else:
        raise ValueError(f"unknown plane {plane!r}; choose from {PLANES}")
    return [sweep_row(OverlapParams(*pt)) for pt in points]


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow(r.as_strings())
    return buf.getvalue()


def parse_sweep_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    return [SweepRow.from_mapping(rec) for rec in reader]


def json_document(command: str, seed: int | None, rows: list, **extra) -> str:
    meta = {"command": command, "seed": seed, "version": __version__, **extra}
    return json.dumps({"meta": meta, "rows": rows}, indent=1, allow_nan=False) + "\n"


def sweep_json(rows: list[SweepRow], seed: int | None = None) -> str:
    return json_document("sweep", seed, [r.as_json() for r in rows])


def parse_sweep_json(text: str) -> list[SweepRow]:
    return [SweepRow.from_mapping(r) for r in json.loads(text)["rows"]]


# ------------------------------------------------------- frequency tables


def label_str(label) -> str:
    if isinstance(label, tuple):
        return "".join(str(x) for x in label)
    return str(label)


@dataclass(frozen=True)
class FrequencyCell:
    sent: str
    outcome: str
    count: int
    frequency: float
    p_t: float
    sigma: float

    @property
    def z(self) -> float:
        return abs(self.frequency - self.p_t) / self.sigma

    def as_json(self) -> dict:
        return {
            "sent": self.sent,
            "outcome": self.outcome,
            "count": self.count,
            "frequency": self.frequency,
            "p_t": self.p_t,
            "sigma": self.sigma,
            "z": self.z,
        }


@dataclass(frozen=True)
class FrequencyTable:
    """
    Observed frequencies of each outcome per sent state against the Born
    probabilities ``p_t``. ``sigma`` is the binomial standard error of a
    row with ``N`` draws, floored at ``1/N`` when ``p_t`` is 0 or 1.
    """

    scenario: str
    rounds: int
    seed: int
    cells: tuple[FrequencyCell, ...]
    success_count: int | None = None
    success_theory: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def success_frequency(self) -> float | None:
        if self.success_count is None:
            return None
        return self.success_count / self.rounds

    @property
    def success_sigma(self) -> float | None:
        if self.success_theory is None:
            return None
        p = self.success_theory
        return max(math.sqrt(p * (1 - p) / self.rounds), 1 / self.rounds)

    @property
    def success_z(self) -> float | None:
        if self.success_theory is None:
            return None
        return abs(self.success_frequency - self.success_theory) / self.success_sigma

    @property
    def max_z(self) -> float:
        return max(c.z for c in self.cells)

    def row_sums(self) -> dict[str, float]:
        sums: dict[str, float] = {}
        for c in self.cells:
            sums[c.sent] = sums.get(c.sent, 0.0) + c.frequency
        return sums

    def within(self, limit: float = SIGMA_LIMIT) -> bool:
        ok = self.max_z <= limit
        if self.success_z is not None:
            ok = ok and self.success_z <= limit
        return ok

    def summary(self) -> str:
        line = f"{self.scenario}: {self.rounds} rounds, seed {self.seed}, max |f - p_t| = {self.max_z:.2f} sigma"
        if self.success_theory is not None:
            line += (
                f"; cheating success {self.success_frequency:.6f}"
                f" (theory {self.success_theory:.6f}, {self.success_z:.2f} sigma)"
            )
        return line


def frequency_table(counts: BatchCounts, seed: int) -> FrequencyTable:
    cells = []
    for i, sent in enumerate(counts.rows):
        n = int(counts.counts[i].sum())
        for j, outcome in enumerate(counts.cols):
            p = float(counts.theory[i, j])
            k = int(counts.counts[i, j])
            freq = k / n if n else 0.0
            if n == 0:
                sigma = 1.0
            elif p <= FREQUENCY_TOL or p >= 1 - FREQUENCY_TOL:
                sigma = 1 / n
            else:
                sigma = max(math.sqrt(p * (1 - p) / n), 1 / n)
            cells.append(FrequencyCell(label_str(sent), label_str(outcome), k, freq, p, sigma))
    success = counts.successes if counts.success_theory is not None else None
    return FrequencyTable(counts.scenario, counts.rounds, seed, tuple(cells), success, counts.success_theory)


def simulate_table(scenario: str, rounds: int, seed: int, alice_sub: str | None = None) -> FrequencyTable:
    return frequency_table(simulate_counts(scenario, rounds, seed, alice_sub), seed)


FREQUENCY_HEADER = ("sent", "outcome", "count", "frequency", "p_t", "sigma", "z")


def frequency_csv(table: FrequencyTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FREQUENCY_HEADER)
    for c in table.cells:
        w.writerow([c.sent, c.outcome, c.count, fmt_real(c.frequency), fmt_real(c.p_t), fmt_real(c.sigma), fmt_real(c.z)])
    return buf.getvalue()


def frequency_json(table: FrequencyTable, **flags) -> str:
    return json_document(
        "simulate",
        table.seed,
        [c.as_json() for c in table.cells],
        scenario=table.scenario,
        rounds=table.rounds,
        success_frequency=table.success_frequency,
        success_theory=table.success_theory,
        success_sigma=table.success_sigma,
        **flags,
    )


# --------------------------------------------------------------- tradeoff

TRADEOFF_HEADER = (
    "kind",
    "s",
    "a_ot",
    "b_ot",
    "metric",
    "reference_b_ot_lower",
    "reference_a_ot_lower",
    "xot_margin",
    "ot_margin",
    "xot_advantage_larger",
)


@dataclass(frozen=True)
class TradeoffRow:
    kind: str
    s: float | None
    a_ot: float
    b_ot: float
    metric: float

    def as_json(self) -> dict:
        return {"kind": self.kind, "s": self.s, "a_ot": self.a_ot, "b_ot": self.b_ot, "metric": self.metric}


def tradeoff_rows(s_points: int) -> list[TradeoffRow]:
    """Classical mixtures at ``s_points`` evenly spaced ``s`` values, then the quantum point."""
    if s_points < 2:
        raise ValueError(f"s_points must be at least 2, got {s_points}")
    rows = []
    for i in range(s_points):
        s = Fraction(i, s_points - 1)
        a, b, metric = classical_tradeoff(s)
        rows.append(TradeoffRow("classical", float(s), a, b, metric))
    a_q = alice_notest_closed_form(QUTRIT_PARAMS).overall
    b_q = bob_cheat_closed_form(QUTRIT_PARAMS)
    rows.append(TradeoffRow("quantum", None, a_q, b_q, tradeoff_metric(round(a_q, 12), round(b_q, 12))))
    return rows


def _annotations() -> dict:
    m = margin_comparison()
    return {
        "reference_b_ot_lower": REFERENCE_LOWER_BOUNDS["b_ot"],
        "reference_a_ot_lower": REFERENCE_LOWER_BOUNDS["a_ot"],
        "xot_margin": m.xot_margin,
        "ot_margin": m.ot_margin,
        "xot_advantage_larger": m.xot_advantage_larger,
    }


def tradeoff_csv(rows: list[TradeoffRow]) -> str:
    ann = _annotations()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRADEOFF_HEADER)
    for r in rows:
        w.writerow(
            [
                r.kind,
                fmt_real(r.s),
                fmt_real(r.a_ot),
                fmt_real(r.b_ot),
                fmt_real(r.metric),
                fmt_real(ann["reference_b_ot_lower"]),
                fmt_real(ann["reference_a_ot_lower"]),
                fmt_real(ann["xot_margin"]),
                fmt_real(ann["ot_margin"]),
                fmt_flag(ann["xot_advantage_larger"]),
            ]
        )
    return buf.getvalue()


def tradeoff_json(rows: list[TradeoffRow], seed: int | None = None) -> str:
    return json_document("tradeoff", seed, [r.as_json() for r in rows], annotations=_annotations())


# ----------------------------------------------------------- verification


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""
    informational: bool = False
    seconds: float = 0.0

    def line(self) -> str:
        if self.informational:
            status = "INFO" if self.passed else "XFAIL"
        else:
            status = "PASS" if self.passed else "FAIL"
        text = f"{status:5s} {self.name:42s} residual={self.residual:.3e}"
        return text + (f"  {self.detail}" if self.detail else "")

    def as_json(self) -> dict:
        return {
            "name": self.name,
            "status": self.line().split()[0],
            "passed": self.passed,
            "residual": self.residual,
            "detail": self.detail,
            "informational": self.informational,
        }


def random_realizable(rng: np.random.Generator, n: int, feasible: bool = False) -> list[OverlapParams]:
    """Rejection-sample ``n`` realisable (optionally honest-feasible) overlap triples."""
    out = []
    while len(out) < n:
        rf, imf, g = rng.uniform(-1, 1, 3)
        if feasible:
            rf, imf, g = rf / 3, imf / 3, g / 3
        p = OverlapParams(float(rf), float(imf), float(g))
        if p.realizable and (not feasible or p.honest_feasible):
            out.append(p)
    return out


def _check(name: str, fn: Callable[[], tuple[bool, float, str]], informational: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, residual, detail = fn()
    except Exception as exc:  # a crash is a failed check, reported by name
        ok, residual, detail = False, math.inf, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), float(residual), detail, informational, time.perf_counter() - t0)


def _completeness():
    res = elimination_povm(check=False).completeness_residual()
    return res <= measurements.COMPLETENESS_TOL, res, f"normalisation {measurements.ELIMINATION_NORMALIZATION}"


def _qutrit_overlaps():
    res = float(np.max(np.abs(qutrit_family().gram() - circulant_gram(QUTRIT_PARAMS))))
    return res <= 1e-12, res, "F = 1/3, G = -1/3"


def _qutrit_exact():
    b = bob_cheat_closed_form(QUTRIT_PARAMS)
    nt = alice_notest_closed_form(QUTRIT_PARAMS)
    a = alice_test_bound_closed_form(QUTRIT_PARAMS)
    res = max(abs(b - 0.75), abs(nt.overall - 0.5), abs(a - 0.5))
    return res <= 1e-12, res, f"B_OT(1/3,-1/3) = {b:.12g}; A_OT = {nt.overall:.12g}"


def _oracles(seed: int):
    def run():
        pts = random_realizable(np.random.default_rng(seed), 200)
        worst = 0.0
        for p in pts:
            nt, orc = alice_notest_closed_form(p), alice_notest_oracle(p)
            worst = max(
                worst,
                abs(bob_cheat_closed_form(p) - bob_cheat_oracle(p)),
                abs(alice_test_bound_closed_form(p) - alice_test_oracle(p)),
                abs(nt.p01 - orc.p01),
                abs(nt.p2 - orc.p2),
            )
        return worst <= 1e-8, worst, "200 random realisable points"

    return run


def _srm_certificate():
    e = family_ensemble(QUTRIT_PARAMS)
    cert = min_error_certificate(square_root_measurement(e), e)
    return cert.optimal, cert.max_violation, f"success {cert.success:.12g}"


def _four_outcome_certificate(points):
    def run():
        worst = max(alice_test_certificate(p).max_violation for p in points)
        return worst <= measurements.CERTIFICATE_TOL, worst, f"{len(points)} points"

    return run


def _reversed_certificates():
    e = reversed_alice_ensemble()
    worst = 0.0
    for povm in (reversed_cheat_povm(), computational_basis_povm(3)):
        worst = max(worst, min_error_certificate(povm, e).max_violation)
    return worst <= measurements.CERTIFICATE_TOL, worst, f"success {reversed_alice_cheat():.12g}"


def _perturbed_fails():
    e = family_ensemble(QUTRIT_PARAMS)
    bent = measurements.rotated_outcome(square_root_measurement(e), 0, 0.05)
    cert = min_error_certificate(bent, e)
    return not cert.optimal, cert.max_violation, "rotated outcome must fail the certificate"


def _floor(n: int):
    def run():
        vals = grid_values(n)
        best, argmins = math.inf, []
        for x in vals:
            for g in vals:
                for p in (OverlapParams(x, 0.0, g), OverlapParams(0.0, x, g)):
                    if not p.honest_feasible:
                        continue
                    b = bob_cheat_closed_form(p)
                    if b < best - 1e-12:
                        best, argmins = b, [p]
                    elif abs(b - best) <= 1e-12:
                        argmins.append(p)
        corners = all(abs(bob_cheat_closed_form(c) - 0.75) <= 1e-12 for c in OPTIMAL_CORNERS)
        ok = best >= 0.75 - 1e-9 and corners
        return ok, max(0.0, 0.75 - best), f"minimum {best:.12g} at {len(argmins)} grid points"

    return run


def _reductions():
    a, b = enumerate_standard_wrapper(), enumerate_reversed_postprocess()
    r_uniform = all(all(v == Fraction(1, 3) for v in r_distribution(B).values()) for B in range(3))
    ok = a.ok and b.ok and r_uniform and bob_posterior_uniform()
    return ok, float(a.failures + b.failures), f"{a.cases} + {b.cases} cases"


def _classical():
    metrics = [classical_tradeoff(Fraction(i, 10))[2] for i in range(11)]
    m = margin_comparison()
    ok = all(x == 5 for x in metrics) and m.xot_margin == 1 and abs(m.ot_margin - 0.147) < 1e-12
    ok = ok and m.xot_advantage_larger and tradeoff_metric(0.5, 0.75) == 4.5
    return ok, max(abs(x - 5) for x in metrics), f"margins {m.xot_margin:g} vs {m.ot_margin:.3f}"


def _folded_gram():
    res = float(np.max(np.abs(gram_matrix(three_qutrit_states()) - gram_matrix(qutrit_states()))))
    return res <= 1e-12, res, "three-qutrit vs qutrit Gram matrices"


def _reversed_bob():
    res = max(abs(reversed_bob_cheat(mode) - 0.75) for mode in ("alice_no_test", "alice_tests"))
    return res <= 1e-12, res, "3/4 with and without tests"


def _monte_carlo(seed: int, rounds: int):
    def run():
        worst = 0.0
        for sc in ("direct-honest", "direct-bob-cheat", "reversed-alice-cheat"):
            worst = max(worst, simulate_table(sc, rounds, seed).max_z)
        return worst <= SIGMA_LIMIT, worst, f"{rounds} rounds per scenario (sigma units)"

    return run


def verify_checks(seed: int = 42, rounds: int = 200_000) -> list[CheckResult]:
    """
    The invariant suite. Checks marked informational document a known
    discrepancy and do not affect the overall verdict.
    """
    rng = np.random.default_rng(seed)
    generic = random_realizable(rng, 20, feasible=True)
    dominated = [p for p in random_realizable(rng, 400, feasible=True) if abs(p.g) >= abs(p.f)][:20]
    return [
        _check("elimination POVM completeness", _completeness),
        _check("qutrit family overlaps", _qutrit_overlaps),
        _check("qutrit exact values", _qutrit_exact),
        _check("closed forms vs oracles", _oracles(seed)),
        _check("SRM certificate (qutrit family)", _srm_certificate),
        _check("four-outcome certificate (corners)", _four_outcome_certificate(list(OPTIMAL_CORNERS))),
        _check("four-outcome certificate (|G| >= |F|)", _four_outcome_certificate(dominated)),
        _check("four-outcome certificate (generic)", _four_outcome_certificate(generic), informational=True),
        _check("reversed cheating-Alice certificates", _reversed_certificates),
        _check("perturbed POVM rejected", _perturbed_fails),
        _check("B_OT floor on 201x201 planes", _floor(201)),
        _check("reversed cheating-Bob values", _reversed_bob),
        _check("reduction enumerations", _reductions),
        _check("classical tradeoff line", _classical),
        _check("folded three-qutrit Gram matrix", _folded_gram),
        _check("Monte Carlo vs Born table", _monte_carlo(seed, rounds)),
    ]


def circulant_gram(p: OverlapParams) -> np.ndarray:
    """Gram matrix a symmetric family with overlaps ``p`` must have."""
    f, g = p.f, p.g
    row = np.array([1, np.conj(f), g, f])
    return np.array([np.roll(row, k) for k in range(4)])


def verify_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results if not r.informational)


def verify_text(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    gated = [r for r in results if not r.informational]
    failed = [r.name for r in gated if not r.passed]
    verdict = "all checks passed" if not failed else "failed: " + ", ".join(failed)
    lines.append(f"{sum(r.passed for r in gated)}/{len(gated)} gated checks passed; {verdict}")
    return "\n".join(lines) + "\n"


def verify_json(results: list[CheckResult], seed: int) -> str:
    return json_document("verify", seed, [r.as_json() for r in results], passed=verify_passed(results))
