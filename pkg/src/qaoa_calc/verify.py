"""Cross-validation harness: closed forms vs the series engine vs the exact
conjugation evaluator vs the dense statevector, plus difference-calculus
invariants.  Used by the CLI `verify` subcommand; every check is
deterministic given its seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import emulate, exact, oracle, series
from .cost import (CostFunction, HammingRampCost, MaxCutCost,
                   balanced_triangle_instance, balanced_two_triangle_instance,
                   random_balanced_max2sat, random_graph, random_max_ksat,
                   random_qubo)
from .errors import SizeLimitError
from .hamop import to_hamiltonian
from .series import QaoaSchedule


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + \
            (f": {self.detail}" if self.detail else "")


def _check(name: str, err: float, tol: float) -> CheckResult:
    return CheckResult(name, err <= tol, f"max|diff| = {err:.3g} (tol {tol:.1g})")


def _oracle_expectation(cost: CostFunction, sched) -> float:
    return oracle.expectation(oracle.simulate(cost, sched), cost)


def builtin_checks(seed: int = 1) -> list[Callable[[], CheckResult]]:
    """The bundled golden suite (small, runs in seconds)."""
    rng = np.random.Generator(np.random.Philox(key=seed))

    def ramp_closed_form() -> CheckResult:
        err = 0.0
        for n in (3, 5):
            for alpha in (1.0, 2.0):
                c = HammingRampCost(n, alpha)
                for _ in range(4):
                    g, b = rng.uniform(-1.5, 1.5, size=2)
                    err = max(err, abs(exact.hamming_ramp_p1(alpha, n, g, b)
                                       - _oracle_expectation(c, [(g, b)])))
        return _check("hamming ramp closed form vs oracle", err, 1e-10)

    def maxcut_closed_form() -> CheckResult:
        err = 0.0
        for k in range(4):
            g = random_graph(7, 10 + k, seed + 10 * k)
            c = MaxCutCost(g)
            gamma, beta = rng.uniform(-1.5, 1.5, size=2)
            v = exact.maxcut_p1(g, gamma, beta)
            err = max(err, abs(v - _oracle_expectation(c, [(gamma, beta)])))
            err = max(err, abs(v - exact.qubo_p1(to_hamiltonian(c), gamma, beta)))
        return _check("maxcut closed form vs oracle and qubo form", err, 1e-9)

    def balanced_closed_form() -> CheckResult:
        err = 0.0
        for inst in (balanced_triangle_instance(), balanced_two_triangle_instance(),
                     random_balanced_max2sat(8, 9, seed + 3)):
            gamma, beta = rng.uniform(-1.2, 1.2, size=2)
            err = max(err, abs(exact.balanced_max2sat_p1(inst, gamma, beta)
                               - _oracle_expectation(inst, [(gamma, beta)])))
        return _check("balanced max-2-sat closed form vs oracle", err, 1e-9)

    def conjugation_vs_oracle() -> CheckResult:
        err = 0.0
        for p in (1, 2):
            sched = [(float(g), float(b)) for g, b in rng.uniform(-0.9, 0.9, size=(p, 2))]
            for c in (MaxCutCost(random_graph(6, 8, seed + 21)),
                      random_qubo(6, 7, seed + 22),
                      random_max_ksat(6, 9, 3, seed + 23)):
                err = max(err, abs(exact.expectation_exact(c, sched)
                                   - _oracle_expectation(c, sched)))
        return _check("layerwise conjugation vs oracle (p <= 2)", err, 1e-8)

    def series_third_order() -> CheckResult:
        err = 0.0
        for p in (1, 3):
            sched = QaoaSchedule.from_pairs(
                [(float(g), float(b)) for g, b in rng.uniform(-0.5, 0.5, size=(p, 2))])
            c = random_qubo(6, 6, seed + 31)
            est = series.series_qaoap(c, sched, 3)
            err = max(err, abs(est.value - series.leading_order_qaoap(c, sched)))
        return _check("series order 3 equals leading order", err, 1e-12)

    def series_fifth_order() -> CheckResult:
        err = 0.0
        for p in (1, 2):
            sched = QaoaSchedule.from_pairs(
                [(float(g), float(b)) for g, b in rng.uniform(-0.5, 0.5, size=(p, 2))])
            c = random_qubo(5, 6, seed + 41)
            err = max(err, abs(series.series_qaoap(c, sched, 5).value
                               - series.fifth_order_qaoap(c, sched)))
        return _check("series order 5 equals the explicit fifth-order form", err, 1e-10)

    def sampler_distribution() -> CheckResult:
        c = MaxCutCost(random_graph(6, 8, seed + 51))
        bound = emulate.derivative_bound(c)
        cfg = emulate.SamplerConfig(0.02, 0.5 / (6 * bound), bound, seed=seed)
        err = float(np.abs(emulate.induced_distribution(c, cfg)
                           - emulate.target_distribution(c, cfg)).max())
        return _check("sampler induced distribution equals its target", err, 1e-14)

    def difference_invariants() -> CheckResult:
        err = 0.0
        for c in (MaxCutCost(random_graph(6, 9, seed + 61)),
                  random_max_ksat(7, 12, 3, seed + 62)):
            ct = c.cost_table()
            for order in (1, 2):
                err = max(err, abs(float(c.divergence_table(order).sum())))
            best = int(np.argmax(ct))
            err = max(err, max(0.0, max(c.partial_difference(j, best) for j in range(c.n))))
            err = max(err, max(0.0, float(np.dot(ct, c.divergence_table(1)))))
        return _check("difference-calculus invariants (sums, maximizer, sign law)", err, 1e-9)

    return [ramp_closed_form, maxcut_closed_form, balanced_closed_form,
            conjugation_vs_oracle, series_third_order, series_fifth_order,
            sampler_distribution, difference_invariants]


def instance_checks(cost: CostFunction, sched: QaoaSchedule, seed: int = 1) -> list[Callable[[], CheckResult]]:
    """Cross-validation on a user-supplied instance."""
    if cost.n > oracle.TRANSVERSE_QUBIT_LIMIT:
        raise SizeLimitError(
            f"instance with {cost.n} variables exceeds the oracle limit "
            f"{oracle.TRANSVERSE_QUBIT_LIMIT}")

    def exact_vs_oracle() -> CheckResult:
        err = abs(exact.expectation_exact(cost, sched)
                  - _oracle_expectation(cost, sched))
        return _check("exact conjugation vs oracle", err, 1e-8)

    def series_vs_leading() -> CheckResult:
        est = series.series_qaoap(cost, sched, 3)
        err = abs(est.value - series.leading_order_qaoap(cost, sched))
        return _check("series order 3 equals leading order", err, 1e-12)

    def small_angle_series() -> CheckResult:
        small = sched.scaled(0.05)
        est = series.series_qaoap(cost, small, 6)
        err = abs(est.value - _oracle_expectation(cost, small))
        return _check("order-6 series vs oracle at scaled-down angles", err, 1e-6)

    return [exact_vs_oracle, series_vs_leading, small_angle_series]


def run_checks(checks, max_workers: int = 1) -> list[CheckResult]:
    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda f: f(), checks))
    return [f() for f in checks]
