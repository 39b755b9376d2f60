"""Command-line front end.

Subcommands: expectation, sweep, verify, sample, gradients, lightcone,
generate.  All angles are radians.  Exit codes: 0 success, 2 input error,
3 budget or size refusal, 4 verification failure.
"""
from __future__ import annotations

import json
import os
import sys
import time

import click
import numpy as np

from . import emulate, exact, files, oracle, series, verify
from .cost import CostFunction, HammingRampCost, MaxCutCost, BalancedMax2SatCost, QuboCost, generate_instance
from .errors import (DegeneratePadeError, InstanceFormatError, QaoaCalcError,
                     SizeLimitError, TermBudgetError)
from .grad import GradientWord
from .hamop import to_hamiltonian
from .series import QaoaSchedule, word_expectation_detail

EXIT_INPUT = 2
EXIT_SIZE = 3
EXIT_VERIFY = 4

_TAG_NOTES = {
    "zero_odd_order": "zero: odd total order",
    "zero_leading_mixer": "zero: leftmost mixer letter",
    "zero_cost_on_diagonal_base": "zero: cost letter acting on a diagonal base",
    "closed_form_coefficient_squares": "closed form: weighted coefficient squares",
    "closed_form_quadratic_fourth_order": "closed form: quadratic fourth order",
    "pauli_algebra": "computed: full operator algebra",
    "base": "base operator expectation",
}


def _threads() -> int:
    raw = os.environ.get("QAOA_CALC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InstanceFormatError, FileNotFoundError, ValueError) as exc:
            _fail(EXIT_INPUT, str(exc))
        except (SizeLimitError, TermBudgetError, DegeneratePadeError) as exc:
            _fail(EXIT_SIZE, str(exc))
        except QaoaCalcError as exc:
            _fail(EXIT_INPUT, str(exc))
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _apply_config(ctx, _param, path):
    """Read defaults from a JSON config file; explicit flags still override."""
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            ctx.default_map = {**json.load(fh), **(ctx.default_map or {})}
    return path


_config_option = click.option("--config", type=click.Path(exists=True), default=None,
                              callback=_apply_config, is_eager=True, expose_value=False,
                              help="JSON file with default values for the flags")

_instance_options = [
    click.option("--instance", type=click.Path(exists=True), required=True,
                 help="instance file path"),
    click.option("--format", "fmt", required=True,
                 type=click.Choice(["cnf", "edgelist", "qubo", "cnf2sat"])),
]


def _with(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return deco


def _schedule_from(gammas, betas, ramp) -> QaoaSchedule:
    if ramp:
        try:
            g0, gs, b0, bs, p = [t.strip() for t in ramp.split(",")]
            return QaoaSchedule.linear_ramp(int(p), float(g0), float(gs), float(b0), float(bs))
        except (ValueError, TypeError):
            raise click.UsageError("--ramp expects 'gamma0,gamma_step,beta0,beta_step,p'")
    if len(gammas) != len(betas) or not gammas:
        raise click.UsageError("provide matching --gamma/--beta lists or --ramp")
    return QaoaSchedule(tuple(gammas), tuple(betas))


def _closed_form_value(cost: CostFunction, sched: QaoaSchedule) -> float:
    if sched.p != 1:
        raise click.UsageError("closed_form is a level-1 method")
    g, b = sched.gammas[0], sched.betas[0]
    if isinstance(cost, HammingRampCost):
        return exact.hamming_ramp_p1(cost.alpha, cost.n, g, b)
    if isinstance(cost, MaxCutCost) and cost.graph.is_unweighted():
        return exact.maxcut_p1(cost.graph, g, b)
    if isinstance(cost, BalancedMax2SatCost):
        return exact.balanced_max2sat_p1(cost, g, b)
    ham = to_hamiltonian(cost)
    if ham.locality() <= 2:
        return exact.qubo_p1(ham, g, b)
    raise click.UsageError(f"no closed form for cost kind {cost.kind!r}")


def _method_value(method: str, cost: CostFunction, sched: QaoaSchedule,
                  seed: int, samples: int, budget: int) -> tuple[float, float | None]:
    """Returns (value, error_bound or None)."""
    if method == "oracle":
        psi = oracle.simulate(cost, sched)
        return oracle.expectation(psi, cost), None
    if method == "exact":
        return exact.expectation_exact(cost, sched, budget=budget), None
    if method.startswith("series:"):
        order = int(method.split(":", 1)[1])
        est = series.series_qaoap(cost, sched, order, budget=budget)
        bound = None
        if order >= 2 and sched.p == 1:
            bound = series.error_bounds(cost, sched.gammas[0], sched.betas[0])["expectation_bound"]
        return est.value, bound
    if method == "closed_form":
        return _closed_form_value(cost, sched), None
    if method == "sampler":
        if sched.p != 1:
            raise click.UsageError("the sampler emulates a single level")
        bound = emulate.derivative_bound(cost)
        cfg = emulate.SamplerConfig(sched.gammas[0], sched.betas[0], bound, seed=seed)
        draws = emulate.sample(cost, cfg, samples)
        mean = float(np.mean([cost.value(int(x)) for x in draws]))
        return mean, None
    raise click.UsageError(f"unknown method {method!r}")


def _emit(lines, output):
    text = "\n".join(lines) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@click.group()
def main():
    """Analysis of alternating phase/mixer circuits for classical cost functions."""


@main.command()
@_config_option
@_with(_instance_options)
@click.option("--gamma", "gammas", type=float, multiple=True)
@click.option("--beta", "betas", type=float, multiple=True)
@click.option("--ramp", default=None, help="linear schedule 'g0,gstep,b0,bstep,p'")
@click.option("--method", "methods", multiple=True, required=True,
              help="oracle | exact | series:L | closed_form | sampler (repeatable)")
@click.option("--seed", type=int, default=0)
@click.option("--samples", type=int, default=10000, help="draw count for the sampler method")
@click.option("--budget", type=int, default=2_000_000)
@click.option("--output", type=click.Path(), default=None)
@_guarded
def expectation(instance, fmt, gammas, betas, ramp, methods, seed, samples, budget, output):
    """Cost expectation value by one or more methods; CSV on stdout or --output."""
    cost = files.load_instance(instance, fmt)
    sched = _schedule_from(gammas, betas, ramp)
    rows = []
    values = {}
    for method in methods:
        t0 = time.perf_counter()
        value, bound = _method_value(method, cost, sched, seed, samples, budget)
        dt = time.perf_counter() - t0
        values[method] = value
        rows.append([method, *sched.gammas, *sched.betas, value,
                     "" if bound is None else files.fmt_float(bound), dt])
    disc = ""
    if "oracle" in values and len(values) > 1:
        disc = {m: v - values["oracle"] for m, v in values.items() if m != "oracle"}
    header = (["method"] + [f"gamma{i + 1}" for i in range(sched.p)]
              + [f"beta{i + 1}" for i in range(sched.p)]
              + ["value", "error_bound", "runtime_s"])
    meta = {"instance": instance, "format": fmt, "p": sched.p, "seed": seed}
    lines = files.csv_lines(meta, header, rows)
    if disc:
        for m, d in disc.items():
            lines.insert(len(meta), f"# discrepancy_vs_oracle[{m}] = {files.fmt_float(d)}")
    _emit(lines, output)


@main.command()
@_config_option
@_with(_instance_options)
@click.option("--path-gamma", type=float, multiple=True,
              help="per-level gamma direction of a 1-D path (angle = eps * direction)")
@click.option("--path-beta", type=float, multiple=True)
@click.option("--eps-start", type=float, default=0.0)
@click.option("--eps-stop", type=float, default=1.0)
@click.option("--eps-count", type=int, default=101)
@click.option("--gamma-grid", default=None, help="2-D grid 'min:max:count'")
@click.option("--beta-grid", default=None)
@click.option("--method", "methods", multiple=True, required=True,
              help="oracle | exact | series:L | closed_form | pade:M,N (repeatable)")
@click.option("--budget", type=int, default=2_000_000)
@click.option("--output", type=click.Path(), default=None)
@_guarded
def sweep(instance, fmt, path_gamma, path_beta, eps_start, eps_stop, eps_count,
          gamma_grid, beta_grid, methods, budget, output):
    """Expectation values over a 1-D angle path or a 2-D (gamma, beta) grid."""
    cost = files.load_instance(instance, fmt)
    meta = {"instance": instance, "format": fmt}
    if gamma_grid and beta_grid:
        ggrid = _parse_grid(gamma_grid)
        bgrid = _parse_grid(beta_grid)
        header = ["gamma", "beta"] + list(methods)
        rows = []
        for g in ggrid:
            for b in bgrid:
                sched = QaoaSchedule.single(g, b)
                row = [g, b]
                for m in methods:
                    row.append(_method_value(m, cost, sched, 0, 0, budget)[0])
                rows.append(row)
        _emit(files.csv_lines(meta, header, rows), output)
        return
    if not path_gamma or len(path_gamma) != len(path_beta):
        raise click.UsageError("provide matching --path-gamma/--path-beta directions "
                               "or both --gamma-grid and --beta-grid")
    eps = np.linspace(eps_start, eps_stop, eps_count)
    meta.update({"path_gamma": list(path_gamma), "path_beta": list(path_beta)})
    evaluators = []
    for m in methods:
        if m.startswith("pade:"):
            num, den = (int(t) for t in m.split(":", 1)[1].split(","))
            coeffs = series.series_path_coefficients(cost, path_gamma, path_beta,
                                                     num + den, budget=budget)
            approx = series.pade_1d(coeffs, num, den)
            evaluators.append(lambda e, f=approx: float(f(e)))
        else:
            def ev(e, m=m):
                sched = QaoaSchedule(tuple(g * e for g in path_gamma),
                                     tuple(b * e for b in path_beta))
                return _method_value(m, cost, sched, 0, 0, budget)[0]
            evaluators.append(ev)
    header = ["eps"] + list(methods)
    workers = _threads()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            all_rows = list(pool.map(lambda e: [e] + [ev(e) for ev in evaluators], eps))
    else:
        all_rows = [[e] + [ev(e) for ev in evaluators] for e in eps]
    _emit(files.csv_lines(meta, header, all_rows), output)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, count = spec.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError:
        raise click.UsageError(f"bad grid spec {spec!r}; expected 'min:max:count'")


@main.command(name="verify")
@_config_option
@click.option("--instance", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", default=None,
              type=click.Choice(["cnf", "edgelist", "qubo", "cnf2sat"]))
@click.option("--gamma", "gammas", type=float, multiple=True)
@click.option("--beta", "betas", type=float, multiple=True)
@click.option("--seed", type=int, default=1)
@_guarded
def verify_cmd(instance, fmt, gammas, betas, seed):
    """Run the cross-validation matrix; nonzero exit status on any failure."""
    if instance:
        if not fmt:
            raise click.UsageError("--format is required with --instance")
        cost = files.load_instance(instance, fmt)
        sched = (QaoaSchedule(tuple(gammas), tuple(betas))
                 if gammas else QaoaSchedule.single(0.4, 0.3))
        checks = verify.instance_checks(cost, sched, seed=seed)
    else:
        checks = verify.builtin_checks(seed=seed)
    results = verify.run_checks(checks, max_workers=_threads())
    failed = 0
    for r in results:
        click.echo(r.line())
        failed += 0 if r.passed else 1
    if failed:
        _fail(EXIT_VERIFY, f"{failed} of {len(results)} checks failed")
    click.echo(f"all {len(results)} checks passed")


@main.command()
@_config_option
@_with(_instance_options)
@click.option("--gamma", type=float, required=True)
@click.option("--beta", type=float, required=True)
@click.option("--count", type=int, default=100000)
@click.option("--seed", type=int, default=0)
@click.option("--mode", type=click.Choice(["leading_order", "small_beta"]),
              default="leading_order")
@click.option("--csv", "as_csv", is_flag=True, help="CSV output (index, bitstring, cost)")
@click.option("--output", type=click.Path(), required=True)
@_guarded
def sample(instance, fmt, gamma, beta, count, seed, mode, as_csv, output):
    """Draw bitstrings from the classical leading-order emulator."""
    cost = files.load_instance(instance, fmt)
    bound = emulate.derivative_bound(cost)
    cfg = emulate.SamplerConfig(gamma, beta, bound, mode=mode, seed=seed)
    try:
        cfg.validate(cost.n)
    except ValueError as exc:
        _fail(EXIT_INPUT, str(exc))
    draws = emulate.sample(cost, cfg, count)
    files.write_samples(output, draws, cost, as_csv=as_csv)
    mean = float(np.mean([cost.value(int(x)) for x in draws]))
    click.echo(f"samples written to {output}")
    click.echo(f"empirical mean cost = {files.fmt_float(mean)} over {count} draws (K = {bound})")
    if cost.n <= 12:
        counts = np.bincount(draws, minlength=1 << cost.n)
        emp = counts / count
        tv = 0.5 * float(np.abs(emp - emulate.induced_distribution(cost, cfg)).sum())
        click.echo(f"total-variation distance to the exact induced distribution = "
                   f"{files.fmt_float(tv)}")


@main.command()
@_config_option
@_with(_instance_options)
@click.option("--word", required=True,
              help="gradient word, e.g. 'Dc Db^2' (Dc: cost commutator, Db: mixer)")
@click.option("--render/--no-render", default=True, help="print the resulting Pauli sum")
@click.option("--budget", type=int, default=2_000_000)
@_guarded
def gradients(instance, fmt, word, render, budget):
    """Apply a gradient word to the cost Hamiltonian and report <.>_0."""
    cost = files.load_instance(instance, fmt)
    ham = to_hamiltonian(cost)
    w = GradientWord.parse(word)
    detail = word_expectation_detail(w, ham, budget=budget)
    note = _TAG_NOTES.get(detail.method, detail.method)
    click.echo(f"word: {w}")
    if render and not detail.method.startswith("zero"):
        from .grad import apply_word

        click.echo(f"operator: {apply_word(w, ham, budget=budget)}")
    click.echo(f"initial-state expectation = {files.fmt_float(detail.value)}  [{note}]")


@main.command()
@_config_option
@_with(_instance_options)
@click.option("--clause", type=int, required=True, help="clause index, 1-based")
@click.option("--p", "depth", type=int, default=1)
@_guarded
def lightcone(instance, fmt, clause, depth):
    """Print the nested lightcone sets of one clause."""
    cost = files.load_instance(instance, fmt)
    lc = exact.lightcone(cost, clause - 1, depth)
    for ell, level in enumerate(lc.levels):
        qubits = " ".join(str(q + 1) for q in sorted(level))
        click.echo(f"L[{clause},{ell}] = {{{qubits}}}")


@main.command()
@_config_option
@click.option("--kind", required=True,
              type=click.Choice(["max3sat", "maxksat", "maxcut", "qubo",
                                 "balanced_max2sat", "hamming_ramp", "grover"]))
@click.option("--n", type=int, required=True)
@click.option("--m", type=int, default=0)
@click.option("--k", type=int, default=3)
@click.option("--alpha", type=float, default=1.0)
@click.option("--seed", type=int, default=0)
@click.option("--output", type=click.Path(), required=True)
@_guarded
def generate(kind, n, m, k, alpha, seed, output):
    """Generate a random instance and write it to a file."""
    cost = generate_instance(kind, {"n": n, "m": m, "k": k, "alpha": alpha}, seed)
    files.save_instance(cost, output)
    click.echo(f"{kind} instance with n={n} written to {output}")


if __name__ == "__main__":
    main()
