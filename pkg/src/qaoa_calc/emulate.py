"""Classical randomized samplers reproducing leading-order level-1 output
distributions: draw a uniform string and a uniform index, then flip that bit
with a bias proportional to the local cost difference.

Randomness comes from the counter-based Philox 4x64-10 generator keyed by the
configured seed, so sample streams are identical across platforms and runs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import CostFunction, HammingRampCost, MaxCutCost
from .errors import SizeLimitError
from .hamop import to_hamiltonian
from .series import QaoaSchedule

EXACT_BOUND_LIMIT = 12
TABLE_LIMIT = 20
_BLOCK = 1 << 16


@dataclass(frozen=True)
class SamplerConfig:
    gamma: float
    beta: float
    bound: float           # K with |d_j c(x)| <= K for all j, x
    mode: str = "leading_order"   # or "small_beta"
    seed: int = 0
    small_beta_constant: float = 0.4

    def __post_init__(self):
        if self.mode not in ("leading_order", "small_beta"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")

    def validate(self, n: int) -> None:
        if self.mode == "leading_order":
            limit = 1.0 / (2.0 * n * self.bound) if self.bound > 0 else np.inf
            if abs(self.gamma * self.beta) > limit:
                raise ValueError(
                    f"|gamma*beta| = {abs(self.gamma * self.beta):.3g} exceeds the "
                    f"bias bound 1/(2nK) = {limit:.3g}")
        else:
            limit = self.small_beta_constant / n
            if abs(self.beta) > limit:
                raise ValueError(
                    f"|beta| = {abs(self.beta):.3g} exceeds the small-mixing bound "
                    f"b/n = {limit:.3g}")


def derivative_bound(cost: CostFunction) -> float:
    """A valid K with |d_j c(x)| <= K: exact by enumeration at small n,
    otherwise a structural bound per problem kind (2 ||C_Z|| fallback)."""
    if cost.n <= EXACT_BOUND_LIMIT:
        ct = cost.cost_table()
        xs = np.arange(1 << cost.n, dtype=np.int64)
        best = 0.0
        for j in range(cost.n):
            best = max(best, float(np.abs(ct[xs ^ (1 << j)] - ct).max()))
        return best
    if isinstance(cost, MaxCutCost):
        wmax = 1.0 if cost.graph.weights is None else max(cost.graph.weights)
        return 2.0 * max(cost.graph.degrees(), default=0) * wmax
    if isinstance(cost, HammingRampCost):
        return abs(cost.alpha)
    ham = to_hamiltonian(cost)
    return 2.0 * float(sum(abs(a) for _, a in ham.z_terms()))


def _bias(cost: CostFunction, cfg: SamplerConfig, x0: np.ndarray, j: np.ndarray,
          pdiff_table: np.ndarray | None) -> np.ndarray:
    n = cost.n
    if pdiff_table is not None:
        d = pdiff_table[x0, j]
    else:
        d = np.array([cost.partial_difference(int(jj), int(xx))
                      for xx, jj in zip(x0, j)])
    if cfg.mode == "leading_order":
        return 2.0 * n * cfg.gamma * cfg.beta * d
    return 2.0 * n * cfg.beta * np.sin(cfg.gamma * d)


def _pdiff_table(cost: CostFunction) -> np.ndarray | None:
    if cost.n > TABLE_LIMIT:
        return None
    ct = cost.cost_table()
    xs = np.arange(1 << cost.n, dtype=np.int64)
    return np.stack([ct[xs ^ (1 << j)] - ct for j in range(cost.n)], axis=1)


def sample(cost: CostFunction, cfg: SamplerConfig, count: int) -> np.ndarray:
    """Draw ``count`` bitstrings (as integers) from the emulated distribution."""
    cfg.validate(cost.n)
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    table = _pdiff_table(cost)
    n = cost.n
    out = np.empty(count, dtype=np.int64)
    done = 0
    while done < count:
        block = min(_BLOCK, count - done)
        x0 = rng.integers(0, 1 << n, size=block, dtype=np.int64)
        j = rng.integers(0, n, size=block, dtype=np.int64)
        coin = rng.random(block)
        delta = _bias(cost, cfg, x0, j, table)
        if np.abs(delta).max() > 1.0 + 1e-12:
            raise AssertionError("flip bias left [-1, 1]; the bound K is invalid")
        flip = coin < 0.5 + 0.5 * delta
        out[done:done + block] = np.where(flip, x0 ^ (np.int64(1) << j), x0)
        done += block
    return out


def sample_small_beta(cost: CostFunction, gamma: float, beta: float, count: int,
                      seed: int = 0, small_beta_constant: float = 0.4) -> np.ndarray:
    """Sampler for arbitrary phase angle and |beta| <= b/n."""
    cfg = SamplerConfig(gamma, beta, derivative_bound(cost), mode="small_beta",
                        seed=seed, small_beta_constant=small_beta_constant)
    return sample(cost, cfg, count)


def induced_distribution(cost: CostFunction, cfg: SamplerConfig) -> np.ndarray:
    """Exact output distribution by enumerating every (x0, j, coin) outcome."""
    n = cost.n
    if n > TABLE_LIMIT:
        raise SizeLimitError("exact induced distribution needs the cost table")
    cfg.validate(n)
    table = _pdiff_table(cost)
    xs = np.arange(1 << n, dtype=np.int64)
    probs = np.zeros(1 << n)
    w = 1.0 / ((1 << n) * n)
    for j in range(n):
        if cfg.mode == "leading_order":
            delta = 2.0 * n * cfg.gamma * cfg.beta * table[:, j]
        else:
            delta = 2.0 * n * cfg.beta * np.sin(cfg.gamma * table[:, j])
        stay = w * (0.5 - 0.5 * delta)
        move = w * (0.5 + 0.5 * delta)
        np.add.at(probs, xs, stay)
        np.add.at(probs, xs ^ (1 << j), move)
    return probs


def target_distribution(cost: CostFunction, cfg: SamplerConfig) -> np.ndarray:
    """The distribution the sampler is constructed to induce."""
    n = cost.n
    xs = np.arange(1 << n, dtype=np.int64)
    table = _pdiff_table(cost)
    if cfg.mode == "leading_order":
        dc = table.sum(axis=1)
        return 2.0 ** -n - (2.0 * cfg.gamma * cfg.beta / 2.0 ** n) * dc
    sin_sum = np.sin(cfg.gamma * table).sum(axis=1)
    return 2.0 ** -n - (2.0 * cfg.beta / 2.0 ** n) * sin_sum


def effective_angle_config(schedule: QaoaSchedule, bound: float, seed: int = 0) -> SamplerConfig:
    """Level-p heuristic: reuse the level-1 sampler with gamma'*beta' equal to
    the leading-order coefficient sum_{i<=j} gamma_i beta_j.

    No error guarantee is attached beyond one level; callers get exactly the
    leading-order distribution, nothing more.
    """
    eff = schedule.effective_gamma_beta()
    return SamplerConfig(gamma=eff, beta=1.0, bound=bound, seed=seed)
