"""Benchmark suites over random polynomials, with summary statistics and CSV output.

Every trial draws its polynomial from a seed derived from ``(master seed,
trial index)``, so results do not depend on the order or the process in which
trials run. Failed trials produce no sample and are counted instead.
"""

from __future__ import annotations

import csv
import io
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import dense_linalg as dl
from . import matrix_sign as ms
from .eigenspace import NearRealFilter, compress, dominant_eigenspace, filter_real
from .errors import RootFindingError
from .pipelines import R_PLUS, oracle_real_roots, real_roots_pipeline, squaring_pipeline
from .poly_core import random_polynomial

SUITES = ("squaring", "newton", "newton_pade")
ALLOWED_SIZES = (16, 32, 64, 128, 256, 512)
CSV_HEADER = ("suite", "n", "metric", "min", "max", "mean", "std", "failures")
NEWTON_MAX_STEPS = 20
NEWTON_DECIMALS = 4
NEWTON_FILTER = NearRealFilter(1e-4)
PADE_DECIMALS = (3, 4)


@dataclass
class RunStats:
    """Summary of one metric; ``std`` is the population standard deviation."""

    metric: str
    samples: np.ndarray
    failures: int = 0
    suite: str = ""
    n: int = 0
    min: float = field(init=False)
    max: float = field(init=False)
    mean: float = field(init=False)
    std: float = field(init=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.size:
            self.min = float(self.samples.min())
            self.max = float(self.samples.max())
            self.mean = float(self.samples.mean())
            self.std = float(self.samples.std(ddof=0))
        else:
            self.min = self.max = self.mean = self.std = float("nan")

    def row(self) -> tuple:
        return (self.suite, self.n, self.metric, self.min, self.max, self.mean, self.std, self.failures)


def trial_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def _oracle(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return oracle_real_roots(p)


# -- single trials; each returns a dict of metric -> value (None marks a failure) --

def newton_trial(n: int, seed: int, decimals: int = NEWTON_DECIMALS, max_steps: int = NEWTON_MAX_STEPS) -> dict:
    """Real Newton steps until every oracle real root is read off ``I + N^2``.

    After each step the dominant eigenspace of ``I + N^2`` is compressed
    against ``C_p``; the step counts once the real and near-real Ritz values
    match the oracle roots one to one within ``0.5 * 10**-decimals``.
    """
    p = random_polynomial(n, seed)
    truth = _oracle(p)
    if truth.size == 0:
        return {"newton_steps": None}
    C = dl.companion_matrix(p)
    tol = 0.5 * 10.0**-decimals

    def converged(N):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                W = np.eye(n) + N @ N
            sub = dominant_eigenspace(W, R_PLUS, seed)
            z = compress(C, sub.basis).eigenvalues
        except (RootFindingError, np.linalg.LinAlgError):
            return False
        real, near, _ = filter_real(z, NEWTON_FILTER)
        cand = np.concatenate([real, near.real])
        if cand.size != truth.size:
            return False
        return all(np.min(np.abs(cand - t)) <= tol for t in truth)

    cfg = ms.SignIterConfig(variant="real_newton", fixed_steps=max_steps, seed=seed)
    try:
        res = ms.sign_real_newton(C, cfg, until=converged)
    except RootFindingError:
        return {"newton_steps": None}
    ok = res.iters < max_steps or converged(res.sign_matrix)
    return {"newton_steps": res.iters if ok else None}


def squaring_trial(n: int, seed: int) -> dict:
    rep = squaring_pipeline(random_polynomial(n, seed), None, seed=seed)
    if "squarings" not in rep.iterations:
        return {"squarings": None, "dimension": None}
    return {"squarings": rep.iterations["squarings"], "dimension": rep.info["dimension"]}


def newton_pade_trial(n: int, seed: int, norm_control: bool = True, decimals=PADE_DECIMALS) -> dict:
    """Five real Newton steps, then real Padé steps; recovery with and without refinement."""
    p = random_polynomial(n, seed)
    truth = _oracle(p)
    cfg = ms.SignIterConfig(variant="real_newton", norm_control=norm_control, seed=seed)
    out = {}
    for d in decimals:
        tag = f"_{d}dec"
        rep = real_roots_pipeline(p, 5, cfg, refine=True, seed=seed, decimals=d, truth=truth)
        steps = rep.iterations.get("pade_steps")
        out["pade_steps" + tag] = steps
        # no real roots: recovery is undefined rather than failed
        usable = steps is not None and rep.recovery is not None
        out["recovered_pct" + tag] = rep.recovery if usable else None
        out["recovered_rq_pct" + tag] = rep.recovery_refined if usable else None
    return out


_TRIALS = {"newton": newton_trial, "squaring": squaring_trial, "newton_pade": newton_pade_trial}


def run_trials(suite: str, n: int, trials: int, seed: int, workers: int = 1, **kwargs) -> list:
    """Per-trial metric dicts in trial order."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    fn = partial(_TRIALS[suite], n, **kwargs)
    seeds = [trial_seed(seed, i) for i in range(trials)]
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def summarize(suite: str, n: int, results: list) -> list:
    metrics = list(results[0]) if results else []
    out = []
    for m in metrics:
        vals = [r[m] for r in results]
        samples = [v for v in vals if v is not None]
        out.append(RunStats(m, samples, len(vals) - len(samples), suite, n))
    return out


def benchmark(suite: str, n: int, trials: int, seed: int, workers: int = 1, **kwargs) -> list:
    """RunStats for every metric of ``suite`` at degree ``n``.

    ``squaring`` reports squarings to dominance and the subspace dimension;
    ``newton`` the real Newton steps to 4-decimal recovery; ``newton_pade``
    Padé steps and recovery percentages at 3 and 4 decimals.
    """
    if n not in ALLOWED_SIZES:
        raise ValueError(f"n must be one of {ALLOWED_SIZES}")
    return summarize(suite, n, run_trials(suite, n, trials, seed, workers, **kwargs))


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if np.isnan(x) else f"{x:.10g}"
    return str(x)


def stats_csv(stats: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in stats:
        w.writerow([_fmt(v) for v in s.row()])
    return buf.getvalue()
