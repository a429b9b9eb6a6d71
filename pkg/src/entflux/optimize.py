"""Entangled-flux allocation: fitness, genetic algorithm, and exhaustive oracle.

A gene is a length-K integer vector assigning each frequency channel to a
link (0 = reserve, i.e. unused) plus one continuous total source flux
mu_tot shared uniformly across the K channels. The fitness sums per-link
entangled-bit-rate contributions normalized to each link's theoretical
maximum, with a -1 penalty for any allocated link that misses the fidelity
floor and 0 for unallocated links.

Under uniform per-channel flux only the channel counts per link matter, so
the search space collapses from (L+1)^K genes to C(K+L, L) compositions;
the brute-force oracle enumerates those outright and tunes mu_tot by
piecewise golden-section search, giving the global optimum against which
the GA is validated.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations, islice

import numpy as np

from .analysis import (GOLDEN_XTOL, LinkOptima, constrained_optimal_flux,
                       count_allocations, fidelity_floor_roots, link_optima)
from .errors import (AllocationTooLargeError, InfeasibleConstraintError,
                     InvalidStateError, NoEntanglementError)
from .linkmodel import (LinkSpec, accidental_rate_single, correlated_rate,
                        ebr_dimensionless, fidelity_dimensionless, noise_param)
from .linkmodel import LinkMetrics

STALL_FITNESS_TOL = 1e-12
# mu_tot search bound: X_max = BOUND_FACTOR * K * max over links of the
# constrained (or unconstrained) per-link optimum flux.
BOUND_FACTOR = 4.0
BRUTE_FORCE_CAP = 10_000_000
_BRUTE_CHUNK = 20_000  # compositions per vectorized block
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class NetworkSpec:
    """A one-to-one entanglement network sharing K flex-grid channels.

    Every user terminates exactly one link; all links must admit an
    entangled operating point. flux_mode is "uniform" (mu_k = mu_tot/K) or
    a length-K sequence of relative per-channel weights (normalized here).
    """

    links: tuple[LinkSpec, ...]
    K: int
    tau: float
    f_min: float = 0.0
    flux_mode: str | tuple[float, ...] = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if len(self.links) < 1:
            raise InvalidStateError("need at least one link")
        if self.K < 1:
            raise InvalidStateError(f"need K >= 1 channels, got {self.K!r}")
        if self.tau <= 0:
            raise InvalidStateError(f"tau must be > 0, got {self.tau!r}")
        if not 0.0 <= self.f_min <= 1.0:
            raise InvalidStateError(f"f_min must be in [0, 1], got {self.f_min!r}")
        labels = [u.label for link in self.links for u in (link.user_a, link.user_b)]
        if len(set(labels)) != len(labels):
            raise InvalidStateError("every user may terminate only one link")
        if isinstance(self.flux_mode, str):
            if self.flux_mode != "uniform":
                raise InvalidStateError(f"unknown flux_mode {self.flux_mode!r}")
        else:
            weights = np.asarray(self.flux_mode, dtype=float)
            if weights.shape != (self.K,) or (weights < 0).any() or weights.sum() <= 0:
                raise InvalidStateError("per-channel weights need K non-negative entries")
            object.__setattr__(self, "flux_mode", tuple(weights / weights.sum()))

    @property
    def L(self) -> int:
        return len(self.links)

    def noise_pairs(self) -> np.ndarray:
        """(L, 2) array of per-link (y1, y2)."""
        return np.array([[noise_param(link.user_a, self.tau),
                          noise_param(link.user_b, self.tau)] for link in self.links])

    def channel_weights(self) -> np.ndarray:
        """Fraction of mu_tot carried by each channel; sums to 1."""
        if isinstance(self.flux_mode, str):
            return np.full(self.K, 1.0 / self.K)
        return np.asarray(self.flux_mode)


@dataclass(frozen=True)
class Allocation:
    """One candidate solution: channel-to-link vector and total flux."""

    alpha: np.ndarray
    mu_tot: float

    def __post_init__(self):
        arr = np.array(self.alpha, dtype=int)
        if arr.ndim != 1:
            raise InvalidStateError("alpha must be a 1-d integer vector")
        if (arr < 0).any():
            raise InvalidStateError("alpha entries must be >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)
        if not np.isfinite(self.mu_tot) or self.mu_tot < 0:
            raise InvalidStateError(f"mu_tot must be finite and >= 0, got {self.mu_tot!r}")

    def channel_counts(self, L: int) -> np.ndarray:
        """Number of channels held by each of the L links (reserve excluded)."""
        return np.bincount(self.alpha, minlength=L + 1)[1:L + 1]


@dataclass(frozen=True)
class GAConfig:
    """Genetic-algorithm knobs; defaults follow the reference setup."""

    population_size: int = 200
    crossover_fraction: float = 0.8
    stall_generations: int = 100
    elite_count: int = 5
    mutation_rate: float | None = None        # default 1/K, resolved per network
    mu_tot_bounds: tuple[float, float] | None = None  # default [0, X_max/tau]
    rng_seed: int | None = None
    max_generations: int = 10_000
    independent_runs: int = 5

    def __post_init__(self):
        if self.population_size < 2:
            raise InvalidStateError("population_size must be >= 2")
        if not 0.0 < self.crossover_fraction < 1.0:
            raise InvalidStateError("crossover_fraction must be in (0, 1)")
        if not 0 <= self.elite_count < self.population_size:
            raise InvalidStateError("elite_count must be < population_size")
        if self.stall_generations < 1 or self.max_generations < 1:
            raise InvalidStateError("stall_generations and max_generations must be >= 1")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise InvalidStateError("mutation_rate must be in [0, 1]")
        if self.independent_runs < 1:
            raise InvalidStateError("independent_runs must be >= 1")


@dataclass(frozen=True)
class FitnessReport:
    """Fitness decomposition for one allocation.

    feasible is True for links meeting the fidelity floor and, vacuously,
    for unallocated links (they are never penalized).
    """

    f: float
    beta: np.ndarray
    metrics: tuple[LinkMetrics, ...]
    feasible: np.ndarray


@dataclass(frozen=True)
class GAResult:
    """Outcome of one GA run."""

    allocation: Allocation
    report: FitnessReport
    trace: np.ndarray          # population-best fitness per generation
    generations: int
    seed: int | None


@dataclass(frozen=True)
class RunsResult:
    """Best-of-N outcome; champion is the run with the largest fitness."""

    champion: GAResult
    runs: tuple[GAResult, ...]


@dataclass(frozen=True)
class BruteForceResult:
    """Global optimum from exhaustive composition enumeration."""

    allocation: Allocation
    report: FitnessReport
    n_compositions: int


def network_optima(net: NetworkSpec) -> tuple[LinkOptima, ...]:
    """Per-link optima cache; rejects links with no entangled operating point."""
    out = []
    for link, (y1, y2) in zip(net.links, net.noise_pairs()):
        opt = link_optima(y1, y2)
        if opt.r_max <= 0.0:
            raise NoEntanglementError(
                f"link {link.name}: no entangled operating point for "
                f"(y1, y2) = ({y1!r}, {y2!r})")
        out.append(opt)
    return tuple(out)


def link_fluxes(alloc: Allocation, net: NetworkSpec) -> np.ndarray:
    """Per-link dimensionless flux x_l = tau * sum of channel fluxes in B_l."""
    if alloc.alpha.shape != (net.K,):
        raise InvalidStateError(f"alpha must have length K = {net.K}")
    if alloc.alpha.max(initial=0) > net.L:
        raise InvalidStateError(f"alpha entries must be <= L = {net.L}")
    weights = net.channel_weights()
    x = np.zeros(net.L)
    for l in range(1, net.L + 1):
        x[l - 1] = weights[alloc.alpha == l].sum()
    return x * net.tau * alloc.mu_tot


def fitness(alloc: Allocation, net: NetworkSpec,
            optima: tuple[LinkOptima, ...] | None = None) -> FitnessReport:
    """Evaluate one allocation.

    beta_l = R_l(x_l) / R_l,max when the link meets the fidelity floor,
    -1 when it misses it, and 0 when unallocated (x_l = 0, fidelity
    undefined). f is the sum of the beta_l.
    """
    if optima is None:
        optima = network_optima(net)
    x = link_fluxes(alloc, net)
    beta = np.zeros(net.L)
    feasible = np.ones(net.L, dtype=bool)
    metrics = []
    for l, (link, opt) in enumerate(zip(net.links, optima)):
        mu_l = x[l] / net.tau
        acc = accidental_rate_single(link.user_a, link.user_b, mu_l, net.tau)
        cor = correlated_rate(link.user_a, link.user_b, mu_l)
        if x[l] == 0.0:
            # Unallocated: pure background state, Werner weight undefined.
            metrics.append(LinkMetrics(accidental_rate=acc, correlated_rate=cor,
                                       visibility=math.nan, dimensionless_flux=0.0,
                                       fidelity=math.nan, ebr=0.0))
            continue
        fid = fidelity_dimensionless(x[l], opt.y1, opt.y2)
        ebr = ebr_dimensionless(x[l], opt.y1, opt.y2)
        scale = link.user_a.eta * link.user_b.eta / net.tau
        metrics.append(LinkMetrics(accidental_rate=acc, correlated_rate=cor,
                                   visibility=cor / (acc + cor),
                                   dimensionless_flux=x[l], fidelity=fid,
                                   ebr=scale * ebr))
        if fid >= net.f_min:
            beta[l] = ebr / opt.r_max
        else:
            beta[l] = -1.0
            feasible[l] = False
    return FitnessReport(f=float(beta.sum()), beta=beta, metrics=tuple(metrics),
                         feasible=feasible)


def constrained_flux_bound(net: NetworkSpec,
                           optima: tuple[LinkOptima, ...] | None = None) -> float:
    """Dimensionless mu_tot search ceiling X_max = 4*K*max_l(phi_l).

    Falls back to the unconstrained optimum x_R for links whose fidelity
    ceiling sits below the floor (those can never contribute positively).
    """
    if optima is None:
        optima = network_optima(net)
    best = []
    for opt in optima:
        try:
            phi, _ = constrained_optimal_flux(opt.y1, opt.y2, net.f_min)
        except InfeasibleConstraintError:
            phi = opt.x_r
        best.append(phi)
    return BOUND_FACTOR * net.K * max(best)


def ideal_fitness(net: NetworkSpec,
                  optima: tuple[LinkOptima, ...] | None = None) -> float:
    """Best possible fitness with unlimited channels and flux.

    Each link sits at its own constrained optimum phi_l, so the sum is
    sum_l R_l(phi_l) / R_l,max; with no active floor every term is 1.0.

    Raises
    ------
    InfeasibleConstraintError
        Naming the first link whose F_max falls below the fidelity floor.
    """
    if optima is None:
        optima = network_optima(net)
    total = 0.0
    for link, opt in zip(net.links, optima):
        try:
            _, r_at_phi = constrained_optimal_flux(opt.y1, opt.y2, net.f_min)
        except InfeasibleConstraintError as exc:
            raise InfeasibleConstraintError(f"link {link.name}: {exc}") from exc
        total += r_at_phi / opt.r_max
    return total


class _FitnessEngine:
    """Vectorized fitness over whole populations; matches fitness() termwise."""

    def __init__(self, net: NetworkSpec, optima: tuple[LinkOptima, ...]):
        pairs = net.noise_pairs()
        self.y1 = pairs[:, 0]
        self.y2 = pairs[:, 1]
        self.r_max = np.array([opt.r_max for opt in optima])
        self.f_min = net.f_min
        self.weights = net.channel_weights()
        self.tau = net.tau
        self.K = net.K
        self.L = net.L

    def link_x(self, alphas: np.ndarray, mu_tot: np.ndarray) -> np.ndarray:
        """(n, L) dimensionless link fluxes for n genes."""
        share = np.zeros((alphas.shape[0], self.L))
        for l in range(1, self.L + 1):
            share[:, l - 1] = ((alphas == l) * self.weights).sum(axis=1)
        # same association as link_fluxes so batch and scalar agree bitwise
        return share * self.tau * np.asarray(mu_tot)[:, None]

    def evaluate_x(self, x: np.ndarray) -> np.ndarray:
        """Fitness for an (n, L) array of per-link fluxes."""
        q = x * x + (2.0 * self.y1 + 2.0 * self.y2 + 1.0) * x + 4.0 * self.y1 * self.y2
        limit = 3.0 / (2.0 * self.y1 + 2.0 * self.y2 + 1.0)
        ratio = np.where(q > 0.0, 3.0 * x / np.where(q > 0.0, q, 1.0), limit)
        fid = 0.25 * (1.0 + ratio)
        r = q * np.maximum(0.0, np.log2(2.0 * fid))
        beta = np.where(x == 0.0, 0.0,
                        np.where(fid >= self.f_min, r / self.r_max, -1.0))
        return beta.sum(axis=1)

    def evaluate(self, alphas: np.ndarray, mu_tot: np.ndarray) -> np.ndarray:
        return self.evaluate_x(self.link_x(alphas, mu_tot))


def ga_optimize(net: NetworkSpec, config: GAConfig | None = None) -> GAResult:
    """One GA run: elitism, scattered crossover, resample/lognormal mutation.

    Parent selection is stochastic universal sampling over rank weights
    1/sqrt(rank). Terminates when the best fitness has not improved by more
    than 1e-12 for stall_generations consecutive generations, or at the
    max_generations cap. Deterministic for a fixed rng_seed.
    """
    if config is None:
        config = GAConfig()
    optima = network_optima(net)
    engine = _FitnessEngine(net, optima)
    rng = np.random.default_rng(config.rng_seed)

    K, L, pop = net.K, net.L, config.population_size
    mut_rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / K
    if config.mu_tot_bounds is not None:
        mu_lo, mu_hi = config.mu_tot_bounds
    else:
        mu_lo, mu_hi = 0.0, constrained_flux_bound(net, optima) / net.tau
    if not 0.0 <= mu_lo < mu_hi:
        raise InvalidStateError(f"bad mu_tot bounds ({mu_lo!r}, {mu_hi!r})")

    n_rest = pop - config.elite_count
    n_cross = int(round(config.crossover_fraction * n_rest))
    n_mut = n_rest - n_cross
    n_parents = 2 * n_cross + n_mut
    # Rank-based SUS weights, best rank first.
    weights = 1.0 / np.sqrt(np.arange(1, pop + 1))
    cumulative = np.cumsum(weights / weights.sum())

    alphas = rng.integers(0, L + 1, size=(pop, K))
    mus = rng.uniform(mu_lo, mu_hi, size=pop)
    fit = engine.evaluate(alphas, mus)

    best_f = -np.inf
    best_alpha, best_mu = None, None
    stall = 0
    trace = []
    generation = 0
    while True:
        order = np.argsort(-fit, kind="stable")
        trace.append(float(fit[order[0]]))
        if fit[order[0]] > best_f + STALL_FITNESS_TOL:
            best_f = float(fit[order[0]])
            best_alpha = alphas[order[0]].copy()
            best_mu = float(mus[order[0]])
            stall = 0
        else:
            stall += 1
        if stall >= config.stall_generations or generation >= config.max_generations:
            break
        generation += 1

        # Stochastic universal sampling: one spin, n_parents evenly spaced pointers.
        start = rng.uniform(0.0, 1.0 / n_parents)
        pointers = start + np.arange(n_parents) / n_parents
        chosen = order[np.minimum(np.searchsorted(cumulative, pointers), pop - 1)]
        chosen = rng.permutation(chosen)

        elite_a = alphas[order[:config.elite_count]]
        elite_m = mus[order[:config.elite_count]]

        p1, p2 = chosen[0:2 * n_cross:2], chosen[1:2 * n_cross:2]
        mask = rng.random((n_cross, K)) < 0.5
        child_a = np.where(mask, alphas[p1], alphas[p2])
        blend = rng.random(n_cross)
        child_m = blend * mus[p1] + (1.0 - blend) * mus[p2]

        pm = chosen[2 * n_cross:]
        hit = rng.random((n_mut, K)) < mut_rate
        mut_a = np.where(hit, rng.integers(0, L + 1, size=(n_mut, K)), alphas[pm])
        mut_m = np.clip(mus[pm] * np.exp(rng.normal(0.0, 0.2, size=n_mut)), mu_lo, mu_hi)

        alphas = np.vstack([elite_a, child_a, mut_a])
        mus = np.concatenate([elite_m, child_m, mut_m])
        fit = engine.evaluate(alphas, mus)

    best = Allocation(alpha=best_alpha, mu_tot=best_mu)
    return GAResult(allocation=best, report=fitness(best, net, optima),
                    trace=np.array(trace), generations=generation,
                    seed=config.rng_seed)


def _ga_job(args) -> GAResult:
    net, config = args
    return ga_optimize(net, config)


def run_seeds(master_seed: int | None, n: int) -> list[int | None]:
    """Deterministic per-run seeds derived from one master seed.

    A single run keeps the master seed unchanged, so best_of_runs with
    independent_runs=1 reproduces ga_optimize exactly.
    """
    if n == 1:
        return [master_seed]
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)]


def best_of_runs(net: NetworkSpec, config: GAConfig | None = None,
                 threads: int = 1) -> RunsResult:
    """Run the GA independent_runs times and keep the largest fitness.

    Per-run seeds derive deterministically from config.rng_seed, so the
    champion is reproducible and independent of threads (ties break toward
    the earliest run).
    """
    if config is None:
        config = GAConfig()
    jobs = [(net, replace(config, rng_seed=seed))
            for seed in run_seeds(config.rng_seed, config.independent_runs)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_ga_job, jobs))
    else:
        results = [_ga_job(job) for job in jobs]
    champion = results[0]
    for res in results[1:]:
        if res.report.f > champion.report.f:
            champion = res
    return RunsResult(champion=champion, runs=tuple(results))


def _compositions(K: int, L: int, block: int):
    """Yield (block, L) arrays of channel counts per link; reserve implicit.

    Stars-and-bars: choosing L bar positions among K + L slots splits K
    stars into L + 1 ordered parts; the first L parts are the link counts.
    """
    bars = combinations(range(K + L), L)
    while True:
        chunk = list(islice(bars, block))
        if not chunk:
            return
        pos = np.array(chunk, dtype=np.int64)
        edges = np.hstack([pos, np.full((len(chunk), 1), K + L)])
        # gaps after each bar are the L link counts; stars before the first
        # bar form the reserve (K minus the row sum).
        yield np.diff(edges, axis=1) - 1


def brute_force_optimize(net: NetworkSpec, mu_grid=None, rel_tol: float = 1e-6,
                         cap: int = BRUTE_FORCE_CAP) -> BruteForceResult:
    """Global optimum over all channel-count compositions (uniform flux).

    For each composition the fitness along mu_tot is piecewise concave,
    with breakpoints wherever some link crosses F = 1/2 (rate clamp) or
    F = f_min (penalty edge); golden-section search runs inside every
    segment, batched across compositions. Pass mu_grid to evaluate a fixed
    set of mu_tot values instead of searching.

    Raises
    ------
    AllocationTooLargeError
        When C(K+L, L) exceeds the cap (default 10^7).
    """
    if not isinstance(net.flux_mode, str):
        raise InvalidStateError("brute force requires uniform flux mode")
    total = count_allocations(net.K, net.L, uniform_flux=True)
    if total > cap:
        raise AllocationTooLargeError(
            f"C(K+L, L) = {total} compositions exceeds cap {cap}")
    optima = network_optima(net)
    engine = _FitnessEngine(net, optima)

    # Per-link breakpoints on the x_l axis: EBR clamp roots always, fidelity
    # floor roots when the floor bites and the link can meet it.
    link_breaks = []
    for opt in optima:
        pts = [opt.roots[0], opt.roots[1]]
        if net.f_min > 0.25 and net.f_min <= opt.f_max:
            pts.extend(fidelity_floor_roots(opt.y1, opt.y2, net.f_min))
        link_breaks.append(pts)
    width = max(len(p) for p in link_breaks)
    breaks = np.full((net.L, width), np.nan)
    for l, pts in enumerate(link_breaks):
        breaks[l, :len(pts)] = pts

    best_f = 0.0  # the all-reserve allocation scores exactly 0
    best_counts = np.zeros(net.L, dtype=int)
    best_x_tot = 0.0

    for counts in _compositions(net.K, net.L, _BRUTE_CHUNK):
        counts_f = counts.astype(float)
        if mu_grid is not None:
            for mu in np.asarray(mu_grid, dtype=float):
                x = counts_f * (net.tau * mu / net.K)
                f = engine.evaluate_x(x)
                i = int(np.argmax(f))
                if f[i] > best_f:
                    best_f, best_counts, best_x_tot = float(f[i]), counts[i].copy(), net.tau * mu
            continue

        # Breakpoints mapped to the x_tot axis: x_l = c_l * x_tot / K.
        slope = counts_f / net.K
        with np.errstate(divide="ignore"):
            cand = breaks[None, :, :] / np.where(slope > 0, slope, np.nan)[:, :, None]
        cand = cand.reshape(len(counts), -1)
        cand = np.where(cand > 0, cand, np.nan)
        cand.sort(axis=1)
        grid = np.hstack([np.zeros((len(counts), 1)), cand])

        # Evaluate every breakpoint exactly (segment maxima can sit on edges).
        flat = grid.ravel()
        keep = ~np.isnan(flat)
        rows = np.repeat(np.arange(len(counts)), grid.shape[1])[keep]
        f_edges = engine.evaluate_x(counts_f[rows] * (flat[keep] / net.K)[:, None])
        i = int(np.argmax(f_edges))
        if f_edges[i] > best_f:
            best_f = float(f_edges[i])
            best_counts = counts[rows[i]].copy()
            best_x_tot = float(flat[keep][i])

        # Golden-section inside each segment between consecutive breakpoints.
        lo = grid[:, :-1].ravel()
        hi = grid[:, 1:].ravel()
        seg = ~np.isnan(hi) & (hi > lo)
        lo, hi = lo[seg], hi[seg]
        rows = np.repeat(np.arange(len(counts)), grid.shape[1] - 1)[seg]
        slopes = counts_f[rows] / net.K

        def f_at(x_tot):
            return engine.evaluate_x(slopes * x_tot[:, None])

        span = hi - lo
        tol = rel_tol * np.maximum(hi, 1e-30)
        iters = int(np.ceil(np.log(max((span / tol).max(), 1.0)) / math.log(1.0 / _INVPHI)))
        c = hi - _INVPHI * span
        d = lo + _INVPHI * span
        fc, fd = f_at(c), f_at(d)
        for _ in range(iters):
            left = fc > fd  # keep [lo, d] on the left, [c, hi] on the right
            hi = np.where(left, d, hi)
            lo = np.where(left, lo, c)
            c_next = np.where(left, hi - _INVPHI * (hi - lo), d)
            d_next = np.where(left, c, lo + _INVPHI * (hi - lo))
            probe = np.where(left, c_next, d_next)
            f_probe = f_at(probe)
            fc, fd = (np.where(left, f_probe, fd), np.where(left, fc, f_probe))
            c, d = c_next, d_next
        mid = 0.5 * (lo + hi)
        f_mid = f_at(mid)
        i = int(np.argmax(f_mid))
        if f_mid[i] > best_f:
            best_f = float(f_mid[i])
            best_counts = counts[rows[i]].copy()
            best_x_tot = float(mid[i])

    alpha = np.concatenate([np.repeat(np.arange(1, net.L + 1), best_counts),
                            np.zeros(net.K - int(best_counts.sum()), dtype=int)])
    best = Allocation(alpha=alpha, mu_tot=best_x_tot / net.tau)
    return BruteForceResult(allocation=best, report=fitness(best, net, optima),
                            n_compositions=total)
