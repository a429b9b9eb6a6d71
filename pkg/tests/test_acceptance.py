"""Acceptance suite: one test per release criterion.

Each test prints a single [PASS]/[FAIL] verdict line (run pytest with -s to
see them all; pytest -v mirrors the same outcome per test) and asserts the
same condition, so this file doubles as the release checklist.
"""

import math
import time

import numpy as np

from entflux.analysis import (constrained_optimal_flux, count_allocations,
                              critical_noise, ebr_max, entanglement_possible,
                              fidelity_max)
from entflux.linkmodel import (UserEndpoint, accidental_rate_general,
                               accidental_rate_single, ebr_dimensioned,
                               ebr_dimensionless, fidelity_dimensioned,
                               fidelity_dimensionless, noise_param)
from entflux.optimize import (GAConfig, best_of_runs, brute_force_optimize,
                              ga_optimize, ideal_fitness)
from entflux.scenarios import LinkDef, ScenarioSpec, load_scenario
from entflux.states import log_negativity, werner_state

from dataclasses import replace

SEED = 20260819

# Tabulated per-link noise pairings and maximum fidelities (2 decimals) for
# the four reference scenarios; scenarios 1 and 2 share one table.
FIVE_LINK_ROWS = (
    ("AB", 0.0, 0.0, 1.00),
    ("CD", 0.04, 0.007, 0.90),
    ("EF", 0.0, 0.125, 0.85),
    ("GH", 0.11, 0.019, 0.77),
    ("IJ", 0.15, 0.025, 0.72),
)
TIGHT_LINK_ROWS = (
    ("AB", 0.0, 0.0, 1.00),
    ("CD", 0.0034, 0.0006, 0.99),
    ("EF", 0.0104, 0.0018, 0.97),
    ("GH", 0.0179, 0.0031, 0.95),
    ("IJ", 0.0, 0.0515, 0.93),
)
TWELVE_LINK_ROWS = (
    ("AB", 0.0, 0.0, 1.00),
    ("CD", 0.0034, 0.0006, 0.99),
    ("EF", 0.0, 0.0357, 0.95),
    ("GH", 0.0299, 0.0051, 0.92),
    ("IJ", 0.0385, 0.0066, 0.90),
    ("KL", 0.0625, 0.0107, 0.85),
    ("MN", 0.0733, 0.0126, 0.83),
    ("OP", 0.0, 0.1818, 0.80),
    ("QR", 0.1106, 0.019, 0.77),
    ("ST", 0.125, 0.0214, 0.75),
    ("UV", 0.1489, 0.0256, 0.72),
    ("WX", 0.0, 0.2979, 0.72),
)


def _verdict(num, ok, desc, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {desc}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_tabulated_fidelity_maxima():
    rows = FIVE_LINK_ROWS + FIVE_LINK_ROWS + TIGHT_LINK_ROWS + TWELVE_LINK_ROWS
    assert len(rows) == 27
    t0 = time.perf_counter()
    worst = max(abs(fidelity_max(y1, y2)[1] - f_ref) for _, y1, y2, f_ref in rows)
    dt = time.perf_counter() - t0
    _verdict(1, worst <= 0.005 and dt < 1.0,
             "27 tabulated fidelity maxima within 0.005",
             f"worst error {worst:.2e}, {dt * 1e3:.1f} ms")


def test_criterion_02_noiseless_ebr_ceiling():
    t0 = time.perf_counter()
    _, r_max = ebr_max(0.0, 0.0)
    dt = time.perf_counter() - t0
    _verdict(2, abs(r_max - 0.6475) <= 0.0005 and dt < 1.0,
             "noiseless EBR ceiling 0.6475 +/- 0.0005",
             f"R_max = {r_max:.6f}, {dt * 1e3:.1f} ms")


def test_criterion_03_boundary_threshold():
    t0 = time.perf_counter()
    y2c = critical_noise(0.8)
    bracket_ok = (entanglement_possible(0.8, y2c - 1e-6)
                  and not entanglement_possible(0.8, y2c + 1e-6))
    dt = time.perf_counter() - t0
    _verdict(3, abs(y2c - 0.0111) <= 0.0005 and bracket_ok and dt < 1.0,
             "critical y2 at y1 = 0.8 is 0.0111 +/- 0.0005",
             f"y2 = {y2c:.7f}, {dt * 1e3:.1f} ms")


def test_criterion_04_werner_log_negativity_equivalence():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst = 0.0
    for lam in rng.uniform(0.0, 1.0, size=1000):
        f = (1.0 + 3.0 * lam) / 4.0
        closed = max(0.0, math.log2(2.0 * f))
        worst = max(worst, abs(log_negativity(werner_state(lam)) - closed))
    dt = time.perf_counter() - t0
    _verdict(4, worst <= 1e-10 and dt < 5.0,
             "matrix log-negativity matches max(0, log2(2F)) for 1000 Werner states",
             f"worst error {worst:.2e}, {dt:.2f} s")


def test_criterion_05_ideal_fitness_table():
    t0 = time.perf_counter()
    values = {}
    for name in ("scenario1", "scenario2", "scenario3", "scenario4"):
        spec = load_scenario(name)
        values[name] = ideal_fitness(spec.network(spec.k_list[0]))
    dt = time.perf_counter() - t0
    ok = (values["scenario1"] == 5.0
          and abs(values["scenario2"] - 3.39) <= 0.02
          and abs(values["scenario3"] - 0.91) <= 0.01
          and abs(values["scenario4"] - 7.9) <= 0.05
          and dt < 5.0)
    detail = ", ".join(f"{k[-1]}: {v:.6f}" for k, v in values.items())
    _verdict(5, ok, "ideal fitness 5 exactly / 3.39 / 0.91 / 7.9", detail)


def _toy_network():
    links = (LinkDef(name="AB", y1=0.0, y2=0.0),
             LinkDef(name="CD", y1=0.04, y2=0.007),
             LinkDef(name="IJ", y1=0.15, y2=0.025))
    spec = ScenarioSpec(name="toy", links=links, k_list=(6,), f_min=0.7,
                        ga=GAConfig(rng_seed=SEED))
    return spec.network(6), spec.ga


def test_criterion_06_ga_matches_exhaustive_oracle():
    t0 = time.perf_counter()
    net, ga = _toy_network()
    brute = brute_force_optimize(net)
    champion = best_of_runs(net, ga).champion
    dt = time.perf_counter() - t0
    ratio = champion.report.f / brute.report.f
    _verdict(6, ratio >= 0.99 and dt < 120.0,
             "best-of-5 GA within 1% of the exhaustive optimum (toy network)",
             f"GA {champion.report.f:.6f} vs brute {brute.report.f:.6f}, "
             f"ratio {ratio:.4f}, {dt:.1f} s")


def test_criterion_07_scenario1_even_allocation():
    t0 = time.perf_counter()
    spec = load_scenario("scenario1")
    net = spec.network(5)
    runs = best_of_runs(net, replace(spec.ga, rng_seed=SEED))
    champ = runs.champion
    counts = [int(c) for c in champ.allocation.channel_counts(net.L)]
    dt = time.perf_counter() - t0
    _verdict(7, champ.report.f >= 4.9 and counts == [1, 1, 1, 1, 1] and dt < 300.0,
             "scenario 1 at K = 5 reaches f >= 4.9 with one channel per link",
             f"f = {champ.report.f:.6f}, counts = {counts}, {dt:.1f} s")


def test_criterion_08_scenario2_stochastic_band():
    t0 = time.perf_counter()
    spec = load_scenario("scenario2")
    net = spec.network(20)
    runs = best_of_runs(net, replace(spec.ga, rng_seed=SEED))
    f = runs.champion.report.f
    dt = time.perf_counter() - t0
    deviation = abs(f - 3.39) / 3.39
    _verdict(8, deviation <= 0.10 and dt < 900.0,
             "scenario 2 at K = 20 within 10% of the ideal 3.39",
             f"f = {f:.6f}, deviation {100 * deviation:.2f}%, {dt:.1f} s")


def _random_endpoint(rng, label):
    return UserEndpoint(label, eta=float(rng.uniform(1e-4, 1.0)),
                        dark_rate=float(rng.uniform(0.0, 1e4)))


def test_criterion_09_property_suite():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    failures = []

    # dimensioned and dimensionless paths agree to 1e-12 relative
    worst_dim = 0.0
    for _ in range(10_000):
        ua, ub = _random_endpoint(rng, "A"), _random_endpoint(rng, "B")
        tau = float(rng.uniform(1e-10, 1e-8))
        mu = float(10.0 ** rng.uniform(3.0, 10.0))
        y1, y2 = noise_param(ua, tau), noise_param(ub, tau)
        f1 = fidelity_dimensioned(mu, ua, ub, tau)
        f2 = fidelity_dimensionless(tau * mu, y1, y2)
        r1 = ebr_dimensioned(mu, ua, ub, tau)
        r2 = ua.eta * ub.eta / tau * ebr_dimensionless(tau * mu, y1, y2)
        worst_dim = max(worst_dim,
                        abs(f1 - f2) / max(abs(f2), 1e-300),
                        abs(r1 - r2) / max(abs(r2), 1e-12))
    if worst_dim > 1e-12:
        failures.append(f"dimensioned consistency {worst_dim:.2e}")

    # fidelity and rate are symmetric under swapping the two noise params
    for _ in range(10_000):
        x = float(rng.uniform(0.0, 3.0))
        y1, y2 = (float(v) for v in rng.uniform(0.0, 0.5, size=2))
        if (fidelity_dimensionless(x, y1, y2) != fidelity_dimensionless(x, y2, y1)
                or ebr_dimensionless(x, y1, y2) != ebr_dimensionless(x, y2, y1)):
            failures.append(f"symmetry broken at ({x}, {y1}, {y2})")
            break

    # the general multi-channel accidental rate reduces to the single-link form
    worst_acc = 0.0
    for _ in range(10_000):
        ua, ub = _random_endpoint(rng, "A"), _random_endpoint(rng, "B")
        tau = float(rng.uniform(1e-10, 1e-8))
        mu = float(rng.uniform(0.0, 1e10))
        a1 = accidental_rate_single(ua, ub, mu, tau)
        a2 = accidental_rate_general(ua, ub, [mu], [mu], tau)
        worst_acc = max(worst_acc, abs(a1 - a2) / max(abs(a1), 1e-300))
    if worst_acc > 1e-12:
        failures.append(f"single/general agreement {worst_acc:.2e}")

    # brute-force optimum never decreases with more channels
    def _noise_net(y, K):
        links = (LinkDef(name="AB", y1=y[0], y2=y[1]),
                 LinkDef(name="CD", y1=y[2], y2=y[3]))
        return ScenarioSpec(name="m", links=links, k_list=(K,),
                            f_min=0.7).network(K)

    for trial in range(3):
        y = rng.uniform(0.0, 0.05, size=4)
        prev = -np.inf
        for K in (2, 5, 9, 14):
            assert count_allocations(K, 2, True) <= 100_000
            f = brute_force_optimize(_noise_net(y, K)).report.f
            if f < prev - 1e-12:
                failures.append(f"monotonicity broken at K = {K} (trial {trial})")
            prev = f

    # elitism makes the per-generation best non-decreasing
    net, _ = _toy_network()
    trace = ga_optimize(net, GAConfig(population_size=100, stall_generations=50,
                                      rng_seed=SEED)).trace
    if not np.all(np.diff(trace) >= 0.0):
        failures.append("elitism trace decreased")

    dt = time.perf_counter() - t0
    _verdict(9, not failures and dt < 120.0,
             "property suite over 10^4 randomized cases per family",
             "; ".join(failures) if failures else f"clean, {dt:.1f} s")


def test_criterion_10_dimensioned_rate_prediction():
    y_a, y_b = 8.33e-6, 1.67e-2
    eta_a, eta_b, tau = 1.2e-2, 2.1e-4, 1.0e-9
    t0 = time.perf_counter()
    x_r, r_max = ebr_max(y_a, y_b)
    predicted = eta_a * eta_b / tau * r_max
    # same number through the fully dimensioned path
    ua = UserEndpoint("A", eta=eta_a, dark_rate=y_a * eta_a / tau)
    ub = UserEndpoint("B", eta=eta_b, dark_rate=y_b * eta_b / tau)
    direct = ebr_dimensioned(x_r / tau, ua, ub, tau)
    dt = time.perf_counter() - t0
    ok = (abs(predicted - 1.58e3) <= 0.02 * 1.58e3
          and abs(direct - predicted) <= 1e-6 * predicted)
    _verdict(10, ok, "dimensioned R_max prediction 1.58e3 ebits/s +/- 2%",
             f"predicted {predicted:.4g} ebits/s, {dt * 1e3:.1f} ms")
