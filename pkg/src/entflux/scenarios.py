"""Scenario configuration, built-in presets, sweep driver, and report output.

A scenario bundles a set of links (given either as dimensionless noise
pairs or as detector efficiency/dark-rate pairs), a fidelity floor, a list
of channel counts K to sweep, and GA settings. Files use INI syntax: one
[scenario] section, one [link <name>] section per link, and an optional
[ga] section; see ``save_scenario`` for the exact field set.

Four presets (scenario1..scenario4) cover a five-link network optimized
without a fidelity floor, the same network at floors 0.7 and 0.9, and a
twelve-link network at 0.7, with channel sweeps sized to the link count.
"""

from __future__ import annotations

import configparser
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import entanglement_possible, link_optima
from .errors import EntfluxError, ScenarioFormatError
from .linkmodel import (LinkSpec, UserEndpoint, check_validity,
                        ebr_dimensionless, fidelity_dimensionless)
from .optimize import GAConfig, NetworkSpec, RunsResult, best_of_runs, ideal_fitness

logger = logging.getLogger(__name__)

_FLOAT_FMT = "%.17e"  # round-trips any double


@dataclass(frozen=True)
class LinkDef:
    """One link as configured: either (y1, y2) or per-user (eta, dark).

    Dimensionless links get synthetic endpoints (eta = 1, dark = y/tau);
    their rate-model validity margins are not physical and are reported
    as n/a.
    """

    name: str
    y1: float | None = None
    y2: float | None = None
    eta_a: float | None = None
    dark_a: float | None = None
    eta_b: float | None = None
    dark_b: float | None = None

    def __post_init__(self):
        if not self.name:
            raise ScenarioFormatError("link name must be non-empty")
        noise_given = self.y1 is not None or self.y2 is not None
        rates_given = any(v is not None for v in
                          (self.eta_a, self.dark_a, self.eta_b, self.dark_b))
        if noise_given and rates_given:
            raise ScenarioFormatError(
                f"link {self.name}: give either y1/y2 or eta/dark values, not both")
        if noise_given:
            if self.y1 is None or self.y2 is None:
                raise ScenarioFormatError(f"link {self.name}: need both y1 and y2")
            if self.y1 < 0 or self.y2 < 0:
                raise ScenarioFormatError(
                    f"link {self.name}: noise parameters must be >= 0")
        elif rates_given:
            if None in (self.eta_a, self.dark_a, self.eta_b, self.dark_b):
                raise ScenarioFormatError(
                    f"link {self.name}: need all of eta_a, dark_a, eta_b, dark_b")
        else:
            raise ScenarioFormatError(f"link {self.name}: no parameters given")

    @property
    def dimensioned(self) -> bool:
        return self.y1 is None

    def _labels(self) -> tuple[str, str]:
        if len(self.name) == 2:
            return self.name[0], self.name[1]
        return self.name + "_1", self.name + "_2"

    def noise_pair(self, tau: float) -> tuple[float, float]:
        if not self.dimensioned:
            return self.y1, self.y2
        return tau * self.dark_a / self.eta_a, tau * self.dark_b / self.eta_b

    def build(self, tau: float) -> LinkSpec:
        """Materialize endpoints; dimensionless links get eta = 1 stand-ins."""
        la, lb = self._labels()
        if self.dimensioned:
            a = UserEndpoint(label=la, eta=self.eta_a, dark_rate=self.dark_a)
            b = UserEndpoint(label=lb, eta=self.eta_b, dark_rate=self.dark_b)
        else:
            a = UserEndpoint(label=la, eta=1.0, dark_rate=self.y1 / tau)
            b = UserEndpoint(label=lb, eta=1.0, dark_rate=self.y2 / tau)
        return LinkSpec(user_a=a, user_b=b)


@dataclass(frozen=True)
class ScenarioSpec:
    """A validated sweep definition."""

    name: str
    links: tuple[LinkDef, ...]
    k_list: tuple[int, ...]
    f_min: float
    tau: float = 1e-9
    ga: GAConfig = field(default_factory=GAConfig)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        if not self.links:
            raise ScenarioFormatError(f"scenario {self.name}: no links")
        names = [d.name for d in self.links]
        if len(set(names)) != len(names):
            raise ScenarioFormatError(f"scenario {self.name}: duplicate link names")
        if not self.k_list:
            raise ScenarioFormatError(f"scenario {self.name}: empty k_list")
        if any(b <= a for a, b in zip(self.k_list, self.k_list[1:])) or self.k_list[0] < 1:
            raise ScenarioFormatError(
                f"scenario {self.name}: k_list must be ascending positive integers")
        if not 0.0 <= self.f_min <= 1.0:
            raise ScenarioFormatError(f"scenario {self.name}: f_min must be in [0, 1]")
        if self.tau <= 0:
            raise ScenarioFormatError(f"scenario {self.name}: tau must be > 0")
        for d in self.links:
            y1, y2 = d.noise_pair(self.tau)
            if not entanglement_possible(y1, y2):
                raise ScenarioFormatError(
                    f"scenario {self.name}: link {d.name} admits no entangled "
                    f"operating point (y1 = {y1!r}, y2 = {y2!r})")

    def network(self, K: int) -> NetworkSpec:
        return NetworkSpec(links=tuple(d.build(self.tau) for d in self.links),
                           K=K, tau=self.tau, f_min=self.f_min)


@dataclass(frozen=True)
class KResult:
    """Champion and all runs for one channel count."""

    K: int
    runs: RunsResult
    f: float
    deviation: float | None  # fraction of f_infinity short of ideal


@dataclass(frozen=True)
class ScenarioResult:
    spec: ScenarioSpec
    f_infinity: float
    per_k: tuple[KResult, ...]


def _noise_links(spec_links) -> tuple[LinkDef, ...]:
    return tuple(LinkDef(name=n, y1=a, y2=b) for n, a, b in spec_links)


_FIVE_LINK_SOFT = (("AB", 0.0, 0.0), ("CD", 0.04, 0.007), ("EF", 0.0, 0.125),
                   ("GH", 0.11, 0.019), ("IJ", 0.15, 0.025))
_FIVE_LINK_TIGHT = (("AB", 0.0, 0.0), ("CD", 0.0034, 0.0006), ("EF", 0.0104, 0.0018),
                    ("GH", 0.0179, 0.0031), ("IJ", 0.0, 0.0515))
_TWELVE_LINK = (("AB", 0.0, 0.0), ("CD", 0.0034, 0.0006), ("EF", 0.0, 0.0357),
                ("GH", 0.0299, 0.0051), ("IJ", 0.0385, 0.0066), ("KL", 0.0625, 0.0107),
                ("MN", 0.0733, 0.0126), ("OP", 0.0, 0.1818), ("QR", 0.1106, 0.019),
                ("ST", 0.125, 0.0214), ("UV", 0.1489, 0.0256), ("WX", 0.0, 0.2979))


def _presets() -> dict[str, ScenarioSpec]:
    five_k = (5, 10, 20, 40)
    twelve_k = (12, 24, 48, 96)
    return {
        "scenario1": ScenarioSpec(name="scenario1", f_min=0.0, k_list=five_k,
                                  links=_noise_links(_FIVE_LINK_SOFT)),
        "scenario2": ScenarioSpec(name="scenario2", f_min=0.7, k_list=five_k,
                                  links=_noise_links(_FIVE_LINK_SOFT)),
        "scenario3": ScenarioSpec(name="scenario3", f_min=0.9, k_list=five_k,
                                  links=_noise_links(_FIVE_LINK_TIGHT)),
        "scenario4": ScenarioSpec(name="scenario4", f_min=0.7, k_list=twelve_k,
                                  links=_noise_links(_TWELVE_LINK)),
    }


PRESET_NAMES = tuple(sorted(_presets()))


def _parse_float(section, key, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ScenarioFormatError(f"[{section}] {key}: not a number: {raw!r}") from exc


def load_scenario(source: str | Path) -> ScenarioSpec:
    """Load a preset by name or parse a scenario file.

    Raises
    ------
    ScenarioFormatError
        On parse failures (with section/field named) or invariant
        violations (infeasible link, bad k_list, ...).
    """
    if isinstance(source, str) and source in _presets():
        return _presets()[source]
    path = Path(source)
    if not path.exists():
        raise ScenarioFormatError(
            f"{source!r} is neither a preset ({', '.join(PRESET_NAMES)}) nor a file")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc
    if "scenario" not in parser:
        raise ScenarioFormatError(f"{path}: missing [scenario] section")
    head = parser["scenario"]
    name = head.get("name", path.stem)
    try:
        k_list = tuple(int(tok) for tok in head.get("k_list", "").replace(",", " ").split())
    except ValueError as exc:
        raise ScenarioFormatError(f"[scenario] k_list: {exc}") from exc
    f_min = _parse_float("scenario", "f_min", head.get("f_min", "0"))
    tau = _parse_float("scenario", "tau", head.get("tau", "1e-9"))

    links = []
    for section in parser.sections():
        if not section.startswith("link"):
            continue
        link_name = section[4:].strip()
        vals = {}
        for key in ("y1", "y2", "eta_a", "dark_a", "eta_b", "dark_b"):
            if key in parser[section]:
                vals[key] = _parse_float(section, key, parser[section][key])
        unknown = set(parser[section]) - {"y1", "y2", "eta_a", "dark_a", "eta_b", "dark_b"}
        if unknown:
            raise ScenarioFormatError(f"[{section}]: unknown keys {sorted(unknown)}")
        links.append(LinkDef(name=link_name, **vals))

    ga_kwargs = {}
    if "ga" in parser:
        section = parser["ga"]
        for key in ("population_size", "stall_generations", "elite_count",
                    "max_generations", "independent_runs", "rng_seed"):
            if key in section:
                try:
                    ga_kwargs[key] = int(section[key])
                except ValueError as exc:
                    raise ScenarioFormatError(f"[ga] {key}: {exc}") from exc
        for key in ("crossover_fraction", "mutation_rate"):
            if key in section:
                ga_kwargs[key] = _parse_float("ga", key, section[key])
        if "mu_tot_bounds" in section:
            parts = section["mu_tot_bounds"].replace(",", " ").split()
            if len(parts) != 2:
                raise ScenarioFormatError("[ga] mu_tot_bounds: need two numbers")
            ga_kwargs["mu_tot_bounds"] = (_parse_float("ga", "mu_tot_bounds", parts[0]),
                                          _parse_float("ga", "mu_tot_bounds", parts[1]))
        unknown = set(section) - {"population_size", "stall_generations", "elite_count",
                                  "max_generations", "independent_runs", "rng_seed",
                                  "crossover_fraction", "mutation_rate", "mu_tot_bounds"}
        if unknown:
            raise ScenarioFormatError(f"[ga]: unknown keys {sorted(unknown)}")

    return ScenarioSpec(name=name, links=tuple(links), k_list=k_list,
                        f_min=f_min, tau=tau, ga=GAConfig(**ga_kwargs))


def save_scenario(spec: ScenarioSpec, path: str | Path) -> Path:
    """Write a scenario file that load_scenario reads back identically."""
    parser = configparser.ConfigParser()
    parser["scenario"] = {
        "name": spec.name,
        "f_min": repr(spec.f_min),
        "tau": repr(spec.tau),
        "k_list": ", ".join(str(k) for k in spec.k_list),
    }
    for d in spec.links:
        sec = f"link {d.name}"
        if d.dimensioned:
            parser[sec] = {"eta_a": repr(d.eta_a), "dark_a": repr(d.dark_a),
                           "eta_b": repr(d.eta_b), "dark_b": repr(d.dark_b)}
        else:
            parser[sec] = {"y1": repr(d.y1), "y2": repr(d.y2)}
    ga, default = spec.ga, GAConfig()
    section = {}
    for key in ("population_size", "crossover_fraction", "stall_generations",
                "elite_count", "max_generations", "independent_runs"):
        val = getattr(ga, key)
        if val != getattr(default, key):
            section[key] = repr(val)
    if ga.mutation_rate is not None:
        section["mutation_rate"] = repr(ga.mutation_rate)
    if ga.rng_seed is not None:
        section["rng_seed"] = str(ga.rng_seed)
    if ga.mu_tot_bounds is not None:
        section["mu_tot_bounds"] = f"{ga.mu_tot_bounds[0]!r}, {ga.mu_tot_bounds[1]!r}"
    if section:
        parser["ga"] = section
    path = Path(path)
    with path.open("w", newline="") as fh:
        parser.write(fh)
    return path


def run_scenario(spec: ScenarioSpec, threads: int = 1) -> ScenarioResult:
    """Sweep every K in the scenario with best-of-N GA runs."""
    f_inf = ideal_fitness(spec.network(spec.k_list[0]))
    out = []
    for K in spec.k_list:
        net = spec.network(K)
        logger.info("scenario %s: K = %d (%d runs)", spec.name, K,
                    spec.ga.independent_runs)
        runs = best_of_runs(net, spec.ga, threads=threads)
        f = runs.champion.report.f
        deviation = (f_inf - f) / f_inf if f_inf > 0 else None
        logger.info("scenario %s: K = %d best f = %.6f (f_inf = %.6f)",
                    spec.name, K, f, f_inf)
        out.append(KResult(K=K, runs=runs, f=f, deviation=deviation))
    return ScenarioResult(spec=spec, f_infinity=f_inf, per_k=tuple(out))


def emit_curves(y1: float, y2: float, x_range: tuple[float, float], samples: int,
                out) -> None:
    """Write (x, fidelity, ebr, ebr/ebr_max) rows over an x grid.

    out is a path or an open text file. The normalized column is all zeros
    when the pairing admits no entanglement.
    """
    if samples < 2:
        raise EntfluxError(f"need at least 2 samples, got {samples}")
    opt = link_optima(y1, y2)
    xs = np.linspace(x_range[0], x_range[1], samples)
    rows = []
    for x in xs:
        fid = fidelity_dimensionless(float(x), y1, y2)
        ebr = ebr_dimensionless(float(x), y1, y2)
        norm = ebr / opt.r_max if opt.r_max > 0 else 0.0
        rows.append((x, fid, ebr, norm))
    own = not hasattr(out, "write")
    fh = open(out, "w", newline="") if own else out
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "fidelity", "ebr", "ebr_normalized"])
        for row in rows:
            writer.writerow([_FLOAT_FMT % v for v in row])
    finally:
        if own:
            fh.close()


def _champion_lines(spec: ScenarioSpec, kr: KResult) -> list[dict]:
    """Per-link report rows for one K's champion allocation."""
    net = spec.network(kr.K)
    champ = kr.runs.champion
    report = champ.report
    counts = champ.allocation.channel_counts(net.L)
    rows = []
    for l, (d, m) in enumerate(zip(spec.links, report.metrics)):
        y1, y2 = d.noise_pair(spec.tau)
        opt = link_optima(y1, y2)
        if d.dimensioned:
            mu_l = m.dimensionless_flux / spec.tau
            pa = check_validity(net.links[l].user_a, mu_l, spec.tau)
            pb = check_validity(net.links[l].user_b, mu_l, spec.tau)
            validity = "ok" if (pa.ok and pb.ok) else \
                f"WARN p = {max(pa.click_probability, pb.click_probability):.3g}"
        else:
            validity = "n/a"
        rows.append({
            "link": d.name,
            "channels": int(counts[l]),
            "x": float(m.dimensionless_flux),
            "fidelity": float(m.fidelity),
            "ebr_normalized": float(ebr_dimensionless(m.dimensionless_flux, y1, y2)
                                    / opt.r_max),
            "beta": float(report.beta[l]),
            "feasible": bool(report.feasible[l]),
            "validity": validity,
            "f_max": opt.f_max,
        })
    return rows


def emit_report(result: ScenarioResult, out_dir: str | Path = ".",
                fmt: str = "both") -> list[Path]:
    """Write the text report and CSV files for a completed sweep.

    Returns the list of written paths. fmt selects "text", "csv", or
    "both". Filenames embed the scenario name, K, and the run seed.
    """
    if fmt not in ("text", "csv", "both"):
        raise EntfluxError(f"unknown format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = result.spec
    written = []

    if fmt in ("text", "both"):
        path = out_dir / f"{spec.name}_report.txt"
        path.write_text(format_report(result))
        written.append(path)

    if fmt in ("csv", "both"):
        summary = out_dir / f"{spec.name}_summary.csv"
        with summary.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["scenario", "K", "seed", "f", "f_infinity",
                             "deviation_pct", "mu_tot", "reserve_channels"])
            for kr in result.per_k:
                champ = kr.runs.champion
                reserve = kr.K - int(champ.allocation.channel_counts(len(spec.links)).sum())
                writer.writerow([spec.name, kr.K, champ.seed,
                                 repr(kr.f), repr(result.f_infinity),
                                 "" if kr.deviation is None else f"{100 * kr.deviation:.2f}",
                                 repr(champ.allocation.mu_tot), reserve])
        written.append(summary)

        for kr in result.per_k:
            champ = kr.runs.champion
            links_path = out_dir / f"{spec.name}_K{kr.K}_seed{champ.seed}_links.csv"
            with links_path.open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["link", "channels", "x", "fidelity", "ebr_normalized",
                                 "beta", "feasible", "validity", "f_max"])
                for row in _champion_lines(spec, kr):
                    writer.writerow([row["link"], row["channels"], repr(row["x"]),
                                     repr(row["fidelity"]), repr(row["ebr_normalized"]),
                                     repr(row["beta"]), row["feasible"], row["validity"],
                                     repr(row["f_max"])])
            written.append(links_path)
            for run in kr.runs.runs:
                trace_path = out_dir / f"{spec.name}_K{kr.K}_seed{run.seed}_trace.csv"
                with trace_path.open("w", newline="") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(["generation", "best_f"])
                    for g, v in enumerate(run.trace):
                        writer.writerow([g, repr(float(v))])
                written.append(trace_path)
    return written


def format_report(result: ScenarioResult) -> str:
    """Human-readable sweep summary."""
    spec = result.spec
    lines = [f"scenario {spec.name}: L = {len(spec.links)}, F_min = {spec.f_min}, "
             f"tau = {spec.tau:g} s",
             f"ideal fitness f_inf = {result.f_infinity:.6f}", ""]
    for kr in result.per_k:
        champ = kr.runs.champion
        dev = "" if kr.deviation is None else f" ({100 * kr.deviation:.2f}% below ideal)"
        lines.append(f"K = {kr.K}: best f = {kr.f:.6f}{dev}  "
                     f"[seed {champ.seed}, {champ.generations} generations, "
                     f"mu_tot = {champ.allocation.mu_tot:.6g}/s]")
        lines.append(f"  {'link':<6} {'chan':>4} {'x':>12} {'fidelity':>10} "
                     f"{'beta':>10} {'validity':>12}")
        rows = _champion_lines(spec, kr)
        for row in rows:
            fid = "n/a" if math.isnan(row["fidelity"]) else f"{row['fidelity']:.4f}"
            lines.append(f"  {row['link']:<6} {row['channels']:>4} {row['x']:>12.6g} "
                         f"{fid:>10} {row['beta']:>10.6f} {row['validity']:>12}")
        reserve = kr.K - sum(r["channels"] for r in rows)
        lines.append(f"  reserve: {reserve} channel(s)")
        lines.append("")
    return "\n".join(lines)
