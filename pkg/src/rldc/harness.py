"""Experiment orchestration: claim suites, decoder trials, scaling studies.

Every randomized suite draws from streams derived off one master seed (see
rng.py), reports violations with the labels that reproduce them, and uses
exact arithmetic for every bound it asserts.  Aggregation is order
independent, so reports are deterministic for a given (config, seed).
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Callable, Sequence

from .daisy import DaisyLevel, build_daisy_sequence, pick_heavy_level, pluck_simple_daisy
from .decoders import Code, NonAdaptiveDecoder, parse_code_spec, random_corruption
from .exact import PowerBound, floor_power_bound
from .global_decoder import (
    DECODED,
    IndexDecodePackage,
    build_decode_packages,
    decode_index,
    fully_queried_petals,
    sample_coordinates,
    default_sampling_probability,
)
from .rng import derive_rng
from .set_system import (
    DaisyCertificate,
    SetSystem,
    WeightedSetSystem,
    covered_elements,
    petal_degrees,
    verify_daisy,
)

CLAIM_IDS = (
    "coresub",
    "partition",
    "external",
    "simple-daisy-bound",
    "completeness",
    "soundness",
    "wrapup",
)

DEFAULT_POINTS = tuple((n, ell) for n in (64, 256, 1024) for ell in (2, 3, 4))


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by the verification and simulation entry points."""

    code: str = "hadamard:m=10"
    trials: int = 200
    seed: int = 0
    p: float | None = None
    kernel_cap: int = 20
    query_budget: int | None = None
    out: str | None = None
    fmt: str = "csv"
    strict_consensus: bool = False
    timing: bool = False
    threads: int = 1
    claim_points: tuple[tuple[int, int], ...] = DEFAULT_POINTS
    claim_instances: int = 1000
    daisy_samples: int = 200
    wrapup_max: int = 10
    toggles: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def wants(self, claim: str) -> bool:
        return self.toggles is None or claim in self.toggles


@dataclass
class ClaimReport:
    """Aggregated result of one randomized claim suite."""

    claim: str
    instances: int = 0
    violations: int = 0
    violation_seeds: list = field(default_factory=list)
    worst_margin: float | None = None

    def record(self, labels, margin: float | None = None) -> None:
        self.violations += 1
        if len(self.violation_seeds) < 25:
            self.violation_seeds.append(labels)
        self.note_margin(margin)

    def note_margin(self, margin: float | None) -> None:
        if margin is not None and (self.worst_margin is None or margin < self.worst_margin):
            self.worst_margin = margin

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "instances": self.instances,
            "violations": self.violations,
            "violation_seeds": [list(v) for v in self.violation_seeds],
            "worst_margin": self.worst_margin,
        }


# ---------------------------------------------------------------------------
# random instances


def random_set_system(n: int, set_count: int, set_size: int, rng: Random) -> SetSystem:
    """set_count uniformly random distinct-element sets of exactly set_size."""
    universe = range(n)
    return SetSystem(
        n, tuple(tuple(sorted(rng.sample(universe, set_size))) for _ in range(set_count))
    )


def random_masses(count: int, rng: Random) -> tuple[int, ...]:
    return tuple(rng.randrange(1, 1000) for _ in range(count))


def random_daisy_instance(
    rng: Random,
) -> tuple[SetSystem, frozenset[int], int, int]:
    """A random valid (t, s)-daisy: (system of members, kernel, s, t).

    Petal elements are drawn so no outside element is used more than t times;
    members may additionally contain arbitrary kernel elements, and a few
    members may sit entirely inside the kernel (empty petals).
    """
    n = rng.choice((64, 128, 256, 512, 1024))
    petal_bound = rng.randint(1, 4)
    degree_bound = rng.randint(1, 4)
    kernel_size = rng.randint(1, max(2, n // 16))
    elements = list(range(n))
    rng.shuffle(elements)
    kernel = elements[:kernel_size]
    outside = elements[kernel_size:]

    usage = Counter()
    available = list(outside)
    sets = []
    target = rng.randint(1, n)
    while len(sets) < target and available:
        if rng.random() < 0.05:
            petal: list[int] = []  # member hiding entirely inside the kernel
        else:
            size = rng.randint(1, petal_bound)
            if size > len(available):
                break
            petal = rng.sample(available, size)
            for e in petal:
                usage[e] += 1
            available = [e for e in available if usage[e] < degree_bound]
        inside = rng.sample(kernel, rng.randint(0 if petal else 1, min(2, kernel_size)))
        sets.append(tuple(sorted(petal + inside)))
    if not sets:
        sets.append((kernel[0],))
    return SetSystem(n, tuple(sets)), frozenset(kernel), petal_bound, degree_bound


def make_in_radius_corpus(
    code: Code, size: int, rng: Random
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(word, message) pairs with the word exactly radius_flips from C(x)."""
    corpus = []
    flips = code.radius_flips()
    for _ in range(size):
        x = tuple(rng.randrange(2) for _ in range(code.k))
        corpus.append((random_corruption(code.encode(x), flips, rng), x))
    return corpus


# ---------------------------------------------------------------------------
# daisy-sequence claims


def audit_daisy_levels(
    system: SetSystem, ell: int, levels: Sequence[DaisyLevel]
) -> dict[str, list]:
    """Exact re-verification of the three level guarantees.

    Returns violation lists keyed by claim: "partition" (member lists must
    partition the collection), "coresub" (|K_i| < l * n**(1 - i/l)), and
    "external" (petal degree at level i at most the level max(1, i-1)
    threshold).
    """
    n = system.universe_size
    out: dict[str, list] = {"partition": [], "coresub": [], "external": []}

    seen: set[int] = set()
    count = 0
    for level in levels:
        count += len(level.members)
        seen.update(level.members)
    if count != len(system.sets) or seen != set(range(len(system.sets))):
        out["partition"].append(("cover", count, len(system.sets)))

    for level in levels:
        i = level.level_index
        kernel_bound = PowerBound(Fraction(ell), n, Fraction(ell - i, ell))
        if kernel_bound.cmp(len(level.kernel)) <= 0:  # need |K_i| < bound, strictly
            out["coresub"].append((i, len(level.kernel)))

        degree_cap = floor_power_bound(levels[max(1, i - 1) - 1].threshold)
        counts = petal_degrees(system, level.members, level.kernel)
        for e, d in counts.items():
            if d > degree_cap:
                out["external"].append((i, e, d))
    return out


def _kernel_margin(system: SetSystem, ell: int, levels: Sequence[DaisyLevel]) -> float:
    n = system.universe_size
    return min(
        float(PowerBound(Fraction(ell), n, Fraction(ell - lvl.level_index, ell)))
        - len(lvl.kernel)
        for lvl in levels
    )


def run_daisy_claim_suite(
    points: Sequence[tuple[int, int]],
    instances: int,
    master_seed: int,
    tamper: Callable[[SetSystem, tuple[DaisyLevel, ...]], tuple[DaisyLevel, ...]] | None = None,
) -> dict[str, ClaimReport]:
    """Random systems of |T| = n sets of size exactly l; zero violations expected.

    Each instance builds the level sequence with scale c = |T|/n = 1, audits
    partition / kernel-size / degree bounds exactly, and checks that the
    heavy level reaches density 1/l under random weights (tracked under the
    extra key "pigeonhole"; it is a consequence of the partition claim).
    `tamper` lets tests inject corrupted levels to prove the audit catches
    them.
    """
    reports = {c: ClaimReport(c) for c in ("coresub", "partition", "external", "pigeonhole")}
    for n, ell in points:
        for idx in range(instances):
            labels = ("daisy", n, ell, idx)
            rng = derive_rng(master_seed, *labels)
            system = random_set_system(n, n, ell, rng)
            levels = build_daisy_sequence(system, ell, Fraction(1))
            if tamper is not None:
                levels = tamper(system, levels)

            found = audit_daisy_levels(system, ell, levels)
            for claim in ("coresub", "partition", "external"):
                reports[claim].instances += 1
                if found[claim]:
                    reports[claim].record(labels + tuple(found[claim][0]))
            reports["coresub"].note_margin(_kernel_margin(system, ell, levels))

            weighted = WeightedSetSystem.from_masses(system, random_masses(len(system), rng))
            heavy = pick_heavy_level(levels, weighted)
            reports["pigeonhole"].instances += 1
            if heavy.density * ell < 1:
                reports["pigeonhole"].record(labels + ("pigeonhole",))
            else:
                reports["pigeonhole"].note_margin(float(heavy.density - Fraction(1, ell)))
    return reports


def run_pluck_suite(samples: int, master_seed: int) -> ClaimReport:
    """Random valid t-daisies: plucked output must be a 1-daisy meeting the
    covered-elements size bound."""
    report = ClaimReport("simple-daisy-bound")
    for idx in range(samples):
        labels = ("pluck", idx)
        rng = derive_rng(master_seed, *labels)
        system, kernel, s, t = random_daisy_instance(rng)
        members = tuple(range(len(system.sets)))
        assert verify_daisy(
            system, DaisyCertificate(frozenset(members), kernel, s, Fraction(t))
        ).ok, "generator produced an invalid daisy"

        chosen = pluck_simple_daisy(system, members, kernel, s, Fraction(t))
        report.instances += 1

        simple = verify_daisy(
            system, DaisyCertificate(frozenset(chosen), kernel, s, Fraction(1))
        )
        covered = len(covered_elements(system, members))
        needed = covered - len(kernel)
        got = len(chosen) if s == 1 else len(chosen) * t * s * s
        if not simple.ok or not set(chosen) <= set(members) or got < needed:
            report.record(labels)
        else:
            report.note_margin(float(got - needed))
    return report


# ---------------------------------------------------------------------------
# global-decoder trials


@dataclass(frozen=True)
class TrialRow:
    trial: int
    success: bool
    queries: int
    statuses: tuple[str, ...]
    wall_ms: float


@dataclass
class GlobalTrialStats:
    code_name: str
    trials: int
    seed: int
    rows: list[TrialRow] = field(default_factory=list)
    successes: int = 0
    aborted: int = 0
    wrong_bits: int = 0
    completeness_violations: int = 0
    soundness_violations: int = 0
    violation_seeds: list = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def mean_queries(self) -> float:
        return sum(r.queries for r in self.rows) / len(self.rows)

    @property
    def max_queries(self) -> int:
        return max(r.queries for r in self.rows)


def _audit_index(
    pkg: IndexDecodePackage,
    sampled_values: dict[int, int],
    word: Sequence[int],
    true_bit: int,
    kernel_cap: int,
) -> tuple[bool, int]:
    """(correct-assignment completeness holds, count of unanimous-wrong
    assignments) for one index and sample."""
    kernel = pkg.kernel_order
    if len(kernel) > kernel_cap:
        return True, 0
    queried = fully_queried_petals(pkg, frozenset(sampled_values))
    if not queried:
        return True, 0

    true_kappa = {e: word[e] for e in kernel}
    complete = True
    for m in queried:
        view = pkg.views[m]
        petal = pkg.petals[m]
        values = [sampled_values[c] if c in petal else true_kappa[c] for c in view.coords]
        if view.evaluate(values) != true_bit:
            complete = False
            break

    wrong_events = 0
    for a in range(1 << len(kernel)):
        kappa = {e: (a >> (len(kernel) - 1 - j)) & 1 for j, e in enumerate(kernel)}
        outputs = [
            pkg.views[m].evaluate(
                [sampled_values[c] if c in pkg.petals[m] else kappa[c] for c in pkg.views[m].coords]
            )
            for m in queried
        ]
        if outputs and all(out == 1 - true_bit for out in outputs):
            wrong_events += 1
    return complete, wrong_events


def run_global_trials(
    code: Code,
    decoder: NonAdaptiveDecoder,
    trials: int,
    master_seed: int,
    kernel_cap: int = 20,
    p: float | None = None,
    query_budget: int | None = None,
    strict: bool = False,
    audit: bool = True,
    timing: bool = False,
) -> GlobalTrialStats:
    """Seeded global-decoder runs on fresh random valid codewords.

    Each trial gets the stream hash(master_seed, "trial", index); daisy
    packages are extracted once and shared.  With audit on, every trial also
    checks correct-assignment completeness and counts unanimous-wrong kernel
    assignments across the full enumeration.
    """
    packages = build_decode_packages(decoder)
    if p is None:
        p = default_sampling_probability(code.n, decoder.locality)
    stats = GlobalTrialStats(code.name, trials, master_seed)

    for t in range(trials):
        start = time.perf_counter() if timing else 0.0
        rng = derive_rng(master_seed, "trial", t)
        x = tuple(rng.randrange(2) for _ in range(code.k))
        word = code.encode(x)

        sampled = sample_coordinates(code.n, p, rng)
        if query_budget is not None and len(sampled) > query_budget:
            stats.aborted += 1
            stats.rows.append(TrialRow(t, False, len(sampled), ("aborted",) * code.k, 0.0))
            continue
        sampled_values = {j: word[j] for j in sampled}

        statuses = []
        ok = True
        for pkg in packages:
            outcome = decode_index(pkg, sampled_values, kernel_cap, strict)
            statuses.append(outcome.code())
            if outcome.status != DECODED:
                ok = False
            elif outcome.bit != x[pkg.index]:
                ok = False
                stats.wrong_bits += 1
                stats.violation_seeds.append((master_seed, "trial", t, "wrong-bit", pkg.index))
            if audit:
                complete, wrong_events = _audit_index(
                    pkg, sampled_values, word, x[pkg.index], kernel_cap
                )
                if not complete:
                    stats.completeness_violations += 1
                    stats.violation_seeds.append(
                        (master_seed, "trial", t, "completeness", pkg.index)
                    )
                if wrong_events:
                    stats.soundness_violations += wrong_events
                    stats.violation_seeds.append(
                        (master_seed, "trial", t, "soundness", pkg.index)
                    )

        wall = (time.perf_counter() - start) * 1000 if timing else 0.0
        stats.successes += ok
        stats.rows.append(TrialRow(t, ok, len(sampled), tuple(statuses), wall))
    return stats


def run_decoder_claim_suite(
    trials: int, master_seed: int, kernel_cap: int = 20
) -> dict[str, ClaimReport]:
    """Completeness / soundness audits over both global-decoder paths:
    empty kernel (hadamard) and pivot-block kernel (shared-pivot)."""
    completeness = ClaimReport("completeness")
    soundness = ClaimReport("soundness")
    for spec in ("hadamard:m=10", "shared-pivot:kappa=2,r=64,k=16"):
        code, decoder = parse_code_spec(spec)
        stats = run_global_trials(
            code, decoder, trials, master_seed, kernel_cap=kernel_cap, audit=True
        )
        completeness.instances += trials * code.k
        soundness.instances += trials * code.k
        if stats.completeness_violations:
            completeness.violations += stats.completeness_violations
            completeness.violation_seeds.extend(stats.violation_seeds[:5])
        if stats.soundness_violations or stats.wrong_bits:
            soundness.violations += stats.soundness_violations + stats.wrong_bits
            soundness.violation_seeds.extend(stats.violation_seeds[:5])
    return {"completeness": completeness, "soundness": soundness}


# ---------------------------------------------------------------------------
# information-theoretic sanity


def wrapup_sanity(k: int) -> ClaimReport:
    """Every deterministic strategy reading k-1 of k identity-coded bits errs
    on at least half of all messages; measured exhaustively.

    For each query set I of size k-1, messages are grouped by their view
    w|_I; any output map is correct on at most one message per view group, so
    the best strategy errs on exactly 2**k - 2**(k-1) messages.  The measured
    minimum is compared against that half exactly.
    """
    if k < 1 or k > 10:
        raise ValueError("exhaustive regime requires 1 <= k <= 10")
    report = ClaimReport("wrapup")
    total = 1 << k
    for dropped in range(k):
        groups: Counter = Counter()
        for x in range(total):
            view = x & ~(1 << dropped)
            groups[view] += 1
        best_correct = len(groups)
        min_errors = total - best_correct

        # Concrete fixed strategy: read all but `dropped`, guess 0 there.
        concrete_errors = sum(1 for x in range(total) if (x >> dropped) & 1)

        report.instances += 1
        if min_errors * 2 < total or concrete_errors * 2 < total:
            report.record(("wrapup", k, dropped))
        else:
            report.note_margin(min_errors / total - 0.5)
    return report


# ---------------------------------------------------------------------------
# scaling


@dataclass(frozen=True)
class ScalingRow:
    n: int
    trials: int
    success_rate: float
    mean_queries: float
    max_queries: int


@dataclass(frozen=True)
class ScalingResult:
    family: str
    rows: tuple[ScalingRow, ...]
    exponent: float | None
    intercept: float | None
    residuals: tuple[float, ...]
    skipped: tuple[tuple[int, str], ...] = ()


def fit_log_slope(points: Sequence[tuple[float, float]]) -> tuple[float, float, tuple[float, ...]]:
    """Least squares on (ln x, ln y): slope, intercept, per-point residuals."""
    xs = [math.log(x) for x, _ in points]
    ys = [math.log(y) for _, y in points]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) * (x - mx) for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    residuals = tuple(y - (intercept + slope * x) for x, y in zip(xs, ys))
    return slope, intercept, residuals


SCALING_FAMILIES = ("hadamard", "identity")


def _code_for_size(family: str, n: int) -> tuple[Code, NonAdaptiveDecoder]:
    if family == "hadamard":
        m = n.bit_length() - 1
        if 1 << m != n:
            raise ValueError(f"hadamard needs a power-of-two blocklength, got {n}")
        return parse_code_spec(f"hadamard:m={m}")
    return parse_code_spec(f"identity:k={n}")


def scaling_study(
    family: str,
    sizes: Sequence[int],
    trials: int,
    master_seed: int,
    p: float | None = None,
    kernel_cap: int = 20,
) -> ScalingResult:
    """Mean query counts per blocklength with a log-log slope fit.

    Infeasible sizes are skipped with a recorded reason; fewer than two
    surviving points yields raw stats and no fit.
    """
    family = family.lower().replace("_", "-")
    if family not in SCALING_FAMILIES:
        raise ValueError(f"unknown scaling family {family!r}")
    rows = []
    skipped = []
    for n in sizes:
        try:
            code, decoder = _code_for_size(family, n)
        except ValueError as why:
            skipped.append((n, str(why)))
            continue
        stats = run_global_trials(
            code,
            decoder,
            trials,
            master_seed,
            kernel_cap=kernel_cap,
            p=p,
            audit=False,
        )
        rows.append(
            ScalingRow(n, trials, stats.success_rate, stats.mean_queries, stats.max_queries)
        )
    if len(rows) >= 2:
        slope, intercept, residuals = fit_log_slope(
            [(row.n, row.mean_queries) for row in rows]
        )
    else:
        slope = intercept = None
        residuals = ()
    return ScalingResult(family, tuple(rows), slope, intercept, residuals, tuple(skipped))


# ---------------------------------------------------------------------------
# top-level verification


def verify_claims(
    config: ExperimentConfig,
    tamper: Callable | None = None,
) -> list[ClaimReport]:
    """Run every toggled claim suite at the configured scale.

    `tamper` is a fault-injection hook for the daisy suite (tests use it to
    prove the audits catch corrupted level sequences).
    """
    reports: list[ClaimReport] = []
    daisy_wanted = [c for c in ("coresub", "partition", "external") if config.wants(c)]
    if daisy_wanted:
        daisy = run_daisy_claim_suite(
            config.claim_points, config.claim_instances, config.seed, tamper
        )
        # The heavy-level pigeonhole is a corollary of the partition claim;
        # its violations surface under the fixed "partition" claim id.
        daisy["partition"].violations += daisy["pigeonhole"].violations
        daisy["partition"].violation_seeds.extend(daisy["pigeonhole"].violation_seeds)
        reports.extend(daisy[c] for c in daisy_wanted)
    if config.wants("simple-daisy-bound"):
        reports.append(run_pluck_suite(config.daisy_samples, config.seed))
    if config.wants("completeness") or config.wants("soundness"):
        decoder_reports = run_decoder_claim_suite(
            config.trials, config.seed, config.kernel_cap
        )
        for claim in ("completeness", "soundness"):
            if config.wants(claim):
                reports.append(decoder_reports[claim])
    if config.wants("wrapup"):
        merged = ClaimReport("wrapup")
        for k in range(1, config.wrapup_max + 1):
            single = wrapup_sanity(k)
            merged.instances += single.instances
            merged.violations += single.violations
            merged.violation_seeds.extend(single.violation_seeds)
            merged.note_margin(single.worst_margin)
        reports.append(merged)
    return reports
