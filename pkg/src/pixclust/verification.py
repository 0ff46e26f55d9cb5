"""Invariant suite behind ``pixclust verify`` and the acceptance tests.

Hard checks (must pass): incremental-formula consistency against the brute
force oracle, sign contracts, merge/split duality, optimal-sequence
convexity, majorization of the optimal curve, split-pipeline refinement,
Otsu agreement, and the 5% bound on merge/split coincidence.  Observational
checks (reported, never fatal): convexity of quasioptimal sequences and
sub-5% coincidence divergences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import (
    ApproximationSequence,
    best_binary_split,
    build_compact_representation,
    expand_to_sequence,
    merge_dendrogram_from_image,
)
from .core import (
    Partition,
    brute_force_e,
    delta_e_correct,
    delta_e_merge,
    delta_e_split,
    merge_stats,
    remove_stats,
    stats_from_pixels,
)
from .histogram import Histogram, build_histogram
from .image import Image
from .optimal import optimal_sequence

REL_TOL = 1e-9
COINCIDENCE_REPORT_TOL = 1e-6
COINCIDENCE_HARD_TOL = 0.05


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    hard: bool
    details: str

    @property
    def status(self) -> str:
        if self.passed:
            return "PASS"
        return "FAIL" if self.hard else "REPORT"


def classical_otsu_threshold(h: Histogram) -> int:
    """Between-class-variance-maximizing threshold, coded independently of
    ``best_binary_split``: exact integer comparisons, smallest threshold on
    ties.  Classes are [0, t) and [t, levels); as everywhere in this package
    a threshold is canonically the smallest populated intensity of its upper
    class (every t of an unpopulated plateau yields the same classes)."""
    total = h.total_stats()
    n_tot, s_tot = total.n, total.s
    best_t = -1
    best_num = best_den = 0
    n0 = s0 = 0
    prev = None
    for t in range(0, h.levels):
        c = int(h.counts[t])
        if c == 0:
            continue
        if prev is not None:
            n0 += int(h.counts[prev])
            s0 += prev * int(h.counts[prev])
            n1 = n_tot - n0
            s1 = s_tot - s0
            d = s0 * n1 - s1 * n0
            num, den = d * d, n0 * n1
            if best_t < 0 or num * best_den > best_num * den:
                best_t, best_num, best_den = t, num, den
        prev = t
    if best_t < 0:
        raise ValueError("histogram has a single populated intensity")
    return best_t


def _rel_close(a: float, b: float, tol: float = REL_TOL) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b), 1.0)


def _random_partition(image: Image, rng: np.random.Generator, g_hint: int) -> Partition:
    labels = rng.integers(0, g_hint, image.n).astype(np.int32)
    # compact ids so every cluster is populated
    _, labels = np.unique(labels, return_inverse=True)
    return Partition.from_labels(image, labels.astype(np.int32))


def check_incremental(image: Image, rng: np.random.Generator, trials: int) -> CheckResult:
    """Random merge/split/correct applications vs the brute-force oracle."""
    pix = image.pixels
    failures = []
    applied = 0
    for _ in range(trials):
        p = _random_partition(image, rng, int(rng.integers(2, 7)))
        ids = sorted(p.clusters)
        e0 = brute_force_e(image, p.labels)
        kind = ("merge", "split", "correct")[int(rng.integers(0, 3))]
        labels = p.labels.copy()
        if kind == "merge":
            if len(ids) < 2:
                continue
            a, b = rng.choice(ids, size=2, replace=False).tolist()
            delta = delta_e_merge(p.clusters[a], p.clusters[b])
            if delta < 0:
                failures.append(f"sign: merge delta {delta} < 0")
            labels[labels == b] = a
        elif kind in ("split", "correct"):
            donors = [c for c in ids if p.clusters[c].n >= 2]
            if not donors:
                continue
            donor = int(rng.choice(donors))
            members = np.nonzero(labels == donor)[0]
            k = int(rng.integers(1, len(members)))
            moved_idx = rng.choice(members, size=k, replace=False)
            moved = stats_from_pixels(pix[moved_idx])
            if kind == "split":
                delta = delta_e_split(p.clusters[donor], moved)
                if delta > 0:
                    failures.append(f"sign: split delta {delta} > 0")
                labels[moved_idx] = max(ids) + 1
            else:
                if len(ids) < 2:
                    continue
                acceptor = int(rng.choice([c for c in ids if c != donor]))
                delta = delta_e_correct(p.clusters[donor], moved, p.clusters[acceptor])
                labels[moved_idx] = acceptor
        e1 = brute_force_e(image, labels)
        applied += 1
        if not _rel_close(e1, e0 + delta):
            failures.append(f"{kind}: E {e0} + {delta} != {e1}")
    ok = not failures
    msg = f"{applied} applications checked" + ("" if ok else f"; first: {failures[0]}")
    return CheckResult("incremental-consistency", ok, True, msg)


def check_duality(image: Image, rng: np.random.Generator, trials: int) -> CheckResult:
    """delta_e_split(parent, part) == -delta_e_merge(part, rest) bitwise."""
    pix = image.pixels
    bad = 0
    for _ in range(trials):
        idx = rng.choice(image.n, size=int(rng.integers(2, min(64, image.n) + 1)), replace=False)
        k = int(rng.integers(1, len(idx)))
        part = stats_from_pixels(pix[idx[:k]])
        rest = stats_from_pixels(pix[idx[k:]])
        parent = merge_stats(part, rest)
        if delta_e_split(parent, part) != -delta_e_merge(part, rest):
            bad += 1
        if delta_e_correct(parent, part, rest) != (
            delta_e_merge(part, rest) + delta_e_split(parent, part)
        ):
            bad += 1
        if remove_stats(merge_stats(part, rest), rest) != part:
            bad += 1
    return CheckResult(
        "duality-composition", bad == 0, True, f"{trials} random splits, {bad} mismatches"
    )


def _quasi_sequences(image: Image, g_max: int) -> dict[str, ApproximationSequence]:
    import warnings

    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = build_compact_representation(image)
        out["split"], _ = expand_to_sequence(d, g_max, with_partitions=False)
        out["merge-all"], _ = expand_to_sequence(
            merge_dendrogram_from_image(image, adjacent=False), g_max, with_partitions=False
        )
        out["merge-adjacent"], _ = expand_to_sequence(
            merge_dendrogram_from_image(image, adjacent=True), g_max, with_partitions=False
        )
    return out


def check_majorization(
    image: Image, g_max: int, quasi: dict[str, ApproximationSequence] | None = None
) -> CheckResult:
    """E_opt(g) <= E of every quasioptimal pipeline at the same g."""
    h = build_histogram(image)
    top = min(g_max, h.populated_count)
    opt = optimal_sequence(h, top).e_by_g()
    quasi = quasi or _quasi_sequences(image, top)
    worst = ""
    ok = True
    for name, seq in quasi.items():
        for r in seq:
            if r.g in opt and opt[r.g] > r.e + REL_TOL * max(r.e, 1.0):
                ok = False
                worst = f"{name} g={r.g}: opt {opt[r.g]} > quasi {r.e}"
                break
    return CheckResult(
        "majorization", ok, True, worst or f"optimal below all quasi curves up to g={top}"
    )


def convexity_violations(seq: ApproximationSequence, tol: float = REL_TOL) -> list[int]:
    """Indices g where E_i > (E_{i-1} + E_{i+1}) / 2 beyond tolerance."""
    rs = seq.records
    out = []
    for i in range(1, len(rs) - 1):
        mid = 0.5 * (rs[i - 1].e + rs[i + 1].e)
        if rs[i].e > mid + tol * max(rs[i - 1].e, rs[i + 1].e, 1.0):
            out.append(rs[i].g)
    return out


def check_convexity(
    image: Image, g_max: int, quasi: dict[str, ApproximationSequence] | None = None
) -> list[CheckResult]:
    """Hard for the optimal sequence; reported for quasioptimal ones."""
    h = build_histogram(image)
    top = min(g_max, h.populated_count)
    opt_viol = convexity_violations(optimal_sequence(h, top))
    out = [
        CheckResult(
            "convexity-optimal",
            not opt_viol,
            True,
            f"violations at g={opt_viol}" if opt_viol else f"convex up to g={top}",
        )
    ]
    quasi = quasi or _quasi_sequences(image, top)
    for name, seq in sorted(quasi.items()):
        viol = convexity_violations(seq)
        out.append(
            CheckResult(
                f"convexity-{name}",
                not viol,
                False,
                f"{len(viol)} violations at g={viol[:8]}" if viol else f"convex up to g={top}",
            )
        )
    return out


def check_refinement(image: Image, g_max: int) -> CheckResult:
    """Split-pipeline partitions must be nested: g+1 refines g."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = build_compact_representation(image)
        _, parts = expand_to_sequence(d, g_max, with_partitions=True)
    for coarse, fine in zip(parts, parts[1:]):
        # each fine cluster must sit inside exactly one coarse cluster
        key = fine.labels.astype(np.int64) * (coarse.labels.max() + 1) + coarse.labels
        owners = {}
        for k in np.unique(key).tolist():
            f, c = divmod(k, int(coarse.labels.max()) + 1)
            if owners.setdefault(f, c) != c:
                return CheckResult(
                    "refinement", False, True,
                    f"cluster {f} at g={fine.g} spans several clusters at g={coarse.g}",
                )
    return CheckResult("refinement", True, True, f"nested for g=1..{parts[-1].g}")


def check_otsu_agreement(image: Image) -> CheckResult:
    h = build_histogram(image)
    if h.populated_count < 2:
        return CheckResult("otsu-agreement", True, True, "single populated intensity")
    t_split, _ = best_binary_split(h)
    t_otsu = classical_otsu_threshold(h)
    ok = t_split == t_otsu
    return CheckResult(
        "otsu-agreement", ok, True,
        f"split t={t_split}, classical t={t_otsu}" + ("" if ok else " (mismatch)"),
    )


def coincidence_divergences(
    quasi: dict[str, ApproximationSequence], report_tol: float = COINCIDENCE_REPORT_TOL
) -> tuple[list[tuple[int, float]], float]:
    """Per-g relative spread of the three quasioptimal curves.

    Returns (divergences above ``report_tol``, worst spread).  Spreads are
    measured where the curves are numerically meaningful: once every curve
    drops below 1e-9 of its own E(1), differences are rounding residue.
    """
    curves = [seq.e_by_g() for seq in quasi.values()]
    common = sorted(set.intersection(*(set(c) for c in curves)))
    floor = 1e-9 * max(c[1] for c in curves)
    diverging = []
    worst = 0.0
    for g in common:
        vals = [c[g] for c in curves]
        m = max(vals)
        if m <= floor:
            continue
        rel = (m - min(vals)) / m
        worst = max(worst, rel)
        if rel > report_tol:
            diverging.append((g, rel))
    return diverging, worst


def check_coincidence(
    image: Image, g_max: int, quasi: dict[str, ApproximationSequence] | None = None
) -> list[CheckResult]:
    h = build_histogram(image)
    top = min(g_max, h.populated_count)
    quasi = quasi or _quasi_sequences(image, top)
    diverging, worst = coincidence_divergences(quasi)
    hard_ok = worst <= COINCIDENCE_HARD_TOL
    report_ok = not diverging
    summary = f"worst relative spread {worst:.3g} over g=1..{top}"
    if diverging:
        summary += f"; {len(diverging)} g above {COINCIDENCE_REPORT_TOL:g}, first g={diverging[0][0]}"
    return [
        CheckResult("coincidence-5%-bound", hard_ok, True, summary),
        CheckResult("coincidence-1e-6", report_ok, False, summary),
    ]


def run_verification(
    image: Image, seed: int = 0, g_max: int = 64, trials: int = 300
) -> list[CheckResult]:
    """Run every check on one image; deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    h = build_histogram(image)
    top = min(g_max, h.populated_count)
    quasi = _quasi_sequences(image, top)
    results = [
        check_incremental(image, rng, trials),
        check_duality(image, rng, trials),
        check_majorization(image, top, quasi),
    ]
    results += check_convexity(image, top, quasi)
    results.append(check_refinement(image, min(top, 64)))
    if h.populated_count >= 2:
        results.append(check_otsu_agreement(image))
    results += check_coincidence(image, top, quasi)
    return results
