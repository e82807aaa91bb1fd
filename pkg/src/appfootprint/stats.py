"""Corpus-level statistics: prevalence intervals, count summaries, TF-IDF
cross-platform matching, and comparative group summaries."""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from statistics import NormalDist

from .footprint import PrivacyFootprint
from .model import Category, Platform
from .permissions import PermissionTable

TRACKING_DOMAIN_MIN_SHARE = 0.005  # corpus-level inclusion threshold

_TOKEN = re.compile(r"[a-z0-9]+")


class StatsError(Exception):
    pass


class BadCount(StatsError):
    pass


class EmptyInput(StatsError):
    pass


class EmptyGroup(StatsError):
    pass


# -- prevalence ---------------------------------------------------------------


@dataclass(frozen=True)
class PrevalenceEstimate:
    """Normal-approximation confidence interval for a sample proportion."""

    p: float
    n: int
    lo: float
    hi: float
    confidence: float = 0.95

    @property
    def mu(self) -> float:
        return self.p

    @property
    def variance(self) -> float:
        return self.p * (1.0 - self.p) / self.n

    @property
    def margin(self) -> float:
        return self.hi - self.lo


def prevalence_ci(k: int, n: int, confidence: float = 0.95) -> PrevalenceEstimate:
    """CI for k hits in n apps, assuming the proportion is normally distributed."""
    if n < 1 or k < 0 or k > n:
        raise BadCount(f"k={k}, n={n}")
    p = k / n
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    half = z * math.sqrt(p * (1.0 - p) / n)
    return PrevalenceEstimate(
        p=p, n=n, lo=max(0.0, p - half), hi=min(1.0, p + half), confidence=confidence
    )


# -- descriptive statistics -----------------------------------------------------


@dataclass(frozen=True)
class CountStats:
    median: float
    mean: float
    q1: float
    q3: float
    pct_gt: float
    pct_none: float
    n: int


def _quantile(ordered: list[int], q: float) -> float:
    """Linear interpolation between order statistics at position (n-1)*q."""
    pos = (len(ordered) - 1) * q
    lower = math.floor(pos)
    upper = math.ceil(pos)
    if lower == upper:
        return float(ordered[int(pos)])
    frac = pos - lower
    return ordered[lower] * (1.0 - frac) + ordered[upper] * frac


def descriptive_stats(counts: list[int], gt_threshold: int = 10) -> CountStats:
    if not counts:
        raise EmptyInput("no counts")
    ordered = sorted(counts)
    n = len(ordered)
    return CountStats(
        median=_quantile(ordered, 0.5),
        mean=sum(ordered) / n,
        q1=_quantile(ordered, 0.25),
        q3=_quantile(ordered, 0.75),
        pct_gt=sum(1 for c in ordered if c > gt_threshold) / n,
        pct_none=sum(1 for c in ordered if c == 0) / n,
        n=n,
    )


# -- TF-IDF cross-platform matching ---------------------------------------------


@dataclass
class AppTextVector:
    app_id: str
    platform: Platform
    weights: dict[str, float]


def _tokenize(title: str, identifier: str) -> list[str]:
    tokens = _TOKEN.findall(title.lower())
    for segment in re.split(r"[.\-]", identifier.lower()):
        tokens.extend(_TOKEN.findall(segment))
    return tokens


def build_text_vectors(
    apps: list[tuple[str, Platform, str, str]]
) -> list[AppTextVector]:
    """TF-IDF vectors over title and identifier tokens, idf = ln(N/df)."""
    if not apps:
        raise EmptyInput("no apps to vectorize")
    token_lists = [_tokenize(title, identifier) for _, _, title, identifier in apps]
    df: Counter[str] = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    n = len(apps)

    vectors = []
    for (app_id, platform, _, _), tokens in zip(apps, token_lists):
        tf = Counter(tokens)
        weights = {}
        for token, count in tf.items():
            idf = math.log(n / df[token])
            if idf > 0.0:
                weights[token] = count * idf
        vectors.append(AppTextVector(app_id=app_id, platform=platform, weights=weights))
    return vectors


def cosine_similarity(a: AppTextVector, b: AppTextVector) -> float:
    if len(b.weights) < len(a.weights):
        a, b = b, a
    dot = sum(w * b.weights.get(t, 0.0) for t, w in a.weights.items())
    norm_a = math.sqrt(sum(w * w for w in a.weights.values()))
    norm_b = math.sqrt(sum(w * w for w in b.weights.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def match_cross_platform(
    android: list[AppTextVector],
    ios: list[AppTextVector],
    threshold: float = 0.95,
) -> list[tuple[str, str, float]]:
    """Pair each Android app with its best iOS candidate at or above threshold.

    Every iOS app is matched at most once: candidate pairs are taken greedily
    by descending similarity, ties broken by app_id lexicographically.
    """
    candidates = []
    for vec in android:
        best: tuple[float, str] | None = None
        for other in ios:
            sim = cosine_similarity(vec, other)
            if sim < threshold:
                continue
            if best is None or sim > best[0] or (sim == best[0] and other.app_id < best[1]):
                best = (sim, other.app_id)
        if best is not None:
            candidates.append((vec.app_id, best[1], best[0]))

    candidates.sort(key=lambda c: (-c[2], c[0], c[1]))
    taken_ios: set[str] = set()
    pairs = []
    for android_id, ios_id, sim in candidates:
        if ios_id in taken_ios:
            continue
        taken_ios.add(ios_id)
        pairs.append((android_id, ios_id, sim))
    pairs.sort(key=lambda c: (c[0], c[1]))
    return pairs


# -- group summaries --------------------------------------------------------------


@dataclass(frozen=True)
class GroupSummary:
    group: str  # all | cross_platform | children
    platform: Platform
    total: int
    mean_root_companies: float
    mean_permissions: float
    mean_cross_platform_permissions: float
    location_share: float
    adid_static_share: float
    adid_traffic_share: float


def summarize_group(
    footprints: list[PrivacyFootprint],
    group: str,
    permission_table: PermissionTable,
    cross_platform_ids: set[str] | None = None,
) -> GroupSummary:
    """Comparative metrics for one platform group.

    ``footprints`` must all be from one platform. Permission means count only
    OS-defined permissions, mirroring the exclusion of vendor-custom ones.
    """
    if not footprints:
        raise EmptyGroup("no footprints")
    platforms = {fp.platform for fp in footprints}
    if len(platforms) != 1:
        raise StatsError(f"footprints span platforms {sorted(p.value for p in platforms)}")
    platform = platforms.pop()

    if group == "all":
        member = footprints
    elif group == "children":
        member = [fp for fp in footprints if fp.category is Category.CHILDREN]
    elif group == "cross_platform":
        ids = cross_platform_ids or set()
        member = [fp for fp in footprints if fp.app_id in ids]
    else:
        raise StatsError(f"unknown group {group!r}")
    if not member:
        raise EmptyGroup(f"group {group!r} is empty on {platform.value}")

    n = len(member)
    return GroupSummary(
        group=group,
        platform=platform,
        total=n,
        mean_root_companies=sum(len(fp.root_companies) for fp in member) / n,
        mean_permissions=sum(
            len(permission_table.os_defined(fp.permission_profile.raw, platform))
            for fp in member
        )
        / n,
        mean_cross_platform_permissions=sum(
            len(fp.permission_profile.cross_platform_groups) for fp in member
        )
        / n,
        location_share=sum(
            1 for fp in member if "Location" in fp.permission_profile.cross_platform_groups
        )
        / n,
        adid_static_share=sum(1 for fp in member if fp.adid_static) / n,
        adid_traffic_share=sum(1 for fp in member if fp.adid_in_traffic) / n,
    )


def domain_prevalence(
    footprints: list[PrivacyFootprint], min_share: float = TRACKING_DOMAIN_MIN_SHARE
) -> list[tuple[str, float]]:
    """Tracking-domain shares, filtered at the corpus inclusion threshold."""
    if not footprints:
        raise EmptyGroup("no footprints")
    counts: dict[str, int] = defaultdict(int)
    for fp in footprints:
        for host in set(fp.tracking_hosts):
            counts[host] += 1
    n = len(footprints)
    ranked = [(host, c / n) for host, c in counts.items() if c / n >= min_share]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked


def library_prevalence(footprints: list[PrivacyFootprint]) -> list[tuple[str, float]]:
    if not footprints:
        raise EmptyGroup("no footprints")
    counts: dict[str, int] = defaultdict(int)
    for fp in footprints:
        for lib in fp.tracker_libraries:
            counts[lib] += 1
    n = len(footprints)
    ranked = [(lib, c / n) for lib, c in counts.items()]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked


def company_prevalence(footprints: list[PrivacyFootprint]) -> list[tuple[str, float]]:
    if not footprints:
        raise EmptyGroup("no footprints")
    counts: dict[str, int] = defaultdict(int)
    for fp in footprints:
        for company in fp.root_companies:
            counts[company] += 1
    n = len(footprints)
    ranked = [(company, c / n) for company, c in counts.items()]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked
