"""Alert reconstruction: duplicate filtering, kNN clustering, correlation indexing.

The pipeline slides overlapping windows over the time-sorted alert stream,
builds a mutual k-nearest-neighbour graph per window using cosine similarity
over encoded alert features, extracts connected components, enforces the
chain rules (distinct steps, distinct types, lifecycle ordering, bounded
span), merges clusters across adjacent windows, and scores each surviving
cluster with the step-transition correlation index.

Host identity drives the correlation logic, so source and destination hosts
are encoded as fixed-size multi-position binary signatures.  Two alerts from
the same source score well above the clustering threshold while alerts from
unrelated hosts cannot reach it; the bounds are documented inline and the
candidate search exploits them to avoid quadratic work at default settings.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CorrelationError
from .taxonomy import Alert, AlertType, AptStep, Protocol, StepMapping

# Feature vector layout.  Hosts use SIG_SIZE-of-SIG_SPACE binary signatures
# so that host equality dominates the cosine; all components stay in [0, 1].
TYPE_BLOCK = len(AlertType)
SIG_SPACE = 65536
SRC_SIG_SIZE = 12
DST_SIG_SIZE = 3
PROTO_BLOCK = len(Protocol)
TYPE_OFFSET = 0
SRC_OFFSET = TYPE_BLOCK
DST_OFFSET = SRC_OFFSET + SIG_SPACE
PROTO_OFFSET = DST_OFFSET + SIG_SPACE
SEVERITY_OFFSET = PROTO_OFFSET + PROTO_BLOCK
TIMESTAMP_OFFSET = SEVERITY_OFFSET + 1
FEATURE_LENGTH = TIMESTAMP_OFFSET + 1

# Worst-case norm/dot bounds used by the candidate search.
# norm^2 = 1 + SRC_SIG_SIZE + DST_SIG_SIZE + 1 + sev^2 + u^2 with sev >= 0.2.
_MIN_NORM_SQ = 2.0 + SRC_SIG_SIZE + DST_SIG_SIZE + 0.2 ** 2
# dot without any shared source-signature position caps at
# type(1) + dst(DST_SIG_SIZE) + proto(1) + sev(1) + ts(1).
_MAX_DOT_NO_SRC = 4.0 + DST_SIG_SIZE

_TYPE_INDEX = {t: i for i, t in enumerate(AlertType)}
_PROTO_INDEX = {p: i for i, p in enumerate(Protocol)}

LABEL_NON_APT = "Non-APT"
LABEL_TWO_STEPS = "APT_sub_scenario_two_steps"
LABEL_THREE_STEPS = "APT_sub_scenario_three_steps"
LABEL_FULL = "APT_full_scenario"
LABELS = (LABEL_NON_APT, LABEL_TWO_STEPS, LABEL_THREE_STEPS, LABEL_FULL)

MODE_STRICT = "strict"
MODE_EXTENDED = "extended"


@dataclass(frozen=True)
class CorrelationParams:
    """Tunables for the reconstruction pipeline."""

    tau: float = 0.6
    delta_t: int = 168 * 3600
    slide: int = 84 * 3600
    k_cap: int = 14
    mode: str = MODE_STRICT

    def __post_init__(self) -> None:
        if not (0.0 < self.tau < 1.0):
            raise CorrelationError(f"tau must lie in (0, 1), got {self.tau}")
        if self.delta_t <= 0:
            raise CorrelationError("delta_t must be positive")
        if not (0 < self.slide <= self.delta_t):
            raise CorrelationError("slide must lie in (0, delta_t]")
        if self.k_cap < 1:
            raise CorrelationError("k_cap must be at least 1")
        if self.mode not in (MODE_STRICT, MODE_EXTENDED):
            raise CorrelationError(f"unknown correlation mode {self.mode!r}")


@dataclass(frozen=True)
class Cluster:
    """A validated group of alerts suspected to form one attack chain."""

    cluster_id: int
    alert_ids: tuple[int, ...]
    window_index: int
    avg_similarity: float


@dataclass(frozen=True)
class CorrelationResult:
    """Step-transition correlation bits and the resulting scenario label."""

    cluster_id: int
    corr_ab: int
    corr_bc: int
    corr_cd: int
    corr_de: int
    corr_final: int
    label: str


@dataclass(frozen=True)
class CorrelationOutput:
    """Everything the pipeline produces for one alert set."""

    clusters: tuple[Cluster, ...]
    results: tuple[CorrelationResult, ...]
    assignment: Mapping[int, int | None]


@lru_cache(maxsize=1 << 17)
def host_signature(ip: str, block: str, size: int) -> frozenset[int]:
    """Deterministic set of exactly ``size`` distinct positions for a host."""
    positions: set[int] = set()
    counter = 0
    while len(positions) < size:
        digest = hashlib.blake2b(f"{block}:{counter}:{ip}".encode(), digest_size=8).digest()
        positions.add(int.from_bytes(digest, "big") % SIG_SPACE)
        counter += 1
    return frozenset(positions)


def encode_features(
    alert: Alert,
    window: tuple[int, int],
    mapping: StepMapping | None = None,
) -> np.ndarray:
    """Encode one alert into the fixed-length feature vector for ``window``.

    The timestamp is min-max normalized within the window; severity is scaled
    by 1/5; categorical blocks are binary.  Raises ``ValueError`` when the
    alert lies outside the window or disagrees with ``mapping``.
    """
    start, end = window
    if not (start <= alert.timestamp <= end):
        raise ValueError(f"alert {alert.alert_id} timestamp outside window {window}")
    if mapping is not None and mapping.step_of(alert.alert_type) is not alert.step:
        raise ValueError(f"alert {alert.alert_id} step disagrees with mapping {mapping.name!r}")
    vec = np.zeros(FEATURE_LENGTH, dtype=np.float64)
    vec[TYPE_OFFSET + _TYPE_INDEX[alert.alert_type]] = 1.0
    for pos in host_signature(alert.src_ip, "src", SRC_SIG_SIZE):
        vec[SRC_OFFSET + pos] = 1.0
    for pos in host_signature(alert.dest_ip, "dst", DST_SIG_SIZE):
        vec[DST_OFFSET + pos] = 1.0
    vec[PROTO_OFFSET + _PROTO_INDEX[alert.protocol]] = 1.0
    vec[SEVERITY_OFFSET] = alert.alert_type.severity / 5.0
    span = end - start
    vec[TIMESTAMP_OFFSET] = (alert.timestamp - start) / span if span > 0 else 0.0
    return vec


def similarity(f1: np.ndarray, f2: np.ndarray, t1: int, t2: int, delta_t: int) -> float:
    """Cosine similarity, forced to zero outside the temporal constraint."""
    if abs(t1 - t2) > delta_t:
        return 0.0
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.shape != f2.shape:
        raise ValueError("feature vectors must have equal length")
    n1 = float(np.linalg.norm(f1))
    n2 = float(np.linalg.norm(f2))
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    return float(np.dot(f1, f2) / (n1 * n2))


# ---------------------------------------------------------------------------
# Analytic fast path: identical math to encode_features + cosine, computed
# from the sparse structure instead of materialized vectors.
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class _Feat:
    alert: Alert
    type_idx: int
    src_sig: frozenset[int]
    dst_sig: frozenset[int]
    proto_idx: int
    sev: float
    static_norm_sq: float
    u: float = 0.0


def _make_feat(alert: Alert) -> _Feat:
    src_sig = host_signature(alert.src_ip, "src", SRC_SIG_SIZE)
    dst_sig = host_signature(alert.dest_ip, "dst", DST_SIG_SIZE)
    sev = alert.alert_type.severity / 5.0
    static = 2.0 + len(src_sig) + len(dst_sig) + sev * sev
    return _Feat(
        alert=alert,
        type_idx=_TYPE_INDEX[alert.alert_type],
        src_sig=src_sig,
        dst_sig=dst_sig,
        proto_idx=_PROTO_INDEX[alert.protocol],
        sev=sev,
        static_norm_sq=static,
    )


def _pair_sim(a: _Feat, b: _Feat) -> float:
    dot = float(len(a.src_sig & b.src_sig) + len(a.dst_sig & b.dst_sig))
    if a.type_idx == b.type_idx:
        dot += 1.0
    if a.proto_idx == b.proto_idx:
        dot += 1.0
    dot += a.sev * b.sev + a.u * b.u
    denom = math.sqrt((a.static_norm_sq + a.u * a.u) * (b.static_norm_sq + b.u * b.u))
    return dot / denom


def _feats_for(alerts: Sequence[Alert], frame: tuple[int, int]) -> list[_Feat]:
    start, end = frame
    span = max(end - start, 1)
    feats = []
    for a in alerts:
        f = _make_feat(a)
        f.u = (a.timestamp - start) / span
        feats.append(f)
    return feats


def _avg_similarity(alerts: Sequence[Alert], delta_t: int, frame: tuple[int, int] | None = None) -> float:
    if len(alerts) < 2:
        return 1.0
    if frame is None:
        lo = min(a.timestamp for a in alerts)
        frame = (lo, lo + delta_t)
    feats = _feats_for(alerts, frame)
    total = 0.0
    count = 0
    for i in range(len(feats)):
        for j in range(i + 1, len(feats)):
            if abs(feats[i].alert.timestamp - feats[j].alert.timestamp) > delta_t:
                s = 0.0
            else:
                s = _pair_sim(feats[i], feats[j])
            total += s
            count += 1
    return total / count


# ---------------------------------------------------------------------------
# Stage 1: duplicate filtering
# ---------------------------------------------------------------------------

def filter_duplicates(alerts: Sequence[Alert], delta_t: int) -> list[Alert]:
    """Keep the earliest alert per (type, src, dst) key within any delta_t span.

    Input must be time-sorted; the relative order of survivors is preserved.
    """
    last_kept: dict[tuple[AlertType, str, str], int] = {}
    out: list[Alert] = []
    for alert in alerts:
        key = (alert.alert_type, alert.src_ip, alert.dest_ip)
        prev = last_kept.get(key)
        if prev is not None and alert.timestamp - prev <= delta_t:
            continue
        last_kept[key] = alert.timestamp
        out.append(alert)
    return out


# ---------------------------------------------------------------------------
# Stage 2: window clustering
# ---------------------------------------------------------------------------

def cluster_violations(
    members: Sequence[Alert],
    tau: float,
    delta_t: int,
    frame: tuple[int, int] | None = None,
) -> list[str]:
    """Names of chain-rule violations for a candidate cluster (empty if valid)."""
    problems = []
    if len(members) < 2:
        problems.append("size")
    steps = [m.step for m in members]
    if len(set(steps)) != len(steps):
        problems.append("step-distinct")
    types = [m.alert_type for m in members]
    if len(set(types)) != len(types):
        problems.append("type-distinct")
    times = [m.timestamp for m in members]
    if times and max(times) - min(times) > delta_t:
        problems.append("span")
    if "step-distinct" not in problems:
        ordered = sorted(members, key=lambda m: m.step.lifecycle_index)
        for earlier, later in zip(ordered, ordered[1:]):
            if later.timestamp <= earlier.timestamp:
                problems.append("lifecycle-order")
                break
    if len(members) >= 2 and _avg_similarity(members, delta_t, frame) < tau:
        problems.append("avg-similarity")
    return problems


def _repair(members: list[Alert], tau: float, delta_t: int, frame: tuple[int, int]) -> list[Alert] | None:
    """Greedily drop offenders until the chain rules hold, or give up."""
    members = list(members)
    while True:
        if not cluster_violations(members, tau, delta_t, frame):
            return members
        if len(members) <= 2:
            return None
        best = None
        best_key = None
        for m in members:
            rest = [x for x in members if x is not m]
            score = _avg_similarity(rest, delta_t, frame)
            # prefer the drop that keeps the most similar remainder,
            # break ties by removing the latest-arriving alert
            key = (score, m.timestamp, m.alert_id)
            if best_key is None or key > best_key:
                best_key = key
                best = m
        members.remove(best)


def _candidate_pairs(feats: list[_Feat], tau: float) -> set[tuple[int, int]]:
    """Index pairs whose similarity could exceed tau.

    Cross-host pairs need at least ``o_min`` shared source-signature
    positions to reach tau (dot <= _MAX_DOT_NO_SRC + overlap, norms >=
    sqrt(_MIN_NORM_SQ)); same-source pairs always qualify.  When tau is
    small enough that o_min drops to zero the search degrades to all pairs.
    """
    n = len(feats)
    pairs: set[tuple[int, int]] = set()
    o_min = math.floor(tau * _MIN_NORM_SQ - _MAX_DOT_NO_SRC) + 1
    if o_min <= 0:
        for i in range(n):
            for j in range(i + 1, n):
                pairs.add((i, j))
        return pairs
    by_src: dict[str, list[int]] = {}
    for i, f in enumerate(feats):
        by_src.setdefault(f.alert.src_ip, []).append(i)
    for group in by_src.values():
        for gi in range(len(group)):
            for gj in range(gi + 1, len(group)):
                pairs.add((group[gi], group[gj]))
    # cross-host candidates: count shared signature positions
    buckets: dict[int, list[int]] = {}
    for i, f in enumerate(feats):
        for pos in f.src_sig:
            buckets.setdefault(pos, []).append(i)
    overlap: dict[tuple[int, int], int] = {}
    for bucket in buckets.values():
        if len(bucket) < 2:
            continue
        for bi in range(len(bucket)):
            for bj in range(bi + 1, len(bucket)):
                key = (bucket[bi], bucket[bj])
                overlap[key] = overlap.get(key, 0) + 1
    for key, count in overlap.items():
        if count >= o_min and key not in pairs:
            i, j = key
            if feats[i].alert.src_ip != feats[j].alert.src_ip:
                pairs.add(key)
    return pairs


def cluster_window(
    alerts: Sequence[Alert],
    k: int,
    tau: float,
    delta_t: int,
    mapping: StepMapping | None = None,
    window: tuple[int, int] | None = None,
    window_index: int = 0,
) -> list[Cluster]:
    """Cluster the alerts of one window via a mutual-kNN graph.

    Edges require mutual top-k membership and similarity above tau;
    connected components are validated against the chain rules and repaired
    by greedy removal.  Alerts that end up alone are not emitted.
    """
    del mapping  # steps are already materialized on the alerts
    n = len(alerts)
    if n < 2:
        return []
    if window is None:
        lo = min(a.timestamp for a in alerts)
        window = (lo, lo + delta_t)
    alerts = sorted(alerts, key=lambda a: (a.timestamp, a.alert_id))
    feats = _feats_for(alerts, window)
    k = max(1, min(k, n - 1))

    sims: dict[tuple[int, int], float] = {}
    neighbors: dict[int, list[tuple[float, int]]] = {i: [] for i in range(n)}
    for i, j in _candidate_pairs(feats, tau):
        if abs(feats[i].alert.timestamp - feats[j].alert.timestamp) > delta_t:
            continue
        s = _pair_sim(feats[i], feats[j])
        sims[(i, j)] = s
        neighbors[i].append((s, j))
        neighbors[j].append((s, i))

    top: list[set[int]] = []
    for i in range(n):
        ranked = sorted(neighbors[i], key=lambda item: (-item[0], item[1]))
        top.append({j for _, j in ranked[:k]})

    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, j), s in sims.items():
        if s > tau and j in top[i] and i in top[j]:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(i)

    clusters: list[Cluster] = []
    seq = 0
    for root in sorted(components, key=lambda r: min(components[r])):
        idxs = components[root]
        if len(idxs) < 2:
            continue
        members = _repair([feats[i].alert for i in idxs], tau, delta_t, window)
        if members is None:
            continue
        members.sort(key=lambda m: (m.timestamp, m.alert_id))
        clusters.append(
            Cluster(
                cluster_id=window_index * 1_000_000 + seq,
                alert_ids=tuple(m.alert_id for m in members),
                window_index=window_index,
                avg_similarity=_avg_similarity(members, delta_t, window),
            )
        )
        seq += 1
    return clusters


# ---------------------------------------------------------------------------
# Stage 3: cross-window merging
# ---------------------------------------------------------------------------

def merge_adjacent(
    clusters_prev: Sequence[Cluster],
    clusters_next: Sequence[Cluster],
    alerts_by_id: Mapping[int, Alert],
    tau: float,
    delta_t: int,
) -> list[Cluster]:
    """Union clusters from adjacent windows when they share most members.

    Clusters whose shared-alert ratio exceeds 0.5 are unioned; a union that
    breaks the chain rules is rejected and both originals survive.
    """
    remaining = list(clusters_prev)
    merged_next = list(clusters_next)
    consumed: list[Cluster] = []
    for ci in sorted(remaining, key=lambda c: (c.alert_ids[0], c.alert_ids)):
        ci_set = set(ci.alert_ids)
        for idx, cj in enumerate(merged_next):
            cj_set = set(cj.alert_ids)
            shared = ci_set & cj_set
            if not shared:
                continue
            if len(shared) / min(len(ci_set), len(cj_set)) <= 0.5:
                continue
            union_ids = sorted(ci_set | cj_set)
            members = sorted(
                (alerts_by_id[a] for a in union_ids),
                key=lambda m: (m.timestamp, m.alert_id),
            )
            lo = members[0].timestamp
            frame = (lo, lo + delta_t)
            if cluster_violations(members, tau, delta_t, frame):
                continue
            merged_next[idx] = Cluster(
                cluster_id=cj.cluster_id,
                alert_ids=tuple(m.alert_id for m in members),
                window_index=cj.window_index,
                avg_similarity=_avg_similarity(members, delta_t, frame),
            )
            consumed.append(ci)
            break
    survivors = [c for c in remaining if c not in consumed]
    return survivors + merged_next


# ---------------------------------------------------------------------------
# Stage 4: correlation indexing
# ---------------------------------------------------------------------------

def label_for(corr_final: int) -> str:
    if corr_final == 0:
        return LABEL_NON_APT
    if corr_final == 1:
        return LABEL_TWO_STEPS
    if corr_final == 2:
        return LABEL_THREE_STEPS
    return LABEL_FULL


def correlation_index(
    cluster: Cluster,
    alerts: Mapping[int, Alert] | Sequence[Alert],
    mapping: StepMapping,
    mode: str = MODE_STRICT,
) -> CorrelationResult:
    """Score the step-transition host linkage of one cluster.

    In strict mode the discovery-to-exfiltration bit requires the discovery
    step and links through its infected or scanned host only; extended mode
    additionally accepts linkage to any earlier step's infected host.
    """
    if mode not in (MODE_STRICT, MODE_EXTENDED):
        raise CorrelationError(f"unknown correlation mode {mode!r}")
    if not isinstance(alerts, Mapping):
        alerts = {a.alert_id: a for a in alerts}
    by_step: dict[AptStep, Alert] = {}
    for aid in cluster.alert_ids:
        alert = alerts[aid]
        step = mapping.step_of(alert.alert_type)
        if step in by_step:
            raise ValueError(f"cluster {cluster.cluster_id} holds two alerts on step {step.name}")
        by_step[step] = alert

    host = {step: a.infected_host for step, a in by_step.items()}
    scanned = by_step[AptStep.D].scanned_host if AptStep.D in by_step else None

    def linked(step: AptStep, predecessors: tuple[AptStep, ...]) -> bool:
        return any(p in host and host[step] == host[p] for p in predecessors)

    corr_ab = int(AptStep.A in host and AptStep.B in host and host[AptStep.B] == host[AptStep.A])
    corr_bc = int(AptStep.C in host and linked(AptStep.C, (AptStep.B, AptStep.A)))
    corr_cd = int(AptStep.D in host and linked(AptStep.D, (AptStep.C, AptStep.B, AptStep.A)))

    corr_de = 0
    if AptStep.E in host:
        via_discovery = AptStep.D in host and (
            (scanned is not None and host[AptStep.E] == scanned)
            or host[AptStep.E] == host[AptStep.D]
        )
        if via_discovery:
            corr_de = 1
        elif mode == MODE_EXTENDED and linked(AptStep.E, (AptStep.C, AptStep.B, AptStep.A)):
            corr_de = 1

    corr_final = corr_ab + corr_bc + corr_cd + corr_de
    return CorrelationResult(
        cluster_id=cluster.cluster_id,
        corr_ab=corr_ab,
        corr_bc=corr_bc,
        corr_cd=corr_cd,
        corr_de=corr_de,
        corr_final=corr_final,
        label=label_for(corr_final),
    )


# ---------------------------------------------------------------------------
# End-to-end orchestration
# ---------------------------------------------------------------------------

def _k_policy(window_alerts: Sequence[Alert], cap: int) -> int:
    distinct_types = len({a.alert_type for a in window_alerts})
    return max(1, min(distinct_types, cap, len(window_alerts) - 1))


def _disjointify(clusters: list[Cluster], alerts_by_id: Mapping[int, Alert], tau: float, delta_t: int) -> list[Cluster]:
    """Resolve rare overlaps so every alert lands in at most one cluster."""
    order = sorted(
        clusters,
        key=lambda c: (-len(c.alert_ids), -c.avg_similarity, alerts_by_id[c.alert_ids[0]].timestamp, c.alert_ids),
    )
    claimed: set[int] = set()
    out: list[Cluster] = []
    for c in order:
        ids = [a for a in c.alert_ids if a not in claimed]
        if len(ids) == len(c.alert_ids):
            out.append(c)
            claimed.update(ids)
            continue
        members = sorted((alerts_by_id[a] for a in ids), key=lambda m: (m.timestamp, m.alert_id))
        if len(members) < 2:
            continue
        lo = members[0].timestamp
        frame = (lo, lo + delta_t)
        if cluster_violations(members, tau, delta_t, frame):
            continue
        out.append(
            Cluster(
                cluster_id=c.cluster_id,
                alert_ids=tuple(m.alert_id for m in members),
                window_index=c.window_index,
                avg_similarity=_avg_similarity(members, delta_t, frame),
            )
        )
        claimed.update(ids)
    return out


def correlate(
    alerts: Sequence[Alert],
    params: CorrelationParams | None = None,
    mapping: StepMapping | None = None,
    workers: int = 1,
) -> CorrelationOutput:
    """Run filtering, windowed clustering, merging, and indexing end to end.

    Output is a pure function of the inputs: window jobs may run on a thread
    pool but results are collected in window order, so ``workers`` never
    changes the outcome.
    """
    from .taxonomy import canonical_mapping

    params = params or CorrelationParams()
    mapping = mapping or canonical_mapping()
    ordered = sorted(alerts, key=lambda a: (a.timestamp, a.alert_id))
    assignment: dict[int, int | None] = {a.alert_id: None for a in ordered}
    if len(ordered) < 2:
        return CorrelationOutput(clusters=(), results=(), assignment=assignment)

    filtered = filter_duplicates(ordered, params.delta_t)
    alerts_by_id = {a.alert_id: a for a in filtered}
    t0 = filtered[0].timestamp
    t_max = filtered[-1].timestamp
    times = [a.timestamp for a in filtered]
    n_windows = (t_max - t0) // params.slide + 1

    import bisect

    def window_job(i: int) -> list[Cluster]:
        start = t0 + i * params.slide
        end = start + params.delta_t
        lo = bisect.bisect_left(times, start)
        hi = bisect.bisect_right(times, end)
        members = filtered[lo:hi]
        if len(members) < 2:
            return []
        return cluster_window(
            members,
            _k_policy(members, params.k_cap),
            params.tau,
            params.delta_t,
            window=(start, end),
            window_index=i,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_window = list(pool.map(window_job, range(n_windows)))
    else:
        per_window = [window_job(i) for i in range(n_windows)]

    active: list[Cluster] = per_window[0] if per_window else []
    finals: list[Cluster] = []
    for i in range(1, n_windows):
        combined = merge_adjacent(active, per_window[i], alerts_by_id, params.tau, params.delta_t)
        active = [c for c in combined if c.window_index == i]
        finals.extend(c for c in combined if c.window_index != i)
    finals.extend(active)

    # identical member sets can surface from two overlapping windows
    seen: set[tuple[int, ...]] = set()
    unique: list[Cluster] = []
    for c in sorted(finals, key=lambda c: (c.alert_ids[0], c.alert_ids, c.window_index)):
        if c.alert_ids in seen:
            continue
        seen.add(c.alert_ids)
        unique.append(c)
    unique = _disjointify(unique, alerts_by_id, params.tau, params.delta_t)

    unique.sort(key=lambda c: (alerts_by_id[c.alert_ids[0]].timestamp, c.alert_ids))
    final_clusters: list[Cluster] = []
    results: list[CorrelationResult] = []
    for new_id, c in enumerate(unique, start=1):
        members = [alerts_by_id[a] for a in c.alert_ids]
        lo = min(m.timestamp for m in members)
        cluster = Cluster(
            cluster_id=new_id,
            alert_ids=c.alert_ids,
            window_index=c.window_index,
            avg_similarity=_avg_similarity(members, params.delta_t, (lo, lo + params.delta_t)),
        )
        final_clusters.append(cluster)
        results.append(correlation_index(cluster, alerts_by_id, mapping, params.mode))
        for aid in cluster.alert_ids:
            assignment[aid] = new_id
    return CorrelationOutput(
        clusters=tuple(final_clusters),
        results=tuple(results),
        assignment=assignment,
    )
