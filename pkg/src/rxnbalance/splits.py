"""Leakage groups and benchmark splits over reaction fingerprints.

Split construction: approximate kNN candidates in a bit-folded fingerprint
space, exact Tanimoto verification, connected components as leakage groups,
then either k-means over group centroids (group split) or a rank-sum of
isolation and incompleteness (extreme OOD split). All randomness flows from
the config seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .balance import ElementDelta
from .fingerprint import ReactionFingerprint, fold, pack_matrix

FOLDS = ("train", "valid", "test")

# Above this corpus size the all-pairs candidate search switches to an
# inverted index over folded bits.
_INVERTED_INDEX_THRESHOLD = 50_000


class DegenerateClustering(ValueError):
    """Fewer leakage groups than requested clusters."""


@dataclass(frozen=True)
class SplitConfig:
    knn_k: int = 100
    tanimoto_threshold: float = 0.55
    n_clusters: int = 10
    ood_top_fraction: float = 0.20
    train_fraction: float = 0.80
    reduced_bits: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.tanimoto_threshold <= 1):
            raise ValueError("tanimoto_threshold must be in (0, 1]")
        if not (0 < self.ood_top_fraction <= 1):
            raise ValueError("ood_top_fraction must be in (0, 1]")
        if not (0 < self.train_fraction <= 1):
            raise ValueError("train_fraction must be in (0, 1]")
        if self.knn_k < 1:
            raise ValueError("knn_k must be >= 1")

    def hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:12]


@dataclass
class SplitAssignment:
    """Fold label and leakage-group id per reaction id."""

    split_type: str
    fold_index: int
    config_hash: str
    fold_of: dict[str, str] = field(default_factory=dict)
    group_of: dict[str, int] = field(default_factory=dict)

    def ids(self, fold: str) -> list[str]:
        return [i for i, f in self.fold_of.items() if f == fold]

    def to_jsonl(self) -> str:
        lines = [json.dumps({
            "header": True, "split_type": self.split_type,
            "fold_index": self.fold_index, "config_hash": self.config_hash,
        })]
        for rid in sorted(self.fold_of):
            lines.append(json.dumps({
                "id": rid, "group_id": self.group_of.get(rid, -1),
                "fold": self.fold_of[rid],
            }))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "SplitAssignment":
        out = None
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("header"):
                out = cls(rec["split_type"], rec["fold_index"], rec["config_hash"])
            else:
                if out is None:
                    out = cls("unknown", 0, "")
                out.fold_of[rec["id"]] = rec["fold"]
                out.group_of[rec["id"]] = rec.get("group_id", -1)
        if out is None:
            raise ValueError("empty split file")
        return out


# ---------------------------------------------------------------------------
# Leakage groups
# ---------------------------------------------------------------------------


def _candidate_pairs(folded: np.ndarray, k: int) -> set[tuple[int, int]]:
    n = len(folded)
    idx, _ = kernels.topk_neighbors(folded, folded, min(k + 1, n))
    pairs: set[tuple[int, int]] = set()
    for i in range(n):
        for j in idx[i]:
            j = int(j)
            if j != i:
                pairs.add((min(i, j), max(i, j)))
    return pairs


def _candidate_pairs_inverted(folded: np.ndarray, k: int) -> set[tuple[int, int]]:
    # Bucket reactions by folded on-bit; rank co-bucket counts per reaction
    # and keep the k strongest partners. Sparse-friendly for large corpora.
    from collections import Counter

    buckets: dict[int, list[int]] = {}
    on_bits: list[list[int]] = []
    for i, row in enumerate(folded):
        bits = []
        for w, word in enumerate(row):
            word = int(word)
            while word:
                low = word & -word
                bits.append(w * 64 + low.bit_length() - 1)
                word ^= low
        on_bits.append(bits)
        for b in bits:
            buckets.setdefault(b, []).append(i)
    pairs: set[tuple[int, int]] = set()
    for i, bits in enumerate(on_bits):
        counts: Counter[int] = Counter()
        for b in bits:
            counts.update(buckets[b])
        counts.pop(i, None)
        for j, _ in counts.most_common(k):
            pairs.add((min(i, j), max(i, j)))
    return pairs


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def leakage_groups(fingerprints: list[ReactionFingerprint],
                   cfg: SplitConfig) -> list[list[int]]:
    """Disjoint index groups: connected components of the exact-Tanimoto
    graph restricted to approximate-kNN candidate pairs above the threshold.

    Every reaction lands in exactly one group; singletons allowed. Groups
    are ordered and identified by their smallest member index.
    """
    if not fingerprints:
        raise ValueError("empty corpus")
    full = pack_matrix(fingerprints)
    folded = pack_matrix([fold(fp, cfg.reduced_bits) for fp in fingerprints])
    if len(fingerprints) > _INVERTED_INDEX_THRESHOLD:
        pairs = _candidate_pairs_inverted(folded, cfg.knn_k)
    else:
        pairs = _candidate_pairs(folded, cfg.knn_k)
    uf = _UnionFind(len(fingerprints))
    for i, j in pairs:
        if kernels.tanimoto_pair(full[i], full[j]) > cfg.tanimoto_threshold:
            uf.union(i, j)
    members: dict[int, list[int]] = {}
    for i in range(len(fingerprints)):
        members.setdefault(uf.find(i), []).append(i)
    return [sorted(members[root]) for root in sorted(members)]


# ---------------------------------------------------------------------------
# k-means over group centroids
# ---------------------------------------------------------------------------


def _unpack_bits(fp: ReactionFingerprint) -> np.ndarray:
    return np.unpackbits(fp.words.view(np.uint8), bitorder="little").astype(np.float64)


def group_centroids(groups: list[list[int]],
                    fingerprints: list[ReactionFingerprint]) -> np.ndarray:
    cents = np.zeros((len(groups), fingerprints[0].n_bits))
    for g, idxs in enumerate(groups):
        for i in idxs:
            cents[g] += _unpack_bits(fingerprints[i])
        cents[g] /= len(idxs)
    return cents


def _kmeans(points: np.ndarray, k: int, seed: int,
            max_iter: int = 100) -> np.ndarray:
    """k-means++ seeding then Lloyd iterations; returns labels."""
    rng = np.random.default_rng(seed)
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[c] = points[rng.integers(n)]
        else:
            centers[c] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    labels = np.full(n, -1, dtype=np.int64)
    for _step in range(max_iter):
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        if (new_labels == labels).all():
            break
        labels = new_labels
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
    return labels


def group_split(groups: list[list[int]], fingerprints: list[ReactionFingerprint],
                ids: list[str], cfg: SplitConfig) -> SplitAssignment:
    """Cluster group centroids with k-means; one cluster becomes the test
    fold, the next the validation fold, the rest train. The seed picks both
    the clustering and which cluster serves as test, so fold repetitions are
    scripted as distinct seeds.
    """
    if len(groups) < cfg.n_clusters:
        raise DegenerateClustering(
            f"{len(groups)} groups < {cfg.n_clusters} clusters")
    cents = group_centroids(groups, fingerprints)
    labels = _kmeans(cents, cfg.n_clusters, cfg.seed)
    # Relabel clusters deterministically by their smallest member group.
    order = sorted(range(cfg.n_clusters),
                   key=lambda c: min(np.flatnonzero(labels == c), default=10**9))
    test_cluster = order[cfg.seed % cfg.n_clusters]
    valid_cluster = order[(cfg.seed + 1) % cfg.n_clusters]
    assignment = SplitAssignment("group", cfg.seed % cfg.n_clusters, cfg.hash())
    for g, idxs in enumerate(groups):
        fold_label = ("test" if labels[g] == test_cluster
                      else "valid" if labels[g] == valid_cluster else "train")
        for i in idxs:
            assignment.fold_of[ids[i]] = fold_label
            assignment.group_of[ids[i]] = g
    return assignment


def extreme_ood_split(groups: list[list[int]],
                      fingerprints: list[ReactionFingerprint],
                      deltas: list[ElementDelta], ids: list[str],
                      cfg: SplitConfig) -> SplitAssignment:
    """Test pool: groups that are both isolated in fingerprint space and
    highly incomplete, by rank-sum of (centroid isolation, mean missing
    atoms, mean missing carbons); ties break toward the smaller group id.
    Remaining groups fill train up to the train fraction, the rest valid.
    """
    if len(groups) < 2:
        raise DegenerateClustering("need at least 2 groups for the OOD split")
    cents = group_centroids(groups, fingerprints)
    diff = ((cents[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(diff, np.inf)
    isolation = np.sqrt(diff.min(axis=1))
    mean_missing = np.array([
        float(np.mean([deltas[i].missing_atoms() for i in idxs]))
        for idxs in groups])
    mean_missing_c = np.array([
        float(np.mean([deltas[i].missing_carbons for i in idxs]))
        for idxs in groups])

    def ranks_desc(values: np.ndarray) -> np.ndarray:
        # Rank 0 = largest value; ties share the order of their group id.
        order = np.lexsort((np.arange(len(values)), -values))
        out = np.empty(len(values), dtype=np.int64)
        out[order] = np.arange(len(values))
        return out

    score = (ranks_desc(isolation) + ranks_desc(mean_missing)
             + ranks_desc(mean_missing_c))
    n_test_groups = max(1, int(round(cfg.ood_top_fraction * len(groups))))
    chosen = sorted(range(len(groups)),
                    key=lambda g: (score[g], g))[:n_test_groups]
    test_groups = set(chosen)

    n_total = sum(len(g) for g in groups)
    target_train = cfg.train_fraction * n_total
    rest = [g for g in range(len(groups)) if g not in test_groups]
    rng = np.random.default_rng(cfg.seed)
    rng.shuffle(rest)
    train_groups: set[int] = set()
    acc = 0
    for g in rest:
        if acc >= target_train:
            break
        train_groups.add(g)
        acc += len(groups[g])

    assignment = SplitAssignment("extreme-ood", 0, cfg.hash())
    for g, idxs in enumerate(groups):
        fold_label = ("test" if g in test_groups
                      else "train" if g in train_groups else "valid")
        for i in idxs:
            assignment.fold_of[ids[i]] = fold_label
            assignment.group_of[ids[i]] = g
    return assignment


def random_split(ids: list[str], cfg: SplitConfig,
                 valid_fraction: float = 0.10) -> SplitAssignment:
    """Seeded uniform split, train_fraction/valid/rest-to-test."""
    rng = np.random.default_rng(cfg.seed)
    order = list(ids)
    rng.shuffle(order)
    n = len(order)
    n_train = int(round(cfg.train_fraction * n))
    n_valid = int(round(valid_fraction * n))
    assignment = SplitAssignment("random", 0, cfg.hash())
    for pos, rid in enumerate(order):
        fold_label = ("train" if pos < n_train
                      else "valid" if pos < n_train + n_valid else "test")
        assignment.fold_of[rid] = fold_label
        assignment.group_of[rid] = -1
    return assignment


# ---------------------------------------------------------------------------
# Distribution-shift diagnostics
# ---------------------------------------------------------------------------


def nn_mean_similarities(queries: list[ReactionFingerprint],
                         reference: list[ReactionFingerprint],
                         top: int = 5, exclude_self: bool = False) -> np.ndarray:
    """Per query: mean exact Tanimoto to its `top` nearest reference rows."""
    if not queries or not reference:
        return np.zeros(0)
    q = pack_matrix(queries)
    ref = pack_matrix(reference)
    k = min(top + (1 if exclude_self else 0), len(ref))
    idx, sims = kernels.topk_neighbors(q, ref, k)
    out = np.empty(len(queries))
    for i in range(len(queries)):
        row = sims[i]
        if exclude_self:
            keep = idx[i] != i
            row = row[keep][:top]
        out[i] = row.mean() if len(row) else 0.0
    return out


def shift_report(assignment: SplitAssignment,
                 fingerprints: dict[str, ReactionFingerprint],
                 top: int = 5) -> dict[str, list[tuple[float, float]]]:
    """CDF samples of top-k mean nearest-neighbor similarity.

    Returns curves for test->train and the train->train reference, each a
    list of (similarity, cumulative fraction) pairs.
    """
    train_ids = sorted(assignment.ids("train"))
    test_ids = sorted(assignment.ids("test"))
    train_fps = [fingerprints[i] for i in train_ids]
    test_fps = [fingerprints[i] for i in test_ids]
    curves = {}
    for name, values in (
        ("test_to_train", nn_mean_similarities(test_fps, train_fps, top)),
        ("train_to_train",
         nn_mean_similarities(train_fps, train_fps, top, exclude_self=True)),
    ):
        xs = np.sort(values)
        curves[name] = [(float(x), (i + 1) / len(xs)) for i, x in enumerate(xs)]
    return curves
