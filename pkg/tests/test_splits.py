"""Leakage groups, benchmark splits, and shift diagnostics."""

import random

import numpy as np
import pytest

from corpora import family_corpus
from rxnbalance import kernels
from rxnbalance.balance import element_delta
from rxnbalance.chem import parse_reaction
from rxnbalance.fingerprint import ReactionFingerprint, fingerprint, pack_matrix
from rxnbalance.splits import (
    DegenerateClustering,
    SplitAssignment,
    SplitConfig,
    extreme_ood_split,
    group_split,
    leakage_groups,
    nn_mean_similarities,
    random_split,
    shift_report,
)


def brute_force_groups(fps, threshold):
    """All-pairs exact-Tanimoto connected components (the oracle)."""
    m = pack_matrix(fps)
    sims = kernels.tanimoto_matrix(m, m)
    n = len(fps)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if sims[i, j] > threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [sorted(groups[r]) for r in sorted(groups)]


def synthetic_cluster_fps(rng, n_clusters=10, per_cluster=6, n_bits=2048):
    """Well-separated bit-block clusters with small within-cluster jitter."""
    fps, labels = [], []
    for c in range(n_clusters):
        base = set(range(c * 80, c * 80 + 40))
        for _ in range(per_cluster):
            jitter = {c * 80 + 40 + rng.randrange(20) for _ in range(3)}
            fps.append(ReactionFingerprint.from_bits(base | jitter, n_bits))
            labels.append(c)
    return fps, labels


class TestLeakageGroups:
    def test_all_dissimilar_all_singletons(self):
        fps = [ReactionFingerprint.from_bits({10 * i + k for k in range(5)})
               for i in range(8)]
        groups = leakage_groups(fps, SplitConfig(seed=1))
        assert all(len(g) == 1 for g in groups)
        assert sorted(i for g in groups for i in g) == list(range(8))

    def test_duplicates_share_group(self):
        r1 = fingerprint(parse_reaction("CCO.CC(=O)O>>CC(=O)OCC"))
        r2 = fingerprint(parse_reaction("OCC.CC(=O)O>>CC(=O)OCC"))
        distinct = fingerprint(parse_reaction("CBr.[Na+].[I-]>>CI.[Na+].[Br-]"))
        groups = leakage_groups([r1, r2, distinct], SplitConfig(seed=0))
        assert [0, 1] in groups and [2] in groups

    def test_planted_cliques_match_oracle(self):
        # two cliques of near-duplicates + spread singletons
        clique_a = ["CCO.CC(=O)O>>CC(=O)OCC", "OCC.CC(=O)O>>CC(=O)OCC",
                    "CCO.OC(C)=O>>CC(=O)OCC", "CCO.CC(O)=O>>O(CC)C(C)=O"]
        clique_b = ["CCCBr.[Na+].C[O-]>>COCCC", "BrCCC.[Na+].C[O-]>>COCCC",
                    "CCCBr.C[O-].[Na+]>>CCCOC"]
        singles = ["c1ccccc1>>c1ccccc1Br", "CC(C)=O.[H][H]>>CC(C)O",
                   "S=C=S>>S=C=S.O", "N#Cc1ccccc1.O>>NC(=O)c1ccccc1",
                   "OC(=O)CCC(=O)O>>O=C1CCC(=O)O1"]
        texts = clique_a + clique_b + singles
        fps = [fingerprint(parse_reaction(t)) for t in texts]
        cfg = SplitConfig(seed=3)
        groups = leakage_groups(fps, cfg)
        assert groups == brute_force_groups(fps, cfg.tanimoto_threshold)
        multi = [g for g in groups if len(g) > 1]
        assert len(multi) == 2
        assert sorted(len(g) for g in multi) == [3, 4]

    def test_matches_oracle_on_family_corpus(self):
        rows = family_corpus(random.Random(5), per_family=8)
        fps = [fingerprint(parse_reaction(r["incomplete"])) for r in rows]
        cfg = SplitConfig(seed=0)
        assert leakage_groups(fps, cfg) == \
            brute_force_groups(fps, cfg.tanimoto_threshold)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            leakage_groups([], SplitConfig())


class TestGroupSplit:
    def test_planted_clusters_recovered(self):
        rng = random.Random(7)
        fps, labels = synthetic_cluster_fps(rng)
        cfg = SplitConfig(seed=2, n_clusters=10)
        groups = leakage_groups(fps, cfg)
        ids = [f"r{i}" for i in range(len(fps))]
        assignment = group_split(groups, fps, ids, cfg)
        # every planted cluster must fall entirely into one fold
        for c in range(10):
            folds = {assignment.fold_of[f"r{i}"]
                     for i in range(len(fps)) if labels[i] == c}
            assert len(folds) == 1
        assert set(assignment.fold_of.values()) == {"train", "valid", "test"}

    def test_group_atomicity(self):
        rng = random.Random(8)
        fps, _ = synthetic_cluster_fps(rng)
        cfg = SplitConfig(seed=5)
        groups = leakage_groups(fps, cfg)
        ids = [f"r{i}" for i in range(len(fps))]
        assignment = group_split(groups, fps, ids, cfg)
        for g in groups:
            assert len({assignment.fold_of[ids[i]] for i in g}) == 1

    def test_determinism(self):
        rng = random.Random(9)
        fps, _ = synthetic_cluster_fps(rng)
        cfg = SplitConfig(seed=11)
        groups = leakage_groups(fps, cfg)
        ids = [f"r{i}" for i in range(len(fps))]
        a = group_split(groups, fps, ids, cfg)
        b = group_split(groups, fps, ids, cfg)
        assert a.fold_of == b.fold_of

    def test_degenerate(self):
        fps = [ReactionFingerprint.from_bits({1, 2, 3})] * 3
        groups = [[0, 1, 2]]
        with pytest.raises(DegenerateClustering):
            group_split(groups, fps, ["a", "b", "c"], SplitConfig(n_clusters=10))

    def test_partition_complete(self):
        rng = random.Random(13)
        fps, _ = synthetic_cluster_fps(rng)
        cfg = SplitConfig(seed=1)
        groups = leakage_groups(fps, cfg)
        ids = [f"r{i}" for i in range(len(fps))]
        assignment = group_split(groups, fps, ids, cfg)
        assert sorted(assignment.fold_of) == sorted(ids)


class TestExtremeOOD:
    def _build(self, seed=0):
        rows = family_corpus(random.Random(21), per_family=12)
        records = [parse_reaction(r["incomplete"]) for r in rows]
        fps = [fingerprint(r) for r in records]
        deltas = [element_delta(r) for r in records]
        ids = [r["id"] for r in rows]
        cfg = SplitConfig(seed=seed)
        groups = leakage_groups(fps, cfg)
        return rows, fps, deltas, ids, cfg, groups

    def test_hard_family_lands_in_test(self):
        rows, fps, deltas, ids, cfg, groups = self._build()
        assignment = extreme_ood_split(groups, fps, deltas, ids, cfg)
        hard_ids = {r["id"] for r in rows if r["hard"]}
        test_ids = set(assignment.ids("test"))
        # the most carbon-deficient, isolated reactions dominate the test pool
        assert len(test_ids & hard_ids) / len(test_ids) > 0.8

    def test_incompleteness_shift(self):
        rows, fps, deltas, ids, cfg, groups = self._build()
        assignment = extreme_ood_split(groups, fps, deltas, ids, cfg)
        by_id = {r["id"]: element_delta(parse_reaction(r["incomplete"]))
                 for r in rows}
        test_mc = np.mean([by_id[i].missing_carbons
                           for i in assignment.ids("test")])
        train_mc = np.mean([by_id[i].missing_carbons
                            for i in assignment.ids("train")])
        assert test_mc > train_mc

    def test_group_atomicity_and_partition(self):
        rows, fps, deltas, ids, cfg, groups = self._build()
        assignment = extreme_ood_split(groups, fps, deltas, ids, cfg)
        assert sorted(assignment.fold_of) == sorted(ids)
        for g in groups:
            assert len({assignment.fold_of[ids[i]] for i in g}) == 1

    def test_tie_break_deterministic(self):
        fps = [ReactionFingerprint.from_bits({i}) for i in range(6)]
        deltas = [element_delta(parse_reaction("O>>O"))] * 6
        ids = [f"r{i}" for i in range(6)]
        groups = [[i] for i in range(6)]
        cfg = SplitConfig(seed=4, ood_top_fraction=0.34)
        a = extreme_ood_split(groups, fps, deltas, ids, cfg)
        b = extreme_ood_split(groups, fps, deltas, ids, cfg)
        assert a.fold_of == b.fold_of


class TestShiftReport:
    def test_test_duplicated_from_train_steps_at_one(self):
        fp = fingerprint(parse_reaction("CCO.CC(=O)O>>CC(=O)OCC"))
        fps = {f"t{i}": fp for i in range(6)}
        assignment = SplitAssignment("random", 0, "x")
        for i in range(6):
            assignment.fold_of[f"t{i}"] = "train" if i < 4 else "test"
        curves = shift_report(assignment, fps)
        assert all(x == 1.0 for x, _ in curves["test_to_train"])

    def test_disjoint_steps_at_zero(self):
        fps = {}
        assignment = SplitAssignment("random", 0, "x")
        for i in range(4):
            fps[f"a{i}"] = ReactionFingerprint.from_bits({i * 3 + k for k in range(3)})
            assignment.fold_of[f"a{i}"] = "train"
        for i in range(3):
            fps[f"b{i}"] = ReactionFingerprint.from_bits({1000 + i * 3 + k for k in range(3)})
            assignment.fold_of[f"b{i}"] = "test"
        curves = shift_report(assignment, fps)
        assert all(x == 0.0 for x, _ in curves["test_to_train"])

    def test_matches_brute_force_oracle(self):
        rows = family_corpus(random.Random(31), per_family=3)[:20]
        fps = [fingerprint(parse_reaction(r["incomplete"])) for r in rows]
        queries, reference = fps[:8], fps[8:]
        got = nn_mean_similarities(queries, reference, top=5)
        m_q, m_r = pack_matrix(queries), pack_matrix(reference)
        sims = kernels.tanimoto_matrix(m_q, m_r)
        expect = np.sort(sims, axis=1)[:, ::-1][:, :5].mean(axis=1)
        assert np.allclose(got, expect)


class TestRandomSplit:
    def test_partition_and_determinism(self):
        ids = [f"r{i}" for i in range(100)]
        cfg = SplitConfig(seed=17)
        a = random_split(ids, cfg)
        b = random_split(ids, cfg)
        assert a.fold_of == b.fold_of
        assert sorted(a.fold_of) == sorted(ids)
        sizes = {f: sum(1 for v in a.fold_of.values() if v == f)
                 for f in ("train", "valid", "test")}
        assert sizes["train"] == 80 and sizes["valid"] == 10

    def test_jsonl_round_trip(self):
        ids = [f"r{i}" for i in range(10)]
        a = random_split(ids, SplitConfig(seed=3))
        b = SplitAssignment.from_jsonl(a.to_jsonl())
        assert b.fold_of == a.fold_of
        assert b.config_hash == a.config_hash
