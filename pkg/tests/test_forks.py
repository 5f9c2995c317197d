from __future__ import annotations

import random
from datetime import timedelta

from codelineage.corpus import CommitRecord, Project, RepositorySnapshot
from codelineage.demo import fake_hash, utc
from codelineage.forks import AMBIGUOUS, detect_fork_derivations, index_commits

T0 = utc(2012, 1, 1)


def commits(*tags):
    return tuple(CommitRecord(fake_hash(t), T0 + timedelta(days=i)) for i, t in enumerate(tags))


def repo(rid, tags, created_days=None):
    created = None if created_days is None else T0 + timedelta(days=created_days)
    return RepositorySnapshot(rid, rid, None, commit_log=commits(*tags), created=created)


def project(pid, *repos):
    return Project(pid, pid, repositories=tuple(repos))


def edge_set(edges):
    return {(e.source, e.target) for e in edges}


def test_unique_commits_map_to_one_repo():
    idx = index_commits([project("a", repo("ra", ["a1", "a2"])), project("b", repo("rb", ["b1"]))])
    assert all(len(v) == 1 for v in idx.commit_to_repos.values())
    assert detect_fork_derivations(idx) == []


def test_shared_commit_lists_older_repo_first():
    idx = index_commits([project("x", repo("rx", ["c"], 5)), project("y", repo("ry", ["c"], 1))])
    assert [rid for rid, _ in idx.commit_to_repos[fake_hash("c")]] == ["ry", "rx"]
    [edge] = detect_fork_derivations(idx)
    assert (edge.source, edge.target, edge.weight) == ("x", "y", 1)
    assert edge.evidence == (fake_hash("c"),)


def test_same_project_repos_give_no_edge():
    idx = index_commits([project("y", repo("r1", ["c", "d"], 0), repo("r2", ["c", "d", "e"], 3))])
    assert detect_fork_derivations(idx) == []


def test_flattening_credits_oldest_repo():
    # Z is oldest; Y forked Z; X forked Y after Y added commits of its own
    z = repo("rz", ["g", "z1"], 0)
    y = repo("ry", ["g", "z1", "y1"], 10)
    x = repo("rx", ["g", "z1", "y1", "x1"], 20)
    edges = detect_fork_derivations(index_commits([project("x", x), project("y", y), project("z", z)]))
    assert edge_set(edges) == {("x", "z"), ("y", "z"), ("x", "y")}
    weights = {(e.source, e.target): e.weight for e in edges}
    assert weights == {("x", "z"): 2, ("y", "z"): 2, ("x", "y"): 1}


def test_chain_without_own_commits_is_fully_flattened():
    z = repo("rz", ["g", "z1"], 0)
    y = repo("ry", ["g", "z1"], 10)
    x = repo("rx", ["g"], 20)
    edges = detect_fork_derivations(index_commits([project("x", x), project("y", y), project("z", z)]))
    assert edge_set(edges) == {("x", "z"), ("y", "z")}


def test_tied_age_is_flagged_and_broken_by_repo_id():
    idx = index_commits([project("b", repo("rb", ["c"], 0)), project("a", repo("ra", ["c"], 0))])
    [edge] = detect_fork_derivations(idx)
    assert (edge.source, edge.target) == ("b", "a")
    assert AMBIGUOUS in edge.evidence


def test_created_at_defaults_to_first_commit():
    r = repo("r", ["a", "b"])
    assert r.created_at == T0


def brute_force(projects):
    owner = {r.repo_id: p.project_id for p in projects for r in p.repositories}
    repos = [r for p in projects for r in p.repositories]
    all_commits = {c.commit_hash for r in repos for c in r.commit_log}
    out = {}
    for h in all_commits:
        holders = [r for r in repos if h in {c.commit_hash for c in r.commit_log}]
        if len(holders) < 2:
            continue
        oldest = min(holders, key=lambda r: (r.created_at, r.repo_id))
        for r in holders:
            if owner[r.repo_id] != owner[oldest.repo_id]:
                key = (owner[r.repo_id], owner[oldest.repo_id])
                out.setdefault(key, set()).add(h)
    return out


def random_corpus(rng):
    pool = [f"c{i}" for i in range(30)]
    projects = []
    for p in range(rng.randint(2, 5)):
        repos = [repo(f"p{p}r{k}", sorted(rng.sample(pool, rng.randint(1, 8))), rng.randint(0, 6))
                 for k in range(rng.randint(1, 3))]
        projects.append(project(f"p{p}", *repos))
    return projects


def test_matches_brute_force_and_witnesses_hold():
    rng = random.Random(2)
    for _ in range(100):
        ps = random_corpus(rng)
        edges = detect_fork_derivations(index_commits(ps))
        expected = brute_force(ps)
        assert {(e.source, e.target): e.weight for e in edges} == {k: len(v) for k, v in expected.items()}
        for e in edges:
            assert e.source != e.target
            assert e.evidence[0] in expected[(e.source, e.target)]
            assert e.evidence[0] == min(expected[(e.source, e.target)])


def test_index_matches_set_intersection():
    rng = random.Random(4)
    ps = [project(f"p{i}", repo(f"r{i}", sorted(rng.sample([f"c{k}" for k in range(12)], 6)), i)) for i in range(5)]
    idx = index_commits(ps)
    for h, locs in idx.commit_to_repos.items():
        holders = {r.repo_id for p in ps for r in p.repositories if h in {c.commit_hash for c in r.commit_log}}
        assert {rid for rid, _ in locs} == holders


def test_permutation_determinism():
    rng = random.Random(9)
    for _ in range(30):
        ps = random_corpus(rng)
        shuffled = [project(p.project_id, *rng.sample(p.repositories, len(p.repositories))) for p in ps]
        rng.shuffle(shuffled)
        assert detect_fork_derivations(index_commits(ps)) == detect_fork_derivations(index_commits(shuffled))
