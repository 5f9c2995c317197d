from __future__ import annotations

import itertools
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from codelineage.corpus import Project
from codelineage.names import detect_name_derivations, load_stoplist
from codelineage.selection import normalize_name

STOP = load_stoplist()


def projects(*names):
    return [Project(f"p{i}", n) for i, n in enumerate(names)]


def pairs(edges):
    return [(e.source, e.target) for e in edges]


def test_bitcoin_planet():
    [edge] = detect_name_derivations(projects("Bitcoin", "Bitcoin Planet"), STOP)
    assert (edge.source, edge.target, edge.method) == ("p1", "p0", "name")
    assert edge.evidence == ("Bitcoin Planet", "Bitcoin")


def test_ethereum_gold_punctuation():
    assert pairs(detect_name_derivations(projects("Ethereum", "Ethereum-Gold"), STOP)) == [("p1", "p0")]


def test_equal_names_are_not_derivations():
    assert detect_name_derivations(projects("Bitcoin", "BITCOIN"), STOP) == []


def test_stoplisted_prefix_ignored():
    assert detect_name_derivations(projects("Crypto", "CryptoPing"), STOP) == []
    assert "crypto" in STOP and "coin" in STOP and "bit" in STOP


def test_zcash_style_evocations_not_matched():
    assert detect_name_derivations(projects("Zcash", "ZClassic", "Zoin", "Zero"), STOP) == []


def test_output_sorted_by_target_then_source():
    edges = detect_name_derivations(projects("Litecoin Plus", "Bitcoin", "Litecoin", "Bitcoin Gold", "Bitcoin Cash"), STOP)
    assert pairs(edges) == [("p3", "p1"), ("p4", "p1"), ("p0", "p2")]


def oracle(ps, stop):
    out = set()
    for a, b in itertools.permutations(ps, 2):
        na, nb = normalize_name(a.name), normalize_name(b.name)
        if nb and len(nb) < len(na) and na.startswith(nb) and nb not in stop:
            out.add((a.project_id, b.project_id))
    return out


def test_matches_all_pairs_oracle():
    rng = random.Random(1)
    stems = ["bit", "bitcoin", "lite", "litecoin", "doge", "coin", "gold", "cash", "x"]
    for _ in range(50):
        names = sorted({"".join(rng.sample(stems, rng.randint(1, 3))) for _ in range(15)})
        ps = projects(*names)
        stop = {"bit", "coin"}
        assert set(pairs(detect_name_derivations(ps, stop))) == oracle(ps, stop)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.text(alphabet="abAB -", min_size=1, max_size=6), min_size=1, max_size=10, unique_by=normalize_name))
def test_antisymmetric_and_stoplist_respected(names):
    ps = projects(*names)
    edges = set(pairs(detect_name_derivations(ps, {"a"})))
    assert not any((t, s) in edges for s, t in edges)
    by_id = {p.project_id: p for p in ps}
    assert all(normalize_name(by_id[t].name) != "a" for _, t in edges)
