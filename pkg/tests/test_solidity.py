from __future__ import annotations

import logging
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codelineage import kernels
from codelineage.demo import ERC20, SAFEMATH
from codelineage.errors import CycleError
from codelineage.solidity import (
    aggregate_cdf,
    detect_templates,
    extract_contract_graph,
    extract_pragma_versions,
    fingerprint_safemath,
    profile_contract,
    safemath_block,
    strip_comments,
    template_counts,
    transitive_ancestors,
)


# ------------------------------------------------------------------ comments


def test_strip_line_comment():
    assert strip_comments("uint a; // note") == "uint a; "


def test_string_with_comment_markers_kept():
    src = "string u = \"url('/*x*/')\"; /* gone */ uint b; // also gone\n"
    assert strip_comments(src) == "string u = \"url('/*x*/')\";   uint b; \n"


def test_block_comments_do_not_nest():
    assert strip_comments("a /* a /* b */ c */") == "a   c */"


def test_unterminated_block_comment_warns(caplog):
    with caplog.at_level(logging.WARNING):
        assert strip_comments("x;\n/* open\nmore") == "x;\n\n"
    assert "unterminated" in caplog.text


# ------------------------------------------------------------------- pragmas


@pytest.mark.parametrize(
    "src, versions",
    [
        ("pragma solidity ^0.4.18;", ["0.4.18"]),
        ("contract A {}", []),
        ("pragma solidity >=0.4.21 <0.6.0;", ["0.4.21"]),
        ("pragma solidity 0.4.24;\npragma solidity ~0.5.0;\n", ["0.4.24", "0.5.0"]),
        ("  pragma   solidity   >= 0.4.0;", ["0.4.0"]),
        ("pragma experimental ABIEncoderV2;", []),
    ],
)
def test_pragma_versions(src, versions):
    assert extract_pragma_versions(src) == versions


# --------------------------------------------------------------- inheritance


def test_mintable_ownable():
    g = extract_contract_graph("contract Mintable is Ownable { } contract X is Mintable { }")
    assert g.terminal == ("X",)
    assert g.types == {"X": frozenset({"Mintable", "Ownable"})}


def test_lone_contract():
    g = extract_contract_graph("contract T { uint x; }")
    assert g.terminal == ("T",) and g.types == {"T": frozenset()}


def test_diamond():
    g = extract_contract_graph(
        "contract A {}\ncontract B is A {}\ncontract C is A {}\ncontract D is B, C {}"
    )
    assert g.types == {"D": frozenset("ABC")}


def test_multiline_declaration_and_constructor_args():
    src = "contract Crowd\n  is Ownable(msg.sender),\n     Pausable\n{\n}\ninterface IToken {}\nlibrary L {}"
    g = extract_contract_graph(src)
    assert g.declared == {"Crowd": ("Ownable", "Pausable"), "IToken": ()}
    assert set(g.terminal) == {"Crowd", "IToken"}


def test_declarations_inside_strings_ignored():
    g = extract_contract_graph('contract A { string s = "contract Fake is A {"; }')
    assert list(g.declared) == ["A"]


def test_cycle_is_an_error():
    with pytest.raises(CycleError) as err:
        extract_contract_graph("contract A is B {} contract B is A {}")
    assert "A -> B -> A" in str(err.value)
    profile = profile_contract("contract A is A {}", "self")
    assert profile.error and profile.terminal_contracts == ()


def reachable(edges, start):
    seen, stack = set(), list(edges.get(start, ()))
    while stack:
        n = stack.pop()
        if n not in seen:
            seen.add(n)
            stack.extend(edges.get(n, ()))
    return seen


def random_dag(rng, n):
    names = [f"C{i}" for i in range(n)]
    # parents always have a smaller index, so the graph is acyclic
    return {names[i]: tuple(rng.sample(names[:i], rng.randint(0, min(i, 3)))) for i in range(n)}


def test_closure_matches_reachability_on_random_dags():
    rng = random.Random(8)
    for _ in range(100):
        dag = random_dag(rng, rng.randint(1, 15))
        closure = transitive_ancestors(dag)
        for name in dag:
            assert closure[name] == reachable(dag, name)
            assert name not in closure[name]


def test_closure_via_source_text():
    rng = random.Random(21)
    dag = random_dag(rng, 12)
    src = "\n".join(f"contract {n}{' is ' + ', '.join(ps) if ps else ''} {{ }}" for n, ps in dag.items())
    g = extract_contract_graph(src)
    used = {p for ps in dag.values() for p in ps}
    assert set(g.terminal) == set(dag) - used
    for name in g.terminal:
        assert g.types[name] == reachable(dag, name)


# ------------------------------------------------------------------ SafeMath


def test_safemath_fingerprints():
    a = fingerprint_safemath("pragma solidity ^0.4.18;\n" + SAFEMATH + "\ncontract T {}")
    b = fingerprint_safemath(SAFEMATH)
    assert a == b is not None
    longer = SAFEMATH[:-1] + "  function sub(uint a, uint b) internal pure returns (uint) { return a - b; }\n}"
    assert fingerprint_safemath(longer) != a
    reformatted = SAFEMATH.replace("  function", "    function")
    assert fingerprint_safemath(reformatted) != a


def test_safemath_block_balances():
    block = safemath_block("x " + SAFEMATH + " tail")
    depth = 0
    for i, ch in enumerate(block):
        depth += {"{": 1, "}": -1}.get(ch, 0)
        if depth == 0 and "{" in block[: i + 1]:
            assert i == len(block) - 1
            break


def test_unbalanced_safemath(caplog):
    with caplog.at_level(logging.WARNING):
        assert fingerprint_safemath("library SafeMath { function f() {") is None
    assert "unbalanced" in caplog.text


def test_safemath_brace_in_string_does_not_end_block():
    src = 'library SafeMath { string s = "}"; function f() {} }'
    assert safemath_block(src) == src


# ----------------------------------------------------------------- templates


def test_templates():
    assert detect_templates("contract T is StandardToken {}") == {"firstblood"}
    assert detect_templates("contract Plain { function transfer() {} }") == frozenset()
    flags = detect_templates('import "openzeppelin-solidity/contracts/math/SafeMath.sol";\ncontract T { using SafeMath for uint256; }')
    assert flags == {"openzeppelin", "safemath"}
    assert detect_templates("contract G is UpgradeableToken {}") == {"upgradeable_golem"}
    assert detect_templates("contract MyStandardTokenX {}") == frozenset()


def test_safemath_usage_without_body():
    p = profile_contract("contract T { using SafeMath for uint256; }", "t")
    assert "safemath" in p.template_flags and p.safemath_fingerprint is None


def test_profile_of_erc20_fixture():
    p = profile_contract("pragma solidity ^0.4.18;\n" + SAFEMATH + "\n" + ERC20, "erc20")
    assert p.terminal_contracts == ("MintableToken",)
    assert p.types["MintableToken"] == {"StandardToken", "ERC20", "BasicToken", "ERC20Basic", "Ownable"}
    assert p.all_types["BasicToken"] == {"ERC20Basic"}
    assert p.pragma_versions == ("0.4.18",)
    doc = p.to_json()
    assert doc["types"] == {"MintableToken": ["BasicToken", "ERC20", "ERC20Basic", "Ownable", "StandardToken"]}


# ----------------------------------------------------------------------- CDF


def versioned(*versions, origin="deployed"):
    return [profile_contract(f"pragma solidity {v};\ncontract C{i} {{}}", f"c{i}", origin) for i, v in enumerate(versions)]


def test_cdf_single_value():
    cdf = aggregate_cdf(versioned(*["0.4.18"] * 4), "solidity_version")
    assert cdf.cumulative_pct == (100.0,)


def test_cdf_three_to_one():
    cdf = aggregate_cdf(versioned("0.4.18", "0.4.18", "0.4.18", "0.4.11"), "solidity_version")
    assert cdf.ranked_counts == (("0.4.18", 3), ("0.4.11", 1))
    assert cdf.cumulative_pct == (75.0, 100.0)


def test_cdf_ties_break_lexicographically_and_origin_split():
    profiles = versioned("0.4.2", "0.4.1") + versioned("0.5.0", origin="repository")
    deployed = aggregate_cdf(profiles, "solidity_version", "deployed")
    assert [v for v, _ in deployed.ranked_counts] == ["0.4.1", "0.4.2"]
    assert aggregate_cdf(profiles, "solidity_version", "repository").population == 1
    assert aggregate_cdf(profiles, "solidity_version").population == 3
    with pytest.raises(ValueError):
        aggregate_cdf(profiles, "solidity_version", "nowhere")


def test_types_cdf_and_diversity():
    sources = [
        "contract A is Ownable {}",
        "contract B is Ownable, Pausable {}",
        "contract C is Mintable {} contract Mintable is Ownable {}",
        "contract D is Rare {}",
        "contract E {}",
    ]
    profiles = [profile_contract(s, f"k{i}") for i, s in enumerate(sources)]
    cdf = aggregate_cdf(profiles, "types")
    assert cdf.ranked_counts[0] == ("Ownable", 3)
    assert cdf.population == 4  # E has no types
    assert cdf.distinct_values == 4 and cdf.singleton_values == 3
    # singletons tie and rank Mintable, Pausable, Rare; only Rare covers D
    assert [v for v, _ in cdf.ranked_counts] == ["Ownable", "Mintable", "Pausable", "Rare"]
    assert cdf.cumulative_pct == (75.0, 75.0, 75.0, 100.0)
    assert cdf.contracts_with_unique_value == 3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["0.4.11", "0.4.18", "0.4.24", "0.5.0", None]), min_size=1, max_size=30))
def test_cdf_invariants(versions):
    profiles = [
        profile_contract(f"pragma solidity {v};" if v else "contract X {}", f"c{i}") for i, v in enumerate(versions)
    ]
    if not any(versions):
        assert aggregate_cdf(profiles, "solidity_version").cumulative_pct == ()
        return
    cdf = aggregate_cdf(profiles, "solidity_version")
    assert list(cdf.cumulative_pct) == sorted(cdf.cumulative_pct)
    assert cdf.cumulative_pct[-1] == pytest.approx(100.0)
    assert sum(c for _, c in cdf.ranked_counts) == cdf.population == sum(1 for v in versions if v)


def test_template_counts_table():
    profiles = [
        profile_contract("contract A is StandardToken { using SafeMath for uint; }", "a"),
        profile_contract("contract B is StandardToken {}", "b"),
        profile_contract("contract C {}", "c", "repository"),
    ]
    rows = {(t, o): (n, pct) for t, o, n, pct in template_counts(profiles)}
    assert rows[("firstblood", "deployed")] == (2, 100.0)
    assert rows[("safemath", "deployed")] == (1, 50.0)
    assert rows[("firstblood", "repository")] == (0, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet='ab/*"\n ', max_size=60))
def test_strip_is_idempotent(text):
    once = strip_comments(text)
    stripped, unterminated = kernels.strip_comments(text)
    if not unterminated:
        assert strip_comments(once) == once
