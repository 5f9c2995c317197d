from __future__ import annotations

import os
import re
from array import array

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codelineage import _purepy, kernels

SOLIDITY_ALPHABET = st.text(alphabet='ab{}()/*"\'\\\n ;', max_size=80)


def test_backend_is_reported():
    assert kernels.BACKEND in kernels.backends()


def test_cython_backend_built():
    # the editable install compiles the extension; the fallback still works without it
    if "cython" not in kernels.backends():
        pytest.skip("compiled kernels not built")
    if os.environ.get("CODELINEAGE_PURE"):
        pytest.skip("pure-Python fallback forced")
    assert kernels.BACKEND == "cython"


@pytest.mark.parametrize(
    "text, expected, unterminated",
    [
        ("a // note\nb", "a \nb", False),
        ("a /* x */ b", "a   b", False),
        ("a /* x\ny */ b", "a \n b", False),
        ('s = "// not a comment";', 's = "// not a comment";', False),
        ("x = '/* kept */';", "x = '/* kept */';", False),
        ("a /* open\nforever", "a \n", True),
        ('"esc \\" // still string" // gone', '"esc \\" // still string" ', False),
    ],
)
def test_strip_comments_cases(backend, text, expected, unterminated):
    assert backend.strip_comments(text) == (expected, unterminated)


def test_mask_strings_keeps_length_and_lines(backend):
    text = 'import "a/b.sol";\nstring s = \'contract X {\';\n'
    masked = backend.mask_strings(text)
    assert len(masked) == len(text)
    assert masked.count("\n") == text.count("\n")
    assert "contract X" not in masked
    assert masked.startswith('import "')


def test_match_brace(backend):
    text = 'f { a { "}" } b } tail'
    assert backend.match_brace(text, 2) == text.index("} tail")
    assert backend.match_brace("{ {", 0) == -1


def test_accumulate_matches(backend):
    # key 0 -> targets {0, 2}; key 1 -> target {1}
    indptr = array("q", [0, 2, 3])
    indices = array("q", [0, 2, 1])
    out = array("q", [0, 0, 0])
    backend.accumulate_matches(array("q", [0, 1]), array("q", [3, 2]), indptr, indices, out)
    assert list(out) == [3, 2, 3]


@settings(max_examples=300, deadline=None)
@given(SOLIDITY_ALPHABET)
def test_backends_agree(text):
    impls = list(kernels.backends().values())
    ref = impls[0]
    for other in impls[1:]:
        assert other.strip_comments(text) == ref.strip_comments(text)
        assert other.mask_strings(text) == ref.mask_strings(text)
        for i, ch in enumerate(text):
            if ch == "{":
                assert other.match_brace(text, i) == ref.match_brace(text, i)


@settings(max_examples=300, deadline=None)
@given(SOLIDITY_ALPHABET)
def test_strip_preserves_lines_and_is_idempotent(text):
    stripped, unterminated = _purepy.strip_comments(text)
    assert stripped.count("\n") == text.count("\n")
    if not unterminated:
        assert _purepy.strip_comments(stripped)[0] == stripped


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="ab{}", max_size=60))
def test_brace_match_balances(text):
    # without strings or comments, the match is the first point where depth returns to zero
    for i, ch in enumerate(text):
        if ch != "{":
            continue
        close = _purepy.match_brace(text, i)
        depth, oracle = 0, -1
        for j in range(i, len(text)):
            depth += {"{": 1, "}": -1}.get(text[j], 0)
            if depth == 0:
                oracle = j
                break
        assert close == oracle


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(0, 5), max_size=6), min_size=1, max_size=8), st.lists(st.integers(0, 20), max_size=20))
def test_accumulate_matches_against_counting(postings, source):
    indptr, indices = array("q", [0]), array("q")
    for plist in postings:
        indices.extend(sorted(set(plist)))
        indptr.append(len(indices))
    ids = sorted({k for k in source if k < len(postings)})
    cnts = [source.count(k) for k in ids]
    expected = [0] * 6
    for k, c in zip(ids, cnts):
        for t in set(postings[k]):
            expected[t] += c
    for impl in kernels.backends().values():
        out = array("q", [0] * 6)
        impl.accumulate_matches(array("q", ids), array("q", cnts), indptr, indices, out)
        assert list(out) == expected


def test_no_regex_backtracking_on_long_input(backend):
    text = "/*" + "a" * 200_000
    stripped, unterminated = backend.strip_comments(text)
    assert unterminated and re.fullmatch(r"\s*", stripped)
