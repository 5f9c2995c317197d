"""Pure-Python implementations of the hot kernels.

These mirror ``_speedups.pyx`` exactly and are used whenever the compiled
module is unavailable (or ``CODELINEAGE_PURE=1`` is set).
"""
from __future__ import annotations

import re

_INTERESTING = re.compile(r"[\"'/]")
_QUOTE_OR_BRACE = re.compile(r"[\"'{}]")
_QUOTE = re.compile(r"[\"']")
_BLANK = re.compile(r"[^\n]")


def _string_end(text: str, start: int) -> int:
    """Index just past the string literal opened at ``start``.

    Unterminated literals stop before the newline that ends their line.
    """
    return _scan_string(text, start)[0]


def _scan_string(text: str, start: int) -> tuple[int, bool]:
    quote = text[start]
    n = len(text)
    j = start + 1
    while j < n:
        ch = text[j]
        if ch == "\\":
            j += 2
            continue
        if ch == quote:
            return j + 1, True
        if ch == "\n":
            return j, False
        j += 1
    return n, False


def strip_comments(text: str) -> tuple[str, bool]:
    out: list[str] = []
    n = len(text)
    i = 0
    unterminated = False
    while i < n:
        m = _INTERESTING.search(text, i)
        if m is None:
            out.append(text[i:])
            break
        j = m.start()
        out.append(text[i:j])
        ch = text[j]
        if ch != "/":
            end = _string_end(text, j)
            out.append(text[j:end])
            i = end
            continue
        nxt = text[j + 1] if j + 1 < n else ""
        if nxt == "/":
            nl = text.find("\n", j)
            i = n if nl < 0 else nl
        elif nxt == "*":
            close = text.find("*/", j + 2)
            if close < 0:
                unterminated = True
                out.append("\n" * text.count("\n", j))
                i = n
            else:
                lines = text.count("\n", j, close)
                out.append("\n" * lines if lines else " ")
                i = close + 2
        else:
            out.append("/")
            i = j + 1
    return "".join(out), unterminated


def mask_strings(text: str) -> str:
    out: list[str] = []
    n = len(text)
    i = 0
    while i < n:
        m = _QUOTE.search(text, i)
        if m is None:
            out.append(text[i:])
            break
        j = m.start()
        out.append(text[i:j + 1])
        end, closed = _scan_string(text, j)
        body_end = min(end - 1 if closed else end, n)
        out.append(_BLANK.sub(" ", text[j + 1:body_end]))
        if closed:
            out.append(text[end - 1])
        i = end
    return "".join(out)


def match_brace(text: str, open_index: int) -> int:
    depth = 0
    i = open_index
    n = len(text)
    while i < n:
        m = _QUOTE_OR_BRACE.search(text, i)
        if m is None:
            return -1
        j = m.start()
        ch = text[j]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return j
            if depth < 0:
                return -1
        else:
            i = _string_end(text, j)
            continue
        i = j + 1
    return -1


def accumulate_matches(src_ids, src_counts, indptr, indices, out) -> None:
    for k in range(len(src_ids)):
        h = src_ids[k]
        c = src_counts[k]
        for p in range(indptr[h], indptr[h + 1]):
            out[indices[p]] += c
