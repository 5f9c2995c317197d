"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--scale K]

Each kernel runs on the same synthetic input under every importable
backend; the best of ``--repeat`` timings is reported.
"""
from __future__ import annotations

import argparse
import random
import timeit
from array import array

from codelineage import kernels
from codelineage.demo import ERC20, SAFEMATH


def solidity_text(scale: int) -> str:
    chunk = (
        "// SPDX: none\n/* block\n comment */\n"
        'string constant url = "https://example.org/*not-a-comment*/";\n'
        + SAFEMATH + "\n" + ERC20 + "\n"
    )
    return chunk * scale


def postings(scale: int, seed: int = 1):
    """CSR layout for ``scale * 1000`` keys over 200 targets."""
    rng = random.Random(seed)
    indptr, indices = array("q", [0]), array("q")
    for _ in range(scale * 1000):
        indices.extend(sorted(rng.sample(range(200), rng.randint(1, 4))))
        indptr.append(len(indices))
    n_keys = len(indptr) - 1
    ids = array("q", sorted(rng.sample(range(n_keys), n_keys // 2)))
    counts = array("q", [rng.randint(1, 3) for _ in ids])
    return ids, counts, indptr, indices


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=int, default=200, help="input size multiplier")
    args = ap.parse_args(argv)

    text = solidity_text(args.scale)
    # one outer block so the brace scan walks the whole input
    wrapped = "contract Outer {\n" + text + "}\n"
    brace = wrapped.index("{")
    ids, counts, indptr, indices = postings(args.scale)
    impls = kernels.backends()
    cases = {
        "strip_comments": lambda m: m.strip_comments(text),
        "mask_strings": lambda m: m.mask_strings(text),
        "match_brace": lambda m: m.match_brace(wrapped, brace),
        "accumulate_matches": lambda m: m.accumulate_matches(ids, counts, indptr, indices, array("q", bytes(8 * 200))),
    }
    print(f"input: {len(text):,} characters, {len(indptr) - 1:,} keys; active backend: {kernels.BACKEND}")
    print(f"{'kernel':<20}" + "".join(f"{name:>14}" for name in impls) + (f"{'speedup':>10}" if len(impls) > 1 else ""))
    for label, fn in cases.items():
        best = {
            name: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for name, mod in impls.items()
        }
        row = f"{label:<20}" + "".join(f"{best[n] * 1e3:>12.2f}ms" for n in impls)
        if "cython" in best:
            row += f"{best['python'] / best['cython']:>9.1f}x"
        print(row)
    if "cython" not in impls:
        print("compiled kernels are not built; only the fallback was timed")


if __name__ == "__main__":
    main()
