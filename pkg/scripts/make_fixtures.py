"""Regenerate the SDPA fixtures under tests/fixtures.

Well-formed instances go in ``tests/fixtures``; the malformed corpus goes in
``tests/fixtures/malformed`` together with ``expected.json`` mapping each file
to the error fragment and line number the parser must report.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from lazysdp.instances import diagonal_lp, max_cut, random_instance, scalar_toy, trace_toy
from lazysdp.sdpa import write_sdpa

HAND_WRITTEN = {
    "minimal.dat-s": "1\n1\n1\n1.0\n1 1 1 1 1.0\n",
    "upper_only.dat-s": (
        '" 2x2 block, off-diagonal entries given once\n'
        "2\n1\n2\n1.0 0.5\n"
        "0 1 1 2 1.0\n"
        "1 1 1 1 1.0\n1 1 2 2 1.0\n"
        "2 1 1 2 0.5\n"
    ),
    "example_n2m2.dat-s": (
        "* n = 2, m = 2 example with SDPA-style punctuation\n"
        "2 =mdim\n1 =nblocks\n{2}\n{1.0, 0.25}\n"
        "0 1 1 1 -1.0\n0 1 2 2 -2.0\n0 1 1 2 0.5\n"
        "1 1 1 1 1.0\n1 1 2 2 1.0\n"
        "2 1 1 2 0.5\n"
    ),
}

# name -> (text, error fragment, line)
MALFORMED = {
    "empty.dat-s": ("", "missing constraint count", 1),
    "bad_m.dat-s": ("two\n1\n2\n1.0 1.0\n", "constraint count", 1),
    "two_blocks.dat-s": ("1\n2\n2 2\n1.0\n", "exactly one block", 2),
    "lp_block.dat-s": ("1\n1\n-3\n1.0\n", "block size must be positive", 3),
    "short_b.dat-s": ("3\n1\n2\n1.0 2.0\n", "expected 3 values of b", 4),
    "missing_b.dat-s": ("2\n1\n2\n", "missing objective vector b", 3),
    "row_out_of_range.dat-s": ("1\n1\n2\n1.0\n1 1 3 1 1.0\n", "out of range 1..2", 5),
    "matno_out_of_range.dat-s": ("1\n1\n2\n1.0\n2 1 1 1 1.0\n", "matrix number 2 out of range", 5),
    "block_out_of_range.dat-s": ("1\n1\n2\n1.0\n1 2 1 1 1.0\n", "block number 2 out of range", 5),
    "duplicate.dat-s": ("1\n1\n2\n1.0\n1 1 1 2 1.0\n1 1 2 1 3.0\n", "duplicate entry", 6),
    "short_entry.dat-s": ("1\n1\n2\n1.0\n1 1 1 1\n", "needs 5 fields", 5),
    "nan_value.dat-s": ("1\n1\n2\n1.0\n1 1 1 1 nan\n", "non-finite", 5),
    "fractional_index.dat-s": ("1\n1\n2\n1.0\n1 1 1.5 1 1.0\n", "row index", 5),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "fixtures"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    (out / "malformed").mkdir(parents=True, exist_ok=True)

    for name, text in HAND_WRITTEN.items():
        (out / name).write_text(text)
    write_sdpa(trace_toy(), out / "trace_toy.dat-s")
    write_sdpa(diagonal_lp(), out / "diagonal_lp.dat-s")
    write_sdpa(scalar_toy(), out / "scalar_toy.dat-s")
    write_sdpa(max_cut(5, seed=3)[0], out / "maxcut_5.dat-s")
    write_sdpa(random_instance(4, 6, seed=11)[0], out / "random_4_6.dat-s")

    expected = {}
    for name, (text, fragment, line) in MALFORMED.items():
        (out / "malformed" / name).write_text(text)
        expected[name] = {"fragment": fragment, "line": line}
    (out / "malformed" / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")
    print(f"wrote fixtures to {out}")


if __name__ == "__main__":
    main()
