"""Code-rate table: measured rates against closed-form redundancy curves."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .codebook import code_rate

# constant term c in log2(n) + log2(log2(n)) + c redundancy bits
REFERENCE_CONSTANTS = {
    "c1": 1.0,
    "clog3": math.log2(3),
    "c2": 2.0,
    "c7": 7.0,
}

# best-of-ten DEGS cardinalities reported for n = 7..11
PAPER_MAX_SIZES = {7: 275, 8: 900, 9: 3011, 10: 10414, 11: 36368}


def reference_redundancy(n: int, c: float) -> float:
    return math.log2(n) + math.log2(math.log2(n)) + c


def reference_rate(n: int, c: float, bits_per_symbol: int = 2) -> float:
    """4-ary rate ``1 - R / (2n)`` for redundancy ``R`` in bits."""
    return 1.0 - reference_redundancy(n, c) / (bits_per_symbol * n)


@dataclass
class RateTableRow:
    n: int
    size: int
    rate: float
    refs: dict[str, float]
    source: str = ""

    @property
    def gap_log3(self) -> float:
        return self.rate - self.refs["clog3"]


def rate_row(n: int, size: int, source: str = "") -> RateTableRow:
    return RateTableRow(
        n,
        size,
        code_rate(size, n),
        {k: reference_rate(n, c) for k, c in REFERENCE_CONSTANTS.items()},
        source,
    )


def rate_table(sizes: dict[int, int], source: str = "") -> list[RateTableRow]:
    return [rate_row(n, sizes[n], source) for n in sorted(sizes)]


def rows_to_csv(rows: list[RateTableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(REFERENCE_CONSTANTS)
    w.writerow(["n", "size", "rate", *(f"ref_{k}" for k in keys), "gap_clog3", "source"])
    for r in rows:
        w.writerow(
            [r.n, r.size, f"{r.rate:.6f}", *(f"{r.refs[k]:.6f}" for k in keys), f"{r.gap_log3:+.6f}", r.source]
        )
    return buf.getvalue()
