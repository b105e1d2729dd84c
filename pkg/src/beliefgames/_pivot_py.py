"""Pure-Python integer pivot kernel.

Fraction-free Gauss-Jordan step shared by every exact LP solve: all tableau
entries are integers with one common positive divisor, and a pivot on (r, c)
maps entry t[i][j] to (t[i][j]*t[r][c] - t[i][c]*t[r][j]) / divisor, which is
an exact integer division (the entries are basis subdeterminants).  The
compiled twin in `_pivot.pyx` implements the same contract.
"""

from __future__ import annotations

BACKEND = "python"


def pivot_step(rows: list[list[int]], r: int, c: int, divisor: int) -> int:
    """In-place pivot on rows[r][c]; returns the new common divisor."""
    prow = rows[r]
    piv = prow[c]
    if piv == 0:
        raise ZeroDivisionError("pivot on a zero entry")
    for i in range(len(rows)):
        if i == r:
            continue
        row = rows[i]
        f = row[c]
        if f == 0:
            if piv == divisor:
                continue
            for j in range(len(row)):
                t = row[j]
                if t:
                    q, rem = divmod(t * piv, divisor)
                    assert rem == 0, "inexact division in integer pivot"
                    row[j] = q
        else:
            for j in range(len(row)):
                q, rem = divmod(row[j] * piv - f * prow[j], divisor)
                assert rem == 0, "inexact division in integer pivot"
                row[j] = q
    return piv
