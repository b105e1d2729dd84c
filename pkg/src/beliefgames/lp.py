"""Exact rational linear programming.

A dense two-phase simplex over big integers: the tableau is kept
fraction-free (one shared positive divisor, entries are basis
subdeterminants), so the hot pivot loop is pure integer arithmetic.  Pricing
is Dantzig with a deterministic tie-break, switching permanently to Bland's
rule after a degenerate streak, which guarantees termination.  Every optimal
solve carries exact primal and dual certificates and verifies strong duality
by rational equality before returning.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

from .game import ZERO

if os.environ.get("BELIEFGAMES_PURE_PIVOT"):
    from . import _pivot_py as _kernel
else:
    try:
        from . import _pivot as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _pivot_py as _kernel

pivot_step = _kernel.pivot_step
KERNEL_BACKEND = _kernel.BACKEND

LESS, GREATER, EQUAL = "<=", ">=", "=="

# Consecutive degenerate pivots tolerated before switching to Bland's rule.
_DEGENERATE_STREAK = 40


class LPError(RuntimeError):
    pass


@dataclass
class RationalLP:
    """maximize objective . x subject to rows; x[j] >= 0 unless free[j]."""

    objective: list[Fraction]
    rows: list[tuple[list[Fraction], str, Fraction]] = field(default_factory=list)
    free: list[bool] | None = None

    def add_row(self, coeffs: Sequence[Fraction], sense: str, rhs: Fraction) -> None:
        if sense not in (LESS, GREATER, EQUAL):
            raise LPError(f"unknown sense {sense!r}")
        if len(coeffs) != len(self.objective):
            raise LPError("row length does not match variable count")
        self.rows.append((list(coeffs), sense, rhs))

    @property
    def nvars(self) -> int:
        return len(self.objective)

    def dump(self) -> str:
        """Text LP dump (diagnostic only, CPLEX-style)."""
        def term(c, j):
            return f"{'+' if c >= 0 else '-'} {abs(c)} x{j}"

        lines = ["Maximize", " obj: " + " ".join(term(c, j) for j, c in enumerate(self.objective))]
        lines.append("Subject To")
        for idx, (coeffs, sense, rhs) in enumerate(self.rows):
            body = " ".join(term(c, j) for j, c in enumerate(coeffs) if c != 0) or "+ 0 x0"
            lines.append(f" r{idx}: {body} {'=' if sense == EQUAL else sense} {rhs}")
        lines.append("Bounds")
        for j in range(self.nvars):
            if self.free and self.free[j]:
                lines.append(f" x{j} free")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LPSolution:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: list[Fraction] | None = None
    duals: list[Fraction] | None = None   # per original row
    # Farkas certificate for infeasible problems: y with y.A <= 0 on
    # sign-constrained columns (== 0 on free columns) and y.b > 0.
    farkas: list[Fraction] | None = None
    pivots: int = 0


def _integerize(coeffs: Sequence[Fraction], rhs: Fraction) -> tuple[list[int], int, int]:
    scale = lcm(*(f.denominator for f in coeffs), rhs.denominator)
    return [int(f * scale) for f in coeffs], int(rhs * scale), scale


class _Tableau:
    """Fraction-free simplex tableau; rows[0] is the active objective row.

    Invariant: the rational tableau equals `rows / divisor` with divisor > 0,
    so sign tests and ratio comparisons reduce to integer arithmetic.
    """

    def __init__(self, rows: list[list[int]], basis: list[int], ncols: int):
        self.rows = rows            # objective row + constraint rows
        self.basis = basis          # basis[i] = column of the basic var of constraint row i
        self.ncols = ncols          # includes the trailing RHS column
        self.divisor = 1
        self.blocked = [False] * (ncols - 1)
        self.pivots = 0
        self._bland = False
        self._streak = 0

    def rational(self, i: int, j: int) -> Fraction:
        return Fraction(self.rows[i][j], self.divisor)

    def _normalize_sign(self) -> None:
        # Regular simplex pivots keep the divisor positive; the artificial
        # drive-out step may pivot on a negative entry, so restore the
        # invariant that integer signs equal rational signs.
        if self.divisor < 0:
            self.divisor = -self.divisor
            for row in self.rows:
                for j in range(len(row)):
                    row[j] = -row[j]

    def _entering(self) -> int | None:
        obj = self.rows[0]
        if self._bland:
            for j in range(self.ncols - 1):
                if not self.blocked[j] and obj[j] > 0:
                    return j
            return None
        best, best_j = 0, None
        for j in range(self.ncols - 1):
            if not self.blocked[j] and obj[j] > best:
                best, best_j = obj[j], j
        return best_j

    def _leaving(self, col: int) -> int | None:
        rhs = self.ncols - 1
        best_i = None
        best_num = best_den = 0
        for i in range(1, len(self.rows)):
            a = self.rows[i][col]
            if a <= 0:
                continue
            b = self.rows[i][rhs]
            if best_i is None or b * best_den < best_num * a or (
                b * best_den == best_num * a and self.basis[i - 1] < self.basis[best_i - 1]
            ):
                best_i, best_num, best_den = i, b, a
        return best_i

    def run(self, max_pivots: int = 2_000_000) -> str:
        rhs = self.ncols - 1
        while True:
            col = self._entering()
            if col is None:
                return "optimal"
            row = self._leaving(col)
            if row is None:
                return "unbounded"
            before = (self.rows[0][rhs], self.divisor)
            self.divisor = pivot_step(self.rows, row, col, self.divisor)
            self._normalize_sign()
            self.basis[row - 1] = col
            self.pivots += 1
            if self.pivots > max_pivots:
                raise LPError("pivot budget exceeded")
            after = (self.rows[0][rhs], self.divisor)
            if before[0] * after[1] == after[0] * before[1]:
                self._streak += 1
                if self._streak >= _DEGENERATE_STREAK:
                    self._bland = True
            else:
                self._streak = 0


def solve_lp(lp: RationalLP) -> LPSolution:
    """Exact two-phase simplex with verified certificates."""
    nvars = lp.nvars
    free = lp.free or [False] * nvars
    if len(free) != nvars:
        raise LPError("free-variable mask length mismatch")

    obj_scale = lcm(1, *(c.denominator for c in lp.objective)) if lp.objective else 1
    int_cost = [int(c * obj_scale) for c in lp.objective]

    # Column layout: one column per sign-constrained var, two (plus/minus)
    # per free var, then slack/surplus columns, then artificials, then RHS.
    col_of_var: list[tuple[int, int | None]] = []
    ncols = 0
    for j in range(nvars):
        if free[j]:
            col_of_var.append((ncols, ncols + 1))
            ncols += 2
        else:
            col_of_var.append((ncols, None))
            ncols += 1
    nstruct = ncols

    int_rows: list[tuple[list[int], str, int]] = []
    row_scale: list[int] = []
    for coeffs, sense, rhs in lp.rows:
        icoeffs, irhs, scale = _integerize(coeffs, rhs)
        int_rows.append((icoeffs, sense, irhs))
        row_scale.append(scale)

    slack_col: list[int | None] = []
    for _, sense, _ in int_rows:
        if sense in (LESS, GREATER):
            slack_col.append(ncols)
            ncols += 1
        else:
            slack_col.append(None)

    # Expand each row to the structural+slack columns and orient rhs >= 0.
    expanded: list[list[int]] = []
    flips: list[int] = []
    basis_ready: list[bool] = []
    for ridx, (icoeffs, sense, irhs) in enumerate(int_rows):
        row = [0] * ncols
        for j, a in enumerate(icoeffs):
            if a == 0:
                continue
            pos, neg = col_of_var[j]
            row[pos] = a
            if neg is not None:
                row[neg] = -a
        sc = slack_col[ridx]
        if sc is not None:
            row[sc] = 1 if sense == LESS else -1
        flip = 1
        if irhs < 0:
            flip = -1
            row = [-a for a in row]
            irhs = -irhs
        flips.append(flip)
        expanded.append(row + [irhs])
        basis_ready.append(sc is not None and row[sc] == 1)

    # Artificial columns for rows without a ready identity column.
    art_col: list[int | None] = []
    for ridx, ready in enumerate(basis_ready):
        if ready:
            art_col.append(None)
        else:
            art_col.append(ncols)
            ncols += 1
    nrows = len(expanded)
    tab_rows: list[list[int]] = []
    basis: list[int] = []
    for ridx, row in enumerate(expanded):
        full = row[:-1] + [0] * (ncols - (len(row) - 1)) + [row[-1]]
        ac = art_col[ridx]
        if ac is not None:
            full[ac] = 1
            basis.append(ac)
        else:
            basis.append(slack_col[ridx])  # type: ignore[arg-type]
        tab_rows.append(full)

    # identity column that started as the basis of each row (for duals)
    ident_col = [art_col[r] if art_col[r] is not None else slack_col[r] for r in range(nrows)]

    has_artificials = any(a is not None for a in art_col)

    # --- Phase 1: maximize -(sum of artificials). ---
    phase1_obj = [0] * (ncols + 1)
    if has_artificials:
        for ridx, ac in enumerate(art_col):
            if ac is not None:
                # price out the basic artificial (cost -1)
                for j in range(ncols + 1):
                    phase1_obj[j] += tab_rows[ridx][j]
        for ridx, ac in enumerate(art_col):
            if ac is not None:
                phase1_obj[ac] = 0

    tableau = _Tableau([phase1_obj] + tab_rows, basis, ncols + 1)
    farkas = None
    if has_artificials:
        status = tableau.run()
        if status != "optimal":
            raise LPError("phase 1 cannot be unbounded")
        if tableau.rows[0][-1] != 0:
            # infeasible; phase-1 duals give a Farkas certificate (the
            # identity column of an artificial row carries phase-1 cost -1)
            ident_cost = [Fraction(-1) if art_col[r] is not None else ZERO for r in range(nrows)]
            farkas = _extract_duals(tableau, ident_col, flips, row_scale, Fraction(1), ident_cost)
            sol = LPSolution(status="infeasible", farkas=farkas, pivots=tableau.pivots)
            _verify_farkas(lp, free, sol)
            return sol
        _drive_out_artificials(tableau, art_col)
    for ac in art_col:
        if ac is not None:
            tableau.blocked[ac] = True

    # --- Phase 2: original objective, priced out over the current basis. ---
    obj2 = [0] * (ncols + 1)
    for j in range(nvars):
        pos, neg = col_of_var[j]
        obj2[pos] += int_cost[j] * tableau.divisor
        if neg is not None:
            obj2[neg] -= int_cost[j] * tableau.divisor
    for ridx in range(nrows):
        cb = _basis_cost(tableau.basis[ridx], col_of_var, int_cost, nstruct)
        if cb:
            row = tableau.rows[ridx + 1]
            for j in range(ncols + 1):
                obj2[j] -= cb * row[j]
    tableau.rows[0] = obj2

    status = tableau.run()
    if status == "unbounded":
        return LPSolution(status="unbounded", pivots=tableau.pivots)

    # primal solution
    xcols = [ZERO] * ncols
    for ridx in range(nrows):
        xcols[tableau.basis[ridx]] = tableau.rational(ridx + 1, ncols)
    x = []
    for j in range(nvars):
        pos, neg = col_of_var[j]
        x.append(xcols[pos] - (xcols[neg] if neg is not None else ZERO))
    value = sum((c * xj for c, xj in zip(lp.objective, x)), ZERO)

    duals = _extract_duals(tableau, ident_col, flips, row_scale, Fraction(obj_scale), [ZERO] * nrows)
    sol = LPSolution(status="optimal", value=value, x=x, duals=duals, pivots=tableau.pivots)
    _verify_optimal(lp, free, sol)
    return sol


def _basis_cost(col: int, col_of_var, int_cost, nstruct: int) -> int:
    if col >= nstruct:
        return 0
    for j, (pos, neg) in enumerate(col_of_var):
        if col == pos:
            return int_cost[j]
        if neg is not None and col == neg:
            return -int_cost[j]
    return 0


def _drive_out_artificials(tableau: _Tableau, art_col: list[int | None]) -> None:
    art_set = {a for a in art_col if a is not None}
    for ridx in range(len(tableau.basis)):
        if tableau.basis[ridx] not in art_set:
            continue
        row = tableau.rows[ridx + 1]
        # basic artificial sits at value 0; any nonzero non-artificial entry
        # can take its place, otherwise the row is redundant
        for j in range(tableau.ncols - 1):
            if j in art_set or tableau.blocked[j]:
                continue
            if row[j] != 0:
                tableau.divisor = pivot_step(tableau.rows, ridx + 1, j, tableau.divisor)
                tableau._normalize_sign()
                tableau.basis[ridx] = j
                tableau.pivots += 1
                break


def _extract_duals(tableau: _Tableau, ident_col, flips, row_scale, obj_scale: Fraction, ident_cost) -> list[Fraction]:
    # Reduced cost of row r's initial identity column is cost - y_r, so
    # y_r = cost - zbar[column].  The tableau row is the user's row times
    # row_scale (and possibly a sign flip), so the user-facing dual scales
    # back up by row_scale and flips with the row.
    duals = []
    for ridx, col in enumerate(ident_col):
        y = (ident_cost[ridx] - tableau.rational(0, col)) / obj_scale
        duals.append(y * flips[ridx] * row_scale[ridx])
    return duals


def _verify_optimal(lp: RationalLP, free: list[bool], sol: LPSolution) -> None:
    """Exact primal/dual feasibility and strong duality; raises on any gap."""
    x, y = sol.x, sol.duals
    assert x is not None and y is not None
    for j, xj in enumerate(x):
        if not free[j] and xj < 0:
            raise LPError(f"primal negativity at x{j}")
    ydotb = ZERO
    for (coeffs, sense, rhs), yi in zip(lp.rows, y):
        lhs = sum((c * xj for c, xj in zip(coeffs, x)), ZERO)
        if sense == LESS and lhs > rhs:
            raise LPError("primal row violation (<=)")
        if sense == GREATER and lhs < rhs:
            raise LPError("primal row violation (>=)")
        if sense == EQUAL and lhs != rhs:
            raise LPError("primal row violation (==)")
        if sense == LESS and yi < 0:
            raise LPError("dual sign violation on <= row")
        if sense == GREATER and yi > 0:
            raise LPError("dual sign violation on >= row")
        ydotb += yi * rhs
    for j in range(lp.nvars):
        red = lp.objective[j] - sum((lp.rows[r][0][j] * y[r] for r in range(len(lp.rows))), ZERO)
        if free[j]:
            if red != 0:
                raise LPError(f"dual equality violation on free column {j}")
        elif red > 0:
            raise LPError(f"dual feasibility violation on column {j}")
    if sol.value != ydotb:
        raise LPError(f"strong duality gap: primal {sol.value} vs dual {ydotb}")


def _verify_farkas(lp: RationalLP, free: list[bool], sol: LPSolution) -> None:
    y = sol.farkas
    assert y is not None
    ydotb = ZERO
    for (coeffs, sense, rhs), yi in zip(lp.rows, y):
        if sense == LESS and yi < 0:
            raise LPError("Farkas sign violation on <= row")
        if sense == GREATER and yi > 0:
            raise LPError("Farkas sign violation on >= row")
        ydotb += yi * rhs
    for j in range(lp.nvars):
        col = sum((lp.rows[r][0][j] * y[r] for r in range(len(lp.rows))), ZERO)
        if free[j]:
            if col != 0:
                raise LPError("Farkas free-column violation")
        elif col < 0:
            raise LPError("Farkas column sign violation")
    if ydotb >= 0:
        raise LPError("Farkas certificate does not separate")
