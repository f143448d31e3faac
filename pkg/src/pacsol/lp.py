"""Exact rational linear programming: two-phase tableau simplex with Bland's rule.

All variables are nonnegative. Constraints are ``coeffs . x  REL  rhs`` with
REL one of ``"<="``, ``">="``, ``"="``. Arithmetic is in Fractions, so the
optimum, the vertex and the dual values are exact, and Bland's
smallest-index rule makes the pivot path (hence the returned vertex)
deterministic and guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import Infeasible, Unbounded
from .rational import as_fraction

RELATIONS = ("<=", ">=", "=")


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    relation: str
    rhs: Fraction

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")
        object.__setattr__(self, "coeffs", tuple(as_fraction(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", as_fraction(self.rhs))


@dataclass(frozen=True)
class LinearProgram:
    variables: int
    constraints: tuple
    objective: tuple
    sense: str = "min"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        cons = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints)
        for c in cons:
            if len(c.coeffs) != self.variables:
                raise ValueError("constraint width does not match the variable count")
        if len(self.objective) != self.variables:
            raise ValueError("objective width does not match the variable count")
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "objective", tuple(as_fraction(c) for c in self.objective))

    def value(self, x: Sequence) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x)), Fraction(0))

    def is_feasible(self, x: Sequence) -> bool:
        if any(v < 0 for v in x):
            return False
        for c in self.constraints:
            lhs = sum((a * v for a, v in zip(c.coeffs, x)), Fraction(0))
            if c.relation == "<=" and lhs > c.rhs:
                return False
            if c.relation == ">=" and lhs < c.rhs:
                return False
            if c.relation == "=" and lhs != c.rhs:
                return False
        return True


@dataclass(frozen=True)
class LPSolution:
    """Optimal vertex, objective, and one dual value per constraint.

    Duals satisfy ``objective == sum(duals[i] * rhs[i])``.
    """

    x: tuple
    objective: Fraction
    duals: tuple
    basis: tuple


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols

    def pivot(self, r: int, j: int) -> None:
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            for k in range(self.ncols):
                if row[k]:
                    row[k] /= piv
            self.rhs[r] /= piv
        nz = [k for k in range(self.ncols) if row[k]]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[j]
            if f:
                for k in nz:
                    other[k] -= f * row[k]
                self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = j

    def reduced_costs(self, cost):
        red = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for k in range(self.ncols):
                    if row[k]:
                        red[k] -= cb * row[k]
        return red

    def optimize(self, cost, allowed) -> None:
        """Minimize ``cost . x`` with Bland's rule; only ``allowed`` columns may enter."""
        red = self.reduced_costs(cost)
        while True:
            basic = set(self.basis)
            entering = next((j for j in range(self.ncols)
                             if allowed[j] and j not in basic and red[j] < 0), None)
            if entering is None:
                return
            leave, best = None, None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[leave])):
                        leave, best = i, ratio
            if leave is None:
                raise Unbounded("objective is unbounded")
            self.pivot(leave, entering)
            # keep the reduced-cost row in step with the tableau
            f = red[entering]
            row = self.rows[leave]
            for k in range(self.ncols):
                if row[k]:
                    red[k] -= f * row[k]


def simplex_solve(lp: LinearProgram) -> LPSolution:
    """Solve ``lp`` exactly. Raises Infeasible or Unbounded."""
    n = lp.variables
    m = len(lp.constraints)
    coeffs, rels, rhs, flipped = [], [], [], []
    for c in lp.constraints:
        a, rel, b = list(c.coeffs), c.relation, c.rhs
        flip = b < 0
        if flip:
            a = [-v for v in a]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        coeffs.append(a)
        rels.append(rel)
        rhs.append(b)
        flipped.append(flip)

    # columns: originals | one slack/surplus per inequality | artificials
    slack_col, art_col = {}, {}
    col = n
    for i, rel in enumerate(rels):
        if rel != "=":
            slack_col[i] = col
            col += 1
    for i, rel in enumerate(rels):
        if rel != "<=":
            art_col[i] = col
            col += 1
    ncols = col
    rows, basis = [], []
    for i in range(m):
        row = coeffs[i] + [Fraction(0)] * (ncols - n)
        if i in slack_col:
            row[slack_col[i]] = Fraction(1) if rels[i] == "<=" else Fraction(-1)
        if i in art_col:
            row[art_col[i]] = Fraction(1)
            basis.append(art_col[i])
        else:
            basis.append(slack_col[i])
        rows.append(row)
    tab = _Tableau(rows, list(rhs), basis, ncols)
    is_art = [False] * ncols
    for c in art_col.values():
        is_art[c] = True

    if art_col:
        phase1 = [Fraction(1) if is_art[j] else Fraction(0) for j in range(ncols)]
        tab.optimize(phase1, [True] * ncols)
        if any(tab.rhs[i] != 0 for i, b in enumerate(tab.basis) if is_art[b]):
            raise Infeasible("no feasible point")
        # drive zero-level artificials out; rows with nothing else to pivot on are redundant
        for i in range(m):
            if is_art[tab.basis[i]]:
                j = next((j for j in range(ncols) if not is_art[j] and tab.rows[i][j] != 0), None)
                if j is not None:
                    tab.pivot(i, j)

    sign = Fraction(1) if lp.sense == "min" else Fraction(-1)
    cost = [sign * c for c in lp.objective] + [Fraction(0)] * (ncols - n)
    tab.optimize(cost, [not a for a in is_art])

    x = [Fraction(0)] * n
    for i, b in enumerate(tab.basis):
        if b < n:
            x[b] = tab.rhs[i]
    objective = lp.value(x)

    # y = c_B B^-1 read off the columns that started as the identity
    duals = []
    for i in range(m):
        unit = art_col.get(i, slack_col.get(i))
        y = sum((cost[b] * tab.rows[r][unit] for r, b in enumerate(tab.basis)), Fraction(0))
        if lp.sense == "max":
            y = -y
        if flipped[i]:
            y = -y
        duals.append(y)
    return LPSolution(tuple(x), objective, tuple(duals), tuple(tab.basis))
