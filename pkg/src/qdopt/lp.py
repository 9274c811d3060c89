"""Exact rational linear programming.

A dense two-phase primal simplex over :class:`fractions.Fraction` with
Bland's smallest-index rule.  Every geometric decision in the package
(membership, disjointness, separation) is reduced to a call to
:func:`solve` or :func:`feasible`.

Problems are stated as::

    maximize    c . x
    subject to  A_eq x  = b_eq
                A_le x <= b_le
                lo_k <= x_k <= hi_k

Bounds default to ``(0, None)`` per variable, as in ``scipy.optimize.linprog``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

Row = tuple[tuple[Fraction, ...], Fraction]
Bound = tuple[Optional[Fraction], Optional[Fraction]]


class LpShapeError(ValueError):
    """Raised when row lengths or bounds do not match ``n_vars``."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _opt_frac(x) -> Optional[Fraction]:
    return None if x is None else _frac(x)


@dataclass(frozen=True)
class LpProblem:
    n_vars: int
    objective: tuple[Fraction, ...]
    eq_rows: tuple[Row, ...] = ()
    le_rows: tuple[Row, ...] = ()
    bounds: Optional[tuple[Bound, ...]] = None

    def __post_init__(self):
        n = self.n_vars
        obj = tuple(_frac(c) for c in self.objective)
        if len(obj) != n:
            raise LpShapeError(f"objective has length {len(obj)}, expected {n}")
        object.__setattr__(self, "objective", obj)
        for name in ("eq_rows", "le_rows"):
            rows = []
            for k, (coeffs, rhs) in enumerate(getattr(self, name)):
                coeffs = tuple(_frac(a) for a in coeffs)
                if len(coeffs) != n:
                    raise LpShapeError(
                        f"{name}[{k}] has length {len(coeffs)}, expected {n}")
                rows.append((coeffs, _frac(rhs)))
            object.__setattr__(self, name, tuple(rows))
        if self.bounds is None:
            bounds = tuple((Fraction(0), None) for _ in range(n))
        else:
            if len(self.bounds) != n:
                raise LpShapeError(
                    f"bounds has length {len(self.bounds)}, expected {n}")
            bounds = tuple((_opt_frac(lo), _opt_frac(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)


@dataclass(frozen=True)
class LpResult:
    status: str
    point: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Row-reduced constraint system ``T x = rhs`` with a basis and an
    objective row of reduced costs (maximization form)."""

    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.cost = None
        self.value = Fraction(0)

    def set_objective(self, c):
        cost = list(c)
        value = Fraction(0)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for j, a in enumerate(row):
                    if a:
                        cost[j] -= cb * a
                value += cb * self.rhs[i]
        self.cost = cost
        self.value = value

    def pivot(self, r, c):
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            row = [a / piv for a in row]
            self.rows[r] = row
            self.rhs[r] /= piv
        rr = self.rhs[r]
        nz = [j for j, a in enumerate(row) if a]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[c]
            if f:
                for j in nz:
                    other[j] -= f * row[j]
                self.rhs[i] -= f * rr
        f = self.cost[c]
        if f:
            for j in nz:
                self.cost[j] -= f * row[j]
            self.value += f * rr
        self.basis[r] = c

    def run(self, allowed=None) -> bool:
        """Maximize; return False if unbounded."""
        ncols = len(self.cost)
        while True:
            enter = None
            for j in range(ncols):
                if self.cost[j] > 0 and (allowed is None or allowed[j]):
                    enter = j
                    break
            if enter is None:
                return True
            leave = None
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[leave])):
                        best = ratio
                        leave = i
            if leave is None:
                return False
            self.pivot(leave, enter)


def solve(p: LpProblem) -> LpResult:
    """Solve ``p`` exactly.

    Returns an :class:`LpResult` whose ``status`` is ``"optimal"``,
    ``"infeasible"`` or ``"unbounded"``.  Optimal points are basic feasible
    solutions of the standard-form reformulation; the result is a
    deterministic function of the input.
    """
    n = p.n_vars
    # Variable substitution into nonnegative standard-form columns.
    # Each original variable maps to (offset, [(col, sign), ...]).
    ncols = 0
    subst = []
    extra_le = []
    for k, (lo, hi) in enumerate(p.bounds):
        if lo is not None and hi is not None and hi < lo:
            return LpResult(INFEASIBLE)
        if lo is not None:
            subst.append((lo, [(ncols, 1)]))
            if hi is not None:
                extra_le.append(({ncols: Fraction(1)}, hi - lo))
            ncols += 1
        elif hi is not None:
            subst.append((hi, [(ncols, -1)]))
            ncols += 1
        else:
            subst.append((Fraction(0), [(ncols, 1), (ncols + 1, -1)]))
            ncols += 2

    def transform(coeffs, rhs):
        out = {}
        for k, a in enumerate(coeffs):
            if not a:
                continue
            off, cols = subst[k]
            rhs -= a * off
            for col, s in cols:
                out[col] = out.get(col, 0) + s * a
        return out, rhs

    eq = [transform(c, b) for c, b in p.eq_rows]
    le = [transform(c, b) for c, b in p.le_rows] + extra_le
    n_slack = len(le)
    n_struct = ncols
    ncols += n_slack

    rows, rhs, basis = [], [], []
    needs_art = []
    for i, (coeffs, b) in enumerate(eq + le):
        row = [Fraction(0)] * ncols
        for col, a in coeffs.items():
            row[col] = Fraction(a)
        slack = None
        if i >= len(eq):
            slack = n_struct + (i - len(eq))
            row[slack] = Fraction(1)
        if b < 0:
            row = [-a for a in row]
            b = -b
            slack = None
        rows.append(row)
        rhs.append(b)
        basis.append(slack)
        needs_art.append(slack is None)

    n_art = sum(needs_art)
    art_start = ncols
    if n_art:
        a = art_start
        for i, row in enumerate(rows):
            row.extend([Fraction(0)] * n_art)
            if needs_art[i]:
                row[a] = Fraction(1)
                basis[i] = a
                a += 1
    total = ncols + n_art
    tab = _Tableau(rows, rhs, basis)

    if n_art:
        phase1 = [Fraction(0)] * ncols + [Fraction(-1)] * n_art
        tab.set_objective(phase1)
        tab.run()
        if tab.value < 0:
            return LpResult(INFEASIBLE)
        # Drive artificial variables out of the basis (all at level zero).
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= art_start:
                row = tab.rows[i]
                col = next((j for j in range(ncols) if row[j]), None)
                if col is None:
                    del tab.rows[i]
                    del tab.rhs[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, col)
            i += 1
        for row in tab.rows:
            del row[ncols:]
        tab.cost = tab.cost[:ncols]
        total = ncols

    c_std = [Fraction(0)] * total
    offset = Fraction(0)
    for k, ck in enumerate(p.objective):
        if not ck:
            continue
        off, cols = subst[k]
        offset += ck * off
        for col, s in cols:
            c_std[col] += s * ck
    tab.set_objective(c_std)
    if not tab.run():
        return LpResult(UNBOUNDED)

    xs = [Fraction(0)] * total
    for i, b in enumerate(tab.basis):
        xs[b] = tab.rhs[i]
    point = []
    for off, cols in subst:
        point.append(off + sum((s * xs[col] for col, s in cols), Fraction(0)))
    value = offset + tab.value
    return LpResult(OPTIMAL, tuple(point), value)


def feasible(eq_rows: Sequence = (), le_rows: Sequence = (),
             bounds: Optional[Sequence] = None,
             n_vars: Optional[int] = None) -> Optional[tuple[Fraction, ...]]:
    """Return a point satisfying every row exactly, or ``None``."""
    if n_vars is None:
        for rows in (eq_rows, le_rows):
            if rows:
                n_vars = len(rows[0][0])
                break
        else:
            n_vars = len(bounds) if bounds is not None else 0
    prob = LpProblem(n_vars, (0,) * n_vars, tuple(eq_rows), tuple(le_rows),
                     None if bounds is None else tuple(bounds))
    res = solve(prob)
    return res.point if res.optimal else None
