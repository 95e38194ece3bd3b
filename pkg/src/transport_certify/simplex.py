"""Small exact-rational linear programming via two-phase simplex.

Solves min c.x subject to A x = b, x >= 0 with Fraction arithmetic and
Bland's anti-cycling rule.  Intended for the small coupling and cover
programs in this package, not as a general-purpose solver.
"""

from __future__ import annotations

from fractions import Fraction


class LinearProgramError(ValueError):
    pass


def _pivot(tableau, basis, row, col):
    pivot_value = tableau[row][col]
    tableau[row] = [entry / pivot_value for entry in tableau[row]]
    for r, current in enumerate(tableau):
        if r != row and current[col] != 0:
            factor = current[col]
            pivot_row = tableau[row]
            tableau[r] = [a - factor * b for a, b in zip(current, pivot_row)]
    basis[row] = col


def _run_simplex(tableau, basis, n_vars):
    """Optimize the tableau in place; objective reduced costs sit in the
    last row, the rhs in the last column."""
    m = len(tableau) - 1
    while True:
        objective = tableau[m]
        col = next(
            (j for j in range(n_vars) if objective[j] < 0),
            None,
        )
        if col is None:
            return
        best_row = None
        best_ratio = None
        for r in range(m):
            coeff = tableau[r][col]
            if coeff > 0:
                ratio = tableau[r][-1] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = r
        if best_row is None:
            raise LinearProgramError("objective unbounded below")
        _pivot(tableau, basis, best_row, col)


def solve_lp(costs, rows, rhs):
    """Minimize costs.x with equality rows and x >= 0; exact rationals.

    rows is a list of coefficient lists, rhs the matching right-hand sides.
    Returns (value, solution list).  Raises LinearProgramError when the
    program is infeasible or unbounded.
    """
    costs = [Fraction(c) for c in costs]
    n = len(costs)
    m = len(rows)
    matrix = []
    b = []
    for row, beta in zip(rows, rhs):
        row = [Fraction(v) for v in row]
        beta = Fraction(beta)
        if beta < 0:
            row = [-v for v in row]
            beta = -beta
        matrix.append(row)
        b.append(beta)

    # Phase 1: artificial variable per row, minimize their sum.
    width = n + m + 1
    tableau = []
    for r in range(m):
        line = matrix[r] + [Fraction(0)] * m + [b[r]]
        line[n + r] = Fraction(1)
        tableau.append(line)
    objective = [Fraction(0)] * width
    for r in range(m):
        for j in range(width):
            objective[j] -= tableau[r][j]
        objective[n + r] += Fraction(1)
    tableau.append(objective)
    basis = [n + r for r in range(m)]
    _run_simplex(tableau, basis, n + m)
    if tableau[m][-1] < 0:
        raise LinearProgramError("infeasible program")

    # Drive leftover artificials out of the basis or drop redundant rows.
    keep = []
    for r in range(m):
        if basis[r] < n:
            keep.append(r)
            continue
        col = next(
            (j for j in range(n) if tableau[r][j] != 0),
            None,
        )
        if col is not None:
            _pivot(tableau, basis, r, col)
            keep.append(r)
    tableau = [
        [tableau[r][j] for j in range(n)] + [tableau[r][-1]]
        for r in keep
    ]
    basis = [basis[r] for r in keep]

    # Phase 2 objective expressed over the current basis.
    objective = list(costs) + [Fraction(0)]
    for r, var in enumerate(basis):
        factor = objective[var]
        if factor != 0:
            objective = [
                a - factor * bval for a, bval in zip(objective, tableau[r])
            ]
    tableau.append(objective)
    _run_simplex(tableau, basis, n)
    solution = [Fraction(0)] * n
    for r, var in enumerate(basis):
        solution[var] = tableau[r][-1]
    value = sum(c * x for c, x in zip(costs, solution))
    return value, solution
