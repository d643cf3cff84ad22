"""Exact linear algebra over fractions.

Plain Gaussian elimination; matrices are lists of lists of Fraction.
Nothing here is numerically clever, and nothing here rounds.
"""

from fractions import Fraction


def _rref(rows, width):
    """Reduce augmented rows in place to reduced row echelon form.

    Returns the list of pivot column indices (all < width; the last
    column(s) beyond `width` are carried along as the right-hand side).
    """
    pivots = []
    r = 0
    for col in range(width):
        pivot_row = None
        for i in range(r, len(rows)):
            if rows[i][col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = Fraction(1) / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots


def solve(matrix, rhs):
    """Solve the square system matrix * x = rhs; unique solution expected.

    Raises ValueError if the system is singular or inconsistent.
    """
    n = len(matrix)
    rows = [[Fraction(v) for v in row] + [Fraction(rhs[i])]
            for i, row in enumerate(matrix)]
    pivots = _rref(rows, n)
    if len(pivots) != n:
        raise ValueError("singular system")
    solution = [Fraction(0)] * n
    for r, col in enumerate(pivots):
        solution[col] = rows[r][n]
    for row in rows[len(pivots):]:
        if row[n] != 0:
            raise ValueError("inconsistent system")
    return solution


def affine_solution_space(matrix, rhs):
    """Describe all solutions of matrix * x = rhs.

    Returns None if inconsistent, else a pair (particular, basis) so that
    the solution set is { particular + sum_i z_i * basis[i] }.
    """
    if not matrix:
        return [], []
    n = len(matrix[0])
    rows = [[Fraction(v) for v in row] + [Fraction(rhs[i])]
            for i, row in enumerate(matrix)]
    pivots = _rref(rows, n)
    for row in rows[len(pivots):]:
        if row[n] != 0:
            return None
    pivot_set = set(pivots)
    free_cols = [c for c in range(n) if c not in pivot_set]
    particular = [Fraction(0)] * n
    for r, col in enumerate(pivots):
        particular[col] = rows[r][n]
    basis = []
    for free in free_cols:
        vec = [Fraction(0)] * n
        vec[free] = Fraction(1)
        for r, col in enumerate(pivots):
            vec[col] = -rows[r][free]
        basis.append(vec)
    return particular, basis


def solve_classified(matrix, rhs):
    """Solve a possibly non-square system and classify the solution set.

    Returns ("none", None), ("unique", x), or ("many", None).
    """
    if not matrix or not matrix[0]:
        # no variables: consistent iff rhs is all zero
        if any(v != 0 for v in rhs):
            return ("none", None)
        return ("unique", [])
    space = affine_solution_space(matrix, rhs)
    if space is None:
        return ("none", None)
    particular, basis = space
    if basis:
        return ("many", None)
    return ("unique", particular)
