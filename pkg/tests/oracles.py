"""Independent reference implementations used only by the test suite.

Everything here is deliberately written against the *definitions*, not
against the package internals: dense full-tableau simplex with Bland's rule,
loop-based coverage and reduced costs, Fraction-based metric formulas.  Keep
these free of imports from the solver modules they are checking.
"""

import itertools
import math
from fractions import Fraction

import numpy as np

TOL = 1e-9


# ---------------------------------------------------------------------------
# Dense two-phase tableau simplex (Bland's rule throughout).


def _pivot(t, basis, row, col):
    t[row] = t[row] / t[row, col]
    factors = t[:, col].copy()
    factors[row] = 0.0
    t -= np.outer(factors, t[row])
    basis[row] = col


def _tableau_run(t, basis, costs, banned, tol=TOL):
    n_cols = t.shape[1] - 1
    while True:
        red = costs[:n_cols] - costs[basis] @ t[:, :n_cols]
        entering = None
        for j in range(n_cols):
            if j in banned or j in basis:
                continue
            if red[j] > tol:
                entering = j
                break
        if entering is None:
            return "optimal"
        col = t[:, entering]
        best_row, best_ratio = -1, math.inf
        for i in range(t.shape[0]):
            if col[i] > tol:
                ratio = t[i, n_cols] / col[i]
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12
                    and (best_row < 0 or basis[i] < basis[best_row])
                ):
                    best_row, best_ratio = i, ratio
        if best_row < 0:
            return "unbounded"
        _pivot(t, basis, best_row, entering)


def tableau_solve(c, a, b, lower, upper):
    """Reference LP solve: max c.x, A x <= b, lower <= x <= upper.

    Returns ``(status, objective, x)`` with x in the original variable
    space.  Finite upper bounds become explicit rows; lower bounds are
    shifted away; rows with negative rhs get surplus and artificial columns
    and a phase-one run.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float).reshape(len(b), len(c)) if len(b) else np.zeros((0, len(c)))
    b = np.asarray(b, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        return "infeasible", None, None
    n = len(c)
    rows = [a[i].copy() for i in range(len(b))]
    rhs = list(b - a @ lower)
    for j in range(n):
        span = upper[j] - lower[j]
        if np.isfinite(span):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append(e)
            rhs.append(span)
    m = len(rows)
    # One slack or surplus per row, artificials for negated rows.
    art_rows = [i for i in range(m) if rhs[i] < 0.0]
    n_cols = n + m + len(art_rows)
    t = np.zeros((m, n_cols + 1))
    basis = [0] * m
    art_of = {}
    for k, i in enumerate(art_rows):
        art_of[i] = n + m + k
    for i in range(m):
        row = rows[i].copy()
        val = rhs[i]
        if i in art_of:
            row, val = -row, -val
            t[i, n + i] = -1.0
            t[i, art_of[i]] = 1.0
            basis[i] = art_of[i]
        else:
            t[i, n + i] = 1.0
            basis[i] = n + i
        t[i, :n] = row
        t[i, n_cols] = val
    basis = np.array(basis)
    banned = set()
    if art_rows:
        costs1 = np.zeros(n_cols)
        for i in art_rows:
            costs1[art_of[i]] = -1.0
        if _tableau_run(t, basis, costs1, banned) != "optimal":
            raise AssertionError("phase one cannot fail to terminate")
        infeas = -float(costs1[basis] @ t[:, n_cols])
        if infeas > 1e-7:
            return "infeasible", None, None
        # Remove leftover basic artificials (or redundant rows).
        drop = []
        for i in range(m):
            if basis[i] in art_of.values():
                piv = next(
                    (
                        j
                        for j in range(n + m)
                        if j not in basis and abs(t[i, j]) > 1e-9
                    ),
                    None,
                )
                if piv is None:
                    drop.append(i)
                else:
                    _pivot(t, basis, i, piv)
        if drop:
            keep = [i for i in range(m) if i not in drop]
            t = t[keep]
            basis = basis[keep]
        banned = set(art_of.values())
    costs2 = np.zeros(n_cols)
    costs2[:n] = c
    status = _tableau_run(t, basis, costs2, banned)
    if status != "optimal":
        return status, None, None
    x_shift = np.zeros(n_cols)
    for i, j in enumerate(basis):
        x_shift[j] = t[i, -1]
    x = lower + x_shift[:n]
    return "optimal", float(c @ x), x


# ---------------------------------------------------------------------------
# Coverage, reduced costs and selection objectives, all loop-based.


def covers(row, genes):
    return all((row >> g) & 1 for g in genes)


def coverage_by_loops(matrix, genes):
    """(tumor ids, normal ids) covered, via per-sample gene checks."""
    t_hit, n_hit = [], []
    for pos in matrix.tumor_positions:
        if covers(matrix.samples[pos].mutations, genes):
            t_hit.append(pos)
    for pos in matrix.normal_positions:
        if covers(matrix.samples[pos].mutations, genes):
            n_hit.append(pos)
    return t_hit, n_hit


def all_combinations(matrix, hit_range):
    """Every gene combination in the size range, as sorted index tuples."""
    out = []
    for k in range(hit_range.k_min, hit_range.k_max + 1):
        out.extend(itertools.combinations(range(matrix.n_genes), k))
    return out


def reduced_cost_by_loops(matrix, genes, pi, mu, lam):
    t_hit, n_hit = coverage_by_loops(matrix, genes)
    val = -lam
    tumor_rank = {pos: i for i, pos in enumerate(matrix.tumor_positions)}
    normal_rank = {pos: i for i, pos in enumerate(matrix.normal_positions)}
    for pos in t_hit:
        val += pi[tumor_rank[pos]]
    for pos in n_hit:
        val -= mu[normal_rank[pos]]
    return val


def selection_objective_by_loops(matrix, selections):
    """Integer objective of a list of gene tuples: union tp minus covering count."""
    covered = set()
    penalty = 0
    for genes in selections:
        t_hit, n_hit = coverage_by_loops(matrix, genes)
        covered.update(t_hit)
        penalty += len(n_hit)
    return len(covered) - penalty


def best_selection_by_enumeration(matrix, hit_range, beta):
    """True optimum over all selections of at most beta combinations."""
    combos = all_combinations(matrix, hit_range)
    best_obj, best_sel = 0, ()
    for size in range(1, beta + 1):
        for pick in itertools.combinations(combos, size):
            obj = selection_objective_by_loops(matrix, pick)
            if obj > best_obj:
                best_obj, best_sel = obj, pick
    return best_obj, best_sel


# ---------------------------------------------------------------------------
# Metrics from first principles (Fractions where exactness matters).


def metrics_by_fractions(tp, fp, tn, fn):
    def ratio(num, den):
        return None if den == 0 else float(Fraction(num, den))

    sens = ratio(tp, tp + fn)
    spec = ratio(tn, tn + fp)
    prec = ratio(tp, tp + fp)
    if sens is None or prec is None or prec + sens == 0:
        f1 = None
    else:
        f1 = float(
            2 * Fraction(tp, tp + fp) * Fraction(tp, tp + fn)
            / (Fraction(tp, tp + fp) + Fraction(tp, tp + fn))
        )
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = None if den == 0 else (tp * tn - fp * fn) / math.sqrt(den)
    return {"sensitivity": sens, "specificity": spec, "precision": prec, "f1": f1, "mcc": mcc}
