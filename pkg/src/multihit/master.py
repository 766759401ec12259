"""Restricted master problem over a pool of candidate combinations.

The LP maximizes covered tumors minus multiplicity-counted normal coverings:
one row per tumor links its cover flag to the selection variables, one row
per normal sample accumulates coverings into a penalty variable, and a final
budget row caps how many combinations may be picked.  ``solve_binary`` runs
a branch-and-bound over the selection variables only; cover flags and
penalties are forced integral automatically once the selection is binary.
"""

import math
import time

import numpy as np
import scipy.sparse as sp

from . import metrics
from .bitset import bits
from .errors import ConsistencyError, DuplicateColumnError, ValidationError
from .lp import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    LinearProgram,
    solve_lp,
)

INT_TOL = 1e-6


class DualPrices:
    """Row prices of the relaxation: per-tumor, per-normal and budget."""

    def __init__(self, pi, mu, lam):
        self.pi = np.asarray(pi, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.lam = float(lam)


class RmpSolution:
    def __init__(self, objective, x, y, z, duals, basis, iterations):
        self.objective = objective
        self.x = x
        self.y = y
        self.z = z
        self.duals = duals
        self.basis = basis
        self.iterations = iterations


class BinarySolveResult:
    def __init__(self, selection, objective, bound, status, nodes, lp_iterations):
        self.selection = selection
        self.objective = objective
        self.bound = bound
        self.status = status
        self.nodes = nodes
        self.lp_iterations = lp_iterations


class MasterModel:
    """Matrix + duplicate-free column pool + budget, with a cached LP."""

    def __init__(self, matrix, columns, beta):
        if not isinstance(beta, int) or beta < 0:
            raise ValidationError(f"budget must be a nonnegative int, got {beta!r}")
        self.matrix = matrix
        self.beta = beta
        self.columns = []
        self._keys = set()
        self._cached_lp = None
        for c in columns:
            self.add_column(c)

    @property
    def n_rows(self):
        return self.matrix.tumor_count + self.matrix.normal_count + 1

    @property
    def n_vars(self):
        return self.matrix.tumor_count + self.matrix.normal_count + len(self.columns)

    def contains(self, genes):
        return tuple(genes) in self._keys

    def add_column(self, comb):
        """Append a combination; a repeat of an in-pool column is rejected."""
        if comb.genes in self._keys:
            raise DuplicateColumnError(f"column {comb.genes} already in pool")
        m = self.matrix
        for g in comb.genes:
            if not 0 <= g < m.n_genes:
                raise ValidationError(f"column gene index {g} out of range")
        if comb.tumor_cover >> m.tumor_count or comb.normal_cover >> m.normal_count:
            raise ValidationError("column cover does not fit the matrix")
        self.columns.append(comb)
        self._keys.add(comb.genes)
        self._cached_lp = None
        return len(self.columns) - 1

    def build_lp(self):
        """The relaxation LP; cached until the pool changes."""
        if self._cached_lp is not None:
            return self._cached_lp
        m = self.matrix
        nt, nn = m.tumor_count, m.normal_count
        n_z = len(self.columns)
        rows, cols, vals = [], [], []
        for t in range(nt):
            rows.append(t)
            cols.append(t)
            vals.append(1.0)
        for n in range(nn):
            rows.append(nt + n)
            cols.append(nt + n)
            vals.append(-1.0)
        for k, comb in enumerate(self.columns):
            var = nt + nn + k
            for t in bits(comb.tumor_cover):
                rows.append(t)
                cols.append(var)
                vals.append(-1.0)
            for n in bits(comb.normal_cover):
                rows.append(nt + n)
                cols.append(var)
                vals.append(1.0)
            rows.append(nt + nn)
            cols.append(var)
            vals.append(1.0)
        a = sp.coo_matrix(
            (vals, (rows, cols)), shape=(nt + nn + 1, nt + nn + n_z)
        ).tocsc()
        objective = np.concatenate([np.ones(nt), -np.ones(nn), np.zeros(n_z)])
        rhs = np.concatenate([np.zeros(nt + nn), [float(self.beta)]])
        lower = np.zeros(nt + nn + n_z)
        upper = np.concatenate([np.ones(nt), np.full(nn + n_z, np.inf)])
        self._cached_lp = LinearProgram(objective, a, rhs, lower, upper)
        return self._cached_lp

    def node_lp(self, fixed):
        """Relaxation with some selection variables pinned to 0 or 1."""
        base = self.build_lp()
        lower = base.lower.copy()
        upper = base.upper.copy()
        off = self.matrix.tumor_count + self.matrix.normal_count
        for k, v in fixed.items():
            lower[off + k] = float(v)
            upper[off + k] = float(v)
        return LinearProgram(base.objective, base.a_matrix, base.rhs, lower, upper)


def build_master(matrix, columns, beta):
    return MasterModel(matrix, columns, beta)


def solve_relaxation(model, warm_start=None):
    """LP-relax the master and hand back primal values plus clamped duals."""
    sol = solve_lp(model.build_lp(), warm_start=warm_start)
    if sol.status != STATUS_OPTIMAL:
        raise ConsistencyError(
            f"master relaxation ended with status {sol.status}; "
            "this LP is always feasible and bounded"
        )
    nt, nn = model.matrix.tumor_count, model.matrix.normal_count
    duals = DualPrices(
        pi=np.maximum(sol.duals[:nt], 0.0),
        mu=np.maximum(sol.duals[nt : nt + nn], 0.0),
        lam=max(float(sol.duals[nt + nn]), 0.0),
    )
    return RmpSolution(
        objective=sol.objective,
        x=sol.x[:nt].copy(),
        y=sol.x[nt : nt + nn].copy(),
        z=sol.x[nt + nn :].copy(),
        duals=duals,
        basis=sol.basis,
        iterations=sol.iterations,
    )


class _Node:
    __slots__ = ("node_id", "fixed", "bound", "warm")

    def __init__(self, node_id, fixed, bound, warm):
        self.node_id = node_id
        self.fixed = fixed
        self.bound = bound
        self.warm = warm


def _fractionality(value):
    f = value - math.floor(value)
    return min(f, 1.0 - f)


def solve_binary(model, time_limit=30.0, incumbent_callback=None):
    """Best integral selection over the pool by branch-and-bound.

    Node selection is best-bound-first after an initial depth-first dive
    finds the first incumbent; branching picks the most fractional selection
    variable, ties to the lowest column index.  Incumbents are accepted only
    after exact integer re-evaluation of their objective.  On hitting the
    wall-clock limit the best incumbent so far is returned (the empty
    selection if there is none).  ``incumbent_callback``, when given, is
    called with ``(selection, objective)`` each time a better incumbent is
    accepted.
    """
    deadline = time.perf_counter() + time_limit
    incumbent = None
    incumbent_obj = None
    nodes_solved = 0
    lp_iterations = 0
    next_id = 0
    open_nodes = [_Node(next_id, {}, math.inf, None)]
    next_id += 1

    def open_bound():
        best = -math.inf if incumbent_obj is None else float(incumbent_obj)
        for node in open_nodes:
            best = max(best, node.bound)
        return best

    while open_nodes:
        if time.perf_counter() > deadline:
            bound = open_bound()
            sel = sorted(incumbent) if incumbent is not None else []
            obj = incumbent_obj if incumbent_obj is not None else 0
            return BinarySolveResult(
                sel, obj, bound, "time_limit", nodes_solved, lp_iterations
            )
        if incumbent_obj is None:
            node = open_nodes.pop()
        else:
            pick = max(
                range(len(open_nodes)),
                key=lambda i: (open_nodes[i].bound, -open_nodes[i].node_id),
            )
            node = open_nodes.pop(pick)
        if incumbent_obj is not None and math.floor(node.bound + INT_TOL) <= incumbent_obj:
            continue
        if sum(node.fixed.values()) > model.beta:
            continue
        sol = solve_lp(model.node_lp(node.fixed), warm_start=node.warm)
        nodes_solved += 1
        lp_iterations += sol.iterations
        if sol.status == STATUS_INFEASIBLE:
            continue
        if sol.status != STATUS_OPTIMAL:
            raise ConsistencyError(f"node relaxation status {sol.status}")
        bound = sol.objective
        if incumbent_obj is not None and math.floor(bound + INT_TOL) <= incumbent_obj:
            continue
        off = model.matrix.tumor_count + model.matrix.normal_count
        z = sol.x[off:]
        fract = [_fractionality(v) for v in z]
        if all(f <= INT_TOL for f in fract):
            selection = [k for k, v in enumerate(z) if v > 0.5]
            chosen = [model.columns[k] for k in selection]
            exact = metrics.objective_value(chosen, model.matrix)
            if abs(exact - bound) > 1e-4 * (1.0 + abs(bound)):
                raise ConsistencyError(
                    f"integral node value {bound} does not match exact "
                    f"objective {exact}"
                )
            if incumbent_obj is None or exact > incumbent_obj:
                incumbent = selection
                incumbent_obj = exact
                if incumbent_callback is not None:
                    incumbent_callback(list(selection), exact)
                open_nodes = [
                    n
                    for n in open_nodes
                    if math.floor(n.bound + INT_TOL) > incumbent_obj
                ]
            continue
        branch = max(range(len(z)), key=lambda k: (fract[k], -k))
        for value in (0, 1):
            child_fixed = dict(node.fixed)
            child_fixed[branch] = value
            open_nodes.append(_Node(next_id, child_fixed, bound, sol.basis))
            next_id += 1
        # The stack pops the include-child first during the initial dive.

    if incumbent_obj is None:
        # Every node infeasible cannot happen: the all-zero selection is
        # always feasible, so reaching here means the tree was mispruned.
        raise ConsistencyError("branch-and-bound finished without an incumbent")
    return BinarySolveResult(
        sorted(incumbent),
        incumbent_obj,
        float(incumbent_obj),
        "optimal",
        nodes_solved,
        lp_iterations,
    )
