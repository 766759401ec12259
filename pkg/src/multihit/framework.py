"""End-to-end solvers: column generation, pool heuristic and brute force.

``solve_colgen`` starts from an empty pool and lets pricing build it; the
bound it reports is trusted only when pricing proves that no combination
with positive reduced cost remains, so a timed-out run carries no bound.
``solve_mip_heuristic`` skips pricing and optimizes over a randomly
generated pool.  Both finish with a branch-and-bound over the final pool
and report the best integral selection seen anywhere along the way.
``solve_exact`` enumerates selections outright and is capped to small
instances; it exists to certify the other two, not to compete with them.
"""

import itertools
import math
import time
from dataclasses import dataclass

from . import metrics
from .candidates import GenerationConfig, generate_candidates
from .errors import ConsistencyError, DuplicateColumnError, ValidationError
from .master import MasterModel, solve_binary, solve_relaxation
from .pricing import PricingProblem, solve_pricing_with_speedup

ROUND_TOL = 1e-6

EXACT_MAX_GENES = 15
EXACT_MAX_POOL = 5000
EXACT_MAX_BETA = 3


@dataclass(frozen=True)
class SolverConfig:
    """Shared knobs for the solve entry points.

    ``gamma1``/``gamma2`` only matter to the pool heuristic; the budget,
    hit range, seed and time limits apply everywhere.  ``top_q`` lets
    column generation pull several columns per pricing round.
    """

    hit_range: object
    beta: int = 10
    gamma1: int = 100
    gamma2: int = 100_000
    seed: int = 0
    top_q: int = 1
    master_time_limit: float = 30.0
    total_time_limit: float = 300.0

    def __post_init__(self):
        if not isinstance(self.beta, int) or self.beta < 0:
            raise ValidationError(
                f"budget must be a nonnegative int, got {self.beta!r}"
            )
        if self.top_q < 1:
            raise ValidationError(f"top_q must be at least 1, got {self.top_q}")
        if self.master_time_limit <= 0 or self.total_time_limit <= 0:
            raise ValidationError("time limits must be positive")


class SolveReport:
    """What a solve produced: selection, bounds, status and phase timings.

    ``objective`` is the exact integer value of ``selection`` and always a
    valid lower bound.  ``upper_bound`` is ``None`` unless it was proven.
    ``status`` is ``"converged"`` when every proving step finished inside
    its limit, else ``"time_limit"``.
    """

    def __init__(
        self,
        selection,
        objective,
        upper_bound,
        gap_percent,
        status,
        iterations,
        pool_size,
        timings,
        pricing_nodes,
        binary_nodes,
    ):
        self.selection = selection
        self.objective = objective
        self.upper_bound = upper_bound
        self.gap_percent = gap_percent
        self.status = status
        self.iterations = iterations
        self.pool_size = pool_size
        self.timings = timings
        self.pricing_nodes = pricing_nodes
        self.binary_nodes = binary_nodes


def rounding_heuristic(relaxation, model):
    """Integer selection from a relaxation: keep the largest z values.

    Keeps ``ceil(sum z)`` columns (clamped to the budget and pool size),
    ties broken toward the lower column index, and recomputes the objective
    exactly on the rounded selection, so the returned value is always a
    valid lower bound.  Returns ``(indices, objective)``.
    """
    z = relaxation.z
    k = math.ceil(float(sum(z)) - ROUND_TOL)
    k = max(0, min(k, model.beta, len(z)))
    order = sorted(range(len(z)), key=lambda j: (-z[j], j))
    indices = tuple(sorted(order[:k]))
    chosen = [model.columns[j] for j in indices]
    return indices, metrics.objective_value(chosen, model.matrix)


def _pipeline(matrix, config, initial_columns, use_pricing, started, generation_time):
    deadline = started + config.total_time_limit
    model = MasterModel(matrix, initial_columns, config.beta)
    history = set()
    for comb in model.columns:
        history.update(comb.genes)
    best_selection = []
    lb_star = 0
    ub_star = None
    pricing_converged = False
    master_time = 0.0
    pricing_time = 0.0
    pricing_nodes = 0
    iterations = 0
    warm = None
    if use_pricing:
        while time.perf_counter() <= deadline:
            t0 = time.perf_counter()
            rmp = solve_relaxation(model, warm_start=warm)
            master_time += time.perf_counter() - t0
            warm = rmp.basis
            indices, rounded = rounding_heuristic(rmp, model)
            if rounded > lb_star:
                lb_star = rounded
                best_selection = [model.columns[j] for j in indices]
            problem = PricingProblem(matrix, rmp.duals, config.hit_range)
            t0 = time.perf_counter()
            priced = solve_pricing_with_speedup(
                problem, history, deadline=deadline, top_q=config.top_q
            )
            pricing_time += time.perf_counter() - t0
            pricing_nodes += priced.nodes
            iterations += 1
            if priced.best is None:
                pricing_converged = priced.proven_optimal
                if pricing_converged:
                    ub_star = rmp.objective
                break
            try:
                model.add_column(priced.best)
            except DuplicateColumnError as exc:
                raise ConsistencyError(
                    f"pricing returned in-pool column {priced.best.genes} "
                    f"with reduced cost {priced.reduced_cost:.6g} at "
                    f"iteration {iterations}; at a relaxation optimum every "
                    "pool column must price nonpositive"
                ) from exc
            history.update(priced.best.genes)
            for extra in priced.candidates[1:]:
                if not model.contains(extra.genes):
                    model.add_column(extra)
                    history.update(extra.genes)
    t0 = time.perf_counter()
    remaining = max(0.0, deadline - t0)
    binary = solve_binary(model, time_limit=min(config.master_time_limit, remaining))
    binary_time = time.perf_counter() - t0
    if binary.objective > lb_star:
        lb_star = binary.objective
        best_selection = [model.columns[k] for k in binary.selection]
    gap = None
    if ub_star is not None:
        gap = metrics.optimality_gap(lb_star, ub_star)
        if gap is not None and gap < 0.0:
            gap = 0.0  # bound met up to LP tolerance
    proved = (not use_pricing or pricing_converged) and binary.status == "optimal"
    return SolveReport(
        selection=best_selection,
        objective=lb_star,
        upper_bound=ub_star,
        gap_percent=gap,
        status="converged" if proved else "time_limit",
        iterations=iterations,
        pool_size=len(model.columns),
        timings={
            "generation": generation_time,
            "master": master_time,
            "pricing": pricing_time,
            "binary": binary_time,
            "total": time.perf_counter() - started,
        },
        pricing_nodes=pricing_nodes,
        binary_nodes=binary.nodes,
    )


def solve_mip_heuristic(matrix, config):
    """Random pool generation followed by one binary solve; no bound."""
    started = time.perf_counter()
    pool = generate_candidates(
        matrix,
        GenerationConfig(
            hit_range=config.hit_range,
            gamma1=config.gamma1,
            gamma2=config.gamma2,
            seed=config.seed,
        ),
    )
    generation_time = time.perf_counter() - started
    return _pipeline(matrix, config, pool, False, started, generation_time)


def solve_colgen(matrix, config):
    """Column generation from an empty pool; bound certified on convergence."""
    started = time.perf_counter()
    return _pipeline(matrix, config, [], True, started, 0.0)


def exact_bruteforce(matrix, hit_range, beta):
    """Provably optimal selection by capped subset search.

    Refuses instances beyond hard caps on genes, combination count and
    budget, naming the violated cap.  Combinations that cover no tumor or
    are coverage-dominated by another combination are dropped first; both
    reductions preserve the optimal value.  Returns
    ``(selection, objective)``.
    """
    if matrix.n_genes > EXACT_MAX_GENES:
        raise ValidationError(
            f"exact search capped at {EXACT_MAX_GENES} genes, got {matrix.n_genes}"
        )
    if beta > EXACT_MAX_BETA:
        raise ValidationError(
            f"exact search capped at budget {EXACT_MAX_BETA}, got {beta}"
        )
    total = sum(math.comb(matrix.n_genes, k) for k in hit_range.sizes())
    if total > EXACT_MAX_POOL:
        raise ValidationError(
            f"exact search capped at {EXACT_MAX_POOL} combinations, got {total}"
        )
    by_cover = {}
    for k in hit_range.sizes():
        for genes in itertools.combinations(range(matrix.n_genes), k):
            comb = matrix.combination(genes)
            if comb.tumor_cover == 0:
                continue
            key = (comb.tumor_cover, comb.normal_cover)
            if key not in by_cover:
                by_cover[key] = comb
    pool = list(by_cover.values())
    kept = []
    for c in pool:
        for d in pool:
            if c is d:
                continue
            if (c.tumor_cover & ~d.tumor_cover) == 0 and (
                d.normal_cover & ~c.normal_cover
            ) == 0:
                break
        else:
            kept.append(c)
    kept.sort(key=lambda c: (-c.tumor_cover.bit_count(), c.genes))
    suffix_cover = [0] * (len(kept) + 1)
    for i in range(len(kept) - 1, -1, -1):
        suffix_cover[i] = suffix_cover[i + 1] | kept[i].tumor_cover
    best_obj = 0
    best_sel = []

    def dive(start, chosen, covered, penalty):
        nonlocal best_obj, best_sel
        obj = covered.bit_count() - penalty
        if obj > best_obj:
            best_obj = obj
            best_sel = list(chosen)
        if len(chosen) == beta:
            return
        for i in range(start, len(kept)):
            gain = (~covered & suffix_cover[i]).bit_count()
            if obj + gain <= best_obj:
                break  # later starts can only cover fewer new tumors
            c = kept[i]
            chosen.append(c)
            dive(
                i + 1,
                chosen,
                covered | c.tumor_cover,
                penalty + c.normal_cover.bit_count(),
            )
            chosen.pop()

    dive(0, [], 0, 0)
    return best_sel, best_obj


def solve_exact(matrix, config):
    """Wrap the capped exact search in a report with a zero gap."""
    started = time.perf_counter()
    selection, objective = exact_bruteforce(matrix, config.hit_range, config.beta)
    elapsed = time.perf_counter() - started
    return SolveReport(
        selection=selection,
        objective=objective,
        upper_bound=float(objective),
        gap_percent=None if objective == 0 else 0.0,
        status="converged",
        iterations=0,
        pool_size=sum(math.comb(matrix.n_genes, k) for k in config.hit_range.sizes()),
        timings={
            "generation": 0.0,
            "master": 0.0,
            "pricing": 0.0,
            "binary": elapsed,
            "total": elapsed,
        },
        pricing_nodes=0,
        binary_nodes=0,
    )
