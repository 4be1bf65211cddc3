"""Policy search for the achievable-rate functionals.

Random-restart coordinate ascent over the stochastic kernels that
parameterize each functional, plus a brute-force grid enumeration for
problems small enough to afford it.  Runs are deterministic given the
budget seed (each restart draws from its own splitmix64 child stream).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Any

import numpy as np

from . import rates
from .models import InputPolicy, RlnModel, SdWtcModel, assemble_joint, gp_policy
from .prob import Channel, Pmf
from .rng import child_seed

FUNCTIONALS = ("RA", "RA_alt", "CHV", "CEG", "RLN", "semidet", "LN_encdec")

_INITIAL_STEP = 0.5
_REJECTS_PER_HALVING = 10
_MAX_GRID_EVALS = 10_000_000


@dataclass(frozen=True)
class OptBudget:
    """Search effort: random restarts, ascent steps per restart, master seed.

    grid_step only matters to the exhaustive oracle and is carried here so a
    whole experiment can be described by one budget record.
    """

    restarts: int = 16
    iterations: int = 400
    seed: int = 0
    grid_step: float | None = None

    def __post_init__(self) -> None:
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError(f"restarts and iterations must be positive, got {self!r}")
        if self.grid_step is not None and not self.grid_step > 0.0:
            raise ValueError(f"grid_step must be positive, got {self.grid_step!r}")


@dataclass(frozen=True)
class OptResult:
    """Best policy found, its value, per-restart values, and total evaluations."""

    policy: Any
    value: float
    trace: tuple[float, ...]
    evaluations: int


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    out = np.maximum(v - css[rho] / (rho + 1), 0.0)
    return out / out.sum()


def _aux(card: int) -> tuple:
    return tuple(range(card))


def _block_shapes(
    functional: str, model: SdWtcModel | RlnModel, card_u: int, card_v: int
) -> list[tuple[int, int]]:
    """Row-stochastic blocks (rows, row length) parameterizing each policy."""
    if functional in ("RA", "RA_alt"):
        return [(len(model.s_symbols), card_u * card_v * len(model.x_symbols))]
    if functional == "CHV":
        return [(len(model.s_symbols), card_v * len(model.x_symbols))]
    if functional == "CEG":
        return [
            (1, card_u),
            (card_u * len(model.s_symbols), len(model.x_symbols)),
        ]
    if functional == "RLN":
        return [
            (1, len(model.x_symbols)),
            (len(model.s_symbols), card_u),
            (card_u, card_v),
        ]
    if functional in ("semidet", "LN_encdec"):
        return [(len(model.s_symbols), len(model.x_symbols))]
    raise ValueError(f"unknown functional {functional!r}; expected one of {FUNCTIONALS}")


def _build_policy(
    functional: str,
    model: SdWtcModel | RlnModel,
    card_u: int,
    card_v: int,
    blocks: list[np.ndarray],
) -> Any:
    if functional in ("RA", "RA_alt"):
        kernel = blocks[0].reshape(len(model.s_symbols), card_u, card_v, len(model.x_symbols))
        return gp_policy(model.s_symbols, _aux(card_u), _aux(card_v), model.x_symbols, kernel)
    if functional == "CHV":
        kernel = blocks[0].reshape(len(model.s_symbols), 1, card_v, len(model.x_symbols))
        return gp_policy(model.s_symbols, (0,), _aux(card_v), model.x_symbols, kernel)
    if functional == "CEG":
        p_t = Pmf(_aux(card_u), blocks[0][0])
        kernel = Channel(
            (("T", _aux(card_u)), ("S", model.s_symbols)),
            (("X", model.x_symbols),),
            blocks[1].reshape(card_u, len(model.s_symbols), len(model.x_symbols)),
        )
        return p_t, kernel
    if functional == "RLN":
        p_x = Pmf(model.x_symbols, blocks[0][0])
        a_kernel = Channel((("S", model.s_symbols),), (("A", _aux(card_u)),), blocks[1])
        b_kernel = Channel((("A", _aux(card_u)),), (("B", _aux(card_v)),), blocks[2])
        return p_x, a_kernel, b_kernel
    kernel = Channel((("S", model.s_symbols),), (("X", model.x_symbols),), blocks[0])
    return kernel


def evaluate_policy(functional: str, model: SdWtcModel | RlnModel, policy: Any) -> float:
    """Objective value of a policy; -inf when the two-term variant is infeasible."""
    if functional == "RA":
        return rates.rate_RA(assemble_joint(model, policy)).value
    if functional == "RA_alt":
        report = rates.rate_RA_alt(assemble_joint(model, policy))
        return report.value if report.feasible else -math.inf
    if functional == "CHV":
        return rates.rate_CHV(assemble_joint(model, policy)).value
    if functional == "CEG":
        p_t, kernel = policy
        return rates.rate_CEG(rates.ceg_joint(p_t, kernel, model)).value
    if functional == "RLN":
        p_x, a_kernel, b_kernel = policy
        return rates.rate_RLN(p_x, a_kernel, b_kernel, model).value
    if functional == "semidet":
        return rates.semidet_objective(policy, model).value
    if functional == "LN_encdec":
        return rates.rate_LN_encdec(policy, model).value
    raise ValueError(f"unknown functional {functional!r}; expected one of {FUNCTIONALS}")


def _check_model(functional: str, model: SdWtcModel | RlnModel) -> None:
    if functional == "RLN":
        if not isinstance(model, RlnModel):
            raise TypeError("the RLN functional needs an RlnModel")
    elif not isinstance(model, SdWtcModel):
        raise TypeError(f"the {functional} functional needs an SdWtcModel")


def cardinality_caps(model: SdWtcModel | RlnModel) -> tuple[int, int]:
    """Auxiliary alphabet sizes beyond which enlargement cannot help."""
    k = len(model.s_symbols) * len(model.x_symbols)
    return k + 5, k * k + 5 * k + 3


def _objective(functional: str, model: SdWtcModel | RlnModel, policy: Any) -> float:
    """Search objective: the functional clamped at zero (a do-nothing policy
    always achieves zero), with infeasible candidates scored -inf."""
    value = evaluate_policy(functional, model, policy)
    return value if value == -math.inf else max(0.0, value)


def _ascend(
    functional: str,
    model: SdWtcModel | RlnModel,
    card_u: int,
    card_v: int,
    iterations: int,
    seed: int,
) -> tuple[Any, float, int]:
    """One coordinate-ascent run from a Dirichlet(1) start."""
    rng = np.random.default_rng(seed)
    shapes = _block_shapes(functional, model, card_u, card_v)
    blocks = [rng.dirichlet(np.ones(d), size=rows) for rows, d in shapes]
    best_policy = _build_policy(functional, model, card_u, card_v, blocks)
    best = _objective(functional, model, best_policy)
    evals = 1

    if functional == "RA_alt" and best == -math.inf:
        # an uninformative U is always feasible (constraint gap exactly 0);
        # fold the drawn U-mass onto the first symbol and restart from there
        nx = len(model.x_symbols)
        k = blocks[0].reshape(len(model.s_symbols), card_u, card_v, nx)
        k2 = np.zeros_like(k)
        k2[:, 0] = k.sum(axis=1)
        blocks = [k2.reshape(blocks[0].shape)]
        best_policy = _build_policy(functional, model, card_u, card_v, blocks)
        best = _objective(functional, model, best_policy)
        evals += 1

    slots = [(b, r) for b, (rows, d) in enumerate(shapes) for r in range(rows) if d > 1]
    if not slots:
        return best_policy, best, evals

    step = _INITIAL_STEP
    rejects = 0
    for _ in range(iterations):
        b, r = slots[rng.integers(len(slots))]
        row = blocks[b][r]
        cand_row = _project_simplex(row + step * rng.standard_normal(row.size))
        saved = row.copy()
        blocks[b][r] = cand_row
        cand_policy = _build_policy(functional, model, card_u, card_v, blocks)
        cand = _objective(functional, model, cand_policy)
        evals += 1
        if cand > best:
            best, best_policy = cand, cand_policy
            rejects = 0
        else:
            blocks[b][r] = saved
            rejects += 1
            if rejects >= _REJECTS_PER_HALVING:
                step *= 0.5
                rejects = 0
    return best_policy, best, evals


def maximize(
    functional: str,
    model: SdWtcModel | RlnModel,
    card_u: int = 1,
    card_v: int = 1,
    budget: OptBudget = OptBudget(),
) -> OptResult:
    """Maximize a rate functional over its policy class.

    card_u / card_v size the auxiliary alphabets where the functional has
    them (U and V, or T for the causal-selection rate, or A and B for the
    rate-limited variant); they are ignored otherwise.  Restarts run
    independently and the first restart attaining the best value wins, so
    results do not depend on worker scheduling (set SDWTC_WORKERS to run
    restarts in threads).
    """
    _check_model(functional, model)
    cap_u, cap_v = cardinality_caps(model)
    if not 1 <= card_u <= cap_u or not 1 <= card_v <= cap_v:
        raise ValueError(
            f"cardinalities ({card_u}, {card_v}) outside [1, {cap_u}] x [1, {cap_v}]"
        )

    seeds = [child_seed(budget.seed, r) for r in range(budget.restarts)]

    def one(r: int) -> tuple[Any, float, int]:
        return _ascend(functional, model, card_u, card_v, budget.iterations, seeds[r])

    workers = int(os.environ.get("SDWTC_WORKERS", "1") or "1")
    if workers > 1 and budget.restarts > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, range(budget.restarts)))
    else:
        runs = [one(r) for r in range(budget.restarts)]

    values = np.array([v for _, v, _ in runs])
    k = int(np.argmax(values))
    return OptResult(
        policy=runs[k][0],
        value=float(values[k]),
        trace=tuple(float(v) for v in values),
        evaluations=sum(e for _, _, e in runs),
    )


def _grid_rows(k: int, dim: int) -> np.ndarray:
    """All probability rows of length dim with entries that are multiples of 1/k."""
    def comps(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in comps(total - head, parts - 1):
                yield (head, *tail)

    return np.array(list(comps(k, dim)), dtype=float) / k


def exhaustive_small(
    functional: str,
    model: SdWtcModel | RlnModel,
    grid_step: float,
    card_u: int = 1,
    card_v: int = 1,
) -> float:
    """Best value over all policies whose kernel rows lie on a 1/k grid.

    Only viable for tiny alphabets; refuses outright when the grid holds
    more than ten million policies.
    """
    _check_model(functional, model)
    cap_u, cap_v = cardinality_caps(model)
    if not 1 <= card_u <= cap_u or not 1 <= card_v <= cap_v:
        raise ValueError(
            f"cardinalities ({card_u}, {card_v}) outside [1, {cap_u}] x [1, {cap_v}]"
        )
    k = round(1.0 / grid_step)
    if k < 1 or abs(grid_step - 1.0 / k) > 1e-12:
        raise ValueError(f"grid_step must be a reciprocal integer, got {grid_step!r}")

    shapes = _block_shapes(functional, model, card_u, card_v)
    total = 1
    for rows, d in shapes:
        total *= math.comb(k + d - 1, d - 1) ** rows
    if total > _MAX_GRID_EVALS:
        raise ValueError(f"grid has {total} policies; refusing more than {_MAX_GRID_EVALS}")

    row_choices: list[np.ndarray] = []
    for rows, d in shapes:
        cand = _grid_rows(k, d)
        for _ in range(rows):
            row_choices.append(cand)

    best = -math.inf
    for pick in iter_product(*(range(len(c)) for c in row_choices)):
        blocks = []
        i = 0
        for rows, d in shapes:
            blocks.append(np.stack([row_choices[i + r][pick[i + r]] for r in range(rows)]))
            i += rows
        value = _objective(
            functional, model, _build_policy(functional, model, card_u, card_v, blocks)
        )
        if value > best:
            best = value
    return float(best)
