"""Fair payoff rules: Shapley value, argument-level values, Nash bargaining,
price schedules and a seller-misreport probe.

Player games use the classical Shapley value (subset-sum formula with
factorial weights, exact rationals).  Argument games use a uniform-weight
marginal value: every coalition term carries weight 1/n! instead of
|S|!(n-1-|S|)!/n!.  That is the weighting under which the documented
argument-game payouts (3/5 & 2/5 under full declaration, 3/4 & 1/4 under
withholding) come out exactly; it coincides with the classical value for
up to two declared arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import chain, combinations
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ResourceCapError, ValidationError
from .games import (
    Coalition,
    Game,
    PayoffVector,
    build_general,
    build_linear,
    build_threshold,
    max_players,
)
from .rational import Rational, as_fraction

PAY_PER_RECOMMENDATION = "per-recommendation"
PAY_PER_SALE = "per-sale"


# ---------------------------------------------------------------------------
# Shapley value on player games
# ---------------------------------------------------------------------------

def shapley(game: Game) -> PayoffVector:
    """Exact Shapley value: expected marginal contribution over orderings.

    Computed by the subset-sum formula
        phi_i = sum over S not containing i of
                |S|! (n-1-|S|)! / n! * (v(S+i) - v(S)).
    """
    ids = sorted(game.player_ids)
    n = len(ids)
    if n > max_players():
        raise ResourceCapError("player count exceeds the configured cap")
    n_fact = math.factorial(n)
    values: PayoffVector = {}
    for i in ids:
        others = [x for x in ids if x != i]
        total = Fraction(0)
        for size in range(n):
            weight = Fraction(math.factorial(size) * math.factorial(n - 1 - size), n_fact)
            for combo in combinations(others, size):
                s = frozenset(combo)
                total += weight * (game.worth(s | {i}) - game.worth(s))
        values[i] = total
    return values


def shapley_permutation_oracle(game: Game) -> PayoffVector:
    """Brute-force oracle: average marginal contributions over all n! orderings.

    Independent of `shapley`; only usable for small player counts.
    """
    from itertools import permutations

    ids = sorted(game.player_ids)
    n_fact = math.factorial(len(ids))
    totals = {i: Fraction(0) for i in ids}
    for order in permutations(ids):
        seen: frozenset = frozenset()
        prev = Fraction(0)
        for pid in order:
            seen = seen | {pid}
            cur = game.worth(seen)
            totals[pid] += cur - prev
            prev = cur
    return {i: t / n_fact for i, t in totals.items()}


# ---------------------------------------------------------------------------
# Argument games
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArgumentGame:
    """Worth function over purchase arguments plus per-recommender ownership.

    `arguments` is the full argument set; `worths` maps argument coalitions
    to nonnegative rationals (missing coalitions are worth 0); `ownership`
    assigns pairwise-disjoint argument sets to recommenders.  The union of
    the ownership sets is the declared set; arguments outside it are
    withheld but still part of the underlying game.
    """

    arguments: frozenset
    worths: Mapping[Coalition, Fraction]
    ownership: Mapping[str, frozenset]

    @staticmethod
    def create(
        arguments: Iterable[str],
        worths: Mapping[Iterable[str] | str, Rational],
        ownership: Mapping[str, Iterable[str]],
    ) -> "ArgumentGame":
        args = frozenset(arguments)
        table: dict[Coalition, Fraction] = {}
        for key, raw in worths.items():
            s = frozenset([key] if isinstance(key, str) else key)
            if not s <= args:
                raise ValidationError(f"worth key {sorted(s)} uses unknown arguments")
            v = as_fraction(raw, f"worth[{sorted(s)}]")
            if v < 0:
                raise ValidationError(f"argument worth must be >= 0, got {v}")
            if not s and v != 0:
                raise ValidationError("the empty argument set must have worth 0")
            table[s] = v
        own: dict[str, frozenset] = {}
        claimed: set = set()
        for rec, raw_set in ownership.items():
            s = frozenset(raw_set)
            if not s <= args:
                raise ValidationError(f"ownership of {rec!r} uses unknown arguments")
            if s & claimed:
                raise ValidationError(
                    f"ownership sets must be disjoint; {sorted(s & claimed)} claimed twice"
                )
            claimed |= s
            own[rec] = s
        return ArgumentGame(args, table, own)

    @property
    def declared(self) -> frozenset:
        sets = list(self.ownership.values())
        return frozenset().union(*sets) if sets else frozenset()

    def worth(self, coalition: Iterable[str]) -> Fraction:
        s = frozenset(coalition)
        if not s <= self.arguments:
            raise ValidationError(f"unknown argument(s): {sorted(s - self.arguments)}")
        return self.worths.get(s, Fraction(0))


def _uniform_marginal_value(worth: Callable[[Coalition], Fraction], ids: Sequence[str]) -> dict:
    """Per-element value with every coalition term weighted by 1/n!."""
    n = len(ids)
    scale = Fraction(1, math.factorial(n))
    out = {}
    for i in ids:
        others = [x for x in ids if x != i]
        subsets = chain.from_iterable(combinations(others, r) for r in range(n))
        total = Fraction(0)
        for combo in subsets:
            s = frozenset(combo)
            total += worth(s | {i}) - worth(s)
        out[i] = scale * total
    return out


def shapley_arguments(ag: ArgumentGame) -> dict[str, Fraction]:
    """Per-argument values of the worth function restricted to the declared set."""
    declared = ag.declared
    if not declared:
        raise ValidationError("no declared arguments")

    def restricted(s: Coalition) -> Fraction:
        return ag.worth(s)  # callers only pass subsets of the declared set

    return _uniform_marginal_value(restricted, sorted(declared))


def anonymity_proof_shapley(ag: ArgumentGame) -> tuple[dict[str, Fraction], PayoffVector]:
    """Withholding-proof rescaling of per-argument values.

    Values are computed on the full argument set, then the declared
    arguments' values are rescaled to sum to the worth of the declared set:
        psi_a = phi_a / (sum of phi over declared) * v(declared).
    Each recommender receives the sum of psi over the arguments they own.

    When the declared values sum to zero the result is the all-zero vector
    if v(declared) = 0; otherwise the input is inconsistent and an error is
    raised.
    """
    declared = ag.declared
    if not declared:
        raise ValidationError("no declared arguments")
    full = _uniform_marginal_value(ag.worth, sorted(ag.arguments))
    denom = sum((full[a] for a in declared), Fraction(0))
    v_declared = ag.worth(declared)
    if denom == 0:
        if v_declared == 0:
            per_arg = {a: Fraction(0) for a in sorted(declared)}
        else:
            raise ValidationError(
                "declared arguments have zero total value but positive worth; "
                "inconsistent argument game"
            )
    else:
        per_arg = {a: full[a] / denom * v_declared for a in sorted(declared)}
    per_rec = {
        rec: sum((per_arg[a] for a in owned), Fraction(0))
        for rec, owned in ag.ownership.items()
    }
    return per_arg, per_rec


# ---------------------------------------------------------------------------
# Nash bargaining
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BargainingProblem:
    """Split a total among players relative to a disagreement point.

    The feasible set is the simplex of nonnegative payoffs summing to
    `total`; `disagreement` is what each player keeps if bargaining fails
    (here: the seller's stand-alone worth, zero for recommenders).
    """

    total: Fraction
    disagreement: dict[str, Fraction]

    def __post_init__(self):
        if any(d < 0 for d in self.disagreement.values()):
            raise ValidationError("disagreement payoffs must be nonnegative")
        if self.total < sum(self.disagreement.values(), Fraction(0)):
            raise ValidationError("infeasible disagreement point: total below its sum")


def bargaining_problem(game: Game) -> BargainingProblem:
    """The game's bargaining problem: split v(N), seller falls back on v({s})."""
    d = {game.seller: game.worth({game.seller})}
    for r in game.recommenders:
        d[r] = Fraction(0)
    return BargainingProblem(game.worth(game.grand_coalition), d)


def nash_bargaining(bp: BargainingProblem) -> PayoffVector:
    """Maximizer of the product of gains over the simplex: equal surplus split.

    Every player receives their disagreement payoff plus an equal share of
    the surplus, which is the closed-form argmax of prod(x_i - d_i) on the
    feasible simplex.
    """
    ids = sorted(bp.disagreement)
    surplus = bp.total - sum(bp.disagreement.values(), Fraction(0))
    share = surplus / len(ids)
    return {i: bp.disagreement[i] + share for i in ids}


def nash_product_grid_oracle(bp: BargainingProblem, steps: int = 60) -> PayoffVector:
    """Test oracle: grid search of argmax prod(x_i - d_i) on the simplex.

    Exhaustive over compositions of `steps` grid increments; exponential in
    the player count, so only for small problems.
    """
    ids = sorted(bp.disagreement)
    d = [bp.disagreement[i] for i in ids]
    surplus = bp.total - sum(d, Fraction(0))
    n = len(ids)
    if surplus == 0:
        return dict(zip(ids, d))

    best_val = None
    best = None

    def rec(idx: int, remaining: int, shares: list[int]):
        nonlocal best_val, best
        if idx == n - 1:
            alloc = shares + [remaining]
            prod = Fraction(1)
            for a in alloc:
                prod *= Fraction(a, steps) * surplus
            if best_val is None or prod > best_val:
                best_val = prod
                best = alloc
            return
        for take in range(remaining + 1):
            rec(idx + 1, remaining - take, shares + [take])

    rec(0, steps, [])
    return {i: d_i + Fraction(b, steps) * surplus for i, d_i, b in zip(ids, d, best)}


# ---------------------------------------------------------------------------
# Prices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PriceSchedule:
    mode: str  # PAY_PER_RECOMMENDATION or PAY_PER_SALE
    prices: dict[str, Fraction]  # recommender id -> price


def to_prices(payoff: Mapping[str, Fraction], game: Game, mode: str) -> PriceSchedule:
    """Translate expected payoffs into per-recommender prices.

    Pay-per-recommendation pays x_r on every recommendation; pay-per-sale
    pays x_r / (p + f(N)) on successful ones only, so the expectation
    matches.
    """
    if mode not in (PAY_PER_RECOMMENDATION, PAY_PER_SALE):
        raise ValidationError(f"unknown payment mode {mode!r}")
    recs = game.recommenders
    missing = [r for r in recs if r not in payoff]
    if missing:
        raise ValidationError(f"payoff vector lacks recommenders {missing}")
    if mode == PAY_PER_RECOMMENDATION:
        return PriceSchedule(mode, {r: Fraction(payoff[r]) for r in recs})
    prob = game.sale_probability()
    if prob == 0:
        raise ValidationError("pay-per-sale undefined: selling probability is 0")
    return PriceSchedule(mode, {r: Fraction(payoff[r]) / prob for r in recs})


# ---------------------------------------------------------------------------
# Truthfulness probe
# ---------------------------------------------------------------------------

PricingRule = Callable[[Game], Mapping[str, Fraction]]


def shapley_rule(game: Game) -> Mapping[str, Fraction]:
    """Pricing rule paying each recommender their Shapley value."""
    phi = shapley(game)
    return {r: phi[r] for r in game.recommenders}


def zero_rule(game: Game) -> Mapping[str, Fraction]:
    """Pricing rule paying nothing."""
    return {r: Fraction(0) for r in game.recommenders}


@dataclass(frozen=True)
class DeviationReport:
    found: bool
    report: Game | None
    truthful_utility: Fraction
    best_utility: Fraction

    @property
    def gain(self) -> Fraction:
        return self.best_utility - self.truthful_utility


def scaled_report_grid(game: Game, factors: Iterable[Rational] = (0, "1/2", 2)) -> list[Game]:
    """Misreport grid scaling the true margin by each factor (0 included)."""
    out = []
    for f in factors:
        out.append(scale_margin(game, as_fraction(f, "factor")))
    return out


def scale_margin(game: Game, factor: Fraction) -> Game:
    """The same scenario game with its margin scaled by a nonnegative factor."""
    if game.scenario is None:
        raise ValidationError("margin scaling requires a scenario-built game")
    if factor < 0:
        raise ValidationError("margin factor must be nonnegative")
    meta = game.scenario
    delta = meta.delta * factor
    recs = game.recommenders
    if meta.kind == "linear":
        return build_linear(meta.p, delta, meta.params["q"], seller=game.seller)
    if meta.kind == "threshold":
        return build_threshold(
            meta.p, delta, len(recs), meta.params["k"], meta.params["q"],
            seller=game.seller, recommenders=recs,
        )
    return build_general(
        meta.p, delta, meta.params["f"], seller=game.seller, recommenders=recs
    )


def truthfulness_probe(
    true_game: Game,
    pricing_rule: PricingRule,
    report_grid: Sequence[Game] | None = None,
) -> DeviationReport:
    """Search a finite grid of misreported games for a profitable seller lie.

    The seller's true utility under report G' is the true grand-coalition
    worth minus the payments the rule assigns for G'.  Returns the
    best-gain misreport (earliest in grid order on ties) or a not-found
    report.  A zero-margin report is always in the default grid.
    """
    if report_grid is None:
        report_grid = scaled_report_grid(true_game)
    if not report_grid:
        raise ValidationError("report grid must be non-empty")

    true_total = true_game.worth(true_game.grand_coalition)
    base = true_total - sum(pricing_rule(true_game).values(), Fraction(0))
    best: Game | None = None
    best_utility = base
    for reported in report_grid:
        utility = true_total - sum(pricing_rule(reported).values(), Fraction(0))
        if utility > best_utility:
            best = reported
            best_utility = utility
    return DeviationReport(best is not None, best, base, best_utility)
