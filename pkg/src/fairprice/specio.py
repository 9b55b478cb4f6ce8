"""Reading game/argument specification files and writing result documents.

Game spec (UTF-8 JSON): `players` (array of ids, first is the seller),
`scenario` in {"linear", "threshold", "general"}, `p`, `delta`, and the
scenario parameters: `q` array for linear, `k` plus scalar `q` for
threshold, `f` object keyed by comma-joined sorted recommender ids for
general.  Numbers may be JSON decimals or rational strings "a/b"; decimals
convert exactly (base-10).

Argument-game spec: `arguments` array, `worths` object keyed by
comma-joined sorted argument ids, `ownership` object recommender id ->
array of argument ids.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Iterable

from .errors import ValidationError
from .fair_division import ArgumentGame
from .games import Game, build_general, build_linear, build_threshold
from .rational import as_fraction, decimal_str, frac_str
from .trust import RewardCurve

CSV_HEADER = ["step", "policy", "expected_cumulative_reward", "stderr"]


def _loads(text: str, where: str) -> Any:
    try:
        # parse_float=Fraction keeps JSON decimals exact (base-10 scaling)
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{where}: invalid JSON at line {exc.lineno}: {exc.msg}")


def _field(doc: dict, name: str, where: str) -> Any:
    if name not in doc:
        raise ValidationError(f"{where}: missing field {name!r}")
    return doc[name]


def load_game(text: str, where: str = "game spec") -> Game:
    doc = _loads(text, where)
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: top level must be an object")
    players = _field(doc, "players", where)
    if not isinstance(players, list) or not players or not all(isinstance(p, str) for p in players):
        raise ValidationError(f"{where}: 'players' must be a non-empty array of id strings")
    seller, recommenders = players[0], players[1:]
    scenario = _field(doc, "scenario", where)
    p = _field(doc, "p", where)
    delta = _field(doc, "delta", where)

    if scenario == "linear":
        q = _field(doc, "q", where)
        if not isinstance(q, list) or len(q) != len(recommenders):
            raise ValidationError(f"{where}: 'q' must be an array of length {len(recommenders)}")
        return build_linear(p, delta, q, seller=seller, recommenders=recommenders)
    if scenario == "threshold":
        k = _field(doc, "k", where)
        if not isinstance(k, int) or isinstance(k, bool):
            raise ValidationError(f"{where}: 'k' must be an integer")
        q = _field(doc, "q", where)
        return build_threshold(
            p, delta, len(recommenders), k, q, seller=seller, recommenders=recommenders
        )
    if scenario == "general":
        f_raw = doc.get("f", {})
        if not isinstance(f_raw, dict):
            raise ValidationError(f"{where}: 'f' must be an object")
        uplift = {}
        for key, val in f_raw.items():
            recs = [x for x in key.split(",") if x]
            uplift[frozenset(recs) | {seller}] = val
        return build_general(p, delta, uplift, seller=seller, recommenders=recommenders)
    raise ValidationError(f"{where}: unknown scenario {scenario!r}")


def load_argument_game(text: str, where: str = "argument spec") -> ArgumentGame:
    doc = _loads(text, where)
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: top level must be an object")
    arguments = _field(doc, "arguments", where)
    worths_raw = _field(doc, "worths", where)
    ownership_raw = _field(doc, "ownership", where)
    if not isinstance(arguments, list) or not all(isinstance(a, str) for a in arguments):
        raise ValidationError(f"{where}: 'arguments' must be an array of strings")
    if not isinstance(worths_raw, dict) or not isinstance(ownership_raw, dict):
        raise ValidationError(f"{where}: 'worths' and 'ownership' must be objects")
    worths = {frozenset(x for x in key.split(",") if x): val for key, val in worths_raw.items()}
    ownership = {}
    for rec, lst in ownership_raw.items():
        if not isinstance(lst, list):
            raise ValidationError(f"{where}: ownership of {rec!r} must be an array")
        ownership[rec] = lst
    return ArgumentGame.create(arguments, worths, ownership)


def load_payoff_vector(text: str, where: str = "payoff vector") -> dict[str, Fraction]:
    doc = _loads(text, where)
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: must be an object of id -> value")
    return {k: as_fraction(v, f"{where}[{k}]") for k, v in doc.items()}


def coalition_key(ids: Iterable[str]) -> str:
    return ",".join(sorted(ids))


# ---------------------------------------------------------------------------
# Result rendering
# ---------------------------------------------------------------------------

def render_value(x) -> dict:
    """Exact string plus decimal rendering of one rational/float value."""
    if isinstance(x, Fraction):
        return {"value": frac_str(x), "value_decimal": float(x)}
    return {"value": decimal_str(x), "value_decimal": float(x)}


def results_to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


RESULTS_HEADER = ["id", "method", "value"]


def results_to_csv(rows: list[dict], summary: list[tuple[str, str, str]] = ()) -> str:
    """CSV for per-id results: id, method, value (decimal rendering only).

    `summary` rows (id, method, value) are appended verbatim, e.g. core
    verdicts.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    for row in rows:
        writer.writerow([row["id"], row["method"], decimal_str(row["value_decimal"])])
    for row in summary:
        writer.writerow(row)
    return buf.getvalue()


def read_results_csv(text: str) -> list[dict]:
    """Parse a results CSV produced by `results_to_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != RESULTS_HEADER:
        raise ValidationError(f"unexpected CSV header: {header}")
    out = []
    for row in reader:
        if not row:
            continue
        if len(row) != 3:
            raise ValidationError(f"malformed CSV row: {row}")
        out.append({"id": row[0], "method": row[1], "value": row[2]})
    return out


def curves_to_csv(curves: list[RewardCurve]) -> str:
    """Long-format curve CSV with the fixed header; empty stderr when exact."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for curve in curves:
        for step, policy, value, err in curve.rows():
            writer.writerow(
                [step, policy, decimal_str(value), "" if err is None else decimal_str(err)]
            )
    return buf.getvalue()


def read_curve_csv(text: str) -> list[RewardCurve]:
    """Parse a curve CSV produced by `curves_to_csv` (round-trip reader)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_HEADER:
        raise ValidationError(f"unexpected CSV header: {header}")
    by_policy: dict[str, list[tuple[int, float, float | None]]] = {}
    for row in reader:
        if not row:
            continue
        if len(row) != 4:
            raise ValidationError(f"malformed CSV row: {row}")
        step, policy, value, err = row
        by_policy.setdefault(policy, []).append(
            (int(step), float(value), None if err == "" else float(err))
        )
    curves = []
    for policy, rows in by_policy.items():
        rows.sort()
        if [s for s, _, _ in rows] != list(range(1, len(rows) + 1)):
            raise ValidationError(f"non-contiguous steps for policy {policy!r}")
        values = tuple(v for _, v, _ in rows)
        errs = tuple(e for _, _, e in rows)
        curves.append(
            RewardCurve(policy, values, None if all(e is None for e in errs) else errs)
        )
    return curves
