#!/usr/bin/env python3
"""Reproduce the trust-decay experiment: n=200 steps, r=1, p0=0.5, l=0.66.

Emits one long-format CSV with the cumulative expected reward curves of
- the optimal policy without recovery (g=1), with and without reset,
- the optimal policy with recovery (g=1.33, reset),
- the every-k heuristics for k = 2, 3, 4 (g=1.33, reset),
optionally with Monte-Carlo estimates, and prints the asymptotes the
curves converge to (or escape).
"""

import argparse
from pathlib import Path

from fairprice import (
    AllPolicy,
    EveryK,
    TrustParams,
    dp_optimal,
    every_k_reward,
    expected_curve,
    mc_simulate,
    no_reset_total,
    with_reset_total,
)
from fairprice.specio import curves_to_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--out", default="figure2.csv")
    ap.add_argument("--trials", type=int, default=0, help="add MC curves (0 = off)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n = args.n
    base = dict(p0="0.5", l="0.66", r="1")
    no_reset = TrustParams(g=1, reset=False, **base)
    with_reset = TrustParams(g=1, reset=True, **base)
    recovery = TrustParams(g="1.33", reset=True, **base)

    curves = []
    nr = expected_curve(no_reset, AllPolicy(), n)
    curves.append(type(nr)("optimal-no-reset", nr.values))
    wr = expected_curve(with_reset, AllPolicy(), n)
    curves.append(type(wr)("optimal-reset", wr.values))
    opt, policy = dp_optimal(recovery, n)
    curves.append(type(opt)("optimal-recovery", opt.values))
    for k in (2, 3, 4):
        curves.append(every_k_reward(recovery, k, n))

    if args.trials:
        curves.append(mc_simulate(recovery, policy, n, args.trials, args.seed))
        for k in (2, 3, 4):
            curves.append(mc_simulate(recovery, EveryK(k), n, args.trials, args.seed + k))

    out = Path(args.out)
    out.write_text(curves_to_csv(curves), encoding="utf-8")

    print(f"wrote {out} ({len(curves)} curves, {n} steps each)")
    print(f"no-reset curve final   {nr.final:9.4f}   (series limit {no_reset_total(no_reset):.4f})")
    print(f"reset curve final      {wr.final:9.4f}   (fixed point  {with_reset_total(with_reset):.4f})")
    print(f"recovery optimal final {opt.final:9.4f}   (unbounded: grows ~linearly)")
    for k, name in [(2, "every-2"), (3, "every-3"), (4, "every-4")]:
        c = next(c for c in curves if c.policy == name)
        print(f"{name} final          {float(c.final):9.4f}")


if __name__ == "__main__":
    main()
