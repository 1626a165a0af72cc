"""Worked cost arithmetic for the generator-critic loop under a price table.

    python3 scripts/cost_model.py --input-tokens 1500 --output-tokens 1500
"""

import argparse
from fractions import Fraction

from lifetrace.artifacts import MAX_CYCLES_CEILING, generation_call_bound
from lifetrace.gateway import PER_ARTIFACT_BOUND_USD, PriceTable


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input-tokens", type=int, default=1500)
    ap.add_argument("--output-tokens", type=int, default=1500)
    ap.add_argument("--input-price", default="2.5", help="USD per 1M input tokens")
    ap.add_argument("--output-price", default="10", help="USD per 1M output tokens")
    args = ap.parse_args()

    prices = PriceTable(Fraction(args.input_price), Fraction(args.output_price))
    per_call = prices.cost(args.input_tokens, args.output_tokens)
    cap = Fraction(PER_ARTIFACT_BOUND_USD)
    print(f"per call: {per_call} = {float(per_call):.5f} USD (rounded {float(per_call):.3f})")
    print(f"per-artifact cap: {float(cap):.2f} USD, i.e. {int(cap // per_call)} calls at this size")
    print("max_cycles  worst-case calls  worst-case USD  within cap")
    for c in range(1, MAX_CYCLES_CEILING + 1):
        calls = generation_call_bound(c) + 1  # + the routing call
        cost = calls * per_call
        print(f"{c:>10}  {calls:>16}  {float(cost):>14.4f}  {'yes' if cost <= cap else 'no':>10}")


if __name__ == "__main__":
    main()
