"""Compare the template baseline with mock-agent artifacts on the intrinsic metrics.

    python3 scripts/ablation_vs_agents.py --count 200 --seed 1
"""

import argparse

from lifetrace.ablation import generate_ablated
from lifetrace.config import data_path
from lifetrace.demographics import load_prior
from lifetrace.gateway import Gateway
from lifetrace.metrics import render_table, subsampled_eval
from lifetrace.mock import MockEmbedder, MockProvider
from lifetrace.pipeline import generate_footprint, prepare_memory


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--embed-dim", type=int, default=64)
    args = ap.parse_args()

    gw = Gateway(MockProvider(seed=0), MockEmbedder(args.embed_dim, 0))
    prior = load_prior(data_path("example_prior.json"))
    memory = prepare_memory(gw, None, data_path("persona_descriptions.txt"), 10, 0)
    fp, _ = generate_footprint(gw, prior, memory, "persona-000", args.seed, forest_cap=min(args.count, 300))
    agent = [a.text() for a in fp.artifacts][: args.count]
    ablated = [a.text() for a in generate_ablated(fp.profile, len(agent), args.seed)]

    rows = [(name, subsampled_eval(docs, gw.embed_many)) for name, docs in
            [("mock agents", agent), ("templates", ablated)]]
    print(render_table(rows), end="")
    print(f"\n{len(agent)} documents each; mock generation cost {float(gw.ledger.total):.2f} USD over "
          f"{len(gw.ledger)} calls (synthetic token counts)")


if __name__ == "__main__":
    main()
