"""Demographic prior: independent categorical marginals, seeded sampling."""

from __future__ import annotations

import json
import random
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from pathlib import Path

MARGINALS = ("age", "gender", "ethnicity", "income", "locale", "family_setup", "nationality")
LOAD_TOLERANCE = 1e-6


class PriorError(ValueError):
    pass


class ParseError(PriorError):
    pass


class NormalizationError(PriorError):
    def __init__(self, marginal: str, total: float):
        super().__init__(f"marginal {marginal!r} sums to {total!r}, not 1")
        self.marginal = marginal
        self.total = total


class EmptyMarginal(PriorError):
    def __init__(self, marginal: str):
        super().__init__(f"marginal {marginal!r} has no categories")
        self.marginal = marginal


@dataclass(frozen=True)
class DemographicPrior:
    # marginal name -> ((label, probability), ...) in file order
    marginals: dict[str, tuple[tuple[str, float], ...]]

    def __post_init__(self):
        for name, cats in self.marginals.items():
            if not cats:
                raise EmptyMarginal(name)
            for label, p in cats:
                if not isinstance(p, (int, float)) or p < 0:
                    raise PriorError(f"marginal {name!r}: probability for {label!r} must be a non-negative number")
            total = sum(p for _, p in cats)
            if abs(total - 1.0) > LOAD_TOLERANCE:
                raise NormalizationError(name, total)

    def labels(self, marginal: str) -> list[str]:
        return [label for label, _ in self.marginals[marginal]]

    def to_json(self) -> dict:
        return {"marginals": {k: [[label, p] for label, p in v] for k, v in self.marginals.items()}}


@dataclass(frozen=True)
class DemographicDraw:
    attributes: dict[str, str]
    rng_seed: int

    def __getitem__(self, key: str) -> str:
        return self.attributes[key]


def parse_prior(data: dict) -> DemographicPrior:
    if not isinstance(data, dict) or not isinstance(data.get("marginals"), dict):
        raise ParseError('prior must be an object with a "marginals" mapping')
    marginals = {}
    for name, cats in data["marginals"].items():
        if not isinstance(cats, list):
            raise ParseError(f"marginal {name!r} must be a list of [label, probability] pairs")
        pairs = []
        for item in cats:
            if not (isinstance(item, (list, tuple)) and len(item) == 2 and isinstance(item[0], str)):
                raise ParseError(f"marginal {name!r}: bad entry {item!r}")
            pairs.append((item[0], item[1]))
        marginals[name] = tuple(pairs)
    return DemographicPrior(marginals)


def load_prior(path: str | Path) -> DemographicPrior:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read prior {path}: {exc}") from exc
    return parse_prior(data)


def _pick(rng: random.Random, cats: tuple[tuple[str, float], ...]) -> str:
    cum = list(accumulate(p for _, p in cats))
    u = rng.random() * cum[-1]
    i = bisect_right(cum, u)
    # Guard against u landing exactly on the last edge, and skip zero-mass tails.
    i = min(i, len(cats) - 1)
    while cats[i][1] == 0 and i > 0:
        i -= 1
    return cats[i][0]


def sample_draw(prior: DemographicPrior, seed: int) -> DemographicDraw:
    rng = random.Random(seed)
    return DemographicDraw({name: _pick(rng, cats) for name, cats in prior.marginals.items()}, seed)


def sample_draws(prior: DemographicPrior, n: int, seed: int) -> list[dict[str, str]]:
    """Bulk sampling from one PRNG stream (used for frequency checks)."""
    rng = random.Random(seed)
    return [{name: _pick(rng, cats) for name, cats in prior.marginals.items()} for _ in range(n)]
