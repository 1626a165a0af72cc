"""Uniform access to text and embedding providers.

The :class:`Gateway` wraps one text provider and one embedding provider and
adds the cross-cutting pieces every agent needs: a concurrency cap, bounded
exponential-backoff retries, a cost ledger with exact arithmetic, and budget
guards (global and per scope).
"""

from __future__ import annotations

import json
import logging
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any, Callable, Protocol

import jsonschema
import numpy as np

from .schemas import get_schema

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.9
PER_ARTIFACT_BOUND_USD = Decimal("0.57")


class GatewayError(Exception):
    pass


class InvalidRequest(GatewayError):
    pass


class ProviderUnavailable(GatewayError):
    pass


class TransientProviderError(GatewayError):
    """Raised by providers for failures worth retrying (timeouts, 429, 5xx)."""


class BudgetExceeded(GatewayError):
    """``scope`` is the artifact scope that overran, or None when the run cap tripped."""

    def __init__(self, message: str, scope: str | None = None):
        super().__init__(message)
        self.scope = scope


class NoJsonFound(GatewayError):
    pass


class SchemaViolation(GatewayError):
    def __init__(self, violations: list[str], value: Any = None):
        super().__init__("; ".join(violations))
        self.violations = violations
        self.value = value

    @property
    def fields(self) -> list[str]:
        return sorted({v.split(":", 1)[0] for v in self.violations})


@dataclass
class GenerationRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int = 4096
    schema_hint: str | None = None
    agent_role: str = "agent"
    # Structured inputs the prompt was rendered from. Real providers ignore
    # this; the mock uses it to echo fields consistently.
    context: dict[str, Any] = field(default_factory=dict)
    scope: str | None = None

    def validate(self) -> None:
        if not self.user_prompt or not self.user_prompt.strip():
            raise InvalidRequest("user_prompt must be non-empty")
        if not self.system_prompt or not self.system_prompt.strip():
            raise InvalidRequest("system_prompt must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise InvalidRequest(f"temperature {self.temperature} outside [0, 2]")
        if self.max_output_tokens <= 0:
            raise InvalidRequest("max_output_tokens must be positive")


@dataclass(frozen=True)
class GenerationResponse:
    text: str
    input_tokens: int
    output_tokens: int
    provider_id: str


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    def __eq__(self, other):
        return (
            isinstance(other, EmbeddingVector)
            and self.provider_id == other.provider_id
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _as_fraction(x) -> Fraction:
    # Go through Decimal so "2.5" and 2.5 both become exactly 5/2.
    return Fraction(Decimal(str(x)))


@dataclass(frozen=True)
class PriceTable:
    """USD per one million tokens."""

    input_per_million: Fraction = Fraction(5, 2)
    output_per_million: Fraction = Fraction(10)

    @classmethod
    def from_dict(cls, d: dict) -> "PriceTable":
        return cls(_as_fraction(d.get("input_per_million", "2.5")),
                   _as_fraction(d.get("output_per_million", "10")))

    def cost(self, input_tokens: int, output_tokens: int) -> Fraction:
        return (input_tokens * self.input_per_million + output_tokens * self.output_per_million) / 1_000_000


@dataclass(frozen=True)
class LedgerRecord:
    agent_role: str
    input_tokens: int
    output_tokens: int
    prices: PriceTable
    scope: str | None = None

    @property
    def cost(self) -> Fraction:
        return self.prices.cost(self.input_tokens, self.output_tokens)


class CostLedger:
    """Thread-safe per-call cost log. Totals are exact fractions of a dollar."""

    def __init__(self):
        self._lock = threading.Lock()
        self.records: list[LedgerRecord] = []
        self._total = Fraction(0)
        self._scopes: dict[str, Fraction] = defaultdict(Fraction)

    def add(self, record: LedgerRecord) -> tuple[Fraction, Fraction]:
        """Append a record; returns (new run total, new scope total)."""
        with self._lock:
            self.records.append(record)
            self._total += record.cost
            scope_total = Fraction(0)
            if record.scope is not None:
                self._scopes[record.scope] += record.cost
                scope_total = self._scopes[record.scope]
            return self._total, scope_total

    @property
    def total(self) -> Fraction:
        with self._lock:
            return self._total

    def scope_total(self, scope: str) -> Fraction:
        with self._lock:
            return self._scopes.get(scope, Fraction(0))

    def calls(self, role: str | None = None, scope: str | None = None) -> int:
        with self._lock:
            return sum(
                1 for r in self.records
                if (role is None or r.agent_role == role) and (scope is None or r.scope == scope)
            )

    def roles(self, scope: str | None = None) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        with self._lock:
            for r in self.records:
                if scope is None or r.scope == scope:
                    out[r.agent_role] += 1
        return dict(out)

    def __len__(self):
        return len(self.records)


class TextProvider(Protocol):
    provider_id: str

    def generate(self, request: GenerationRequest) -> GenerationResponse: ...


class EmbeddingProvider(Protocol):
    provider_id: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


@dataclass
class RetryPolicy:
    max_attempts: int = 4
    base_delay: float = 0.5
    max_delay: float = 8.0

    def delay(self, attempt: int) -> float:
        return min(self.max_delay, self.base_delay * 2 ** attempt)


class Gateway:
    def __init__(
        self,
        provider: TextProvider,
        embedder: EmbeddingProvider | None = None,
        *,
        prices: PriceTable | None = None,
        concurrency: int = 4,
        budget_cap: Decimal | float | str | None = None,
        scope_cap: Decimal | float | str | None = PER_ARTIFACT_BOUND_USD,
        retry: RetryPolicy | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        self.provider = provider
        self.embedder = embedder
        self.prices = prices or PriceTable()
        self.concurrency = concurrency
        self.budget_cap = None if budget_cap is None else _as_fraction(budget_cap)
        self.scope_cap = None if scope_cap is None else _as_fraction(scope_cap)
        self.retry = retry or RetryPolicy()
        self.ledger = CostLedger()
        self._slots = threading.BoundedSemaphore(concurrency)
        self._sleep = sleep

    @property
    def provider_id(self) -> str:
        return self.provider.provider_id

    def _check_budget(self, scope: str | None) -> None:
        if self.budget_cap is not None and self.ledger.total > self.budget_cap:
            raise BudgetExceeded(f"run total {float(self.ledger.total):.4f} USD over cap {float(self.budget_cap):.4f}")
        if scope is not None and self.scope_cap is not None and self.ledger.scope_total(scope) > self.scope_cap:
            raise BudgetExceeded(f"scope {scope!r} over per-artifact cap {float(self.scope_cap):.2f} USD", scope)

    def complete(self, request: GenerationRequest) -> GenerationResponse:
        request.validate()
        self._check_budget(request.scope)
        last_error: Exception | None = None
        for attempt in range(self.retry.max_attempts):
            try:
                with self._slots:
                    response = self.provider.generate(request)
                break
            except TransientProviderError as exc:
                last_error = exc
                if attempt + 1 < self.retry.max_attempts:
                    delay = self.retry.delay(attempt)
                    logger.warning("transient provider failure (%s); retrying in %.2fs", exc, delay)
                    self._sleep(delay)
        else:
            raise ProviderUnavailable(
                f"{self.provider_id} failed after {self.retry.max_attempts} attempts: {last_error}"
            ) from last_error

        total, scope_total = self.ledger.add(
            LedgerRecord(request.agent_role, response.input_tokens, response.output_tokens,
                         self.prices, request.scope)
        )
        if self.budget_cap is not None and total > self.budget_cap:
            raise BudgetExceeded(f"run total {float(total):.4f} USD over cap {float(self.budget_cap):.4f}")
        if request.scope is not None and self.scope_cap is not None and scope_total > self.scope_cap:
            raise BudgetExceeded(f"scope {request.scope!r} over per-artifact cap {float(self.scope_cap):.2f} USD",
                                 request.scope)
        return response

    def embed(self, text: str) -> EmbeddingVector:
        if self.embedder is None:
            raise ProviderUnavailable("no embedding provider configured")
        try:
            values = np.asarray(self.embedder.embed(text), dtype=np.float64)
        except TransientProviderError as exc:
            raise ProviderUnavailable(str(exc)) from exc
        if not np.all(np.isfinite(values)):
            raise ProviderUnavailable("embedding provider returned non-finite values")
        return EmbeddingVector(values, self.embedder.provider_id)

    def embed_many(self, texts: list[str]) -> np.ndarray:
        if self.embedder is None:
            raise ProviderUnavailable("no embedding provider configured")
        batch = getattr(self.embedder, "embed_batch", None)
        if batch is not None:
            return np.asarray(batch(texts), dtype=np.float64)
        return np.stack([self.embed(t).values for t in texts]) if texts else np.zeros((0, self.embedder.dim))

    def complete_json(self, request: GenerationRequest, schema_id: str) -> Any:
        """complete() + extract_json() with the schema attached as a hint."""
        request.schema_hint = schema_id
        return extract_json(self.complete(request).text, schema_id)


# --- JSON extraction ---------------------------------------------------------

def _violations(value: Any, schema: dict) -> list[str]:
    validator = jsonschema.Draft202012Validator(schema)
    out = []
    for err in sorted(validator.iter_errors(value), key=lambda e: list(map(str, e.absolute_path))):
        if err.validator == "required":
            missing = [k for k in err.validator_value if isinstance(err.instance, dict) and k not in err.instance]
            prefix = ".".join(map(str, err.absolute_path))
            for k in missing:
                out.append(f"{prefix + '.' if prefix else ''}{k}: missing")
            continue
        path = ".".join(map(str, err.absolute_path)) or "<root>"
        out.append(f"{path}: {err.message}")
    return out


def validate_json(value: Any, schema_id: str) -> list[str]:
    return _violations(value, get_schema(schema_id))


def _candidates(raw: str):
    decoder = json.JSONDecoder()
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch in "{[":
            try:
                value, end = decoder.raw_decode(raw, i)
            except json.JSONDecodeError:
                i += 1
                continue
            yield value
            i = end
        else:
            i += 1


def extract_json(raw: str, schema: str) -> Any:
    """Return the first JSON value embedded in ``raw`` that validates.

    Code fences and surrounding prose are skipped. No key guessing: if the
    decodable candidates all fail validation, the first one's violations
    are raised.
    """
    schema_doc = get_schema(schema)
    first_violation: SchemaViolation | None = None
    stripped = raw.strip()
    try:
        whole = [json.loads(stripped)]
    except (json.JSONDecodeError, ValueError):
        whole = []
    for value in [*whole, *_candidates(raw)]:
        problems = _violations(value, schema_doc)
        if not problems:
            return value
        if first_violation is None:
            first_violation = SchemaViolation(problems, value)
    if first_violation is not None:
        raise first_violation
    raise NoJsonFound(f"no JSON value found in model output ({len(raw)} chars)")


def ask_json(
    gateway: Gateway,
    request: GenerationRequest,
    schema_id: str,
    check: Callable[[Any], list[str]] | None = None,
) -> Any:
    """Request JSON, validate it, and allow exactly one repair round-trip.

    ``check`` adds domain rules on top of the JSON schema; its messages are
    fed back to the model in the repair prompt. On a second failure the
    last :class:`SchemaViolation` or :class:`NoJsonFound` propagates.
    """
    from .prompts import repair_prompt

    request.schema_hint = schema_id
    original = request.user_prompt
    for attempt in range(2):
        raw = gateway.complete(request).text
        try:
            value = extract_json(raw, schema_id)
            problems = check(value) if check else []
            if problems:
                raise SchemaViolation(problems, value)
            return value
        except (SchemaViolation, NoJsonFound) as exc:
            if attempt == 1:
                raise
            violations = exc.violations if isinstance(exc, SchemaViolation) else [str(exc)]
            logger.info("%s output rejected (%s); issuing repair prompt", request.agent_role, "; ".join(violations)[:200])
            request = GenerationRequest(
                system_prompt=request.system_prompt,
                user_prompt=repair_prompt(original, violations, raw),
                temperature=request.temperature,
                max_output_tokens=request.max_output_tokens,
                schema_hint=schema_id,
                agent_role=request.agent_role,
                context={**request.context, "repair": True},
                scope=request.scope,
            )
    raise AssertionError("unreachable")
