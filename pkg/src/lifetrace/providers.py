"""Provider config file loading and the HTTP-backed providers.

Config file shape (JSON)::

    {
      "kind": "mock" | "openai_compatible",
      "endpoint": "https://host/v1",
      "api_key_env": "MY_PROVIDER_KEY",
      "model": "model-name",
      "prices": {"input_per_million": "2.5", "output_per_million": "10"},
      "concurrency": 4,
      "budget_cap_usd": "1.71",
      "retry": {"max_attempts": 4, "base_delay": 0.5},
      "embedding": {"kind": "mock" | "sentence_transformers" | "openai_compatible", ...},
      "mock": {"seed": 0, "expand_policy": "random", ...}
    }

Credentials are only ever read from the environment variable named by
``api_key_env``; an inline key is rejected.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import httpx
import numpy as np

from .gateway import (
    Gateway,
    GenerationRequest,
    GenerationResponse,
    InvalidRequest,
    PriceTable,
    ProviderUnavailable,
    RetryPolicy,
    TransientProviderError,
)
from .mock import MockEmbedder, MockProvider

_INLINE_SECRET_KEYS = {"api_key", "key", "token", "secret", "password"}


class ConfigError(ValueError):
    pass


@dataclass
class ProviderConfig:
    kind: str = "mock"
    endpoint: str | None = None
    api_key_env: str | None = None
    model: str | None = None
    prices: dict[str, Any] = field(default_factory=lambda: {"input_per_million": "2.5", "output_per_million": "10"})
    concurrency: int = 4
    budget_cap_usd: str | None = None
    scope_cap_usd: str | None = "0.57"
    retry: dict[str, Any] = field(default_factory=dict)
    timeout: float = 60.0
    embedding: dict[str, Any] = field(default_factory=lambda: {"kind": "mock", "dim": 64})
    mock: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ProviderConfig":
        _reject_inline_secrets(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown provider config keys: {sorted(unknown)}")
        cfg = cls(**d)
        if cfg.kind not in ("mock", "openai_compatible"):
            raise ConfigError(f"unsupported provider kind {cfg.kind!r}")
        if cfg.kind != "mock" and not (cfg.endpoint and cfg.model and cfg.api_key_env):
            raise ConfigError("endpoint, model and api_key_env are required for a remote provider")
        if cfg.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ProviderConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read provider config {path}: {exc}") from exc
        return cls.from_dict(data)


def _reject_inline_secrets(d: dict, where: str = "") -> None:
    for key, value in d.items():
        if key.lower() in _INLINE_SECRET_KEYS:
            raise ConfigError(f"inline credential {where}{key!r} not allowed; use api_key_env")
        if isinstance(value, dict):
            _reject_inline_secrets(value, f"{where}{key}.")


def _api_key(env_name: str) -> str:
    key = os.environ.get(env_name)
    if not key:
        raise ConfigError(f"environment variable {env_name} is not set")
    return key


class OpenAICompatibleProvider:
    """Chat-completions style endpoint (``POST {endpoint}/chat/completions``)."""

    def __init__(self, endpoint: str, model: str, api_key: str, *, timeout: float = 60.0,
                 transport: httpx.BaseTransport | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.provider_id = f"openai_compatible:{model}"
        self._client = httpx.Client(
            timeout=timeout, transport=transport,
            headers={"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"},
        )

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        try:
            resp = self._client.post(f"{self.endpoint}/chat/completions", json=body)
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise TransientProviderError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientProviderError(f"HTTP {resp.status_code}")
        if resp.status_code == 400:
            raise InvalidRequest(resp.text[:500])
        if resp.status_code >= 400:
            raise ProviderUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
        data = resp.json()
        try:
            text = data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise TransientProviderError(f"malformed completion payload: {exc}") from exc
        usage = data.get("usage") or {}
        return GenerationResponse(
            text=text,
            input_tokens=int(usage.get("prompt_tokens", 0)),
            output_tokens=int(usage.get("completion_tokens", 0)),
            provider_id=self.provider_id,
        )


class OpenAICompatibleEmbedder:
    def __init__(self, endpoint: str, model: str, api_key: str, dim: int, *, timeout: float = 60.0,
                 transport: httpx.BaseTransport | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.dim = dim
        self.provider_id = f"openai_compatible-embed:{model}"
        self._client = httpx.Client(timeout=timeout, transport=transport,
                                    headers={"Authorization": f"Bearer {api_key}"})

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        # Empty strings are rejected by most endpoints; a single space is the
        # closest neutral input.
        payload = {"model": self.model, "input": [t if t else " " for t in texts]}
        try:
            resp = self._client.post(f"{self.endpoint}/embeddings", json=payload)
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise TransientProviderError(str(exc)) from exc
        if resp.status_code >= 400:
            raise TransientProviderError(f"HTTP {resp.status_code}")
        rows = sorted(resp.json()["data"], key=lambda r: r["index"])
        out = np.asarray([r["embedding"] for r in rows], dtype=np.float64)
        if out.shape[1] != self.dim:
            raise ProviderUnavailable(f"embedding dim {out.shape[1]} != configured {self.dim}")
        return out

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]


class SentenceTransformerEmbedder:
    def __init__(self, model: str = "all-MiniLM-L6-v2"):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(model)
        self.dim = int(self._model.get_sentence_embedding_dimension())
        self.provider_id = f"sentence_transformers:{model}"

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        return np.asarray(self._model.encode(texts, show_progress_bar=False), dtype=np.float64)


def build_embedder(cfg: ProviderConfig, seed: int = 0):
    emb = dict(cfg.embedding)
    kind = emb.get("kind", "mock")
    if kind == "mock":
        return MockEmbedder(dim=int(emb.get("dim", 64)), seed=int(emb.get("seed", seed)))
    if kind == "sentence_transformers":
        return SentenceTransformerEmbedder(emb.get("model", "all-MiniLM-L6-v2"))
    if kind == "openai_compatible":
        return OpenAICompatibleEmbedder(
            emb.get("endpoint", cfg.endpoint), emb["model"], _api_key(emb.get("api_key_env", cfg.api_key_env)),
            int(emb["dim"]), timeout=cfg.timeout,
        )
    raise ConfigError(f"unsupported embedding kind {kind!r}")


def build_gateway(cfg: ProviderConfig, *, seed: int = 0, offline: bool = False,
                  budget_cap: str | float | None = None) -> Gateway:
    """Instantiate providers and wrap them in a :class:`Gateway`.

    ``offline`` forces the mock text and embedding providers regardless of
    what the config names. ``budget_cap`` overrides the config's cap.
    """
    if offline or cfg.kind == "mock":
        mock_opts = {k: v for k, v in cfg.mock.items() if k != "seed"}
        provider = MockProvider(seed=int(cfg.mock.get("seed", seed)), **mock_opts)
        embedder = MockEmbedder(dim=int(cfg.embedding.get("dim", 64)), seed=seed) if offline else build_embedder(cfg, seed)
    else:
        provider = OpenAICompatibleProvider(cfg.endpoint, cfg.model, _api_key(cfg.api_key_env), timeout=cfg.timeout)
        embedder = build_embedder(cfg, seed)
    cap = budget_cap if budget_cap is not None else cfg.budget_cap_usd
    return Gateway(
        provider, embedder,
        prices=PriceTable.from_dict(cfg.prices),
        concurrency=cfg.concurrency,
        budget_cap=cap,
        scope_cap=cfg.scope_cap_usd,
        retry=RetryPolicy(**cfg.retry),
    )
