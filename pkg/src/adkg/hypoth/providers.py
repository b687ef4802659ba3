"""LLM provider transports: an HTTP client with retries and an offline mock."""

from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from adkg.errors import ProviderError
from adkg.hypoth.model import Hypothesis, Triple
from adkg.hypoth.parse import render_block

LOGGER = logging.getLogger(__name__)

MAX_RETRIES = 3


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


@dataclass
class MockProvider:
    """Offline provider.

    With ``response_file`` it returns the file verbatim. Otherwise it emits
    one hypothesis per heaviest cross-modality edge (top ``n_edges``) of
    ``graph``.
    """

    name: str = "mock"
    graph: object = None
    response_file: str | None = None
    n_edges: int = 3

    @property
    def model_id(self) -> str:
        return f"mock:{self.name}"

    def complete(self, prompt: str) -> str:
        LOGGER.info("mock request %s to %s", prompt_hash(prompt), self.model_id)
        if self.response_file:
            text = Path(self.response_file).read_text(encoding="utf-8")
        elif self.graph is not None:
            text = self._from_graph()
        else:
            raise ProviderError("mock provider needs a response file or a graph", permanent=True)
        if not text.strip():
            raise ProviderError("empty response body")
        return text

    def _from_graph(self) -> str:
        g = self.graph
        cross = [e for e in g.edges if g.node(e.a).modality != g.node(e.b).modality]
        cross.sort(key=lambda e: (-e.weight, e.a, e.b, e.category))
        hyps = []
        for i, e in enumerate(cross[: self.n_edges], start=1):
            rel = "predicts" if e.category == "risk_factor" else "correlates_with"
            sign = "positively" if e.value >= 0 else "inversely"
            hyps.append(Hypothesis(
                f"h{i}", (Triple(e.a, rel, e.b),),
                f"{e.a} is {sign} linked to {e.b} across independent cohorts (weight {e.weight:.2f}).",
                self.model_id,
                f"Edge {e.a}--{e.b} is among the strongest cross-modality links ({e.category}).",
            ))
        return "Analysis of the supplied graph.\n\n" + render_block(hyps) + "\n"


@dataclass
class HttpProvider:
    """Chat-completion style endpoint; the credential is read from ``credential_env`` at call time."""

    name: str
    endpoint: str
    model: str
    credential_env: str | None = None
    api_style: str = "openai"  # or "anthropic"
    timeout: float = 60.0
    backoff: float = 0.5
    max_tokens: int = 4096
    client: httpx.Client | None = field(default=None, repr=False)

    @property
    def model_id(self) -> str:
        return f"{self.name}:{self.model}"

    def _request(self, prompt: str):
        headers = {"content-type": "application/json"}
        key = os.environ.get(self.credential_env, "") if self.credential_env else ""
        if self.credential_env and not key:
            raise ProviderError(f"credential variable {self.credential_env} is not set", permanent=True)
        if self.api_style == "anthropic":
            if key:
                headers["x-api-key"] = key
            headers["anthropic-version"] = "2023-06-01"
            body = {"model": self.model, "max_tokens": self.max_tokens,
                    "messages": [{"role": "user", "content": prompt}]}
        else:
            if key:
                headers["authorization"] = f"Bearer {key}"
            body = {"model": self.model, "messages": [{"role": "user", "content": prompt}]}
        return headers, body

    def _extract(self, data: dict) -> str:
        try:
            if self.api_style == "anthropic":
                return "".join(part.get("text", "") for part in data["content"])
            return data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise ProviderError("unexpected response layout", permanent=True) from None

    def complete(self, prompt: str) -> str:
        headers, body = self._request(prompt)
        client = self.client or httpx.Client(timeout=self.timeout)
        digest = prompt_hash(prompt)
        last = None
        try:
            for attempt in range(MAX_RETRIES + 1):
                LOGGER.info("request %s to %s (attempt %d)", digest, self.model_id, attempt + 1)
                try:
                    resp = client.post(self.endpoint, headers=headers, json=body)
                except httpx.TransportError as exc:
                    last = ProviderError(f"{self.model_id}: transport failure: {type(exc).__name__}")
                else:
                    if resp.status_code in (401, 403):
                        raise ProviderError(f"{self.model_id}: authentication failed ({resp.status_code})",
                                            permanent=True)
                    if resp.status_code == 429 or resp.status_code >= 500:
                        last = ProviderError(f"{self.model_id}: HTTP {resp.status_code}")
                    elif resp.status_code >= 400:
                        raise ProviderError(f"{self.model_id}: HTTP {resp.status_code}", permanent=True)
                    else:
                        text = self._extract(resp.json())
                        if not text.strip():
                            raise ProviderError(f"{self.model_id}: empty response body")
                        return text
                if attempt < MAX_RETRIES:
                    time.sleep(self.backoff * 2 ** attempt)
        finally:
            if self.client is None:
                client.close()
        raise ProviderError(f"{last} (gave up after {MAX_RETRIES} retries)")


def query_model(provider, prompt: str) -> str:
    return provider.complete(prompt)
