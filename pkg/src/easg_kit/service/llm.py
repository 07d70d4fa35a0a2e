"""Chat-completion client for the anticipation and summarization runs.

The wire format is the common chat-completion shape: POST ``url`` with
``{model, messages: [{role, content}, ...], temperature, max_tokens}``
and read ``choices[0].message.content`` back. Model parameters are
configuration (environment), not code, and the raw completion is always
returned to the caller so it can be recorded for offline rescoring.

Transport injection (``httpx.MockTransport``) keeps tests hermetic and
deterministic. The live client retries with bounded exponential backoff
on transport errors, 429 and 5xx; a completion request is safe to
repeat, which is the only reason retrying is allowed here. Nothing else
in the service retries writes.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import httpx

DEFAULT_MODEL = "gpt-3.5-turbo"
DEFAULT_TIMEOUT = 30.0

ENV_URL = "EASG_LLM_URL"
ENV_KEY = "EASG_LLM_KEY"
ENV_MODEL = "EASG_LLM_MODEL"
ENV_TEMPERATURE = "EASG_LLM_TEMPERATURE"
ENV_MAX_TOKENS = "EASG_LLM_MAX_TOKENS"
ENV_MAX_RETRIES = "EASG_LLM_MAX_RETRIES"
ENV_BACKOFF = "EASG_LLM_BACKOFF"


class UpstreamError(Exception):
    """The LLM call failed for good; carries retry metadata for the API."""

    def __init__(self, message: str, *, attempts: int, retry_after: float, status: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.retry_after = retry_after
        self.status = status


def _retry_after(response: httpx.Response) -> float | None:
    """Upstream Retry-After in seconds, when present and numeric."""
    raw = response.headers.get("retry-after")
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        return None


@dataclass(frozen=True)
class LLMConfig:
    url: str
    api_key: str = ""
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_tokens: int = 256
    max_retries: int = 3
    backoff_base: float = 0.5
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self) -> None:
        if not self.url:
            raise ValueError("LLM url must be set")
        if self.max_retries < 0 or self.backoff_base <= 0:
            raise ValueError("retry settings must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def from_env(cls, env=os.environ) -> "LLMConfig | None":
        """Config from EASG_LLM_* variables, or None when no URL is set."""
        url = env.get(ENV_URL, "")
        if not url:
            return None
        return cls(
            url=url,
            api_key=env.get(ENV_KEY, ""),
            model=env.get(ENV_MODEL, DEFAULT_MODEL),
            temperature=float(env.get(ENV_TEMPERATURE, "0")),
            max_tokens=int(env.get(ENV_MAX_TOKENS, "256")),
            max_retries=int(env.get(ENV_MAX_RETRIES, "3")),
            backoff_base=float(env.get(ENV_BACKOFF, "0.5")),
        )


class LLMClient:
    """Synchronous completion caller with injectable transport and sleep."""

    def __init__(
        self,
        config: LLMConfig,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ) -> None:
        self.config = config
        self._sleep = sleep
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._client = httpx.Client(
            transport=transport, headers=headers, timeout=config.timeout
        )

    def close(self) -> None:
        self._client.close()

    def complete(self, system_text: str, user_text: str) -> str:
        """One completion; returns the raw assistant text."""
        payload = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_text},
            ],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }
        delay = self.config.backoff_base
        attempts = self.config.max_retries + 1
        for attempt in range(1, attempts + 1):
            status: int | None = None
            retry_after: float | None = None
            try:
                response = self._client.post(self.config.url, json=payload)
                status = response.status_code
                if status == 200:
                    return self._extract(response, attempt)
                retryable = status == 429 or 500 <= status < 600
                message = f"upstream returned {status}"
                retry_after = _retry_after(response)
            except httpx.TransportError as exc:
                retryable = True
                message = f"upstream unreachable: {exc}"
            if not retryable or attempt == attempts:
                raise UpstreamError(
                    message,
                    attempts=attempt,
                    retry_after=retry_after if retry_after is not None else delay,
                    status=status,
                )
            self._sleep(delay)
            delay *= 2.0
        raise AssertionError("unreachable")

    def _extract(self, response: httpx.Response, attempt: int) -> str:
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise UpstreamError(
                f"upstream response malformed: {exc}",
                attempts=attempt,
                retry_after=self.config.backoff_base,
                status=response.status_code,
            ) from exc
        if not isinstance(content, str):
            raise UpstreamError(
                "upstream content is not text",
                attempts=attempt,
                retry_after=self.config.backoff_base,
                status=response.status_code,
            )
        return content

    def __enter__(self) -> "LLMClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
