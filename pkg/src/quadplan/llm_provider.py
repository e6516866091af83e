"""Provider boundary: a generic chat-completion HTTP client plus an
offline deterministic mock.

The wire contract is the common OpenAI-style shape: POST a JSON body
``{"model", "messages": [{"role", "content"}], "temperature"}`` and read
the assistant text from ``choices[0].message.content`` (with fallbacks
for simpler gateways). The mock grounds instructions with a fixed
keyword table so every test runs without a network.
"""

from __future__ import annotations

import json
import os
import random
import re
import time
from dataclasses import dataclass
from typing import Any, Callable, Protocol

import httpx

from .prompting import PromptBundle
from .waypoint_world import WaypointWorld

__all__ = [
    "CompletionResult",
    "HttpProvider",
    "MockProvider",
    "Provider",
    "ProviderConfig",
    "ProviderError",
    "ProviderRetriesExhausted",
    "ProviderStatusError",
    "ProviderTimeout",
    "ProviderTransportError",
    "mock_ground",
]


class ProviderError(RuntimeError):
    kind = "provider_error"


class ProviderTimeout(ProviderError):
    kind = "provider_timeout"


class ProviderTransportError(ProviderError):
    kind = "provider_transport"


class ProviderStatusError(ProviderError):
    kind = "provider_status"

    def __init__(self, status: int, body_excerpt: str):
        super().__init__(f"provider returned HTTP {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class ProviderRetriesExhausted(ProviderError):
    kind = "provider_retries_exhausted"

    def __init__(self, attempts: int, last_error: ProviderError):
        super().__init__(f"gave up after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error


@dataclass(frozen=True, slots=True)
class ProviderConfig:
    endpoint_url: str
    model_name: str
    api_key_env: str = "QUADPLAN_API_KEY"
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True, slots=True)
class CompletionResult:
    text: str
    latency: float  # seconds
    attempts: int
    provider_id: str


class Provider(Protocol):
    provider_id: str

    def complete(self, bundle: PromptBundle) -> CompletionResult: ...


def _extract_text(doc: Any) -> str | None:
    if not isinstance(doc, dict):
        return None
    choices = doc.get("choices")
    if isinstance(choices, list) and choices:
        message = choices[0].get("message") if isinstance(choices[0], dict) else None
        if isinstance(message, dict) and isinstance(message.get("content"), str):
            return message["content"]
    message = doc.get("message")
    if isinstance(message, dict) and isinstance(message.get("content"), str):
        return message["content"]
    for key in ("content", "text"):
        if isinstance(doc.get(key), str):
            return doc[key]
    return None


class HttpProvider:
    """Blocking chat-completion client with jittered exponential backoff.

    Retries transport failures, timeouts, 429 and 5xx responses; other
    statuses fail immediately. Model text is returned verbatim.
    """

    BACKOFF_BASE = 1.0  # seconds

    def __init__(
        self,
        config: ProviderConfig,
        *,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ) -> None:
        self.config = config
        self.provider_id = f"http:{config.model_name}"
        self._client = client or httpx.Client(timeout=config.timeout)
        self._sleep = sleep
        self._rng = rng or random.Random()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, bundle: PromptBundle) -> CompletionResult:
        body = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": bundle.user_text},
            ],
            "temperature": self.config.temperature,
        }
        started = time.monotonic()
        attempts = 0
        last_error: ProviderError | None = None
        while attempts <= self.config.max_retries:
            attempts += 1
            try:
                response = self._client.post(
                    self.config.endpoint_url,
                    json=body,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except httpx.TimeoutException as exc:
                last_error = ProviderTimeout(str(exc))
            except httpx.TransportError as exc:
                last_error = ProviderTransportError(str(exc))
            else:
                if 200 <= response.status_code < 300:
                    text = _extract_text(response.json())
                    if text is None:
                        raise ProviderStatusError(
                            response.status_code,
                            "no assistant text in response body",
                        )
                    return CompletionResult(
                        text=text,
                        latency=time.monotonic() - started,
                        attempts=attempts,
                        provider_id=self.provider_id,
                    )
                error = ProviderStatusError(
                    response.status_code, response.text[:200]
                )
                if response.status_code != 429 and response.status_code < 500:
                    raise error
                last_error = error
            if attempts <= self.config.max_retries:
                delay = self.BACKOFF_BASE * (2 ** (attempts - 1))
                self._sleep(delay * self._rng.uniform(0.5, 1.5))
        assert last_error is not None
        if self.config.max_retries == 0:
            raise last_error
        raise ProviderRetriesExhausted(attempts, last_error)


# --- deterministic mock ---------------------------------------------------

# First-match position in the instruction decides action order; on
# overlapping matches the longest phrase wins; several phrases resolving
# to the same target collapse to the earliest match.
_GOTO_PHRASES: tuple[tuple[str, str], ...] = (
    ("lemari lab", "depan_lemari"),
    ("lemari pantry", "lemari_pantry"),
    ("meja solder", "depan_meja_solder"),
    ("menyolder", "depan_meja_solder"),
    ("solder", "depan_meja_solder"),
    ("meja perakitan", "meja_perakitan"),
    ("perakitan", "meja_perakitan"),
    ("merakit", "meja_perakitan"),
    ("903", "depan_pintu_lab_903_luar"),
    ("902", "depan_pintu_lab_902"),
    ("904", "depan_pintu_lab_904"),
    ("901", "posisi_awal_robot"),
    ("ruang pantry", "ruang_pantry"),
    ("pantry", "ruang_pantry"),
    ("toilet wanita", "depan_toilet_wanita"),
    ("toilet pria", "depan_toilet_pria"),
    ("toilet", "depan_toilet_pria"),
    ("lift terdekat dari pantry", "lift_jauh"),
    ("lift jauh", "lift_jauh"),
    ("lift dekat", "lift_dekat"),
    ("lift terdekat", "lift_dekat"),
    ("ruang keamanan", "ruang_keamanan"),
    ("keamanan", "ruang_keamanan"),
    ("kembali ke lab", "posisi_awal_robot"),
    ("pulang", "posisi_awal_robot"),
)

_HALT_PHRASES = ("berhenti", "stop")

_EXPLORE_PHRASES: tuple[tuple[str, str], ...] = (
    ("jelajahi pantry", "pantry"),
    ("periksa area pantry", "pantry"),
    ("jelajahi lab 901", "lab_901"),
    ("periksa seluruh lab", "lab_901"),
)

_WAIT_RE = re.compile(r"tunggu\s+(\d+(?:[.,]\d+)?)\s*detik")


def mock_ground(world: WaypointWorld, instruction: str) -> str:
    """Keyword-table grounding; emits the wrapped JSON form the prompt
    contract mandates, or an empty actions array when nothing matches."""
    lower = instruction.lower()
    candidates: list[tuple[int, int, str, Any]] = []  # (start, end, kind, target)

    for phrase, waypoint in _GOTO_PHRASES:
        pos = lower.find(phrase)
        while pos != -1:
            candidates.append((pos, pos + len(phrase), "goto", waypoint))
            pos = lower.find(phrase, pos + 1)
    for phrase in _HALT_PHRASES:
        pos = lower.find(phrase)
        while pos != -1:
            candidates.append((pos, pos + len(phrase), "halt", None))
            pos = lower.find(phrase, pos + 1)
    for phrase, zone in _EXPLORE_PHRASES:
        pos = lower.find(phrase)
        while pos != -1:
            candidates.append((pos, pos + len(phrase), "explore", zone))
            pos = lower.find(phrase, pos + 1)
    for match in _WAIT_RE.finditer(lower):
        duration = float(match.group(1).replace(",", "."))
        candidates.append((match.start(), match.end(), "wait", duration))

    # longest phrase claims overlapping spans
    candidates.sort(key=lambda c: (-(c[1] - c[0]), c[0]))
    claimed: list[tuple[int, int]] = []
    surviving: list[tuple[int, int, str, Any]] = []
    for cand in candidates:
        if any(cand[0] < end and cand[1] > start for start, end in claimed):
            continue
        claimed.append((cand[0], cand[1]))
        surviving.append(cand)

    # collapse phrases resolving to the same target to their earliest match
    earliest: dict[tuple[str, Any], tuple[int, int, str, Any]] = {}
    for cand in surviving:
        key = (cand[2], cand[3])
        if key not in earliest or cand[0] < earliest[key][0]:
            earliest[key] = cand

    actions: list[dict[str, Any]] = []
    for start, _, kind, target in sorted(earliest.values(), key=lambda c: c[0]):
        if kind == "goto":
            if target in world.waypoints:
                actions.append({"command": "goto", "parameters": {"waypoint": target}})
        elif kind == "explore":
            if target in world.zones:
                actions.append({"command": "explore", "parameters": {"zone": target}})
        elif kind == "wait":
            actions.append({"command": "wait", "parameters": {"duration": target}})
        else:
            actions.append({"command": "halt", "parameters": {}})
    return json.dumps(
        {"response": {"actions": actions}}, separators=(",", ":"), ensure_ascii=False
    )


class MockProvider:
    """Offline stand-in for the model: deterministic keyword grounding."""

    provider_id = "mock"

    def __init__(self, world: WaypointWorld):
        self.world = world

    def complete(self, bundle: PromptBundle) -> CompletionResult:
        return CompletionResult(
            text=mock_ground(self.world, bundle.user_text),
            latency=0.0,
            attempts=1,
            provider_id=self.provider_id,
        )
