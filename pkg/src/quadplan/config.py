"""Service configuration: file-based with CLI overrides.

Paths default to the packaged fixtures so `quadplan serve --mock` works
out of the box; referenced files are checked at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .llm_provider import ProviderConfig
from .mission_exec import RECOVERY_POLICIES
from .nav_sim import DEFAULT_CRUISE_SPEED

__all__ = ["ConfigError", "ServiceConfig", "load_config", "packaged_data_path"]


class ConfigError(ValueError):
    pass


def packaged_data_path(name: str) -> Path:
    return Path(str(resources.files("quadplan.data").joinpath(name)))


@dataclass(slots=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    map_path: Path = field(default_factory=lambda: packaged_data_path("tower2_floor9.json"))
    template_path: Path = field(
        default_factory=lambda: packaged_data_path("default_template.json")
    )
    use_mock: bool = True
    provider: ProviderConfig | None = None
    cruise_speed: float = DEFAULT_CRUISE_SPEED
    realtime: bool = False
    recovery_policy: str = "abort_mission"
    invalid_output_retry: bool = False
    outcome_log: Path | None = None
    record_log: Path | None = None
    console_dir: Path | None = None
    faults: list[dict[str, Any]] = field(default_factory=list)

    def validate(self) -> None:
        if not 0 < self.port < 65536:
            raise ConfigError(f"port out of range: {self.port}")
        if not self.map_path.exists():
            raise ConfigError(f"map file not found: {self.map_path}")
        if not self.template_path.exists():
            raise ConfigError(f"template file not found: {self.template_path}")
        if self.cruise_speed <= 0:
            raise ConfigError("cruise_speed must be positive")
        if self.recovery_policy not in RECOVERY_POLICIES:
            raise ConfigError(f"unknown recovery policy {self.recovery_policy!r}")
        if not self.use_mock and self.provider is None:
            raise ConfigError("a provider section is required unless the mock is enabled")
        if self.console_dir is not None and not self.console_dir.is_dir():
            raise ConfigError(f"console_dir is not a directory: {self.console_dir}")


def load_config(path: str | Path | None = None, **overrides: Any) -> ServiceConfig:
    """Read a JSON config file, apply keyword overrides, validate."""
    doc: dict[str, Any] = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigError(f"config file not found: {file_path}")
        try:
            doc = json.loads(file_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{file_path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None

    config = ServiceConfig()
    if "host" in doc:
        config.host = str(doc["host"])
    if "port" in doc:
        config.port = int(doc["port"])
    if "map" in doc:
        config.map_path = Path(doc["map"])
    if "template" in doc:
        config.template_path = Path(doc["template"])
    if "cruise_speed" in doc:
        config.cruise_speed = float(doc["cruise_speed"])
    if "pacing" in doc:
        if doc["pacing"] not in ("fast", "realtime"):
            raise ConfigError(f"pacing must be fast or realtime, got {doc['pacing']!r}")
        config.realtime = doc["pacing"] == "realtime"
    if "recovery_policy" in doc:
        config.recovery_policy = str(doc["recovery_policy"])
    if "invalid_output_retry" in doc:
        config.invalid_output_retry = bool(doc["invalid_output_retry"])
    if "outcome_log" in doc and doc["outcome_log"]:
        config.outcome_log = Path(doc["outcome_log"])
    if "record_log" in doc and doc["record_log"]:
        config.record_log = Path(doc["record_log"])
    if "console_dir" in doc and doc["console_dir"]:
        config.console_dir = Path(doc["console_dir"])
    if "faults" in doc:
        config.faults = list(doc["faults"])

    provider_doc = doc.get("provider")
    if isinstance(provider_doc, dict):
        if provider_doc.get("mock"):
            config.use_mock = True
        else:
            config.use_mock = False
            try:
                config.provider = ProviderConfig(
                    endpoint_url=str(provider_doc["endpoint_url"]),
                    model_name=str(provider_doc["model_name"]),
                    api_key_env=str(provider_doc.get("api_key_env", "QUADPLAN_API_KEY")),
                    timeout=float(provider_doc.get("timeout", 30.0)),
                    max_retries=int(provider_doc.get("max_retries", 2)),
                    temperature=float(provider_doc.get("temperature", 0.0)),
                )
            except KeyError as exc:
                raise ConfigError(f"provider section is missing {exc}") from None

    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(config, key):
            raise ConfigError(f"unknown config override {key!r}")
        setattr(config, key, value)

    config.validate()
    return config
