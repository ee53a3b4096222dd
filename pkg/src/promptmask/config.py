"""Gateway configuration: file loading (TOML/JSON) and LG_* env overrides."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DETECTOR_MODES = ("pattern", "llm", "ner-service", "hybrid")

ENV_PREFIX = "LG_"


@dataclass
class GatewayConfig:
    upstream_url: str = "echo"
    model: str = "external-llm"
    temperature: float = 0.0
    detector: str = "pattern"            # pattern | llm | ner-service | hybrid
    gazetteer_path: str | None = None    # pattern detector inputs
    ner_endpoint: str | None = None      # ner-service detector
    detector_llm_url: str | None = None  # llm detector upstream
    detector_llm_model: str = "detector-llm"
    detector_params: dict = field(default_factory=dict)  # pass-through knobs
    timeout_seconds: float = 60.0
    vault_dir: str = "./sessions"
    listen: str = "127.0.0.1:8120"
    per_prompt_vault_reset: bool = False

    def validate(self) -> "GatewayConfig":
        if self.detector not in DETECTOR_MODES:
            raise ValueError(f"detector must be one of {DETECTOR_MODES}, not {self.detector!r}")
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be > 0")
        if self.detector == "ner-service" and not self.ner_endpoint:
            raise ValueError("ner-service detector requires ner_endpoint")
        if self.detector == "llm" and not self.detector_llm_url:
            raise ValueError("llm detector requires detector_llm_url")
        return self

    @property
    def listen_host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def listen_port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])

    def detector_snapshot(self) -> dict:
        """The detector-relevant fields recorded with each session."""
        return {
            "detector": self.detector,
            "gazetteer_path": self.gazetteer_path,
            "ner_endpoint": self.ner_endpoint,
            "detector_llm_url": self.detector_llm_url,
            "detector_llm_model": self.detector_llm_model,
            "detector_params": dict(self.detector_params),
        }


_FIELD_TYPES = {f.name: f.type for f in fields(GatewayConfig)}


def _coerce(name: str, raw: str):
    if name in ("temperature", "timeout_seconds"):
        return float(raw)
    if name == "per_prompt_vault_reset":
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if name == "detector_params":
        return json.loads(raw)
    return raw


def load_config(path: str | Path | None = None, env: dict | None = None) -> GatewayConfig:
    """Build a config from an optional TOML/JSON file plus environment
    overrides (LG_<FIELD_NAME>, e.g. LG_UPSTREAM_URL)."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        if path.suffix == ".json":
            data = json.loads(path.read_text(encoding="utf-8"))
        else:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
    env = os.environ if env is None else env
    for name in _FIELD_TYPES:
        key = ENV_PREFIX + name.upper()
        if key in env:
            data[name] = _coerce(name, env[key])
    unknown = set(data) - set(_FIELD_TYPES)
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return GatewayConfig(**data).validate()
