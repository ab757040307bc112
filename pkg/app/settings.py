"""Settings loader using Pydantic BaseSettings."""

import hashlib
import json
from pathlib import Path
from typing import Annotated, Any

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict

from app.errors import InputError
from app.fairness.lexicon import LexiconConfig
from app.recommend.elections import DEFAULT_RULES, RuleId, parse_rule
from app.recommend.factorize import FactorizationConfig
from app.synth import SynthConfig


class PathsConfig(BaseModel):
    events: str = "data/events.jsonl"
    corpus: str = "data/corpus.jsonl"
    left_corpus: str = "data/left_corpus.jsonl"
    right_corpus: str = "data/right_corpus.jsonl"
    out_dir: str = "runs"


class PipelineSettings(BaseSettings):
    """Pipeline settings: defaults < environment/.env < config file < CLI flags."""

    kappa: int = Field(default=10, ge=1)
    rules: Annotated[list[RuleId], NoDecode] = Field(default_factory=lambda: list(DEFAULT_RULES))
    rng_seed: int = 0
    log_level: str = "INFO"

    factorization: FactorizationConfig = Field(default_factory=FactorizationConfig)
    lexicon: LexiconConfig = Field(default_factory=LexiconConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="FAIRVOTE_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("rules", mode="before")
    @classmethod
    def _parse_rules(cls, value: Any) -> list[RuleId]:
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        rules = [parse_rule(str(item)) if not isinstance(item, RuleId) else item for item in value]
        if not rules:
            raise ValueError("at least one rule is required")
        # keep first occurrence order, drop repeats
        return list(dict.fromkeys(rules))

    @model_validator(mode="after")
    def _propagate_seed(self) -> "PipelineSettings":
        if self.factorization.rng_seed is None:
            self.factorization.rng_seed = self.rng_seed
        if self.synth.rng_seed is None:
            self.synth.rng_seed = self.rng_seed
        return self

    def run_id(self) -> str:
        """Hash of everything that determines the run's artifacts."""
        payload = {
            "paths": self.paths.model_dump(exclude={"out_dir"}),
            "factorization": self.factorization.model_dump(exclude={"log_every"}),
            "lexicon": self.lexicon.model_dump(),
            "rng_seed": self.rng_seed,
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def run_dir(self) -> Path:
        return Path(self.paths.out_dir) / f"run-{self.run_id()}"


_SECTIONS = {"factorization", "lexicon", "synth", "paths"}


def read_config_file(path: str | Path) -> dict[str, Any]:
    """
    Read a flat ``key = value`` config file into a nested dict.

    Dotted keys address sections, e.g. ``factorization.learning_rate = 0.0002``.

    Args:
        path: Config file location

    Returns:
        Nested dict suitable for PipelineSettings(**data)
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}", stage="config")

    nested: dict[str, Any] = {}
    for key, value in dotenv_values(path).items():
        if value is None:
            raise InputError(f"config key '{key}' has no value", stage="config")
        section, _, field = key.strip().lower().partition(".")
        if not field:
            if section in _SECTIONS:
                raise InputError(
                    f"config key '{key}' names a config section; use '{section}.<field>'",
                    stage="config",
                )
            nested[section] = value
            continue
        if section not in _SECTIONS:
            raise InputError(f"unknown config section '{section}' in key '{key}'", stage="config")
        nested.setdefault(section, {})[field] = value
    return nested


def load_settings(config_path: str | Path | None = None, **overrides: Any) -> PipelineSettings:
    """
    Build settings from an optional config file plus CLI overrides.

    Args:
        config_path: Flat key-value config file, or None for defaults/env only
        overrides: Top-level values (kappa, rules, rng_seed, ...) or dotted keys
            given as ``section__field``; None values are ignored

    Returns:
        Validated PipelineSettings
    """
    data = read_config_file(config_path) if config_path else {}
    for key, value in overrides.items():
        if value is None:
            continue
        section, _, field = key.partition("__")
        if field:
            data.setdefault(section, {})[field] = value
        else:
            data[key] = value

    try:
        return PipelineSettings(**data)
    except ValidationError as e:
        raise InputError(f"invalid configuration: {e}", stage="config") from e
