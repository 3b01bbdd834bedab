"""Run configuration: a flat key = value file with CLI overrides.

Format: one ``key = value`` assignment per line, ``#`` starts a comment,
blank lines are ignored. Values are strings; list-valued keys use commas.
Flags passed as ``--set key=value`` override file entries. The configuration
hash recorded in report headers is a SHA-256 over the sorted effective
key=value pairs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(Exception):
    pass


_PATH_KEYS = ("wordnet_dir", "soc_csv", "curation_removed", "curation_manual",
              "corpus_dir", "metadata", "cast_list", "employment_csv",
              "output_dir", "map_titles_file")
_LIST_KEYS = ("map_titles", "analyze_titles", "analyze_groups")
_INT_KEYS = ("srd", "min_config_titles", "seed", "year_min", "year_max")
_FLOAT_KEYS = ("alpha",)


@dataclass
class RunConfig:
    # paths
    wordnet_dir: Path | None = None
    soc_csv: Path | None = None
    curation_removed: Path | None = None     # None -> shipped starter file
    curation_manual: Path | None = None
    corpus_dir: Path | None = None
    metadata: Path | None = None
    cast_list: Path | None = None
    employment_csv: Path | None = None
    output_dir: Path | None = None
    map_titles_file: Path | None = None
    # provider endpoints (empty -> in-core baselines)
    wsd_endpoint: str = ""
    ner_endpoint: str = ""
    absa_endpoint: str = ""
    # thresholds
    srd: int = 3
    srd_mode: str = "CDW"
    alpha: float = 0.05
    min_config_titles: int = 30
    seed: int = 0
    year_min: int = 1950
    year_max: int = 2017
    # subject selections (empty lists mean "all applicable")
    map_titles: list[str] = field(default_factory=list)
    analyze_titles: list[str] = field(default_factory=list)
    analyze_groups: list[str] = field(default_factory=list)
    wordnet_version: str = "3.0"
    deterministic: bool = False

    def validate(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.min_config_titles < 1:
            raise ConfigError("min_config_titles must be >= 1")
        if self.srd < 0:
            raise ConfigError("srd must be >= 0")
        if self.srd_mode not in ("CDM", "CDW"):
            raise ConfigError(f"srd_mode must be CDM or CDW, got {self.srd_mode!r}")

    def require_paths(self, *names: str) -> None:
        for name in names:
            value: Path | None = getattr(self, name)
            if value is None:
                raise ConfigError(f"config key {name!r} is required for this command")
            if not value.exists():
                raise ConfigError(f"{name}: path does not exist: {value}")

    def config_hash(self) -> str:
        parts = []
        for f in sorted(fld.name for fld in fields(self)):
            if f == "deterministic":
                continue
            value = getattr(self, f)
            if isinstance(value, list):
                value = ",".join(value)
            parts.append(f"{f}={value}")
        return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()[:12]


def parse_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = body.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def build_config(file_path: str | Path | None,
                 overrides: dict[str, str] | None = None,
                 deterministic: bool = False) -> RunConfig:
    raw: dict[str, str] = {}
    base_dir = Path.cwd()
    if file_path is not None:
        raw.update(parse_config_file(file_path))
        base_dir = Path(file_path).resolve().parent
    raw.update(overrides or {})

    known = {fld.name for fld in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    kwargs: dict = {}
    for key, value in raw.items():
        if key in _PATH_KEYS:
            path = Path(value)
            kwargs[key] = path if path.is_absolute() else (base_dir / path)
        elif key in _LIST_KEYS:
            kwargs[key] = [part.strip() for part in value.split(",") if part.strip()]
        elif key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
        elif key in _FLOAT_KEYS:
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
        elif key == "deterministic":
            kwargs[key] = value.lower() in ("1", "true", "yes")
        else:
            kwargs[key] = value
    config = RunConfig(**kwargs)
    if deterministic:
        config.deterministic = True
    config.validate()
    return config
