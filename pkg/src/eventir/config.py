"""YAML pipeline configuration. Relative paths resolve against the config file."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from eventir.errors import ConfigError
from eventir.fusion import DEFAULT_RRF_K, BoostParams
from eventir.lexical import DEFAULT_B, DEFAULT_K1

SLOT_NAMES = ("a", "b")


@dataclass
class SlotConfig:
    images: Path | None = None
    queries: Path | None = None
    model_tag: str | None = None
    boost: BoostParams = field(default_factory=BoostParams)


@dataclass
class PipelineConfig:
    articles: Path | None = None
    images: Path | None = None
    queries: Path | None = None
    entities: Path | None = None
    ground_truth: Path | None = None
    index_dir: Path | None = None
    stopwords: Path | None = None
    stem: bool = False
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    gazetteer: Path | None = None
    synonyms: Path | None = None
    entity_weights: dict[str, float] = field(default_factory=dict)
    rrf_k: float = DEFAULT_RRF_K
    top_k_articles: int = 30
    top_n_images: int = 10
    branch_depth: int = 100
    workers: int = 1
    slots: dict[str, SlotConfig] = field(default_factory=lambda: {n: SlotConfig() for n in SLOT_NAMES})

    def __post_init__(self):
        for name in ("top_k_articles", "top_n_images", "branch_depth", "workers"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        if not self.rrf_k > 0:
            raise ConfigError(f"rrf_k must be positive, got {self.rrf_k!r}")

    def referenced_files(self) -> dict[str, Path]:
        out = {}
        for name in ("articles", "images", "queries", "entities", "ground_truth", "stopwords",
                     "gazetteer", "synonyms"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        for slot, sc in self.slots.items():
            if sc.images is not None:
                out[f"slots.{slot}.images"] = sc.images
            if sc.queries is not None:
                out[f"slots.{slot}.queries"] = sc.queries
        return out

    def check_files(self, *required: str) -> None:
        files = self.referenced_files()
        for name in required:
            if name not in files:
                raise ConfigError(f"config does not set {name}")
        for name, path in files.items():
            if not Path(path).exists():
                raise ConfigError(f"{name}: file not found: {path}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in list(d.items()):
            if isinstance(v, Path):
                d[k] = str(v)
        for sc in d["slots"].values():
            for k in ("images", "queries"):
                if sc[k] is not None:
                    sc[k] = str(sc[k])
        return d


_PATH_KEYS = {"articles", "images", "queries", "entities", "ground_truth", "index_dir",
              "stopwords", "gazetteer", "synonyms"}


def _resolve(base: Path, value) -> Path | None:
    if value is None:
        return None
    p = Path(str(value))
    return p if p.is_absolute() else base / p


def config_from_dict(raw: Mapping[str, Any], base: Path | None = None) -> PipelineConfig:
    base = base or Path.cwd()
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        if key == "slots":
            continue
        kwargs[key] = _resolve(base, value) if key in _PATH_KEYS else value
    slots = {}
    raw_slots = raw.get("slots") or {}
    if not isinstance(raw_slots, Mapping) or set(raw_slots) - set(SLOT_NAMES):
        raise ConfigError(f"slots must be a mapping with keys {SLOT_NAMES}")
    for name in SLOT_NAMES:
        sraw = dict(raw_slots.get(name) or {})
        extra = set(sraw) - {"images", "queries", "model_tag", "boost"}
        if extra:
            raise ConfigError(f"unknown keys in slots.{name}: {sorted(extra)}")
        try:
            boost = BoostParams(**(sraw.get("boost") or {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"slots.{name}.boost: {exc}") from None
        slots[name] = SlotConfig(
            images=_resolve(base, sraw.get("images")),
            queries=_resolve(base, sraw.get("queries")),
            model_tag=sraw.get("model_tag"),
            boost=boost,
        )
    kwargs["slots"] = slots
    try:
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(raw, path.parent)
