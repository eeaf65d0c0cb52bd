"""Pipeline configuration: JSON round-trip and content digests."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .classifiers import ClassifierSpec, default_specs
from .embedding import TsneConfig
from .metaeval import META_REPEATS, META_SIZES
from .metafeatures import TEST_SIZE, TRAIN_SIZES, VARIANTS

BUILTIN_SUITE = "builtin-suite"
DEFAULT_ROOT_SEED = 1729


@dataclass
class PipelineConfig:
    root_seed: int = DEFAULT_ROOT_SEED
    problems: str | list[str] = BUILTIN_SUITE
    repeats: int = 20
    train_fraction: float = 0.7
    train_sizes: tuple[int, ...] = TRAIN_SIZES
    test_size: int = TEST_SIZE
    classifiers: list[ClassifierSpec] = field(default_factory=default_specs)
    variants: tuple[str, ...] = VARIANTS
    tsne: TsneConfig = field(default_factory=TsneConfig)
    meta_sizes: tuple[int, ...] = META_SIZES
    meta_repeats: int = META_REPEATS
    out_dir: str = "probsim-out"
    workers: int | None = None

    def __post_init__(self):
        self.train_sizes = tuple(int(s) for s in self.train_sizes)
        self.meta_sizes = tuple(int(s) for s in self.meta_sizes)
        self.variants = tuple(self.variants)
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if any(b <= a for a, b in zip(self.train_sizes, self.train_sizes[1:])):
            raise ValueError("train_sizes must be strictly ascending")
        if any(b <= a for a, b in zip(self.meta_sizes, self.meta_sizes[1:])):
            raise ValueError("meta_sizes must be strictly ascending")
        if not self.variants or any(v not in VARIANTS for v in self.variants):
            raise ValueError(f"variants must be a non-empty subset of {VARIANTS}")
        if isinstance(self.problems, str) and self.problems != BUILTIN_SUITE:
            raise ValueError(f"problems must be {BUILTIN_SUITE!r} or a list of CSV paths")

    def to_dict(self) -> dict:
        return {
            "root_seed": self.root_seed,
            "problems": self.problems,
            "repeats": self.repeats,
            "train_fraction": self.train_fraction,
            "train_sizes": list(self.train_sizes),
            "test_size": self.test_size,
            "classifiers": [s.to_config() for s in self.classifiers],
            "variants": list(self.variants),
            "tsne": {
                "perplexity": self.tsne.perplexity,
                "restarts": self.tsne.restarts,
                "iterations": self.tsne.iterations,
                "learning_rate": self.tsne.learning_rate,
                "momentum_start": self.tsne.momentum_start,
                "momentum_final": self.tsne.momentum_final,
                "momentum_switch_iter": self.tsne.momentum_switch_iter,
                "exaggeration": self.tsne.exaggeration,
                "exaggeration_iters": self.tsne.exaggeration_iters,
            },
            "meta_eval": {"sizes": list(self.meta_sizes), "repeats": self.meta_repeats},
            "out_dir": self.out_dir,
            "workers": self.workers,
        }

    @staticmethod
    def from_dict(doc: dict) -> "PipelineConfig":
        doc = dict(doc)
        kwargs: dict = {}
        for key in ("root_seed", "problems", "repeats", "train_fraction", "train_sizes",
                    "test_size", "variants", "out_dir", "workers"):
            if key in doc:
                kwargs[key] = doc[key]
        if "classifiers" in doc:
            kwargs["classifiers"] = [ClassifierSpec.from_config(c) for c in doc["classifiers"]]
        if "tsne" in doc:
            kwargs["tsne"] = TsneConfig(**doc["tsne"])
        if "meta_eval" in doc:
            kwargs["meta_sizes"] = tuple(doc["meta_eval"]["sizes"])
            kwargs["meta_repeats"] = doc["meta_eval"]["repeats"]
        return PipelineConfig(**kwargs)

    @staticmethod
    def load(path) -> "PipelineConfig":
        with open(str(path), encoding="utf-8") as fh:
            return PipelineConfig.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(str(path), "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def grid_digest(self) -> str:
        """Digest of everything that determines the accuracy grids (so cached
        grids survive changes to embedding/meta-eval settings)."""
        doc = self.to_dict()
        keep = {k: doc[k] for k in (
            "root_seed", "problems", "repeats", "train_fraction",
            "train_sizes", "test_size", "classifiers",
        )}
        blob = json.dumps(keep, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()
