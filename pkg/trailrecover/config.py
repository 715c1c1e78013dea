"""
Pipeline Configuration

One declarative document holding every option of an experiment. A single
master seed fans out into per-stage seeds.
"""

from __future__ import annotations
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

from .degrade import DegradeSpec, DegradeStrategy
from .errors import ConfigError
from .formats import PathLike, read_json, write_json
from .preprocess import GapPolicy
from .seeding import derive_seed
from .solvers import DEFAULT_EXACT_BUDGET, STRATEGIES, AcsParams
from .synth import GeneratorSpec
from .trail_model import TimeUnit
from .transition import SmoothingPolicy

STAGES = ("synth", "degrade", "solver")

# Ablation conditions: (label, add sentinels, partition at gaps)
ABLATION_CONDITIONS = (
    ("neither", False, False),
    ("sentinels", True, False),
    ("full", True, True),
)


@dataclass
class PipelineConfig:
    """Everything run_pipeline needs.

    The ``seed`` fields of the nested specs are replaced by stage seeds:
    ``seeds[stage]`` when given, else ``derive_seed(master_seed, stage)``.
    ``sweep`` lists resolutions or mutation sizes, depending on the
    degrade strategy; empty means the single value in ``degrade``.
    """

    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    degrade: DegradeSpec = field(default_factory=DegradeSpec)
    gap: GapPolicy = field(default_factory=GapPolicy)
    smoothing: SmoothingPolicy = field(default_factory=SmoothingPolicy)
    acs: AcsParams = field(default_factory=AcsParams)

    strategies: List[str] = field(default_factory=lambda: list(STRATEGIES))
    exact_budget: int = DEFAULT_EXACT_BUDGET
    exact_fallback: bool = False
    sweep: List[int] = field(default_factory=list)
    replicates: int = 1
    ablation: bool = False
    sentinels: bool = True
    partition: bool = True
    rank: bool = True
    rank_strategy: Optional[str] = None

    master_seed: int = 42
    seeds: Dict[str, int] = field(default_factory=dict)
    input: Optional[str] = None
    time_unit: TimeUnit = TimeUnit.TICKS
    record_timing: bool = False

    def __post_init__(self):
        if not isinstance(self.time_unit, TimeUnit):
            self.time_unit = TimeUnit(self.time_unit)
        if not self.strategies:
            raise ConfigError("At least one strategy must be enabled")
        unknown = [s for s in self.strategies if s not in STRATEGIES]
        if unknown:
            raise ConfigError(f"Unknown strategies: {', '.join(unknown)}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError("Strategies must not repeat")
        if self.exact_budget < 1:
            raise ConfigError(f"exact_budget must be >= 1, got {self.exact_budget}")
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if any(value < 2 for value in self.sweep):
            raise ConfigError(f"Sweep values must be >= 2, got {self.sweep}")
        if self.rank_strategy is not None and self.rank_strategy not in self.strategies:
            raise ConfigError(
                f"rank_strategy {self.rank_strategy!r} is not an enabled strategy"
            )
        bad_stages = set(self.seeds) - set(STAGES)
        if bad_stages:
            raise ConfigError(f"Unknown seed stages: {', '.join(sorted(bad_stages))}")

    def stage_seed(self, stage: str) -> int:
        if stage in self.seeds:
            return int(self.seeds[stage])
        return derive_seed(self.master_seed, stage)

    @property
    def ranking_strategy(self) -> str:
        """Strategy whose recovered trails feed the case study."""
        if self.rank_strategy:
            return self.rank_strategy
        return "acs" if "acs" in self.strategies else self.strategies[0]

    def degrade_specs(self) -> List[DegradeSpec]:
        """One DegradeSpec per sweep value, seeded for the degrade stage."""
        base = replace(self.degrade, seed=self.stage_seed("degrade"))
        if not self.sweep:
            return [base]
        if base.strategy is DegradeStrategy.RESOLUTION:
            return [replace(base, resolution=value) for value in self.sweep]
        return [replace(base, v=value) for value in self.sweep]

    def conditions(self):
        """(label, sentinels, partition) for every preprocessing condition."""
        if self.ablation:
            return list(ABLATION_CONDITIONS)
        return [("main", self.sentinels, self.partition)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "generator": _plain(self.generator),
            "degrade": {**_plain(self.degrade), "strategy": self.degrade.strategy.value},
            "gap": _plain(self.gap),
            "smoothing": {
                "mode": self.smoothing.mode.value,
                "floor_prob": self.smoothing.floor_prob,
            },
            "acs": _plain(self.acs),
            "strategies": list(self.strategies),
            "exact_budget": self.exact_budget,
            "exact_fallback": self.exact_fallback,
            "sweep": list(self.sweep),
            "replicates": self.replicates,
            "ablation": self.ablation,
            "sentinels": self.sentinels,
            "partition": self.partition,
            "rank": self.rank,
            "rank_strategy": self.rank_strategy,
            "master_seed": self.master_seed,
            "seeds": dict(self.seeds),
            "input": self.input,
            "time_unit": self.time_unit.value,
            "record_timing": self.record_timing,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PipelineConfig":
        """Inverse of to_dict; missing keys take their defaults.

        Raises:
            ConfigError: on unknown keys or invalid values.
        """
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        nested = {
            "generator": GeneratorSpec,
            "degrade": DegradeSpec,
            "gap": GapPolicy,
            "smoothing": SmoothingPolicy,
            "acs": AcsParams,
        }
        try:
            for key, spec_cls in nested.items():
                if key in data:
                    data[key] = spec_cls(**data[key])
            return cls(**data)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid config: {e}") from e

    @classmethod
    def load(cls, path: PathLike) -> "PipelineConfig":
        data = read_json(path)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def save(self, path: PathLike):
        write_json(path, self.to_dict())


def _plain(spec: Any) -> Dict[str, Any]:
    return {f.name: getattr(spec, f.name) for f in fields(spec)}
