from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional


class ConfigError(ValueError):
    pass


@dataclass
class RegressorConfig:
    """Hyper-parameters of the logical-location regressor and its training.

    ``lr_decay_epochs`` default to 70% and 90% of ``epochs`` when left empty,
    each decay dividing the rate by ``lr_decay_factor``.
    """

    d: int = 64
    heads: int = 4
    ffn: int = 128
    layers_base: int = 3
    layers_stack: int = 3
    cascade: bool = True
    epochs: int = 100
    lr: float = 1e-3
    lr_decay_epochs: tuple[int, ...] = ()
    lr_decay_factor: float = 10.0
    grad_clip: Optional[float] = 5.0
    loss_inter: bool = True
    loss_intra: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        self.lr_decay_epochs = tuple(int(e) for e in self.lr_decay_epochs)

    def validate(self) -> "RegressorConfig":
        if self.d <= 0 or self.heads <= 0 or self.d % self.heads:
            raise ConfigError(f"d={self.d} must be a positive multiple of heads={self.heads}")
        if self.d % 4:
            raise ConfigError("d must be divisible by 4 for the 2-D position embedding")
        if self.layers_base < 1 or (self.cascade and self.layers_stack < 1):
            raise ConfigError("layer counts must be >= 1")
        if self.ffn < 1 or self.epochs < 0:
            raise ConfigError("ffn must be >= 1 and epochs >= 0")
        if not self.lr > 0 or not self.lr_decay_factor > 0:
            raise ConfigError("learning rate and decay factor must be > 0")
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise ConfigError("grad_clip must be > 0 or None")
        return self

    def decay_epochs(self) -> tuple[int, ...]:
        if self.lr_decay_epochs:
            return self.lr_decay_epochs
        return (int(round(0.7 * self.epochs)), int(round(0.9 * self.epochs)))

    def lr_at(self, epoch: int) -> float:
        """Learning rate for 0-based ``epoch``."""
        drops = sum(epoch >= e for e in self.decay_epochs())
        return self.lr / self.lr_decay_factor**drops

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "RegressorConfig":
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown regressor config keys: {sorted(extra)}")
        return cls(**obj)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
