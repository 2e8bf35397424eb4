import argparse
import os
from typing import Literal

from pydantic import BaseModel, Field

SEED_ENV = "CATWORK_SEED"
LOG_LEVEL_ENV = "CATWORK_LOG_LEVEL"


class CliConfig(BaseModel):
    """Options shared by every subcommand."""

    model_path: str | None = None
    tolerance: float | None = Field(None, ge=0)
    budget: int = Field(100, ge=1)
    output_format: Literal["text", "json"] = "text"
    dot_path: str | None = None
    samples: int = Field(100, ge=1)
    seed: int = 0

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "CliConfig":
        """Pick the shared options off parsed arguments; the seed falls
        back to $CATWORK_SEED."""
        seed = getattr(args, "seed", None)
        if seed is None and os.environ.get(SEED_ENV):
            seed = int(os.environ[SEED_ENV])
        values = {
            "model_path": getattr(args, "model", None),
            "tolerance": getattr(args, "tolerance", None),
            "budget": getattr(args, "budget", None),
            "output_format": getattr(args, "format", None),
            "dot_path": getattr(args, "output", None),
            "samples": getattr(args, "samples", None),
            "seed": seed,
        }
        return cls(**{k: v for k, v in values.items() if v is not None})
