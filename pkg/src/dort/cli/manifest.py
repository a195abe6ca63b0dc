"""Run manifests: enough to replay a command into a fresh output location."""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, ValidationError

from .. import __version__
from ..config import ExperimentConfig
from ..utils.logger import get_logger

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunManifest(BaseModel):
    """Snapshot of one CLI invocation.

    ``argv`` is the subcommand's argument list as given; ``output_arg``
    names the flag holding the output location so a replay can redirect it.
    """

    command: str
    argv: list[str]
    config: dict[str, Any] = Field(default_factory=dict)
    seeds: dict[str, int] = Field(default_factory=dict)
    artifacts: list[str] = Field(default_factory=list)
    version: str = __version__
    started_at: str = Field(default_factory=_now)
    finished_at: str | None = None
    output_arg: str = "--out"
    output_is_dir: bool = True

    @classmethod
    def start(
        cls,
        command: str,
        argv: list[str],
        cfg: ExperimentConfig | None = None,
        seeds: dict[str, int] | None = None,
        output_is_dir: bool = True,
    ) -> RunManifest:
        return cls(
            command=command,
            argv=list(argv),
            config=cfg.to_dict() if cfg is not None else {},
            seeds=seeds or {},
            output_is_dir=output_is_dir,
        )

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2))
        logger.debug(f"Wrote manifest {path}")
        return path

    def finish(self, path: str | Path, artifacts: list[str | Path]) -> Path:
        self.artifacts = [str(a) for a in artifacts]
        self.finished_at = _now()
        return self.write(path)

    def experiment_config(self) -> ExperimentConfig | None:
        return ExperimentConfig.from_dict(self.config) if self.config else None


def load_manifest(path: str | Path) -> RunManifest:
    """Read a manifest.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ValueError: The file is not a valid manifest.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    try:
        return RunManifest.model_validate_json(path.read_text())
    except ValidationError as e:
        raise ValueError(f"invalid manifest {path}: {e}") from e


__all__ = ["MANIFEST_NAME", "RunManifest", "load_manifest"]
