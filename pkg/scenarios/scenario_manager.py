# scenarios/scenario_manager.py - Scenario registry and run lifecycle
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Type

from fields.errors import EspaceError, MissingSection

from .artifact_writer import ArtifactWriter
from .commands import COMMAND_TYPES, ScenarioCommand
from .config import ScenarioConfig

logger = logging.getLogger(__name__)

TOOL_VERSION = '0.3.0'
MANIFEST_NAME = 'manifest.json'


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any]
    tool_version: str
    derived: Dict[str, Any]
    artifacts: List[str] = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ScenarioManager:
    """Resolves commands by name and runs them into an output directory"""

    def __init__(self, out_dir: str, threads: int = 1):
        self.out_dir = out_dir
        self.threads = threads
        self.commands: Dict[str, Type[ScenarioCommand]] = {}
        for command_type in COMMAND_TYPES.values():
            self.register(command_type)

    def register(self, command_type: Type[ScenarioCommand]):
        self.commands[command_type.name] = command_type
        logger.debug(f"Registered scenario command '{command_type.name}'")

    def get_command(self, name: str) -> Type[ScenarioCommand]:
        if name not in self.commands:
            raise MissingSection(f"unknown command '{name}'")
        return self.commands[name]

    def available_commands(self) -> List[str]:
        return sorted(self.commands)

    def run(self, config: ScenarioConfig) -> RunManifest:
        command_type = self.get_command(config.command)
        writer = ArtifactWriter(self.out_dir)
        started = time.perf_counter()
        try:
            derived = command_type(config, writer, self.threads).execute()
        except EspaceError as e:
            logger.error(f"{config.command} scenario failed: {type(e).__name__}: {e}")
            raise
        manifest = RunManifest(
            command=config.command,
            config=config.to_dict(),
            tool_version=TOOL_VERSION,
            derived=derived,
            artifacts=writer.get_written(),
            wall_time=time.perf_counter() - started,
        )
        writer.write_json(MANIFEST_NAME, manifest.to_dict())
        return manifest


def run_scenario(config: ScenarioConfig, out_dir: Optional[str] = None, threads: int = 1) -> RunManifest:
    """Run one scenario; out_dir falls back to the config's output_dir, then 'output'"""
    target = out_dir or config.output_dir or 'output'
    return ScenarioManager(target, threads).run(config)
