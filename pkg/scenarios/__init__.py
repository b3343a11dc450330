# scenarios package - Scenario configuration, orchestration and output
from .config import ScenarioConfig, parse_config, load_config
from .scenario_manager import RunManifest, ScenarioManager, run_scenario

__all__ = ['ScenarioConfig', 'parse_config', 'load_config', 'RunManifest', 'ScenarioManager', 'run_scenario']
