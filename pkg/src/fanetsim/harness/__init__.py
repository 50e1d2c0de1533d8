from .config import ConfigError, ScenarioConfig, dump_scenario, load_scenario, parse_scenario
from .run import RunResult, run_scenario
