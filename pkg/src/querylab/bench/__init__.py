from .config import KINDS, ExperimentConfig, InvalidConfig, load_config, loads_config, parse_range
from .experiments import comparable, read_records, run_experiment, trial_seed
from .report import report, write_report
