from .config import DEFAULT_BUDGET, ExperimentConfig, load_config, parse_config
from .grid import estimated_evaluations, expand_grid, schedule_static
from .pipelines import (PipelineTrigger, await_trigger, run_all, run_node, run_pipeline_1, run_pipeline_2,
                        run_pipeline_3)
from .store import ObjectStore
