"""Deterministic agent-based simulator of traders' channel choices with peer
effects, an evolutionary calibrator, null-model baselines and policy
scenarios."""

from ._kernels import KERNEL_NAME
from .calibration import GAConfig, FitnessTrace, evaluate, ga_run, normalized_params
from .dataio import (
    PlantedTruth,
    SyntheticConfig,
    gen_synthetic,
    load_dataset,
    reduced_sample,
    save_dataset,
)
from .domain import (
    BuyerAgent,
    Dataset,
    DistanceMatrix,
    GlobalParams,
    SellerAgent,
    SocialLink,
    TradingLink,
    validate,
)
from .errors import DataLoadError, TradenetError
from .metrics import ObservationRecord, components, correct_links, scenario_indicators
from .nullmodels import NullModelKind, run_null
from .scenarios import ScenarioSpec, apply_scenario, run_scenario
from .simulation import (
    ModelState,
    RunReport,
    SimOptions,
    init_model,
    predict_n_buyer,
    run,
    step,
)

__version__ = "0.1.0"
