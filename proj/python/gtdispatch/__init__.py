"""Gas-turbine economic dispatch: simulator, O&M accounting, oracle and agents."""

from ._core import (
    ActionKind,
    AlignmentError,
    Ambient,
    ConfigError,
    DispatchEnv,
    DomainError,
    EnvConfig,
    ExperimentConfig,
    GtMode,
    GtState,
    OmParameters,
    OmVariant,
    ParseError,
    Scenario,
    SurrogateParams,
    TrainingError,
    UsageError,
    compare_om,
    dp_optimal,
    epsilon_for_episode,
    fuel_rate,
    load_scenario,
    max_power,
    om_step,
    read_episodes,
    report,
    synthetic_scenario,
    train,
    write_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
