"""Populations of Q-learning agents with heterogeneous moral rewards
playing the iterated prisoner's dilemma with partner selection."""

from .game import Action, PayoffMatrix, payoff
from .moral_rewards import (
    TYPE_ORDER,
    GameContext,
    MoralType,
    RewardParams,
    intrinsic_reward,
    learning_reward,
)
from .neural import (
    AdamState,
    Hyperparams,
    NonFiniteError,
    QNetwork,
    adam_step,
    forward,
    forward_batch,
    init_network,
    load_network,
    net_state,
    td_loss_and_grad,
)
from .agents import (
    AgentState,
    Experience,
    ReplayBuffer,
    act,
    encode_dilemma_state,
    encode_selection_state,
    make_agent,
    opponent_id_to_index,
    opponent_index_to_id,
    update_heads,
)
from .simulation import (
    POPULATION_LABELS,
    EpisodeRecord,
    PersonalStates,
    PopulationConfig,
    RunLog,
    build_population,
    population_composition,
    population_types,
    random_env,
    random_personal_states,
    run_episode,
    run_simulation,
)
from .metrics import (
    SelectionMatrix,
    SocialOutcomes,
    action_pair_counts,
    cooperation_rate,
    cumulative_rewards,
    moving_average,
    normalize_intrinsic,
    selection_matrix,
    selection_popularity,
    social_outcomes,
    top_selection_edges,
)
from .experiment import ExperimentConfig, load_runlog, run_experiment

__version__ = "0.1.0"
