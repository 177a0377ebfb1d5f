"""Population setup and the partner-selection episode loop.

An episode has three phases.  First every agent picks a partner from the
same pre-episode snapshot of the public environment state.  Then the
games run in ascending selector order: both players in a game observe
the other side's pre-episode public action, move, collect payoffs and
intrinsic rewards, and store the dilemma experience.  Finally the public
state is replaced by each agent's chronologically last move of the
episode, every agent stores its selection experience against the fully
updated state, trains both heads once, and clears its buffers.

All randomness in a run flows through a single generator.  The draw
order is fixed and documented on each function, which is what makes runs
with equal seeds byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agents import (
    AgentState,
    Experience,
    act,
    encode_dilemma_state,
    encode_selection_state,
    make_agent,
    opponent_index_to_id,
    update_heads,
)
from .game import Action, PayoffMatrix
from .moral_rewards import TYPE_ORDER, GameContext, MoralType, RewardParams, intrinsic_reward
from .neural import Hyperparams, NonFiniteError

# the nine standard single-majority population labels
POPULATION_LABELS = tuple(f"majority-{t.label}" for t in TYPE_ORDER)


def population_composition(label: str, n: int = 16) -> dict[MoralType, int]:
    """Composition for a ``majority-<type>`` label: n - 8 agents of the
    majority type plus one agent of each of the other eight types."""
    if label not in POPULATION_LABELS:
        known = ", ".join(POPULATION_LABELS)
        raise ValueError(f"unknown population {label!r}; expected one of: {known}")
    if n < 9:
        raise ValueError(f"a single-majority population needs n >= 9, got {n}")
    majority = MoralType.from_label(label.removeprefix("majority-"))
    comp = {t: 1 for t in TYPE_ORDER}
    comp[majority] = n - 8
    return comp


@dataclass
class PopulationConfig:
    """Everything one simulation run needs besides a seed."""

    label: str
    composition: dict[MoralType, int]
    episodes: int = 30000
    hp: Hyperparams = field(default_factory=Hyperparams)
    payoff: PayoffMatrix = field(default_factory=PayoffMatrix.default)
    rewards: RewardParams = field(default_factory=RewardParams)
    # reward written into the selection experience: the agent's learning
    # reward from its own game ("intrinsic") or the raw payoff ("extrinsic")
    selection_reward: str = "intrinsic"

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError(f"episodes must be >= 1, got {self.episodes}")
        if not self.composition:
            raise ValueError("population composition is empty")
        for t, c in self.composition.items():
            if not isinstance(t, MoralType):
                raise ValueError(f"composition key {t!r} is not an agent type")
            if c < 1:
                raise ValueError(f"composition count for {t.label} must be >= 1, got {c}")
        if self.n < 2:
            raise ValueError("need at least two agents")
        if self.hp.buffer_capacity < self.n:
            # worst case an agent is everyone's partner: n games in one episode
            raise ValueError(
                f"buffer capacity {self.hp.buffer_capacity} cannot hold a worst-case "
                f"episode for {self.n} agents")
        if self.selection_reward not in ("intrinsic", "extrinsic"):
            raise ValueError(
                f"selection_reward must be 'intrinsic' or 'extrinsic', got {self.selection_reward!r}")

    @property
    def n(self) -> int:
        return sum(self.composition.values())

    @classmethod
    def for_label(cls, label: str, n: int = 16, **kwargs) -> "PopulationConfig":
        return cls(label=label, composition=population_composition(label, n), **kwargs)


def population_types(cfg: PopulationConfig) -> list[MoralType]:
    """Type of each agent id: the most numerous type fills the leading
    ids, remaining types follow in canonical type order, each in one
    contiguous block."""
    blocks = sorted(cfg.composition.items(),
                    key=lambda kv: (-kv[1], TYPE_ORDER.index(kv[0])))
    return [t for t, count in blocks for _ in range(count)]


def build_population(cfg: PopulationConfig, rng: np.random.Generator) -> list[AgentState]:
    """Agents laid out per :func:`population_types`, network weights
    drawn from ``rng`` in id order."""
    types = population_types(cfg)
    n = len(types)
    return [
        make_agent(i, t, n, cfg.hp.hidden, cfg.hp.lr, cfg.hp.buffer_capacity, rng)
        for i, t in enumerate(types)
    ]


@dataclass(slots=True)
class PersonalStates:
    """Random per-agent first-episode observations (encoded)."""

    sel: list[np.ndarray]
    dil: list[np.ndarray]


def random_personal_states(n: int, rng: np.random.Generator) -> PersonalStates:
    """Coin-flip initial observations, drawn per agent in id order:
    n - 1 selection entries, then the single dilemma entry."""
    sel, dil = [], []
    for _ in range(n):
        sel.append(rng.integers(0, 2, size=n - 1).astype(np.float64))
        dil.append(rng.integers(0, 2, size=1).astype(np.float64))
    return PersonalStates(sel=sel, dil=dil)


def random_env(n: int, rng: np.random.Generator) -> np.ndarray:
    """Coin-flip initial public actions, one per agent."""
    return rng.integers(0, 2, size=n).astype(np.int8)


@dataclass(slots=True)
class EpisodeRecord:
    """Flat per-episode trace.

    Game arrays are indexed by selector id: selector i played
    ``selections[i]``, moved ``a_sel[i]`` against the partner's
    ``a_opp[i]``, and the game paid ``r_sel_extr[i]`` / ``r_opp_extr[i]``
    with intrinsic rewards ``r_sel_intr[i]`` / ``r_opp_intr[i]``.
    ``losses`` holds each agent's (selection, dilemma) training loss.
    Buffer sizes are captured right before the training step.
    """

    episode: int
    env_before: np.ndarray
    selections: np.ndarray
    a_sel: np.ndarray
    a_opp: np.ndarray
    r_sel_extr: np.ndarray
    r_opp_extr: np.ndarray
    r_sel_intr: np.ndarray
    r_opp_intr: np.ndarray
    sel_buf_sizes: np.ndarray
    dil_buf_sizes: np.ndarray
    losses: np.ndarray
    env_after: np.ndarray


def run_episode(agents: list[AgentState], env: np.ndarray, rng: np.random.Generator,
                cfg: PopulationConfig, episode: int,
                personal: PersonalStates | None = None) -> tuple[EpisodeRecord, np.ndarray]:
    """One full episode; returns the trace and the new public state.

    ``env`` is the pre-episode public state (one action value per agent)
    and is not modified.  ``personal`` replaces the agents' observations
    of it on the very first episode.  Draw order: one partner choice per
    agent in id order (phase 1), then per game in ascending selector
    order the selector's move followed by the partner's (phase 2);
    training draws nothing.
    """
    n = len(agents)
    hp = cfg.hp
    env_pre = env

    # phase 1: everyone picks a partner from the same snapshot
    selections = np.empty(n, dtype=np.int16)
    sel_ks = np.empty(n, dtype=np.int16)
    sel_states: list[np.ndarray] = [None] * n
    for i in range(n):
        s = personal.sel[i] if personal is not None else encode_selection_state(env_pre, i)
        k = act(agents[i].sel_net, s, hp.eps_sel, rng)
        sel_states[i] = s
        sel_ks[i] = k
        selections[i] = opponent_index_to_id(i, k)

    # phase 2: games in ascending selector order
    a_sel = np.empty(n, dtype=np.int8)
    a_opp = np.empty(n, dtype=np.int8)
    r_sel_extr = np.empty(n)
    r_opp_extr = np.empty(n)
    r_sel_intr = np.empty(n)
    r_opp_intr = np.empty(n)
    sel_rewards = np.empty(n)
    extrinsic_sel = cfg.selection_reward == "extrinsic"
    last_action = np.array(env_pre, dtype=np.int8)
    for i in range(n):
        j = int(selections[i])
        ag_i, ag_j = agents[i], agents[j]
        if personal is not None:
            s_i, s_j = personal.dil[i], personal.dil[j]
        else:
            s_i = encode_dilemma_state(env_pre[j])
            s_j = encode_dilemma_state(env_pre[i])
        a_i = act(ag_i.dil_net, s_i, hp.eps_dil, rng)
        a_j = act(ag_j.dil_net, s_j, hp.eps_dil, rng)
        r_i, r_j = cfg.payoff.payoff(a_i, a_j)
        # norm-violation rewards judge the move against the partner's
        # pre-episode public action, even on the first episode
        ctx_i = GameContext(Action(a_i), Action(a_j), Action(int(env_pre[j])), r_i, r_j)
        ctx_j = GameContext(Action(a_j), Action(a_i), Action(int(env_pre[i])), r_j, r_i)
        intr_i = intrinsic_reward(ag_i.moral_type, ctx_i, cfg.rewards)
        intr_j = intrinsic_reward(ag_j.moral_type, ctx_j, cfg.rewards)
        ag_i.dil_buf.append(Experience(s_i, a_i, intr_i, encode_dilemma_state(a_j)))
        ag_j.dil_buf.append(Experience(s_j, a_j, intr_j, encode_dilemma_state(a_i)))
        sel_rewards[i] = r_i if extrinsic_sel else intr_i
        a_sel[i] = a_i
        a_opp[i] = a_j
        r_sel_extr[i], r_opp_extr[i] = r_i, r_j
        r_sel_intr[i], r_opp_intr[i] = intr_i, intr_j
        last_action[i] = a_i
        last_action[j] = a_j

    # phase 3: public state update, selection experiences, training
    env_new = last_action
    sel_buf_sizes = np.empty(n, dtype=np.int16)
    dil_buf_sizes = np.empty(n, dtype=np.int16)
    losses = np.empty((n, 2))
    for i in range(n):
        ag = agents[i]
        s_next = encode_selection_state(env_new, i)
        ag.sel_buf.append(Experience(sel_states[i], int(sel_ks[i]), sel_rewards[i], s_next))
        sel_buf_sizes[i] = len(ag.sel_buf)
        dil_buf_sizes[i] = len(ag.dil_buf)
        losses[i] = update_heads(ag, hp.gamma)
        ag.sel_buf.clear()
        ag.dil_buf.clear()

    record = EpisodeRecord(
        episode=episode,
        env_before=np.array(env_pre, dtype=np.int8),
        selections=selections,
        a_sel=a_sel,
        a_opp=a_opp,
        r_sel_extr=r_sel_extr,
        r_opp_extr=r_opp_extr,
        r_sel_intr=r_sel_intr,
        r_opp_intr=r_opp_intr,
        sel_buf_sizes=sel_buf_sizes,
        dil_buf_sizes=dil_buf_sizes,
        losses=losses,
        env_after=env_new.copy(),
    )
    return record, env_new


@dataclass
class RunLog:
    """One run: config echo, seed, agent types, and the episode traces.

    ``episodes`` is empty when the run was executed in streaming mode;
    ``agents`` carries the final trained heads either way.
    """

    config: PopulationConfig
    seed: int
    agent_types: list[MoralType]
    episodes: list[EpisodeRecord]
    agents: list[AgentState]
    final_env: np.ndarray


def run_simulation(cfg: PopulationConfig, seed: int, keep_episodes: bool = True,
                   on_episode=None) -> RunLog:
    """One seeded run of ``cfg.episodes`` episodes.

    A single generator seeded with ``seed`` drives everything, consumed
    in this order: agent network weights in id order, the initial public
    coin flips, the per-agent personal first observations, then the
    episode draws.  ``on_episode`` (if given) receives each
    :class:`EpisodeRecord` as it is produced; with
    ``keep_episodes=False`` records are not retained afterwards.
    """
    rng = np.random.default_rng(seed)
    agents = build_population(cfg, rng)
    n = len(agents)
    env = random_env(n, rng)
    personal = random_personal_states(n, rng)
    episodes: list[EpisodeRecord] = []
    for ep in range(cfg.episodes):
        try:
            record, env = run_episode(agents, env, rng, cfg, ep,
                                      personal=personal if ep == 0 else None)
        except NonFiniteError as e:
            raise NonFiniteError(f"run aborted at episode {ep}: {e}") from e
        if on_episode is not None:
            on_episode(record)
        if keep_episodes:
            episodes.append(record)
    return RunLog(
        config=cfg,
        seed=seed,
        agent_types=[a.moral_type for a in agents],
        episodes=episodes,
        agents=agents,
        final_env=env,
    )
