"""Agents: two Q-learning heads, episode-scoped replay, action selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .game import Action
from .moral_rewards import MoralType
from .neural import AdamState, QNetwork, adam_step, forward, init_network, td_loss_and_grad


class Experience(NamedTuple):
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray


class ReplayBuffer:
    """Bounded episode-scoped experience store.

    Appending beyond capacity is a programming error in the episode
    loop, not a signal to evict, so it raises instead of dropping.
    """

    __slots__ = ("capacity", "entries")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.entries: list[Experience] = []

    def append(self, e: Experience) -> None:
        if len(self.entries) >= self.capacity:
            raise RuntimeError(f"replay buffer overflow at capacity {self.capacity}")
        self.entries.append(e)

    def clear(self) -> None:
        self.entries.clear()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(slots=True)
class AgentState:
    """One agent: selection head, dilemma head, and their buffers."""

    id: int
    moral_type: MoralType
    sel_net: QNetwork
    sel_opt: AdamState
    sel_buf: ReplayBuffer
    dil_net: QNetwork
    dil_opt: AdamState
    dil_buf: ReplayBuffer


def make_agent(agent_id: int, moral_type: MoralType, n_agents: int, hidden: int,
               lr: float, buffer_capacity: int, rng: np.random.Generator) -> AgentState:
    """Fresh agent for a population of ``n_agents``.

    The selection head maps the other agents' last public actions to one
    value per potential partner; the dilemma head maps the current
    partner's last public action to a value per move.  Weights draw from
    ``rng`` selection head first, then dilemma head.
    """
    if n_agents < 2:
        raise ValueError("need at least two agents to select partners")
    sel_net = init_network(n_agents - 1, hidden, n_agents - 1, rng)
    dil_net = init_network(1, hidden, 2, rng)
    return AgentState(
        id=agent_id,
        moral_type=moral_type,
        sel_net=sel_net,
        sel_opt=AdamState(sel_net.params.size, lr=lr),
        sel_buf=ReplayBuffer(buffer_capacity),
        dil_net=dil_net,
        dil_opt=AdamState(dil_net.params.size, lr=lr),
        dil_buf=ReplayBuffer(buffer_capacity),
    )


def encode_selection_state(last_actions: np.ndarray, self_id: int) -> np.ndarray:
    """Selection input: everyone else's last public action, own entry removed.

    Index k of the result corresponds to agent k for k < self_id and to
    agent k+1 after that (ids ascending with the self skipped).
    Cooperation encodes as 1.0, defection as 0.0.
    """
    n = len(last_actions)
    out = np.empty(n - 1)
    out[:self_id] = last_actions[:self_id]
    out[self_id:] = last_actions[self_id + 1:]
    # Action values are C=0, D=1; the network sees C=1.0, D=0.0
    np.subtract(1.0, out, out=out)
    return out


def encode_dilemma_state(opp_action: Action | int) -> np.ndarray:
    """Dilemma input: the opponent's last public action as a length-1 vector."""
    return np.array([1.0 - float(int(opp_action))])


def opponent_index_to_id(self_id: int, k: int) -> int:
    """Map a selection output index back to an agent id (see
    :func:`encode_selection_state` for the index convention)."""
    return k if k < self_id else k + 1


def opponent_id_to_index(self_id: int, agent_id: int) -> int:
    if agent_id == self_id:
        raise ValueError("an agent has no selection index for itself")
    return agent_id if agent_id < self_id else agent_id - 1


def act(net: QNetwork, state: np.ndarray, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy action for one state.

    Consumes one uniform draw always, plus one integer draw on the
    exploration branch.  The exploration branch draws over the full
    action set; greedy ties break toward the lowest index.
    """
    if rng.random() < eps:
        return int(rng.integers(net.output_dim))
    return int(np.argmax(forward(net, state)))


def update_heads(agent: AgentState, gamma: float) -> tuple[float, float]:
    """One Adam step per head from the episode's buffered experiences.

    The selection head trains on its single stored transition, the
    dilemma head on the mean loss over every game of the episode.
    Returns the two loss values (selection, dilemma).
    """
    if len(agent.sel_buf) != 1:
        raise RuntimeError(
            f"agent {agent.id}: expected exactly 1 selection experience, "
            f"found {len(agent.sel_buf)}")
    sel_loss, sel_grads = td_loss_and_grad(agent.sel_net, agent.sel_buf.entries, gamma)
    adam_step(agent.sel_net, agent.sel_opt, sel_grads)
    dil_loss, dil_grads = td_loss_and_grad(agent.dil_net, agent.dil_buf.entries, gamma)
    adam_step(agent.dil_net, agent.dil_opt, dil_grads)
    return sel_loss, dil_loss
