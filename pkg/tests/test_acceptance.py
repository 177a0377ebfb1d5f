"""Acceptance gate.

One test per observable contract: exact reward and optimizer oracles,
algebraic identities, gradient correctness against finite differences,
episode bookkeeping, byte determinism, single-opponent policy
convergence, and ordinal reproduction of the population-level
cooperation patterns at reduced scale (5000 episodes, 5 runs per
population, 5 seed batches).  The reduced-scale fixture simulates 45
population-runs per batch set and takes on the order of an hour of CPU
time; everything else is fast.
"""

import time

import numpy as np
import pytest

from moralsim.agents import Experience, act, encode_dilemma_state
from moralsim.experiment import ExperimentConfig, run_experiment
from moralsim.game import Action, PayoffMatrix, payoff
from moralsim.metrics import cooperation_rate, moving_average, social_outcomes
from moralsim.moral_rewards import (
    TYPE_ORDER,
    GameContext,
    MoralType,
    RewardParams,
    intrinsic_reward,
    learning_reward,
)
from moralsim.neural import (
    AdamState,
    QNetwork,
    adam_step,
    forward,
    init_network,
    td_loss_and_grad,
)
from moralsim.simulation import (
    POPULATION_LABELS,
    EpisodeRecord,
    PopulationConfig,
    population_types,
    run_simulation,
)

C, D = Action.COOPERATE, Action.DEFECT
PARAMS = RewardParams(xi=5.0)
MATRIX = PayoffMatrix.default()


# ---------------------------------------------------------- exact math oracles

# all eight (a_self, a_opp, a_opp_prev) combinations, one column per
# type in canonical order S, Ut, aUt, De, mDe, V-Eq, V-In, V-Ki, V-Ag
REWARD_TABLE = {
    (C, C, C): (3.0, 6.0, -6.0, 0.0, 0.0, 1.0, 0.0, 5.0, 0.0),
    (C, C, D): (3.0, 6.0, -6.0, 0.0, 0.0, 1.0, 0.0, 5.0, 0.0),
    (C, D, C): (0.0, 4.0, -4.0, 0.0, 0.0, 0.0, 1.0, 5.0, 0.0),
    (C, D, D): (0.0, 4.0, -4.0, 0.0, 0.0, 0.0, 1.0, 5.0, 0.0),
    (D, C, C): (4.0, 4.0, -4.0, -5.0, 5.0, 0.0, 1.0, 0.0, 5.0),
    (D, C, D): (4.0, 4.0, -4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 5.0),
    (D, D, C): (1.0, 2.0, -2.0, -5.0, 5.0, 1.0, 0.0, 0.0, 5.0),
    (D, D, D): (1.0, 2.0, -2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 5.0),
}


def test_reward_table_matches_hand_oracle():
    """Every reward function reproduces the hand-written table exactly."""
    for (a_self, a_opp, a_prev), expected in REWARD_TABLE.items():
        r_self, r_opp = payoff(a_self, a_opp, MATRIX)
        ctx = GameContext(a_self, a_opp, a_prev, r_self, r_opp)
        got = tuple(intrinsic_reward(t, ctx, PARAMS) for t in TYPE_ORDER)
        assert got == expected, (a_self, a_opp, a_prev)


def test_reward_identities_hold_on_random_contexts():
    """Ut = -aUt, De = -mDe, V-Eq + V-In = 1, V-Ki + V-Ag = xi."""
    rng = np.random.default_rng(0)
    t = {u.label: u for u in TYPE_ORDER}
    for _ in range(10000):
        ctx = GameContext(
            Action(int(rng.integers(2))), Action(int(rng.integers(2))),
            Action(int(rng.integers(2))),
            float(rng.uniform(0.1, 10.0)), float(rng.uniform(0.1, 10.0)))
        r = {lbl: intrinsic_reward(u, ctx, PARAMS) for lbl, u in t.items()}
        assert abs(r["Ut"] + r["aUt"]) <= 1e-12
        assert abs(r["De"] + r["mDe"]) <= 1e-12
        assert abs(r["V-Eq"] + r["V-In"] - 1.0) <= 1e-12
        assert abs(r["V-Ki"] + r["V-Ag"] - PARAMS.xi) <= 1e-12


def test_td_gradients_match_frozen_target_finite_differences():
    """Analytic semi-gradients vs central differences on 50 small nets."""
    gamma = 0.9
    for seed in range(50):
        rng = np.random.default_rng(seed)
        din = int(rng.integers(1, 5))
        dh = int(rng.integers(3, 10))
        dout = int(rng.integers(2, 5))
        net = init_network(din, dh, dout, rng)
        net.b1[...] = rng.normal(scale=0.3, size=dh)
        net.b2[...] = rng.normal(scale=0.3, size=dout)
        batch = [
            Experience(rng.normal(size=din), int(rng.integers(dout)),
                       float(rng.normal()), rng.normal(size=din))
            for _ in range(int(rng.integers(1, 7)))
        ]
        _, grads = td_loss_and_grad(net, batch, gamma)

        targets = np.array([e.r + gamma * forward(net, e.s_next).max() for e in batch])

        def frozen_loss():
            qs = np.array([forward(net, e.s)[e.a] for e in batch])
            return float(np.mean((qs - targets) ** 2))

        fd = np.empty_like(net.params)
        for i in range(net.params.size):
            h = 1e-6 * max(1.0, abs(net.params[i]))
            orig = net.params[i]
            net.params[i] = orig + h
            up = frozen_loss()
            net.params[i] = orig - h
            down = frozen_loss()
            net.params[i] = orig
            fd[i] = (up - down) / (2.0 * h)

        rel = np.linalg.norm(grads - fd) / max(np.linalg.norm(fd), 1e-12)
        assert rel < 1e-5, f"net {seed}: relative gradient error {rel:.3e}"


def test_adam_first_step_matches_hand_value():
    """From zero parameters, unit gradient moves each weight by
    -lr / (1 + eps) on the first step."""
    net = QNetwork(1, 1, 1)  # four parameters, all zero
    opt = AdamState(net.params.size, lr=0.001)
    adam_step(net, opt, np.ones_like(net.params))
    expected = -0.001 / (1.0 + 1e-8)
    assert np.all(np.abs(net.params - expected) <= 1e-12)

    # untouched coordinates must not move
    net2 = QNetwork(1, 1, 1)
    opt2 = AdamState(net2.params.size, lr=0.001)
    adam_step(net2, opt2, np.array([1.0, 0.0, 1.0, 0.0]))
    assert net2.params[1] == 0.0 and net2.params[3] == 0.0
    assert abs(net2.params[0] - expected) <= 1e-12


def _record(selections, a_sel, a_opp):
    selections = np.asarray(selections, dtype=np.int64)
    a_sel = np.asarray(a_sel, dtype=np.int8)
    a_opp = np.asarray(a_opp, dtype=np.int8)
    n = len(selections)
    pairs = [payoff(Action(a), Action(b), MATRIX) for a, b in zip(a_sel, a_opp)]
    return EpisodeRecord(
        episode=0, env_before=np.zeros(n, dtype=np.int8), selections=selections,
        a_sel=a_sel, a_opp=a_opp,
        r_sel_extr=np.array([p[0] for p in pairs]),
        r_opp_extr=np.array([p[1] for p in pairs]),
        r_sel_intr=np.zeros(n), r_opp_intr=np.zeros(n),
        sel_buf_sizes=np.ones(n, dtype=np.int64),
        dil_buf_sizes=np.ones(n, dtype=np.int64),
        losses=np.zeros((n, 2)), env_after=a_sel.copy())


def test_social_outcome_oracles_exact():
    n = 16
    ring = [(i + 1) % n for i in range(n)]
    cc = social_outcomes(_record(ring, [0] * n, [0] * n))
    assert (cc.r_collective, cc.r_gini, cc.r_min) == (96.0, 1.0, 3.0)
    dd = social_outcomes(_record(ring, [1] * n, [1] * n))
    assert (dd.r_collective, dd.r_gini, dd.r_min) == (32.0, 1.0, 1.0)
    uni = social_outcomes(_record(ring, [0] * n, [1] * n))
    assert (uni.r_collective, uni.r_gini, uni.r_min) == (64.0, 0.0, 0.0)


# ------------------------------------------------------- structural invariants

def test_episode_bookkeeping_invariants():
    """16 selections, 16 games and 32 dilemma experiences per episode;
    every selection buffer holds exactly one experience before the
    update and every buffer is empty afterwards."""
    from moralsim.neural import Hyperparams

    cfg = PopulationConfig.for_label("majority-De", episodes=40,
                                     hp=Hyperparams(hidden=32))
    log = run_simulation(cfg, seed=3)
    assert len(log.episodes) == 40
    for rec in log.episodes:
        assert len(rec.selections) == 16
        assert len(rec.a_sel) == len(rec.a_opp) == 16
        assert np.all(rec.sel_buf_sizes == 1)
        assert rec.dil_buf_sizes.sum() == 32
    for agent in log.agents:
        assert len(agent.sel_buf) == 0
        assert len(agent.dil_buf) == 0


def test_identical_config_and_seed_are_byte_identical(tmp_path):
    import os

    def run_into(d):
        run_experiment(ExperimentConfig(
            population="majority-V-Ki", episodes=40, runs=2, seed=123,
            hidden=32, jobs=1, log_granularity="full", out_dir=str(d)))
        out = {}
        for dirpath, _, files in os.walk(d):
            for name in files:
                if name == "manifest.json":
                    continue  # echoes the output path itself
                p = os.path.join(dirpath, name)
                with open(p, "rb") as f:
                    out[os.path.relpath(p, d)] = f.read()
        return out

    first = run_into(tmp_path / "a")
    second = run_into(tmp_path / "b")
    assert first.keys() == second.keys()
    for k in first:
        assert first[k] == second[k], f"{k} differs between executions"


# ------------------------------------------------- single-opponent convergence

def _greedy_after_training(moral_type: MoralType, seed: int,
                           episodes: int = 2000) -> int:
    """Train one dilemma head against a scripted always-cooperating
    opponent and return its greedy action afterwards.

    The opponent's visible action is constant, so the head sees one
    state; experiences accumulate in a 256-deep first-in-first-out
    window so both actions stay represented and the value estimates can
    reach their fixed points (S: Q = (399, 400); V-Ki: Q = (500, 495)).
    """
    rng = np.random.default_rng(seed)
    net = init_network(1, 256, 2, rng)
    opt = AdamState(net.params.size, lr=0.001)
    state = encode_dilemma_state(C)
    window: list[Experience] = []
    for _ in range(episodes):
        a = act(net, state, 0.05, rng)
        r_self, r_opp = payoff(Action(a), C, MATRIX)
        ctx = GameContext(Action(a), C, C, r_self, r_opp)
        window.append(Experience(state, a, learning_reward(moral_type, ctx, PARAMS), state))
        if len(window) > 256:
            window.pop(0)
        _, grads = td_loss_and_grad(net, window, gamma=0.99)
        adam_step(net, opt, grads)
    return int(np.argmax(forward(net, state)))


def test_selfish_converges_to_defect_vs_always_cooperate():
    hits = sum(_greedy_after_training(MoralType.SELFISH, seed) == int(D)
               for seed in range(20))
    print(f"[acceptance] Selfish greedy-Defect vs cooperator: {hits}/20 seeds")
    assert hits >= 19, f"only {hits}/20 seeds ended greedy-Defect"


def test_kindness_converges_to_cooperate_vs_always_cooperate():
    hits = sum(_greedy_after_training(MoralType.VIRTUE_KINDNESS, seed) == int(C)
               for seed in range(20))
    print(f"[acceptance] V-Ki greedy-Cooperate vs cooperator: {hits}/20 seeds")
    assert hits >= 19, f"only {hits}/20 seeds ended greedy-Cooperate"


# ----------------------------------------------- reduced-scale ordinal results

DESK_EPISODES = 5000
DESK_RUNS = 5
DESK_FINAL = 500
BATCH_SEEDS = (1000, 2000, 3000, 4000, 5000)  # one batch per base seed


@pytest.fixture(scope="session")
def desk():
    """Five batches of the nine populations, 5 runs x 5000 episodes each.

    Yields {(base_seed, label): {coop, gini, s_coop, de_ma2000}} where
    coop/gini/s_coop are means over the final 500 episodes (averaged
    across runs first) and de_ma2000 is the trailing 500-episode moving
    average of De-agent cooperation at episode 2000.
    """
    results = {}
    t0 = time.time()
    for base in BATCH_SEEDS:
        for label in POPULATION_LABELS:
            cfg = PopulationConfig.for_label(label, episodes=DESK_EPISODES)
            types = population_types(cfg)
            coop = np.zeros((DESK_RUNS, DESK_EPISODES))
            gini = np.zeros((DESK_RUNS, DESK_EPISODES))
            s_coop = np.zeros((DESK_RUNS, DESK_EPISODES))
            de_coop = np.zeros((DESK_RUNS, DESK_EPISODES))
            for k in range(DESK_RUNS):
                def on_ep(rec, k=k):
                    ep = rec.episode
                    coop[k, ep] = cooperation_rate(rec)
                    gini[k, ep] = social_outcomes(rec).r_gini
                    s_coop[k, ep] = cooperation_rate(rec, types, MoralType.SELFISH)
                    de_coop[k, ep] = cooperation_rate(rec, types, MoralType.DEONTOLOGICAL)

                run_simulation(cfg, base + k, keep_episodes=False, on_episode=on_ep)
            results[(base, label)] = {
                "coop": float(coop.mean(axis=0)[-DESK_FINAL:].mean()),
                "gini": float(gini.mean(axis=0)[-DESK_FINAL:].mean()),
                "s_coop": float(s_coop.mean(axis=0)[-DESK_FINAL:].mean()),
                "de_ma2000": float(moving_average(de_coop.mean(axis=0), 500)[2000]),
            }
            print(f"[desk] base={base} {label}: coop={results[(base, label)]['coop']:.3f} "
                  f"({time.time() - t0:.0f}s)", flush=True)
    return results


def _batch_lines(desk, key):
    lines = []
    for base in BATCH_SEEDS:
        ranked = sorted(POPULATION_LABELS, key=lambda l: desk[(base, l)][key],
                        reverse=True)
        shown = " ".join(f"{l.removeprefix('majority-')}={desk[(base, l)][key]:.3f}"
                         for l in ranked)
        lines.append(f"  base {base}: {shown}")
    return "\n".join(lines)


def test_desk_a_most_cooperative_pair(desk):
    """Utilitarian- and kindness-led populations finish as the two most
    cooperative in at least 4 of 5 batches."""
    hits = 0
    for base in BATCH_SEEDS:
        ranked = sorted(POPULATION_LABELS, key=lambda l: desk[(base, l)]["coop"],
                        reverse=True)
        hits += set(ranked[:2]) == {"majority-Ut", "majority-V-Ki"}
    print(f"[acceptance] desk (a) top-two == {{Ut, V-Ki}}: {hits}/5 batches")
    assert hits >= 4, (
        f"top-two pair held in only {hits}/5 batches\n" + _batch_lines(desk, "coop"))


def test_desk_b_least_cooperative_population(desk):
    """The anti-utilitarian-led population finishes least cooperative in
    at least 4 of 5 batches."""
    hits = 0
    for base in BATCH_SEEDS:
        ranked = sorted(POPULATION_LABELS, key=lambda l: desk[(base, l)]["coop"])
        hits += ranked[0] == "majority-aUt"
    print(f"[acceptance] desk (b) least cooperative == aUt: {hits}/5 batches")
    assert hits >= 4, (
        f"aUt was least cooperative in only {hits}/5 batches\n" + _batch_lines(desk, "coop"))


def test_desk_c_cooperation_gap(desk):
    """Most and least cooperative populations differ by more than 0.2."""
    hits = 0
    gaps = []
    for base in BATCH_SEEDS:
        vals = [desk[(base, l)]["coop"] for l in POPULATION_LABELS]
        gaps.append(max(vals) - min(vals))
        hits += gaps[-1] > 0.2
    print(f"[acceptance] desk (c) coop gap > 0.2: {hits}/5 batches "
          f"(gaps {['%.3f' % g for g in gaps]})")
    assert hits >= 4, f"gap exceeded 0.2 in only {hits}/5 batches: {gaps}"


def test_desk_d_de_agents_cooperate_early(desk):
    """De agents in their own majority exceed 0.9 cooperation by episode
    2000 (trailing 500-episode average)."""
    hits = 0
    vals = []
    for base in BATCH_SEEDS:
        vals.append(desk[(base, "majority-De")]["de_ma2000"])
        hits += vals[-1] > 0.9
    print(f"[acceptance] desk (d) De > 0.9 by episode 2000: {hits}/5 batches "
          f"(values {['%.3f' % v for v in vals]})")
    assert hits >= 4, f"held in only {hits}/5 batches: {vals}"


def test_desk_e_selfish_agents_most_cooperative_in_equality_population(desk):
    """S agents cooperate more inside majority-V-Eq than in any other
    population."""
    hits = 0
    for base in BATCH_SEEDS:
        target = desk[(base, "majority-V-Eq")]["s_coop"]
        others = [desk[(base, l)]["s_coop"] for l in POPULATION_LABELS
                  if l != "majority-V-Eq"]
        hits += all(target > v for v in others)
    print(f"[acceptance] desk (e) S coop peaks in majority-V-Eq: {hits}/5 batches")
    assert hits >= 4, (
        f"held in only {hits}/5 batches\n" + _batch_lines(desk, "s_coop"))


def test_desk_gini_highest_in_equality_population(desk):
    """majority-V-Eq attains the highest mean equality reward."""
    hits = 0
    for base in BATCH_SEEDS:
        target = desk[(base, "majority-V-Eq")]["gini"]
        others = [desk[(base, l)]["gini"] for l in POPULATION_LABELS
                  if l != "majority-V-Eq"]
        hits += all(target > v for v in others)
    print(f"[acceptance] desk (gini) majority-V-Eq highest: {hits}/5 batches")
    assert hits >= 4, (
        f"held in only {hits}/5 batches\n" + _batch_lines(desk, "gini"))
