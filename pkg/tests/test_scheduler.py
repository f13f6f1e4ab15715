import numpy as np
import pytest

from qwake.advice import assign_advice, compute_epoch_plan
from qwake.network import (
    WakeConfig,
    awake_distance,
    build_network,
    clique_graph,
    path_graph,
    random_connected_graph,
)
from qwake.scheduler import (
    RunParams,
    SchedulerError,
    baseline_flood,
    phase_length,
    run_wakeup,
    verify_phase_lemma,
)


def prepared(net, wake, alpha):
    plan = compute_epoch_plan(net, wake)
    return plan, assign_advice(net, plan, alpha)


def run(net, wake, alpha, seed=0, **kw):
    plan, asg = prepared(net, wake, alpha)
    t = run_wakeup(net, wake, asg, RunParams(**kw), np.random.default_rng(seed), seed)
    return plan, t


def test_all_awake_with_advice_sends_nothing():
    net = clique_graph(5)
    wake = WakeConfig(frozenset(net.nodes))
    plan, t = run(net, wake, alpha=3)
    assert t.ledger.total() == 0
    assert t.all_awake
    assert t.epochs_executed == 1


def test_path_hand_trace():
    net = path_graph(3)
    wake = WakeConfig.single(1)
    plan, t = run(net, wake, alpha=0, seed=0)
    assert t.all_awake
    assert t.ledger.classical_total == 2  # two wakes, no proxy replies
    assert t.ledger.proxy_replies == 0
    tau = t.tau

    def epoch_phase(round_no):
        g = (round_no - 1) // tau  # global phase index
        return g // net.n + 1, g % net.n + 1

    assert epoch_phase(t.wake_round[2]) == (1, 1)
    assert epoch_phase(t.wake_round[3]) == (2, 2)
    assert verify_phase_lemma(t, plan).ok


def test_wake_is_one_round_after_the_classical_send():
    net = random_connected_graph(12, 0.3, 4)
    wake = WakeConfig.single(2)
    plan, asg = prepared(net, wake, 0)
    t = run_wakeup(net, wake, asg, RunParams(record_events=True), np.random.default_rng(3), 3)
    sends = {}
    for round_no, kind, payload in t.events:
        if kind == "classical-send" and payload.startswith("wake"):
            dest = int(payload.split("->")[1].split()[0])
            sends.setdefault(dest, round_no)
    woken = {v for v, r in t.wake_round.items() if r > 0}
    assert set(sends) == woken
    for v in woken:
        assert t.wake_round[v] == sends[v] + 1
    # no wake event without a classical send: quantum traffic never wakes
    wake_events = [p for _, k, p in t.events if k == "wake"]
    assert len(wake_events) == len(woken)


def test_paired_seeds_advice_beats_none_on_k8():
    net = clique_graph(8)
    wake = WakeConfig.single(2)
    for seed in range(5):
        _, t0 = run(net, wake, alpha=0, seed=seed)
        plan7, t7 = run(net, wake, alpha=7, seed=seed)
        assert t0.all_awake and t7.all_awake
        assert t7.ledger.quantum_total < t0.ledger.quantum_total
        # the actor's searched ranges replay the oracle's chain
        asg = assign_advice(net, plan7, 7)
        log = next(l for l in t7.actor_logs if l.node == 2)
        assert log.g == 0
        chain = asg.chains[2]
        assert log.ranges == tuple((s.rng.lo, s.rng.hi) for s in chain)
        assert log.chain_len == len(chain)


def test_single_actor_phase_intervals_do_not_overlap():
    net = random_connected_graph(20, 0.25, 8)
    wake = WakeConfig.single(5)
    plan, t = run(net, wake, alpha=3, seed=2)
    spans = []
    for rec in t.ledger.per_phase:
        start = ((rec.epoch - 1) * net.n + (rec.phase - 1)) * t.tau + 1
        spans.append((start, start + max(rec.rounds_used, 1) - 1, rec.actor))
    spans.sort()
    for (s1, e1, _), (s2, e2, _) in zip(spans, spans[1:]):
        assert e1 < s2


def test_ledger_consistency():
    net = random_connected_graph(24, 0.3, 6)
    wake = WakeConfig(frozenset({1, 9}))
    plan, t = run(net, wake, alpha=5, seed=4)
    led = t.ledger
    assert led.classical_total == led.wake_messages + led.proxy_replies
    assert led.classical_total == sum(r.classical for r in led.per_phase)
    assert led.quantum_total == sum(r.quantum for r in led.per_phase)
    assert led.quantum_total == 2 * sum(log.oracle_calls for log in t.actor_logs)
    assert led.wake_messages == sum(1 for r in t.wake_round.values() if r > 0)


def test_msg_convention_flag():
    net = clique_graph(6)
    wake = WakeConfig.single(1)
    plan, asg = prepared(net, wake, 0)
    t2 = run_wakeup(net, wake, asg, RunParams(msg_convention="roundtrip2"), np.random.default_rng(1), 1)
    t1 = run_wakeup(net, wake, asg, RunParams(msg_convention="single1"), np.random.default_rng(1), 1)
    assert t2.ledger.quantum_total == 2 * t1.ledger.quantum_total
    assert t2.ledger.classical_total == t1.ledger.classical_total


def test_transcripts_byte_identical_across_repeats():
    net = random_connected_graph(16, 0.3, 9)
    wake = WakeConfig.single(3)
    plan, asg = prepared(net, wake, 5)
    texts = set()
    for _ in range(3):
        t = run_wakeup(net, wake, asg, RunParams(record_events=True), np.random.default_rng(21), 21)
        texts.add(t.to_text())
    assert len(texts) == 1


def test_g0_actor_message_bound():
    # per ranged actor with k sleepers: messages <= 3 * iter_c * k *
    # sqrt(2n / 2^beta) * log2 n (deterministic consequence of the caps)
    import math

    from qwake import qsearch

    for seed in range(6):
        net = random_connected_graph(40, 0.2, 30 + seed)
        wake = WakeConfig.single(1 + seed)
        plan, asg = prepared(net, wake, 5)
        t = run_wakeup(net, wake, asg, RunParams(), np.random.default_rng(seed), seed)
        if not t.all_awake:
            continue
        for log in t.actor_logs:
            if log.g != 0 or not log.ranges:
                continue
            k = len(plan.assigned_set(log.node))
            if k == 0:
                continue
            bound = (
                3 * qsearch.DEFAULT_ITER_C * k
                * math.sqrt(2 * net.n / 2**asg.beta) * math.log2(net.n)
            )
            assert 2 * log.oracle_calls <= bound


def test_tau_budget_flag_and_strict_mode():
    net = clique_graph(16)
    wake = WakeConfig.single(1)
    plan, asg = prepared(net, wake, 0)
    t = run_wakeup(net, wake, asg, RunParams(), np.random.default_rng(0), 0)
    assert t.tau_overflows == ()
    tiny = RunParams(c_tau=0.001, strict_tau=False)
    t2 = run_wakeup(net, wake, asg, tiny, np.random.default_rng(0), 0)
    assert t2.tau_overflows  # flagged, not fatal
    with pytest.raises(SchedulerError):
        run_wakeup(net, wake, asg, RunParams(c_tau=0.001, strict_tau=True), np.random.default_rng(0), 0)


def test_verify_phase_lemma_success_and_fault_injection():
    net = random_connected_graph(14, 0.35, 12)
    wake = WakeConfig.single(4)
    plan, asg = prepared(net, wake, 0)
    ok = run_wakeup(net, wake, asg, RunParams(), np.random.default_rng(2), 2)
    assert verify_phase_lemma(ok, plan).ok

    # force the first actor's first search to fail: its sleepers survive
    first_actor = 4
    forced = RunParams(force_null=frozenset({(first_actor, 0)}))
    bad = run_wakeup(net, wake, asg, forced, np.random.default_rng(2), 2)
    report = verify_phase_lemma(bad, plan)
    assert not report.ok
    assert any(f"actor {first_actor}" in v for v in report.violations)
    missed = sorted(plan.assigned_set(first_actor))
    assert any(str(missed[0]) in v for v in report.violations)


def test_verify_phase_lemma_detects_wrong_plan():
    net = clique_graph(8)
    plan_a, asg_a = prepared(net, WakeConfig.single(1), 0)
    plan_b, _ = prepared(net, WakeConfig.single(5), 0)
    t = run_wakeup(net, WakeConfig.single(1), asg_a, RunParams(), np.random.default_rng(0), 0)
    assert verify_phase_lemma(t, plan_a).ok
    assert not verify_phase_lemma(t, plan_b).ok


def test_missed_turn_rule():
    # node 2 wakes during epoch 1 (phase 1) and must not act before epoch 2,
    # even though its own phase in epoch 1 has not started yet
    net = path_graph(4)
    wake = WakeConfig.single(1)
    plan, t = run(net, wake, alpha=0, seed=1)
    log2 = next(l for l in t.actor_logs if l.node == 2)
    assert log2.epoch == 2


def test_flood_counts():
    k6 = clique_graph(6)
    t = baseline_flood(k6, WakeConfig.single(2))
    assert t.ledger.classical_total == 6 * 5  # exactly 2|E| = n(n-1)
    assert t.all_awake
    assert t.rounds_total == 1

    p3 = path_graph(3)
    t = baseline_flood(p3, WakeConfig.single(1))
    assert t.ledger.classical_total == 4
    assert t.rounds_total == awake_distance(p3, WakeConfig.single(1)) == 2

    rnd = random_connected_graph(30, 0.2, 3)
    wake = WakeConfig(frozenset({4, 17}))
    t = baseline_flood(rnd, wake)
    assert t.all_awake
    assert t.ledger.classical_total == 2 * rnd.edge_count()
    assert t.rounds_total == awake_distance(rnd, wake)
    assert t.ledger.classical_total >= t.ledger.wake_messages


def test_failed_run_reported_not_raised():
    # forcing every search of the only eligible actor to fail leaves the
    # graph asleep; the run ends with all_awake False, not an exception
    net = path_graph(2)
    wake = WakeConfig.single(1)
    plan, asg = prepared(net, wake, 0)
    forced = RunParams(force_null=frozenset((1, i) for i in range(50)))
    t = run_wakeup(net, wake, asg, forced, np.random.default_rng(0), 0)
    assert not t.all_awake
    assert t.wake_round == {1: 0}
