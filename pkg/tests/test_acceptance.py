"""Acceptance suite: one test per shipped correctness criterion.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see
them as they happen; they also appear in captured output).  Tolerances are
pinned here and nowhere else.
"""

import json
import random
import subprocess
import sys

import numpy as np
import pytest

from generators import (
    path_edges,
    random_carried_mass,
    random_evidence,
    random_markov_tree,
    random_mass,
    random_partition,
    random_tree_edges,
    star_edges,
)
from qmtree import (
    Frame,
    HypothesisNotSatisfied,
    MassFunction,
    TotalConflict,
    as_tree,
    build_network,
    check_coarsening_distributes,
    check_marginals_against_global,
    check_stepwise_projection,
    coarsen,
    dempster_combine,
    is_qualitative_markov_network,
    mass_deviation,
    new_engine,
    project,
    singleton_partition,
    trivial_partition,
    vacuous,
    vacuous_extend,
    validate_markov,
)
from qmtree.fixtures import fixture_path


def report(number: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_1_local_equals_global():
    """Engine marginals equal global-combination coarsenings, tol 1e-9."""
    rng = random.Random(101)
    instances = 0
    worst = 0.0
    while instances < 200:
        tree = random_markov_tree(rng, rng.randint(2, 5), rng.randint(4, 8))
        evidence = random_evidence(rng, tree, max_focal=4)
        result = check_marginals_against_global(tree, evidence, tol=1e-9)
        worst = max(worst, result.max_deviation)
        instances += 1
        if not result.passed:
            report(1, False, f"deviation {result.max_deviation:.3e} on instance {instances}")
    report(1, worst <= 1e-9, f"200 instances, max marginal deviation {worst:.2e} <= 1e-9")


def test_criterion_2_firing_count_law():
    """Cold-start batch firing log has 3|J|-2 events, split 2(|J|-1) / |J|."""
    rng = random.Random(202)
    frame = Frame(["a", "b", "c", "d"])
    checked = 0
    for n_nodes in range(1, 9):
        ids = [f"n{i}" for i in range(n_nodes)]
        shapes = {
            "path": path_edges(ids),
            "star": star_edges(ids),
            "random": random_tree_edges(rng, ids),
        }
        for shape, edges in shapes.items():
            parts = {}
            for node in ids:
                roll = rng.random()
                if roll < 0.4:
                    parts[node] = singleton_partition(frame)
                elif roll < 0.7:
                    parts[node] = trivial_partition(frame)
                else:
                    parts[node] = random_partition(rng, frame)
            tree = as_tree(build_network(frame, parts, edges))
            engine = new_engine(tree, validate=False)
            for node in ids:
                if rng.random() < 0.6:
                    engine.enter_evidence(
                        node, random_mass(rng, tree.partition_of(node).coarse_frame)
                    )
            log = engine.propagate_batch()
            rule1 = sum(1 for e in log if e.rule == 1)
            rule2 = sum(1 for e in log if e.rule == 2)
            ok = (
                len(log) == 3 * n_nodes - 2
                and rule1 == 2 * (n_nodes - 1)
                and rule2 == n_nodes
            )
            if not ok:
                report(2, False, f"|J|={n_nodes} {shape}: {len(log)} events ({rule1}+{rule2})")
            checked += 1
    report(2, True, f"{checked} cold starts, every log has 3|J|-2 events (2(|J|-1) + |J|)")


def test_criterion_3_scheduling_confluence():
    """Concurrent schedules match batch marginals for every seed, tol 1e-9."""
    rng = random.Random(303)
    worst = 0.0
    for _ in range(50):
        tree = random_markov_tree(rng, rng.randint(2, 5), rng.randint(4, 8))
        evidence = random_evidence(rng, tree)
        batch = new_engine(tree)
        for node, items in evidence.items():
            for item in items:
                batch.enter_evidence(node, item)
        batch.propagate_batch()
        reference = {n: batch.marginal(n).mass for n in tree.node_ids}
        for seed in range(5):
            engine = new_engine(tree)
            for node, items in evidence.items():
                for item in items:
                    engine.enter_evidence(node, item)
            engine.propagate_concurrent(seed)
            for node in tree.node_ids:
                worst = max(
                    worst, mass_deviation(engine.marginal(node).mass, reference[node])
                )
    report(3, worst <= 1e-9, f"50 instances x 5 seeds, max deviation {worst:.2e} <= 1e-9")


def test_criterion_4_dempster_algebra():
    """Commutative/associative within 1e-9; vacuous neutral; conflicts raise."""
    rng = random.Random(404)
    worst = 0.0
    for _ in range(500):
        size = rng.randint(2, 6)
        frame = Frame([f"e{i}" for i in range(size)])
        m1 = random_mass(rng, frame)
        m2 = random_mass(rng, frame)
        m3 = random_mass(rng, frame)
        ab = dempster_combine(m1, m2).result
        ba = dempster_combine(m2, m1).result
        worst = max(worst, mass_deviation(ab, ba))
        left = dempster_combine(ab, m3).result
        right = dempster_combine(m1, dempster_combine(m2, m3).result).result
        worst = max(worst, mass_deviation(left, right))
        neutral = dempster_combine(m1, vacuous(frame))
        if not (
            neutral.conflict_mass == 0.0
            and np.array_equal(neutral.result.bits, m1.bits)
        ):
            report(4, False, "vacuous is not structurally neutral")
        worst = max(worst, mass_deviation(neutral.result, m1))
    conflicts = 0
    for _ in range(20):
        size = rng.randint(2, 6)
        frame = Frame([f"e{i}" for i in range(size)])
        split = rng.randint(1, frame.full_bits - 1)
        m1 = MassFunction(frame, {frame.subset_from_bits(split): 1.0})
        m2 = MassFunction(
            frame, {frame.subset_from_bits(frame.full_bits ^ split): 1.0}
        )
        with pytest.raises(TotalConflict):
            dempster_combine(m1, m2)
        conflicts += 1
    report(
        4,
        worst <= 1e-9,
        f"500 triples, max deviation {worst:.2e} <= 1e-9; {conflicts} total-conflict pairs raised",
    )


def test_criterion_5_coarsening_extension_laws():
    """Round trip exact for carried; belief consistency; projection composition."""
    rng = random.Random(505)
    worst_consistency = 0.0
    worst_projection = 0.0
    for _ in range(150):
        size = rng.randint(2, 6)
        frame = Frame([f"e{i}" for i in range(size)])
        p = random_partition(rng, frame)
        carried = random_carried_mass(rng, p)
        back = vacuous_extend(coarsen(carried, p), p)
        if not (
            np.array_equal(back.bits, carried.bits)
            and np.array_equal(back.masses, carried.masses)
        ):
            report(5, False, "extend(coarsen) is not exact for a carried function")
        m = random_mass(rng, frame)
        coarse = coarsen(m, p)
        from qmtree import belief_of

        for bits in range(1, 1 << p.block_count):
            block_set = p.block_set(
                [i for i in range(p.block_count) if bits >> i & 1]
            )
            worst_consistency = max(
                worst_consistency,
                abs(
                    belief_of(coarse, block_set.as_coarse_subset())
                    - belief_of(m, block_set.union())
                ),
            )
        p2 = random_partition(rng, frame)
        coarse_m = random_mass(rng, p.coarse_frame)
        direct = project(coarse_m, p, p2)
        composed = coarsen(vacuous_extend(coarse_m, p), p2)
        worst_projection = max(worst_projection, mass_deviation(direct, composed))
        if not np.array_equal(direct.bits, composed.bits):
            report(5, False, "projection and its composition differ in focal structure")
    ok = worst_consistency <= 1e-12 and worst_projection <= 1e-12
    report(
        5,
        ok,
        "150 instances: carried round trip exact; "
        f"belief-consistency dev {worst_consistency:.2e}; "
        f"projection-composition dev {worst_projection:.2e} <= 1e-12",
    )


def _independent_triple(rng):
    """A (p1, p2, given) triple, drawn from families likely to pass the gate."""
    style = rng.random()
    if style < 0.4:
        # coordinate partitions with overlap inside the conditioning set
        sizes = rng.choice([[2, 2], [2, 3], [2, 2, 2]])
        import itertools

        points = list(itertools.product(*(range(s) for s in sizes)))
        frame = Frame(["".join(map(str, p)) for p in points])
        coords = list(range(len(sizes)))
        s = set(rng.sample(coords, rng.randint(1, len(coords))))
        a = set(rng.sample(coords, rng.randint(0, len(coords)))) | set()
        b_pool = [c for c in coords if c not in (a - s)]
        b = set(rng.sample(b_pool, rng.randint(0, len(b_pool))))

        def by(coord_set):
            groups = {}
            for pos, point in enumerate(points):
                key = tuple(point[c] for c in sorted(coord_set))
                groups.setdefault(key, 0)
                groups[key] |= 1 << pos
            return frame, [frame.subset_from_bits(bits) for bits in groups.values()]

        from qmtree import Partition

        p1 = Partition(*by(a))
        p2 = Partition(*by(b))
        given = Partition(*by(s))
        return p1, p2, given
    size = rng.randint(3, 6)
    frame = Frame([f"e{i}" for i in range(size)])
    if style < 0.7:
        return (
            random_partition(rng, frame),
            random_partition(rng, frame),
            singleton_partition(frame),
        )
    return (
        random_partition(rng, frame),
        random_partition(rng, frame),
        random_partition(rng, frame),
    )


def test_criterion_6_coarsening_identities():
    """Both identities hold on gate-passing triples; gate failures skip."""
    rng = random.Random(606)
    passed = 0
    skipped = 0
    worst = 0.0
    while passed < 200:
        p1, p2, given = _independent_triple(rng)
        bel1 = random_carried_mass(rng, p1)
        bel2 = random_carried_mass(rng, p2)
        try:
            first = check_coarsening_distributes(p1, p2, given, bel1, bel2, tol=1e-9)
            second = check_stepwise_projection(p1, p2, given, bel2, tol=1e-9)
        except HypothesisNotSatisfied:
            skipped += 1
            continue
        worst = max(worst, first.deviation, second.deviation)
        if not (first.passed and second.passed):
            report(6, False, f"identity violated with satisfied gate: {worst:.3e}")
        passed += 1
    report(
        6,
        worst <= 1e-9,
        f"200 gate-passing triples, max deviation {worst:.2e} <= 1e-9 "
        f"({skipped} gate failures skipped, none failed)",
    )


def test_criterion_7_node_local_check_equals_network_definition():
    """The node-local tree check agrees with the separation definition."""
    rng = random.Random(707)
    agreements = 0
    markov_count = 0
    for _ in range(120):
        n_nodes = rng.randint(1, 4)
        size = rng.randint(2, 5)
        frame = Frame([f"e{i}" for i in range(size)])
        ids = [f"n{i}" for i in range(n_nodes)]
        parts = {i: random_partition(rng, frame) for i in ids}
        net = build_network(frame, parts, random_tree_edges(rng, ids))
        tree = as_tree(net)
        local = validate_markov(tree).ok
        direct = is_qualitative_markov_network(net)
        if local != direct:
            report(7, False, f"disagreement on {n_nodes}-node tree ({local} vs {direct})")
        agreements += 1
        markov_count += local
    report(
        7,
        True,
        f"120 corpus trees, node-local check == network definition in all "
        f"({markov_count} Markov, {120 - markov_count} not)",
    )


def test_criterion_8_incremental_equals_batch():
    """Interleaved singleton entries end at the single-shot marginals, tol 1e-9."""
    rng = random.Random(808)
    worst = 0.0
    for _ in range(100):
        tree = random_markov_tree(rng, rng.randint(2, 5), rng.randint(4, 6))
        evidence = random_evidence(rng, tree, max_items=3)
        single = new_engine(tree)
        items = []
        for node, per_node in evidence.items():
            for item in per_node:
                single.enter_evidence(node, item)
                items.append((node, item))
        single.propagate_batch()
        reference = {n: single.marginal(n).mass for n in tree.node_ids}
        incremental = new_engine(tree)
        rng.shuffle(items)
        for node, item in items:
            incremental.enter_evidence(node, item)
            if rng.random() < 0.5:
                incremental.propagate_batch()
        incremental.propagate_batch()
        for node in tree.node_ids:
            worst = max(
                worst,
                mass_deviation(incremental.marginal(node).mass, reference[node]),
            )
    report(8, worst <= 1e-9, f"100 instances, max deviation {worst:.2e} <= 1e-9")


def test_criterion_9_cli_end_to_end(tmp_path):
    """Shipped fixtures: documented exit codes, byte-identical reruns."""
    chain = str(fixture_path("chain3"))
    star = str(fixture_path("star_diagnostic"))
    bad = str(fixture_path("bad_markov"))
    expected = [
        (("validate", chain), 0),
        (("validate", star), 0),
        (("validate", bad), 2),
        (("propagate", chain), 0),
        (("propagate", star), 0),
        (("propagate", bad), 1),
        (("propagate", bad, "--skip-markov-check"), 0),
        (("oracle-check", chain), 0),
        (("oracle-check", star), 0),
    ]
    for args, want_code in expected:
        runs = [
            subprocess.run(
                [sys.executable, "-m", "qmtree", *args],
                capture_output=True,
                text=True,
            )
            for _ in range(2)
        ]
        for run in runs:
            if run.returncode != want_code:
                report(
                    9,
                    False,
                    f"qmtree {' '.join(args)} exited {run.returncode}, wanted {want_code}",
                )
        if runs[0].stdout != runs[1].stdout:
            report(9, False, f"qmtree {' '.join(args)} output differs between runs")
        if want_code == 0 and args[0] == "propagate":
            doc = json.loads(runs[0].stdout)
            assert "marginals" in doc
    report(9, True, f"{len(expected)} fixture invocations: exit codes and bytes stable")
