"""Acceptance criteria P1-P12, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail line
per criterion. P12 needs real embeddings and is skipped unless the
MICM_EMBEDDINGS environment variable points at an exported FSE1 file.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from helpers import random_embedding_set
from fseval.bench import SynthSpec, generate_synthetic, run_eval, sweep
from fseval.features import compute_prototypes, cosine_sim
from fseval.losses import (
    DistillationFixture,
    cross_entropy,
    ema_update,
    loss_cls,
    loss_mse,
    loss_patch,
)
from fseval.opta import (
    CostMatrix,
    SinkhornConfig,
    cost_matrix,
    opta_classify,
    sinkhorn,
    transport_prototypes,
)
from fseval.pairs import assign_pairs, bce_pair_loss
from fseval.protonet import classify, episode_accuracy
from fseval.sampler import EpisodeSpec, sample_episode
from oracles import lp_transport_optimum, nearest_prototype


def _report(name: str, detail: str) -> None:
    print(f"{name}: PASS ({detail})")


def test_p1_sinkhorn_feasibility():
    rng = np.random.default_rng(101)
    cfg = SinkhornConfig(epsilon=0.1, max_iters=2000, tol=1e-8)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        D = CostMatrix(rng.random((75, 5)) * 4.0, "sq-euclidean-normalized")
        plan = sinkhorn(D, cfg)
        assert plan.converged
        assert plan.matrix.min() >= 0.0
        violation = max(
            np.abs(plan.matrix.sum(1) - 1 / 75).max(),
            np.abs(plan.matrix.sum(0) - 1 / 5).max(),
        )
        assert violation < 1e-8
        worst = max(worst, violation)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _report("P1", f"100 plans, worst violation {worst:.2e}, {elapsed:.2f}s")


def test_p2_sinkhorn_lp_limit():
    rng = np.random.default_rng(202)
    r = np.full(3, 1 / 3)
    c = np.full(2, 1 / 2)
    cfg = SinkhornConfig(epsilon=1e-3, max_iters=20000, tol=1e-10)
    start = time.perf_counter()
    done = 0
    worst = 0.0
    while done < 20:
        D = rng.random((3, 2))
        _, lp_plan, unique = lp_transport_optimum(r, c, D, uniqueness_gap=5e-3)
        if not unique:
            continue
        plan = sinkhorn(CostMatrix(D, "euclidean"), cfg)
        l1 = np.abs(plan.matrix - lp_plan).sum()
        assert l1 < 1e-3
        worst = max(worst, l1)
        done += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report("P2", f"20 instances, worst L1 {worst:.2e}, {elapsed:.2f}s")


def test_p3_sinkhorn_eps_limit():
    # at eps = 1e4 the entropic optimum sits ~|D - row/col means| / eps from
    # r c^T, so the 1e-6 L1 bound pins the cost scale; the 1/eps decay on
    # unit-scale costs is asserted in test_opta.py
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(20):
        nq, n = int(rng.integers(2, 10)), int(rng.integers(2, 6))
        D = rng.random((nq, n)) * 0.01
        plan = sinkhorn(
            CostMatrix(D, "euclidean"),
            SinkhornConfig(epsilon=1e4, max_iters=1000, tol=1e-13),
        )
        l1 = np.abs(plan.matrix - 1.0 / (nq * n)).sum()
        assert l1 < 1e-6
        worst = max(worst, l1)
    _report("P3", f"20 instances, worst L1 {worst:.2e}")


def test_p4_protonet_oracle_equivalence():
    rng = np.random.default_rng(404)
    checked = 0
    for eid in range(1000):
        if eid % 100 == 0:
            es = random_embedding_set(rng, n_classes=8, per_class=10, d=8)
        k = int(rng.integers(1, 4))
        ep = sample_episode(es, EpisodeSpec(5, k, 5), seed=eid, episode_id=eid)
        protos = compute_prototypes(es, ep)
        for p in classify(es, ep, protos):
            assert p.predicted_class == nearest_prototype(
                es.features[p.query_index], protos.matrix
            )
            checked += 1
    _report("P4", f"1000 episodes, {checked} queries, all agree")


def test_p5_opta_direction_check():
    es = generate_synthetic(SynthSpec(20, 100, 32, 4.0, 1.2, seed=7))
    spec = EpisodeSpec(5, 1, 15)
    cfg = SinkhornConfig(epsilon=0.1)
    start = time.perf_counter()
    diffs = np.empty(1000)
    for eid in range(1000):
        ep = sample_episode(es, spec, seed=7, episode_id=eid)
        proto_acc = episode_accuracy(
            classify(es, ep, compute_prototypes(es, ep)), ep
        )
        opta_acc = episode_accuracy(opta_classify(es, ep, cfg), ep)
        diffs[eid] = opta_acc - proto_acc
    elapsed = time.perf_counter() - start
    mean = diffs.mean()
    ci = 1.96 * diffs.std(ddof=1) / math.sqrt(1000)
    assert mean > 0.03
    assert mean - ci > 0.0
    assert elapsed < 60.0
    _report("P5", f"mean gain {mean:.4f} ± {ci:.4f}, {elapsed:.1f}s")


def test_p6_transport_geometry():
    es = generate_synthetic(SynthSpec(20, 100, 32, 10.0, 0.3, seed=7))
    spec = EpisodeSpec(5, 1, 15)
    cfg = SinkhornConfig(epsilon=1e-3, max_iters=5000, tol=1e-8)
    good = 0
    for eid in range(200):
        ep = sample_episode(es, spec, seed=7, episode_id=eid)
        queries = es.features[ep.query.reshape(-1)]
        protos = compute_prototypes(es, ep)
        plan = sinkhorn(cost_matrix(queries, protos), cfg)
        transported = transport_prototypes(plan, queries)
        if all(
            cosine_sim(transported.matrix[s], es.features[ep.query[s]].mean(0))
            > 0.999
            for s in range(5)
        ):
            good += 1
    assert good >= 198  # >= 99% of 200
    _report("P6", f"{good}/200 episodes above 0.999 cosine")


def test_p7_loss_kernels():
    one_hot = np.zeros(6)
    one_hot[2] = 1.0
    identity = DistillationFixture(
        teacher_cls=one_hot,
        student_cls=one_hot.copy(),
        mask=np.array([True, True]),
        teacher_patch=np.stack([one_hot, one_hot]),
        student_patch=np.stack([one_hot, one_hot]),
        y_masked=np.array([1.0, -2.0]),
        y_recon=np.array([1.0, -2.0]),
    )
    assert loss_cls(identity) == 0.0
    assert loss_patch(identity) == 0.0
    assert loss_mse(identity) == 0.0

    rng = np.random.default_rng(707)
    for _ in range(50):
        K, M = int(rng.integers(2, 9)), int(rng.integers(1, 6))

        def cat(shape):
            x = rng.random(shape) + 1e-3
            return x / x.sum(axis=-1, keepdims=True)

        fix = DistillationFixture(
            teacher_cls=cat(K),
            student_cls=cat(K),
            mask=rng.random(M) < 0.5,
            teacher_patch=cat((M, K)),
            student_patch=cat((M, K)),
            y_masked=rng.standard_normal(7),
            y_recon=rng.standard_normal(7),
        )
        oracle_cls = -sum(
            float(fix.teacher_cls[k])
            * math.log(max(float(fix.student_cls[k]), 1e-12))
            for k in range(K)
        )
        assert abs(loss_cls(fix) - oracle_cls) < 1e-12
        oracle_patch = sum(
            -sum(
                float(fix.teacher_patch[i, k])
                * math.log(max(float(fix.student_patch[i, k]), 1e-12))
                for k in range(K)
            )
            for i in range(M)
            if fix.mask[i]
        )
        assert abs(loss_patch(fix) - oracle_patch) < 1e-12
        oracle_mse = sum(
            (float(a) - float(b)) ** 2
            for a, b in zip(fix.y_masked, fix.y_recon)
        )
        assert abs(loss_mse(fix) - oracle_mse) < 1e-12

    teacher = rng.standard_normal(16)
    student = rng.standard_normal(16)
    assert np.array_equal(ema_update(teacher, student, 1.0), teacher)
    assert np.array_equal(ema_update(teacher, student, 0.0), student)
    _report("P7", "identity fixtures exact, 50 random fixtures within 1e-12")


def test_p8_pseudo_pairing():
    rng = np.random.default_rng(808)
    for trial in range(100):
        B = int(rng.integers(2, 513))
        d = int(rng.integers(2, 17))
        batch = rng.standard_normal((B, d))
        a = assign_pairs(batch)
        # independent per-row scan (recomputes each cosine from scratch)
        for i in range(B):
            best, best_sim = -1, -np.inf
            ni = np.linalg.norm(batch[i])
            for j in range(B):
                if j == i:
                    continue
                nj = np.linalg.norm(batch[j])
                s = float(batch[i] @ batch[j]) / (ni * nj) if ni and nj else 0.0
                if s > best_sim:
                    best, best_sim = j, s
            assert a.pair_of[i] == best
    same = np.tile(np.array([1.0, 2.0, -0.5]), (16, 1))
    assert bce_pair_loss(same, assign_pairs(same)) == pytest.approx(0.0, abs=1e-12)
    _report("P8", "100 batches (B up to 512) match brute force; identical rows -> 0")


def test_p9_thread_determinism(tmp_path):
    data = tmp_path / "p9.fse"
    env = dict(os.environ)
    subprocess.run(
        [sys.executable, "-m", "fseval.cli", "synth", "--classes", "10",
         "--per-class", "40", "--dim", "16", "--seed", "2", "--out", str(data)],
        check=True, env=env,
    )
    outs = []
    for threads in ("1", "8"):
        out = tmp_path / f"p9_{threads}.json"
        subprocess.run(
            [sys.executable, "-m", "fseval.cli", "eval", "--data", str(data),
             "--method", "opta", "--n", "5", "--k", "1", "--q", "15",
             "--episodes", "50", "--seed", "11", "--threads", threads,
             "--out", str(out)],
            check=True, env=env,
        )
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    _report("P9", f"--threads 1 and 8 reports byte-identical ({len(outs[0])} bytes)")


def test_p10_ci_formula():
    es = generate_synthetic(SynthSpec(8, 30, 8, 3.0, 1.5, seed=10))
    rep = run_eval(
        es, EpisodeSpec(5, 1, 5), "proto", SinkhornConfig(), 200, seed=1
    )
    acc = np.array(rep.per_episode_acc)
    recomputed = 1.96 * acc.std(ddof=1) / math.sqrt(acc.size)
    assert abs(rep.ci95 - recomputed) < 1e-12
    spec_case = 1.96 * 0.14 / math.sqrt(2000)
    assert abs(spec_case - 0.00614) < 1e-5
    _report("P10", f"recompute matches ({rep.ci95:.6f}); s=0.14 case {spec_case:.5f}")


def test_p11_sample_bias_sweep():
    es = generate_synthetic(SynthSpec(20, 100, 32, 4.0, 1.2, seed=7))
    reports = sweep(
        es, 5, [1, 2, 3, 4, 5], [15], "proto", SinkhornConfig(), 200, seed=7
    )
    accs = [r.mean_acc for r in reports]
    for a, b in zip(reports, reports[1:]):
        assert b.mean_acc >= a.mean_acc - 2 * max(a.ci95, b.ci95)
    _report("P11", "K=1..5 accuracies " + " ".join(f"{a:.3f}" for a in accs))


@pytest.mark.skipif(
    "MICM_EMBEDDINGS" not in os.environ,
    reason="set MICM_EMBEDDINGS to an exported miniImageNet test-split FSE1 "
    "file to run the real-data reproduction (environment-dependent)",
)
def test_p12_real_data_reproduction():
    from fseval import store

    es = store.load(os.environ["MICM_EMBEDDINGS"])
    if isinstance(es, store.TokenEmbeddingSet):
        from fseval.features import fuse_set

        es = fuse_set(es, "concat")
    rep = run_eval(
        es, EpisodeSpec(5, 1, 15), "opta", SinkhornConfig(), 2000, seed=0,
        threads=os.cpu_count() or 1, keep_per_episode=False,
    )
    assert abs(rep.mean_acc * 100 - 78.40) <= 2.0
    _report("P12", f"real-data 5-way 1-shot {rep.mean_acc * 100:.2f}%")
