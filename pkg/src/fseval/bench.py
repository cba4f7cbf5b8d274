"""Episode-loop benchmark harness: accuracy aggregation with 95% confidence
intervals, K/Q sweeps, and synthetic embedding generation.

Reports are canonically serialized (sorted keys, 17-significant-digit
floats) so runs can be diffed byte-for-byte; wall_time is kept out of the
canonical form to preserve that.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import child_seed
from .errors import InvalidConfig
from .features import compute_prototypes
from .opta import SinkhornConfig, opta_classify, sinkhorn_backend
from .protonet import classify, episode_accuracy
from .sampler import EpisodeSpec, sample_episode
from .store import EmbeddingSet

METHODS = ("proto", "opta")


@dataclass(frozen=True)
class SynthSpec:
    classes: int
    per_class: int
    dim: int
    mean_radius: float
    noise_sigma: float
    seed: int

    def __post_init__(self):
        if self.classes < 1 or self.per_class < 1 or self.dim < 1:
            raise InvalidConfig("classes, per_class, and dim must be positive")
        if self.mean_radius < 0 or self.noise_sigma < 0:
            raise InvalidConfig("mean_radius and noise_sigma must be >= 0")


@dataclass
class EvalReport:
    method: str
    spec: EpisodeSpec
    episodes: int
    seed: int
    mean_acc: float
    std: float
    ci95: float
    config: dict
    per_episode_acc: list[float] | None = None
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_wall_time: bool = False) -> dict:
        doc = {
            "method": self.method,
            "n_way": self.spec.n_way,
            "k_shot": self.spec.k_shot,
            "q_query": self.spec.q_query,
            "episodes": self.episodes,
            "seed": self.seed,
            "mean_acc": self.mean_acc,
            "std": self.std,
            "ci95": self.ci95,
            "config": dict(self.config),
        }
        if self.per_episode_acc is not None:
            doc["per_episode_acc"] = list(self.per_episode_acc)
        if include_wall_time:
            doc["wall_time"] = self.wall_time
        return doc

    def to_canonical_json(self) -> str:
        return canonical_json(self.to_dict())


def canonical_json(obj) -> str:
    """Canonical JSON: sorted keys, floats at 17 significant digits."""
    if isinstance(obj, dict):
        items = ",".join(
            f'"{k}":{canonical_json(obj[k])}' for k in sorted(obj)
        )
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite value {obj} in report")
        return format(obj, ".17g")
    if isinstance(obj, (int, str)) or obj is None:
        import json

        return json.dumps(obj)
    raise TypeError(f"cannot canonicalize {type(obj)!r}")


def ci95_halfwidth(per_episode_acc: np.ndarray) -> float:
    """1.96 * sample std (n-1 divisor) / sqrt(n); 0 for fewer than 2 episodes."""
    n = per_episode_acc.shape[0]
    if n < 2:
        return 0.0
    return float(1.96 * per_episode_acc.std(ddof=1) / math.sqrt(n))


def generate_synthetic(spec: SynthSpec) -> EmbeddingSet:
    """Class means uniform on the radius-R sphere plus isotropic Gaussian
    noise; balanced labels, deterministic in the seed."""
    rng = np.random.default_rng(spec.seed)
    directions = rng.standard_normal((spec.classes, spec.dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    means = spec.mean_radius * directions / norms
    noise = rng.standard_normal((spec.classes, spec.per_class, spec.dim))
    features = (means[:, None, :] + spec.noise_sigma * noise).reshape(
        spec.classes * spec.per_class, spec.dim
    )
    labels = np.repeat(np.arange(spec.classes), spec.per_class)
    return EmbeddingSet(features=features, labels=labels, c=spec.classes)


def evaluate_episode(
    es: EmbeddingSet,
    spec: EpisodeSpec,
    method: str,
    cfg: SinkhornConfig,
    metric: str,
    seed: int,
    episode_id: int,
) -> float:
    ep = sample_episode(es, spec, seed, episode_id)
    if method == "proto":
        preds = classify(es, ep, compute_prototypes(es, ep))
    elif method == "opta":
        preds = opta_classify(es, ep, cfg, metric)
    else:
        raise InvalidConfig(f"unknown method {method!r}")
    return episode_accuracy(preds, ep)


def run_eval(
    es: EmbeddingSet,
    spec: EpisodeSpec,
    method: str,
    cfg: SinkhornConfig,
    episodes: int,
    seed: int,
    metric: str = "sq-euclidean-normalized",
    threads: int = 1,
    fusion: str | None = None,
    keep_per_episode: bool = True,
    progress=None,
) -> EvalReport:
    """Evaluate episodes 0..episodes-1 with per-episode child seeds.

    Results are gathered into a slot array by episode_id, so the report is
    identical for any thread count.
    """
    if episodes < 1:
        raise InvalidConfig(f"episodes must be >= 1, got {episodes}")
    if method not in METHODS:
        raise InvalidConfig(f"unknown method {method!r}")
    start = time.perf_counter()
    acc = np.empty(episodes)

    def worker(eid: int) -> None:
        acc[eid] = evaluate_episode(es, spec, method, cfg, metric, seed, eid)

    if threads <= 1:
        for eid in range(episodes):
            worker(eid)
            if progress and (eid + 1) % 1000 == 0:
                progress(eid + 1)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = 0
            for _ in pool.map(worker, range(episodes)):
                done += 1
                if progress and done % 1000 == 0:
                    progress(done)
    config = {
        "eps": cfg.epsilon,
        "sinkhorn_iters": cfg.max_iters,
        "sinkhorn_tol": cfg.tol,
        "passes": cfg.passes,
        "cost_metric": metric,
        "fusion": fusion if fusion is not None else "none",
        "backend": sinkhorn_backend(),
    }
    return EvalReport(
        method=method,
        spec=spec,
        episodes=episodes,
        seed=seed,
        mean_acc=float(acc.mean()),
        std=float(acc.std(ddof=1)) if episodes > 1 else 0.0,
        ci95=ci95_halfwidth(acc),
        config=config,
        per_episode_acc=acc.tolist() if keep_per_episode else None,
        wall_time=time.perf_counter() - start,
    )


def sweep(
    es: EmbeddingSet,
    n_way: int,
    k_list: list[int],
    q_list: list[int],
    method: str,
    cfg: SinkhornConfig,
    episodes: int,
    seed: int,
    metric: str = "sq-euclidean-normalized",
    threads: int = 1,
) -> list[EvalReport]:
    """One report per (K, Q) grid point. All points share the base seed, so
    episode class draws are paired across the grid; a 1x1 grid reproduces a
    plain run_eval exactly."""
    reports = []
    for k in k_list:
        for q in q_list:
            reports.append(
                run_eval(
                    es,
                    EpisodeSpec(n_way=n_way, k_shot=k, q_query=q),
                    method,
                    cfg,
                    episodes,
                    seed,
                    metric=metric,
                    threads=threads,
                    keep_per_episode=False,
                )
            )
    return reports


def sweep_csv(reports: list[EvalReport]) -> str:
    lines = ["k,q,mean_acc,ci95"]
    for rep in reports:
        lines.append(
            f"{rep.spec.k_shot},{rep.spec.q_query},"
            f"{rep.mean_acc:.17g},{rep.ci95:.17g}"
        )
    return "\n".join(lines) + "\n"


def grid_seed(seed: int, grid_index: int) -> int:
    """Derived seed for callers that want decorrelated grid points."""
    return child_seed(seed, grid_index)
