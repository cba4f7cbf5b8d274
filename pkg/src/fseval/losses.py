"""Forward-only reference kernels for the pretraining objectives.

These exist so external trainers can diff their loss math against exact
scalar definitions: cls-token cross-entropy, masked-patch cross-entropy
(raw sum over masked patches), pixel MSE (raw sum of squares), and the
EMA teacher update. Fixtures arrive as JSON documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, ParseError, UnnormalizedDistribution

LOG_CLAMP = 1e-12
NORM_TOL = 1e-6


@dataclass
class DistillationFixture:
    teacher_cls: np.ndarray  # (K,) categorical
    student_cls: np.ndarray  # (K,) categorical
    mask: np.ndarray  # (M,) bool
    teacher_patch: np.ndarray  # (M, K) categorical rows
    student_patch: np.ndarray  # (M, K) categorical rows
    y_masked: np.ndarray  # masked-pixel targets
    y_recon: np.ndarray  # masked-pixel reconstructions

    @classmethod
    def from_json(cls, path) -> "DistillationFixture":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot parse fixture: {exc}") from exc
        try:
            fix = cls(
                teacher_cls=np.asarray(doc["teacher_cls"], dtype=np.float64),
                student_cls=np.asarray(doc["student_cls"], dtype=np.float64),
                mask=np.asarray(doc["mask"], dtype=bool),
                teacher_patch=np.asarray(doc["teacher_patch"], dtype=np.float64),
                student_patch=np.asarray(doc["student_patch"], dtype=np.float64),
                y_masked=np.asarray(doc["y_masked"], dtype=np.float64),
                y_recon=np.asarray(doc["y_recon"], dtype=np.float64),
            )
        except KeyError as exc:
            raise ParseError(f"fixture missing field {exc}") from exc
        if fix.mask.shape[0] != fix.teacher_patch.shape[0]:
            raise LengthMismatch("mask length does not match patch count")
        if fix.teacher_patch.shape != fix.student_patch.shape:
            raise LengthMismatch("teacher/student patch shapes differ")
        return fix


def _check_normalized(dist: np.ndarray, name: str) -> None:
    if (dist < 0).any():
        raise UnnormalizedDistribution(f"{name} has negative mass")
    total = dist.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise UnnormalizedDistribution(f"{name} sums to {total}, expected 1")


def cross_entropy(x: np.ndarray, y: np.ndarray) -> float:
    """H(x, y) = -sum_k x_k log y_k, with y clamped to >= 1e-12."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(f"shapes {x.shape} vs {y.shape}")
    _check_normalized(x, "x")
    _check_normalized(y, "y")
    # + 0.0 folds the -0.0 that an exact-match one-hot produces
    return float(-(x * np.log(np.maximum(y, LOG_CLAMP))).sum() + 0.0)


def loss_cls(fix: DistillationFixture) -> float:
    return cross_entropy(fix.teacher_cls, fix.student_cls)


def loss_patch(fix: DistillationFixture, normalize: bool = False) -> float:
    """Sum over masked patches of H(teacher_i, student_i); optionally divided
    by the masked-patch count for trainer parity checks."""
    total = sum(
        cross_entropy(fix.teacher_patch[i], fix.student_patch[i])
        for i in range(fix.mask.shape[0])
        if fix.mask[i]
    )
    if normalize:
        count = int(fix.mask.sum())
        return total / count if count else 0.0
    return float(total)


def loss_mse(fix: DistillationFixture) -> float:
    """Raw sum of squared differences over masked-pixel values."""
    if fix.y_masked.shape != fix.y_recon.shape:
        raise LengthMismatch(
            f"target/reconstruction shapes {fix.y_masked.shape} vs "
            f"{fix.y_recon.shape}"
        )
    diff = fix.y_masked - fix.y_recon
    return float((diff * diff).sum())


def ema_update(teacher: np.ndarray, student: np.ndarray, m: float) -> np.ndarray:
    """m * teacher + (1 - m) * student, elementwise."""
    teacher = np.asarray(teacher, dtype=np.float64)
    student = np.asarray(student, dtype=np.float64)
    if teacher.shape != student.shape:
        raise LengthMismatch(f"shapes {teacher.shape} vs {student.shape}")
    if not 0.0 <= m <= 1.0:
        raise UnnormalizedDistribution(f"momentum must be in [0, 1], got {m}")
    return m * teacher + (1.0 - m) * student
