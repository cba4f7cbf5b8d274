"""FSE1 file writer (the engine's external interface).

Layout: magic ``FSE1``, little-endian u32 n, d, c, u8 kind (0 fused,
1 tokens); fused: n*d f32 features then n u32 labels; tokens: u32 p, per
sample [cls d f32][patches p*d f32][attn p f32], then n u32 labels.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"FSE1"


def write_fused(path, features: np.ndarray, labels: np.ndarray, c: int) -> None:
    n, d = features.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIIB", n, d, c, 0))
        fh.write(np.ascontiguousarray(features, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(labels, dtype="<u4").tobytes())


def write_tokens(path, cls_tokens: np.ndarray, patch_tokens: np.ndarray,
                 attn_weights: np.ndarray, labels: np.ndarray, c: int) -> None:
    n, d = cls_tokens.shape
    p = patch_tokens.shape[1]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIIB", n, d, c, 1))
        fh.write(struct.pack("<I", p))
        for i in range(n):
            fh.write(np.ascontiguousarray(cls_tokens[i], dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(patch_tokens[i], dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(attn_weights[i], dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(labels, dtype="<u4").tobytes())
