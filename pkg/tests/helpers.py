import numpy as np

from fseval.store import EmbeddingSet, TokenEmbeddingSet


def random_embedding_set(rng, n_classes=4, per_class=8, d=6) -> EmbeddingSet:
    features = rng.standard_normal((n_classes * per_class, d))
    labels = np.repeat(np.arange(n_classes), per_class)
    perm = rng.permutation(labels.size)
    return EmbeddingSet(
        features=features[perm].astype(np.float32).astype(np.float64),
        labels=labels[perm],
        c=n_classes,
    )


def random_token_set(rng, n_classes=3, per_class=4, d=5, p=7) -> TokenEmbeddingSet:
    n = n_classes * per_class
    return TokenEmbeddingSet(
        cls_tokens=rng.standard_normal((n, d)).astype(np.float32).astype(np.float64),
        patch_tokens=rng.standard_normal((n, p, d)).astype(np.float32).astype(np.float64),
        attn_weights=(rng.random((n, p)) + 0.01).astype(np.float32).astype(np.float64),
        labels=np.repeat(np.arange(n_classes), per_class),
        c=n_classes,
    )
