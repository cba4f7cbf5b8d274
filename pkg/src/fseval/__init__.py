"""Few-shot evaluation engine over precomputed embeddings."""

from .bench import EvalReport, SynthSpec, generate_synthetic, run_eval, sweep
from .features import Prototypes, compute_prototypes, cosine_sim, fuse_tokens, l2_normalize
from .opta import SinkhornConfig, TransportPlan, cost_matrix, opta_classify, sinkhorn, sinkhorn_backend, transport_prototypes
from .pairs import PairAssignment, assign_pairs, bce_pair_loss
from .protonet import Prediction, classify, episode_accuracy
from .sampler import Episode, EpisodeSpec, sample_episode
from .store import EmbeddingSet, TokenEmbeddingSet, load, load_csv, save

__version__ = "0.1.0"
