import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def image_dataset(tmp_path):
    """Two classes x 25 images of deterministic random pixels (50 total)."""
    rng = np.random.default_rng(2024)
    root = tmp_path / "dataset"
    for cls in ("class_a", "class_b"):
        cls_dir = root / cls
        cls_dir.mkdir(parents=True)
        for i in range(25):
            pixels = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
            Image.fromarray(pixels).save(cls_dir / f"img_{i:03d}.png")
    return root
