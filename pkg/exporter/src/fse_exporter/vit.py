"""Minimal ViT backbone that exposes per-sample cls/patch tokens and the
last transformer layer's cls-to-patch attention (averaged over heads)."""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F


class Attention(nn.Module):
    def __init__(self, dim, num_heads):
        super().__init__()
        assert dim % num_heads == 0
        self.num_heads = num_heads
        self.scale = (dim // num_heads) ** -0.5
        self.qkv = nn.Linear(dim, dim * 3)
        self.proj = nn.Linear(dim, dim)

    def forward(self, x):
        B, T, C = x.shape
        qkv = self.qkv(x).reshape(B, T, 3, self.num_heads, C // self.num_heads)
        q, k, v = qkv.permute(2, 0, 3, 1, 4)
        attn = F.softmax(q @ k.transpose(-2, -1) * self.scale, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(B, T, C)
        return self.proj(out), attn


class Block(nn.Module):
    def __init__(self, dim, num_heads, mlp_ratio=4.0):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = Attention(dim, num_heads)
        self.norm2 = nn.LayerNorm(dim)
        hidden = int(dim * mlp_ratio)
        self.mlp = nn.Sequential(
            nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim)
        )

    def forward(self, x):
        attn_out, attn = self.attn(self.norm1(x))
        x = x + attn_out
        x = x + self.mlp(self.norm2(x))
        return x, attn


class VisionTransformer(nn.Module):
    def __init__(self, image_size=32, patch_size=8, in_chans=3, dim=64,
                 depth=2, num_heads=4):
        super().__init__()
        assert image_size % patch_size == 0
        self.image_size = image_size
        self.num_patches = (image_size // patch_size) ** 2
        self.dim = dim
        self.patch_embed = nn.Conv2d(in_chans, dim, kernel_size=patch_size,
                                     stride=patch_size)
        self.cls_token = nn.Parameter(torch.zeros(1, 1, dim))
        self.pos_embed = nn.Parameter(
            torch.zeros(1, 1 + self.num_patches, dim)
        )
        self.blocks = nn.ModuleList(
            [Block(dim, num_heads) for _ in range(depth)]
        )
        self.norm = nn.LayerNorm(dim)
        nn.init.trunc_normal_(self.pos_embed, std=0.02)
        nn.init.trunc_normal_(self.cls_token, std=0.02)

    @torch.no_grad()
    def forward_tokens(self, images):
        """Returns (cls (B, d), patches (B, p, d), attn (B, p)) where attn is
        the head-averaged cls-to-patch row of the final layer."""
        x = self.patch_embed(images).flatten(2).transpose(1, 2)
        cls = self.cls_token.expand(x.shape[0], -1, -1)
        x = torch.cat([cls, x], dim=1) + self.pos_embed
        attn = None
        for block in self.blocks:
            x, attn = block(x)
        x = self.norm(x)
        cls_attn = attn[:, :, 0, 1:].mean(dim=1)
        return x[:, 0], x[:, 1:], cls_attn


def build_model(model: str, seed: int = 0) -> VisionTransformer:
    """'tiny' builds a seeded random-init backbone; anything else is treated
    as a checkpoint path holding {'config': ..., 'state_dict': ...}."""
    if model == "tiny":
        torch.manual_seed(seed)
        net = VisionTransformer()
    else:
        payload = torch.load(model, map_location="cpu", weights_only=True)
        net = VisionTransformer(**payload.get("config", {}))
        net.load_state_dict(payload["state_dict"])
    net.eval()
    return net
