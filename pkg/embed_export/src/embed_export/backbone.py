"""ResNet50 feature trunk: pooled 2048-d activations, classifier removed."""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn
from torchvision.models import resnet50

from .errors import ExportError

FEATURE_DIM = 2048
INPUT_SIZE = 224
# preprocessing constants shared with the consuming pipeline's embed defaults
CHANNEL_MEAN = (0.485, 0.456, 0.406)
CHANNEL_STD = (0.229, 0.224, 0.225)


def build_backbone(checkpoint: str | Path | None = None, seed: int = 0) -> nn.Module:
    """ResNet50 with the fc head replaced by identity, in eval mode.

    With a checkpoint the state dict is loaded (classifier keys ignored);
    without one the net keeps a seeded random initialization, which is
    deterministic and structurally valid but untrained - fine for format
    and round-trip checks, useless as a learned feature extractor.
    """
    torch.manual_seed(seed)
    model = resnet50(weights=None)
    if checkpoint is not None:
        path = Path(checkpoint)
        if not path.is_file():
            raise ExportError(f"checkpoint not found: {path}")
        try:
            state = torch.load(path, map_location="cpu", weights_only=True)
        except Exception as exc:
            raise ExportError(f"cannot read checkpoint {path}: {exc}") from exc
        if isinstance(state, dict) and "state_dict" in state:
            state = state["state_dict"]
        state = {k: v for k, v in state.items() if not k.startswith("fc.")}
        try:
            # strict=False forgives absent/extra keys but still raises on
            # tensors whose shapes disagree with the ResNet50 layout
            missing, unexpected = model.load_state_dict(state, strict=False)
        except RuntimeError as exc:
            raise ExportError(
                f"checkpoint {path} does not match a ResNet50 trunk: {exc}") from exc
        missing = [k for k in missing if not k.startswith("fc.")]
        if missing or unexpected:
            raise ExportError(
                f"checkpoint {path} does not match a ResNet50 trunk "
                f"(missing {len(missing)}, unexpected {len(unexpected)} keys)")
    model.fc = nn.Identity()
    model.eval()
    return model


def run_native(model: nn.Module, batch: torch.Tensor) -> torch.Tensor:
    """Deterministic eval-mode forward; (N, 3, H, W) float32 -> (N, 2048)."""
    if batch.ndim != 4 or batch.shape[1] != 3:
        raise ExportError(f"expected an (N, 3, H, W) batch, got {tuple(batch.shape)}")
    with torch.no_grad():
        out = model(batch.to(torch.float32))
    if out.shape[1] != FEATURE_DIM:
        raise ExportError(f"backbone emitted dimension {out.shape[1]}, expected {FEATURE_DIM}")
    return out
