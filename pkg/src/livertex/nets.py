"""Network components: encoder, decoder, discriminator, patient classifier.

The encoder halves the spatial extent three times (conv 3x3 stride 1 pad 1,
ReLU, maxpool 2x2), so a 1x224x224 input yields 128x28x28 features. The
decoder mirrors it with nearest-neighbor upsampling and squashes the final
reconstruction into [0, 1]. Inputs are mean/std normalized before the
encoder in every stage of the pipeline.
"""

from __future__ import annotations

import torch
from torch import nn

NORM_MEAN = 0.485
NORM_STD = 0.229

ENCODER_CHANNELS = (32, 64, 128)
DECODER_CHANNELS = (64, 32, 16)
DISCRIMINATOR_CHANNELS = (16, 32, 64, 128)
HEAD_HIDDEN = (64, 32)
FEATURE_DIM = ENCODER_CHANNELS[-1]

_SIGMOID_EPS = 1e-7


def normalize_input(x: torch.Tensor) -> torch.Tensor:
    """Standardize [0,1] images with the fixed pipeline mean/std."""
    return (x - NORM_MEAN) / NORM_STD


class Encoder(nn.Module):
    """Three conv/ReLU/maxpool stages; the downstream feature extractor."""

    def __init__(self, in_channels: int = 1, channels=ENCODER_CHANNELS):
        super().__init__()
        self.in_channels = in_channels
        self.channels = tuple(channels)
        stages = []
        c_in = in_channels
        for c_out in self.channels:
            stages.append(nn.Sequential(
                nn.Conv2d(c_in, c_out, kernel_size=3, stride=1, padding=1),
                nn.ReLU(),
                nn.MaxPool2d(kernel_size=2, stride=2),
            ))
            c_in = c_out
        self.stages = nn.ModuleList(stages)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ValueError(f"expected B x {self.in_channels} x H x W, got {tuple(x.shape)}")
        down = 2 ** len(self.stages)
        if x.shape[2] % down or x.shape[3] % down or x.shape[2] < down or x.shape[3] < down:
            raise ValueError(f"spatial dims must be multiples of {down}, got {tuple(x.shape[2:])}")
        for stage in self.stages:
            x = stage(x)
        return x


def extract_feature(encoder: Encoder, batch: torch.Tensor) -> torch.Tensor:
    """Per-slice feature vector: adaptive 1x1 average pooling, flattened (B x C)."""
    feats = encoder(batch)
    return torch.nn.functional.adaptive_avg_pool2d(feats, 1).flatten(1)


class Decoder(nn.Module):
    """Three upsample/conv/ReLU stages plus a final conv squashed to [0, 1]."""

    def __init__(self, in_features: int = FEATURE_DIM, channels=DECODER_CHANNELS,
                 out_channels: int = 1):
        super().__init__()
        self.in_features = in_features
        self.channels = tuple(channels)
        self.out_channels = out_channels
        stages = []
        c_in = in_features
        for c_out in self.channels:
            stages.append(nn.Sequential(
                nn.Upsample(scale_factor=2, mode="nearest"),
                nn.Conv2d(c_in, c_out, kernel_size=3, stride=1, padding=1),
                nn.ReLU(),
            ))
            c_in = c_out
        self.stages = nn.ModuleList(stages)
        self.final = nn.Conv2d(c_in, out_channels, kernel_size=3, stride=1, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != self.in_features:
            raise ValueError(f"expected B x {self.in_features} x h x w, got {tuple(x.shape)}")
        for stage in self.stages:
            x = stage(x)
        return torch.sigmoid(self.final(x))


class Discriminator(nn.Module):
    """Four strided conv stages ending in one realness score per image.

    Stage order is conv, batchnorm (stages 2-4), leaky ReLU (slope 0.2),
    dropout 0.25; outputs are clamped a hair inside (0, 1) so the BCE terms
    stay finite even at saturation.
    """

    def __init__(self, image_size: int = 224, in_channels: int = 1,
                 channels=DISCRIMINATOR_CHANNELS):
        super().__init__()
        self.image_size = image_size
        self.in_channels = in_channels
        self.channels = tuple(channels)
        if image_size < 2 ** len(self.channels) // 2:
            raise ValueError(f"image_size {image_size} too small for {len(self.channels)} stages")
        stages = []
        c_in = in_channels
        side = image_size
        for i, c_out in enumerate(self.channels):
            layers = [nn.Conv2d(c_in, c_out, kernel_size=3, stride=2, padding=1)]
            if i > 0:
                layers.append(nn.BatchNorm2d(c_out))
            layers += [nn.LeakyReLU(0.2), nn.Dropout(0.25)]
            stages.append(nn.Sequential(*layers))
            c_in = c_out
            side = (side - 1) // 2 + 1  # conv 3x3 stride 2 pad 1
        self.stages = nn.ModuleList(stages)
        self.fc = nn.Linear(self.channels[-1] * side * side, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != self.in_channels or \
                x.shape[2] != self.image_size or x.shape[3] != self.image_size:
            raise ValueError(
                f"expected B x {self.in_channels} x {self.image_size} x {self.image_size}, "
                f"got {tuple(x.shape)}")
        for stage in self.stages:
            x = stage(x)
        score = torch.sigmoid(self.fc(x.flatten(1))).squeeze(1)
        return score.clamp(_SIGMOID_EPS, 1.0 - _SIGMOID_EPS)


class ClassifierHead(nn.Module):
    """Two slice-level fc layers, mean pooling over slices, one output fc."""

    def __init__(self, num_categories: int, feature_dim: int = FEATURE_DIM,
                 hidden=HEAD_HIDDEN):
        super().__init__()
        self.num_categories = num_categories
        self.feature_dim = feature_dim
        self.hidden = tuple(hidden)
        h1, h2 = self.hidden
        self.fc1 = nn.Linear(feature_dim, h1)
        self.fc2 = nn.Linear(h1, h2)
        self.fc3 = nn.Linear(h2, num_categories)

    def forward(self, slice_features: torch.Tensor) -> torch.Tensor:
        return classify_patient(self, slice_features)


def classify_patient(head: ClassifierHead, slice_features: torch.Tensor) -> torch.Tensor:
    """Patient logits from an S x feature_dim stack of slice features.

    Slice order never matters: the per-slice fc outputs are mean-pooled
    before the final layer.
    """
    if slice_features.ndim != 2 or slice_features.shape[1] != head.feature_dim:
        raise ValueError(
            f"expected S x {head.feature_dim} features, got {tuple(slice_features.shape)}")
    if slice_features.shape[0] < 1:
        raise ValueError("patient has no slices")
    local = torch.relu(head.fc2(torch.relu(head.fc1(slice_features))))
    pooled = local.mean(dim=0)
    return head.fc3(pooled)


class SliceClassifier(nn.Module):
    """Encoder + head bundle used for fine-tuning and scoring."""

    def __init__(self, encoder: Encoder, head: ClassifierHead):
        super().__init__()
        self.encoder = encoder
        self.head = head

    def patient_logits(self, slices: torch.Tensor) -> torch.Tensor:
        """Logits for one patient given an S x 1 x H x W normalized stack."""
        return classify_patient(self.head, extract_feature(self.encoder, slices))
