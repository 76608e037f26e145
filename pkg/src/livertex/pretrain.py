"""Self-supervised restoration pretraining.

Each batch corrupts its slices by patch swapping, reconstructs them with
encoder+decoder, and scores reconstruction error as RMSE against the
uncorrupted originals (in [0,1] space). Optionally a discriminator is
trained alongside and its non-saturating BCE term is added to the
generator loss with weight adv_weight. Generator and discriminator hold
disjoint parameter sets and are stepped alternately, generator first.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace

import numpy as np
import torch

from . import nets
from .corruption import CorruptionSpec, corrupt, derive_seed
from .state import state_from_module


def rmse_loss(recon: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Root of the mean squared error over every element of the batch."""
    if recon.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(recon.shape)} vs {tuple(target.shape)}")
    return torch.sqrt(torch.mean((recon - target) ** 2))


def binary_cross_entropy(p: torch.Tensor, label: float) -> torch.Tensor:
    """Mean BCE of probabilities p against a constant 0/1 label."""
    p = torch.as_tensor(p)
    if p.numel() == 0:
        raise ValueError("empty probability batch")
    with torch.no_grad():
        if float(p.min()) <= 0.0 or float(p.max()) >= 1.0:
            raise ValueError("probabilities must lie strictly inside (0, 1)")
    if label == 1:
        return -torch.log(p).mean()
    if label == 0:
        return -torch.log1p(-p).mean()
    raise ValueError(f"label must be 0 or 1, got {label}")


def adversarial_losses(d_real: torch.Tensor, d_fake: torch.Tensor):
    """(generator term, discriminator term) from realness probabilities.

    The discriminator term is BCE(d_real, 1) + BCE(d_fake, 0); the
    generator term is the non-saturating BCE(d_fake, 1).
    """
    gen_term = binary_cross_entropy(d_fake, 1)
    disc_term = binary_cross_entropy(d_real, 1) + binary_cross_entropy(d_fake, 0)
    return gen_term, disc_term


@dataclass
class PretrainConfig:
    epochs: int = 700
    batch_size: int = 30
    lr: float = 2e-4
    betas: tuple[float, float] = (0.9, 0.999)
    adv_weight: float = 0.01
    adversarial_enabled: bool = True
    corruption: CorruptionSpec = field(default_factory=CorruptionSpec)
    seed: int = 0

    def __post_init__(self):
        if self.adv_weight < 0:
            raise ValueError(f"adv_weight must be >= 0, got {self.adv_weight}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class PretrainHistory:
    rmse: list[float] = field(default_factory=list)
    gen_adv: list[float] = field(default_factory=list)
    disc: list[float] = field(default_factory=list)

    def write_csv(self, path: str) -> None:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "rmse", "gen_adv", "disc"])
            for i in range(len(self.rmse)):
                w.writerow([i, f"{self.rmse[i]:.17g}", f"{self.gen_adv[i]:.17g}",
                            f"{self.disc[i]:.17g}"])


def corruption_seed(base_seed: int, epoch: int, slice_index: int) -> int:
    """Per-slice corruption seed; independent of batching or worker layout."""
    return derive_seed(derive_seed(base_seed, epoch), slice_index)


def pretrain(slices: np.ndarray, config: PretrainConfig,
             deterministic: bool = False, log_every: int = 0):
    """Train encoder+decoder (and optionally a discriminator) on a slice corpus.

    slices: N x H x W array in [0, 1], H = W divisible by 16.
    Returns (generator ModelState, discriminator ModelState or None, history).
    """
    stack = np.asarray(slices, dtype=np.float32)
    if stack.ndim != 3 or stack.shape[0] == 0:
        raise ValueError("corpus must be a non-empty N x H x W stack")
    n, h, w = stack.shape
    if h != w:
        raise ValueError(f"slices must be square, got {h}x{w}")
    if h % 16:
        raise ValueError(f"slice side must be a multiple of 16, got {h}")

    with determinism_scope(deterministic):
        torch.manual_seed(config.seed)
        encoder = nets.Encoder()
        decoder = nets.Decoder()
        disc = nets.Discriminator(image_size=h) if config.adversarial_enabled else None

        gen_params = list(encoder.parameters()) + list(decoder.parameters())
        opt_g = torch.optim.Adam(gen_params, lr=config.lr, betas=config.betas)
        opt_d = (torch.optim.Adam(disc.parameters(), lr=config.lr, betas=config.betas)
                 if disc is not None else None)

        history = PretrainHistory()
        for epoch in range(config.epochs):
            order = np.random.default_rng(derive_seed(config.seed, (1 << 48) | epoch)).permutation(n)
            sums = np.zeros(3)
            count = 0
            for start in range(0, n, config.batch_size):
                idx = order[start:start + config.batch_size]
                originals = stack[idx]
                corrupted = np.stack([
                    corrupt(stack[j], replace(config.corruption,
                                              rng_seed=corruption_seed(config.seed, epoch, int(j))))[0]
                    for j in idx])
                orig_t = torch.from_numpy(originals).unsqueeze(1)
                corr_t = torch.from_numpy(corrupted).unsqueeze(1)

                opt_g.zero_grad()
                recon = decoder(encoder(nets.normalize_input(corr_t)))
                rmse = rmse_loss(recon, orig_t)
                if disc is not None:
                    gen_adv = binary_cross_entropy(disc(recon), 1)
                    loss_g = rmse + config.adv_weight * gen_adv
                else:
                    gen_adv = torch.zeros(())
                    loss_g = rmse
                loss_g.backward()
                opt_g.step()

                disc_loss = torch.zeros(())
                if disc is not None:
                    opt_d.zero_grad()
                    disc_loss = (binary_cross_entropy(disc(orig_t), 1)
                                 + binary_cross_entropy(disc(recon.detach()), 0))
                    disc_loss.backward()
                    opt_d.step()

                b = len(idx)
                sums += b * np.array([rmse.item(), gen_adv.item(), disc_loss.item()])
                count += b
            history.rmse.append(sums[0] / count)
            history.gen_adv.append(sums[1] / count)
            history.disc.append(sums[2] / count)
            if log_every and (epoch + 1) % log_every == 0:
                print(f"epoch {epoch + 1}/{config.epochs} "
                      f"rmse={history.rmse[-1]:.5f} disc={history.disc[-1]:.5f}")

    provenance = {
        "seed": config.seed,
        "epochs": config.epochs,
        "rmse_curve": [float(v) for v in history.rmse],
        "adversarial_enabled": config.adversarial_enabled,
        "adv_weight": config.adv_weight,
    }
    gen_module = torch.nn.ModuleDict({"encoder": encoder, "decoder": decoder})
    gen_state = state_from_module(
        gen_module, "encoder_decoder",
        {"in_channels": 1, "encoder_channels": list(encoder.channels),
         "decoder_channels": list(decoder.channels)},
        provenance)
    disc_state = None
    if disc is not None:
        disc_state = state_from_module(
            disc, "discriminator",
            {"image_size": h, "in_channels": 1, "channels": list(disc.channels)},
            provenance)
    return gen_state, disc_state, history


class determinism_scope:
    """Scoped single-threaded deterministic execution (fixed reduction order)."""

    def __init__(self, enabled: bool):
        self.enabled = enabled

    def __enter__(self):
        if self.enabled:
            self.prev_threads = torch.get_num_threads()
            self.prev_flag = torch.are_deterministic_algorithms_enabled()
            torch.set_num_threads(1)
            torch.use_deterministic_algorithms(True)
        return self

    def __exit__(self, *exc):
        if self.enabled:
            torch.set_num_threads(self.prev_threads)
            torch.use_deterministic_algorithms(self.prev_flag)
        return False
