#!/usr/bin/env python3
"""Regenerate the bundled per-layer tables from torchvision architecture definitions.

Requires torch + torchvision (dev-only dependency, not needed at runtime).
Writes src/scaleout/data/layers/<model>.csv with one row per parameter tensor,
ordered output-to-input (backward completion order), columns:

    layer,name,bytes,cost

bytes  -- parameter-gradient size, scaled so each model's total matches the
          published size exactly (decimal bytes); vgg16's big fc weight is
          pinned to 400e6.
cost   -- relative backward-compute weight of the owning module, attached to
          the module's first tensor in backward order (0 for the rest).
          Convolutions/linears get 2x their forward MAC count (backward runs
          two GEMM-shaped passes); batch norms get a small elementwise term.
"""

import csv
from pathlib import Path

import torch
from torch import nn
from torchvision import models

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "scaleout" / "data" / "layers"

TARGET_BYTES = {"resnet50": 97_000_000, "resnet101": 170_000_000, "vgg16": 527_000_000}
VGG16_PINNED = {"classifier.0.weight": 400_000_000}


def module_costs(model: nn.Module) -> dict[str, float]:
    """Relative backward cost per parameterized module, from one dummy forward."""
    costs: dict[str, float] = {}
    handles = []

    def hook(name):
        def fn(mod, inputs, output):
            out_elems = output.numel()
            if isinstance(mod, nn.Conv2d):
                k = mod.kernel_size[0] * mod.kernel_size[1]
                macs = out_elems * k * (mod.in_channels // mod.groups)
                costs[name] = 2.0 * macs
            elif isinstance(mod, nn.Linear):
                costs[name] = 2.0 * mod.in_features * mod.out_features
            elif isinstance(mod, nn.BatchNorm2d):
                costs[name] = 4.0 * out_elems
        return fn

    for name, mod in model.named_modules():
        if isinstance(mod, (nn.Conv2d, nn.Linear, nn.BatchNorm2d)):
            handles.append(mod.register_forward_hook(hook(name)))
    with torch.no_grad():
        model(torch.zeros(1, 3, 224, 224))
    for h in handles:
        h.remove()
    return costs


def apportion(raw: list[int], target: int) -> list[int]:
    """Scale raw sizes to integer bytes summing to target (largest remainder)."""
    total = sum(raw)
    exact = [r * target / total for r in raw]
    floored = [int(x) for x in exact]
    shortfall = target - sum(floored)
    order = sorted(range(len(raw)), key=lambda i: exact[i] - floored[i], reverse=True)
    for i in order[:shortfall]:
        floored[i] += 1
    return floored


def build_table(model_name: str) -> list[tuple[int, str, int, float]]:
    model = getattr(models, model_name)(weights=None)
    costs = module_costs(model)

    # reversed registration order approximates gradient completion order
    params = list(reversed(list(model.named_parameters())))
    names = [n for n, _ in params]
    raw_bytes = [p.numel() * 4 for _, p in params]

    pinned = VGG16_PINNED if model_name == "vgg16" else {}
    pin_total = sum(pinned.values())
    free_idx = [i for i, n in enumerate(names) if n not in pinned]
    free_scaled = apportion([raw_bytes[i] for i in free_idx],
                            TARGET_BYTES[model_name] - pin_total)
    sizes = [0] * len(names)
    for i, n in enumerate(names):
        if n in pinned:
            sizes[i] = pinned[n]
    for j, i in enumerate(free_idx):
        sizes[i] = free_scaled[j]
    assert sum(sizes) == TARGET_BYTES[model_name]

    rows = []
    seen_modules: set[str] = set()
    for idx, name in enumerate(names):
        module = name.rsplit(".", 1)[0]
        cost = 0.0
        if module not in seen_modules:
            seen_modules.add(module)
            cost = costs[module]
        rows.append((idx, name, sizes[idx], cost))
    return rows


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for model_name in TARGET_BYTES:
        rows = build_table(model_name)
        path = OUT_DIR / f"{model_name}.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["layer", "name", "bytes", "cost"])
            for row in rows:
                w.writerow([row[0], row[1], row[2], repr(row[3])])
        total = sum(r[2] for r in rows)
        print(f"{model_name}: {len(rows)} tensors, {total} bytes -> {path}")


if __name__ == "__main__":
    main()
