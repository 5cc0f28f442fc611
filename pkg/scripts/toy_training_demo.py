#!/usr/bin/env python3
"""Train the toy denoiser, then adapt it to a shifted target with CLN-only
fine-tuning, printing loss milestones along the way."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from svcforge.diffusion import (
    CLN_PARAM_NAMES,
    ConditionSet,
    ToyDenoiser,
    TrainConfig,
    evaluate_l2,
    finetune_cln,
    linear_schedule,
    pseudo_speaker_embedding,
    train_toy,
)


def make_dataset(n_items, dim, seed):
    rng = np.random.default_rng(seed)
    dataset = []
    for k in range(n_items):
        cond = ConditionSet(
            linguistic=rng.normal(size=(4, 8)),
            log_f0_vuv=rng.normal(size=(4, 2)),
            loudness=rng.normal(size=4),
            speaker_embedding=pseudo_speaker_embedding(seed + k, 4),
        )
        dataset.append((rng.normal(scale=0.5, size=dim), cond))
    return dataset


def main() -> int:
    sched = linear_schedule()
    dataset = make_dataset(n_items=8, dim=8, seed=1)
    model = ToyDenoiser(dim=8, cond_dim=dataset[0][1].summary().size,
                        speaker_dim=4, hidden=48, seed=2)

    history = train_toy(model, dataset, sched,
                        TrainConfig(steps=2000, lr=2e-3, p_uncond=0.1, seed=3))
    for lo in range(0, 2000, 400):
        print(f"pretrain steps {lo:4d}-{lo + 399:4d}: "
              f"mean loss {history[lo:lo + 400].mean():8.4f}")

    target = pseudo_speaker_embedding(99, 4)
    shifted = [(x0 + 1.0, cond) for x0, cond in dataset]
    before = evaluate_l2(model, shifted, sched, embedding=target)
    non_cln = [n for n in model.params if n not in CLN_PARAM_NAMES]
    rest_hash = model.param_hash(non_cln)

    finetune_cln(model, shifted, sched, iterations=500,
                 target_embedding=target, lr=2e-3, seed=4)

    after = evaluate_l2(model, shifted, sched, embedding=target)
    print(f"finetune (CLN only, 500 iters): eval loss {before:.4f} -> {after:.4f}")
    print(f"non-CLN parameters untouched: {model.param_hash(non_cln) == rest_hash}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
