"""Seeded random PCNF generation for suites and demos."""

from __future__ import annotations

import random

from .formula import EXISTS, FORALL, PCNF, QuantifierBlock


def random_pcnf(
    seed,
    max_vars: int = 8,
    max_clauses: int = 20,
    max_blocks: int = 4,
    min_clauses: int = 1,
) -> PCNF:
    """One formula, deterministic in ``seed`` (int or random.Random)."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    n_vars = rng.randint(1, max_vars)
    variables = list(range(1, n_vars + 1))

    n_blocks = rng.randint(1, min(max_blocks, n_vars))
    cuts = sorted(rng.sample(range(1, n_vars), n_blocks - 1)) if n_blocks > 1 else []
    bounds = [0] + cuts + [n_vars]
    blocks = []
    for i in range(n_blocks):
        quant = rng.choice((EXISTS, FORALL))
        blocks.append(QuantifierBlock(quant, tuple(variables[bounds[i] : bounds[i + 1]])))

    n_clauses = rng.randint(min_clauses, max_clauses)
    clauses = []
    for _ in range(n_clauses):
        width = rng.randint(1, min(3, n_vars))
        vs = rng.sample(variables, width)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return PCNF(tuple(blocks), tuple(clauses))


def random_suite(count: int, seed: int, **kwargs) -> list[PCNF]:
    rng = random.Random(seed)
    return [random_pcnf(rng, **kwargs) for _ in range(count)]
