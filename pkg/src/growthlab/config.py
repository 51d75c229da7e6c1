"""Search guards; GROWTHLAB_BUDGET overrides the node/evaluation budgets."""
from __future__ import annotations

import os

SUPPORT_BOUND = 24
SUBSET_EVALUATIONS = 2**20
NODE_BUDGET = 10**7
MAX_MODULUS = 2**22


def budget(default: int) -> int:
    raw = os.environ.get("GROWTHLAB_BUDGET")
    if raw is None or raw == "":
        return default
    return int(raw)
