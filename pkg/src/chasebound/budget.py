"""Wall-clock and work-count budgets for the search procedures."""

from __future__ import annotations

import os
import time

from .errors import BudgetExceededError

ENV_BUDGET_MS = "CHASEBOUND_BUDGET_MS"


class Budget:
    """Tracks elapsed time and two work counters against optional caps.

    ``max_ms`` defaults to the CHASEBOUND_BUDGET_MS environment variable when
    unset; a missing variable means no time cap.  ``steps`` counts fine-grained
    work (trigger applications, search nodes) and ``items`` counts coarse units
    (factbases, derivations).
    """

    def __init__(self, max_ms: float | None = None, max_steps: int | None = None,
                 max_items: int | None = None):
        if max_ms is None:
            env = os.environ.get(ENV_BUDGET_MS)
            if env:
                max_ms = float(env)
        self.max_ms = max_ms
        self.max_steps = max_steps
        self.max_items = max_items
        self.steps = 0
        self.items = 0
        self._start = time.monotonic()

    @property
    def elapsed_ms(self) -> float:
        return (time.monotonic() - self._start) * 1000.0

    def _fail(self, what: str) -> None:
        raise BudgetExceededError(
            f"budget exceeded ({what}) after {self.steps} steps / {self.items} items",
            steps=self.steps, items=self.items, elapsed_ms=self.elapsed_ms)

    def spend_step(self, n: int = 1) -> None:
        self.steps += n
        if self.max_steps is not None and self.steps > self.max_steps:
            self._fail("steps")
        # Time is polled here as well so long step-free stretches cannot stall.
        if self.max_ms is not None and self.steps % 64 == 0 and self.elapsed_ms > self.max_ms:
            self._fail("time")

    def spend_item(self, n: int = 1) -> None:
        self.items += n
        if self.max_items is not None and self.items > self.max_items:
            self._fail("items")
        if self.max_ms is not None and self.elapsed_ms > self.max_ms:
            self._fail("time")
