"""Resource caps and the exceptions raised when they are hit."""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

DEFAULT_MAX_N = 6
DEFAULT_DP_COATOM_CAP = 22


class CapExceeded(RuntimeError):
    """A configured resource cap (n, coatom count, depth) was exceeded."""


class BudgetExceeded(RuntimeError):
    """The cooperative time budget ran out; ``partial`` describes how far we got."""

    def __init__(self, message: str, partial: dict | None = None):
        super().__init__(message)
        self.partial = partial or {}


def max_n() -> int:
    return int(os.environ.get("TUFFLEY_MAX_N", DEFAULT_MAX_N))


@dataclass
class Budget:
    seconds: float | None = None
    started: float = field(default_factory=time.monotonic)

    def check(self, where: str = "", partial: dict | None = None) -> None:
        if self.seconds is not None and time.monotonic() - self.started > self.seconds:
            raise BudgetExceeded(f"time budget of {self.seconds}s exhausted {where}".strip(), partial)


UNLIMITED = Budget()
