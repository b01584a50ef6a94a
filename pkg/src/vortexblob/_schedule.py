"""Fixed-step schedule that lands exactly on the final time."""

import math
from typing import Iterator


def step_schedule(T: float, dt: float) -> Iterator[float]:
    """Full steps of dt, plus one shorter final step so the sum is T."""
    n_full = int(math.floor(T / dt + 1e-9))
    rem = T - n_full * dt
    for _ in range(n_full):
        yield dt
    if rem > 1e-12 * max(1.0, T):
        yield rem
