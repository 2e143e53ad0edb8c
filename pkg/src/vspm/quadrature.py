"""Composite Simpson quadrature on uniform nodes.

The weights are exposed separately so callers can integrate many integrand
rows at once with a single matrix product.
"""

from functools import lru_cache

import numpy as np

from vspm.errors import ConfigError


def check_node_count(n):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ConfigError(f"quadrature node count must be an integer, got {n!r}")
    if n <= 0:
        raise ConfigError(f"quadrature node count must be positive, got {n}")
    if n < 3 or n % 2 == 0:
        raise ConfigError(f"composite Simpson needs an odd node count >= 3, got {n}")
    return int(n)


@lru_cache(maxsize=64)
def _unit_weights(n):
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w.setflags(write=False)
    return w


def simpson_nodes(a, b, n):
    """Return ``(nodes, weights)`` for composite Simpson over ``[a, b]``."""
    n = check_node_count(n)
    h = (b - a) / (n - 1)
    return np.linspace(a, b, n), _unit_weights(n) * (h / 3.0)


def simpson(values, a, b):
    """Integrate samples taken on ``simpson_nodes(a, b, n)``.

    ``values`` may be 1-D, or 2-D with the node axis last.
    """
    values = np.asarray(values, dtype=float)
    _, w = simpson_nodes(a, b, values.shape[-1])
    return values @ w
