"""Fairness and rate metrics for allocation outcomes.

Minimum received rates from different topologies or loss settings are not
directly comparable, so experiment reports normalize them against a fixed
per-topology reference: the received rate of the worst-off pair under the
worst source placement if that pair were granted the entire spectrum.
Normalized values above 1 are possible (and expected) for well-placed
sources.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .netgraph import LossParams, PhysicalTopology, build_routing_graph
from .routing import all_pair_routes
from .spectrum import ChannelGrid, SpectrumProfile, generation_rates

logger = logging.getLogger(__name__)


class MetricsError(ValueError):
    """Raised when a metric cannot be computed."""


@dataclass(frozen=True)
class MetricReport:
    """Summary metrics for one allocation outcome."""

    min_rate: float
    min_rate_normalized: float
    jain: float


def jain_index(received: Sequence[float]) -> float:
    """Jain fairness index (sum x)^2 / (k * sum x^2), in [1/k, 1].

    1 means perfectly equal rates.  The all-zero vector is treated as
    perfectly fair and maps to 1 by convention.
    """
    values = list(received)
    if not values:
        raise MetricsError("jain_index needs at least one rate")
    for v in values:
        if not (v >= 0):
            raise MetricsError(f"rates must be >= 0, got {v}")
    square_sum = sum(v * v for v in values)
    if square_sum == 0.0:
        return 1.0
    total = sum(values)
    return (total * total) / (len(values) * square_sum)


def normalization_reference(
    topology: PhysicalTopology,
    loss: LossParams,
    grid: ChannelGrid,
    profile: SpectrumProfile,
    *,
    exclude_u_turns: bool = False,
) -> float:
    """Whole-spectrum rate of the worst pair under the worst placement.

    For every routable source placement, every pair's transmittance is
    multiplied by the total generation rate; the minimum over pairs and
    placements is the reference.  Placements with unroutable pairs are
    skipped with a warning.
    """
    total_rate = generation_rates(grid, profile).total
    reference = None
    for source in topology.node_ids:
        graph = build_routing_graph(topology, source, loss,
                                    exclude_u_turns=exclude_u_turns)
        table = all_pair_routes(graph)
        if table.infeasible:
            logger.warning(
                "normalization: skipping source %s (%d unroutable pairs)",
                source, len(table.infeasible),
            )
            continue
        for plan in table.plans.values():
            value = plan.eta * total_rate
            if reference is None or value < reference:
                reference = value
    if reference is None:
        raise MetricsError(
            f"no routable source placement in topology {topology.name!r}"
        )
    return reference


def normalized_min_rate(min_rate: float, reference: float) -> float:
    """Scale a minimum received rate by the topology reference."""
    if reference <= 0:
        raise MetricsError(f"reference must be > 0, got {reference}")
    return min_rate / reference


def compute_report(received: Sequence[float], reference: float) -> MetricReport:
    """Bundle min rate, its normalized value, and Jain fairness."""
    min_rate = min(received)
    return MetricReport(
        min_rate=min_rate,
        min_rate_normalized=normalized_min_rate(min_rate, reference),
        jain=jain_index(received),
    )
