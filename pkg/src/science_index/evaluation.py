"""Desk-scale experiment harness.

Reproduces the shape of the published experiments over synthetic
populations: density data exports, the data-share score shift, and the
resource-disparity (north/south) convergence study. Everything is a
pure function of its spec's seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .bibliometrics import CareerStats
from .errors import EmptyInput
from .regression import (FeatureVector, ModelConfig, ModelState, fit_batch)
from .scoring import MODE_LITERAL, MODE_SHARE_BONUS, score

# slope coefficients of the shipped model, reused as the synthetic
# data-generating process (no intercept: that is what makes score
# distributions match across resource-scaled groups by construction)
_GEN_SLOPES = (0.06902, 0.10867, 0.00304)


@dataclass(frozen=True)
class DensitySeries:
    """Normalized histogram of one score population."""

    label: str
    values: tuple
    bin_edges: tuple
    bin_densities: tuple

    def integral(self) -> float:
        widths = np.diff(self.bin_edges)
        return float(np.sum(widths * np.asarray(self.bin_densities)))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_left", "bin_right", "density"])
            for left, right, density in zip(self.bin_edges[:-1],
                                            self.bin_edges[1:],
                                            self.bin_densities):
                writer.writerow([repr(float(left)), repr(float(right)),
                                 repr(float(density))])


def export_density(scores, bins: int, label: str = "") -> DensitySeries:
    """Histogram normalized so that sum(density * width) == 1."""
    scores = [float(s) for s in scores]
    if not scores:
        raise EmptyInput("scores must be non-empty")
    if bins < 2:
        raise EmptyInput(f"need at least 2 bins, got {bins}")
    densities, edges = np.histogram(scores, bins=bins, density=True)
    return DensitySeries(label=label, values=tuple(scores),
                         bin_edges=tuple(float(e) for e in edges),
                         bin_densities=tuple(float(d) for d in densities))


@dataclass(frozen=True)
class PopulationSpec:
    """Generator parameters for one synthetic researcher cohort.

    resource_scale multiplies every covariate *and* the actual h-index,
    modelling a uniformly resource-starved group whose members progress
    at the same relative rate.
    """

    size: int
    seed: int
    career_length_range: tuple = (1, 40)
    paper_rate: float = 1.2        # papers per career year
    citation_rate: float = 12.0    # citations per paper
    share_mean: float = 0.0        # Poisson mean of data-share counts
    resource_scale: float = 1.0
    delta_noise_std: float = 1.5

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("size must be > 0")
        if self.resource_scale <= 0:
            raise ValueError("resource_scale must be > 0")


def generate_population(spec: PopulationSpec):
    """Deterministic synthetic cohort; identical spec -> identical output."""
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.career_length_range
    career = rng.integers(lo, hi, size=spec.size, endpoint=True)
    papers = np.maximum(
        1, np.rint(spec.paper_rate * career
                   * np.exp(rng.normal(0.0, 0.25, spec.size))).astype(int))
    cites = np.maximum(
        0, np.rint(spec.citation_rate * papers
                   * np.exp(rng.normal(0.0, 0.35, spec.size))).astype(int))
    noise = rng.normal(0.0, spec.delta_noise_std, spec.size)
    if spec.share_mean > 0:
        shares = rng.poisson(spec.share_mean, spec.size)
    else:
        shares = np.zeros(spec.size, dtype=int)

    w1, w2, w3 = _GEN_SLOPES
    h_true = w1 * career + w2 * papers + w3 * cites + noise
    s = spec.resource_scale
    out = []
    for i in range(spec.size):
        pubs = max(1, int(round(s * papers[i])))
        h = int(round(s * h_true[i]))
        out.append(CareerStats(
            career_length=max(0, int(round(s * career[i]))),
            publication_count=pubs,
            citation_count=max(0, int(round(s * cites[i]))),
            h_index=min(max(h, 0), pubs),
            data_share_count=int(shares[i]),
            author_id=f"synth-{spec.seed}-{i}",
        ))
    return out


def run_share_shift_experiment(population, model: ModelState,
                               share_weight: float):
    """Per-author score shift from data sharing.

    shift = phi with the author's recorded shares minus phi with shares
    zeroed, both in share-bonus mode under the same model. Returns
    (mean shift, list of per-author shifts).
    """
    population = list(population)
    if not population:
        raise EmptyInput("population must be non-empty")
    shifts = []
    for stats in population:
        with_shares = score(stats, model, MODE_SHARE_BONUS, share_weight).phi
        without = score(stats.with_share_count(0), model,
                        MODE_SHARE_BONUS, share_weight).phi
        shifts.append(with_shares - without)
    return math.fsum(shifts) / len(shifts), shifts


@dataclass(frozen=True)
class GroupSummary:
    label: str
    mean_h_index: float
    mean_phi: float
    h_density: DensitySeries
    phi_density: DensitySeries


@dataclass(frozen=True)
class NorthSouthReport:
    north: GroupSummary
    south: GroupSummary
    h_gap: float
    phi_gap: float
    gap_ratio: float
    model: ModelState

    def to_payload(self) -> dict:
        def group(g):
            return {"label": g.label,
                    "mean_h_index": float(g.mean_h_index),
                    "mean_phi": float(g.mean_phi)}
        return {"north": group(self.north), "south": group(self.south),
                "h_gap": float(self.h_gap), "phi_gap": float(self.phi_gap),
                "gap_ratio": float(self.gap_ratio)}


def _summarize(label, population, model, bins):
    phis = [score(s, model, MODE_LITERAL).phi for s in population]
    hs = [float(s.h_index) for s in population]
    return GroupSummary(
        label=label,
        mean_h_index=math.fsum(hs) / len(hs),
        mean_phi=math.fsum(phis) / len(phis),
        h_density=export_density(hs, bins, label=f"{label}_h_index"),
        phi_density=export_density(phis, bins, label=f"{label}_phi"),
    )


def run_north_south_experiment(north: PopulationSpec, south: PopulationSpec,
                               model_config: ModelConfig | None = None,
                               bins: int = 20) -> NorthSouthReport:
    """Fit on the pooled cohorts, score both, compare group means.

    The two specs must be identical apart from resource_scale and seed,
    so any score gap is attributable to the resource disparity alone.
    """
    if replace(north, resource_scale=1.0, seed=0) != \
       replace(south, resource_scale=1.0, seed=0):
        raise ValueError("specs may differ only in resource_scale and seed")
    model_config = model_config or ModelConfig()
    pop_north = generate_population(north)
    pop_south = generate_population(south)
    pooled = [FeatureVector.from_career_stats(s, model_config.augmented)
              for s in pop_north + pop_south]
    model = fit_batch(model_config, pooled)
    g_north = _summarize("north", pop_north, model, bins)
    g_south = _summarize("south", pop_south, model, bins)
    h_gap = abs(g_north.mean_h_index - g_south.mean_h_index)
    phi_gap = abs(g_north.mean_phi - g_south.mean_phi)
    return NorthSouthReport(
        north=g_north, south=g_south, h_gap=h_gap, phi_gap=phi_gap,
        gap_ratio=phi_gap / h_gap if h_gap else 0.0, model=model)
