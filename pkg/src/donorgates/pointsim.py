"""Monte Carlo simulation of gate statistics on Poisson dopant patterns.

Patterns are sampled uniformly in a square or cubic region, neighbour
queries run on uniform cell grids (linear total cost), and gate tallies
follow the haystack classification: viable controls are isolated by
r_cc, their readout shells are searched for candidates, and candidates
count as active when isolated from the rest of the local haystack.

Boundary policies: periodic minimum-image wrapping (default, unbiased)
or open boxes where tallies discard a margin strip wide enough that no
classified configuration can reach outside.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .constants import PER_CM2_TO_PER_NM2, PER_CM3_TO_PER_NM3
from .geometry import GateGeometry


@dataclass(frozen=True)
class SimRegion:
    """Square (2D) or cubic (3D) sample region."""
    dimension: int
    side_nm: float
    boundary: str = "periodic"      # "periodic" | "open"

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if self.side_nm <= 0:
            raise ValueError("region side must be positive")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"unknown boundary policy {self.boundary!r}")

    @property
    def measure_nm(self) -> float:
        return self.side_nm**self.dimension

    def interior_measure_nm(self, margin: float) -> float:
        side = self.side_nm - 2.0 * margin
        if side <= 0:
            raise ValueError("margin swallows the whole region")
        return side**self.dimension


def _density_to_nm(density_per_cm: float, dim: int) -> float:
    return density_per_cm * (PER_CM2_TO_PER_NM2 if dim == 2 else PER_CM3_TO_PER_NM3)


def _density_from_nm(density_per_nm: float, dim: int) -> float:
    return density_per_nm / (PER_CM2_TO_PER_NM2 if dim == 2 else PER_CM3_TO_PER_NM3)


def sample_points(region: SimRegion, density_per_cm: float, rng) -> np.ndarray:
    """Poisson point pattern as an (n, 3) array; z stays 0 in 2D."""
    if density_per_cm < 0:
        raise ValueError("density must be nonnegative")
    lam = _density_to_nm(density_per_cm, region.dimension) * region.measure_nm
    n = int(rng.poisson(lam))
    pts = np.zeros((n, 3))
    pts[:, :region.dimension] = rng.uniform(0.0, region.side_nm,
                                            (n, region.dimension))
    return pts


@dataclass
class SpatialGrid:
    """Cell lists over one point set, sized for one query radius."""
    dims: np.ndarray                # (3,) cells per axis
    starts: np.ndarray
    order: np.ndarray
    box: np.ndarray                 # (3,) side lengths


def build_grid(points: np.ndarray, region: SimRegion, radius: float) -> SpatialGrid:
    """Cell size targets the mean nearest-neighbour spacing, clamped to
    [radius/4, radius] so bucket scans stay O(1) per query."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    n = max(len(points), 1)
    dens = n / region.measure_nm
    if region.dimension == 2:
        mean_nn = 0.5 / math.sqrt(dens)
    else:
        mean_nn = 0.55396 / dens ** (1.0 / 3.0)
    cell = min(max(mean_nn, radius / 4.0), radius)
    per_axis = max(int(region.side_nm / cell), 1)
    dims = np.array([per_axis, per_axis,
                     per_axis if region.dimension == 3 else 1], dtype=np.int64)
    box = np.array([region.side_nm, region.side_nm,
                    region.side_nm if region.dimension == 3 else 1.0])
    cells = kernels.cell_index(points, box, dims)
    starts, order = kernels.bucket_sort(cells, int(dims[0] * dims[1] * dims[2]))
    return SpatialGrid(dims, starts, order, box)


def mark_isolated(points: np.ndarray, radius: float, region: SimRegion,
                  grid: Optional[SpatialGrid] = None) -> np.ndarray:
    """True where no other point lies within radius (Algorithm 1 semantics)."""
    if len(points) == 0:
        return np.zeros(0, dtype=bool)
    grid = grid or build_grid(points, region, radius)
    return kernels.mark_isolated(points, grid.box, grid.dims, grid.starts,
                                 grid.order, radius,
                                 region.boundary == "periodic")


def _interior(points: np.ndarray, region: SimRegion, margin: float) -> np.ndarray:
    if region.boundary == "periodic":
        return np.ones(len(points), dtype=bool)
    d = region.dimension
    lo, hi = margin, region.side_nm - margin
    return np.all((points[:, :d] >= lo) & (points[:, :d] <= hi), axis=1)


@dataclass
class GateTally:
    """Configuration counts from one classified pattern."""
    viable_controls: int = 0
    k1: int = 0
    k2: int = 0
    k3: int = 0
    k4plus: int = 0
    exex_pairs: int = 0
    exex_active: int = 0
    region_measure_nm: float = 0.0

    def k_total(self) -> int:
        return self.k1 + self.k2 + self.k3 + self.k4plus


def classify_gates(controls: np.ndarray, readouts: np.ndarray,
                   geom: GateGeometry, region: SimRegion) -> tuple[GateTally, np.ndarray]:
    """Haystack classification of every control against the readout set.

    Returns the tally plus the per-control active-readout count k
    (-2 non-viable, -1 killed by an r_min readout). Open regions tally
    controls in the interior only: the margin covers both the control
    isolation radius and the haystack gather radius.
    """
    periodic = region.boundary == "periodic"
    margin = max(geom.r_cc, geom.r_max + geom.r_rr)
    measure = (region.measure_nm if periodic
               else region.interior_measure_nm(margin))
    tally = GateTally(region_measure_nm=measure)
    if len(controls) == 0:
        return tally, np.zeros(0, dtype=np.int64)
    viable = mark_isolated(controls, geom.r_cc, region)
    if len(readouts) == 0:
        kcount = np.where(viable, 0, -2).astype(np.int64)
    else:
        rgrid = build_grid(readouts, region, geom.r_max + geom.r_rr)
        kcount = kernels.haystack_classify(
            controls, viable, readouts, rgrid.box, rgrid.dims, rgrid.starts,
            rgrid.order, geom.r_min, geom.r_max, geom.r_rr, periodic)
    subject = _interior(controls, region, margin)
    tally.viable_controls = int(np.count_nonzero(subject & (kcount != -2)))
    kk = kcount[subject]
    tally.k1 = int(np.count_nonzero(kk == 1))
    tally.k2 = int(np.count_nonzero(kk == 2))
    tally.k3 = int(np.count_nonzero(kk == 3))
    tally.k4plus = int(np.count_nonzero(kk >= 4))
    return tally, kcount


def pair_gates(points: np.ndarray, geom: GateGeometry,
               region: SimRegion) -> tuple[GateTally, np.ndarray]:
    """Mutually isolated pairs within one species.

    A point is active when exactly one other point lies within r_cc, that
    partner also has only it within r_cc, and their separation exceeds
    r_pair_min. Returns the tally and the per-point active flags.
    """
    periodic = region.boundary == "periodic"
    measure = (region.measure_nm if periodic
               else region.interior_measure_nm(geom.r_cc))
    tally = GateTally(region_measure_nm=measure)
    if len(points) == 0:
        return tally, np.zeros(0, dtype=bool)
    grid = build_grid(points, region, geom.r_cc)
    cnt, partner, pd2 = kernels.pair_neighbours(
        points, grid.box, grid.dims, grid.starts, grid.order, geom.r_cc, periodic)
    single = cnt == 1
    mutual = single & (partner >= 0)
    mutual &= single[np.clip(partner, 0, len(points) - 1)]
    mutual &= partner[np.clip(partner, 0, len(points) - 1)] == np.arange(len(points))
    active = mutual & (pd2 > geom.r_pair_min**2)
    subject = _interior(points, region, geom.r_cc)
    act_in = active & subject
    tally.exex_active = int(np.count_nonzero(act_in))
    # each unordered pair counted once: both ends active, halve interior ends
    both_in = act_in & subject[np.clip(partner, 0, len(points) - 1)]
    tally.exex_pairs = int(np.count_nonzero(act_in)
                           - np.count_nonzero(both_in) // 2)
    return tally, active


@dataclass
class TrialStats:
    """Per-trial densities (per cm^dim) for each tallied quantity."""
    n_trials: int
    region: SimRegion
    quantities: dict = field(default_factory=dict)

    def values(self, name: str) -> np.ndarray:
        return self.quantities[name]

    def mean(self, name: str) -> float:
        return float(np.mean(self.quantities[name]))

    def std(self, name: str) -> Optional[float]:
        if self.n_trials < 2:
            return None
        return float(np.std(self.quantities[name], ddof=1))


def _gate_trial(seed, region, geom, control_density, readout_density,
                include_pairs):
    rng = np.random.default_rng(seed)
    controls = sample_points(region, control_density, rng)
    readouts = sample_points(region, readout_density, rng)
    tally, _ = classify_gates(controls, readouts, geom, region)
    out = {
        "viable_control": tally.viable_controls,
        "gate_k1": tally.k1,
        "gate_k2": tally.k2,
        "gate_k3": tally.k3,
        "gate_k4plus": tally.k4plus,
    }
    measure = tally.region_measure_nm
    if include_pairs:
        ptally, _ = pair_gates(controls, geom, region)
        out["exex_active"] = ptally.exex_active * measure / ptally.region_measure_nm
        out["exex_pair"] = ptally.exex_pairs * measure / ptally.region_measure_nm
    return out, measure


def run_trials(region: SimRegion, geom: GateGeometry, control_density: float,
               readout_density: float, n_trials: int, seed: int = 0,
               include_pairs: bool = False, threads: int = 1) -> TrialStats:
    """Independent classification trials with derived sub-seeds.

    Returns densities per cm^dim for viable controls, k = 1..4+ gate
    configurations and (optionally) excited-excited pair activity on the
    control pattern. Trials may run on a thread pool; the kernels drop
    the GIL and results aggregate in trial order regardless.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    seeds = np.random.SeedSequence(seed).spawn(n_trials)
    args = [(s, region, geom, control_density, readout_density, include_pairs)
            for s in seeds]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda a: _gate_trial(*a), args))
    else:
        results = [_gate_trial(*a) for a in args]
    quantities: dict[str, list] = {}
    for counts, measure in results:
        for name, value in counts.items():
            dens = _density_from_nm(value / measure, region.dimension)
            quantities.setdefault(name, []).append(dens)
    return TrialStats(n_trials, region,
                      {k: np.asarray(v) for k, v in quantities.items()})


def run_isolation_trials(region: SimRegion, radius: float, density: float,
                         n_trials: int, seed: int = 0) -> np.ndarray:
    """Isolated fraction per trial at the given total density."""
    if n_trials < 1:
        raise ValueError("need at least one trial")
    fractions = np.empty(n_trials)
    for i, s in enumerate(np.random.SeedSequence(seed).spawn(n_trials)):
        rng = np.random.default_rng(s)
        pts = sample_points(region, density, rng)
        if len(pts) == 0:
            fractions[i] = np.nan
            continue
        viable = mark_isolated(pts, radius, region)
        inside = _interior(pts, region, radius)
        n_in = int(np.count_nonzero(inside))
        fractions[i] = (np.count_nonzero(viable & inside) / n_in
                        if n_in else np.nan)
    return fractions
