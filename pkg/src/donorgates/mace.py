"""Cluster spin dynamics: species-dependent Heisenberg couplings on a
dopant pattern and the readout spin-flip probability via moving-average
cluster expansion (exact diagonalization of the strongest-coupled
cluster around each sampled readout, averaged over readouts).

Initial state: every readout spin up, every control spin down. The
spin-flip probability convention fixes P_sf(0) = 0, i.e.
P_sf = 1/2 - <S^z_readout>.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import HBAR_UEV_PS
from .exchange import IntegratorSettings, PairConfig, exchange_total
from .maps import PolarExchangeTable


@dataclass
class SpinSystem:
    """Dopant positions, species split, and the control orbital state."""
    positions: np.ndarray           # (n, 3) nm, in-plane patterns
    is_control: np.ndarray          # True for the optically driven species
    control_state: str = "1s"       # "1s" | "2ppm"
    control_species: str = "P"
    readout_species: str = "As"

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.is_control = np.asarray(self.is_control, dtype=bool)
        if len(self.positions) != len(self.is_control):
            raise ValueError("positions and species flags disagree in length")

    @property
    def n_sites(self) -> int:
        return len(self.positions)

    def initial_spins(self) -> np.ndarray:
        # readout up, control down
        return np.where(self.is_control, -0.5, 0.5)


@dataclass
class CouplingMatrix:
    values: np.ndarray              # (n, n) symmetric, ueV, zero diagonal
    control_state: str
    cutoff_nm: float

    def __post_init__(self):
        v = self.values
        if v.shape[0] != v.shape[1] or not np.allclose(v, v.T):
            raise ValueError("coupling matrix must be square symmetric")


@dataclass
class Cluster:
    focal: int
    members: np.ndarray             # focal first
    criterion: str = "largest_j"


def sample_spin_system(side_nm: float, density_per_cm2: float, rng,
                       control_state: str = "1s") -> SpinSystem:
    """Equal-density two-species pattern in a square region."""
    lam = density_per_cm2 * 1e-14 * side_nm**2
    n_read = int(rng.poisson(lam))
    n_ctrl = int(rng.poisson(lam))
    pos = np.zeros((n_read + n_ctrl, 3))
    pos[:, :2] = rng.uniform(0.0, side_nm, (n_read + n_ctrl, 2))
    is_ctrl = np.zeros(n_read + n_ctrl, dtype=bool)
    is_ctrl[n_read:] = True
    return SpinSystem(pos, is_ctrl, control_state)


def default_coupling_tables(control_state: str,
                            settings: IntegratorSettings | None = None,
                            polarization=(1.0, 0.0, 0.0)) -> dict:
    """Polar exchange tables for the three species-pair classes.

    Table extents cover each pair's interaction range at the default
    decay threshold with margin; beyond the tabulated radius the
    interpolation extrapolates the exponential tail.
    """
    st = settings or IntegratorSettings(n_samples=20_000, n_iter=5)
    reach = {"1s": 40.0, "2ppm": 60.0, "2p0": 60.0}
    tables = {
        ("readout", "readout"): PolarExchangeTable.build(
            PairConfig("1s", "As", "1s", "As", polarization),
            r_max=40.0, n_r=20, settings=st),
        ("control", "readout"): PolarExchangeTable.build(
            PairConfig(control_state, "P", "1s", "As", polarization),
            r_max=reach[control_state], n_r=26, settings=st),
        ("control", "control"): PolarExchangeTable.build(
            PairConfig(control_state, "P", control_state, "P", polarization),
            r_max=reach[control_state], n_r=26, settings=st),
    }
    return tables


def build_couplings(system: SpinSystem, source: str = "tabulated",
                    cutoff_nm: float = 60.0, tables: Optional[dict] = None,
                    settings: IntegratorSettings | None = None) -> CouplingMatrix:
    """Pairwise exchange couplings, zero beyond the cutoff.

    tabulated: batch interpolation of polar exchange tables (fast path).
    direct: full integral per pair; prohibitive beyond spot checks.
    """
    n = system.n_sites
    J = np.zeros((n, n))
    if n > 1:
        d = system.positions[:, None, :] - system.positions[None, :, :]
        if np.any(np.abs(system.positions[:, 2]) > 1e-9):
            raise ValueError("coupling build expects in-plane patterns")
        dist = np.linalg.norm(d, axis=2)
        iu, ju = np.triu_indices(n, k=1)
        near = dist[iu, ju] <= cutoff_nm
        iu, ju = iu[near], ju[near]
        if source == "tabulated":
            tables = tables or default_coupling_tables(system.control_state,
                                                       settings)
            cls = system.is_control[iu].astype(int) + system.is_control[ju].astype(int)
            for kind, key in ((0, ("readout", "readout")),
                              (1, ("control", "readout")),
                              (2, ("control", "control"))):
                sel = cls == kind
                if not np.any(sel):
                    continue
                vals = tables[key].total(d[iu[sel], ju[sel], 0],
                                         d[iu[sel], ju[sel], 1])
                J[iu[sel], ju[sel]] = vals
        elif source == "direct":
            st = settings or IntegratorSettings(n_samples=40_000)
            for i, j in zip(iu, ju):
                pair = _pair_config(system, i, j)
                J[i, j] = exchange_total(pair, system.positions[j]
                                         - system.positions[i], st).value
        else:
            raise ValueError(f"unknown coupling source {source!r}")
        J[ju, iu] = J[iu, ju]
    return CouplingMatrix(J, system.control_state, cutoff_nm)


def _pair_config(system: SpinSystem, i: int, j: int) -> PairConfig:
    def leg(k):
        if system.is_control[k]:
            return system.control_state, system.control_species
        return "1s", system.readout_species
    s1, sp1 = leg(i)
    s2, sp2 = leg(j)
    return PairConfig(s1, sp1, s2, sp2)


def select_cluster(couplings: CouplingMatrix, system: SpinSystem, focal: int,
                   g: int, criterion: str = "largest_j") -> Cluster:
    """Focal site plus the g-1 strongest-coupled (or nearest) partners.

    Ties break deterministically by site index.
    """
    n = couplings.values.shape[0]
    if g < 1 or g > n:
        raise ValueError("cluster size out of range")
    others = np.array([k for k in range(n) if k != focal])
    if criterion == "largest_j":
        keys = -np.abs(couplings.values[focal, others])
    elif criterion == "nearest":
        keys = np.linalg.norm(system.positions[others]
                              - system.positions[focal], axis=1)
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    order = np.lexsort((others, keys))
    members = np.concatenate(([focal], others[order[:g - 1]]))
    return Cluster(focal, members, criterion)


MAX_CLUSTER = 12


def evolve_cluster(J: np.ndarray, spins0: Sequence[float], t_grid: np.ndarray,
                   focal: int = 0, method: str = "sector") -> np.ndarray:
    """<S^z_focal(t)> under H = sum_{i<j} J_ij S_i . S_j, exactly.

    sector: diagonalize within the conserved total-S^z block of the
    initial product state. full: dense diagonalization of the whole
    2^g space (cross-check path).
    """
    J = np.asarray(J, dtype=float)
    g = J.shape[0]
    if g > MAX_CLUSTER:
        raise ValueError(f"cluster of {g} sites exceeds the {MAX_CLUSTER}-site cap")
    spins0 = np.asarray(spins0, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if g == 1:
        return np.full(t.shape, spins0[0])
    up0 = spins0 > 0
    if method == "sector":
        basis = _sector_basis(g, int(np.count_nonzero(up0)))
        H = _sector_hamiltonian(J, basis, g)
        idx0 = int(np.where(basis == _bits(up0))[0][0])
        E, V = np.linalg.eigh(H)
        amp0 = V[idx0, :]
        phases = np.exp(-1j * np.outer(E, t) / HBAR_UEV_PS)
        coef = V @ (phases * amp0[:, None])
        szf = 0.5 * np.where((basis >> focal) & 1 == 1, 1.0, -1.0)
        return np.real(np.einsum("b,bt->t", szf, np.abs(coef) ** 2))
    if method == "full":
        H = _full_hamiltonian(J, g)
        idx0 = _bits(up0)
        E, V = np.linalg.eigh(H)
        amp0 = V[idx0, :]
        phases = np.exp(-1j * np.outer(E, t) / HBAR_UEV_PS)
        coef = V @ (phases * amp0[:, None])
        states = np.arange(2**g)
        szf = 0.5 * np.where((states >> focal) & 1 == 1, 1.0, -1.0)
        return np.real(np.einsum("b,bt->t", szf, np.abs(coef) ** 2))
    raise ValueError(f"unknown method {method!r}")


def _bits(up: np.ndarray) -> int:
    out = 0
    for i, u in enumerate(up):
        if u:
            out |= 1 << i
    return out


def _sector_basis(g: int, n_up: int) -> np.ndarray:
    states = np.arange(2**g, dtype=np.int64)
    pop = np.zeros(2**g, dtype=np.int64)
    for i in range(g):
        pop += (states >> i) & 1
    return states[pop == n_up]


def _sector_hamiltonian(J: np.ndarray, basis: np.ndarray, g: int) -> np.ndarray:
    pos = {int(b): k for k, b in enumerate(basis)}
    m = len(basis)
    H = np.zeros((m, m))
    for k, b in enumerate(basis):
        diag = 0.0
        for i in range(g):
            si = 0.5 if (b >> i) & 1 else -0.5
            for j in range(i + 1, g):
                if J[i, j] == 0.0:
                    continue
                sj = 0.5 if (b >> j) & 1 else -0.5
                diag += J[i, j] * si * sj
                # flip-flop couples opposite spins with amplitude J/2
                if ((b >> i) & 1) != ((b >> j) & 1):
                    b2 = b ^ ((1 << i) | (1 << j))
                    H[pos[int(b2)], k] += 0.5 * J[i, j]
        H[k, k] = diag
    return H


def _full_hamiltonian(J: np.ndarray, g: int) -> np.ndarray:
    dim = 2**g
    H = np.zeros((dim, dim))
    for b in range(dim):
        diag = 0.0
        for i in range(g):
            si = 0.5 if (b >> i) & 1 else -0.5
            for j in range(i + 1, g):
                if J[i, j] == 0.0:
                    continue
                sj = 0.5 if (b >> j) & 1 else -0.5
                diag += J[i, j] * si * sj
                if ((b >> i) & 1) != ((b >> j) & 1):
                    H[b ^ ((1 << i) | (1 << j)), b] += 0.5 * J[i, j]
        H[b, b] = diag
    return H


def jackknife(samples: np.ndarray) -> tuple[float, float]:
    """Leave-one-out mean and error: sqrt((n-1)/n sum (m_i - m)^2)."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("jackknife needs at least two samples")
    total = x.sum()
    loo = (total - x) / (n - 1)
    mean = float(x.mean())
    err = float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))
    return mean, err


@dataclass
class Trajectory:
    t_ps: np.ndarray
    p_sf: np.ndarray
    err: np.ndarray
    g: int
    n_clusters: int
    seed: int
    per_cluster: Optional[np.ndarray] = field(default=None, repr=False)


def mace_average(system: SpinSystem, couplings: CouplingMatrix, g: int,
                 n_clusters: int, t_grid, seed: int = 0,
                 criterion: str = "largest_j",
                 focals: Optional[np.ndarray] = None) -> Trajectory:
    """Readout spin-flip probability averaged over sampled focal clusters.

    P_sf(t) = 1/2 - <S^z_focal(t)>, jackknifed over clusters. Focal
    readouts are sampled without replacement with the run seed unless an
    explicit focal list is given.
    """
    t = np.asarray(t_grid, dtype=float)
    readout_ids = np.nonzero(~system.is_control)[0]
    if focals is None:
        if n_clusters > len(readout_ids):
            raise ValueError("more clusters requested than readout sites")
        rng = np.random.default_rng(seed)
        focals = rng.choice(readout_ids, size=n_clusters, replace=False)
    trajs = np.empty((len(focals), t.size))
    spins_all = system.initial_spins()
    for row, f in enumerate(np.asarray(focals)):
        cl = select_cluster(couplings, system, int(f), g, criterion)
        Jc = couplings.values[np.ix_(cl.members, cl.members)]
        trajs[row] = evolve_cluster(Jc, spins_all[cl.members], t, focal=0)
    p_cluster = 0.5 - trajs
    n = len(focals)
    mean = p_cluster.mean(axis=0)
    err = np.sqrt((n - 1) / n) * p_cluster.std(axis=0, ddof=0) if n > 1 \
        else np.zeros_like(mean)
    return Trajectory(t, mean, err, g, n, seed, per_cluster=p_cluster)


def excitation_peak_difference(traj_ground: Trajectory,
                               traj_excited: Trajectory) -> tuple[float, float]:
    """Peak |P_sf(excited) - P_sf(ground)| with a jackknife error.

    Requires both trajectories to carry per-cluster data on the same
    focal sample (paired leave-one-out).
    """
    a, b = traj_ground.per_cluster, traj_excited.per_cluster
    if a is None or b is None or a.shape != b.shape:
        raise ValueError("need paired per-cluster trajectories")
    n = a.shape[0]
    diff = np.abs(b.mean(axis=0) - a.mean(axis=0))
    peak = float(diff.max())
    sa, sb = a.sum(axis=0), b.sum(axis=0)
    peaks = np.empty(n)
    for i in range(n):
        d = np.abs((sb - b[i]) - (sa - a[i])) / (n - 1)
        peaks[i] = d.max()
    err = float(np.sqrt((n - 1) / n * np.sum((peaks - peaks.mean()) ** 2)))
    return peak, err
