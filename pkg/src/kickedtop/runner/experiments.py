"""Experiment drivers: one function per experiment kind, each returning tables.

Disorder realization ``i`` of every run uses the seed
``realization_seed(config.seed, i)``, so results depend only on the config.
Averages over realizations are reduced in realization order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from .. import __version__
from ..classical import classical_entropy_trajectory, sample_gaussian_ensemble
from ..errors import CapacityError, ConfigError, NumericalValidationError
from ..full import (FIELD, DisorderRealization, FullFloquet, embed_dicke,
                    floquet_parity_block, parity_blocks, realization_seed,
                    rotation_parity_block)
from ..models import ChaoticGrowth, NoisyGrowth, RegularGrowth
from ..observables import (EigenDecomposition, chi_overlap, effective_dimension,
                           single_qubit_entropy, subsystem_linear_entropy)
from ..spectral import (COE, POISSON, SpacingHistogram, eigenangle_density,
                        eigenangles, ks_distance, reference_pdf, unfold)
from ..symmetric import (coherent_state, entropy_trajectory, expectation_j,
                         floquet_symmetric, single_qubit_entropy_from_j)
from .config import ExperimentConfig
from .table import ResultTable

# budget for batched full-space states and their FWHT temporaries
STATE_MEMORY_BYTES = 2 * 1024**3
ENGINE_AGREEMENT = 1e-8
UNITARITY_ATOL = 1e-10
DIMENSIONLESS = "1"


# ---- shared helpers -------------------------------------------------------------

def draw_realizations(cfg: ExperimentConfig, N: int, w: float) -> list:
    """Realizations for one ``(N, w)``; a clean run needs only one."""
    if w == 0:
        return [DisorderRealization.clean(N)]
    if cfg.realizations < 1:
        raise ConfigError("disordered runs need realizations >= 1")
    return [DisorderRealization.draw(N, w, realization_seed(cfg.seed, i), cfg.disorder)
            for i in range(cfg.realizations)]


def mean_and_error(values, axis: int = 0):
    """Mean and standard error (zero for a single sample)."""
    values = np.asarray(values, dtype=float)
    count = values.shape[axis]
    mean = values.mean(axis=axis)
    if count < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=axis, ddof=1) / np.sqrt(count)


def _metadata(cfg: ExperimentConfig, started: float, **extra) -> dict:
    meta = {"experiment": cfg.kind, "code_version": __version__, "seed": cfg.seed}
    meta.update({k: v for k, v in extra.items()})
    meta["wall_time_s"] = f"{time.perf_counter() - started:.3f}"
    meta.update({f"config.{k}": v for k, v in cfg.echo().items()})
    return meta


def _check_state_memory(N: int, batch: int):
    needed = 16 * 2**N * batch * 4
    if needed > STATE_MEMORY_BYTES:
        raise CapacityError(
            f"{batch} full-space states at N={N} need about {needed / 1024**3:.1f} GiB; "
            "reduce N or the realization count"
        )


def _pool_map(func, items, workers: int) -> list:
    if workers <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _sample_kicks(cfg: ExperimentConfig) -> np.ndarray:
    return np.arange(cfg.window_start, cfg.window_end + 1, cfg.stride)


def _full_evolution(cfg, N, w, theta, phi, kicks, observe, sample_at=None):
    """Evolve the coherent state under every realization; yield observations.

    ``observe`` maps a batch of x-frame states to per-realization values.
    Entropies and the symmetric overlap are unchanged by the global
    Hadamard, so states stay in the x frame throughout.
    """
    reals = draw_realizations(cfg, N, w)
    _check_state_memory(N, len(reals))
    engine = FullFloquet(cfg.top_params(N), reals)
    psi0 = embed_dicke(coherent_state(theta, phi, N))
    x = engine.to_x_frame(np.tile(psi0, (len(reals), 1)))
    wanted = None if sample_at is None else set(int(n) for n in sample_at)
    out = []
    if wanted is None or 0 in wanted:
        out.append(observe(x))
    for n in range(1, kicks + 1):
        x = engine.step_x_frame(x)
        if wanted is None or n in wanted:
            out.append(observe(x))
    return np.array(out)


def _entropy_observer(Q: int):
    if Q == 1:
        return single_qubit_entropy
    return partial(subsystem_linear_entropy, Q=Q)


def _write(table: ResultTable, cfg: ExperimentConfig, suffix: str = ""):
    if cfg.output:
        path = cfg.output
        if suffix:
            stem, dot, ext = path.rpartition(".")
            path = f"{stem}{suffix}.{ext}" if dot else f"{path}{suffix}"
        table.write(path)


# ---- entanglement versus time -------------------------------------------------------

def _symmetric_entropy(cfg, N, theta, phi, kicks):
    U = floquet_symmetric(cfg.top_params(N))
    return entropy_trajectory(coherent_state(theta, phi, N), U, kicks)


def entropy_curves(cfg: ExperimentConfig, N: int, w: float, theta: float, phi: float):
    """``(mean, stderr)`` of ``S_Q`` after kicks ``0..cfg.kicks``.

    The clean single-qubit case runs in the symmetric subspace; when
    ``check_engines`` is set and ``N <= 10`` it is cross-checked against the
    full engine.
    """
    if w == 0 and cfg.Q == 1:
        S = _symmetric_entropy(cfg, N, theta, phi, cfg.kicks)
        if cfg.check_engines and N <= 10:
            full = _full_evolution(cfg, N, 0.0, theta, phi, cfg.kicks, single_qubit_entropy)[:, 0]
            gap = float(np.max(np.abs(full - S)))
            if gap > ENGINE_AGREEMENT:
                raise NumericalValidationError(
                    f"symmetric and full engines disagree by {gap:.2e} at N={N}")
        return S, np.zeros_like(S)
    values = _full_evolution(cfg, N, w, theta, phi, cfg.kicks, _entropy_observer(cfg.Q))
    return mean_and_error(values, axis=1)


def smooth_pairs(S) -> np.ndarray:
    """Centered ``[1/4, 1/2, 1/4]`` filter; removes a period-2 kick oscillation."""
    S = np.asarray(S, dtype=float)
    if S.size < 3:
        return S.copy()
    out = S.copy()
    out[1:-1] = 0.25 * S[:-2] + 0.5 * S[1:-1] + 0.25 * S[2:]
    return out


def revival_location(S, N: int, search=(1.5, np.inf)) -> float:
    """``n/N`` of the deepest dip of the smoothed curve inside ``search``."""
    S = smooth_pairs(S)
    scaled = np.arange(S.size) / N
    mask = (scaled >= search[0]) & (scaled <= search[1])
    if not np.any(mask):
        return float("nan")
    idx = np.flatnonzero(mask)
    return float(scaled[idx[np.argmin(S[idx])]])


def run_entropy_time(cfg: ExperimentConfig) -> ResultTable:
    started = time.perf_counter()
    rows = []
    revivals = {}
    for N in cfg.N:
        n = np.arange(cfg.kicks + 1)
        for w in cfg.w:
            for theta, phi in cfg.states:
                S, err = entropy_curves(cfg, N, w, theta, phi)
                block = [np.full_like(S, N), np.full_like(S, w), np.full_like(S, theta),
                         np.full_like(S, phi), n]
                if cfg.kind == "revival-scan":
                    block += [n / N, n / np.sqrt(N), S, err, smooth_pairs(S)]
                    revivals[f"N={N},w={w},state=({theta},{phi})"] = revival_location(S, N)
                else:
                    block += [S, err]
                rows.append(np.column_stack(block))
    Q = f"S_{cfg.Q}"
    columns = ["N", "w", "theta0", "phi0", "n"]
    units = ["qubits", DIMENSIONLESS, "rad", "rad", "kicks"]
    if cfg.kind == "revival-scan":
        columns += ["n/N", "n/sqrt(N)", Q, "stderr", Q + "_smoothed"]
        units += [DIMENSIONLESS] * 5
    else:
        columns += [Q, "stderr"]
        units += [DIMENSIONLESS] * 2
    extra = {"engine": "symmetric for w=0 and Q=1, full otherwise"}
    if revivals:
        extra["revival_n_over_N"] = "; ".join(f"{k}: {v:.6g}" for k, v in revivals.items())
    table = ResultTable(columns, units, np.vstack(rows), _metadata(cfg, started, **extra))
    _write(table, cfg)
    return table


# ---- symmetric overlap --------------------------------------------------------------

def run_chi(cfg: ExperimentConfig) -> ResultTable:
    """Disorder-averaged ``chi`` per kick (chi-time) or time-averaged per ``w``."""
    started = time.perf_counter()
    N = cfg.N[0]
    rows = []
    for theta, phi in cfg.states:
        for w in cfg.w:
            if cfg.kind == "chi-time":
                sample = np.arange(0, cfg.kicks + 1, cfg.stride)
                chi = _full_evolution(cfg, N, w, theta, phi, cfg.kicks, chi_overlap, sample)
                mean, err = mean_and_error(chi, axis=1)
                rows.append(np.column_stack([np.full_like(mean, w), np.full_like(mean, theta),
                                             np.full_like(mean, phi), sample, mean, err]))
            else:
                sample = _sample_kicks(cfg)
                chi = _full_evolution(cfg, N, w, theta, phi, cfg.window_end, chi_overlap, sample)
                mean, err = mean_and_error(chi.mean(axis=0))
                rows.append([w, theta, phi, mean, err])
    if cfg.kind == "chi-time":
        columns = ["w", "theta0", "phi0", "n", "chi", "stderr"]
        units = [DIMENSIONLESS, "rad", "rad", "kicks", DIMENSIONLESS, DIMENSIONLESS]
        extra = {}
    else:
        columns = ["w", "theta0", "phi0", "chi_time_avg", "stderr"]
        units = [DIMENSIONLESS, "rad", "rad", DIMENSIONLESS, DIMENSIONLESS]
        extra = {"time_average_kicks": f"{cfg.window_start}..{cfg.window_end} step {cfg.stride}"}
    table = ResultTable(columns, units, np.vstack(rows), _metadata(cfg, started, N=N, **extra))
    _write(table, cfg)
    return table


# ---- effective dimension ----------------------------------------------------------

def _deff_one(args):
    params, real, states, alpha, max_qubits = args
    U = FullFloquet(params, real).dense(max_qubits)
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if defect > UNITARITY_ATOL:
        raise NumericalValidationError(f"Floquet matrix unitarity defect {defect:.2e}")
    eig = EigenDecomposition.from_unitary(U)
    return [effective_dimension(psi, eig, alpha) for psi in states]


def run_deff(cfg: ExperimentConfig) -> ResultTable:
    started = time.perf_counter()
    N = cfg.N[0]
    if N > cfg.max_qubits:
        raise CapacityError(f"dense diagonalization at N={N} exceeds max_qubits="
                            f"{cfg.max_qubits}; raise max_qubits to override")
    params = cfg.top_params(N)
    states = [embed_dicke(coherent_state(t, f, N)) for t, f in cfg.states]
    rows = []
    for w in cfg.w:
        jobs = [(params, r, states, cfg.alpha, cfg.max_qubits)
                for r in draw_realizations(cfg, N, w)]
        D = np.array(_pool_map(_deff_one, jobs, cfg.workers), dtype=float)
        mean, err = mean_and_error(D)
        for s, (theta, phi) in enumerate(cfg.states):
            rows.append([w, theta, phi, mean[s], err[s], len(jobs)])
    table = ResultTable(["w", "theta0", "phi0", "D_eff", "stderr", "realizations"],
                        [DIMENSIONLESS, "rad", "rad", "states", "states", "count"],
                        np.array(rows), _metadata(cfg, started, N=N, alpha=cfg.alpha))
    _write(table, cfg)
    return table


# ---- phase-space maps --------------------------------------------------------------

def phase_space_grid(n_theta: int, n_phi: int):
    """Cell-centred grid on ``theta in (0, pi)``, ``phi in (-pi, pi)``."""
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phi = -np.pi + (np.arange(n_phi) + 0.5) * 2 * np.pi / n_phi
    return theta, phi


def _time_averaged_entropy(U, states, sample, entropy):
    """Average ``entropy(state)`` over the sampled kicks for a batch of states."""
    Ut = U.T
    total = np.zeros(states.shape[0])
    wanted = set(int(n) for n in sample)
    psi = states
    if 0 in wanted:
        total += entropy(psi)
    for n in range(1, int(sample[-1]) + 1):
        psi = psi @ Ut
        if n in wanted:
            total += entropy(psi)
    return total / len(sample)


def _phase_space_one(args):
    params, real, thetas, phis, sample, max_qubits = args
    U = FullFloquet(params, real).dense(max_qubits)
    sym = np.array([coherent_state(t, f, params.N) for t in thetas for f in phis])
    return _time_averaged_entropy(U, embed_dicke(sym), sample, single_qubit_entropy)


def _symmetric_entropy_batch(psi):
    return single_qubit_entropy_from_j(expectation_j(psi), (psi.shape[-1] - 1) / 2)


def run_phase_space(cfg: ExperimentConfig) -> ResultTable:
    started = time.perf_counter()
    N = cfg.N[0]
    params = cfg.top_params(N)
    thetas, phis = phase_space_grid(cfg.grid_theta, cfg.grid_phi)
    sample = _sample_kicks(cfg)
    rows = []
    for w in cfg.w:
        if w == 0:
            U = floquet_symmetric(params)
            sym = np.array([coherent_state(t, f, N) for t in thetas for f in phis])
            mean = _time_averaged_entropy(U, sym, sample, _symmetric_entropy_batch)
            err = np.zeros_like(mean)
        else:
            if N > cfg.max_qubits:
                raise CapacityError(f"phase-space maps with disorder build dense N={N} "
                                    f"matrices; raise max_qubits (now {cfg.max_qubits})")
            jobs = [(params, r, thetas, phis, sample, cfg.max_qubits)
                    for r in draw_realizations(cfg, N, w)]
            mean, err = mean_and_error(_pool_map(_phase_space_one, jobs, cfg.workers))
        tt, pp = np.meshgrid(thetas, phis, indexing="ij")
        rows.append(np.column_stack([np.full(mean.size, w), tt.ravel(), pp.ravel(), mean, err]))
    extra = {"time_average_kicks": f"{cfg.window_start}..{cfg.window_end} step {cfg.stride}",
             "grid": f"{cfg.grid_theta}x{cfg.grid_phi} cell centres"}
    table = ResultTable(["w", "theta", "phi", "S_1_time_avg", "stderr"],
                        [DIMENSIONLESS, "rad", "rad", DIMENSIONLESS, DIMENSIONLESS],
                        np.vstack(rows), _metadata(cfg, started, N=N, **extra))
    _write(table, cfg)
    return table


# ---- spacing statistics -------------------------------------------------------------

def _block_angles(args):
    params, real, sector, rotation = args
    if real.kind == FIELD and np.any(real.eps_field):
        blocks = parity_blocks(FullFloquet(params, real).dense(), params.N)
        block = blocks[0] if sector == 1 else blocks[1]
    else:
        block = floquet_parity_block(params, real, sector, rotation)
    return eigenangles(block)


def spectrum_angles(cfg: ExperimentConfig, N: int, w: float) -> list:
    """Eigenangles of the configured parity block, one array per realization."""
    if N > cfg.max_qubits:
        raise CapacityError(f"spacing statistics diagonalize dense blocks; N={N} exceeds "
                            f"max_qubits={cfg.max_qubits}")
    params = cfg.top_params(N)
    rotation = rotation_parity_block(N, params.p, cfg.sector)
    jobs = [(params, r, cfg.sector, rotation) for r in draw_realizations(cfg, N, w)]
    return _pool_map(_block_angles, jobs, cfg.workers)


def run_spacing(cfg: ExperimentConfig):
    """Pooled unfolded spacing histogram per ``w`` plus eigenangle densities.

    Returns ``(histograms, spacing_table, density_table)``; the density table
    holds the eigenangle density of realization 0 for each ``w``.
    """
    started = time.perf_counter()
    N = cfg.N[0]
    rows, density_rows, histograms, extra = [], [], {}, {}
    for w in cfg.w:
        angles = spectrum_angles(cfg, N, w)
        spacings = np.concatenate([
            unfold(a, window=cfg.unfold_window, collapse_degenerate=cfg.collapse_degenerate)
            for a in angles])
        hist = SpacingHistogram.from_spacings(spacings, bins=cfg.bins, s_max=cfg.s_max)
        histograms[w] = hist
        ks_p, ks_c = ks_distance(spacings, POISSON), ks_distance(spacings, COE)
        extra[f"w={w}"] = (f"KS_poisson={ks_p:.6g} KS_coe={ks_c:.6g} "
                           f"spacings={spacings.size} realizations={len(angles)}")
        c = hist.centers
        rows.append(np.column_stack([np.full(c.size, w), hist.edges[:-1], hist.edges[1:],
                                     hist.density, reference_pdf(POISSON, c),
                                     reference_pdf(COE, c)]))
        edges, dens = eigenangle_density(angles[0], cfg.density_bins)
        density_rows.append(np.column_stack([np.full(dens.size, w), edges[:-1], edges[1:], dens]))
    meta = _metadata(cfg, started, N=N, sector=cfg.sector,
                     unfolding=f"gaussian staircase, window {cfg.unfold_window} levels", **extra)
    table = ResultTable(["w", "s_lo", "s_hi", "density", "poisson", "coe"],
                        [DIMENSIONLESS] * 6, np.vstack(rows), meta)
    density = ResultTable(["w", "angle_lo", "angle_hi", "density"],
                          [DIMENSIONLESS, "rad", "rad", "1/rad"], np.vstack(density_rows),
                          dict(meta, realization=0))
    _write(table, cfg)
    _write(density, cfg, "_density")
    return histograms, table, density


# ---- classical comparison --------------------------------------------------------------

def run_classical_compare(cfg: ExperimentConfig) -> ResultTable:
    started = time.perf_counter()
    if any(w != 0 for w in cfg.w):
        raise ConfigError("classical comparison is defined only for w = 0")
    N = cfg.N[0]
    sigma = 1 / np.sqrt(N)
    rows = []
    for s, (theta, phi) in enumerate(cfg.states):
        quantum = _symmetric_entropy(cfg, N, theta, phi, cfg.kicks)
        ens = sample_gaussian_ensemble(theta, phi, sigma, cfg.ensemble_size,
                                       seed=realization_seed(cfg.seed, s),
                                       method=cfg.sampling, frame=cfg.frame)
        classical = classical_entropy_trajectory(ens, cfg.k, cfg.kicks)
        n = np.arange(cfg.kicks + 1)
        rows.append(np.column_stack([np.full_like(quantum, theta), np.full_like(quantum, phi),
                                     n, quantum, classical, quantum - classical]))
    table = ResultTable(["theta0", "phi0", "n", "S_1_quantum", "S_1_classical", "difference"],
                        ["rad", "rad", "kicks"] + [DIMENSIONLESS] * 3, np.vstack(rows),
                        _metadata(cfg, started, N=N, sigma=sigma))
    _write(table, cfg)
    return table


# ---- curve fitting --------------------------------------------------------------------

def _estimator(cfg: ExperimentConfig, S):
    if cfg.model == "regular":
        return RegularGrowth(N=cfg.N[0], S_inf=float(np.max(S)), alpha=0.25)
    if cfg.model == "chaotic":
        return ChaoticGrowth(N=cfg.N[0])
    return NoisyGrowth(S0=float(np.max(S)))


def run_fit(cfg: ExperimentConfig) -> ResultTable:
    """Fit a growth model to an ``n``/``S`` table written by ``evolve``."""
    started = time.perf_counter()
    try:
        source = ResultTable.read(cfg.input)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read fit input {cfg.input}: {exc}") from exc
    column = cfg.column or next((c for c in source.columns if c.startswith("S_")), "")
    if column not in source.columns or "n" not in source.columns:
        raise ConfigError(f"input needs an 'n' column and {column or 'an S_* column'}")
    keep = np.ones(source.rows.shape[0], dtype=bool)
    if "N" in source.columns:
        keep &= source.column("N") == cfg.N[0]
    if "w" in source.columns and len(cfg.w) == 1:
        keep &= source.column("w") == cfg.w[0]
    n = source.column("n")
    keep &= (n >= cfg.n_min) & (n <= cfg.n_max)
    n, S = n[keep], source.column(column)[keep]
    if n.size < 5:
        raise ConfigError("fewer than 5 points selected for fitting")
    est = _estimator(cfg, S).fit(n, S)
    names = [k for k in vars(est) if k.endswith("_") and not k.startswith("_")]
    params = {k: getattr(est, k) for k in names}
    fitted = est.predict(n)
    table = ResultTable(["n", column, column + "_fit", "residual"],
                        ["kicks", DIMENSIONLESS, DIMENSIONLESS, DIMENSIONLESS],
                        np.column_stack([n, S, fitted, S - fitted]),
                        _metadata(cfg, started, model=cfg.model,
                                  **{f"fit.{k}": f"{v:.12g}" if isinstance(v, float) else v
                                     for k, v in params.items()}))
    _write(table, cfg)
    return table


RUNNERS = {
    "entropy-time": run_entropy_time,
    "revival-scan": run_entropy_time,
    "chi-time": run_chi,
    "chi-vs-w": run_chi,
    "deff-vs-w": run_deff,
    "phase-space": run_phase_space,
    "spacing-stats": run_spacing,
    "classical-compare": run_classical_compare,
    "fit": run_fit,
}


def run(cfg: ExperimentConfig):
    return RUNNERS[cfg.kind](cfg)
