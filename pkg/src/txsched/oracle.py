"""Independent reference solvers for the scheduling program.

Both solvers work directly on the epoch allocation table: minimize
sum_i T_i * f(B_i / T_i) over non-negative allocations supported on
each packet's feasible epochs, with every epoch handing out at most its
length.  The projected-gradient solver handles moderate sizes; the
exhaustive grid search handles tiny instances and bounds the
discretization error of everything else.  Neither shares any code with
the scheduling algorithm beyond the power model itself, so agreement
between the two paths is meaningful evidence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import Instance, decompose
from .power import PowerModel

ARMIJO_C = 1e-4
TIME_FLOOR = 1e-12  # gradient evaluation floor; reported values are unfloored
GRID_COMBO_CAP = 5_000_000


class TooLarge(ValueError):
    """The grid enumeration would exceed the combinatorial guard."""


@dataclass
class OracleSolution:
    """An allocation table with its derived totals, rates and energy.

    `converged` is False when the solver hit its iteration budget with
    the tolerance unmet; the solution is still a valid upper bound.
    `residual` estimates the remaining optimality gap (projected
    gradient: stationarity norm; grid: the grid spacing).
    """

    tau: np.ndarray
    total_times: np.ndarray
    rates: np.ndarray
    energy: float
    iterations: int
    residual: float
    converged: bool
    energy_history: np.ndarray | None = None


def project_capped_simplex(v: np.ndarray, cap: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) <= cap}.

    Clipping to the orthant suffices when it fits under the cap;
    otherwise this is the classic sort-based projection onto the
    simplex {x >= 0, sum(x) = cap}.
    """
    v = np.asarray(v, dtype=float)
    clipped = np.clip(v, 0.0, None)
    if clipped.sum() <= cap:
        return clipped
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - cap
    ks = np.arange(1, len(v) + 1)
    valid = u - cssv / ks > 0
    k = ks[valid][-1]
    theta = cssv[k - 1] / k
    return np.clip(v - theta, 0.0, None)


def _project_columns(packed: np.ndarray, caps: np.ndarray, lens: np.ndarray):
    """Batched capped-simplex projection of packed epoch columns.

    packed[c, :lens[c]] holds the allocation of epoch column c; slots
    past lens[c] are padding at a large negative value and project to 0.
    The final rescale guarantees feasibility even when the inputs are
    many orders of magnitude above the caps and theta loses precision.
    """
    clipped = np.clip(packed, 0.0, None)
    sums = clipped.sum(axis=1)
    over = sums > caps
    if not np.any(over):
        return clipped
    rows = np.flatnonzero(over)
    u = -np.sort(-packed[rows], axis=1)  # descending; padding sinks to the end
    cssv = np.cumsum(u, axis=1) - caps[rows, None]
    ks = np.arange(1, packed.shape[1] + 1)[None, :]
    valid = (u - cssv / ks > 0) & (ks <= lens[rows, None])
    k = np.where(valid, ks, 1).max(axis=1)
    theta = cssv[np.arange(len(rows)), k - 1] / k
    proj = np.clip(packed[rows] - theta[:, None], 0.0, None)
    psums = proj.sum(axis=1)
    bad = psums > caps[rows]
    if np.any(bad):
        proj[bad] *= (caps[rows][bad] / psums[bad])[:, None]
    clipped[rows] = proj
    return clipped


def solve_projected_gradient(
    instance: Instance,
    model: PowerModel,
    tol: float = 1e-10,
    max_iters: int = 200_000,
    track_history: bool = False,
) -> OracleSolution:
    """Projected gradient descent with Armijo backtracking.

    Starts from the proportional split (each epoch shared equally among
    its feasible packets), steps along the marginal-energy gradient,
    and projects each epoch column back onto its capped simplex.  Stops
    when an accepted step decreases energy by less than `tol`
    relatively, or at `max_iters` (then flagged unconverged).
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    decomp = decompose(instance)
    n, m = instance.n, decomp.m
    bits = instance.bits()
    lengths = decomp.epoch_lengths()
    mask = np.zeros((n, m), dtype=bool)
    for i in range(n):
        for j in decomp.epoch_sets_per_packet[i]:
            mask[i, j - 1] = True

    live_cols = [j for j in range(m) if mask[:, j].any()]
    col_rows = [np.flatnonzero(mask[:, j]) for j in live_cols]
    nmax = max((len(r) for r in col_rows), default=1)
    pack_rows = np.zeros((len(live_cols), nmax), dtype=int)
    pad = np.zeros((len(live_cols), nmax), dtype=bool)
    lens = np.zeros(len(live_cols), dtype=int)
    caps = np.zeros(len(live_cols))
    for c, (j, rows) in enumerate(zip(live_cols, col_rows)):
        pack_rows[c, : len(rows)] = rows
        pad[c, len(rows):] = True
        lens[c] = len(rows)
        caps[c] = lengths[j]
    live_idx = np.array(live_cols, dtype=int)

    def energy_of(tau: np.ndarray) -> float:
        T = tau.sum(axis=1)
        if np.any(T < TIME_FLOOR):
            return math.inf
        with np.errstate(over="ignore"):
            e = float(np.sum(T * model.power(bits / T)))
        return e

    def project(tau: np.ndarray) -> np.ndarray:
        packed = tau[pack_rows, live_idx[:, None]]
        packed[pad] = -1e300  # finite padding keeps the sort-based rule nan-free
        projected = _project_columns(packed, caps, lens)
        out = np.zeros_like(tau)
        for c in range(len(live_cols)):
            out[pack_rows[c, : lens[c]], live_cols[c]] = projected[c, : lens[c]]
        return out

    tau = np.zeros((n, m))
    for c, (j, rows) in enumerate(zip(live_cols, col_rows)):
        tau[rows, j] = lengths[j] / len(rows)

    energy = energy_of(tau)
    history = [energy] if track_history else None
    alpha = 1.0
    iterations = 0
    small_streak = 0

    def gradient(tau: np.ndarray) -> np.ndarray:
        T = np.maximum(tau.sum(axis=1), TIME_FLOOR)
        gvals = np.asarray(model.g(bits / T))
        return np.where(mask, -gvals[:, None], 0.0)

    cap_scale = float(caps.max()) if len(caps) else 1.0
    stalled = False
    while iterations < max_iters:
        grad = gradient(tau)
        # First trial step: adaptive, but never so large that a single
        # step moves an entry further than the biggest epoch.
        gmax = float(np.abs(grad).max())
        alpha = min(1.0, alpha * 2.0, cap_scale / gmax if gmax > 0 else 1.0)
        accepted = False
        for _ in range(200):
            cand = project(tau - alpha * grad)
            cand_energy = energy_of(cand)
            decrease_bound = ARMIJO_C * float(np.sum(grad * (cand - tau)))
            if cand_energy <= energy + decrease_bound:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            stalled = True  # no float-visible descent left
            break
        rel_decrease = (energy - cand_energy) / max(abs(cand_energy), 1e-300)
        tau = cand
        energy = cand_energy
        iterations += 1
        if history is not None:
            history.append(energy)
        # Terminate on sustained stalls, not a single slow step.
        small_streak = small_streak + 1 if rel_decrease < tol else 0
        if small_streak >= 5:
            stalled = True
            break

    # Stationarity probe at a step size matched to the gradient scale:
    # a true optimum is a fixed point of the projected step for any
    # step size, while a float-starved stall (one packet's energy term
    # drowning the others) leaves a visible displacement.
    grad = gradient(tau)
    gmax = float(np.abs(grad).max())
    probe = min(1.0, cap_scale / gmax) if gmax > 0 else 1.0
    pg_map = tau - project(tau - probe * grad)
    residual = float(np.abs(pg_map).max() / (1.0 + np.abs(tau).max()))
    converged = stalled and residual <= 1e-6
    T = tau.sum(axis=1)
    rates = np.where(T > 0, bits / np.maximum(T, TIME_FLOOR), np.inf)
    return OracleSolution(
        tau=tau,
        total_times=T,
        rates=rates,
        energy=energy,
        iterations=iterations,
        residual=residual,
        converged=converged,
        energy_history=np.array(history) if history is not None else None,
    )


def _compositions(total: int, parts: int) -> np.ndarray:
    """All length-`parts` tuples of non-negative ints summing to `total`.

    Stars and bars: each combination of bar positions among
    total + parts - 1 slots yields one composition.
    """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    combos = itertools.combinations(range(total + parts - 1), parts - 1)
    bars = np.fromiter(
        (b for combo in combos for b in combo), dtype=np.int64
    ).reshape(-1, parts - 1)
    first = bars[:, 0]
    mids = np.diff(bars, axis=1) - 1
    last = total + parts - 2 - bars[:, -1]
    return np.concatenate([first[:, None], mids, last[:, None]], axis=1)


def solve_grid(instance: Instance, model: PowerModel, resolution: int) -> OracleSolution:
    """Exhaustive search over per-epoch simplex grids.

    Each transmittable epoch's length is split among its feasible
    packets in multiples of length/resolution; every combination across
    epochs is priced and the best kept.  Guarded to tiny instances
    (N <= 3, M <= 5, and a cap on total combinations).
    """
    if resolution < 10:
        raise ValueError(f"resolution must be at least 10, got {resolution}")
    decomp = decompose(instance)
    n, m = instance.n, decomp.m
    if n > 3 or m > 5:
        raise TooLarge(f"grid oracle handles N <= 3, M <= 5; got N={n}, M={m}")
    bits = instance.bits()
    lengths = decomp.epoch_lengths()

    live = decomp.live_epochs()
    per_epoch: list[tuple[int, list[int], np.ndarray]] = []
    total_combos = 1
    for j in live:
        rows = sorted(i - 1 for i in decomp.packet_sets_per_epoch[j - 1])
        combos = _compositions(resolution, len(rows))
        total_combos *= len(combos)
        if total_combos > GRID_COMBO_CAP:
            raise TooLarge(
                f"grid enumeration needs more than {GRID_COMBO_CAP} combinations"
            )
        per_epoch.append((j, rows, combos * (lengths[j - 1] / resolution)))

    totals = np.zeros((1, n))
    combo_counts = [len(c) for _, _, c in per_epoch]
    for j, rows, alloc in per_epoch:
        contrib = np.zeros((len(alloc), n))
        contrib[:, rows] = alloc
        totals = (totals[:, None, :] + contrib[None, :, :]).reshape(-1, n)

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        T = totals
        ok = np.all(T > 0, axis=1)
        energies = np.full(len(T), np.inf)
        if ok.any():
            Tok = T[ok]
            energies[ok] = np.sum(Tok * model.power(bits[None, :] / Tok), axis=1)
    best = int(np.argmin(energies))
    if not np.isfinite(energies[best]):
        raise RuntimeError("no feasible grid point found")

    # Decode the flat index back into one combo per epoch.
    tau = np.zeros((n, m))
    rem = best
    for (j, rows, alloc), count in zip(reversed(per_epoch), reversed(combo_counts)):
        rem, k = divmod(rem, count)
        tau[rows, j - 1] = alloc[k]
    T_best = tau.sum(axis=1)
    spacing = max(lengths[j - 1] / resolution for j in live) if live else 0.0
    return OracleSolution(
        tau=tau,
        total_times=T_best,
        rates=bits / T_best,
        energy=float(energies[best]),
        iterations=len(energies),
        residual=spacing,
        converged=True,
    )
