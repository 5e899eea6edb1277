"""Self-contained oracle and property suite behind `isac-mi validate`.

Every check returns (name, passed, detail) and draws its own seeded
random instances, so a code regression anywhere in the numeric stack
flips a named check rather than silently shifting outputs.
"""

from __future__ import annotations

import numpy as np

from . import alloc, downlink, mi_core, region, uplink
from .model import RatePoint, default_scenario

_LN2 = float(np.log(2.0))


def _rand_complex(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rand_psd(rng, n, rank=None):
    rank = rank or n
    a = _rand_complex(rng, (n, rank))
    return a @ a.conj().T


def _rand_corr(rng, m):
    r = _rand_psd(rng, m)
    return r * (m / np.trace(r).real)


def check_water_fill_kkt(instances=1000) -> tuple:
    rng = np.random.default_rng(11)
    for i in range(instances):
        n = int(rng.integers(1, 7))
        gains = np.exp(rng.normal(0.0, 1.0, n))
        budget = float(rng.uniform(0.0, 5.0))
        noise = float(np.exp(rng.normal(0.0, 0.5)))
        res = alloc.water_fill(gains, budget, noise)
        q, mu = res.allocations, res.water_level
        floors = noise / gains
        if abs(q.sum() - budget) > 1e-10:
            return "water_fill_kkt", False, f"instance {i}: budget residual {q.sum() - budget:.3e}"
        active = q > 0
        if np.any(np.abs(floors[active] + q[active] - mu) > 1e-8):
            return "water_fill_kkt", False, f"instance {i}: complementary slackness violated"
        if np.any(floors[~active] < mu - 1e-8):
            return "water_fill_kkt", False, f"instance {i}: inactive channel below water level"
    return "water_fill_kkt", True, f"{instances} instances"


def _grid_best_rate(gains, budget, noise, step_frac=1e-3):
    """Dense grid search of sum log2(1 + g q / noise) over the simplex."""
    n = gains.size
    if budget == 0.0:
        return 0.0
    if n == 1:
        return float(np.log1p(gains[0] * budget / noise) / _LN2)
    ticks = np.linspace(0.0, budget, int(round(1.0 / step_frac)) + 1)
    if n == 2:
        q1 = ticks
        rates = (np.log1p(gains[0] * q1 / noise) + np.log1p(gains[1] * (budget - q1) / noise)) / _LN2
        return float(rates.max())
    q1, q2 = np.meshgrid(ticks, ticks, indexing="ij")
    q3 = budget - q1 - q2
    valid = q3 >= -1e-15
    rates = (
        np.log1p(gains[0] * q1 / noise)
        + np.log1p(gains[1] * q2 / noise)
        + np.log1p(gains[2] * np.maximum(q3, 0.0) / noise)
    ) / _LN2
    return float(rates[valid].max())


def check_water_fill_grid_oracle(instances=100) -> tuple:
    rng = np.random.default_rng(12)
    for i in range(instances):
        n = int(rng.integers(1, 4))
        gains = np.exp(rng.normal(0.0, 1.0, n))
        budget = float(rng.uniform(0.1, 4.0))
        noise = 1.0
        res = alloc.water_fill(gains, budget, noise)
        achieved = float(np.sum(np.log1p(gains * res.allocations / noise)) / _LN2)
        best = _grid_best_rate(gains, budget, noise)
        if achieved < best - 1e-9 or abs(achieved - best) > 1e-4:
            return (
                "water_fill_grid_oracle", False,
                f"instance {i}: water-fill {achieved:.8f} vs grid {best:.8f}",
            )
    return "water_fill_grid_oracle", True, f"{instances} instances, n <= 3"


def check_sic_sum_identity(instances=100) -> tuple:
    from itertools import permutations

    rng = np.random.default_rng(13)
    for i in range(instances):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        h = _rand_complex(rng, (n, k))
        p = rng.uniform(0.0, 3.0, k)
        if rng.uniform() < 0.5:
            noise = mi_core.White(float(rng.uniform(0.5, 2.0)))
        else:
            noise = mi_core.Colored(_rand_psd(rng, n) + 0.5 * np.eye(n))
        total = mi_core.comm_mi(h, p, noise)
        for order in permutations(range(k)):
            rates = mi_core.mmse_sic_user_rates(h, p, noise, order)
            if abs(rates.sum() - total) > 1e-9:
                return (
                    "sic_sum_identity", False,
                    f"instance {i} order {order}: sum {rates.sum():.12f} vs {total:.12f}",
                )
    return "sic_sum_identity", True, f"{instances} instances, all orders"


def check_sensing_mi_kron_oracle(instances=100) -> tuple:
    rng = np.random.default_rng(14)
    for i in range(instances):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        l_frame = int(rng.integers(m, 7))
        r = _rand_corr(rng, m)
        q = _rand_psd(rng, m, rank=int(rng.integers(1, m + 1)))
        q *= rng.uniform(0.2, 3.0) / max(np.trace(q).real, 1e-12)
        if rng.uniform() < 0.5:
            noise = mi_core.White(float(rng.uniform(0.5, 2.0)))
            cov = noise.power * np.eye(n)
        else:
            cov = _rand_psd(rng, n) + 0.5 * np.eye(n)
            noise = mi_core.Colored(cov)
        fast = mi_core.sensing_mi(r, q, l_frame, n, noise)
        w = alloc.synthesize_waveform(q, l_frame)
        b = w.conj().T @ r @ w
        big = np.kron(b, np.linalg.inv(cov))
        sign, logdet = np.linalg.slogdet(np.eye(n * l_frame) + big)
        oracle = logdet / _LN2
        if abs(fast - oracle) > 1e-8:
            return (
                "sensing_mi_kron_oracle", False,
                f"instance {i}: cross-sum {fast:.10f} vs kron {oracle:.10f}",
            )
    return "sensing_mi_kron_oracle", True, f"{instances} instances incl. colored noise"


def check_waveform_gram(instances=100) -> tuple:
    rng = np.random.default_rng(15)
    for i in range(instances):
        m = int(rng.integers(1, 5))
        l_frame = int(rng.integers(m, 9))
        q = _rand_psd(rng, m, rank=int(rng.integers(1, m + 1)))
        w = alloc.synthesize_waveform(q, l_frame)
        if np.linalg.norm(w @ w.conj().T - l_frame * q) > 1e-9 * max(1.0, np.linalg.norm(q)):
            return "waveform_gram", False, f"instance {i}: gram mismatch"
        slot_powers = np.sum(np.abs(w) ** 2, axis=0)
        if np.max(np.abs(slot_powers - np.trace(q).real)) > 1e-9 * max(1.0, np.trace(q).real):
            return "waveform_gram", False, f"instance {i}: slot powers not flat"
    return "waveform_gram", True, f"{instances} instances"


def check_mac_bc_duality(instances=100) -> tuple:
    rng = np.random.default_rng(16)
    for i in range(instances):
        k = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        channels = _rand_complex(rng, (k, m))
        powers = rng.uniform(0.0, 3.0, k)
        if rng.uniform() < 0.2:
            powers[rng.integers(0, k)] = 0.0
        sigma2 = float(rng.uniform(0.5, 2.0))
        mac_rate = mi_core.comm_mi(channels.T, powers, mi_core.White(sigma2))
        covs, order = alloc.mac_to_bc_transform(channels, powers, sigma2)
        dpc = downlink.dpc_rates(channels, covs, order, sigma2)
        if abs(dpc.sum() - mac_rate) > 1e-8:
            return (
                "mac_bc_duality", False,
                f"instance {i}: dpc sum {dpc.sum():.12f} vs mac {mac_rate:.12f}",
            )
        total_trace = sum(float(np.trace(q).real) for q in covs)
        if abs(total_trace - powers.sum()) > 1e-6 * max(1.0, powers.sum()):
            return "mac_bc_duality", False, f"instance {i}: trace {total_trace} vs {powers.sum()}"
    return "mac_bc_duality", True, f"{instances} instances"


def check_sa_corner_dominance() -> tuple:
    scenario = default_scenario("downlink-sa")
    _, rows = downlink.downlink_region_rows(scenario, "isac")
    corner = rows[0].point
    for alpha in np.linspace(0.0, 1.0, 11):
        for kappa in np.linspace(0.0, 1.0, 11):
            pt = downlink.sa_fdsac_point(scenario, downlink.FdsacSplit(float(alpha), float(kappa)))
            if pt.cr > corner.cr + 1e-9 or pt.sr > corner.sr + 1e-9:
                return (
                    "sa_corner_dominance", False,
                    f"alpha={alpha:.2f} kappa={kappa:.2f} escapes the corner",
                )
    return "sa_corner_dominance", True, "11x11 grid at defaults"


def check_uplink_corner_dominance() -> tuple:
    scenario = default_scenario("uplink")
    _, rows = uplink.uplink_region_rows(scenario, "isac")
    p_s = rows[0] if "Ps" in rows[0].sweep_param else rows[-1]
    p_c = rows[-1] if "Pc" in rows[-1].sweep_param else rows[0]
    if not ("Ps" in p_s.sweep_param and "Pc" in p_c.sweep_param):
        return "uplink_corner_dominance", False, "corner rows missing from frontier"
    if p_c.point.cr < p_s.point.cr or p_s.point.sr < p_c.point.sr:
        return "uplink_corner_dominance", False, "corner ordering violated"
    return "uplink_corner_dominance", True, "P_s/P_c ordering at defaults"


def check_pareto_brute_force(count=1000) -> tuple:
    rng = np.random.default_rng(17)
    pts = [RatePoint(float(c), float(s)) for c, s in rng.uniform(0.0, 4.0, (count, 2))]
    frontier = set((p.cr, p.sr) for p in region.pareto_frontier(pts).frontier)
    brute = set()
    for p in pts:
        if not any(q.dominates(p) for q in pts):
            brute.add((p.cr, p.sr))
    if frontier != brute:
        return "pareto_brute_force", False, f"{len(frontier ^ brute)} points disagree"
    return "pareto_brute_force", True, f"{count} random points"


ALL_CHECKS = (
    check_water_fill_kkt,
    check_water_fill_grid_oracle,
    check_sic_sum_identity,
    check_sensing_mi_kron_oracle,
    check_waveform_gram,
    check_mac_bc_duality,
    check_sa_corner_dominance,
    check_uplink_corner_dominance,
    check_pareto_brute_force,
)


def run_all(report=print) -> int:
    """Run every check, print one line each, return 0 iff all pass."""
    first_failure = None
    for check in ALL_CHECKS:
        name, passed, detail = check()
        report(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        if not passed and first_failure is None:
            first_failure = name
    if first_failure is not None:
        report(f"validation failed; first failing check: {first_failure}")
        return 1
    return 0
