"""The ten acceptance criteria, each at its stated tolerance.

Every check prints one ``AC<n> PASS|FAIL`` line (also when run as a script:
``python3 tests/test_acceptance.py``).
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from fraclog.cli import time_to_epsilon  # noqa: E402
from fraclog.models import (  # noqa: E402
    STABLE,
    UNSTABLE,
    Cubic,
    Quadratic,
    QuadraticCapacity,
    as_rhs,
    classify_stability,
    existence_condition,
    perturbed_system,
)
from fraclog.operators import (  # noqa: E402
    SampledFunction,
    ab_integral,
    derivative_samples,
    linear_solution,
)
from fraclog.order import FractionalOrder  # noqa: E402
from fraclog.scheme import SolverConfig, solve_explicit, solve_pece, weight_w, weight_xi  # noqa: E402
from fraclog.special import MLSpec, ml_general  # noqa: E402
from oracles import observed_order, weight_w_quad, weight_xi_quad  # noqa: E402

HALF = FractionalOrder(0.5, 0.5, 1.0)
FIG = QuadraticCapacity(0.5, 2.0)
EPSILON = 0.02


def ac1():
    worst = 0.0
    for lz in np.linspace(-10, 10, 100):
        z = 2.5
        value = ml_general(MLSpec(1.0, 1.0, 1.0, lz / z), z)
        worst = max(worst, abs(value - math.exp(lz)) / max(1.0, math.exp(lz)))
    return worst <= 1e-12, f"worst |E - exp| / max(1, exp) = {worst:.2e} (tol 1e-12)"


def ac2():
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(50):
        theta, mu = rng.uniform(0.01, 0.99, 2)
        k = int(rng.integers(0, 6))
        m = int(rng.integers(1, 51))
        j = int(rng.integers(0, m))
        ord = FractionalOrder(theta, mu, 1.0)
        p = theta * k - mu
        pairs = [(weight_w(m, i, k, j, ord), weight_w_quad(m, i, p, j)) for i in (-1, 0, 1)]
        pairs.append((weight_xi(m, k, ord), weight_xi_quad(m, p)))
        for got, ref in pairs:
            worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    return worst <= 1e-10, f"worst weight error = {worst:.2e} (tol 1e-10, relative above 1)"


def _linear_errors(N):
    rho = -0.5
    cfg = SolverConfig(0.0, 1.0, N)
    traj = solve_pece(lambda t, x: rho * x, 1.0, HALF, cfg)
    exact = np.array([linear_solution(rho, 1.0, HALF, t) for t in traj.times])
    err = np.abs(traj.values - exact)
    return float(np.max(err / np.abs(exact))), float(np.max(err))


def ac3():
    rel_h, max_h = _linear_errors(1000)
    _, max_h2 = _linear_errors(2000)
    ratio = max_h2 / max_h
    ok = rel_h <= 1e-2 and ratio <= 0.7
    return ok, f"rel err at h=1e-3 = {rel_h:.2e} (tol 1e-2); err(h/2)/err(h) = {ratio:.3f} (tol 0.7)"


def ac4():
    cfg = SolverConfig(0.0, 40.0, 5000)
    dev = {}
    for name, solve in (("explicit", solve_explicit), ("pece", solve_pece)):
        traj = solve(as_rhs(FIG), 2.0, HALF, cfg)
        dev[name] = float(np.max(np.abs(traj.values - 2.0)))
    ok = all(v <= 1e-10 for v in dev.values())
    return ok, f"max |x - 2|: explicit {dev['explicit']:.1e}, pece {dev['pece']:.1e} (tol 1e-10)"


def ac5():
    cfg = SolverConfig(0.0, 50.0, 1000)
    finals = {x0: solve_pece(as_rhs(FIG), x0, HALF, cfg).final for x0 in (0.5, 1, 1.5, 2.5, 3)}
    worst = max(abs(v - 2) for v in finals.values())
    return worst <= 0.05, f"max |x(50) - 2| = {worst:.4f} (tol 0.05)"


def _tte(ord, t_end, steps, x0=1.0):
    traj = solve_pece(as_rhs(FIG), x0, ord, SolverConfig(0.0, t_end, steps))
    return time_to_epsilon(traj, 2.0, EPSILON)


def _show(values):
    return ", ".join("never" if v is None else f"{v:g}" for v in values)


def _strict(values, decreasing):
    if any(v is None for v in values):
        return False
    pairs = zip(values, values[1:])
    return all(a > b for a, b in pairs) if decreasing else all(a < b for a, b in pairs)


def ac6():
    times = [_tte(FractionalOrder(0.5, 0.5, g), 50.0, 1000) for g in (1.0, 2.0, 3.0)]
    return _strict(times, decreasing=True), f"time-to-eps for gamma=1,2,3: {_show(times)}"


def ac7():
    # at t_end = 50 the mu = 0.6 and 0.8 runs are still outside the band, so
    # the horizon is extended to 1000 (h = 0.1 to keep the run short)
    times = [_tte(FractionalOrder(0.5, mu, 1.0), 1000.0, 10000) for mu in (0.4, 0.6, 0.8)]
    return _strict(times, decreasing=False), f"time-to-eps for mu=0.4,0.6,0.8: {_show(times)}"


def ac8():
    quad = classify_stability(Quadratic(0.5)).as_dict() == {0.0: UNSTABLE, 1.0: STABLE}
    r, k, m = 1.0, 2.0, 0.5
    cubic = classify_stability(Cubic(r, k, m)).as_dict() == {0.0: STABLE, m: UNSTABLE, k: STABLE}
    rho, alpha0 = perturbed_system(Quadratic(0.5), 1.0, 0.5)
    mags = [abs(linear_solution(rho, alpha0, HALF, t)) for t in (5, 10, 20, 40)]
    decays = _strict(mags, decreasing=True)
    detail = (f"quadratic {'ok' if quad else 'WRONG'}, cubic {'ok' if cubic else 'WRONG'}, "
              f"|alpha(5,10,20,40)| = {[f'{v:.4g}' for v in mags]}")
    return quad and cubic and decays, detail


def ac9():
    expected = 0.5 / math.gamma(1.5) + 0.5 / math.gamma(2.0)
    c1 = existence_condition(HALF, 0.0, 1.0, 1.0).condition_value
    # independent bisection for the crossing C1(T) = 1
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if existence_condition(HALF, 0.0, mid, 1.0).condition_value < 1 else (lo, mid)
    below = existence_condition(HALF, 0.0, 0.99 * lo, 1.0).satisfied
    above = existence_condition(HALF, 0.0, 1.01 * hi, 1.0).satisfied
    ok = abs(c1 - expected) <= 1e-12 and below and not above
    return ok, (f"|C1 - closed form| = {abs(c1 - expected):.1e} (tol 1e-12); "
                f"T* = {lo:.10f}, satisfied below/above = {below}/{above}")


def ac10():
    errs = []
    for h in (1 / 100, 1 / 200, 1 / 400):
        N = round(2 / h)
        f = SampledFunction.from_callable(math.sin, 0.0, h, N)
        d = derivative_samples(f, HALF)
        errs.append(max(abs(ab_integral(d, HALF, m) - (f.values[m] - f.values[0]))
                        for m in range(1, N + 1)))
    order = observed_order(errs)
    return order >= 0.9, f"max errors {[f'{e:.2e}' for e in errs]}, observed order {order:.3f} (min 0.9)"


CRITERIA = [
    (1, "Mittag-Leffler reduces to exp", ac1),
    (2, "weight oracle", ac2),
    (3, "linear-system oracle", ac3),
    (4, "equilibrium preservation", ac4),
    (5, "figure 1: convergence to 2", ac5),
    (6, "figure 2: time-to-eps decreasing in gamma", ac6),
    (7, "figure 3: time-to-eps increasing in mu", ac7),
    (8, "stability table", ac8),
    (9, "existence worked example", ac9),
    (10, "round-trip convergence order", ac10),
]


def report(n, title, check):
    ok, detail = check()
    return ok, f"AC{n:<2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"


@pytest.mark.parametrize("n,title,check", CRITERIA, ids=[f"AC{n}" for n, _, _ in CRITERIA])
def test_criterion(n, title, check, capsys):
    ok, line = report(n, title, check)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
