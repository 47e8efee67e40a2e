"""Acceptance gate: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the summary lines.
"""
from __future__ import annotations

import math
import time

import numpy as np

from thermoform.gibbs import (gibbs_report, gibbs_scan, growth_slope, markov_gibbs_bound)
from thermoform.ldp import (brute_force_deviation, deviation_prob_exact, empirical_rate, gap_tail,
                            glue_segments, katok_entropy, log_deviation_prob, measure_entropy,
                            pressure_curve, rate_function, BETA_GRID)
from thermoform.maps import (default_c, hyperbolic_times, hyperbolic_times_direct, iterate_orbit,
                             make_map, verify_star)
from thermoform.measures import CylinderMeasure
from thermoform.skew import (FiberPotential, attractor_gibbs_report, cantor_skew, cohomology_tail,
                             induce_base_potential, lift_measure, pressure_equality_check,
                             u_sup_bound)
from thermoform.symbolic import Potential, SftSystem, enumerate_words
from thermoform.transfer import (check_pressure_gap, coboundary_transform, equilibrium_measure, perron,
                                 pressure, transfer_matrix)

GOLDEN_P = math.log((1 + math.sqrt(5)) / 2)
M_P = math.log((5 + math.sqrt(33)) / 2)
M = [[1.0, 2.0], [3.0, 4.0]]


def verdict(number: int, title: str, ok: bool, detail: str = "") -> None:
    print(f"\nCRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {title} {detail}")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_01_pressure_exactness():
    t0 = time.perf_counter()
    S = SftSystem.golden_mean()
    phi = Potential.zero(S)
    P = pressure(S, phi)
    est = pressure(S, phi, "finite_n", n=18, epsilon=0.5)
    elapsed = time.perf_counter() - t0
    ok = (abs(P - GOLDEN_P) <= 1e-10 and est.lower <= est.value <= est.upper
          and abs(est.value - P) <= 0.03 and elapsed < 1.0)
    verdict(1, "golden-mean pressure", ok,
            f"P={P:.12f} est={est.value:.5f} in [{est.lower:.5f}, {est.upper:.5f}] t={elapsed:.2f}s")


def test_criterion_02_strong_gibbs_baseline():
    S = SftSystem.full_shift(2)
    phi = Potential.log_probabilities(S, [1 / 3, 2 / 3])
    sd = perron(transfer_matrix(S, phi))
    mu = equilibrium_measure(S, phi, spectral=sd)
    ns, hi, lo = gibbs_scan(mu, phi, sd.pressure, 1.0, 19)  # cylinders of length n + 1 <= 20
    worst = float(max(np.abs(hi).max(), np.abs(lo).max()))
    ok = abs(sd.lam - 1) <= 1e-12 and abs(sd.pressure) <= 1e-12 and worst <= 1e-12
    verdict(2, "Bernoulli Gibbs ratios vanish", ok, f"lam-1={sd.lam - 1:.1e} max|ratio|={worst:.1e}")


def test_criterion_03_weak_gibbs_constant_stability():
    S = SftSystem.full_shift(2)
    phi = Potential.log_matrix(S, M)
    mu = equilibrium_measure(S, phi)
    P = pressure(S, phi)
    ns, hi, lo = gibbs_scan(mu, phi, P, 1.0, 22)
    maxabs = np.maximum(np.abs(hi), np.abs(lo))
    sel = (ns >= 5) & (ns <= 22)
    nonincreasing = bool(np.all(np.diff(maxabs[sel]) <= 1e-9))
    closed = []
    for n in ns[sel]:
        cmin, cmax = markov_gibbs_bound(S, phi, P, 1.0, int(n))
        closed.append(max(abs(cmin), abs(cmax)))
    match = float(np.max(np.abs(maxabs[sel] - np.array(closed))))
    ok = abs(P - M_P) <= 1e-10 and nonincreasing and match <= 1e-9
    verdict(3, "weak-Gibbs constant stable", ok,
            f"dP={abs(P - M_P):.1e} max|ratio|={maxabs[sel].max():.10f} closed-form gap={match:.1e}")


def test_criterion_04_coboundary_invariance():
    S = SftSystem.full_shift(2)
    rng = np.random.default_rng(4)
    worst_P = worst_w = 0.0
    for _ in range(100):
        phi = Potential.table(S, 2, rng.normal(size=4))
        u = Potential.table(S, 3, rng.normal(size=8))
        psi = coboundary_transform(phi, u)
        worst_P = max(worst_P, abs(pressure(S, psi) - pressure(S, phi)))
        a, b = equilibrium_measure(S, phi), equilibrium_measure(S, psi)
        for w in enumerate_words(S, 5):
            worst_w = max(worst_w, abs(a.weight(w) - b.weight(w)))
    ok = worst_P <= 1e-8 and worst_w <= 1e-8
    verdict(4, "coboundary invariance", ok, f"max|dP|={worst_P:.1e} max|dmu|={worst_w:.1e}")


def test_criterion_05_ldp_quantitative():
    t0 = time.perf_counter()
    S = SftSystem.full_shift(2)
    phi = Potential.zero(S)
    psi = Potential.indicator(S, 1)
    mu = CylinderMeasure.bernoulli([0.5, 0.5])
    curve = pressure_curve(S, phi, psi, np.linspace(0, 3, 7))
    I = rate_function(curve, 0.75)
    rate_n = -log_deviation_prob(S, mu, psi, 0.75, 4000) / 4000
    exact_ok = all(deviation_prob_exact(S, mu, psi, 0.75, n, exact=True)
                   == brute_force_deviation(S, mu, psi, 0.75, n) for n in range(1, 21))
    elapsed = time.perf_counter() - t0
    ok = (abs(I.value + 0.1308123) <= 1e-6 and abs(I.t_star - math.log(3)) <= 1e-6
          and abs(rate_n - 0.1308123) <= 5e-3 and exact_ok and elapsed < 10)
    verdict(5, "LDP rate and exact probabilities", ok,
            f"I={I.value:.8f} rate(4000)={rate_n:.5f} dp==brute:{exact_ok} t={elapsed:.1f}s")


def _shift_gap_rate(beta):
    # on a shift every time is a Gibbs time, so the long-gap event is empty
    traces = [(np.arange(1, 401), 400)]
    return gap_tail(traces, 1.0, beta, np.arange(10, 400, 10)).rate


def test_criterion_06_ldp_bounds():
    S = SftSystem.full_shift(2)
    psi = Potential.indicator(S, 1)
    ns = np.array([400, 800, 1200, 1600, 2000, 2400, 2800])
    cases = []
    phi0 = Potential.zero(S)
    cases.append((phi0, CylinderMeasure.bernoulli([0.5, 0.5]), 0.75))
    phiM = Potential.log_matrix(S, M)
    muM = equilibrium_measure(S, phiM)
    mean = float(sum(muM.weight((1, b)) for b in (0, 1)))
    cases.append((phiM, muM, round(mean + 0.1, 2)))
    lines, ok = [], True
    for phi, mu, c in cases:
        I = rate_function(pressure_curve(S, phi, psi, np.linspace(0, 3, 7)), c).value
        slope = empirical_rate(ns, log_probabilities=[log_deviation_prob(S, mu, psi, c, int(n))
                                                      for n in ns]).slope
        for beta in BETA_GRID:
            upper = max(_shift_gap_rate(beta), I + beta) + 1e-2
            ok &= slope <= upper
        ok &= slope >= I - 1e-2
        lines.append(f"c={c}: slope={slope:.5f} I={I:.5f}")
    verdict(6, "LDP upper and lower bounds", ok, "; ".join(lines))


def test_criterion_07_hyperbolic_times():
    doubling = make_map("doubling")
    tr = iterate_orbit(doubling, 0.1234567, 10_000)
    ts = hyperbolic_times(tr, math.log(2))
    every = ts.frequency == 1.0 and len(ts.times) == 10_000
    f = make_map("intermittent", alpha=0.5)
    c = default_c(f)
    tr = iterate_orbit(f, 0.3, 10_000)
    pliss = np.array_equal(hyperbolic_times(tr, c).times, hyperbolic_times_direct(tr, c))
    rng = np.random.default_rng(7)
    thetas = np.array([hyperbolic_times(iterate_orbit(f, s, 1_000_000), c).frequency
                       for s in rng.uniform(0.01, 0.99, 100)])
    spread = float(np.max(np.abs(thetas / thetas.mean() - 1)))
    long = iterate_orbit(f, 0.3, 20_000)
    times = hyperbolic_times(long, c).times
    picks = rng.choice(times, 100, replace=False)
    reports = [verify_star(f, long, int(n), 1e-4, c, strict=False) for n in picks]
    star = all(r.passed and r.violations == 0 for r in reports)
    ok = every and pliss and thetas.min() > 0 and spread <= 0.10 and star
    verdict(7, "hyperbolic times", ok,
            f"doubling theta=1:{every} pliss==direct:{pliss} theta in [{thetas.min():.4f}, "
            f"{thetas.max():.4f}] spread={spread:.3f} star:{star}")


def test_criterion_08_skew_product():
    skew = cantor_skew()
    S = skew.base
    phi = FiberPotential.linear(Potential.zero(S), 0.1)
    J = 60
    induced = induce_base_potential(skew, phi, J)
    for w in enumerate_words(S, 6):
        induced(w + (0,) * 70)
    cert = induced.certificate()
    tail = cohomology_tail(skew, phi, J)
    rep = pressure_equality_check(skew, phi, J, n=10, epsilon=0.5)
    mu = CylinderMeasure.bernoulli([1 / 3, 2 / 3])
    lifted = lift_measure(skew, mu)
    # dyadic weights make the projection bit-exact; other weights agree to rounding
    half = lift_measure(skew, CylinderMeasure.bernoulli([0.5, 0.5]))
    proj = all(half.project(w, 4) == half.base_measure.weight(w)
               for d in range(1, 13) for w in enumerate_words(S, d))
    proj &= all(abs(lifted.project(w, 4) - mu.weight(w)) <= 1e-14 * mu.weight(w)
                for d in range(1, 13) for w in enumerate_words(S, d))
    samples = [((0, 1, 1), w + (0,) * 4, 5) for w in enumerate_words(S, 4)]
    phi_mu = Potential.log_probabilities(S, [1 / 3, 2 / 3])
    phi_att = FiberPotential.linear(phi_mu, 0.1)
    ag = attractor_gibbs_report(skew, phi_att, lifted, samples, epsilon=1.0, P=0.0, J=J)
    bound = 2 * u_sup_bound(skew, phi_att, J) + 1e-10
    ok = (cert.spread <= 2 * tail < 1e-27 and rep.overlap and proj
          and ag.max_difference <= bound)
    verdict(8, "skew product", ok,
            f"spread={cert.spread:.1e} 2tail={2 * tail:.1e} overlap:{rep.overlap} projection:{proj} "
            f"attractor diff={ag.max_difference:.1e}<= {bound:.1e}")


def test_criterion_09_gluing():
    G = SftSystem.golden_mean()
    words = [w for n in range(1, 11) for w in enumerate_words(G, n)]
    ok_g = True
    for a in words:
        for b in words:
            r = glue_segments(G, [a, b])
            if not (G.is_admissible(r.word) and r.connectors[0] <= 1):
                ok_g = False
                break
    F = SftSystem.full_shift(2)
    fwords = [w for n in range(1, 7) for w in enumerate_words(F, n)]
    ok_f = all(glue_segments(F, [a, b]).connectors == [0] for a in fwords for b in fwords)
    verdict(9, "gluing", ok_g and ok_f, f"golden pairs={len(words) ** 2} ok:{ok_g} full shift ok:{ok_f}")


def test_criterion_10_katok_entropy():
    b = CylinderMeasure.bernoulli([1 / 3, 2 / 3])
    kb = katok_entropy(b, 2000, 1.0, 0.1)
    S = SftSystem.full_shift(2)
    phiM = Potential.log_matrix(S, M)
    muM = equilibrium_measure(S, phiM)
    h = pressure(S, phiM) - sum(muM.weight(w) * phiM(w) for w in enumerate_words(S, 2))
    km = katok_entropy(muM, 1000, 1.0, 0.1)
    ok = abs(kb.value - 0.63651) <= 0.02 and abs(km.value - h) <= 0.03 and abs(h - measure_entropy(muM)) < 1e-12
    verdict(10, "Katok entropy", ok, f"bernoulli={kb.value:.5f} markov={km.value:.5f} h={h:.5f}")


def test_criterion_11_wrong_pressure_detector():
    S = SftSystem.full_shift(2)
    phi = Potential.log_probabilities(S, [1 / 3, 2 / 3])
    mu = equilibrium_measure(S, phi)
    rng = np.random.default_rng(11)
    x = tuple(int(v) for v in rng.integers(0, 2, 400))
    rep = gibbs_report(mu, phi, 0.1, [(x, n) for n in range(1, 300)], 1.0)
    slope = growth_slope(rep)
    verdict(11, "wrong pressure detected", abs(slope - 0.1) <= 0.005, f"slope={slope:.6f}")


def test_criterion_12_pressure_gap_and_openness():
    f = make_map("deformed", delta=0.1, kappa=0.5)
    model = f.markov_model
    phi = Potential.zero(model.system)
    rep = check_pressure_gap(model.system, phi, model.good, model.bad)
    lam_good = max(abs(np.linalg.eigvals(model.good.transitions.astype(float))))
    lam_bad = max(abs(np.linalg.eigvals(model.bad.transitions.astype(float))))
    reproduced = abs(rep.gap - (math.log(lam_good) - math.log(lam_bad))) <= 1e-10
    rng = np.random.default_rng(12)
    open_ok = True
    for _ in range(50):
        noise = rng.uniform(-1, 1, size=len(phi.values))
        noise *= (rep.gap / 4) / np.abs(noise).max()
        pert = Potential.table(model.system, phi.depth, phi.values + noise)
        r = check_pressure_gap(model.system, pert, model.good, model.bad)
        open_ok &= r.P_good > r.P_bad
    ok = rep.holds and rep.gap > 0 and reproduced and open_ok
    verdict(12, "pressure gap and openness", ok, f"gap={rep.gap:.10f} spectra agree:{reproduced} 50 perturbations:{open_ok}")
