from __future__ import annotations

import math

import numpy as np
import pytest

from thermoform.errors import EndpointAmbiguity, InvalidParameter, StarViolation
from thermoform.maps import (Zoom, default_c, hyperbolic_times, hyperbolic_times_direct,
                             iterate_orbit, make_map, pullback_offsets, symbolic_zooming_check,
                             validate_zoom, verify_star, zooming_times)


@pytest.fixture(scope="module")
def intermittent():
    return make_map("intermittent", alpha=0.5)


def test_map_values_and_derivatives(intermittent):
    d = make_map("doubling")
    assert d(0.3) == pytest.approx(0.6)
    assert d(0.7) == pytest.approx(0.4)
    assert d.derivative(0.1) == 2.0
    f = intermittent
    # left branch x(1 + (2x)^alpha) with a neutral fixed point at 0
    x = 0.2
    assert f(x) == pytest.approx(x * (1 + (2 * x) ** 0.5), rel=1e-14)
    assert f.derivative(x) == pytest.approx(1 + 1.5 * (2 * x) ** 0.5, rel=1e-13)
    assert f(0.75) == pytest.approx(0.5, abs=1e-15)


def test_inverse_branches_roundtrip(intermittent):
    g = make_map("deformed", delta=0.1, kappa=0.5)
    for fmap in (make_map("doubling"), intermittent, g):
        for b, (lo, hi) in enumerate(fmap.branch_domains):
            for x in np.linspace(lo, hi, 13)[1:-1]:
                assert fmap.inverse(b, fmap(x)) == pytest.approx(x, abs=1e-13)


def test_invalid_parameters():
    with pytest.raises(InvalidParameter):
        make_map("intermittent", alpha=1.5)
    with pytest.raises(InvalidParameter):
        make_map("deformed", delta=0.7)
    with pytest.raises(InvalidParameter):
        make_map("tent")


def test_endpoint_hits_recorded():
    d = make_map("doubling")
    tr = iterate_orbit(d, 0.25, 5)
    assert tr.endpoint_hits.size >= 1
    with pytest.raises(EndpointAmbiguity):
        iterate_orbit(d, 0.25, 5, strict=True)


def test_doubling_every_time_hyperbolic():
    d = make_map("doubling")
    tr = iterate_orbit(d, 0.1234567, 5000)
    ts = hyperbolic_times(tr, math.log(2))
    assert ts.frequency == 1.0
    assert np.array_equal(ts.times, np.arange(1, 5001))


def test_pliss_scan_matches_quadratic_oracle(intermittent):
    c = default_c(intermittent)
    for seed in (0.1, 0.3, 0.77):
        tr = iterate_orbit(intermittent, seed, 3000)
        assert np.array_equal(hyperbolic_times(tr, c).times, hyperbolic_times_direct(tr, c))


def test_pliss_scan_on_synthetic_series():
    rng = np.random.default_rng(3)
    logs = rng.normal(-0.3, 1.0, size=2000)
    assert np.array_equal(hyperbolic_times(logs, 0.4).times, hyperbolic_times_direct(logs, 0.4))


def test_intermittent_c_and_frequency(intermittent):
    c = default_c(intermittent)
    assert c == pytest.approx(0.3097, abs=5e-3)
    tr = iterate_orbit(intermittent, 0.3, 200_000)
    assert 0.5 < hyperbolic_times(tr, c).frequency < 1.0


def test_star_holds_at_hyperbolic_times(intermittent):
    c = default_c(intermittent)
    tr = iterate_orbit(intermittent, 0.3, 5000)
    times = hyperbolic_times(tr, c).times
    for n in times[times > 0][::97][:20]:
        rep = verify_star(intermittent, tr, int(n), 1e-4, c)
        assert rep.passed and rep.is_hyperbolic and rep.surjectivity_residual < 1e-12


def test_star_fails_after_a_laminar_phase(intermittent):
    c = default_c(intermittent)
    # starting near the neutral fixed point the first steps barely expand
    tr = iterate_orbit(intermittent, 1e-3, 200)
    times = set(hyperbolic_times(tr, c).times.tolist())
    n = next(k for k in range(2, 200) if k not in times)
    rep = verify_star(intermittent, tr, n, 1e-4, c, strict=False)
    assert not rep.passed and not rep.is_hyperbolic
    with pytest.raises(StarViolation):
        verify_star(intermittent, tr, n, 1e-4, c)


def test_pullback_contains_orbit_point(intermittent):
    tr = iterate_orbit(intermittent, 0.3, 400)
    ll, rr, res, _ = pullback_offsets(intermittent, tr, 300, 1e-3)
    assert np.all(np.isfinite(ll)) and np.all(np.isfinite(rr))
    assert ll[-1] == pytest.approx(math.log(1e-3)) and rr[-1] == pytest.approx(math.log(1e-3))
    assert res < 1e-12
    # each step maps the pulled-back left endpoint onto the next one
    for j in range(300):
        a = tr.points[j] - math.exp(ll[j])
        b = tr.points[j + 1] - math.exp(ll[j + 1])
        assert abs(((intermittent(a % 1.0) - b + 0.5) % 1.0) - 0.5) < 1e-12 + 1e-9 * math.exp(ll[j + 1])


def test_star_epsilon_must_fit(intermittent):
    tr = iterate_orbit(intermittent, 0.3, 10)
    with pytest.raises(InvalidParameter):
        verify_star(intermittent, tr, 5, 0.5, 0.3)


def test_zooming_times_doubling():
    d = make_map("doubling")
    tr = iterate_orbit(d, 0.1234567, 60)
    z = Zoom.exponential(0.25)
    ts = zooming_times(d, tr, z, 0.1, 50)
    assert np.array_equal(ts.times, np.arange(1, 51))


def test_zoom_validation():
    validate_zoom(Zoom.exponential(0.3), 0.1)
    validate_zoom(Zoom.shift_metric(), 0.25)
    with pytest.raises(InvalidParameter):
        validate_zoom(Zoom("grow", lambda n, r: r * (1 + 0 * n)), 0.1)


def test_symbolic_zooming_all_times():
    assert symbolic_zooming_check(30, 0.25, Zoom.shift_metric()) == list(range(1, 31))
