from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bifurcat.atlas import (
    CURVES,
    REGIONS,
    NewtonDivergence,
    Q_POINTS,
    T_POINTS,
    build_map,
    bt_seed,
    classify_arrays,
    classify_region,
    corner_points,
    invariants,
    named_points,
    r_points,
    solve_BT,
    solve_B_points,
    solve_H,
    t_point,
    trace_curve,
)
from bifurcat.equilibria import fixed_points, trace_at_endemic
from bifurcat.model import ModelParams, derived, endemic_quadratic

F = Fraction
ETA0 = F(67, 75)


@pytest.fixture(scope="module")
def corners(base):
    return corner_points(base)


@pytest.fixture(scope="module")
def full_map(base):
    return build_map(base)


# -- corner points ------------------------------------------------------------------------------

def test_h_closed_form(base):
    h = solve_H(base)
    assert h.exact == (F(2010, 253), F(8978, 1265))
    d = derived(base)
    lam = base.b
    assert h.exact[0] == base.mu ** 2 * d.eta0 / (base.beta * lam * d.v_s)
    assert h.exact[1] == d.eta0 * h.exact[0]
    assert (h.omega, h.alpha) == pytest.approx((7.94466, 7.09723), abs=1e-5)
    assert h.extra["trace"] == pytest.approx(-0.12)


def test_h_requires_endemic_regime(base):
    low = ModelParams.from_dict({**base.to_dict(), "beta": "1/1000"})
    with pytest.raises(ValueError, match="no H point"):
        solve_H(low)


def test_b_points(base):
    b1, b2 = solve_B_points(base)
    assert (b1.omega, b1.alpha) == pytest.approx((5.15735, 4.60724), abs=1e-5)
    assert (b2.omega, b2.alpha) == pytest.approx((7.35966, 6.57463), abs=1e-5)
    assert len(b1.extra["rejected"]) == 1
    for b in (b1, b2):
        assert abs(b.alpha - float(ETA0) * b.omega) < 1e-9
        assert max(b.residuals) < 1e-8


def test_e2_at_b1(base, corners):
    b1 = corners["B1"]
    pts = {r.label: r for r in fixed_points(base.with_treatment(b1.omega, b1.alpha).as_float())}
    e2 = pts["E2"]
    assert (e2.coords.s, e2.coords.i) == pytest.approx((78.5251, 8.44639), abs=1e-4)
    assert [abs(z.real) for z in e2.eigenvalues] == pytest.approx([0, 0], abs=1e-10)
    assert sorted(z.imag for z in e2.eigenvalues) == pytest.approx([-0.152171, 0.152171], abs=1e-6)


def test_bt(base, corners):
    bt = corners["BT"]
    assert (bt.omega, bt.alpha) == pytest.approx((6.84183, 6.20319), abs=1e-5)
    assert max(bt.residuals) < 1e-10
    assert bt.extra["merged"] == pytest.approx((117.951, 1.56737), abs=1e-3)


def test_bt_seed_is_deterministic(base):
    assert bt_seed(base) == bt_seed(base)


def test_bt_divergence_reports_iterates(base):
    with pytest.raises(NewtonDivergence) as err:
        solve_BT(base, seed=(0.05, 13.9), maxiter=2)
    assert err.value.iterates


def test_named_point_order(base):
    rows = [r for r in named_points(base) if not r.name.startswith(("Q", "T"))]
    assert [r.name for r in rows] == ["R1", "B1", "R2", "BT", "B2", "R3", "H"]
    omegas = [r.omega for r in rows]
    assert omegas == sorted(omegas)
    assert all(r.status == "ok" for r in named_points(base))


def test_collinear_points_exact(base, corners):
    for w, a in r_points(base).values():
        assert a - ETA0 * w == 0
    assert solve_H(base).exact[1] - ETA0 * solve_H(base).exact[0] == 0
    for name in ("B1", "B2"):
        assert abs(corners[name].alpha - float(ETA0) * corners[name].omega) < 1e-12


def test_delta_on_r0_line_is_a_square(base):
    d = derived(base)
    w_h = solve_H(base).exact[0]
    const = (base.beta * base.b * d.v_s / base.mu) ** 2
    for w in (F(1), F(5), w_h, F(12), F(2010, 253) + F(1, 10**6)):
        delta = endemic_quadratic(base.with_treatment(w, ETA0 * w)).Delta
        assert delta == const * (w - w_h) ** 2


# -- classification ---------------------------------------------------------------------------------

@pytest.mark.parametrize("name", list(Q_POINTS))
def test_q_points_land_in_their_region(base, name):
    w, a = Q_POINTS[name]
    assert classify_region(base, w, a).name == name[2:]


def test_sign_rows(base):
    assert classify_region(base, "51/8", "43/8").signs[:3] == ("+", "+", "+")
    assert classify_region(base, "2.156", "3.468").signs == ("+", "-", "+", "-")
    lab = classify_region(base, 6, 6)
    assert lab.name == "V" and lab.signs[0] == "-" and not lab.trace_defined


def test_boundaries_and_corners(base, corners):
    for name in T_POINTS:
        w, a = t_point(base, name)
        assert classify_region(base, w, a).name == "boundary:TrE2=0"
    for w, a in r_points(base).values():
        assert classify_region(base, w, a).name == "boundary:R0=1"
    for name in ("H", "B1", "B2", "BT"):
        c = corners[name]
        # the merged root near BT carries a sqrt(eps) error, hence the looser tol
        assert classify_region(base, c.omega, c.alpha, tol=1e-6).name == f"corner:{name}"


def test_listed_t_points_are_rounded_samples(base):
    for name, (w, a) in T_POINTS.items():
        assert t_point(base, name)[1] == pytest.approx(float(F(a)), abs=1e-5)


def test_classify_errors(base):
    with pytest.raises(ValueError, match="omega must be positive"):
        classify_region(base, 0, 1)
    with pytest.raises(ValueError, match="alpha must be nonnegative"):
        classify_region(base, 1, -1)


@given(st.floats(0.05, 14), st.floats(0, 14))
def test_label_is_stable_under_tol_halving(w, a):
    p = ModelParams.base()
    tol = 1e-6
    vals = invariants(p, np.array([w]), np.array([a]))
    near = any(abs(float(np.nan_to_num(v[0], nan=1.0))) <= 2 * tol for v in vals[:4])
    if near:
        return
    lo, _ = classify_arrays(p, np.array([w]), np.array([a]), tol)
    hi, _ = classify_arrays(p, np.array([w]), np.array([a]), tol / 2)
    assert lo[0] == hi[0]


def test_b_zero_line_lies_inside_region_v(base):
    # on B = 0 with R0 < 1 the discriminant is -4AC < 0
    curve = trace_curve(base, "B=0", (0.5, 14), 60)
    for w, a in curve.points:
        lo = base.with_treatment(w, a)
        e = endemic_quadratic(lo)
        if e.C > 0:
            assert e.Delta < 0
            assert len(fixed_points(lo)) == 1
            assert classify_region(base, float(w), float(a) * 0.999).name in ("V", "IV")


def test_endemic_count_changes_across_delta_between_i_and_v(base):
    # the 2 -> 0 change of interior equilibria happens on Delta = 0
    curve = trace_curve(base, "Delta=0", (3, 7), 20)
    for w, a in curve.points:
        if classify_region(base, w, a - 0.05).name != "I":
            continue
        assert classify_region(base, w, a + 0.05).name == "V"
        assert len(fixed_points(base.with_treatment(w, a - 0.05).as_float())) == 3
        assert len(fixed_points(base.with_treatment(w, a + 0.05).as_float())) == 1


# -- curves --------------------------------------------------------------------------------------------

def test_r0_curve_exact(base):
    c = trace_curve(base, "R0=1", (0.5, 14), 50)
    assert max(abs(a - ETA0 * w) for w, a in c.points) == 0


@pytest.mark.parametrize("kind", CURVES)
def test_curve_residuals_and_order(base, kind):
    c = trace_curve(base, kind)
    arr = c.as_array()
    assert len(arr) > 0
    assert np.all(np.diff(arr[:, 0]) >= 0)
    assert max(abs(r) for r in c.residuals) < 1e-8


def test_delta_curve_through_h(base):
    arr = trace_curve(base, "Delta=0", (7.9, 8.0), 400).as_array()
    dist = np.hypot(arr[:, 0] - 7.944664, arr[:, 1] - 7.097233)
    assert dist.min() < 1e-3


def test_trace_curve_through_t1_ends_near_bt(base, corners):
    arr = trace_curve(base, "TrE2=0", (0.01, 14), 2000).as_array()
    near = arr[np.abs(arr[:, 0] - 6) < 0.004]
    assert np.abs(near[:, 1] - 5.00625).min() < 1e-2
    bt = corners["BT"]
    assert np.hypot(arr[:, 0] - bt.omega, arr[:, 1] - bt.alpha).min() < 1e-2
    # the arc inside R0 < 1 right of B1 runs from BT to B2 and no further left
    arc = arr[(arr[:, 1] > float(ETA0) * arr[:, 0]) & (arr[:, 0] > corners["B1"].omega + 0.01)]
    assert arc[:, 0].min() == pytest.approx(bt.omega, abs=1e-2)
    assert arc[:, 0].max() == pytest.approx(corners["B2"].omega, abs=1e-2)
    for w, a in arr[::50]:
        assert abs(trace_at_endemic(base.with_treatment(w, a), "E2")) < 1e-8


# -- raster --------------------------------------------------------------------------------------------

def test_full_map_has_seven_regions(full_map):
    assert full_map.region_names() == set(REGIONS)
    assert full_map.labels.shape == (400, 400)
    assert full_map.components["pointwise_mismatch"] == 0


def test_zoom_shows_via(base):
    zoom = build_map(base, window=(6.8, 7.4, 6.2, 6.6), resolution=(200, 200), curves=False)
    assert zoom.counts()["VIa"] > 0
    w_bt, w_h = 6.84183, 7.94466
    cols = np.nonzero(zoom.labels == "VIa")[1]
    assert np.all((zoom.omegas[cols] > w_bt) & (zoom.omegas[cols] < w_h))


def test_map_is_reproducible(base):
    a = build_map(base, resolution=(60, 60), curves=False)
    b = build_map(base, resolution=(60, 60), curves=False)
    assert np.array_equal(a.labels, b.labels)
