import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cauchyleray.geometry import (
    Ball,
    DefiningFunction,
    DomainError,
    Ellipsoid,
    Limacon,
    PowerDomain,
    SamplerConfig,
    SamplingError,
    StabilityError,
    StarShaped,
    check_stability,
    condition_report,
    estimate_condition,
    leray_denominator,
    make_domain,
    mollify,
    power_function,
    power_gap,
    to_complex,
    to_real,
)
from oracles import gaussian_smoothed_quad

SMALL = SamplerConfig(n_boundary=150, n_interior=150, n_collar=150, diag_depth=6)


def catalog():
    return [Ball(2), Ball(1, 2.0), Ellipsoid([1, 1.5, 0.8, 1.2]), PowerDomain([1.5, 2, 1.5, 2]),
            PowerDomain([4, 4, 2, 2]), Limacon(0.9)]


# --------------------------------------------------------------------- derivatives

@pytest.mark.parametrize("dom", catalog(), ids=repr)
def test_gradient_matches_central_differences(dom):
    rng = np.random.default_rng(5)
    omega = rng.normal(size=(2000, dom.n)) + 1j * rng.normal(size=(2000, dom.n))
    omega /= np.linalg.norm(to_real(omega), axis=-1)[:, None]
    s = 0.3 + 0.9 * rng.random(2000)
    z = dom.center + (s * dom.radius_along(omega))[:, None] * omega
    u = to_real(z)
    if dom.r.smoothness == "C11":
        # smooth points: away from the coordinate hyperplanes where |u|^m is rough
        u = u[np.all(np.abs(u) > 0.1, axis=-1)]
    if dom.kind == "limacon":
        u = u[np.linalg.norm(u, axis=-1) > 0.5]     # third derivatives grow like |z|^-3
    u = u[:100]
    assert len(u) == 100
    z = to_complex(u)
    h = 1e-4
    g = dom.r.real_grad(z)
    fd = np.empty_like(g)
    for i in range(2 * dom.n):
        e = np.zeros(2 * dom.n)
        e[i] = h
        fd[:, i] = (dom.r.value(to_complex(u + e)) - dom.r.value(to_complex(u - e))) / (2 * h)
    err = np.abs(g - fd).max(axis=-1) / (np.abs(g).max(axis=-1) + 1)
    assert np.all(err <= 10 * h**2)


def test_wirtinger_gradient_and_hessian_of_ball():
    z = np.array([0.3 + 0.2j, -0.1 + 0.5j])
    r = Ball(2).r
    assert np.allclose(r.grad(z), np.conj(z))
    assert np.allclose(r.mixed_hessian(z), np.eye(2))


def test_value_sign():
    for dom in catalog():
        assert np.all(dom.r.value(dom.center[None]) < 0)
        rng = np.random.default_rng(0)
        w = rng.normal(size=(20, dom.n)) + 1j * rng.normal(size=(20, dom.n))
        w /= np.linalg.norm(to_real(w), axis=-1)[:, None]
        b = dom.boundary_points(w)
        assert np.max(np.abs(dom.r.value(b))) < 1e-9
        assert np.all(dom.r.value(dom.center + 1.1 * (b - dom.center)) > 0)


def test_domain_validation():
    with pytest.raises(DomainError):
        PowerDomain([1.0, 2, 2, 2])
    with pytest.raises(DomainError):
        Limacon(1.2)
    with pytest.raises(DomainError):
        make_domain("torus")
    with pytest.raises(DomainError):
        Ellipsoid([1, 2, 3])


def test_star_shaped_domain():
    dom = StarShaped(2, lambda w: 1 + 0.2 * np.abs(w[..., 0]) ** 2)
    rng = np.random.default_rng(0)
    w = rng.normal(size=(10, 2)) + 1j * rng.normal(size=(10, 2))
    w /= np.linalg.norm(to_real(w), axis=-1)[:, None]
    assert np.allclose(dom.r.value(dom.boundary_points(w)), 0, atol=1e-9)
    dom.check_star_shaped()


# --------------------------------------------------------------------- leray_denominator

def test_leray_denominator_examples():
    assert np.isclose(leray_denominator(Ball(1).r, np.array([1 + 0j]), np.array([0j])), 1)
    z = np.array([0.3 + 0.1j, 0.2j])
    assert leray_denominator(Ball(2).r, z, z) == 0
    val = leray_denominator(Ball(2).r, np.array([1 + 0j, 0j]), np.array([0.5, 0.5j]))
    assert np.isclose(val, 0.5)


# --------------------------------------------------------------------- conditions

def test_ball_infima_half():
    rep = condition_report(Ball(2), SMALL)
    for tag in ("c0", "Cplus", "b", "c"):
        assert rep.holds(tag)
        assert abs(rep[tag].infimum - 0.5) < 0.05


def test_ball_and_ellipsoid_stable_under_quadrupled_samples():
    for dom in (Ball(2), Ellipsoid([1, 1, 1, 2])):
        a = condition_report(dom, SMALL)
        b = condition_report(dom, SMALL.scaled(4))
        for tag in ("c0", "Cplus", "b", "c"):
            assert a[tag].infimum > 0
            assert abs(a[tag].infimum - b[tag].infimum) <= 0.2 * a[tag].infimum


def test_cplus_not_above_c0():
    for dom in (Ball(2), Ellipsoid([1, 1.3, 1, 0.7]), PowerDomain([1.5, 2, 1.5, 2])):
        rep = condition_report(dom, SMALL)
        assert rep["Cplus"].infimum <= rep["c0"].infimum + 1e-15


def test_witness_attains_infimum():
    dom = Ellipsoid([1, 1.3, 1, 0.7])
    est = estimate_condition(dom.r, dom, "c0", SMALL)
    zeta, z = est.witness
    p = abs(leray_denominator(dom.r, zeta, z))
    assert np.isclose(p / np.sum(np.abs(zeta - z) ** 2), est.infimum, rtol=1e-12)


def test_power_domain_ball_relabelled_condition_c():
    dom = PowerDomain([2, 2, 2, 2])
    est = estimate_condition(dom.r, dom, "c", SMALL)
    # r = |z|^2 - 1 again, so the quotient on the sphere is exactly 1/2
    assert abs(est.infimum - 0.5) < 1e-9


def test_condition_distance_variant_positive_on_ball():
    est = estimate_condition(Ball(2).r, Ball(2), "Cpp", SMALL)
    assert est.infimum > 0


def test_empty_collar_is_an_error():
    dom = Ball(2)
    cfg = SamplerConfig(n_boundary=20, n_interior=20, n_collar=0)
    with pytest.raises(SamplingError):
        estimate_condition(dom.r, dom, "Cplus", cfg)


def test_condition_estimates_deterministic_with_workers():
    dom = Ellipsoid([1, 1.3, 1, 0.7])
    a = estimate_condition(dom.r, dom, "b", SMALL)
    b = estimate_condition(dom.r, dom, "b", SamplerConfig(**{**SMALL.__dict__, "workers": 3}))
    assert a.infimum == b.infimum
    assert all(np.array_equal(x, y) for x, y in zip(a.witness, b.witness))


# --------------------------------------------------------------------- stability

def _ball_function_pairs():
    r1 = Ball(2).r
    yield r1.scaled(lambda z: 2.0 + 0 * z[..., 0].real)
    yield r1.scaled(lambda z: 2.0 + z[..., 0].real)
    # |z|^4 - 1 = (|z|^2 + 1) r1
    yield DefiningFunction(2, lambda z: np.sum(np.abs(z) ** 2, axis=-1) ** 2 - 1, name="quartic")


@pytest.mark.parametrize("r2", list(_ball_function_pairs()), ids=["2r", "(2+x1)r", "|z|^4-1"])
def test_stability_examples(r2):
    assert check_stability(Ball(2).r, r2, Ball(2), SMALL)


def test_stability_rejects_different_zero_sets():
    other = Ball(2, radius=1.2).r
    with pytest.raises(StabilityError):
        check_stability(Ball(2).r, other, Ball(2), SMALL)


# --------------------------------------------------------------------- power gap

def test_power_gap_m2_is_one():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(1000, 4)), rng.normal(size=(1000, 4))
    assert np.allclose(power_gap(2.0, x, y), 1.0, rtol=1e-12)


def test_power_gap_origin_example():
    y = np.array([[0.3, 0.0], [0.0, -0.7]])
    q = power_gap(1.5, np.zeros((2, 2)), y)
    assert np.allclose(q, np.linalg.norm(y, axis=-1) ** -0.5)
    assert np.all(q >= 1)


def test_power_gap_sentinel_and_errors():
    assert power_gap(3.0, np.ones(3), np.ones(3)) == np.inf
    with pytest.raises(ValueError):
        power_gap([1.0, 2.0], np.zeros(2), np.ones(2))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(1.05, 3.0), min_size=2, max_size=4), st.integers(0, 1000))
def test_power_gap_positive(m, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.5, 0.5, (2000, len(m)))
    y = rng.uniform(-0.5, 0.5, (2000, len(m)))
    assert np.min(power_gap(m, x, y)) > 0


# --------------------------------------------------------------------- mollify

def test_mollify_smooth_quadratic_is_nearly_exact():
    r = Ball(2).r
    z = np.array([[0.3 + 0.1j, -0.4 + 0.2j]])
    errs = []
    for k in (10, 20, 40):
        m = mollify(r, k)
        # convolving a quadratic adds the constant 2n sigma^2 only
        errs.append(abs(m.value(z)[0] - r.value(z)[0]))
        assert np.allclose(m.real_grad(z), r.real_grad(z), atol=1e-10)
    assert errs[1] <= errs[0] / 4 * 1.01 and errs[2] <= errs[1] / 4 * 1.01


def test_mollify_power_matches_convolution_oracle():
    r = power_function([1.9, 2, 2, 2])
    k = 20
    m = mollify(r, k)
    sigma = 1.0 / k
    for x in (0.0, 0.03, 0.2):
        z = to_complex(np.array([[x, 0.1, 0.2, 0.3]]))
        ref = gaussian_smoothed_quad(lambda t: abs(t) ** 1.9, x, sigma)
        ref += sum(gaussian_smoothed_quad(lambda t: t**2, c, sigma) for c in (0.1, 0.2, 0.3)) - 1
        assert abs(m.value(z)[0] - ref) < 1e-8


def test_mollified_second_derivative_bounded_by_ess_sup():
    # x|x| has |f''| = 2 a.e.; its mollification must stay within that bound
    r = DefiningFunction(1, lambda z: to_real(z)[..., 0] * np.abs(to_real(z)[..., 0]) - 1,
                         coordinate_terms=([(lambda u: u * np.abs(u), lambda u: 2 * np.abs(u)),
                                            (lambda u: 0 * u, lambda u: 0 * u)], -1.0))
    for k in (5, 20, 80):
        m = mollify(r, k)
        xs = np.linspace(-0.5, 0.5, 41)
        h = m.real_hess(to_complex(np.stack([xs, 0 * xs], -1)))[:, 0, 0]
        assert np.max(np.abs(h)) <= 2 + 1e-6


def test_mollified_power_hessian_at_zero_finite():
    r = power_function([1.9, 2, 2, 2])
    vals = []
    for k in (10, 20, 40):
        h = mollify(r, k).real_hess(np.zeros((1, 2), complex))[0, 0, 0]
        ref_sigma = 1.0 / k
        # exact second derivative of |x|^1.9 * Gaussian at 0: 1.9*0.9*E|t|^{-0.1}
        from scipy.special import gamma
        ref = 1.9 * 0.9 * ref_sigma**-0.1 * 2 ** (-0.05) * gamma(0.45) / np.sqrt(np.pi)
        assert np.isfinite(h) and abs(h - ref) < 1e-3 * ref
        vals.append(h)
    assert vals[0] < vals[1] < vals[2]      # grows like k^{0.1}: the a.e. bound is infinite


def test_mollify_c0_error_halves():
    r = power_function([1.5, 1.5, 2, 2])
    z = to_complex(np.random.default_rng(0).uniform(-0.6, 0.6, (50, 4)))
    e = [np.max(np.abs(mollify(r, k).value(z) - r.value(z))) for k in (8, 16, 32)]
    assert e[1] <= e[0] / 2 and e[2] <= e[1] / 2


def test_mollify_generic_function_uses_tensor_rule():
    r = DefiningFunction(1, lambda z: np.abs(z[..., 0]) ** 2 - 1)
    m = mollify(r, 50)
    z = np.array([[0.2 + 0.1j]])
    # E|z + s|^2 = |z|^2 + 2 sigma^2
    assert abs(m.value(z)[0] - (r.value(z)[0] + 2 * (1 / 50) ** 2)) < 1e-10
    with pytest.raises(ValueError):
        mollify(r, 0)
