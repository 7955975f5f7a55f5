import math
import random
import threading

import pytest
from hypothesis import given, settings, strategies as st

from shellkernel.errors import ConvergenceError, DomainError
from shellkernel.kernel import (
    MAX_TRUNCATION_REL,
    KernelContext,
    bergman,
    bergman_truncated,
    iota,
    iota_second_difference,
    log_lambda,
    mode_fraction,
)
from shellkernel.oracle import log_gamma
from shellkernel.weight import ModelWeight, log_h0

from conftest import sqrtk_logk


@pytest.fixture(scope="module")
def ctx200(pure):
    return KernelContext(200, pure)


@pytest.fixture(scope="module")
def ctx1000(w12):
    return KernelContext(1000, w12)


def test_context_attributes(ctx4):
    assert ctx4.i_max == math.ceil(2 * sqrtk_logk(10**4))
    assert ctx4.t_lower == pytest.approx((10**4) ** (1 / 3))
    assert ctx4.dominance_limit == math.ceil(sqrtk_logk(10**4))
    assert ctx4.t_domain >= ctx4.t_lower


def test_context_rejects_small_k():
    with pytest.raises(DomainError):
        KernelContext(99)
    with pytest.raises(DomainError):
        KernelContext(150.5)


def test_context_rejects_nonpositive_weight():
    # h0 vanishes near t = 30 here, above 100^(1/3)
    with pytest.raises(DomainError):
        KernelContext(100, ModelWeight(0.0, -30.0))


def test_log_lambda_stirling(ctx200):
    v = log_lambda(ctx200, 1, 400.0)
    assert v == pytest.approx(400 * math.log(400) - 400 - log_gamma(401), abs=1e-8)
    # 400! ~ sqrt(800 pi) 400^400 e^-400 (1 + 1/4800)
    assert v == pytest.approx(-0.5 * math.log(800 * math.pi), abs=1e-3)
    assert v == pytest.approx(-math.log(2 * math.sqrt(200 * math.pi)), abs=1e-3)


@pytest.mark.parametrize("a", [1, 2, 3, 5, 10])
def test_lambda_at_own_peak(ctx4, a):
    k = 10**4
    r = math.exp(log_lambda(ctx4, a, ctx4.peak(a))) / (a / (2 * math.sqrt(math.pi * k))) - 1
    assert abs(r) <= 5 * math.log(k) / math.sqrt(k)


def test_neighbour_ratio_closed_form_a1(ctx4_pure):
    # pure weight: log Lambda_2/Lambda_1 = -t + (2k+1) ln 2 exactly
    k = 10**4
    t1 = ctx4_pure.peak(1)
    ratio = log_lambda(ctx4_pure, 2, t1) - log_lambda(ctx4_pure, 1, t1)
    assert ratio == pytest.approx(-t1 + (2 * k + 1) * math.log(2), abs=1e-6)


@pytest.mark.parametrize("a", [5, 10])
def test_neighbour_ratio_gaussian(ctx4, a):
    k = 10**4
    ta = ctx4.peak(a)
    ratio = log_lambda(ctx4, a + 1, ta) - log_lambda(ctx4, a, ta)
    assert -1.3 * k / a**2 <= ratio <= -0.7 * k / a**2


def test_log_lambda_domain(ctx4):
    with pytest.raises(DomainError):
        log_lambda(ctx4, 0, 100.0)
    with pytest.raises(DomainError):
        log_lambda(ctx4, ctx4.i_max + 1, 100.0)
    with pytest.raises(DomainError):
        log_lambda(ctx4, 1, 10.0)


def test_iota_linear_in_t(ctx4):
    for i in (1, 7, 2.5):
        assert iota(ctx4, i, 101.0) - iota(ctx4, i, 100.0) == pytest.approx(-i, abs=1e-9)


def test_iota_concave_k1000(ctx1000):
    worst = max(
        iota(ctx1000, i - 1, 0.0) - 2 * iota(ctx1000, i, 0.0) + iota(ctx1000, i + 1, 0.0)
        for i in range(2, ctx1000.i_max)
    )
    assert worst <= 1e-9


@pytest.mark.parametrize("a", [math.ceil(100 / math.log(10**4)), 100])
def test_iota_second_derivative_bounds(ctx4, a):
    k = 10**4
    d2 = iota_second_difference(ctx4, a)
    assert -2.4 * k / a**2 <= d2 <= -0.8 * k / a**2


def test_iota_second_difference_stencil(ctx4):
    with pytest.raises(DomainError):
        iota_second_difference(ctx4, 1.2)


@pytest.mark.parametrize("a", [1, 2, 3])
def test_shell_value(ctx4, a):
    k = 10**4
    v = bergman(ctx4, ctx4.peak(a))
    assert 0.8 <= v.value * math.sqrt(math.pi) * a / (2 * k**1.5) <= 1.2
    assert v.dominant_index == a
    assert 0 <= v.truncation_rel_bound <= MAX_TRUNCATION_REL


def test_dominant_index_matches_shell(ctx4):
    for a in range(1, math.floor(100 / math.log(10**4)) + 1):
        assert bergman(ctx4, ctx4.peak(a)).dominant_index == a


def test_shell_values_decrease_in_a(ctx4):
    vals = [bergman(ctx4, ctx4.peak(a)).log_total for a in range(1, 11)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_far_region_decay_matches_closed_form(ctx4_pure):
    # past t_1 only mode 1 matters; for the pure weight the drop is explicit
    k = 10**4
    t1 = ctx4_pure.peak(1)
    t = t1 + sqrtk_logk(k)
    drop = bergman(ctx4_pure, t).log_total - bergman(ctx4_pure, t1).log_total
    closed = (k + 1) * 2 * math.log(t / t1) - (t - t1)
    assert drop == pytest.approx(closed, abs=1e-6)
    assert drop < -15


def test_truncated_from_one_is_full(ctx4):
    for t in (150.0, 2000.0, 19000.0):
        assert bergman_truncated(ctx4, t, 1).log_total == bergman(ctx4, t).log_total


@pytest.mark.parametrize("a", [1, 2, 3])
def test_truncated_suppressed_at_shell(ctx4, a):
    ta = ctx4.peak(a)
    assert bergman_truncated(ctx4, ta, a + 1).log_total - bergman(ctx4, ta).log_total <= -100


def test_truncated_domain(ctx4):
    with pytest.raises(DomainError):
        bergman_truncated(ctx4, 100.0, 0)
    with pytest.raises(DomainError):
        bergman_truncated(ctx4, 100.0, 2.5)


@settings(max_examples=40, deadline=None)
@given(t=st.floats(min_value=60.0, max_value=30000.0), a=st.integers(min_value=1, max_value=60))
def test_truncated_below_full(ctx4, t, a):
    assert bergman_truncated(ctx4, t, a).log_total <= bergman(ctx4, t).log_total + 1e-12


@settings(max_examples=40, deadline=None)
@given(t=st.floats(min_value=60.0, max_value=30000.0), a=st.integers(min_value=1, max_value=60))
def test_mode_fraction_in_unit_interval(ctx4, t, a):
    f = mode_fraction(ctx4, t, a)
    assert 0.0 <= f <= 1.0


@pytest.mark.parametrize("a", [1, 2, 3])
def test_mode_fraction_at_shell(ctx4, a):
    assert mode_fraction(ctx4, ctx4.peak(a), a) >= 1 - 1e-20


def test_mode_fraction_deep_inside_other_shell(ctx4):
    # at t_3 mode 1 carries a vanishing share
    assert mode_fraction(ctx4, ctx4.peak(3), 1) <= 1e-20


def test_unimodal_terms(ctx4):
    k = 10**4
    for t in (60.0, 300.0, 5000.0, 25000.0):
        base = (k + 1) * log_h0(ctx4.weight, t)
        ex = [base + iota(ctx4, i, t) for i in range(1, ctx4.i_max + 1)]
        m = ex.index(max(ex))
        assert all(x < y for x, y in zip(ex[:m], ex[1 : m + 1]))
        assert all(x > y for x, y in zip(ex[m:], ex[m + 1 :]))


def test_positive_and_finite(ctx4):
    for t in (ctx4.t_domain + 1.0, 500.0, 10**5):
        v = bergman(ctx4, t)
        assert math.isfinite(v.log_total) and v.value >= 0


def test_domain_errors(ctx4):
    with pytest.raises(DomainError):
        bergman(ctx4, 5.0)
    with pytest.raises(DomainError):
        bergman(ctx4, ctx4.t_domain - 1.0)


def test_uncertified_sum_raises(ctx500):
    with pytest.raises(ConvergenceError):
        bergman(ctx500, ctx500.t_domain)


def test_cache_reproducible(w12):
    a = KernelContext(2000, w12)
    b = KernelContext(2000, w12)
    for i in (1, 4.5, 30):
        assert a.log_J(i) == pytest.approx(b.log_J(i), rel=1e-9)
        assert a.log_J(i) is a.log_J(i)


def test_cache_at_most_once_under_threads(w12, monkeypatch):
    import shellkernel.kernel as kmod

    calls = []
    real = kmod.integrate_J

    def counting(*args, **kw):
        calls.append(args[2])
        return real(*args, **kw)

    monkeypatch.setattr(kmod, "integrate_J", counting)
    ctx = KernelContext(3000, w12)
    barrier = threading.Barrier(8)

    def work():
        barrier.wait()
        for i in range(1, 21):
            ctx.log_J(i)

    threads = [threading.Thread(target=work) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert sorted(calls) == list(range(1, 21))


def test_concurrent_bergman_matches_serial(ctx4):
    rng = random.Random(3)
    ts = [rng.uniform(100, 20000) for _ in range(6)]
    serial = [bergman(ctx4, t).log_total for t in ts]
    out = [None] * len(ts)

    def work(j):
        out[j] = bergman(ctx4, ts[j]).log_total

    threads = [threading.Thread(target=work, args=(j,)) for j in range(len(ts))]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert out == serial
