"""Acceptance criteria, each checked at its stated tolerance.

Every test records one line (shown in the terminal summary as
``[PASS]``/``[FAIL]``) before asserting, so a failing criterion still
reports the numbers it measured.
"""

import math
import time

import numpy as np
import pytest

from qdh.adversary import AttackConfig, analyze_attack, pns_double_multiphoton_bound, simulate_attacked_sessions
from qdh.channel import ChannelParams
from qdh.fock import poisson_pmf
from qdh.keyrate import chernoff_sample_size, min_entropy
from qdh.output import Table, render
from qdh.protocol import (
    SessionConfig,
    asymptotic_probs,
    event_probs,
    marginal_stats,
    no_click_prob,
    simulate_sessions,
)
from qdh.qowf import build_srm, conditional_prob_matrix, find_n_star, min_error_prob, qowf_report
from qdh.states import PhaseShiftPower, SetParams, apply_phase_shift, make_set, mixed_density

TABLE1 = {
    (0.01, 20): (4.322, 4.307, 0.014, 0.080),
    (0.02, 20): (4.322, 4.293, 0.029, 0.139),
    (0.05, 30): (4.907, 4.836, 0.071, 0.289),
    (0.1, 40): (5.322, 5.182, 0.140, 0.480),
}


def se(p, m):
    return math.sqrt(max(p * (1 - p), 1e-300) / m)


def test_criterion_1_table_reproduction(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    parts = []
    for (mu, n), ref in TABLE1.items():
        r = qowf_report(make_set(mu, n))
        got = (r.h_x, r.h_x_given_y, r.gain, r.chi)
        worst = max(worst, max(abs(g - e) for g, e in zip(got, ref)))
        parts.append(f"({mu},{n}): " + "/".join(f"{g:.4f}" for g in got))
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.003 and elapsed < 60
    acceptance("1 table reproduction", ok, f"max |diff|={worst:.4f} (tol 0.003), {elapsed:.2f}s; " + "; ".join(parts))
    assert worst <= 0.003
    assert elapsed < 60


def test_criterion_2_qowf_criterion(acceptance):
    t0 = time.perf_counter()
    d_table = {pair: qowf_report(make_set(*pair)).d_ratio for pair in TABLE1}
    d_ok = all(d <= 0.02 for d in d_table.values())
    scans = {mu: find_n_star(mu, 0.02, range(6, 62, 2), workers=4) for mu in (0.01, 0.05, 0.1)}
    mono_ok = all(all(b <= a + 1e-10 for a, b in zip(s.d_values, s.d_values[1:])) for s in scans.values())
    stars = [scans[mu].n_star for mu in (0.01, 0.05, 0.1)]
    star_ok = all(s is not None for s in stars) and all(b >= a for a, b in zip(stars, stars[1:]))
    elapsed = time.perf_counter() - t0
    ok = d_ok and mono_ok and star_ok and elapsed < 300
    detail = (
        "D=" + ", ".join(f"{d:.5f}" for d in d_table.values())
        + f"; monotone={mono_ok}; N*(0.01,0.05,0.1)={stars}; {elapsed:.2f}s"
    )
    acceptance("2 QOWF criterion", ok, detail)
    assert d_ok and mono_ok and star_ok
    assert elapsed < 300


def test_criterion_3_srm_optimality(acceptance):
    import mpmath

    def gram_success(mu, n):
        with mpmath.workdps(50):
            mu = mpmath.mpf(mu)
            row = [mpmath.exp(-mu + mu * mpmath.expjpi(mpmath.mpf(2 * m) / n)) for m in range(n)]
            total = mpmath.mpf(0)
            for k in range(n):
                lam = mpmath.fsum(row[m] * mpmath.expjpi(mpmath.mpf(-2 * k * m) / n) for m in range(n))
                total += mpmath.sqrt(max(mpmath.re(lam), 0))
            return float(total**2 / n**2)

    def srm_err(mu, n):
        sset = make_set(mu, n, strict=False)
        return min_error_prob(conditional_prob_matrix(sset, build_srm(sset)))

    helstrom_gap = 0.0
    for mu in (0.1, 0.5, 1.0):
        sset = make_set(mu, 2, strict=False)
        ov = abs(np.vdot(sset.states[0], sset.states[1])) ** 2
        helstrom_gap = max(helstrom_gap, abs(srm_err(mu, 2) - (1 - math.sqrt(1 - ov)) / 2))
    gram_gap = 0.0
    for mu in (0.01, 0.02, 0.1, 0.5, 1.0):
        for n in range(4, 21):
            gram_gap = max(gram_gap, abs(srm_err(mu, n) - (1 - gram_success(mu, n))))
    ok = helstrom_gap <= 1e-9 and gram_gap <= 1e-8
    acceptance("3 SRM optimality", ok, f"Helstrom gap={helstrom_gap:.1e} (tol 1e-9), Gram gap={gram_gap:.1e} (tol 1e-8)")
    assert helstrom_gap <= 1e-9
    assert gram_gap <= 1e-8


def test_criterion_4_detection_limits(acceptance):
    ideal_gap = 0.0
    for mu in (0.01, 0.02, 0.1, 1.0):
        for s in (0, 1):
            for l in (0, 1):
                q = no_click_prob(l, s, 0.0, 1.0, 1.0, mu)
                ideal_gap = max(ideal_gap, abs(q - math.exp(-mu * (1 + (-1) ** (s + l)))))
            e = event_probs(s, 0.0, 1.0, 1.0, mu)
            ideal_gap = max(ideal_gap, abs(e.click(s) - (1 - math.exp(-2 * mu))), abs(e.click(1 - s)))
    asym_gap = 0.0
    for length in (300, 320, 350, 400, 500):
        ch = ChannelParams(length_km=length, eta_d=0.5)
        ds = marginal_stats(SetParams(0.02, 20), ch)
        ref = asymptotic_probs(ch.eta, 0.5, 0.02)
        asym_gap = max(asym_gap, abs(ds.p_cor - ref), abs(ds.p_err - ref))
    ok = ideal_gap <= 1e-15 and asym_gap <= 1e-4
    acceptance("4 detection limits", ok, f"ideal-limit gap={ideal_gap:.1e}, asymptote gap (L>=300)={asym_gap:.1e} (tol 1e-4)")
    assert ideal_gap <= 1e-15
    assert asym_gap <= 1e-4


def test_criterion_5_long_fiber_convergence(acceptance):
    t0 = time.perf_counter()
    sp = SetParams(0.02, 20)
    lengths = list(range(150, 401, 10))
    stats = {l: marginal_stats(sp, ChannelParams(length_km=l, eta_d=0.5)) for l in lengths}
    bad = [(l, s.p_cor_sifted) for l, s in stats.items() if max(abs(s.p_cor_sifted - 0.5), abs(s.p_err_sifted - 0.5)) > 0.02]
    p_err0 = marginal_stats(sp, ChannelParams(length_km=0, eta_d=0.5)).p_err
    elapsed = time.perf_counter() - t0
    ok = not bad and abs(p_err0) <= 1e-12 and elapsed < 60
    detail = f"P(err)(L=0)={p_err0:.1e}; sifted P(cor) outside 0.5+-0.02 at " + (
        ", ".join(f"L={l}: {p:.4f}" for l, p in bad) if bad else "none"
    ) + f"; {elapsed:.2f}s"
    acceptance("5 long-fiber convergence", ok, detail)
    assert abs(p_err0) <= 1e-12
    assert not bad, detail


@pytest.mark.slow
def test_criterion_6_attack_signature(acceptance):
    t0 = time.perf_counter()
    checks = []
    for mu in (0.01, 0.02):
        d = analyze_attack(make_set(mu, 20), eta_d=0.3)
        checks.append(abs(d.p_s_given_s[0, 0] - 0.5) <= 0.02)
        checks.append(abs(d.p_s_given_s[0, 1] - 0.5) <= 0.02)
        checks.append(abs(d.p_err_sifted - 0.5) <= 0.02)
    gap = {mu: abs(analyze_attack(make_set(mu, 20)).p_s_given_s[0, 0] - 0.5) for mu in (0.01, 0.1)}
    gap_ok = gap[0.1] > gap[0.01]
    m = 10**6
    z_max = 0.0
    for i, mu in enumerate((0.01, 0.02)):
        ref = analyze_attack(make_set(mu, 20), eta_d=0.3)
        batch, emp = simulate_attacked_sessions(AttackConfig(mu, 20, 0.3, seed=1000 + i, partitions=4), m, workers=4)
        for s in (0, 1):
            ms = int(np.count_nonzero(batch.s == s))
            z_max = max(z_max, abs(emp.p_s_given_s[s, 0] - ref.p_s_given_s[s, 0]) / se(ref.p_s_given_s[s, 0], ms))
        z_max = max(z_max, abs(emp.p_err_ab - ref.p_err_ab) / se(ref.p_err_ab, m))
        z_max = max(z_max, abs(emp.p_cor_ab - ref.p_cor_ab) / se(ref.p_cor_ab, m))
    elapsed = time.perf_counter() - t0
    ok = all(checks) and gap_ok and z_max <= 4 and elapsed < 600
    acceptance(
        "6 attack signature",
        ok,
        f"analytic checks {sum(checks)}/{len(checks)}; gap(0.1)={gap[0.1]:.4f} > gap(0.01)={gap[0.01]:.4f}; "
        f"MC max |z|={z_max:.2f} (tol 4); {elapsed:.2f}s",
    )
    assert all(checks) and gap_ok
    assert z_max <= 4


def test_criterion_7_key_rate_numbers(acceptance):
    m_th = chernoff_sample_size(0.02, 1e-6)
    h = {mu: min_entropy(analyze_attack(make_set(mu, 20)).p_e_cor) for mu in (0.01, 0.015, 0.02)}
    h_ok = all(v >= 0.96 for v in h.values())
    sweep = np.round(np.linspace(0.01, 0.1, 10), 4)
    fit_gap = max(abs(min_entropy(analyze_attack(make_set(float(mu), 20)).p_e_cor) - math.exp(-2.1 * mu)) for mu in sweep)
    pns = pns_double_multiphoton_bound(0.1).bound
    ok = m_th == 108815 and h_ok and fit_gap <= 0.02 and abs(pns - 2.5e-5) <= 1e-15
    acceptance(
        "7 key-rate numbers",
        ok,
        f"m_th={m_th}; h_min at mu=0.01/0.015/0.02 = "
        + "/".join(f"{v:.4f}" for v in h.values())
        + f" (need >=0.96); max |h_min - e^(-2.1mu)|={fit_gap:.4f} (tol 0.02); PNS(0.1)={pns:.2e}",
    )
    assert m_th == 108815
    assert fit_gap <= 0.02
    assert abs(pns - 2.5e-5) <= 1e-15
    assert h_ok, f"h_min below 0.96: {h}"


def test_criterion_8_property_suites(acceptance, rng):
    results = {}
    # POVM completeness / PSD / covariance
    worst = 0.0
    for mu, n in ((0.01, 20), (0.02, 20), (0.05, 30), (0.1, 40), (1.0, 6)):
        sset = make_set(mu, n)
        srm = build_srm(sset)
        worst = max(worst, srm.completeness_residual(mixed_density(sset)) / 1e-8, srm.covariance_residual() / 1e-9,
                    -srm.min_eigenvalue() / 1e-9)
    results["povm"] = worst <= 1
    # event-probability normalisation
    m = 10**5
    e = event_probs(rng.integers(0, 2, m), rng.uniform(-10, 10, m), rng.uniform(0, 1, m),
                    rng.uniform(0.01, 1, m), rng.uniform(0, 5, m))
    results["normalisation"] = float(np.abs(e.click_d0 + e.click_d1 + e.no_click + e.double_click - 1).max()) <= 1e-12
    # phase-shift group law: exact in the exponent group Z_N; the operator
    # action agrees up to float rounding of the phase factors
    sset = make_set(0.3, 20)
    law = True
    for x in range(20):
        for y in range(20):
            comp = PhaseShiftPower(x, 20) * PhaseShiftPower(y, 20)
            law &= comp.exponent == (x + y) % 20
            law &= comp == PhaseShiftPower(y, 20) * PhaseShiftPower(x, 20)
            two = apply_phase_shift(apply_phase_shift(sset.vector(0), x, 20), y, 20).amplitudes
            law &= bool(np.abs(two - comp(sset.vector(0)).amplitudes).max() <= 1e-14)
            law &= bool(np.abs(two - sset.states[(x + y) % 20]).max() <= 1e-14)
    results["group law"] = law
    # N-independence of detection marginals
    n_gap = 0.0
    for length in (0, 50, 150, 300):
        ch = ChannelParams(length_km=length)
        ref = marginal_stats(SetParams(0.02, 20), ch)
        for n in (30, 40):
            o = marginal_stats(SetParams(0.02, n), ch)
            n_gap = max(n_gap, abs(o.p_cor - ref.p_cor), abs(o.p_err - ref.p_err), abs(o.p_inc - ref.p_inc))
    results["N-independence"] = n_gap <= 1e-12
    # determinism: byte-identical CSV for a fixed seed

    def csv_for(seed):
        t = Table(("L", "p_cor", "p_inc", "p_err"))
        for length in (10.0, 80.0):
            cfg = SessionConfig(SetParams(0.02, 20), ChannelParams(length_km=length), 20_000, seed, 3)
            st = simulate_sessions(cfg, workers=3)[1]
            t.add(length, st.p_cor, st.p_inc, st.p_err)
        return render(t).encode()

    results["determinism"] = csv_for(9) == csv_for(9)
    # Monte Carlo vs quadrature on a 3x3 (mu, L) grid
    z_max = 0.0
    m = 2 * 10**5
    for i, mu in enumerate((0.01, 0.1, 0.5)):
        for j, length in enumerate((0.0, 50.0, 150.0)):
            ch = ChannelParams(length_km=length)
            ref = marginal_stats(SetParams(mu, 20), ch)
            emp = simulate_sessions(SessionConfig(SetParams(mu, 20), ch, m, 500 + 3 * i + j))[1]
            for f in ("p_cor", "p_err", "p_inc"):
                r = getattr(ref, f)
                if r > 0:
                    z_max = max(z_max, abs(getattr(emp, f) - r) / se(r, m))
                else:
                    z_max = max(z_max, 0.0 if getattr(emp, f) == 0 else math.inf)
    results["MC vs quadrature"] = z_max <= 4
    ok = all(results.values())
    detail = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in results.items()) + f" (grid max |z|={z_max:.2f})"
    acceptance("8 property suites", ok, detail)
    assert ok, detail


def test_poisson_oracle_consistency():
    # the mixture spectrum behind criterion 1 is the Poisson law
    np.testing.assert_allclose(np.diag(mixed_density(make_set(0.1, 40))).real, poisson_pmf(0.1, 20), atol=1e-12)
