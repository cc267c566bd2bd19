"""Acceptance criteria 1-9.

Each test prints one ``criterion N: PASS|FAIL`` line, also collected into
the terminal summary. Run alone with ``python tests/test_acceptance.py``.
"""

import csv
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from clickbound.bound import approx_error, bound_min, generic_bound, norm_factor, p_ideal, scan_zeta
from clickbound.cli import EXIT_OK, main
from clickbound.oracle import w2_bruteforce
from clickbound.special import bump_theta
from clickbound.testfn import ModelParams, onshell_profile_h, default_profile
from clickbound.wightman import boosted_overlap, boosted_overlap_kmu, w2_self

FIGURE_SET = [(a, r) for r in (1.0, 2.0) for a in (0.5, 1.0, 2.0)]


def report(record_property, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    record_property("acceptance", line)
    assert ok, line


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) if r[k] else np.nan for r in rows]) for k in rows[0]}


@pytest.fixture(scope="module")
def figure_run(tmp_path_factory):
    """Full default figure1 run from a cold cache, timed."""
    base = tmp_path_factory.mktemp("figure1")
    t0 = time.perf_counter()
    code = main(["figure1", "--out-dir", str(base / "out"), "--cache-dir", str(base / "cache")])
    elapsed = time.perf_counter() - t0
    return code, elapsed, base


def test_criterion_1_vacuum_limit(table_for, record_property):
    t = table_for(0.0, 2.0)
    devs = [abs(bound_min(p, t).p_max / p - 1.0) for p in (1e-8, 1e-4, 1e-1)]
    report(record_property, 1, max(devs) <= 0.005, f"max relative deviation {max(devs):.2e} (tol 5e-3)")


def test_criterion_2_oracle_constants(record_property):
    p = ModelParams(1.0, 2.0)
    t0 = time.perf_counter()
    o0 = w2_bruteforce(0.0, p).value
    w0 = w2_self(p).value
    checks = [abs(w0 - o0.real) / abs(o0.real) <= 0.01]
    parts = [f"W0 dev {abs(w0 - o0.real) / abs(o0.real):.2e}"]
    for eta in (0.3, 0.7):
        d = boosted_overlap(eta, p).value - w2_bruteforce(eta, p).value
        dev = max(abs(d.real), abs(d.imag)) / abs(w0)
        checks.append(dev <= 0.02)
        parts.append(f"W({eta}) dev {dev:.2e}")
    elapsed = time.perf_counter() - t0
    checks.append(elapsed <= 300)
    report(record_property, 2, all(checks), ", ".join(parts) + f", {elapsed:.0f} s")


def test_criterion_3_identities(record_property):
    p = ModelParams(1.0, 2.0)
    w0 = w2_self(p).value
    d0 = abs(boosted_overlap(0.0, p).value - w0) / w0
    herm = max(abs(boosted_overlap(-e, p).value - np.conj(boosted_overlap(e, p).value)) / w0
               for e in (0.3, 0.7, 1.5, 4.0))
    herm_kmu = max(abs(boosted_overlap_kmu(-e, p).value - np.conj(boosted_overlap_kmu(e, p).value)) / w0
                   for e in (0.3, 0.7))
    im0 = abs(complex(boosted_overlap_kmu(0.0, p).value).imag) / w0
    ok = d0 <= 1e-8 and max(herm, herm_kmu) <= 1e-8 and im0 <= 1e-10
    report(record_property, 3, ok,
           f"W(0)-W0 {d0:.1e}, hermiticity {max(herm, herm_kmu):.1e}, Im W0/W0 {im0:.1e}")


def test_criterion_4_large_zeta(table_for, record_property):
    devs = {}
    for a, r in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)]:
        lim = math.sqrt(p_ideal(ModelParams(a, r)))
        devs[(a, r)] = abs(approx_error(1e4, table_for(a, r)) / lim - 1.0)
    worst = max(devs.values())
    report(record_property, 4, worst <= 0.01, f"max relative deviation {worst:.2e} (tol 1e-2)")


def test_criterion_5_small_zeta_decay(table_for, record_property):
    zetas = np.array([10.0, 1.0, 0.1, 0.01])
    slopes, decreasing = {}, True
    for a, r in FIGURE_SET:
        t = table_for(a, r)
        e = np.array([approx_error(z, t) for z in zetas])
        decreasing &= bool(np.all(np.diff(e) < 0))
        slopes[(a, r)] = np.polyfit(np.log(zetas), np.log(e), 1)[0]
    ok = decreasing and all(0.5 <= s <= 1.5 for s in slopes.values())
    detail = ", ".join(f"(a={a:g}, r={r:g}) {s:.3f}" for (a, r), s in slopes.items())
    report(record_property, 5, ok, f"strictly decreasing={decreasing}; fitted slopes {detail}")


def test_criterion_6_bound_structure(table_for, record_property):
    pd = np.geomspace(1e-10, 1.0, 41)
    sample = np.geomspace(1e-2, 1e8, 50)
    worst_cap, worst_dom, mono, in_range = -np.inf, -np.inf, True, True
    for a, r in FIGURE_SET:
        t = table_for(a, r)
        scan = scan_zeta(t)
        pi = -math.expm1(-t.w0)
        errs = [approx_error(z, t) for z in sample]
        rows = [bound_min(p, t, scan=scan) for p in pd]
        pm = np.array([x.p_max for x in rows])
        mono &= bool(np.all(np.diff(pm) >= -1e-12))
        in_range &= bool(np.all((pm >= 0) & (pm <= 1)))
        for x in rows:
            worst_cap = max(worst_cap, x.p_max - (math.sqrt(pi) + math.sqrt(x.p_dark)) ** 2)
            best_sampled = min(generic_bound(e, norm_factor(z), x.p_dark) for z, e in zip(sample, errs))
            worst_dom = max(worst_dom, x.p_max - best_sampled)
    ok = worst_cap <= 1e-6 and worst_dom <= 1e-12 and mono and in_range
    report(record_property, 6, ok, f"cap excess {worst_cap:.2e}, sampled excess {worst_dom:.2e}, "
                                   f"monotone={mono}, in [0,1]={in_range}")


def test_criterion_7_figure(figure_run, record_property):
    code, elapsed, base = figure_run
    out = base / "out"
    curves = {(a, r): read_csv(out / f"curve_alpha{a:g}_r{r:g}.csv") for a, r in FIGURE_SET}
    decreasing = all(np.all(np.diff(c["p_max"]) >= 0) and c["p_max"][0] < c["p_max"][-1]
                     for c in curves.values())
    ordered = all(np.all(curves[(a, 1.0)]["ratio"] <= curves[(a, 2.0)]["ratio"])
                  for a in (0.5, 1.0, 2.0))
    files = all((out / n).exists() for n in ("figure1_upper.svg", "figure1_lower.svg"))
    rows = sum(len(c["p_dark"]) for c in curves.values())
    ok = code == EXIT_OK and decreasing and ordered and files and rows == 246 and elapsed <= 600
    report(record_property, 7, ok, f"{rows} rows, decreasing={decreasing}, r=1 ratio <= r=2 "
                                   f"ratio={ordered}, cold run {elapsed:.0f} s")


def test_criterion_8_determinism(figure_run, tmp_path, record_property):
    _, _, base = figure_run
    main(["figure1", "--out-dir", str(tmp_path / "warm"), "--cache-dir", str(base / "cache"),
          "--no-svg"])
    main(["figure1", "--out-dir", str(tmp_path / "cold2"), "--cache-dir", str(tmp_path / "c2"),
          "--workers", "2", "--no-svg"])
    names = sorted(p.name for p in (base / "out").glob("*.csv"))
    same = all((base / "out" / n).read_bytes() == (tmp_path / d / n).read_bytes()
               for d in ("warm", "cold2") for n in names)
    report(record_property, 8, same and len(names) == 6,
           f"{len(names)} CSVs identical across warm rerun and 2-worker cold rerun: {same}")


def test_criterion_9_closed_forms(record_property):
    checks = {
        "norm_factor(pi^2)": abs(norm_factor(math.pi ** 2) - math.exp(0.5)),
        "theta(1/2)": abs(bump_theta(0.5) - 0.5),
        "theta(s<=0)": float(np.max(np.abs(bump_theta(np.array([-3.0, -1e-12, 0.0]))))),
        "theta(s>=1)": float(np.max(np.abs(bump_theta(np.array([1.0, 1 + 1e-12, 4.0])) - 1.0))),
        "h(0)": abs(onshell_profile_h(0.0)) + abs(float(default_profile()(0.0))),
    }
    worst = max(checks.values())
    report(record_property, 9, worst <= 1e-12, f"max deviation {worst:.1e} over {', '.join(checks)}")


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-v"]))
