"""Acceptance criteria 1-14, one test each.  A summary line per criterion is
printed at the end of the session (and by running this file directly)."""
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from hypcover import cutting as K
from hypcover import experiments as E
from hypcover import green as G
from hypcover import hypgeo as hg
from hypcover import hypgraph as H
from hypcover import shift as S
from hypcover.config import load_config

SEED = 42
RESULTS = {}
_REPORTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def report(cmd):
    if cmd not in _REPORTS:
        _REPORTS[cmd] = E.DRIVERS[cmd](load_config(None, {"seed": SEED}, cmd))
    return _REPORTS[cmd]


def rows_by_check(rep):
    return {r[0]: r for r in rep.rows}


def test_criterion_01_geometry():
    g = E.geometry_checks(np.random.default_rng(SEED), 10_000)
    ok = g["cocycle"] <= 1e-9 and g["invariance"] <= 1e-9 and g["derivative"] <= 1e-5
    record(1, ok, f"cocycle {g['cocycle']:.1e}, invariance {g['invariance']:.1e}, "
                  f"finite difference {g['derivative']:.1e} over 10^4 samples")


def test_criterion_02_relator_and_vertex_radius():
    r = rows_by_check(report("validate"))
    rel, vr = r["relator_err"][1], r["vertex_radius_err"][1]
    record(2, rel < 1e-8 and vr < 1e-4, f"relator distance to +-I {rel:.1e}, vertex radius error {vr:.1e}")


def test_criterion_03_coding_validation():
    rep = report("validate")
    c = rep.summary["coding"]
    failed = [k for k in ("partition", "res", "mar", "tr", "bar") if not c[k]]
    ok = not failed and c["semiconjugacy_max_err"] < 1e-6 and c["var_rate"] < 1
    record(3, ok, f"failed structural checks {failed or 'none'}; semiconjugacy "
                  f"{c['semiconjugacy_max_err']:.1e} on 1000 depth-20 words; variation rate {c['var_rate']:.3f}")


def test_criterion_04_distortion_band():
    r = rows_by_check(report("validate"))
    ch = {d: r[f"distortion_band_change_delta_{d}"][1] for d in (0.8, 1.0, 1.3)}
    record(4, all(v < 2 for v in ch.values()),
           "band change under length doubling " + ", ".join(f"delta {d}: {v:.3f}" for d, v in ch.items()))


def test_criterion_05_pressure():
    s = report("pressure").summary
    ok = (s["full2_exact"] and abs(s["f2_four_shift_final"] - s["target"]) <= 0.05
          and s["dp_oracle_Z_max_dev"] < 1e-15 and s["octagon_final"] < -0.01)
    record(5, ok, f"2-shift {s['full2_final']:.15f}; F2 4-shift {s['f2_four_shift_final']:.4f} vs "
                  f"{s['target']:.4f} (oracle dev {s['dp_oracle_Z_max_dev']:.0e}); octagon F2 {s['octagon_final']:.4f}")


def test_criterion_06_green_oracle_and_identities():
    s = report("green").summary
    eq = max(s["synthetic_oracle_err_over_tol"].values())
    orc = max(abs(v - 1) for v in s["synthetic_identity_oracle"].values())
    ok = s["synthetic_ok"] and s["identities_ok"]
    record(6, ok, f"oracle error / tail tolerance {eq:.1e}; identities 1-6 oracle dev {orc:.1e}; "
                  f"octagon identities bounded {s['identities_ok']}, band 7 = {s['identities'][7]['worst']['band']:.3f}")


def test_criterion_07_exact_zero_and_unit_cases():
    syn = E.synthetic_system(np.random.default_rng(SEED))
    p = G.GreenParams(lam=1.0, max_depth=60)
    A = (0, 2)
    unit = all(G.path_sum(syn, "F", a, a, p).value == 1.0 for a in range(syn.n))
    zero = all(G.path_sum(syn, "L_A", a, b, p, A).value == 0.0
               for a in range(syn.n) if a not in A for b in range(syn.n))
    zero &= all(G.path_sum(syn, "F_A", a, b, p, A).value == 0.0
                for a in range(syn.n) for b in range(syn.n) if b not in A)
    ext = E.extension("f2", 1.0, 5)
    idn = ext.model.identity
    unit &= all(G.path_sum(ext, "F", (a, idn), (a, idn), p).value == 1.0 for a in (0, 17, 40))
    record(7, unit and zero, f"F(a,a) = 1 exactly {unit}; restricted kernels exactly zero {zero}")


def test_criterion_08_monotonicity_and_harnack():
    h = report("green").summary["harnack"]
    ok = h["violations"] == 0 and h["zero_prefix_ok"] and h["drift"] <= 0.20
    record(8, ok, f"{h['violations']} violations in {h['checked']} terms at lambda 0.9; "
                  f"Harnack constant drift {h['drift']:.3f} over radii {sorted(h['harnack'])}")


def test_criterion_09_quasi_isometry():
    rep = H.quasi_isometry_check(E.extension("f2", 1.0, 5), radius=5)
    record(9, rep.passed, f"{rep.lower_violations} + {rep.upper_violations} violations over {rep.pairs} pairs")


def test_criterion_10_ancona():
    s = report("ancona").summary
    ok = s["slope"] <= 0.02 and s["chain_max_dev"] <= 1e-8
    record(10, ok, f"log max ratio slope {s['slope']:.4f}; chain oracle deviation {s['chain_max_dev']:.1e}")


def test_criterion_11_martin_rays():
    s = report("martin-rays").summary
    ok = s["in_band"] and s["strictly_decreasing"]
    record(11, ok, f"same-direction ratios in [{s['same_ratio_min']:.3f}, {s['same_ratio_max']:.3f}] "
                   f"vs [0.5, 2]; divergence products strictly decreasing {s['strictly_decreasing']}")


def test_criterion_12_cutting():
    rng = np.random.default_rng(SEED)
    pairing = E.octagon()[1]
    model = S.octagon_model("f2")
    rev_bad = shift_bad = 0
    comp = 0.0
    for _ in range(100):
        p = K.sample_pair_in_R(rng)
        w = K.trace_cutting(p, 10, 10)
        r = K.trace_cutting(p.reversed(), 0, 10)
        rev_bad += sum(not model.eq(K.eta(r, n, "+", model), K.eta(w, n, "-", model)) for n in range(10))
        q = p
        for n in range(1, 7):
            q = K.first_return(q)
            c = K.composite_image(p, w.forward(n - 1), pairing)
            comp = max(comp, abs(hg.ang_diff(q.xi_minus, c.xi_minus)), abs(hg.ang_diff(q.xi_plus, c.xi_plus)))
        shift_bad += K.trace_cutting(K.first_return(p), 0, 9).forward(9) != w.forward(10)[1:]
    ok = rev_bad == 0 and shift_bad == 0 and comp < 1e-8
    record(12, ok, f"reversal failures {rev_bad}, shift failures {shift_bad}, composite error {comp:.1e} (n <= 6)")


def test_criterion_13_escape():
    a = report("escape-expansion").summary
    b = report("escape-cutting").summary
    ok = (a["fraction_escaped"] >= 0.95 and b["co_escape_fraction"] >= 0.90
          and a["contrast_median_envelope"] < a["median_envelope"])
    record(13, ok, f"escaped {a['fraction_escaped']:.3f}; co-escape {b['co_escape_fraction']:.3f} "
                   f"over {b['in_R_samples']} pairs; median envelope f2 {a['median_envelope']} vs z2 "
                   f"{a['contrast_median_envelope']}")


def test_criterion_14_byte_reproducible(tmp_path):
    bad = []
    for cmd in E.DRIVERS:
        rep = report(cmd)
        out = tmp_path / cmd
        subprocess.run([sys.executable, "-m", "hypcover", cmd, "--seed", str(SEED), "--out", str(out)],
                       check=False, capture_output=True, env={**os.environ})
        with open(out / f"{rep.name}.csv", encoding="utf-8", newline="") as fh:
            if fh.read() != rep.csv_text():
                bad.append(cmd)
        for name, (header, rows) in rep.extra.items():
            with open(out / f"{name}.csv", encoding="utf-8", newline="") as fh:
                if fh.read() != rep.csv_text(header, rows):
                    bad.append(name)
    record(14, not bad, f"{len(E.DRIVERS)} drivers rerun in a fresh process; mismatches {bad or 'none'}")


def summary_lines():
    lines = []
    for n in range(1, 15):
        if n in RESULTS:
            ok, detail = RESULTS[n]
            lines.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            lines.append(f"criterion {n:2d}: NOT RUN")
    return lines


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
