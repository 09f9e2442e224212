"""Smoke test for the `wrt` extension module.

    pip install --no-build-isolation -e crates/py
    python python/smoke_test.py
"""

import cmath
import math
import sys

import wrt


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def check_mtc():
    m = wrt.Mtc(3)
    assert m.rank == 4 and m.family == "su2"
    s = m.s_matrix()
    for i in range(m.rank):
        for j in range(m.rank):
            dot = sum(s[i][l] * s[j][l].conjugate() for l in range(m.rank))
            assert close(dot, 1.0 if i == j else 0.0), (i, j, dot)
    assert close(m.kappa, cmath.exp(2j * math.pi * 9 / 40))
    assert [m.verlinde_dim(g) for g in range(4)] == [1, 4, 20, 120]
    n = m.fusion()
    assert n[1][1] == [1, 0, 1, 0]
    report = m.check_modular()
    assert report["unitarity_defect"] < 1e-12
    u = wrt.Mtc(6, family="u1")
    assert u.rank == 6 and close(u.total_dim, math.sqrt(6))
    try:
        wrt.Mtc(3, family="u1")
    except ValueError:
        pass
    else:
        raise AssertionError("odd u1 level accepted")


def check_invariants():
    for k in range(1, 8):
        n = k + 2
        expected = math.sqrt(2 / n) * math.sin(math.pi / n)
        assert close(wrt.rt_invariant("s3", k), expected)
        assert close(wrt.rt_invariant("s1xs2", k), 1.0)
    e8 = wrt.Plumbing.parse("poincare")
    star = wrt.Plumbing.parse("poincare_star")
    assert len(e8) == 8 and len(star) == 4
    for k in (1, 2, 3):
        assert close(wrt.rt_invariant(e8, k), wrt.rt_invariant(star, k), 1e-10)
    re, im = wrt.rt_invariant_decimal("lens:5,2", 3, precision=50)
    assert len(re.lstrip("-").split("e")[0].replace(".", "")) == 50
    g = wrt.Plumbing([(0, 3), (1, 2)], [(0, 1)])
    assert g == wrt.Plumbing.parse("lens:5,2")
    assert wrt.Plumbing.from_json(g.to_json()) == g
    assert close(wrt.rt_invariant(g.stabilize(1), 4), wrt.rt_invariant(g, 4))
    link = g.linking_matrix()
    assert link["b1"] == 0 and link["matrix"] == [[3, 1], [1, 2]]
    poly, order = wrt.colored_sum("s1xs2", 2)
    assert order > 0 and poly


def check_abelian():
    h = wrt.homology([[5]], 10)
    assert h["torsion_orders"] == [5]
    assert h["linking_form"][0][0][1] == 5
    assert close(abs(wrt.u1_invariant([[0]], 4)), 1.0)


def check_asymptotics():
    sweep = wrt.sweep("lens:3,1", 20, 276)
    assert len(sweep) == 257 and sweep.k_values[0] == 20
    again = wrt.Sweep.from_csv(sweep.to_csv())
    assert again.values == sweep.values
    spec = sweep.spectrum(max_den=12)
    assert spec["window"] == [20, 276]
    assert 1 <= len(spec["peaks"]) <= 2
    assert any(p["loc"] == "2/3" for p in spec["peaks"])


def check_resurgence():
    coeffs = wrt.synthetic_factorial(20)
    report = wrt.borel_poles(coeffs, cs=[0.0, 1.0])
    assert len(report["poles"]) == 1
    loc = complex(*report["poles"][0]["loc"])
    assert abs(loc - 1.0) < 1e-8
    assert report["matches"][0]["matched"]
    shifted = wrt.borel_poles(wrt.synthetic_factorial(20, -2 + 1j))
    assert abs(complex(*shifted["poles"][0]["loc"]) - (-2 + 1j)) < 1e-8


def main():
    checks = [check_mtc, check_invariants, check_abelian, check_asymptotics, check_resurgence]
    failed = 0
    for check in checks:
        try:
            check()
            print(f"ok    {check.__name__}")
        except Exception as e:  # noqa: BLE001
            failed += 1
            print(f"FAIL  {check.__name__}: {e!r}")
    print(f"wrt {wrt.__version__}: {len(checks) - failed}/{len(checks)} passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
