"""Smoke test for the pyfreetensor extension.

Build and install first:
    cd crates/py && maturin build --release -o dist && pip install dist/*.whl
"""

import math
import random

import pyfreetensor as ft


def main():
    # semicircular moments of order 2 are the Catalan numbers
    assert ft.law_moments("semicircular", 2, 6) == ["1/1", "0/1", "1/1", "0/1", "2/1", "0/1", "5/1"]

    # moments and cumulants invert each other
    m = ft.law_moments("free_poisson", 4, 6, t="3/2")
    c = ft.cumulants_from_moments(4, m)
    assert ft.moments_from_cumulants(4, c) == m
    assert all(x == "3/2" for x in c[1:])
    assert ft.cauchy_check(4, m, 5) == (True, True)

    # free sum of two semicirculars is a dilation
    s = ft.law_moments("semicircular", 4, 4)
    assert ft.free_convolve(4, s, s)[4] == "16/1"

    # maps and the poset
    melon = ft.CombMap.melon(3)
    assert melon.vertex_count() == 2 and melon.is_connected()
    assert ft.is_melonic(melon)
    classes = ft.enumerate(3, 2)
    assert len(classes) == 5
    assert ft.CombMap.from_code(melon.code()) == melon
    bq = ft.CombMap([[1, 2, 3, 4], [5, 6, 7, 8]], [(1, 2), (3, 5), (4, 6), (7, 8)])
    assert ft.moebius(bq, bq) == 1
    assert len(ft.down_set(bq)) >= 1

    # exact evaluation on maps
    d = ft.MapDistribution.melonic(3)
    assert d.eval(melon) == "1/2", d.eval(melon)
    fp = ft.MapDistribution.free_poisson(4, "2")
    assert fp.cumulant_n(2) == "2/1", fp.cumulant_n(2)

    # CLT rescaling is exact
    k = ft.law_cumulants("semicircular", 4, 4)
    assert ft.clt_rescale(4, k, 10)[2] == "1/1"

    # tensors: a random symmetric tensor has trace invariants matching a direct sum
    n = 3
    rng = random.Random(5)
    t = ft.DenseTensor(3, n, [rng.gauss(0, 1) for _ in range(n ** 3)]).symmetrize()
    assert t.is_symmetric()
    direct = sum(t.get([i, j, k]) ** 2 for i in range(n) for j in range(n) for k in range(n)) / n
    assert math.isclose(t.trace_invariant(melon), direct, rel_tol=1e-12)
    assert math.isclose(ft.trace_invariant(melon, [t, t]), direct, rel_tol=1e-12)

    # seeded sampling is reproducible
    a = ft.sample("wigner", 3, 6, seed=9, trial=2)
    b = ft.sample("wigner", 3, 6, seed=9, trial=2)
    assert a.data() == b.data()
    rows = ft.estimate_moments("wigner", 3, 6, 2, 20, seed=1)
    assert [r[0] for r in rows] == [1, 2]

    try:
        ft.law_moments("delta", 3, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("odd-order delta accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
