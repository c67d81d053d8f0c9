"""
test_acceptance.py
Criterios de aceptación del toolkit: familia cuadrática, divisibilidad de Ax,
huecos exactos, consistencia de delta, distinguidores, rango, regularización,
compresión, mejor aproximación y rendimiento.

Los casos de rendimiento largos (RM_2(2,6) y RM_2(3,5) con 4 workers) sólo
corren con GRM_SLOW=1.

Ejecutar con: python scripts/test_acceptance.py  (o pytest scripts/)
"""

import itertools
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from core.density import a4_consistency, ax_check, gap_scan
from core.distributions import (
    best_approximation,
    distinguisher_gap,
    Distribution,
    parse_masses,
    statistical_distance,
)
from core.field_poly import from_coefficient_index, monomial_basis, parse_polynomial, random_polynomial, total_degree
from core.spectrum import CodeParams, enumerate_spectrum, weight, weight_set
from core.structure import (
    compress,
    is_regular_set,
    parse_error_map,
    parse_threshold_map,
    rank,
    REGULAR,
    regularize,
    verify_decomposition,
)
from utils.rationals import format_fraction

SLOW = os.getenv("GRM_SLOW") == "1"


def quadratic_sum(k):
    return " + ".join(f"x{2 * i - 1}*x{2 * i}" for i in range(1, k + 1))


def test_quadratic_family_weights():
    for k in (1, 2, 3):
        m = 2 * k
        weights = {w.value for w in weight_set(enumerate_spectrum(CodeParams(2, 2, m)))}
        low, high = Fraction(2 ** k - 1, 2 ** (k + 1)), Fraction(2 ** k + 1, 2 ** (k + 1))
        assert low in weights and high in weights, k
        assert weight(parse_polynomial(quadratic_sum(k), 2, m))[1].value == low
        assert weight(parse_polynomial(quadratic_sum(k) + " + 1", 2, m))[1].value == high


def test_ax_divisibility():
    codes = [(2, 2, m) for m in range(1, 6)] + [(3, 1, m) for m in range(1, 5)] + [(3, 2, 3), (5, 1, 3)]
    if SLOW:
        codes += [(2, 2, 6), (2, 3, 5)]
    for p, r, m in codes:
        assert ax_check(enumerate_spectrum(CodeParams(p, r, m), workers=4 if SLOW else 1)).ok, (p, r, m)


def test_gap_at_non_p_rational_target():
    assert gap_scan(Fraction(1, 2), 3, 1, 3).overall_gap == Fraction(1, 6)
    report = gap_scan(Fraction(1, 2), 3, 2, 3)
    assert report.overall_gap == Fraction(1, 18)
    assert [format_fraction(rec.distance) for rec in report.records] == ["1/6", "1/18", "1/18"]
    assert report.complete and not report.attained


def test_delta_consistency():
    for alpha in (Fraction(1, 3), Fraction(1, 5), Fraction(2, 7)):
        for c in (1, 2, 3):
            assert a4_consistency(alpha, c, 2).ok, (alpha, c)


def test_distinguisher_bound_randomized():
    rng = random.Random(2024)
    for _ in range(1000):
        p = rng.choice([2, 3])
        c = rng.randint(1, 3 if p == 2 else 2)
        size = p ** c
        first, second = (
            Distribution.from_counts(p, c, weights, sum(weights))
            for weights in ([rng.randrange(1, 8) for _ in range(size)] for _ in range(2))
        )
        subset = [s for s in range(size) if rng.random() < 0.5]
        gap, ok = distinguisher_gap(first, second, subset)
        assert ok and gap <= statistical_distance(first, second)


def test_rank_fast_path_matches_search():
    p, r, m = 2, 2, 4
    for index in range(p ** len(monomial_basis(p, r, m))):
        f = from_coefficient_index(p, r, m, index)
        assert rank(f, 1).value == rank(f, 1, method="search").value, str(f)
    f = parse_polynomial("x1*x2*x3", 2, 3)
    result = rank(f, 2)
    assert result.value == 2 and verify_decomposition(f, result.witness)


def test_regularize_closed_loop():
    threshold_map = parse_threshold_map("c")
    for m in range(0, 4):
        for index in range(2 ** len(monomial_basis(2, 3, m))):
            f = from_coefficient_index(2, 3, m, index)
            result = regularize(f, threshold_map)
            decomposition = result.decomposition
            assert result.complete, str(f)
            assert verify_decomposition(f, decomposition), str(f)
            if decomposition.factors:
                certificate = is_regular_set(list(decomposition.factors), threshold_map(decomposition.c))
                assert certificate.verdict == REGULAR, str(f)


def test_compression_random_quadratics():
    rng = random.Random(8)
    error_map = parse_error_map("1/2^c")
    for _ in range(100):
        f = random_polynomial(2, 8, 2, rng, exact_degree=True)
        assert total_degree(f) == 2
        result = compress(f, error_map)
        assert result.success, str(f)
        assert result.achieved_error < error_map(result.c)
        assert result.distribution_distance < error_map(result.c)
        assert result.rel_f == weight(f)[1].value


def test_best_approximation_floor():
    result = best_approximation(parse_masses("1/2,1/2,0", 3), 2, 3)
    assert result.complete and result.distance > 0
    assert result.slice(1, 3).distance == Fraction(1, 3)
    assert result.distance == Fraction(1, 9)
    assert [result.slice(2, m).distance for m in range(4)] == [
        Fraction(1, 2), Fraction(1, 6), Fraction(1, 9), Fraction(1, 9)
    ]


def test_performance_rm_2_2_6():
    if not SLOW:
        return
    start = time.perf_counter()
    spectrum = enumerate_spectrum(CodeParams(2, 2, 6))
    assert time.perf_counter() - start <= 60
    assert spectrum.total() == 2 ** 22


def test_performance_rm_2_3_5_workers():
    if not SLOW:
        return
    params = CodeParams(2, 3, 5)
    start = time.perf_counter()
    parallel = enumerate_spectrum(params, workers=4)
    assert time.perf_counter() - start <= 600
    assert parallel.total() == 2 ** 26
    assert parallel == enumerate_spectrum(params, workers=1)


def test_worker_independence_small():
    for p, r, m in itertools.product([2], [2, 3], [4, 5]):
        params = CodeParams(p, r, m)
        if len(monomial_basis(p, r, m)) > 16:
            continue
        assert enumerate_spectrum(params, workers=3) == enumerate_spectrum(params)


def main():
    """Ejecuta todas las pruebas"""
    print("=" * 60)
    print("🧪 GRM - CRITERIOS DE ACEPTACIÓN")
    print("=" * 60)

    tests = [(name, fn) for name, fn in globals().items() if name.startswith("test_") and callable(fn)]
    failures = 0
    for name, fn in tests:
        try:
            start = time.perf_counter()
            fn()
            print(f"✅ {name} ({time.perf_counter() - start:.1f}s)")
        except Exception as e:
            failures += 1
            print(f"❌ {name}: {e}")

    print("=" * 60)
    print(f"📊 {len(tests) - failures}/{len(tests)} pruebas pasaron")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
