"""
test_structure.py
Pruebas de rango, certificados de regularidad, regularización,
escaneo sesgo/rango y compresión.

Ejecutar con: python scripts/test_structure.py  (o pytest scripts/)
"""

import sys
from fractions import Fraction
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from core.errors import DimensionMismatch, UsageError
from core.field_poly import parse_polynomial, total_degree
from core.structure import (
    bias_rank_scan,
    bias_scan_to_json,
    compress,
    compression_to_json,
    decomposition_from_json,
    decomposition_to_json,
    Decomposition,
    EXACT,
    factor_subspaces,
    INFINITE_RANK,
    invariance_subspace,
    is_regular_set,
    largest_scan_m,
    LOWER_BOUND,
    parse_error_map,
    parse_threshold_map,
    rank,
    rank_to_json,
    RankResult,
    REGULAR,
    regularize,
    SEARCH_EXHAUSTED,
    threshold_table,
    UNCONFIRMED,
    verify_decomposition,
    VIOLATION,
)
from utils.budget import Budget


def poly(text, p, m):
    return parse_polynomial(text, p, m)


def test_rank_examples():
    result = rank(poly("x1*x2", 2, 2), 1)
    assert (result.status, result.value) == (EXACT, 2)
    result = rank(poly("x1*x2 + x3*x4", 2, 4), 1)
    assert (result.status, result.value) == (EXACT, 4)
    assert verify_decomposition(poly("x1*x2 + x3*x4", 2, 4), result.witness)
    f = poly("x1*x2*x3", 2, 3)
    result = rank(f, 2)
    assert (result.status, result.value) == (EXACT, 2)
    assert all(total_degree(g) <= 2 for g in result.witness.factors)
    assert verify_decomposition(f, result.witness)


def test_rank_conventions():
    # constantes: rango 0; d = 0 sobre un no constante: infinito
    assert rank(poly("1", 3, 2), 1).value == 0
    assert rank(poly("x1", 2, 2), 0).value == INFINITE_RANK
    # grado <= d: el propio f con el combinador identidad
    result = rank(poly("x1*x2", 2, 3), 2)
    assert result.value == 1 and verify_decomposition(poly("x1*x2", 2, 3), result.witness)
    assert rank_to_json(rank(poly("x1", 2, 1), 0)) == {"status": "exact", "value": "inf"}


def test_rank_ignores_dummy_variables():
    result = rank(poly("x1*x2", 2, 6), 1)
    assert result.value == 2
    assert [str(g) for g in result.witness.factors] == ["x1", "x2"]


def test_rank_ternary_quadratic():
    # x1^2 - x2^2 = (x1 - x2)(x1 + x2): dos formas lineales independientes
    f = poly("x1^2 - x2^2", 3, 3)
    result = rank(f, 1)
    assert result.value == 2 and verify_decomposition(f, result.witness)


def test_rank_max_factors():
    f = poly("x1*x2 + x3*x4", 2, 4)
    result = rank(f, 1, max_factors=2)
    assert (result.status, result.value) == (LOWER_BOUND, 3)
    assert result.exceeds(2) is True
    assert result.exceeds(3) is None
    assert rank(f, 1, max_factors=4).exceeds(3) is True


def test_rank_search_exhausted():
    f = poly("x1*x2*x3", 2, 3)
    result = rank(f, 2, Budget(max_candidates=5))
    assert result.status == SEARCH_EXHAUSTED
    assert result.value == 3 and result.lower == 1
    assert verify_decomposition(f, result.witness)
    assert result.exceeds(3) is False
    assert result.exceeds(1) is None
    data = rank_to_json(result)
    assert data["lower_bound"] == 1 and data["value"] == 3


def test_linear_fast_path_matches_search():
    for text in ("x1*x2", "x1*x2 + x3", "x1*x2 + x2*x3", "x1*x2 + x3*x4", "x1*x3 + x2*x4 + x1"):
        f = poly(text, 2, 4)
        fast, searched = rank(f, 1), rank(f, 1, method="search")
        assert fast.value == searched.value, text
        assert verify_decomposition(f, searched.witness)


def test_invariance_subspace():
    assert invariance_subspace(poly("x1*x2", 2, 3)) == [[0, 0, 1]]
    assert invariance_subspace(poly("x1 + x2", 2, 2)) == [[1, 1]]
    assert invariance_subspace(poly("x1*x2 + x3*x4", 2, 4)) == []


def test_factor_subspaces_count():
    # número de subespacios de dimensión c de F_p^D (coeficiente gaussiano)
    assert sum(1 for _ in factor_subspaces(4, 2, 2)) == 35
    assert sum(1 for _ in factor_subspaces(3, 1, 3)) == 13
    assert sum(1 for _ in factor_subspaces(3, 3, 5)) == 1


def test_regularity_examples():
    certificate = is_regular_set([poly("x1", 2, 2), poly("x1 + x2", 2, 2)], 10)
    assert certificate.verdict == REGULAR and len(certificate.records) == 3

    certificate = is_regular_set([poly("x1*x2", 2, 3), poly("x3", 2, 3)], 1)
    assert certificate.verdict == REGULAR
    assert [record.ok for record in certificate.records] == [True, True, True]

    certificate = is_regular_set([poly("x1*x2", 2, 2), poly("x1*x2 + 1", 2, 2)], 0)
    assert certificate.verdict == VIOLATION
    assert certificate.violation.coefficients == (1, 1)
    assert certificate.violation.status == "constant"


def test_regularity_rejects_bad_input():
    try:
        is_regular_set([poly("x1", 2, 2), poly("x1", 2, 3)], 1)
    except DimensionMismatch:
        pass
    else:
        raise AssertionError("m distinto aceptado")
    try:
        is_regular_set([poly("x1", 2, 2)], -1)
    except UsageError:
        pass
    else:
        raise AssertionError("umbral negativo aceptado")


def test_regularity_unconfirmed_on_exhausted_search():
    certificate = is_regular_set([poly("x1*x2*x3", 2, 3)], 1, Budget(max_candidates=5))
    assert certificate.verdict == UNCONFIRMED


def test_regularize_examples():
    result = regularize(poly("x1", 2, 3), lambda c: 7)
    assert result.decomposition.c == 1 and result.complete
    assert result.decomposition.combiner == (0, 1)

    f = poly("x1*x2", 2, 2)
    result = regularize(f, lambda c: 1)
    assert result.decomposition.factors == (f,) and result.iterations == 0

    f = poly("x1*x2 + x3*x4", 2, 4)
    result = regularize(f, parse_threshold_map("c+3"))
    decomposition = result.decomposition
    assert decomposition.c == 4 and result.complete
    assert sorted(str(g) for g in decomposition.factors) == ["x1", "x2", "x3", "x4"]
    assert verify_decomposition(f, decomposition)
    assert result.certificate.verdict == REGULAR


def test_regularize_cubic():
    f = poly("x1*x2*x3 + x1", 2, 3)
    result = regularize(f, lambda c: 3)
    assert result.iterations >= 1 and result.complete
    assert verify_decomposition(f, result.decomposition)
    assert all(total_degree(g) <= 2 for g in result.decomposition.factors)


def test_regularize_ternary():
    f = poly("x1^2 + x2^2 + x1*x3", 3, 3)
    result = regularize(f, parse_threshold_map("c"))
    assert verify_decomposition(f, result.decomposition)
    assert result.complete


def test_decomposition_json():
    f = poly("x1*x2 + x3*x4", 2, 4)
    witness = rank(f, 1).witness
    restored = decomposition_from_json(decomposition_to_json(witness))
    assert restored == witness
    try:
        Decomposition(2, 2, (poly("x1", 2, 2),), (0, 1, 1), 1)
    except DimensionMismatch:
        pass
    else:
        raise AssertionError("combinador de tamaño incorrecto aceptado")


def test_map_parsers():
    assert parse_threshold_map("5")(3) == 5
    assert parse_threshold_map("c")(4) == 4
    assert parse_threshold_map("c+3")(1) == 4
    assert parse_threshold_map("2*c+1")(3) == 7
    assert parse_threshold_map("3*c")(2) == 6
    assert parse_error_map("1/2^c")(3) == Fraction(1, 8)
    assert parse_error_map("1/100")(9) == Fraction(1, 100)
    for bad in ("c-1", "x", ""):
        try:
            parse_threshold_map(bad)
        except UsageError:
            continue
        raise AssertionError(f"{bad!r} aceptado")
    for bad in ("3/2", "0/2^c", "0.1"):
        try:
            parse_error_map(bad)
        except UsageError:
            continue
        raise AssertionError(f"{bad!r} aceptado")


def test_bias_scan_examples():
    scan = bias_rank_scan(2, 2, 2)
    row = next(row for row in scan.rows if str(row.polynomial) == "x1*x2")
    assert row.distance == Fraction(1, 4) and row.rank.value == 2 and row.count == 4
    assert sum(row.count for row in scan.rows) == 2 ** 4 - 2 ** 3

    linear = bias_rank_scan(2, 1, 2)
    assert linear.rows and all(row.distance == 0 and row.rank.value == INFINITE_RANK for row in linear.rows)
    assert bias_scan_to_json(linear)["rows"][0]["rank"] == "inf"


def test_bias_scan_c2_is_monotone():
    steps = sorted(bias_rank_scan(2, 2, 3).c2_steps())
    for (eps_a, c2_a), (eps_b, c2_b) in zip(steps, steps[1:]):
        assert eps_a < eps_b and c2_a >= c2_b


def test_threshold_table():
    assert largest_scan_m(2, 2, 2 ** 16) == 5
    table = threshold_table(2, 2, parse_error_map("1/2^c"), scan_max_polys=2 ** 11)
    # con m <= 4 sólo x1*x2 (y su complemento) está a distancia >= 1/4
    assert table(1) == 2 + 1
    assert table(2) >= table(1)


def test_compress_drops_dummy_variables():
    f = poly("x1*x2", 2, 10)
    result = compress(f, parse_error_map("1/2^c"), scan_max_polys=2 ** 11)
    assert result.success and result.c == 2
    assert result.function_table == (0, 0, 0, 1)
    assert result.achieved_error == 0 and result.distribution_distance == 0
    assert compression_to_json(result)["threshold_source"] == "measured bias/rank table"


def test_compress_identity():
    f = poly("x1*x2 + x3*x4", 2, 4)
    result = compress(f, parse_error_map("1/100"), scan_max_polys=2 ** 11)
    assert result.success and result.c == 4 and result.achieved_error == 0
    assert result.rel_f == result.rel_g == Fraction(3, 8)


def test_compress_rejects_constants():
    try:
        compress(poly("1", 2, 3), parse_error_map("1/2^c"))
    except UsageError:
        return
    raise AssertionError("compress de una constante aceptado")


def test_rank_result_exceeds_exact():
    assert RankResult(EXACT, 3).exceeds(2) is True
    assert RankResult(EXACT, 3).exceeds(3) is False
    assert RankResult(EXACT, INFINITE_RANK).exceeds(100) is True


def main():
    """Ejecuta todas las pruebas"""
    print("=" * 60)
    print("🧪 GRM - PRUEBAS DE RANGO Y REGULARIDAD")
    print("=" * 60)

    tests = [(name, fn) for name, fn in globals().items() if name.startswith("test_") and callable(fn)]
    failures = 0
    for name, fn in tests:
        try:
            fn()
            print(f"✅ {name}")
        except Exception as e:
            failures += 1
            print(f"❌ {name}: {e}")

    print("=" * 60)
    print(f"📊 {len(tests) - failures}/{len(tests)} pruebas pasaron")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
