"""
test_field_poly.py
Pruebas del álgebra base: parser, evaluación, tabulación, sustitución
afín, base de monomios, álgebra lineal mod p y órbitas.

Ejecutar con: python scripts/test_field_poly.py  (o pytest scripts/)
"""

import itertools
import random
import sys
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import numpy as np

from core.errors import DimensionMismatch, FieldError, ParseError, SingularMapError
from core.field_poly import (
    AffineMap,
    apply_affine,
    coefficient_vector,
    evaluate,
    format_polynomial,
    from_coefficient_index,
    from_coefficient_vector,
    index_point,
    monomial_basis,
    parse_polynomial,
    point_index,
    Polynomial,
    polynomial_from_json,
    polynomial_to_json,
    random_affine_map,
    random_polynomial,
    tabulate,
    total_degree,
    ZERO,
)
from core.linalg import inverse_mod, nullspace, rank_mod, rref
from core.orbits import (
    affine_generators,
    orbit_labels,
    representatives,
    scaling_map,
    substitution_matrix,
    top_degree_positions,
)


def test_parse_examples():
    f = parse_polynomial("x1*x2 + 1", 2, 2)
    assert f.as_dict() == {(1, 1): 1, (0, 0): 1}
    assert parse_polynomial("x1^3", 3, 1).as_dict() == {(1,): 1}
    assert parse_polynomial("2*x1 + 4*x1", 3, 1).is_zero()


def test_parse_errors():
    for text, m in [("x0", 2), ("x3", 2), ("x1 +", 2), ("x1 ** 2", 2), ("(x1", 1), ("x1 & x2", 2)]:
        try:
            parse_polynomial(text, 2, m)
        except ParseError:
            continue
        raise AssertionError(f"{text!r} debió fallar")
    for p in (4, 11, 1):
        try:
            parse_polynomial("x1", p, 1)
        except FieldError as e:
            assert e.to_dict()["type"] == "unsupported_prime"
            continue
        raise AssertionError(f"p={p} debió rechazarse")


def test_parse_unary_minus_and_parentheses():
    f = parse_polynomial("-(x1 - x2)^2", 3, 2)
    g = parse_polynomial("2*x1^2 + 2*x1*x2 + 2*x2^2", 3, 2)
    assert f == g


def test_print_round_trip():
    rng = random.Random(7)
    for p in (2, 3, 5, 7):
        for _ in range(25):
            f = random_polynomial(p, 3, 4, rng)
            assert parse_polynomial(format_polynomial(f), p, 3) == f
    assert format_polynomial(Polynomial.zero(2, 3)) == "0"
    assert format_polynomial(parse_polynomial("1 + x3*x4 + x1*x2", 2, 4)) == "x1*x2 + x3*x4 + 1"


def test_json_round_trip():
    f = parse_polynomial("x1^2 - x2^2 + 2", 3, 3)
    data = polynomial_to_json(f)
    assert data["terms"][0] == {"coeff": 2, "exps": [0, 0, 0]}
    assert polynomial_from_json(data) == f


def test_evaluate_examples():
    assert evaluate(parse_polynomial("x1*x2+1", 2, 2), (1, 1)) == 0
    assert evaluate(parse_polynomial("2*x1^2", 3, 1), (2,)) == 2
    assert evaluate(Polynomial.zero(5, 2), (3, 4)) == 0
    try:
        evaluate(parse_polynomial("x1", 2, 2), (1,))
    except DimensionMismatch:
        pass
    else:
        raise AssertionError("punto de dimensión incorrecta aceptado")


def test_reduction_is_functional():
    """Un polinomio sin reducir evaluado a mano coincide con su forma reducida."""
    rng = random.Random(11)
    for p in (2, 3, 5):
        for _ in range(10):
            raw = {tuple(rng.randrange(2 * p) for _ in range(2)): rng.randrange(1, p) for _ in range(4)}
            f = Polynomial.from_terms(p, 2, raw)
            for x in itertools.product(range(p), repeat=2):
                expected = sum(c * pow(x[0], e[0], p) * pow(x[1], e[1], p) for e, c in raw.items()) % p
                assert evaluate(f, x) == expected


def test_tabulate_examples():
    assert tabulate(parse_polynomial("x1", 2, 1)).values.tolist() == [0, 1]
    assert tabulate(parse_polynomial("x1*x2", 2, 2)).values.tolist() == [0, 0, 0, 1]
    assert tabulate(parse_polynomial("x1", 3, 1)).values.tolist() == [0, 1, 2]


def test_tabulate_matches_pointwise():
    rng = random.Random(3)
    for p in (2, 3, 5):
        for m in range(0, 4):
            f = random_polynomial(p, m, 3, rng)
            table = tabulate(f)
            for index in range(p ** m):
                assert table.values[index] == evaluate(f, index_point(index, p, m))
            assert table.nonzero_count() == int(np.count_nonzero(table.values))


def test_point_index_convention():
    assert point_index((1, 0), 3) == 1
    assert point_index((0, 1), 3) == 3
    assert index_point(5, 2, 3) == (1, 0, 1)


def test_total_degree():
    assert total_degree(parse_polynomial("x1*x2 + x3", 2, 3)) == 2
    assert total_degree(parse_polynomial("x1^3", 3, 1)) == 1
    zero = total_degree(Polynomial.zero(2, 2))
    assert zero is ZERO
    assert zero <= 0 and zero <= 5


def test_apply_affine_examples():
    assert apply_affine(parse_polynomial("x1", 2, 2), AffineMap.swap(2, 2, 1, 2)) == parse_polynomial("x2", 2, 2)
    shifted = apply_affine(parse_polynomial("x1*x2", 2, 2), AffineMap.identity(2, 2, [1, 0]))
    assert shifted == parse_polynomial("x1*x2 + x2", 2, 2)
    scaled = apply_affine(parse_polynomial("x1^2", 3, 1), AffineMap.build(3, [[2]]))
    assert scaled == parse_polynomial("x1^2", 3, 1)


def test_apply_affine_preserves_weight_and_degree():
    rng = random.Random(5)
    for p in (2, 3, 5):
        for _ in range(10):
            f = random_polynomial(p, 3, 3, rng)
            A = random_affine_map(p, 3, rng)
            g = apply_affine(f, A)
            assert sorted(tabulate(g).values.tolist()) == sorted(tabulate(f).values.tolist())
            if not f.is_zero():
                assert total_degree(g) <= total_degree(f)


def test_singular_map_rejected():
    try:
        AffineMap.build(2, [[1, 1], [1, 1]])
    except SingularMapError:
        return
    raise AssertionError("mapa singular aceptado")


def test_monomial_basis_order_and_size():
    assert monomial_basis(2, 2, 2) == ((0, 0), (1, 0), (0, 1), (1, 1))
    assert len(monomial_basis(2, 2, 4)) == 11
    assert len(monomial_basis(3, 2, 3)) == 10
    assert len(monomial_basis(2, 3, 5)) == 26
    assert len(monomial_basis(2, 2, 6)) == 22


def test_coefficient_vector_bijection():
    p, r, m = 3, 2, 2
    seen = set()
    for index in range(p ** len(monomial_basis(p, r, m))):
        f = from_coefficient_index(p, r, m, index)
        vector = coefficient_vector(f, r)
        assert from_coefficient_vector(p, r, m, vector) == f
        seen.add(tuple(vector))
    assert len(seen) == 3 ** 6


def test_linalg_basics():
    reduced, pivots = rref([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 2)
    assert pivots == [0, 1]
    assert rank_mod([[1, 2], [2, 4]], 5) == 1
    kernel = nullspace([[1, 1, 0]], 3, 2)
    assert len(kernel) == 2 and all(sum(v[:2]) % 2 == 0 for v in kernel)
    assert all(a * inverse_mod(a, 7) % 7 == 1 for a in range(1, 7))


def test_substitution_matrix_acts_on_coefficients():
    rng = random.Random(13)
    p, r, m = 3, 2, 2
    for A in affine_generators(p, m) + [random_affine_map(p, m, rng)]:
        M = substitution_matrix(p, r, m, A)
        f = random_polynomial(p, m, r, rng)
        image = (M @ np.array(coefficient_vector(f, r))) % p
        assert image.tolist() == coefficient_vector(apply_affine(f, A), r)


def test_orbits_of_affine_functions():
    """Bajo AGL(2,2) las funciones afines forman 3 clases: 0, 1 y no constantes."""
    p, r, m = 2, 1, 2
    generators = [substitution_matrix(p, r, m, A) for A in affine_generators(p, m)]
    labels = orbit_labels(p, 3, generators)
    assert representatives(labels).tolist() == [0, 1, 2]
    assert np.bincount(labels).tolist()[:3] == [1, 1, 6]


def test_scalar_orbits_and_top_positions():
    assert top_degree_positions(3, 2, 2) == [3, 4, 5]
    generators = [substitution_matrix(3, 1, 1, scaling_map(3, 1))]
    labels = orbit_labels(3, 2, generators, scalar_orbits=True)
    # c + a*x1: {x1, 2x1} juntos; escalar identifica también las constantes 1 y 2
    assert labels[3] == labels[6] == 3 and labels[1] == labels[2] == 1


def main():
    """Ejecuta todas las pruebas"""
    print("=" * 60)
    print("🧪 GRM - PRUEBAS DE field_poly / linalg / orbits")
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
