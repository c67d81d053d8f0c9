"""
structure.py
Rango, regularidad y compresión de polinomios a escala de escritorio.

Características:
- rank(f, d): mínimo c tal que f = F(g_1..g_c) con grado(g_i) <= d.
  Para d = 1 se calcula exacto como la codimensión del subespacio de
  periodos de f; para d >= 2 se buscan subespacios de factores en RREF,
  acotados por el rango lineal.
- Certificados de T-regularidad sobre todas las combinaciones no nulas
- Regularización iterativa con recomposición explícita del combinador
- Escaneo sesgo/rango y tabla empírica de umbrales para compress

Convenciones:
- rank(f, 0) de un f no constante es infinito (INFINITE_RANK)
- Una combinación cero o constante es una violación de regularidad
- El combinador vale 0 fuera de la imagen de (g_1..g_c)

Uso:
    result = rank(parse_polynomial("x1*x2+x3*x4", 2, 4), 1)
    result.status, result.value   # ("exact", 4)
"""

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.distributions import distribution_of, function_distribution, statistical_distance, uniform
from core.errors import BudgetExceeded, DimensionMismatch, UsageError
from core.field_poly import (
    coordinate_digits,
    from_coefficient_index,
    from_coefficient_vector,
    monomial_basis,
    monomial_table,
    Polynomial,
    polynomial_from_json,
    polynomial_to_json,
    tabulate,
    total_degree,
)
from core.linalg import inverse_mod, nullspace, rref
from core.orbits import affine_generators, orbit_labels, representatives, substitution_matrix
from utils.budget import Budget
from utils.rationals import format_fraction, parse_fraction

logger = logging.getLogger(__name__)

INFINITE_RANK = math.inf
EXACT = "exact"
LOWER_BOUND = "lower_bound"
SEARCH_EXHAUSTED = "search_exhausted"

REGULAR = "regular"
VIOLATION = "violation"
UNCONFIRMED = "unconfirmed"

RankValue = Union[int, float]


def format_rank(value: Optional[RankValue]):
    """Enteros tal cual; el rango infinito como "inf"."""
    if value is None:
        return None
    return "inf" if value == INFINITE_RANK else int(value)


# ========== DESCOMPOSICIONES ==========

@dataclass(frozen=True)
class Decomposition:
    """
    f = F(g_1(x), ..., g_c(x)) con el combinador F tabulado en orden de índice
    (la primera entrada es el dígito menos significativo).
    """

    p: int
    m: int
    factors: Tuple[Polynomial, ...]
    combiner: Tuple[int, ...]
    factor_degree_bound: int

    def __post_init__(self):
        if len(self.combiner) != self.p ** len(self.factors):
            raise DimensionMismatch(
                f"el combinador tiene {len(self.combiner)} entradas para {len(self.factors)} factores"
            )

    @property
    def c(self) -> int:
        return len(self.factors)

    def combiner_array(self) -> np.ndarray:
        return np.array(self.combiner, dtype=np.int64)


def _factor_tables(factors: Sequence[Polynomial], p: int, m: int, budget: Optional[Budget] = None) -> np.ndarray:
    if not factors:
        return np.zeros((0, p ** m), dtype=np.int64)
    return np.array([tabulate(g, budget).values for g in factors], dtype=np.int64)


def _keys(tables: np.ndarray, p: int) -> np.ndarray:
    """Índice de (g_1(x)..g_c(x)) en F_p^c para cada punto x."""
    powers = p ** np.arange(tables.shape[0], dtype=np.int64)
    return powers @ tables if tables.shape[0] else np.zeros(tables.shape[1], dtype=np.int64)


def _fit_combiner(keys: np.ndarray, values: np.ndarray, size: int) -> Optional[np.ndarray]:
    """Combinador con F[key(x)] = f(x), o None si f no factoriza por las claves."""
    combiner = np.zeros(size, dtype=np.int64)
    combiner[keys] = values
    if not np.array_equal(combiner[keys], values):
        return None
    image = np.zeros(size, dtype=bool)
    image[keys] = True
    combiner[~image] = 0
    return combiner


def decomposition_values(decomposition: Decomposition, budget: Optional[Budget] = None) -> np.ndarray:
    """Tabla de F(g_1(x)..g_c(x)) sobre los p^m puntos."""
    p, m = decomposition.p, decomposition.m
    tables = _factor_tables(decomposition.factors, p, m, budget)
    return decomposition.combiner_array()[_keys(tables, p)]


def verify_decomposition(f: Polynomial, decomposition: Decomposition, budget: Optional[Budget] = None) -> bool:
    """Identidad puntual y cota de grado de cada factor."""
    if (f.p, f.m) != (decomposition.p, decomposition.m):
        return False
    for g in decomposition.factors:
        if not g.is_zero() and total_degree(g) > decomposition.factor_degree_bound:
            return False
    return bool(np.array_equal(decomposition_values(decomposition, budget), tabulate(f, budget).values))


def decomposition_to_json(decomposition: Decomposition) -> Dict:
    return {
        "p": decomposition.p,
        "m": decomposition.m,
        "factors": [polynomial_to_json(g) for g in decomposition.factors],
        "combiner": list(decomposition.combiner),
        "factor_degree_bound": decomposition.factor_degree_bound,
    }


def decomposition_from_json(data: Dict) -> Decomposition:
    return Decomposition(
        int(data["p"]),
        int(data["m"]),
        tuple(polynomial_from_json(g) for g in data["factors"]),
        tuple(int(v) for v in data["combiner"]),
        int(data["factor_degree_bound"]),
    )


# ========== RANGO ==========

@dataclass(frozen=True)
class RankResult:
    """
    status:
      exact            value es el rango; witness lo realiza
      lower_bound      la búsqueda se detuvo en max_factors: rango >= value
      search_exhausted presupuesto agotado: lower <= rango <= value (witness realiza value)
    """

    status: str
    value: RankValue
    witness: Optional[Decomposition] = None
    lower: Optional[RankValue] = None

    def exceeds(self, threshold: int) -> Optional[bool]:
        """¿rango > threshold? None si la búsqueda no lo decide."""
        if self.status == EXACT:
            return self.value > threshold
        if self.status == LOWER_BOUND:
            return True if self.value > threshold else None
        # search_exhausted: value es una cota superior con testigo
        if self.value <= threshold:
            return False
        if self.lower is not None and self.lower > threshold:
            return True
        return None


def rank_to_json(result: RankResult) -> Dict:
    data = {"status": result.status, "value": format_rank(result.value)}
    if result.lower is not None:
        data["lower_bound"] = format_rank(result.lower)
    if result.witness is not None:
        data["witness"] = decomposition_to_json(result.witness)
    return data


def period_vectors(f: Polynomial, budget: Optional[Budget] = None) -> List[Tuple[int, ...]]:
    """Todos los v con f(x + v) = f(x) para todo x."""
    budget = budget or Budget()
    p, m = f.p, f.m
    size = p ** m
    budget.check_points(size)
    if size * size > budget.max_ops:
        raise BudgetExceeded(f"buscar periodos cuesta {size * size} operaciones", estimated_cost=size * size)
    values = tabulate(f, budget).values
    digits = coordinate_digits(p, m).astype(np.int64)
    powers = p ** np.arange(m, dtype=np.int64)
    periods = []
    for v in range(size):
        shift = np.array([(v // p ** i) % p for i in range(m)], dtype=np.int64)
        shifted = powers @ ((digits + shift[:, None]) % p) if m else np.zeros(1, dtype=np.int64)
        if np.array_equal(values[shifted], values):
            periods.append(tuple(int(s) for s in shift))
    return periods


def invariance_subspace(f: Polynomial, budget: Optional[Budget] = None) -> List[List[int]]:
    """Base en RREF del subespacio de periodos de f."""
    periods = [v for v in period_vectors(f, budget) if any(v)]
    return rref(periods, f.p)[0] if periods else []


def _linear_witness(f: Polynomial, budget: Optional[Budget] = None) -> Decomposition:
    """
    f = F(l_1..l_c) con l_i la base RREF del anulador del subespacio de
    periodos; c = m - dim(periodos) es rank(f, 1).
    """
    p, m = f.p, f.m
    forms = nullspace(invariance_subspace(f, budget), m, p)
    factors = tuple(Polynomial.from_terms(p, m, {tuple(int(i == j) for i in range(m)): w for j, w in enumerate(row)}) for row in forms)
    tables = _factor_tables(factors, p, m, budget)
    combiner = _fit_combiner(_keys(tables, p), tabulate(f, budget).values.astype(np.int64), p ** len(factors))
    return Decomposition(p, m, factors, tuple(int(v) for v in combiner), 1)


def factor_subspaces(D: int, c: int, p: int) -> Iterator[np.ndarray]:
    """Matrices c x D en RREF (una por subespacio de dimensión c), en orden canónico."""
    for pivots in combinations(range(D), c):
        free = [(i, j) for i, pc in enumerate(pivots) for j in range(pc + 1, D) if j not in pivots]
        for values in product(range(p), repeat=len(free)):
            matrix = np.zeros((c, D), dtype=np.int64)
            for i, pc in enumerate(pivots):
                matrix[i, pc] = 1
            for (i, j), value in zip(free, values):
                matrix[i, j] = value
            yield matrix


def _cap(value: RankValue, witness: Optional[Decomposition], max_factors: Optional[int]) -> RankResult:
    if max_factors is not None and value > max_factors:
        return RankResult(LOWER_BOUND, max_factors + 1)
    return RankResult(EXACT, value, witness)


def rank(
    f: Polynomial,
    factor_degree: int,
    budget: Optional[Budget] = None,
    max_factors: Optional[int] = None,
    method: str = "auto",
) -> RankResult:
    """
    Mínimo número de polinomios de grado <= factor_degree que computan f.

    Args:
        f (Polynomial): Polinomio
        factor_degree (int): Cota d de grado de los factores
        max_factors (int): Si se da, no busca más allá de T factores
        method (str): "auto" (camino rápido lineal cuando d = 1) o "search"

    Returns:
        RankResult
    """
    budget = budget or Budget()
    p, m = f.p, f.m
    if f.is_constant():
        return RankResult(EXACT, 0, Decomposition(p, m, (), (f.constant_term(),), max(factor_degree, 0)))
    if factor_degree <= 0:
        return RankResult(EXACT, INFINITE_RANK)
    degree = total_degree(f)
    if degree <= factor_degree:
        return _cap(1, Decomposition(p, m, (f,), tuple(range(p)), factor_degree), max_factors)

    if method == "search":
        coordinates = tuple(Polynomial.variable(p, m, i) for i in range(1, m + 1))
        tables = _factor_tables(coordinates, p, m, budget)
        combiner = _fit_combiner(_keys(tables, p), tabulate(f, budget).values.astype(np.int64), p ** m)
        upper, upper_witness = m, Decomposition(p, m, coordinates, tuple(int(v) for v in combiner), 1)
    else:
        upper_witness = _linear_witness(f, budget)
        upper = upper_witness.c
        if factor_degree == 1:
            return _cap(upper, upper_witness, max_factors)
    upper_witness = Decomposition(p, m, upper_witness.factors, upper_witness.combiner, factor_degree)

    basis = monomial_basis(p, factor_degree, m)[1:]
    monomial_tables = np.array([monomial_table(p, m, exps) for exps in basis], dtype=np.int64)
    values = tabulate(f, budget).values.astype(np.int64)
    stop = upper - 1 if max_factors is None else min(upper - 1, max_factors)

    candidates = 0
    for c in range(1, stop + 1):
        for subspace in factor_subspaces(len(basis), c, p):
            candidates += 1
            if candidates > budget.max_candidates:
                logger.warning(f"⚠️  Búsqueda de rango agotada en c={c} tras {candidates - 1} candidatos")
                return RankResult(SEARCH_EXHAUSTED, upper, upper_witness, lower=c)
            tables = (subspace @ monomial_tables) % p
            combiner = _fit_combiner(_keys(tables, p), values, p ** c)
            if combiner is not None:
                factors = tuple(from_coefficient_vector(p, factor_degree, m, [0] + row.tolist()) for row in subspace)
                logger.debug(f"🔍 rango {c} tras {candidates} candidatos")
                return RankResult(EXACT, c, Decomposition(p, m, factors, tuple(int(v) for v in combiner), factor_degree))
    return _cap(upper, upper_witness, max_factors)


# ========== REGULARIDAD ==========

@dataclass(frozen=True)
class CombinationRecord:
    coefficients: Tuple[int, ...]
    degree: Optional[int]
    status: str
    rank: Optional[RankValue]
    ok: Optional[bool]
    constant: Optional[int] = None
    witness: Optional[Decomposition] = field(default=None, compare=False)


@dataclass(frozen=True)
class RegularityCertificate:
    threshold: int
    records: Tuple[CombinationRecord, ...]
    verdict: str

    @property
    def violation(self) -> Optional[CombinationRecord]:
        return next((record for record in self.records if record.ok is False), None)


def certificate_to_json(certificate: RegularityCertificate) -> Dict:
    violation = certificate.violation
    return {
        "threshold": certificate.threshold,
        "verdict": certificate.verdict,
        "combinations": [
            {
                "a": list(record.coefficients),
                "degree": record.degree,
                "status": record.status,
                "rank": format_rank(record.rank),
                "ok": record.ok,
            }
            for record in certificate.records
        ],
        "witness": list(violation.coefficients) if violation else None,
    }


def linear_combination(gs: Sequence[Polynomial], coefficients: Sequence[int]) -> Polynomial:
    p, m = gs[0].p, gs[0].m
    result = Polynomial.zero(p, m)
    for g, a in zip(gs, coefficients):
        if a:
            result = result + g.scale(a)
    return result


def _check_combination(combination: Polynomial, coefficients: Tuple[int, ...], threshold: int, budget: Budget) -> CombinationRecord:
    if combination.is_zero():
        return CombinationRecord(coefficients, None, "zero", None, False, constant=0)
    if combination.is_constant():
        return CombinationRecord(coefficients, 0, "constant", None, False, constant=combination.constant_term())
    degree = total_degree(combination)
    if degree == 1:
        return CombinationRecord(coefficients, 1, EXACT, INFINITE_RANK, True)
    result = rank(combination, degree - 1, budget, max_factors=threshold)
    return CombinationRecord(coefficients, degree, result.status, result.value, result.exceeds(threshold), witness=result.witness)


def is_regular_set(
    gs: Sequence[Polynomial],
    threshold: int,
    budget: Optional[Budget] = None,
    stop_at_first: bool = False,
) -> RegularityCertificate:
    """
    Recorre todos los a != 0 de F_p^c en orden de índice y certifica que
    sum a_i g_i es no constante y de rango > threshold a su propio grado - 1.
    """
    budget = budget or Budget()
    if threshold < 0:
        raise UsageError(f"el umbral debe ser >= 0 (recibido {threshold})")
    if not gs:
        return RegularityCertificate(threshold, (), REGULAR)
    p, m = gs[0].p, gs[0].m
    if any((g.p, g.m) != (p, m) for g in gs):
        raise DimensionMismatch("todos los polinomios deben compartir p y m")

    c = len(gs)
    records: List[CombinationRecord] = []
    for index in range(1, p ** c):
        coefficients = tuple((index // p ** i) % p for i in range(c))
        record = _check_combination(linear_combination(gs, coefficients), coefficients, threshold, budget)
        records.append(record)
        if stop_at_first and record.ok is not True:
            break

    if any(record.ok is False for record in records):
        verdict = VIOLATION
    elif any(record.ok is None for record in records):
        verdict = UNCONFIRMED
    else:
        verdict = REGULAR
    return RegularityCertificate(threshold, tuple(records), verdict)


# ========== REGULARIZACIÓN ==========

ThresholdMap = Callable[[int], int]
ErrorMap = Callable[[int], Fraction]


@dataclass(frozen=True)
class RegularizationResult:
    decomposition: Decomposition
    certificate: RegularityCertificate
    iterations: int
    complete: bool


def _substitute(combiner: np.ndarray, p: int, c: int, coefficients: Sequence[int], i: int, inner: np.ndarray, t: int) -> np.ndarray:
    """
    Combinador sobre (y sin y_i, z) con
    y_i = a_i^{-1} (H(z) - sum_{j != i} a_j y_j).
    """
    new_c = c - 1 + t
    size = p ** new_c
    indices = np.arange(size, dtype=np.int64)
    digits = np.array([(indices // p ** k) % p for k in range(new_c)], dtype=np.int64).reshape(new_c, size)
    rest, z = digits[: c - 1], digits[c - 1:]
    inner_values = inner[_keys(z, p)] if t else np.full(size, int(inner[0]), dtype=np.int64)
    others = [j for j in range(c) if j != i]
    partial = np.zeros(size, dtype=np.int64)
    for row, j in enumerate(others):
        partial += coefficients[j] * rest[row]
    y_i = (inverse_mod(coefficients[i], p) * (inner_values - partial)) % p
    full = np.zeros((c, size), dtype=np.int64)
    for row, j in enumerate(others):
        full[j] = rest[row]
    full[i] = y_i
    return combiner[_keys(full, p)]


def _pick_factor(gs: Sequence[Polynomial], coefficients: Sequence[int]) -> int:
    """Índice con a_i != 0 y grado máximo (el menor en caso de empate)."""
    candidates = [i for i, a in enumerate(coefficients) if a]
    return max(candidates, key=lambda i: (total_degree(gs[i]) if not gs[i].is_zero() else -1, -i))


def _canonical(combiner: np.ndarray, factors: Sequence[Polynomial], p: int, m: int, budget: Budget) -> np.ndarray:
    keys = _keys(_factor_tables(factors, p, m, budget), p)
    image = np.zeros(len(combiner), dtype=bool)
    image[keys] = True
    result = combiner.copy()
    result[~image] = 0
    return result


def regularize(f: Polynomial, threshold_map: ThresholdMap, budget: Optional[Budget] = None) -> RegularizationResult:
    """
    Refina {f} hasta un conjunto T(c)-regular manteniendo f = F(g_1..g_c).

    Cada violación reemplaza un factor de grado máximo entre los que
    participan: por nada si la combinación es constante, o por los factores
    del testigo de rango bajo (de grado menor). El multiconjunto de grados
    decrece estrictamente, así que el proceso termina.
    """
    budget = budget or Budget()
    p, m = f.p, f.m
    degree_bound = 0 if f.is_zero() else total_degree(f)
    if f.is_constant():
        decomposition = Decomposition(p, m, (), (f.constant_term(),), degree_bound)
        return RegularizationResult(decomposition, RegularityCertificate(threshold_map(0), (), REGULAR), 0, True)

    factors: List[Polynomial] = [f]
    combiner = np.arange(p, dtype=np.int64)
    iterations = 0
    complete = False
    while iterations < budget.max_iterations:
        c = len(factors)
        try:
            certificate = is_regular_set(factors, threshold_map(c), budget, stop_at_first=True)
        except BudgetExceeded as e:
            logger.warning(f"⚠️  Regularización detenida: {e.message}")
            break
        if certificate.verdict == REGULAR:
            complete = True
            break
        record = certificate.violation
        if record is None:
            logger.warning("⚠️  Combinación no concluyente: certificado sin confirmar")
            break
        i = _pick_factor(factors, record.coefficients)
        if record.status in ("zero", "constant"):
            inner, new = np.array([record.constant], dtype=np.int64), []
        else:
            inner, new = record.witness.combiner_array(), list(record.witness.factors)
        combiner = _substitute(combiner, p, c, record.coefficients, i, inner, len(new))
        factors = factors[:i] + factors[i + 1:] + new
        iterations += 1
        logger.debug(f"🔧 Iteración {iterations}: {c} -> {len(factors)} factores")

    combiner = _canonical(combiner, factors, p, m, budget)
    decomposition = Decomposition(p, m, tuple(factors), tuple(int(v) for v in combiner), degree_bound)
    try:
        certificate = is_regular_set(factors, threshold_map(len(factors)), budget)
    except BudgetExceeded:
        certificate = RegularityCertificate(threshold_map(len(factors)), (), UNCONFIRMED)
    if not complete and certificate.verdict == REGULAR:
        certificate = RegularityCertificate(certificate.threshold, certificate.records, UNCONFIRMED)
    return RegularizationResult(decomposition, certificate, iterations, complete and certificate.verdict == REGULAR)


_MAP_PATTERNS = (
    (re.compile(r"^\s*(\d+)\s*$"), lambda g: (0, int(g[0]))),
    (re.compile(r"^\s*c\s*$"), lambda g: (1, 0)),
    (re.compile(r"^\s*c\s*\+\s*(\d+)\s*$"), lambda g: (1, int(g[0]))),
    (re.compile(r"^\s*(\d+)\s*\*\s*c\s*(?:\+\s*(\d+))?\s*$"), lambda g: (int(g[0]), int(g[1] or 0))),
)


def parse_threshold_map(text: str) -> ThresholdMap:
    """"T", "c", "c+K" o "K*c+L"."""
    for pattern, build in _MAP_PATTERNS:
        match = pattern.match(text)
        if match:
            slope, offset = build(match.groups())
            return lambda c: slope * c + offset
    raise UsageError(f"mapa de umbrales inválido {text!r}: use T, c, c+K o K*c+L")


def parse_error_map(text: str) -> ErrorMap:
    """"a/b" (constante) o "a/b^c" (a / b^c)."""
    match = re.match(r"^\s*(\d+)\s*/\s*(\d+)\s*\^\s*c\s*$", text)
    if match:
        numerator, base = int(match.group(1)), int(match.group(2))
        if base < 2 or numerator <= 0:
            raise UsageError(f"mapa de error inválido {text!r}")
        return lambda c: Fraction(numerator, base ** c)
    value = parse_fraction(text)
    if not 0 < value < 1:
        raise UsageError(f"el error debe estar en (0,1) (recibido {text!r})")
    return lambda c: value


# ========== SESGO Y RANGO ==========

@dataclass(frozen=True)
class BiasRow:
    """Representante de una clase afín de polinomios de grado exacto r."""

    index: int
    polynomial: Polynomial
    distance: Fraction
    rank: RankResult
    count: int


@dataclass(frozen=True)
class BiasScan:
    p: int
    r: int
    m: int
    rows: Tuple[BiasRow, ...]

    def observed_c2(self, epsilon: Fraction) -> RankValue:
        """Máximo rango entre las filas con distancia >= epsilon (0 si no hay)."""
        ranks = [row.rank.value for row in self.rows if row.distance >= epsilon]
        return max(ranks) if ranks else 0

    def c2_steps(self) -> List[Tuple[Fraction, RankValue]]:
        """Mapa epsilon -> C_2 observado en cada distancia distinta (no creciente)."""
        distances = sorted({row.distance for row in self.rows}, reverse=True)
        return [(d, self.observed_c2(d)) for d in distances]


def bias_scan_to_json(scan: BiasScan) -> Dict:
    return {
        "p": scan.p,
        "r": scan.r,
        "m": scan.m,
        "rows": [
            {
                "polynomial": str(row.polynomial),
                "index": row.index,
                "count": row.count,
                "distance": format_fraction(row.distance),
                "rank": format_rank(row.rank.value),
                "rank_status": row.rank.status,
            }
            for row in scan.rows
        ],
        "c2": [{"epsilon": format_fraction(eps), "max_rank": format_rank(value)} for eps, value in scan.c2_steps()],
    }


def bias_rank_scan(p: int, r: int, m: int, budget: Optional[Budget] = None) -> BiasScan:
    """
    Distancia a uniforme y rank(f, r-1) de todo polinomio de grado exacto r
    en m variables, agrupados por clases bajo AGL(m, p).

    Las sustituciones afines invertibles preservan distribución, grado y
    rango, así que basta un representante por clase (count = tamaño de la clase).
    """
    budget = budget or Budget()
    dim = len(monomial_basis(p, r, m))
    total = p ** dim
    if total > budget.max_codewords:
        raise BudgetExceeded(f"el escaneo recorre {total} polinomios (dim={dim})", dim=dim, estimated_cost=total)
    budget.check_points(p ** m)

    generators = [substitution_matrix(p, r, m, A) for A in affine_generators(p, m)]
    labels = orbit_labels(p, dim, generators)
    sizes = np.bincount(labels, minlength=total)
    target = uniform(p, 1)
    rows = []
    for index in representatives(labels).tolist():
        f = from_coefficient_index(p, r, m, index)
        if f.is_zero() or total_degree(f) != r:
            continue
        distance = statistical_distance(distribution_of([f], budget), target)
        rows.append(BiasRow(index, f, distance, rank(f, r - 1, budget), int(sizes[index])))
    logger.info(f"📊 Escaneo sesgo/rango p={p} r={r} m={m}: {len(rows)} clases")
    return BiasScan(p, r, m, tuple(rows))


@lru_cache(maxsize=16)
def _cached_scan(p: int, r: int, m: int, budget: Budget) -> BiasScan:
    return bias_rank_scan(p, r, m, budget)


def largest_scan_m(p: int, r: int, scan_max_polys: int) -> int:
    """Mayor m con p^dim(RM_p(r,m)) <= scan_max_polys."""
    m = 0
    while p ** len(monomial_basis(p, r, m + 1)) <= scan_max_polys:
        m += 1
    return m


@dataclass(frozen=True)
class ThresholdTable:
    """
    T(c) = max_k C_2 observado en p^-c E(c) + margen, para k = 2..r.

    Es un sustituto medido (y falsable) de la constante no efectiva C_2.
    """

    p: int
    r: int
    error_map: ErrorMap = field(compare=False)
    scans: Tuple[BiasScan, ...]
    safety_margin: int = 1

    def __call__(self, c: int) -> int:
        epsilon = Fraction(self.error_map(c)) / self.p ** c
        observed = [scan.observed_c2(epsilon) for scan in self.scans]
        finite = [int(value) for value in observed if value != INFINITE_RANK]
        return (max(finite) if finite else 0) + self.safety_margin


def threshold_table(
    p: int,
    r: int,
    error_map: ErrorMap,
    budget: Optional[Budget] = None,
    scan_max_polys: int = 2 ** 16,
    safety_margin: int = 1,
) -> ThresholdTable:
    budget = budget or Budget()
    scans = []
    for k in range(2, r + 1):
        m = largest_scan_m(p, k, scan_max_polys)
        if m >= 1:
            scans.append(_cached_scan(p, k, m, budget))
    return ThresholdTable(p, r, error_map, tuple(scans), safety_margin)


# ========== COMPRESIÓN ==========

@dataclass(frozen=True)
class CompressionResult:
    regularization: RegularizationResult
    c: int
    function_table: Tuple[int, ...]
    rel_f: Fraction
    rel_g: Fraction
    achieved_error: Fraction
    distribution_distance: Fraction
    error_bound: Fraction
    success: bool
    failure: Optional[str] = None


def compress(
    f: Polynomial,
    error_map: ErrorMap,
    budget: Optional[Budget] = None,
    scan_max_polys: int = 2 ** 16,
    safety_margin: int = 1,
) -> CompressionResult:
    """
    Reemplaza f por una función g de c entradas independientes con
    |rel-wt(f) - rel-wt(g)| < E(c), vía regularize con la tabla de umbrales medida.
    """
    budget = budget or Budget()
    if f.is_constant():
        raise UsageError("compress requiere un polinomio de grado >= 1")
    table = threshold_table(f.p, total_degree(f), error_map, budget, scan_max_polys, safety_margin)
    regularization = regularize(f, table, budget)
    decomposition = regularization.decomposition
    c, p = decomposition.c, f.p

    f_distribution = distribution_of([f], budget)
    g_distribution = function_distribution(decomposition.combiner, p, c)
    rel_f = 1 - f_distribution.masses[0]
    rel_g = 1 - g_distribution.masses[0]
    achieved = abs(rel_f - rel_g)
    distance = statistical_distance(f_distribution, g_distribution)
    bound = Fraction(error_map(c))

    failure = None
    if not regularization.complete:
        failure = "regularization incomplete"
    elif achieved >= bound:
        failure = "threshold table insufficient"
    if failure:
        logger.warning(f"⚠️  compress falló ({failure}): error {format_fraction(achieved)} >= {format_fraction(bound)}")
    return CompressionResult(
        regularization, c, decomposition.combiner, rel_f, rel_g, achieved, distance, bound, failure is None, failure
    )


def compression_to_json(result: CompressionResult) -> Dict:
    return {
        "c": result.c,
        "g": list(result.function_table),
        "factors": [str(g) for g in result.regularization.decomposition.factors],
        "rel_f": format_fraction(result.rel_f),
        "rel_g": format_fraction(result.rel_g),
        "achieved_error": format_fraction(result.achieved_error),
        "distribution_distance": format_fraction(result.distribution_distance),
        "error_bound": format_fraction(result.error_bound),
        "success": result.success,
        "failure": result.failure,
        "threshold": result.regularization.certificate.threshold,
        "verdict": result.regularization.certificate.verdict,
        "threshold_source": "measured bias/rank table",
    }
