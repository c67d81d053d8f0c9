"""
distributions.py
Distribuciones exactas de tuplas de polinomios y distancia estadística.

Todas las masas son Fraction: nada se convierte a flotante. El orden del
alfabeto F_p^c es el de los puntos (la primera coordenada es el dígito
menos significativo).

Características:
- Distribución conjunta de (f_1..f_c) en una pasada sobre los p^m puntos
- Distancia estadística, brecha de un distinguidor y marginales
- Chequeo de uniformidad por combinaciones lineales
- Mejor aproximación de un objetivo por polinomios de grado <= r,
  un representante por clase afín
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import BudgetExceeded, DimensionMismatch, ParseError, UsageError
from core.field_poly import (
    from_coefficient_index,
    monomial_basis,
    Polynomial,
    polynomial_to_json,
    tabulate,
    total_degree,
)
from core.orbits import affine_generators, orbit_labels, representatives, substitution_matrix
from utils.budget import Budget
from utils.rationals import format_fraction, parse_fraction_list

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Distribution:
    """Masas exactas sobre F_p^c en orden de índice."""

    p: int
    c: int
    masses: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.masses) != self.p ** self.c:
            raise DimensionMismatch(f"se esperaban {self.p ** self.c} masas y hay {len(self.masses)}")
        if any(not 0 <= mass <= 1 for mass in self.masses):
            raise ParseError("toda masa debe estar en [0,1]")
        if sum(self.masses) != 1:
            raise ParseError(f"las masas suman {format_fraction(sum(self.masses))}, no 1")

    @classmethod
    def from_counts(cls, p: int, c: int, counts: Sequence[int], total: int) -> "Distribution":
        return cls(p, c, tuple(Fraction(int(n), total) for n in counts))

    def probability(self, subset: Iterable[int]) -> Fraction:
        subset = set(subset)
        outside = sorted(s for s in subset if not 0 <= s < len(self.masses))
        if outside:
            raise UsageError(f"índices {outside} fuera del alfabeto F_{self.p}^{self.c}", subset=outside)
        return sum((self.masses[s] for s in subset), Fraction(0))


def distribution_to_json(distribution: Distribution) -> Dict:
    return {"p": distribution.p, "c": distribution.c, "masses": [format_fraction(m) for m in distribution.masses]}


def uniform(p: int, c: int) -> Distribution:
    size = p ** c
    return Distribution(p, c, (Fraction(1, size),) * size)


def point_mass(p: int, c: int, index: int) -> Distribution:
    size = p ** c
    if not 0 <= index < size:
        raise DimensionMismatch(f"índice {index} fuera del alfabeto de tamaño {size}")
    return Distribution(p, c, tuple(Fraction(int(i == index)) for i in range(size)))


def parse_masses(text: str, p: int) -> Distribution:
    """"1/2,1/2,0" -> Distribution; la longitud debe ser p^c."""
    masses = parse_fraction_list(text)
    c, size = 0, 1
    while size < len(masses):
        size *= p
        c += 1
    if size != len(masses):
        raise ParseError(f"{len(masses)} masas no es una potencia de p={p}")
    return Distribution(p, c, tuple(masses))


def distribution_of(fs: Sequence[Polynomial], budget: Optional[Budget] = None) -> Distribution:
    """
    Distribución conjunta exacta de (f_1(x)..f_c(x)) con x uniforme.

    Raises:
        DimensionMismatch: Si los polinomios no comparten (p, m)
        BudgetExceeded: Si p^m excede el presupuesto
    """
    if not fs:
        raise DimensionMismatch("se necesita al menos un polinomio")
    p, m = fs[0].p, fs[0].m
    if any((f.p, f.m) != (p, m) for f in fs):
        raise DimensionMismatch("todos los polinomios deben compartir p y m")
    keys = np.zeros(p ** m, dtype=np.int64)
    for i, f in enumerate(fs):
        keys += tabulate(f, budget).values.astype(np.int64) * p ** i
    counts = np.bincount(keys, minlength=p ** len(fs))
    return Distribution.from_counts(p, len(fs), counts.tolist(), p ** m)


def function_distribution(table: Sequence[int], p: int, c: int) -> Distribution:
    """Distribución de F(y) sobre F_p con y uniforme en F_p^c."""
    values = np.asarray(table, dtype=np.int64)
    if len(values) != p ** c:
        raise DimensionMismatch(f"la tabla tiene {len(values)} entradas, se esperaban {p ** c}")
    return Distribution.from_counts(p, 1, np.bincount(values, minlength=p).tolist(), p ** c)


def marginal(distribution: Distribution, keep: Sequence[int]) -> Distribution:
    """Marginal sobre las coordenadas `keep` (base 0), en ese orden."""
    p, c = distribution.p, distribution.c
    if any(not 0 <= k < c for k in keep):
        raise DimensionMismatch(f"coordenadas {list(keep)} fuera de rango para c={c}")
    masses = [Fraction(0)] * p ** len(keep)
    for index, mass in enumerate(distribution.masses):
        target = sum(((index // p ** k) % p) * p ** j for j, k in enumerate(keep))
        masses[target] += mass
    return Distribution(p, len(keep), tuple(masses))


def statistical_distance(first: Distribution, second: Distribution) -> Fraction:
    """1/2 sum_s |Pr[first = s] - Pr[second = s]|, exacta."""
    if (first.p, first.c) != (second.p, second.c):
        raise DimensionMismatch(
            f"alfabetos distintos: F_{first.p}^{first.c} y F_{second.p}^{second.c}"
        )
    return sum((abs(a - b) for a, b in zip(first.masses, second.masses)), Fraction(0)) / 2


def distinguisher_gap(first: Distribution, second: Distribution, subset: Iterable[int]) -> Tuple[Fraction, bool]:
    """
    |Pr_first[S] - Pr_second[S]| y si respeta la cota de la distancia estadística.
    bound_ok = False sólo puede ser un bug.
    """
    subset = list(subset)
    gap = abs(first.probability(subset) - second.probability(subset))
    return gap, gap <= statistical_distance(first, second)


@dataclass(frozen=True)
class ComboCheck:
    per_combination: Tuple[Tuple[Tuple[int, ...], Fraction], ...]
    joint_distance: Fraction
    epsilon: Fraction
    all_small: bool
    factor_ok: bool


def combo_uniformity_check(gs: Sequence[Polynomial], epsilon: Fraction, budget: Optional[Budget] = None) -> ComboCheck:
    """
    Si toda combinación no nula está a distancia < p^-c epsilon de uniforme,
    la conjunta debe estar a distancia < epsilon (factor_ok lo verifica).
    """
    p, c = gs[0].p, len(gs)
    target = uniform(p, 1)
    per_combination = []
    for index in range(1, p ** c):
        coefficients = tuple((index // p ** i) % p for i in range(c))
        combination = Polynomial.zero(gs[0].p, gs[0].m)
        for g, a in zip(gs, coefficients):
            if a:
                combination = combination + g.scale(a)
        per_combination.append((coefficients, statistical_distance(distribution_of([combination], budget), target)))
    joint = statistical_distance(distribution_of(gs, budget), uniform(p, c))
    epsilon = Fraction(epsilon)
    all_small = all(distance < epsilon / p ** c for _, distance in per_combination)
    return ComboCheck(tuple(per_combination), joint, epsilon, all_small, (not all_small) or joint < epsilon)


def combo_check_to_json(check: ComboCheck) -> Dict:
    return {
        "per_combination": [{"a": list(a), "distance": format_fraction(d)} for a, d in check.per_combination],
        "joint_distance": format_fraction(check.joint_distance),
        "epsilon": format_fraction(check.epsilon),
        "all_small": check.all_small,
        "factor_ok": check.factor_ok,
    }


# ========== MEJOR APROXIMACIÓN ==========

@dataclass(frozen=True)
class ApproximationSlice:
    """Mejor distancia con grado <= r y m' <= m variables."""

    r: int
    m: int
    distance: Fraction
    witness: Polynomial


@dataclass(frozen=True)
class ApproximationResult:
    target: Distribution
    best: Optional[Polynomial]
    distance: Optional[Fraction]
    slices: Tuple[ApproximationSlice, ...]
    r_max: int
    m_max: int
    m_completed: int
    complete: bool

    def slice(self, r: int, m: int) -> Optional[ApproximationSlice]:
        return next((s for s in self.slices if s.r == r and s.m == m), None)

    def degree_sweep(self) -> List[Tuple[int, Fraction]]:
        """Mejor distancia por grado sobre la frontera completada."""
        return [(s.r, s.distance) for s in self.slices if s.m == self.m_completed]


def approximation_to_json(result: ApproximationResult) -> Dict:
    return {
        "target": distribution_to_json(result.target),
        "best": polynomial_to_json(result.best) if result.best is not None else None,
        "best_text": str(result.best) if result.best is not None else None,
        "distance": format_fraction(result.distance) if result.distance is not None else None,
        "slices": [
            {"r": s.r, "m": s.m, "distance": format_fraction(s.distance), "witness": str(s.witness)}
            for s in result.slices
        ],
        "frontier": {"r_max": result.r_max, "m_max": result.m_max, "m_completed": result.m_completed},
        "complete": result.complete,
    }


def best_approximation(
    target: Distribution,
    r_max: int,
    m_max: int,
    budget: Optional[Budget] = None,
) -> ApproximationResult:
    """
    Busca exhaustivamente el polinomio de grado <= r en m <= m_max variables
    cuya distribución está más cerca de `target` (sobre F_p).

    Cada RM_p(r_max, m) se reduce a un representante por órbita de AGL(m,p)
    (menor índice); los empates se quedan con el m menor y luego con el
    representante de menor índice.
    """
    budget = budget or Budget()
    if target.c != 1:
        raise DimensionMismatch("el objetivo debe ser una distribución sobre F_p")
    p = target.p
    degrees = list(range(min(1, r_max), r_max + 1))
    best: Dict[int, Tuple[Fraction, Polynomial]] = {}
    slices: List[ApproximationSlice] = []
    m_completed = -1

    for m in range(0, m_max + 1):
        dim = len(monomial_basis(p, r_max, m))
        if p ** dim > budget.max_codewords or p ** dim * p ** m > budget.max_ops:
            logger.warning(f"⚠️  Frontera alcanzada: RM_{p}({r_max},{m}) tiene {p ** dim} polinomios")
            break
        try:
            budget.check_points(p ** m)
        except BudgetExceeded:
            break
        generators = [substitution_matrix(p, r_max, m, A) for A in affine_generators(p, m)]
        labels = orbit_labels(p, dim, generators)
        reps = representatives(labels).tolist()
        for index in reps:
            f = from_coefficient_index(p, r_max, m, index)
            degree = 0 if f.is_zero() else total_degree(f)
            distance = statistical_distance(distribution_of([f], budget), target)
            for r in degrees:
                if degree <= r and (r not in best or distance < best[r][0]):
                    best[r] = (distance, f)
        for r in degrees:
            if r in best:
                slices.append(ApproximationSlice(r, m, best[r][0], best[r][1]))
        m_completed = m
        logger.info(f"📊 m={m}: {len(reps)} clases afines evaluadas")

    overall = best.get(r_max)
    return ApproximationResult(
        target=target,
        best=overall[1] if overall else None,
        distance=overall[0] if overall else None,
        slices=tuple(slices),
        r_max=r_max,
        m_max=m_max,
        m_completed=m_completed,
        complete=m_completed == m_max,
    )
