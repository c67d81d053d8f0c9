"""
density.py
Análisis de densidad de los pesos relativos alrededor de un objetivo alpha.

Características:
- Test de p-racionalidad y función de distancia delta(c)
- Barrido empírico del hueco entre alpha y W_p(r,m) para m = 1..max_m
- Validación de la divisibilidad de Ax sobre espectros completos
- Peso mínimo por fórmula o por enumeración, con codeword testigo
- Verificación exhaustiva de |rel-wt(g) - alpha| >= delta(c) y de la
  cadena de desigualdades que lleva a la contradicción

Ningún reporte afirma un epsilon demostrado: los huecos son empíricos
sobre los m barridos.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core.errors import BudgetExceeded, InternalError, UsageError
from core.field_poly import Polynomial
from core.spectrum import (
    CodeParams,
    enumerate_spectrum,
    MODE_FULL,
    PExactRational,
    weight,
    weight_set,
    WeightSpectrum,
)
from utils.budget import Budget
from utils.rationals import format_fraction, parse_fraction

logger = logging.getLogger(__name__)

SpectrumProvider = Callable[[CodeParams], WeightSpectrum]


@dataclass(frozen=True)
class TargetValue:
    """Objetivo alpha en [0,1] como racional exacto."""

    value: Fraction

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise UsageError(f"alpha debe estar en [0,1] (recibido {format_fraction(self.value)})")

    def __str__(self) -> str:
        return format_fraction(self.value)


def parse_target(text: str) -> TargetValue:
    """"a/b" o entero; decimales y exponentes se rechazan."""
    return TargetValue(parse_fraction(text))


def _as_fraction(alpha) -> Fraction:
    return alpha.value if isinstance(alpha, TargetValue) else Fraction(alpha)


def is_p_rational(q, p: int) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """
    ¿El denominador reducido de q es potencia de p?

    Returns:
        (True, (l, k)) con q = l/p^k canónico, o (False, None)
    """
    q = _as_fraction(q)
    denominator, k = q.denominator, 0
    while denominator % p == 0:
        denominator //= p
        k += 1
    if denominator != 1:
        return False, None
    return True, (q.numerator, k)


def delta(alpha, c: int, p: int) -> Fraction:
    """Distancia exacta de alpha al racional l/p^c más cercano."""
    if c < 1:
        raise UsageError(f"delta requiere c >= 1 (recibido {c})")
    alpha = _as_fraction(alpha)
    scale = p ** c
    scaled = alpha * scale
    return min(alpha - Fraction(math.floor(scaled), scale), Fraction(math.ceil(scaled), scale) - alpha)


# ========== BARRIDO DEL HUECO ==========

@dataclass(frozen=True)
class GapRecord:
    m: int
    nearest: PExactRational
    distance: Fraction
    mode: str = MODE_FULL


@dataclass(frozen=True)
class GapReport:
    """
    Hueco empírico entre alpha y W_p(r,m) para cada m barrido.

    complete=False marca un reporte parcial: el presupuesto se agotó en
    `stopped_at` y sólo los m anteriores tienen registro.
    """

    alpha: TargetValue
    p: int
    r: int
    max_m: int
    records: Tuple[GapRecord, ...] = ()
    complete: bool = True
    stopped_at: Optional[int] = None
    stop_reason: Optional[Dict] = field(default=None, compare=False)

    @property
    def overall(self) -> Optional[GapRecord]:
        """Registro con la menor distancia (el primero en caso de empate)."""
        if not self.records:
            return None
        return min(self.records, key=lambda record: (record.distance, record.m))

    @property
    def overall_gap(self) -> Optional[Fraction]:
        overall = self.overall
        return overall.distance if overall else None

    @property
    def attained(self) -> bool:
        return self.overall_gap == 0


def nearest_weight(weights: List[PExactRational], alpha: Fraction) -> Tuple[PExactRational, Fraction]:
    """Peso más cercano a alpha; los empates se resuelven por el peso menor."""
    best = min(weights, key=lambda w: (abs(w.value - alpha), w.value))
    return best, abs(best.value - alpha)


def gap_scan(
    alpha,
    p: int,
    r: int,
    max_m: int,
    budget: Optional[Budget] = None,
    provider: Optional[SpectrumProvider] = None,
    workers: int = 1,
) -> GapReport:
    """
    Barre m = 1..max_m y registra el peso de W_p(r,m) más cercano a alpha.

    Args:
        alpha: TargetValue o racional
        provider: Fuente de espectros (por ejemplo la caché); por defecto enumera

    Returns:
        GapReport: Parcial (complete=False) si el presupuesto se agota en algún m
    """
    target = alpha if isinstance(alpha, TargetValue) else TargetValue(Fraction(alpha))
    budget = budget or Budget()
    if provider is None:
        def provider(params: CodeParams) -> WeightSpectrum:
            return enumerate_spectrum(params, budget, workers=workers)

    records: List[GapRecord] = []
    for m in range(1, max_m + 1):
        params = CodeParams(p, r, m)
        try:
            spectrum = provider(params)
        except BudgetExceeded as e:
            logger.warning(f"⚠️  Presupuesto agotado en m={m}: reporte parcial hasta m={m - 1}")
            return GapReport(target, p, r, max_m, tuple(records), complete=False, stopped_at=m, stop_reason=e.to_dict())
        nearest, distance = nearest_weight(weight_set(spectrum), target.value)
        records.append(GapRecord(m, nearest, distance, spectrum.mode))
        logger.info(f"📊 m={m}: peso más cercano {nearest}, distancia {format_fraction(distance)}")
    return GapReport(target, p, r, max_m, tuple(records))


def gap_report_to_json(report: GapReport) -> Dict:
    data = {
        "alpha": str(report.alpha),
        "p": report.p,
        "r": report.r,
        "max_m": report.max_m,
        "per_m": [
            {"m": rec.m, "nearest": str(rec.nearest), "distance": format_fraction(rec.distance), "mode": rec.mode}
            for rec in report.records
        ],
        "overall_gap": format_fraction(report.overall_gap) if report.records else None,
        "attained": report.attained,
        "complete": report.complete,
    }
    if not report.complete:
        data["stopped_at"] = report.stopped_at
        data["stop_reason"] = report.stop_reason
    return data


# ========== AX ==========

@dataclass(frozen=True)
class AxResult:
    ok: bool
    divisor: int
    violations: Tuple[int, ...] = ()


def ax_divisor(p: int, r: int, m: int) -> int:
    """p^(ceil(m/r) - 1), nunca menor que 1."""
    if r < 1:
        raise UsageError("la divisibilidad de Ax se define para r >= 1")
    return p ** max(0, -(-m // r) - 1)


def ax_check(spectrum: WeightSpectrum) -> AxResult:
    """Verifica que todo peso con conteo no nulo sea divisible por el divisor de Ax."""
    params = spectrum.params
    divisor = ax_divisor(params.p, params.r, params.m)
    violations = tuple(w for w, c in spectrum.counts if c and w % divisor)
    if violations:
        logger.error(f"❌ {params.label()}: pesos no divisibles por {divisor}: {list(violations)}")
    return AxResult(not violations, divisor, violations)


def require_ax(spectrum: WeightSpectrum) -> AxResult:
    """Como ax_check, pero una violación es un error interno."""
    result = ax_check(spectrum)
    if not result.ok:
        raise InternalError(
            f"violación de Ax en {spectrum.params.label()}",
            divisor=result.divisor,
            violations=list(result.violations),
        )
    return result


# ========== PESO MÍNIMO ==========

def _degree_split(params: CodeParams) -> Tuple[int, int]:
    """r = a(p-1) + b con 0 <= b < p-1."""
    return divmod(params.r, params.p - 1)


def min_weight_formula(params: CodeParams) -> int:
    p, m = params.p, params.m
    if params.r >= m * (p - 1):
        return 1
    a, b = _degree_split(params)
    return (p - b) * p ** (m - a - 1)


def min_weight(params: CodeParams, mode: str = "formula", budget: Optional[Budget] = None, workers: int = 1) -> int:
    """
    Peso mínimo de los codewords no nulos de RM_p(r,m).

    Args:
        mode (str): "formula" (cerrada, de la literatura) o "enumerate"
    """
    if mode == "formula":
        return min_weight_formula(params)
    if mode != "enumerate":
        raise UsageError(f"modo de peso mínimo desconocido: {mode}")
    spectrum = enumerate_spectrum(params, budget, workers=workers)
    return min(w for w, c in spectrum.counts if w > 0 and c)


def min_weight_witness(params: CodeParams) -> Polynomial:
    """
    Codeword de peso mínimo: prod_{i<=a}(1 - x_i^(p-1)) * prod_{j<b}(x_{a+1} - j).

    Con r >= m(p-1) es el indicador del origen.
    """
    p, m = params.p, params.m
    witness = Polynomial.constant(p, m, 1)
    if params.r >= m * (p - 1):
        a, b = m, 0
    else:
        a, b = _degree_split(params)
    for i in range(1, a + 1):
        witness = witness * (1 - Polynomial.variable(p, m, i).power(p - 1))
    for j in range(b):
        witness = witness * (Polynomial.variable(p, m, a + 1) - j)
    return witness


def min_weight_report(params: CodeParams, mode: str, budget: Optional[Budget] = None, workers: int = 1) -> Dict:
    """Valor, testigo y verificación cruzada con la fórmula."""
    value = min_weight(params, mode, budget, workers)
    witness = min_weight_witness(params)
    witness_count, _ = weight(witness, budget)
    formula = min_weight_formula(params)
    if witness_count != formula or value != formula:
        raise InternalError(
            f"peso mínimo inconsistente en {params.label()}",
            value=value,
            formula=formula,
            witness_weight=witness_count,
        )
    return {
        "p": params.p,
        "r": params.r,
        "m": params.m,
        "mode": mode,
        "min_weight": value,
        "witness": str(witness),
        "witness_weight": witness_count,
    }


# ========== CONSISTENCIA DE DELTA ==========

@dataclass(frozen=True)
class A4Result:
    alpha: Fraction
    c: int
    p: int
    delta: Fraction
    functions_checked: int
    min_distance: Fraction
    ok: bool


def a4_consistency(alpha, c: int, p: int, budget: Optional[Budget] = None) -> A4Result:
    """
    Recorre todas las funciones F_p^c -> F_p y comprueba
    |rel-wt(g) - alpha| >= delta(c).
    """
    budget = budget or Budget()
    alpha = _as_fraction(alpha)
    points = p ** c
    total = p ** points
    if total > budget.max_codewords:
        raise BudgetExceeded(f"hay {total} funciones de {c} entradas", estimated_cost=total)
    bound = delta(alpha, c, p)
    counts = np.zeros(points + 1, dtype=np.int64)
    powers = p ** np.arange(points, dtype=np.int64)
    chunk = 1 << 16
    for start in range(0, total, chunk):
        indices = np.arange(start, min(start + chunk, total), dtype=np.int64)
        values = (indices[:, None] // powers[None, :]) % p
        counts += np.bincount(np.count_nonzero(values, axis=1), minlength=points + 1)
    distances = [abs(Fraction(w, points) - alpha) for w in range(points + 1) if counts[w]]
    min_distance = min(distances)
    return A4Result(alpha, c, p, bound, total, min_distance, min_distance >= bound)


@dataclass(frozen=True)
class ContradictionChain:
    """Qué desigualdades de la cadena se cumplen para valores concretos."""

    error_c: Fraction
    error_cap: Fraction
    close_to_compressed: bool
    close_to_alpha: bool
    compressed_near_alpha: bool
    compressed_far_from_alpha: bool

    @property
    def consistent(self) -> bool:
        """Las tres primeras y la última nunca se cumplen a la vez."""
        return not (self.close_to_compressed and self.close_to_alpha and self.compressed_far_from_alpha)


def contradiction_chain(alpha, p: int, rel_f, rel_g, c: int, C: int) -> ContradictionChain:
    """
    Evalúa la cadena con E(c) = delta(c)/4:
      |rel_f - rel_g| < E(c);  |rel_f - alpha| < E(C);
      |rel_g - alpha| < E(c) + E(C);  |rel_g - alpha| >= delta(c).
    """
    if not 1 <= c <= C:
        raise UsageError(f"se requiere 1 <= c <= C (c={c}, C={C})")
    alpha, rel_f, rel_g = _as_fraction(alpha), Fraction(rel_f), Fraction(rel_g)
    if p ** c % rel_g.denominator:
        raise UsageError(f"rel_g={format_fraction(rel_g)} no es de la forma l/{p}^{c}")
    error_c = delta(alpha, c, p) / 4
    error_cap = delta(alpha, C, p) / 4
    chain = ContradictionChain(
        error_c=error_c,
        error_cap=error_cap,
        close_to_compressed=abs(rel_f - rel_g) < error_c,
        close_to_alpha=abs(rel_f - alpha) < error_cap,
        compressed_near_alpha=abs(rel_g - alpha) < error_c + error_cap,
        compressed_far_from_alpha=abs(rel_g - alpha) >= 4 * error_c,
    )
    if not chain.consistent:
        raise InternalError("la cadena de desigualdades se cumplió completa", alpha=format_fraction(alpha), c=c, C=C)
    return chain
