"""
spectrum.py
Núcleo de rendimiento: pesos exactos y enumeración del espectro de RM_p(r,m).

La enumeración recorre los vectores de coeficientes en orden Gray reflejado
base p sobre la base de monomios (orden graduado lexicográfico): cada paso
suma un múltiplo escalar de una única tabla de monomio precalculada.

Características:
- Bloque bajo vectorizado: los p^k codewords de los k dígitos bajos se
  construyen de una vez en orden Gray (bits empaquetados + popcount para
  p = 2, un byte por punto para p impar)
- Dígitos altos en orden Gray, un paso = una suma de tabla
- Particiones deterministas por prefijo de los dígitos superiores, una por
  tarea de ProcessPoolExecutor, fusionadas en orden
- Modo reducido por simetría (sólo certifica el conjunto de pesos)
- Conteos con enteros de precisión arbitraria

Uso:
    spectrum = enumerate_spectrum(CodeParams(2, 2, 4), budget, workers=4)
    weight_set(spectrum)
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import BudgetExceeded, ParamsMismatch, ParseError, SpectrumIncomplete
from core.field_poly import (
    AffineMap,
    apply_affine,
    FieldParams,
    monomial_basis,
    monomial_table,
    Polynomial,
    tabulate,
)
from core.orbits import (
    monomial_generators,
    orbit_labels,
    representatives,
    restrict,
    substitution_matrix,
    top_degree_positions,
)
from utils.budget import Budget
from utils.config import TOOL_VERSION

logger = logging.getLogger(__name__)

MODE_FULL = "full"
MODE_REDUCED = "symmetry-reduced"
DEFAULT_BLOCK_ELEMENTS = 2 ** 21


# ========== RACIONALES p-EXACTOS ==========

@total_ordering
@dataclass(frozen=True)
class PExactRational:
    """
    Racional numerator / p^p_exponent en forma canónica.

    p no divide al numerador salvo que sea 0, y entonces p_exponent = 0.
    """

    numerator: int
    p: int
    p_exponent: int

    def __post_init__(self):
        if self.numerator < 0 or self.p_exponent < 0:
            raise ValueError("numerador y exponente deben ser no negativos")
        if self.numerator == 0 and self.p_exponent != 0:
            raise ValueError("el cero canónico tiene exponente 0")
        if self.p_exponent > 0 and self.numerator % self.p == 0:
            raise ValueError(f"{self.numerator}/{self.p}^{self.p_exponent} no está en forma canónica")

    @classmethod
    def from_count(cls, count: int, p: int, m: int) -> "PExactRational":
        """count / p^m reducido."""
        if count == 0:
            return cls(0, p, 0)
        k = m
        while k > 0 and count % p == 0:
            count //= p
            k -= 1
        return cls(count, p, k)

    @classmethod
    def from_fraction(cls, value: Fraction, p: int) -> "PExactRational":
        value = Fraction(value)
        denominator, k = value.denominator, 0
        while denominator % p == 0:
            denominator //= p
            k += 1
        if denominator != 1 or value < 0:
            raise ValueError(f"{value} no es p-racional para p={p}")
        return cls(value.numerator, p, k)

    @classmethod
    def parse(cls, text: str, p: int) -> "PExactRational":
        """Acepta "l/p^k", "l/b" o "l"."""
        text = text.strip()
        try:
            if "^" in text:
                numerator, power = text.split("/")
                base, exponent = power.split("^")
                if int(base) != p:
                    raise ValueError(f"base {base} distinta de p={p}")
                return cls.from_fraction(Fraction(int(numerator), int(base) ** int(exponent)), p)
            return cls.from_fraction(Fraction(text), p)
        except ValueError as e:
            raise ParseError(f"racional p-exacto inválido {text!r}: {e}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.p ** self.p_exponent)

    def __lt__(self, other: "PExactRational") -> bool:
        return self.value < other.value

    def __str__(self) -> str:
        if self.p_exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/{self.p}^{self.p_exponent}"


# ========== PARÁMETROS Y ESPECTRO ==========

@dataclass(frozen=True)
class CodeParams:
    """Parámetros de RM_p(r,m)."""

    p: int
    r: int
    m: int

    def __post_init__(self):
        FieldParams(self.p)
        if self.r < 0 or self.m < 0:
            raise ParamsMismatch(f"r y m deben ser no negativos (r={self.r}, m={self.m})")

    @property
    def dim(self) -> int:
        return len(monomial_basis(self.p, self.r, self.m))

    @property
    def length(self) -> int:
        """Longitud del código: p^m puntos."""
        return self.p ** self.m

    @property
    def size(self) -> int:
        return self.p ** self.dim

    @property
    def monomials(self):
        return monomial_basis(self.p, self.r, self.m)

    def label(self) -> str:
        return f"RM_{self.p}({self.r},{self.m})"


@dataclass(frozen=True)
class WeightSpectrum:
    """
    Mapa exacto peso -> número de codewords.

    Un espectro completo suma p^dim; las partes de una enumeración paralela
    cubren prefijos disjuntos y sólo la fusión es completa.
    """

    params: CodeParams
    counts: Tuple[Tuple[int, int], ...]
    mode: str = MODE_FULL
    tool_version: str = TOOL_VERSION
    partitions: int = field(default=1, compare=False)

    @classmethod
    def from_counts(cls, params: CodeParams, counts: Dict[int, int], **metadata) -> "WeightSpectrum":
        return cls(params, tuple(sorted((int(w), int(c)) for w, c in counts.items() if c)), **metadata)

    def counts_dict(self) -> Dict[int, int]:
        return dict(self.counts)

    def total(self) -> int:
        return sum(c for _, c in self.counts)

    def is_complete(self) -> bool:
        return self.total() == self.params.size

    def weights(self) -> List[int]:
        return [w for w, _ in self.counts]

    def validate(self) -> None:
        """Invariantes de un espectro completo en modo full."""
        if self.mode != MODE_FULL:
            return
        if not self.is_complete():
            raise SpectrumIncomplete(
                f"la suma de conteos es {self.total()} y debería ser p^dim = {self.params.size}",
                total=str(self.total()),
                expected=str(self.params.size),
            )
        if self.counts_dict().get(0) != 1:
            raise SpectrumIncomplete("sólo el polinomio cero puede tener peso 0")


def spectrum_to_json(spectrum: WeightSpectrum) -> Dict:
    """Forma del archivo de caché: conteos como cadenas decimales ordenadas por peso."""
    params = spectrum.params
    return {
        "p": params.p,
        "r": params.r,
        "m": params.m,
        "dim": params.dim,
        "mode": spectrum.mode,
        "counts": [[w, str(c)] for w, c in spectrum.counts],
        "tool_version": spectrum.tool_version,
    }


def spectrum_from_json(data: Dict) -> WeightSpectrum:
    try:
        params = CodeParams(int(data["p"]), int(data["r"]), int(data["m"]))
        if int(data["dim"]) != params.dim:
            raise ParseError(f"dim={data['dim']} no coincide con {params.label()} (dim={params.dim})")
        return WeightSpectrum(
            params,
            tuple((int(w), int(c)) for w, c in data["counts"]),
            mode=data.get("mode", MODE_FULL),
            tool_version=data.get("tool_version", TOOL_VERSION),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"JSON de espectro inválido: {e}")


# ========== PESO DE UN CODEWORD ==========

def weight(f: Polynomial, budget: Optional[Budget] = None) -> Tuple[int, PExactRational]:
    """
    Peso y peso relativo exacto de un codeword.

    Returns:
        (count, relative): count = |{x : f(x) != 0}|, relative = count / p^m canónico
    """
    count = tabulate(f, budget).nonzero_count()
    return count, PExactRational.from_count(count, f.p, f.m)


# ========== CÓDIGO GRAY BASE p ==========

def gray_step(i: int, p: int) -> Tuple[int, int]:
    """
    Dígito que cambia al pasar del elemento i-1 al i (i >= 1) y su dirección.

    En el Gray reflejado el dígito j cambia cuando p^j divide a i, y avanza
    hacia arriba si floor(i / p^(j+1)) es par, hacia abajo si es impar.
    """
    j = 0
    while i % p == 0:
        i //= p
        j += 1
    return j, (1 if (i // p) % 2 == 0 else -1)


def gray_digits(i: int, p: int, n: int) -> List[int]:
    """Dígitos (dígito 0 primero) del i-ésimo vector en orden Gray reflejado."""
    digits = []
    for j in range(n):
        b = (i // p ** j) % p
        if (i // p ** (j + 1)) % 2:
            b = p - 1 - b
        digits.append(b)
    return digits


def code_tables(params: CodeParams, relabel: Optional[AffineMap] = None) -> np.ndarray:
    """Tablas de los monomios de la base (fila j = monomio j), opcionalmente reetiquetados."""
    rows = []
    for exps in params.monomials:
        if relabel is None:
            rows.append(monomial_table(params.p, params.m, exps))
        else:
            image = apply_affine(Polynomial.from_terms(params.p, params.m, {exps: 1}), relabel)
            rows.append(tabulate(image).values.astype(np.int64))
    if not rows:
        return np.zeros((0, params.length), dtype=np.uint8)
    return np.array(rows, dtype=np.uint8)


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    """Empaqueta filas 0/1 en palabras uint64 (bit idx = punto idx)."""
    packed = np.packbits(rows.astype(np.uint8), axis=-1, bitorder="little")
    pad = (-packed.shape[-1]) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(packed.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1)
    return np.ascontiguousarray(packed).view(np.uint64)


def gray_block(tables: np.ndarray, p: int) -> np.ndarray:
    """
    Todos los codewords de las tablas dadas, en orden Gray reflejado.

    Para p = 2 las tablas llegan empaquetadas (uint64) y se combinan con XOR;
    para p impar son bytes y se suman módulo p.
    """
    if p == 2:
        block = np.zeros((1, tables.shape[1]), dtype=np.uint64)
        for table in tables:
            block = np.concatenate([block, block[::-1] ^ table])
        return block
    block = np.zeros((1, tables.shape[1]), dtype=np.uint8)
    for table in tables:
        pieces = [
            ((block if s % 2 == 0 else block[::-1]).astype(np.int16) + s * table.astype(np.int16)) % p
            for s in range(p)
        ]
        block = np.concatenate(pieces).astype(np.uint8)
    return block


def _sweep(block: np.ndarray, gray_tables: np.ndarray, base: np.ndarray, p: int, length: int) -> np.ndarray:
    """Histograma de pesos de base + (bloque) + (dígitos Gray de gray_tables)."""
    counts = np.zeros(length + 1, dtype=np.int64)
    current = base.copy()
    steps = p ** len(gray_tables)
    for i in range(steps):
        if i:
            j, direction = gray_step(i, p)
            if p == 2:
                current ^= gray_tables[j]
            else:
                current = (current + direction * gray_tables[j].astype(np.int16)) % p
        if p == 2:
            weights = np.bitwise_count(block ^ current).sum(axis=1, dtype=np.int64)
        else:
            weights = np.count_nonzero((block + current.astype(np.uint8)) % p, axis=1)
        counts += np.bincount(weights, minlength=length + 1)
    return counts


def _block_digits(params: CodeParams, free_digits: int, block_elements: int) -> int:
    """Cuántos dígitos bajos caben en el bloque vectorizado."""
    row_cost = math.ceil(params.length / 64) if params.p == 2 else params.length
    k = 0
    while k < free_digits and params.p ** (k + 1) * row_cost <= block_elements:
        k += 1
    return k


def _count_partition(
    params: CodeParams,
    relabel: Optional[AffineMap],
    block_digits: int,
    partition_digits: int,
    prefix: int,
) -> List[int]:
    """
    Trabajo de una partición: fija los `partition_digits` dígitos superiores
    al valor `prefix` y recorre el resto. Cada proceso tabula desde cero.
    """
    p, dim = params.p, params.dim
    tables = code_tables(params, relabel)
    top = dim - partition_digits
    base = np.zeros(params.length, dtype=np.int64)
    for offset in range(partition_digits):
        digit = (prefix // p ** offset) % p
        base = (base + digit * tables[top + offset].astype(np.int64)) % p
    low, middle = tables[:block_digits], tables[block_digits:top]
    if p == 2:
        low, middle = _pack_rows(low), _pack_rows(middle)
        base = _pack_rows(base[None, :])[0]
    else:
        base = base.astype(np.int16)
    block = gray_block(low, p)
    return _sweep(block, middle, base, p, params.length).tolist()


def merge_spectra(parts: Sequence[WeightSpectrum]) -> WeightSpectrum:
    """
    Suma puntual de espectros parciales sobre prefijos disjuntos.

    Raises:
        ParamsMismatch: Si las partes no comparten parámetros
        SpectrumIncomplete: Si el total no es p^dim (partición perdida)
    """
    if not parts:
        raise SpectrumIncomplete("no hay partes que fusionar")
    params, mode = parts[0].params, parts[0].mode
    merged: Dict[int, int] = {}
    for part in parts:
        if part.params != params or part.mode != mode:
            raise ParamsMismatch(f"no se pueden fusionar {part.params.label()} y {params.label()}")
        for w, c in part.counts:
            merged[w] = merged.get(w, 0) + c
    result = WeightSpectrum.from_counts(params, merged, mode=mode, partitions=sum(part.partitions for part in parts))
    if mode == MODE_FULL and not result.is_complete():
        raise SpectrumIncomplete(
            f"las partes suman {result.total()} codewords y {params.label()} tiene {params.size}",
            total=str(result.total()),
            expected=str(params.size),
        )
    return result


def _partition_digits(p: int, workers: int, dim: int) -> int:
    t = 0
    while p ** t < workers and t < dim:
        t += 1
    return t


def enumerate_spectrum(
    params: CodeParams,
    budget: Optional[Budget] = None,
    workers: int = 1,
    mode: str = MODE_FULL,
    relabel: Optional[AffineMap] = None,
    block_elements: int = DEFAULT_BLOCK_ELEMENTS,
) -> WeightSpectrum:
    """
    Espectro exacto de RM_p(r,m) sobre los p^dim vectores de coeficientes.

    Args:
        params (CodeParams): Código
        budget (Budget): Presupuesto (por defecto Budget())
        workers (int): Procesos; el resultado no depende de este valor
        mode (str): "full" o "symmetry-reduced"
        relabel (AffineMap): Reetiquetado afín de la base de monomios
        block_elements (int): Tamaño del bloque vectorizado

    Returns:
        WeightSpectrum: Conteos exactos (en modo reducido, conteos de representantes)

    Raises:
        BudgetExceeded: Informa dim y costo estimado
    """
    budget = budget or Budget()
    if mode == MODE_REDUCED:
        return _enumerate_reduced(params, budget, block_elements)
    if mode != MODE_FULL:
        raise ParamsMismatch(f"modo de enumeración desconocido: {mode}")

    budget.check_points(params.length)
    budget.check_enumeration(params.dim, params.size, params.length)

    t = _partition_digits(params.p, max(1, workers), params.dim)
    k = _block_digits(params, params.dim - t, block_elements)
    prefixes = list(range(params.p ** t))
    logger.info(
        f"🔢 Enumerando {params.label()}: dim={params.dim}, {params.size} codewords, "
        f"bloque de {params.p ** k}, {len(prefixes)} particiones"
    )

    if workers > 1 and len(prefixes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_count_partition, params, relabel, k, t, prefix) for prefix in prefixes]
            histograms = [future.result() for future in futures]
    else:
        histograms = [_count_partition(params, relabel, k, t, prefix) for prefix in prefixes]

    parts = [
        WeightSpectrum.from_counts(params, {w: c for w, c in enumerate(histogram) if c})
        for histogram in histograms
    ]
    spectrum = merge_spectra(parts)
    spectrum.validate()
    logger.info(f"✅ {params.label()}: {len(spectrum.counts)} pesos distintos")
    return spectrum


def _enumerate_reduced(params: CodeParams, budget: Budget, block_elements: int) -> WeightSpectrum:
    """
    Representantes de la parte homogénea superior módulo permutaciones de
    variables, escalas diagonales y escalares, con todas las partes bajas.
    """
    p, dim = params.p, params.dim
    top_degree = max((sum(exps) for exps in params.monomials), default=0)
    top = top_degree_positions(p, params.r, params.m, top_degree) if top_degree > 0 else []
    lower = [i for i in range(dim) if i not in top]
    if not top:
        return enumerate_spectrum(params, budget, block_elements=block_elements)

    budget.check_points(params.length)
    if p ** len(top) > budget.max_codewords:
        raise BudgetExceeded(
            f"las órbitas de la parte superior requieren {p ** len(top)} vectores",
            dim=dim,
            estimated_cost=p ** len(top),
        )
    generators = [restrict(substitution_matrix(p, params.r, params.m, A), top) for A in monomial_generators(p, params.m)]
    labels = orbit_labels(p, len(top), generators, scalar_orbits=True)
    reps = representatives(labels)
    budget.check_enumeration(dim, len(reps) * p ** len(lower), params.length)
    logger.info(f"🔁 {params.label()}: {len(reps)} representantes de {p ** len(top)} partes superiores")

    tables = code_tables(params)
    top_tables = tables[top].astype(np.int64)
    lower_tables = tables[lower]
    k = _block_digits(params, len(lower), block_elements)
    low, middle = lower_tables[:k], lower_tables[k:]
    if p == 2:
        low, middle = _pack_rows(low), _pack_rows(middle)
    block = gray_block(low, p)

    merged = np.zeros(params.length + 1, dtype=object)
    for rep in reps.tolist():
        digits = np.array([(rep // p ** j) % p for j in range(len(top))], dtype=np.int64)
        base = (digits @ top_tables) % p
        base = _pack_rows(base[None, :])[0] if p == 2 else base.astype(np.int16)
        merged += np.array(_sweep(block, middle, base, p, params.length).tolist(), dtype=object)
    counts = {w: int(c) for w, c in enumerate(merged) if c}
    return WeightSpectrum.from_counts(params, counts, mode=MODE_REDUCED, partitions=len(reps))


def enumerate_spectrum_naive(params: CodeParams, chunk: int = 4096) -> WeightSpectrum:
    """
    Oráculo: tabula cada codeword como combinación de las tablas de la base.
    Pensado para dim <= 12.
    """
    p, dim = params.p, params.dim
    tables = code_tables(params).astype(np.int64)
    powers = p ** np.arange(dim, dtype=np.int64)
    counts = np.zeros(params.length + 1, dtype=np.int64)
    for start in range(0, params.size, chunk):
        indices = np.arange(start, min(start + chunk, params.size), dtype=np.int64)
        digits = (indices[:, None] // powers[None, :]) % p
        values = (digits @ tables) % p
        counts += np.bincount(np.count_nonzero(values, axis=1), minlength=params.length + 1)
    return WeightSpectrum.from_counts(params, {w: int(c) for w, c in enumerate(counts) if c})


def weight_set(spectrum: WeightSpectrum) -> List[PExactRational]:
    """Pesos relativos con conteo no nulo, ordenados y sin duplicados."""
    p, m = spectrum.params.p, spectrum.params.m
    return sorted({PExactRational.from_count(w, p, m) for w, c in spectrum.counts if c})


def weight_union(spectra: Iterable[WeightSpectrum]) -> List[PExactRational]:
    """Unión de conjuntos de pesos: aproximación finita de W_p(r)."""
    union = set()
    for spectrum in spectra:
        union.update(weight_set(spectrum))
    return sorted(union)
