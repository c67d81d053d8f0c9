"""
field_poly.py
Aritmética exacta en F_p y polinomios multivariados reducidos.

Este módulo es la base de todo el toolkit: los codewords de RM_p(r,m) son
funciones F_p^m -> F_p, así que los polinomios se guardan siempre en el
anillo reducido F_p[x]/(x_i^p - x_i) (exponentes en [0, p-1]).

Características:
- Parser de expresiones ("x1*x2 + 1", "x1^2 - x2^2", paréntesis)
- Impresión canónica y forma JSON canónica
- Evaluación puntual y tabulación incremental sobre F_p^m (numpy)
- Sustitución afín x -> A x + t
- Base de monomios en orden graduado lexicográfico

Convención de índices: el punto x = (x_1,...,x_m) vive en el índice
sum x_i * p^(i-1), es decir x_1 es el dígito menos significativo.

Uso:
    f = parse_polynomial("x1*x2 + x3*x4", p=2, m=4)
    table = tabulate(f)
    table.nonzero_count()   # 6
"""

import logging
import random
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import DimensionMismatch, FieldError, ParseError, SingularMapError
from core.linalg import rank_mod

logger = logging.getLogger(__name__)

SUPPORTED_PRIMES = (2, 3, 5, 7)

Exponents = Tuple[int, ...]


@dataclass(frozen=True)
class FieldParams:
    """Cuerpo primo F_p (p en 2, 3, 5, 7)."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2 or any(self.p % d == 0 for d in range(2, int(self.p ** 0.5) + 1)):
            raise FieldError(f"p={self.p} no es primo", p=str(self.p))
        if self.p not in SUPPORTED_PRIMES:
            raise FieldError(f"p={self.p} no soportado (primos soportados: {SUPPORTED_PRIMES})", p=self.p)


class _ZeroDegree:
    """Marcador de grado del polinomio cero: ZERO <= r para todo r >= 0."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __le__(self, other):
        return True

    def __lt__(self, other):
        return other is not self

    def __ge__(self, other):
        return other is self

    def __gt__(self, other):
        return False

    def __repr__(self):
        return "ZERO"

    def __reduce__(self):
        return (_ZeroDegree, ())


ZERO = _ZeroDegree()
Degree = Union[int, _ZeroDegree]


def reduce_exponent(e: int, p: int) -> int:
    """Reducción funcional x^e = x^(((e-1) mod (p-1)) + 1) para e >= 1."""
    if e < 0:
        raise ParseError(f"exponente negativo {e}")
    return 0 if e == 0 else ((e - 1) % (p - 1)) + 1


@dataclass(frozen=True)
class Polynomial:
    """
    Polinomio reducido sobre F_p en m variables.

    `terms` es la tupla canónica de pares (exponentes, coeficiente) ordenada
    lexicográficamente por exponentes, sin coeficientes nulos; dos
    polinomios son iguales si y sólo si sus tuplas canónicas coinciden.
    """

    params: FieldParams
    m: int
    terms: Tuple[Tuple[Exponents, int], ...] = ()

    @property
    def p(self) -> int:
        return self.params.p

    @classmethod
    def from_terms(cls, p: int, m: int, terms: Union[Mapping[Exponents, int], Iterable[Tuple[Exponents, int]]]) -> "Polynomial":
        """
        Construye la forma canónica reducida.

        Args:
            p (int): Primo del cuerpo
            m (int): Número de variables
            terms: Mapeo o iterable (exponentes -> coeficiente), sin reducir

        Returns:
            Polynomial: Polinomio con exponentes en [0, p-1] y coeficientes mod p
        """
        params = FieldParams(p)
        if m < 0:
            raise DimensionMismatch(f"número de variables negativo: {m}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        accumulated: Dict[Exponents, int] = {}
        for exps, coeff in items:
            exps = tuple(exps)
            if len(exps) != m:
                raise DimensionMismatch(f"monomio {exps} no tiene {m} exponentes")
            key = tuple(reduce_exponent(e, p) for e in exps)
            accumulated[key] = (accumulated.get(key, 0) + coeff) % p
        canonical = tuple(sorted((k, v) for k, v in accumulated.items() if v))
        return cls(params, m, canonical)

    @classmethod
    def zero(cls, p: int, m: int) -> "Polynomial":
        return cls(FieldParams(p), m, ())

    @classmethod
    def constant(cls, p: int, m: int, value: int) -> "Polynomial":
        return cls.from_terms(p, m, {(0,) * m: value})

    @classmethod
    def variable(cls, p: int, m: int, index: int) -> "Polynomial":
        """x_index con índice 1-based."""
        if not 1 <= index <= m:
            raise ParseError(f"variable x{index} fuera de rango (m={m})")
        exps = [0] * m
        exps[index - 1] = 1
        return cls.from_terms(p, m, {tuple(exps): 1})

    def as_dict(self) -> Dict[Exponents, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exps) for exps, _ in self.terms)

    def constant_term(self) -> int:
        return self.as_dict().get((0,) * self.m, 0)

    def _check_compatible(self, other: "Polynomial") -> None:
        if self.p != other.p or self.m != other.m:
            raise DimensionMismatch(f"polinomios incompatibles: (p={self.p}, m={self.m}) vs (p={other.p}, m={other.m})")

    def __add__(self, other: Union["Polynomial", int]) -> "Polynomial":
        if isinstance(other, int):
            other = Polynomial.constant(self.p, self.m, other)
        self._check_compatible(other)
        return Polynomial.from_terms(self.p, self.m, list(self.terms) + list(other.terms))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1)

    def __sub__(self, other: Union["Polynomial", int]) -> "Polynomial":
        if isinstance(other, int):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other: int) -> "Polynomial":
        return (-self) + other

    def scale(self, c: int) -> "Polynomial":
        return Polynomial.from_terms(self.p, self.m, [(e, c * v) for e, v in self.terms])

    def __mul__(self, other: Union["Polynomial", int]) -> "Polynomial":
        if isinstance(other, int):
            return self.scale(other)
        self._check_compatible(other)
        product: Dict[Exponents, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                key = tuple(reduce_exponent(a + b, self.p) for a, b in zip(e1, e2))
                product[key] = (product.get(key, 0) + c1 * c2) % self.p
        return Polynomial.from_terms(self.p, self.m, product)

    __rmul__ = __mul__

    def power(self, e: int) -> "Polynomial":
        """f^e como función: f^0 = 1 y f^e = f^(((e-1) mod (p-1)) + 1)."""
        result = Polynomial.constant(self.p, self.m, 1)
        for _ in range(reduce_exponent(e, self.p)):
            result = result * self
        return result

    def __str__(self) -> str:
        return format_polynomial(self)


# ========== PARSER E IMPRESIÓN ==========

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|x(\d+)|(.))")


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens: List[Tuple[str, str]] = []
    position = 0
    text = text.rstrip()
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if not match or match.end() == position:
            raise ParseError(f"carácter inesperado en la posición {position}: {text[position:]!r}")
        number, var_index, symbol = match.groups()
        if number is not None:
            tokens.append(("int", number))
        elif var_index is not None:
            tokens.append(("var", var_index))
        elif symbol in "+-*^()":
            tokens.append(("op", symbol))
        else:
            raise ParseError(f"símbolo inválido {symbol!r} en la posición {match.start(3)}")
        position = match.end()
    return tokens


class _Parser:
    """Descenso recursivo: expr := term (('+'|'-') term)*, term := factor ('*' factor)*."""

    def __init__(self, tokens: List[Tuple[str, str]], p: int, m: int):
        self.tokens = tokens
        self.position = 0
        self.p = p
        self.m = m

    def peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.position] if self.position < len(self.tokens) else None

    def take(self) -> Tuple[str, str]:
        token = self.peek()
        if token is None:
            raise ParseError("fin de expresión inesperado")
        self.position += 1
        return token

    def expect(self, symbol: str) -> None:
        token = self.take()
        if token != ("op", symbol):
            raise ParseError(f"se esperaba {symbol!r} y se encontró {token[1]!r}")

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise ParseError("expresión vacía")
        result = self.expression()
        if self.peek() is not None:
            raise ParseError(f"token sobrante {self.peek()[1]!r}")
        return result

    def expression(self) -> Polynomial:
        result = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, symbol = self.take()
            operand = self.term()
            result = result + operand if symbol == "+" else result - operand
        return result

    def term(self) -> Polynomial:
        result = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            result = result * self.factor()
        return result

    def factor(self) -> Polynomial:
        if self.peek() == ("op", "-"):
            self.take()
            return -self.factor()
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, value = self.take()
            if kind != "int":
                raise ParseError(f"el exponente debe ser un entero, no {value!r}")
            return base.power(int(value))
        return base

    def atom(self) -> Polynomial:
        kind, value = self.take()
        if kind == "int":
            return Polynomial.constant(self.p, self.m, int(value))
        if kind == "var":
            index = int(value)
            if index == 0 or index > self.m:
                raise ParseError(f"variable x{index} fuera de rango 1..{self.m}", variable=index)
            return Polynomial.variable(self.p, self.m, index)
        if value == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        raise ParseError(f"token inesperado {value!r}")


def parse_polynomial(text: str, p: int, m: int) -> Polynomial:
    """
    Convierte una expresión de texto en el polinomio canónico reducido.

    Args:
        text (str): Expresión con variables x1..xm, enteros, +, -, *, ^ y paréntesis
        p (int): Primo
        m (int): Número de variables

    Returns:
        Polynomial: Coeficientes mod p y exponentes reducidos por x^p = x

    Examples:
        >>> parse_polynomial("x1^3", p=3, m=1)   # x1
        >>> parse_polynomial("2*x1 + 4*x1", p=3, m=1)   # 0
    """
    FieldParams(p)
    return _Parser(_tokenize(text), p, m).parse()


def _graded_key(exps: Exponents) -> Tuple[int, Tuple[int, ...]]:
    return sum(exps), tuple(-e for e in exps)


def format_polynomial(f: Polynomial) -> str:
    """Texto canónico: grado mayor primero, "0" para el polinomio cero."""
    if f.is_zero():
        return "0"
    pieces = []
    for exps, coeff in sorted(f.terms, key=lambda t: (-sum(t[0]), _graded_key(t[0])[1])):
        factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(exps) if e]
        if not factors:
            pieces.append(str(coeff))
        elif coeff == 1:
            pieces.append("*".join(factors))
        else:
            pieces.append(f"{coeff}*" + "*".join(factors))
    return " + ".join(pieces)


def polynomial_to_json(f: Polynomial) -> Dict:
    """Forma JSON canónica: términos ordenados lexicográficamente por exponentes."""
    return {
        "p": f.p,
        "m": f.m,
        "terms": [{"coeff": coeff, "exps": list(exps)} for exps, coeff in f.terms],
    }


def polynomial_from_json(data: Mapping) -> Polynomial:
    try:
        return Polynomial.from_terms(
            int(data["p"]), int(data["m"]), [(tuple(t["exps"]), int(t["coeff"])) for t in data["terms"]]
        )
    except (KeyError, TypeError) as e:
        raise ParseError(f"JSON de polinomio inválido: {e}")


# ========== EVALUACIÓN Y TABULACIÓN ==========

def total_degree(f: Polynomial) -> Degree:
    """Grado total reducido; ZERO para el polinomio cero."""
    if f.is_zero():
        return ZERO
    return max(sum(exps) for exps, _ in f.terms)


def evaluate(f: Polynomial, x: Sequence[int]) -> int:
    """
    Evalúa f en un punto de F_p^m.

    Args:
        f (Polynomial): Polinomio
        x (Sequence[int]): Punto con m coordenadas

    Returns:
        int: f(x) en [0, p-1]
    """
    if len(x) != f.m:
        raise DimensionMismatch(f"el punto tiene {len(x)} coordenadas y f tiene m={f.m}")
    p = f.p
    total = 0
    for exps, coeff in f.terms:
        value = coeff
        for xi, e in zip(x, exps):
            if e:
                value = (value * pow(xi % p, e, p)) % p
        total += value
    return total % p


def point_index(x: Sequence[int], p: int) -> int:
    """Índice de un punto: x_1 es el dígito menos significativo."""
    return sum((xi % p) * p ** i for i, xi in enumerate(x))


def index_point(index: int, p: int, m: int) -> Tuple[int, ...]:
    return tuple((index // p ** i) % p for i in range(m))


@lru_cache(maxsize=64)
def coordinate_digits(p: int, m: int) -> np.ndarray:
    """Matriz (m, p^m) con digits[i, idx] = coordenada x_{i+1} del punto idx (sólo lectura)."""
    indices = np.arange(p ** m, dtype=np.int64)
    digits = np.empty((m, p ** m), dtype=np.uint8)
    for i in range(m):
        digits[i] = (indices // p ** i) % p
    digits.setflags(write=False)
    return digits


def monomial_table(p: int, m: int, exps: Exponents) -> np.ndarray:
    """Valores del monomio x^exps en los p^m puntos (int64, en [0, p-1])."""
    digits = coordinate_digits(p, m)
    values = np.ones(p ** m, dtype=np.int64)
    for i, e in enumerate(exps):
        if e:
            values = (values * np.power(digits[i].astype(np.int64), e)) % p
    return values


@dataclass(frozen=True, eq=False)
class EvaluationTable:
    """
    Tabla empaquetada de los p^m valores de un polinomio.

    Para p = 2 el conteo de no nulos usa la máscara empaquetada y
    np.bitwise_count; para p impar, un único pase np.count_nonzero.
    """

    params: FieldParams
    m: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.values) != self.params.p ** self.m:
            raise DimensionMismatch(f"la tabla tiene {len(self.values)} entradas, se esperaban {self.params.p ** self.m}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EvaluationTable)
            and self.params == other.params
            and self.m == other.m
            and np.array_equal(self.values, other.values)
        )

    def __len__(self) -> int:
        return len(self.values)

    @cached_property
    def packed(self) -> np.ndarray:
        """Máscara de los puntos no nulos en bytes (bit idx = punto idx)."""
        return np.packbits(self.values != 0, bitorder="little")

    def nonzero_count(self) -> int:
        if self.params.p == 2:
            return int(np.bitwise_count(self.packed).sum())
        return int(np.count_nonzero(self.values))


def tabulate(f: Polynomial, budget=None) -> EvaluationTable:
    """
    Tabula f sobre F_p^m acumulando una tabla de monomio por término.

    Args:
        f (Polynomial): Polinomio
        budget (Budget): Presupuesto; si se omite no se limita

    Returns:
        EvaluationTable: values[idx(x)] = f(x)

    Raises:
        BudgetExceeded: Si p^m supera el presupuesto (informa el tamaño requerido)
    """
    size = f.p ** f.m
    if budget is not None:
        budget.check_points(size)
    accumulator = np.zeros(size, dtype=np.int64)
    for exps, coeff in f.terms:
        accumulator += coeff * monomial_table(f.p, f.m, exps)
    values = (accumulator % f.p).astype(np.uint8)
    values.setflags(write=False)
    return EvaluationTable(f.params, f.m, values)


# ========== BASE DE MONOMIOS ==========

@lru_cache(maxsize=256)
def monomial_basis(p: int, r: int, m: int) -> Tuple[Exponents, ...]:
    """
    Monomios reducidos de grado total <= r en orden graduado lexicográfico.

    Returns:
        Tupla de vectores de exponentes; 1, x1, x2, ..., x1^2, x1*x2, ...
    """
    exps_range = range(p)
    monomials: List[Exponents] = []

    def build(prefix: List[int], remaining: int):
        if len(prefix) == m:
            monomials.append(tuple(prefix))
            return
        for e in exps_range:
            if e > remaining:
                break
            build(prefix + [e], remaining - e)

    build([], r)
    return tuple(sorted(monomials, key=_graded_key))


def coefficient_vector(f: Polynomial, r: int) -> List[int]:
    """Coordenadas de f en la base de monomios de RM_p(r,m)."""
    basis = monomial_basis(f.p, r, f.m)
    position = {exps: i for i, exps in enumerate(basis)}
    vector = [0] * len(basis)
    for exps, coeff in f.terms:
        if exps not in position:
            raise DimensionMismatch(f"el monomio {exps} excede el grado {r}")
        vector[position[exps]] = coeff
    return vector


def from_coefficient_vector(p: int, r: int, m: int, vector: Sequence[int]) -> Polynomial:
    basis = monomial_basis(p, r, m)
    if len(vector) != len(basis):
        raise DimensionMismatch(f"el vector tiene {len(vector)} coordenadas, dim={len(basis)}")
    return Polynomial.from_terms(p, m, [(exps, int(c)) for exps, c in zip(basis, vector) if c])


def from_coefficient_index(p: int, r: int, m: int, index: int) -> Polynomial:
    """Polinomio cuyo vector de coeficientes tiene dígitos base p = index (dígito 0 primero)."""
    dim = len(monomial_basis(p, r, m))
    return from_coefficient_vector(p, r, m, [(index // p ** j) % p for j in range(dim)])


def random_polynomial(p: int, m: int, r: int, rng: random.Random, exact_degree: bool = False) -> Polynomial:
    """Polinomio aleatorio de grado <= r (o exactamente r) con semilla reproducible."""
    basis = monomial_basis(p, r, m)
    while True:
        f = Polynomial.from_terms(p, m, [(exps, rng.randrange(p)) for exps in basis])
        if not exact_degree or total_degree(f) == r:
            return f


# ========== MAPAS AFINES ==========

@dataclass(frozen=True)
class AffineMap:
    """x -> L x + t sobre F_p^m con L invertible."""

    p: int
    linear: Tuple[Tuple[int, ...], ...]
    translation: Tuple[int, ...]

    def __post_init__(self):
        m = len(self.linear)
        if any(len(row) != m for row in self.linear) or len(self.translation) != m:
            raise DimensionMismatch("la parte lineal debe ser m x m y la traslación de longitud m")
        if m and rank_mod(self.linear, self.p) != m:
            raise SingularMapError("la parte lineal del mapa afín es singular sobre F_p")

    @property
    def m(self) -> int:
        return len(self.linear)

    @classmethod
    def build(cls, p: int, linear: Sequence[Sequence[int]], translation: Optional[Sequence[int]] = None) -> "AffineMap":
        m = len(linear)
        rows = tuple(tuple(v % p for v in row) for row in linear)
        shift = tuple(v % p for v in (translation if translation is not None else [0] * m))
        return cls(p, rows, shift)

    @classmethod
    def identity(cls, p: int, m: int, translation: Optional[Sequence[int]] = None) -> "AffineMap":
        return cls.build(p, [[int(i == j) for j in range(m)] for i in range(m)], translation)

    @classmethod
    def swap(cls, p: int, m: int, i: int, j: int) -> "AffineMap":
        """Intercambia x_i y x_j (1-based)."""
        order = list(range(m))
        order[i - 1], order[j - 1] = order[j - 1], order[i - 1]
        return cls.build(p, [[int(order[r] == c) for c in range(m)] for r in range(m)])


def apply_affine(f: Polynomial, A: AffineMap) -> Polynomial:
    """
    Devuelve el polinomio reducido f(A(x)).

    La sustitución preserva el peso: la tabla del resultado es una
    permutación de la tabla de f, y el grado nunca aumenta.
    """
    if A.m != f.m or A.p != f.p:
        raise DimensionMismatch(f"mapa afín de dimensión {A.m} sobre F_{A.p} para f con m={f.m} sobre F_{f.p}")
    images = [
        Polynomial.from_terms(
            f.p, f.m, [(tuple(int(i == j) for i in range(f.m)), coeff) for j, coeff in enumerate(row)] + [((0,) * f.m, t)]
        )
        for row, t in zip(A.linear, A.translation)
    ]
    result = Polynomial.zero(f.p, f.m)
    for exps, coeff in f.terms:
        term = Polynomial.constant(f.p, f.m, coeff)
        for image, e in zip(images, exps):
            if e:
                term = term * image.power(e)
        result = result + term
    return result


def random_affine_map(p: int, m: int, rng: random.Random) -> AffineMap:
    """Mapa afín invertible aleatorio (rechazo hasta obtener rango completo)."""
    while True:
        linear = [[rng.randrange(p) for _ in range(m)] for _ in range(m)]
        if m == 0 or rank_mod(linear, p) == m:
            return AffineMap.build(p, linear, [rng.randrange(p) for _ in range(m)])
