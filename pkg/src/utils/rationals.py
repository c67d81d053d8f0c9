"""
rationals.py
Entrada y salida de racionales exactos.

Los documentos emitidos nunca contienen flotantes: todo racional se escribe
como "a/b". La entrada acepta "a/b" o enteros y rechaza decimales, porque
la p-racionalidad no se puede decidir desde un flotante.

Uso:
    alpha = parse_fraction("1/2")
    format_fraction(alpha)   # "1/2"
"""

import re
from fractions import Fraction
from typing import List

from core.errors import UsageError

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_fraction(text: str) -> Fraction:
    """
    Convierte "a/b" o "a" en un Fraction exacto.

    Args:
        text (str): Texto de entrada

    Returns:
        Fraction: Valor exacto reducido

    Raises:
        UsageError: Si el texto es decimal, científico o está mal formado
    """
    if isinstance(text, float):
        raise UsageError(f"no se aceptan flotantes: {text!r}; use a/b")
    match = _FRACTION_RE.match(str(text))
    if not match:
        raise UsageError(f"racional inválido {text!r}: use la forma a/b (sin decimales)")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise UsageError(f"denominador cero en {text!r}")
    return Fraction(numerator, denominator)


def parse_fraction_list(text: str) -> List[Fraction]:
    """Lista separada por comas: "1/2, 1/2, 0"."""
    parts = [part for part in str(text).split(",") if part.strip()]
    if not parts:
        raise UsageError("lista de racionales vacía")
    return [parse_fraction(part) for part in parts]


def format_fraction(value: Fraction) -> str:
    """Siempre "a/b", incluso para enteros ("0/1", "1/1")."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"
