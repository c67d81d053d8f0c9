"""
errors.py
Jerarquía de excepciones del toolkit GRM.

Todas las operaciones de la librería lanzan subclases de GRMError; la CLI
las traduce a códigos de salida (1 = error de dominio, 2 = error de uso).

Uso:
    try:
        table = tabulate(f, budget)
    except BudgetExceeded as e:
        print(e.to_dict())
"""

from typing import Any, Dict


class GRMError(Exception):
    """Error base de dominio."""

    kind = "domain_error"
    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Objeto de error legible por máquina."""
        payload: Dict[str, Any] = {"type": self.kind, "message": self.message}
        for key, value in sorted(self.details.items()):
            payload[key] = value if isinstance(value, (int, str, bool, list)) else str(value)
        return payload


class FieldError(GRMError):
    """Primo no soportado o no primo."""

    kind = "unsupported_prime"


class ParseError(GRMError):
    """Error de sintaxis o índice de variable fuera de rango."""

    kind = "parse_error"


class DimensionMismatch(GRMError):
    kind = "dimension_mismatch"


class SingularMapError(GRMError):
    kind = "singular_map"


class BudgetExceeded(GRMError):
    """El cálculo excede el presupuesto configurado (incluye el tamaño requerido)."""

    kind = "budget_exceeded"


class ParamsMismatch(GRMError):
    kind = "params_mismatch"


class SpectrumIncomplete(GRMError):
    """La suma de conteos no es p^dim: se perdió una partición."""

    kind = "spectrum_incomplete"


class CacheCorruptError(GRMError):
    kind = "cache_corrupt"


class InternalError(GRMError):
    """Violación de un teorema incondicional: sólo puede ser un bug."""

    kind = "internal_error"


class UsageError(GRMError):
    kind = "usage_error"
    exit_code = 2
