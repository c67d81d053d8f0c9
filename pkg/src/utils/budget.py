"""
budget.py
Límites de cómputo para tabulación, enumeración y búsquedas exhaustivas.

Los límites vienen de config/settings.yaml (sección budget) o del flag
--budget de la CLI. La tabulación además consulta la memoria disponible
con psutil para no intentar tablas imposibles.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict

import psutil

from core.errors import BudgetExceeded

# Defaults de escritorio: RM_2(3,5) cabe (2^26 palabras x 32 puntos).
DEFAULT_BUDGET = {
    "max_points": 2 ** 20,
    "max_codewords": 2 ** 27,
    "max_ops": 2 ** 33,
    "max_candidates": 2 ** 20,
    "max_iterations": 64,
}


@dataclass(frozen=True)
class Budget:
    """Presupuesto de cómputo inmutable."""

    max_points: int = DEFAULT_BUDGET["max_points"]
    max_codewords: int = DEFAULT_BUDGET["max_codewords"]
    max_ops: int = DEFAULT_BUDGET["max_ops"]
    max_candidates: int = DEFAULT_BUDGET["max_candidates"]
    max_iterations: int = DEFAULT_BUDGET["max_iterations"]

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "Budget":
        """Construye el presupuesto desde el diccionario plano de configuración."""
        return cls(**{key: int(config.get(f"budget_{key}", value)) for key, value in DEFAULT_BUDGET.items()})

    def with_codewords(self, limit: int) -> "Budget":
        """Aplica --budget N: fija max_codewords y escala max_ops y candidatos."""
        if limit <= 0:
            raise ValueError("el presupuesto debe ser positivo")
        return replace(
            self,
            max_codewords=limit,
            max_ops=max(self.max_ops, limit * 64),
            max_candidates=limit,
        )

    def check_points(self, points: int) -> None:
        """Verifica que una tabla de `points` entradas cabe en memoria y en presupuesto."""
        if points > self.max_points:
            raise BudgetExceeded(
                f"la tabla requiere {points} puntos (límite {self.max_points})",
                required_points=points,
                limit=self.max_points,
            )
        available = psutil.virtual_memory().available
        if points > available // 4:
            raise BudgetExceeded(
                f"la tabla requiere {points} bytes y sólo hay {available} disponibles",
                required_points=points,
                available_bytes=available,
            )

    def check_enumeration(self, dim: int, codewords: int, points: int) -> None:
        """Verifica una enumeración completa de `codewords` palabras de longitud `points`."""
        cost = codewords * points
        if codewords > self.max_codewords or cost > self.max_ops:
            raise BudgetExceeded(
                f"enumerar {codewords} palabras (dim={dim}) cuesta ~{cost} operaciones",
                dim=dim,
                codewords=codewords,
                estimated_cost=cost,
                limit_codewords=self.max_codewords,
                limit_ops=self.max_ops,
            )
