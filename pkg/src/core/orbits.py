"""
orbits.py
Acción de sustituciones afines sobre vectores de coeficientes.

f -> f(A x + t) es lineal en los coeficientes, así que cada sustitución es
una matriz dim x dim sobre F_p. Con las matrices de un conjunto generador
se calculan las órbitas de todos los vectores por union-find.

Uso:
    gens = [substitution_matrix(p, r, m, A) for A in affine_generators(p, m)]
    labels = orbit_labels(p, dim, gens)   # labels[i] = menor índice de la órbita de i
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from core.field_poly import (
    AffineMap,
    apply_affine,
    coefficient_vector,
    monomial_basis,
    Polynomial,
)

logger = logging.getLogger(__name__)

PRIMITIVE_ROOTS = {2: 1, 3: 2, 5: 2, 7: 3}


def substitution_matrix(p: int, r: int, m: int, A: AffineMap) -> np.ndarray:
    """
    Matriz M con coefficient_vector(f o A) = M . coefficient_vector(f).

    La columna j es la imagen del j-ésimo monomio de la base.
    """
    basis = monomial_basis(p, r, m)
    matrix = np.zeros((len(basis), len(basis)), dtype=np.int64)
    for j, exps in enumerate(basis):
        image = apply_affine(Polynomial.from_terms(p, m, {exps: 1}), A)
        matrix[:, j] = coefficient_vector(image, r)
    return matrix


def cycle_map(p: int, m: int) -> AffineMap:
    """x_1 -> x_2 -> ... -> x_m -> x_1."""
    return AffineMap.build(p, [[int(c == (row + 1) % m) for c in range(m)] for row in range(m)])


def scaling_map(p: int, m: int) -> AffineMap:
    """x_1 -> g x_1 con g raíz primitiva de F_p."""
    linear = [[int(r == c) for c in range(m)] for r in range(m)]
    linear[0][0] = PRIMITIVE_ROOTS[p]
    return AffineMap.build(p, linear)


def affine_generators(p: int, m: int) -> List[AffineMap]:
    """Generadores de AGL(m, p): permutaciones, transvección, escala y traslación."""
    if m == 0:
        return []
    generators = [AffineMap.identity(p, m, [1] + [0] * (m - 1))]
    if p > 2:
        generators.append(scaling_map(p, m))
    if m >= 2:
        transvection = [[int(r == c) for c in range(m)] for r in range(m)]
        transvection[0][1] = 1
        generators.extend([AffineMap.swap(p, m, 1, 2), cycle_map(p, m), AffineMap.build(p, transvection)])
    return generators


def monomial_generators(p: int, m: int) -> List[AffineMap]:
    """Sustituciones que mandan monomios a múltiplos de monomios (permutaciones y escala)."""
    generators: List[AffineMap] = []
    if m >= 2:
        generators.extend([AffineMap.swap(p, m, 1, 2), cycle_map(p, m)])
    if p > 2 and m >= 1:
        generators.append(scaling_map(p, m))
    return generators


def index_digits(p: int, dim: int, indices: np.ndarray) -> np.ndarray:
    """Dígitos base p (dígito 0 primero) de cada índice: matriz (len, dim)."""
    powers = p ** np.arange(dim, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % p


def digits_index(p: int, digits: np.ndarray) -> np.ndarray:
    powers = p ** np.arange(digits.shape[1], dtype=np.int64)
    return (digits % p) @ powers


def orbit_labels(p: int, dim: int, generators: Sequence[np.ndarray], scalar_orbits: bool = False) -> np.ndarray:
    """
    Etiqueta cada vector de F_p^dim con el menor índice de su órbita.

    Args:
        p (int): Primo
        dim (int): Dimensión del espacio de coeficientes
        generators: Matrices dim x dim de la acción
        scalar_orbits (bool): Si True también identifica f con c.f (c != 0)

    Returns:
        np.ndarray: labels[i] = representante (menor índice) de la órbita de i
    """
    matrices = list(generators)
    if scalar_orbits and p > 2:
        matrices.append(np.eye(dim, dtype=np.int64) * PRIMITIVE_ROOTS[p])

    total = p ** dim
    digits = index_digits(p, dim, np.arange(total, dtype=np.int64))
    parent = list(range(total))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for matrix in matrices:
        images = digits_index(p, digits @ matrix.T).tolist()
        for i, j in enumerate(images):
            a, b = find(i), find(j)
            if a != b:
                # La raíz siempre es el menor índice de la componente
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    labels = np.array([find(i) for i in range(total)], dtype=np.int64)
    logger.debug(f"🔁 {len(np.unique(labels))} órbitas sobre {total} vectores")
    return labels


def representatives(labels: np.ndarray) -> np.ndarray:
    """Índices que son su propio representante, en orden creciente."""
    return np.flatnonzero(labels == np.arange(len(labels)))


def restrict(matrix: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    """Restricción de la acción a un subespacio de coordenadas invariante."""
    index = np.asarray(positions, dtype=np.int64)
    return matrix[np.ix_(index, index)]


def top_degree_positions(p: int, r: int, m: int, degree: Optional[int] = None) -> List[int]:
    """Posiciones en la base de los monomios de grado exactamente `degree` (r por defecto)."""
    degree = r if degree is None else degree
    return [i for i, exps in enumerate(monomial_basis(p, r, m)) if sum(exps) == degree]
