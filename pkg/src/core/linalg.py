"""
linalg.py
Álgebra lineal exacta sobre F_p con listas de enteros.

Las matrices del toolkit son diminutas (m <= 10, dim <= 30), así que la
eliminación gaussiana en Python puro es suficiente y exacta.
"""

from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def inverse_mod(a: int, p: int) -> int:
    """Inverso multiplicativo de a módulo p."""
    return pow(a % p, -1, p)


def rref(rows: Sequence[Sequence[int]], p: int) -> Tuple[Matrix, List[int]]:
    """
    Forma escalonada reducida por filas sobre F_p.

    Args:
        rows: Filas de la matriz (entradas en cualquier entero)
        p (int): Primo

    Returns:
        (filas no nulas de la RREF, columnas pivote)
    """
    matrix = [[value % p for value in row] for row in rows]
    if not matrix:
        return [], []
    n_cols = len(matrix[0])
    pivots: List[int] = []
    row_index = 0
    for col in range(n_cols):
        pivot = next((r for r in range(row_index, len(matrix)) if matrix[r][col]), None)
        if pivot is None:
            continue
        matrix[row_index], matrix[pivot] = matrix[pivot], matrix[row_index]
        inv = inverse_mod(matrix[row_index][col], p)
        matrix[row_index] = [(value * inv) % p for value in matrix[row_index]]
        for r in range(len(matrix)):
            if r != row_index and matrix[r][col]:
                factor = matrix[r][col]
                matrix[r] = [(a - factor * b) % p for a, b in zip(matrix[r], matrix[row_index])]
        pivots.append(col)
        row_index += 1
        if row_index == len(matrix):
            break
    return matrix[:row_index], pivots


def rank_mod(rows: Sequence[Sequence[int]], p: int) -> int:
    return len(rref(rows, p)[1])


def nullspace(rows: Sequence[Sequence[int]], n_cols: int, p: int) -> Matrix:
    """Base (en RREF) de {v : A v = 0}."""
    reduced, pivots = rref(rows, p) if rows else ([], [])
    free = [c for c in range(n_cols) if c not in pivots]
    basis: Matrix = []
    for f in free:
        vector = [0] * n_cols
        vector[f] = 1
        for row, pc in zip(reduced, pivots):
            vector[pc] = (-row[f]) % p
        basis.append(vector)
    return rref(basis, p)[0] if basis else []

