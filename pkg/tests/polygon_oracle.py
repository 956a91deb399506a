"""Independent oracle: subdivisions of a convex polygon as non-crossing diagonal sets."""

from itertools import combinations


def diagonals(n: int) -> list[tuple[int, int]]:
    """Diagonals ``(i, j)`` of a convex ``n``-gon with 1-based cyclic labels."""
    return [(i, j) for i, j in combinations(range(1, n + 1), 2) if j - i not in (1, n - 1)]


def crossing(a: tuple[int, int], b: tuple[int, int]) -> bool:
    (i, j), (k, l) = sorted(a), sorted(b)
    return i < k < j < l or k < i < l < j


def noncrossing_sets(n: int) -> list[tuple[tuple[int, int], ...]]:
    """All sets of pairwise non-crossing diagonals (faces of the associahedron)."""
    diags = diagonals(n)
    out = []
    for r in range(0, n - 2):
        for combo in combinations(diags, r):
            if all(not crossing(a, b) for a, b in combinations(combo, 2)):
                out.append(combo)
    return out


def cells_of(n: int, diagonal_set) -> tuple[tuple[int, ...], ...]:
    """Cells obtained by cutting the polygon along the diagonals."""
    cells = [tuple(range(1, n + 1))]
    for a, b in diagonal_set:
        for idx, cell in enumerate(cells):
            if a in cell and b in cell:
                i, j = cell.index(a), cell.index(b)
                i, j = min(i, j), max(i, j)
                first = cell[i : j + 1]
                second = cell[j:] + cell[: i + 1]
                cells[idx : idx + 1] = [first, second]
                break
    return tuple(sorted(tuple(sorted(c)) for c in cells))


def code(diagonal_set) -> str:
    """Diagonal-list code such as ``"13 14"``; the empty set is ``"∅"``."""
    if not diagonal_set:
        return "∅"
    return " ".join(f"{a}{b}" for a, b in sorted(diagonal_set))
