"""k-subsets of the projected unit vectors: the determinant sum and the max-determinant choice.

With x_1..x_n the columns of the k x n generator matrix, the zonotope
sum_j [-x_j, x_j] = (B_1^n ∩ H)° has volume 2^k sum_sigma |det(x_j)_{j in sigma}|.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, Optional

import numpy as np
from pydantic import BaseModel

from lozvol import config
from lozvol.defaults import setting
from lozvol.errors import EnumerationCapError, RankDeficiencyError, SelectionMethod
from lozvol.pipeline.embedding import ProjectionFrame
from lozvol.ui.logging_config import logger


class SubsetSelection(BaseModel):
    """sigma holds 0-based column indices in increasing order."""
    sigma: list[int]
    abs_det: float
    method: SelectionMethod


def _chunks(n: int, k: int, chunk_size: int) -> Iterator[np.ndarray]:
    combos = itertools.combinations(range(n), k)
    while True:
        chunk = list(itertools.islice(combos, chunk_size))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp)


def _check_cap(n: int, k: int, cap: int) -> int:
    count = math.comb(n, k)
    if count > cap:
        raise EnumerationCapError(count, cap)
    return count


def subset_determinants(generators: np.ndarray, cap: Optional[int] = None,
                        chunk_size: Optional[int] = None) -> np.ndarray:
    """|det| of every k-subset of columns, in lexicographic subset order."""
    cap = setting("enumeration.cap") if cap is None else cap
    chunk_size = setting("enumeration.chunk_size") if chunk_size is None else chunk_size
    x = np.asarray(generators, dtype=float)
    k, n = x.shape
    _check_cap(n, k, cap)

    def dets(idx: np.ndarray) -> np.ndarray:
        # (m, k, k) stack of column submatrices
        return np.abs(np.linalg.det(np.transpose(x[:, idx], (1, 0, 2))))

    threads = config.get_threads()
    if threads <= 1:
        parts = [dets(idx) for idx in _chunks(n, k, chunk_size)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(dets, _chunks(n, k, chunk_size)))
    return np.concatenate(parts)


def polar_zonotope_volume(frame: ProjectionFrame, k: Optional[int] = None,
                          cap: Optional[int] = None) -> float:
    """|(B_1^n ∩ H)°| = 2^k sum over k-subsets of |det|."""
    k = frame.k if k is None else k
    if k != frame.k:
        raise RankDeficiencyError(f"frame has dimension {frame.k}, asked for k = {k}")
    values = subset_determinants(frame.x, cap=cap)
    return 2.0 ** k * math.fsum(values)


def _exact_selection(x: np.ndarray, cap: Optional[int]) -> SubsetSelection:
    k, n = x.shape
    values = subset_determinants(x, cap=cap)
    best = float(values.max())
    if best <= 0:
        raise RankDeficiencyError("every k-subset of generators is singular")
    first = int(np.argmax(values >= best * (1.0 - 1e-12)))
    sigma = next(itertools.islice(itertools.combinations(range(n), k), first, None))
    return SubsetSelection(sigma=list(sigma), abs_det=float(values[first]), method=SelectionMethod.EXACT)


def _greedy_selection(x: np.ndarray) -> SubsetSelection:
    """Pivoted Gram-Schmidt: repeatedly take the column with the largest residual."""
    k, n = x.shape
    residual = x.copy()
    chosen: list[int] = []
    for _ in range(k):
        lengths = np.linalg.norm(residual, axis=0)
        lengths[chosen] = -1.0
        top = lengths.max()
        if top <= 1e-14:
            raise RankDeficiencyError("every k-subset of generators is singular")
        pivot = int(np.argmax(lengths >= top * (1.0 - 1e-12)))
        q = residual[:, pivot] / lengths[pivot]
        residual -= np.outer(q, q @ residual)
        chosen.append(pivot)
    sigma = sorted(chosen)
    abs_det = float(abs(np.linalg.det(x[:, sigma])))
    return SubsetSelection(sigma=sigma, abs_det=abs_det, method=SelectionMethod.GREEDY)


def select_max_det_subset(frame: ProjectionFrame, k: Optional[int] = None,
                          method: SelectionMethod = SelectionMethod.EXACT,
                          cap: Optional[int] = None) -> SubsetSelection:
    """sigma maximising |det(x_j)_{j in sigma}|; ties go to the lexicographically first subset."""
    k = frame.k if k is None else k
    if k != frame.k:
        raise RankDeficiencyError(f"frame has dimension {frame.k}, asked for k = {k}")
    method = SelectionMethod(method)
    x = frame.x
    if method == SelectionMethod.EXACT:
        selection = _exact_selection(x, cap)
    else:
        selection = _greedy_selection(x)
    logger.debug(f"{method.value} selection sigma={selection.sigma} |det|={selection.abs_det:.6g}")
    return selection
