"""1-unconditional norms on R^n.

Norms are described by a small grammar: weighted l_p leaves combined by
max or sum over disjoint coordinate blocks. Coordinates are the
unconditional basis, so every norm here is invariant under sign changes
of coordinates and monotone in absolute values.

JSON form::

    {"kind": "lp", "p": 1.0 | "inf", "weights": [...]}
    {"kind": "max" | "sum", "blocks": [{"coords": [...], "norm": {...}}]}
"""

import itertools
import math
from typing import Annotated, Callable, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_serializer, field_validator, model_validator

from lozvol.errors import NormError
from lozvol.linalg_utils import check_full_column_rank, orthonormal_columns, sign_vectors

MAX_VERTICES = 2_000_000


def conjugate_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def as_points(v, dim: int) -> tuple[np.ndarray, bool]:
    """Validate a vector or a stack of vectors; returns (2-D array, was_1d)."""
    arr = np.asarray(v, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise NormError(f"dimension mismatch: expected length {dim}, got shape {np.shape(v)}")
    if not np.all(np.isfinite(arr)):
        raise NormError("vector has non-finite entries")
    return arr, single


class _NormBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def evaluate(self, v):
        """N(v) for one vector or row-wise for a stack of vectors."""
        pts, single = as_points(v, self.dim)
        values = self._eval(pts)
        return float(values[0]) if single else values

    def dual_evaluate(self, v):
        """N*(v) = sup{<v, a> : N(a) <= 1}."""
        pts, single = as_points(v, self.dim)
        values = self.dual()._eval(pts)
        return float(values[0]) if single else values

    def subgradients(self, v, eps: float = 0.0, max_generators: int = 4096) -> np.ndarray:
        """Generators of the eps-subdifferential of N at v (rows).

        Pieces within a relative eps of the active maximum count as active.
        """
        pts, _ = as_points(v, self.dim)
        return self._subgradients(pts[0], eps, max_generators)

    def gradient(self, v) -> np.ndarray:
        """A subgradient of N at v; ties are averaged."""
        return self.subgradients(v, 0.0).mean(axis=0)

    def dual_maximizer(self, a) -> np.ndarray:
        """A point x with N(x) <= 1 and <a, x> = N*(a)."""
        pts, _ = as_points(a, self.dim)
        return self._dual_maximizer(pts[0])

    def ball_vertices(self) -> np.ndarray:
        """Vertices of the unit ball; requires a polytopal norm."""
        if not self.is_polytopal:
            raise NormError("unit ball is not a polytope (some leaf has 1 < p < inf)")
        return self._ball_vertices()

    def dual_ball_vertices(self) -> np.ndarray:
        return self.dual().ball_vertices()

    def unit_vector_norms(self) -> np.ndarray:
        """N(e_i) for every coordinate."""
        return self._eval(np.eye(self.dim))

    def lozanovskii_weights(self) -> np.ndarray:
        """The maximiser of sum log lambda_i over lambda > 0 with N(lambda) <= 1.

        Solved leaf by leaf: the objective splits over blocks, and a block with
        budget r contributes m_b log r plus its own optimum.
        """
        return self._lozanovskii_weights()


class LpNorm(_NormBase):
    """Weighted l_p norm: (sum (w_i |a_i|)^p)^(1/p), max for p = inf."""
    kind: Literal["lp"] = "lp"
    p: float
    weights: list[float]

    @field_validator("p", mode="before")
    @classmethod
    def _parse_p(cls, value):
        if isinstance(value, str):
            if value.strip().lower() in ("inf", "infinity"):
                return math.inf
            raise ValueError(f"p must be a number >= 1 or \"inf\", got {value!r}")
        return value

    @field_validator("p")
    @classmethod
    def _check_p(cls, value: float) -> float:
        if math.isnan(value) or value < 1.0:
            raise ValueError(f"p must be >= 1, got {value}")
        return float(value)

    @field_validator("weights")
    @classmethod
    def _check_weights(cls, value: list[float]) -> list[float]:
        if len(value) == 0:
            raise ValueError("weights must not be empty")
        if not all(math.isfinite(w) and w > 0 for w in value):
            raise ValueError("weights must be positive and finite")
        return value

    @field_serializer("p")
    def _serialize_p(self, p: float):
        return "inf" if math.isinf(p) else p

    @classmethod
    def standard(cls, p, n: int) -> "LpNorm":
        return cls(p=p, weights=[1.0] * n)

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def is_polytopal(self) -> bool:
        return self.p == 1.0 or math.isinf(self.p) or self.dim == 1

    @property
    def _w(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def _eval(self, pts: np.ndarray) -> np.ndarray:
        a = np.abs(pts) * self._w
        if math.isinf(self.p):
            return a.max(axis=1)
        if self.p == 1.0:
            return a.sum(axis=1)
        scale = a.max(axis=1)
        safe = np.where(scale > 0, scale, 1.0)
        return scale * ((a / safe[:, None]) ** self.p).sum(axis=1) ** (1.0 / self.p)

    def dual(self) -> "LpNorm":
        return LpNorm(p=conjugate_exponent(self.p), weights=list(1.0 / self._w))

    def scaled(self, c: float) -> "LpNorm":
        return LpNorm(p=self.p, weights=list(self._w * c))

    def permuted(self, perm) -> "LpNorm":
        return LpNorm(p=self.p, weights=list(self._w[np.asarray(perm)]))

    def _lozanovskii_weights(self) -> np.ndarray:
        # maximiser of sum log x_i on the unit sphere of l_p^m is x_i = m^(-1/p)
        m = self.dim
        scale = 1.0 if math.isinf(self.p) else m ** (-1.0 / self.p)
        return scale / self._w

    def _subgradients(self, v: np.ndarray, eps: float, max_generators: int) -> np.ndarray:
        w = self._w
        sign = np.sign(v)
        a = np.abs(v) * w
        if math.isinf(self.p):
            top = a.max()
            if top == 0:
                return np.zeros((1, self.dim))
            active = np.flatnonzero(a >= top * (1.0 - eps))
            gens = np.zeros((len(active), self.dim))
            gens[np.arange(len(active)), active] = w[active] * sign[active]
            return gens
        if self.p == 1.0:
            return (w * sign)[None, :]
        value = self._eval(v[None, :])[0]
        if value == 0:
            return np.zeros((1, self.dim))
        return (w * (a / value) ** (self.p - 1.0) * sign)[None, :]

    def _dual_maximizer(self, a: np.ndarray) -> np.ndarray:
        w = self._w
        b = a / w
        if not np.any(b):
            return np.zeros(self.dim)
        if self.p == 1.0:
            i = int(np.argmax(np.abs(b)))
            x = np.zeros(self.dim)
            x[i] = np.sign(b[i]) / w[i]
            return x
        if math.isinf(self.p):
            s = np.sign(b)
            s[s == 0] = 1.0
            return s / w
        q = conjugate_exponent(self.p)
        scale = np.abs(b).max()
        bn = np.abs(b) / scale
        y = np.sign(b) * bn ** (q - 1.0) / (bn ** q).sum() ** ((q - 1.0) / q)
        return y / w

    def _ball_vertices(self) -> np.ndarray:
        w = self._w
        if math.isinf(self.p) and self.dim > 1:
            return sign_vectors(self.dim) / w
        eye = np.diag(1.0 / w)
        return np.vstack([eye, -eye])


class Block(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    coords: list[int]
    norm: "UnconditionalNorm"

    @model_validator(mode="after")
    def _check_dims(self):
        if len(self.coords) == 0:
            raise ValueError("block coords must not be empty")
        if len(self.coords) != self.norm.dim:
            raise ValueError(
                f"block coords length {len(self.coords)} != norm dim {self.norm.dim}"
            )
        return self


class BlockNorm(_NormBase):
    """Max or sum of sub-norms acting on disjoint coordinate blocks."""
    kind: Literal["max", "sum"]
    blocks: list[Block]

    @model_validator(mode="after")
    def _check_partition(self):
        if not self.blocks:
            raise ValueError("blocks must not be empty")
        all_coords = sorted(c for block in self.blocks for c in block.coords)
        if all_coords != list(range(len(all_coords))):
            raise ValueError("blocks must partition {0..n-1}")
        return self

    @property
    def dim(self) -> int:
        return sum(len(block.coords) for block in self.blocks)

    @property
    def is_polytopal(self) -> bool:
        return all(block.norm.is_polytopal for block in self.blocks)

    def _block_values(self, pts: np.ndarray) -> np.ndarray:
        return np.stack([block.norm._eval(pts[:, block.coords]) for block in self.blocks], axis=1)

    def _eval(self, pts: np.ndarray) -> np.ndarray:
        values = self._block_values(pts)
        return values.max(axis=1) if self.kind == "max" else values.sum(axis=1)

    def dual(self) -> "BlockNorm":
        return BlockNorm(
            kind="sum" if self.kind == "max" else "max",
            blocks=[Block(coords=block.coords, norm=block.norm.dual()) for block in self.blocks],
        )

    def scaled(self, c: float) -> "BlockNorm":
        return BlockNorm(
            kind=self.kind,
            blocks=[Block(coords=block.coords, norm=block.norm.scaled(c)) for block in self.blocks],
        )

    def permuted(self, perm) -> "BlockNorm":
        perm = np.asarray(perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(len(perm))
        return BlockNorm(
            kind=self.kind,
            blocks=[Block(coords=[int(inverse[c]) for c in block.coords], norm=block.norm)
                    for block in self.blocks],
        )

    def _lozanovskii_weights(self) -> np.ndarray:
        # sum: block b gets the share m_b / n of the unit budget; max: every block gets all of it
        n = self.dim
        lam = np.empty(n)
        for block in self.blocks:
            share = 1.0 if self.kind == "max" else len(block.coords) / n
            lam[block.coords] = share * block.norm._lozanovskii_weights()
        return lam

    def _embed(self, block: Block, rows: np.ndarray) -> np.ndarray:
        out = np.zeros((rows.shape[0], self.dim))
        out[:, block.coords] = rows
        return out

    def _subgradients(self, v: np.ndarray, eps: float, max_generators: int) -> np.ndarray:
        per_block = [block.norm._subgradients(v[block.coords], eps, max_generators)
                     for block in self.blocks]
        if self.kind == "max":
            values = np.array([block.norm._eval(v[None, block.coords])[0] for block in self.blocks])
            top = values.max()
            if top == 0:
                return np.zeros((1, self.dim))
            active = np.flatnonzero(values >= top * (1.0 - eps))
            return np.vstack([self._embed(self.blocks[i], per_block[i]) for i in active])
        count = math.prod(len(g) for g in per_block)
        if count > max_generators:
            per_block = [g.mean(axis=0, keepdims=True) for g in per_block]
        gens = []
        for combo in itertools.product(*per_block):
            g = np.zeros(self.dim)
            for block, row in zip(self.blocks, combo):
                g[block.coords] = row
            gens.append(g)
        return np.array(gens)

    def _dual_maximizer(self, a: np.ndarray) -> np.ndarray:
        x = np.zeros(self.dim)
        if self.kind == "max":
            for block in self.blocks:
                x[block.coords] = block.norm._dual_maximizer(a[block.coords])
            return x
        duals = [block.norm.dual()._eval(a[None, block.coords])[0] for block in self.blocks]
        best = self.blocks[int(np.argmax(duals))]
        x[best.coords] = best.norm._dual_maximizer(a[best.coords])
        return x

    def _ball_vertices(self) -> np.ndarray:
        per_block = [block.norm._ball_vertices() for block in self.blocks]
        if self.kind == "sum":
            return np.vstack([self._embed(block, verts) for block, verts in zip(self.blocks, per_block)])
        count = math.prod(len(v) for v in per_block)
        if count > MAX_VERTICES:
            raise NormError(f"unit ball has {count} vertices, more than {MAX_VERTICES}")
        out = np.zeros((count, self.dim))
        for idx, combo in enumerate(itertools.product(*per_block)):
            for block, row in zip(self.blocks, combo):
                out[idx, block.coords] = row
        return out


UnconditionalNorm = Annotated[Union[LpNorm, BlockNorm], Field(discriminator="kind")]
Block.model_rebuild()
BlockNorm.model_rebuild()

_norm_adapter = TypeAdapter(UnconditionalNorm)


def parse_norm(data) -> Union[LpNorm, BlockNorm]:
    """Build a norm from its JSON grammar (dict or JSON string)."""
    if isinstance(data, (str, bytes)):
        return _norm_adapter.validate_json(data)
    return _norm_adapter.validate_python(data)


def eval_norm(norm: UnconditionalNorm, v) -> float:
    return norm.evaluate(v)


def eval_dual_norm(norm: UnconditionalNorm, v) -> float:
    return norm.dual_evaluate(v)


def sample_unit_sphere(norm: UnconditionalNorm, count: int, seed: int) -> np.ndarray:
    """Points with N(v) = 1, from rotation-invariant Gaussian directions."""
    if count < 1:
        raise NormError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, norm.dim))
    values = norm._eval(g)
    while np.any(values == 0):
        bad = values == 0
        g[bad] = rng.standard_normal((int(bad.sum()), norm.dim))
        values = norm._eval(g)
    return g / values[:, None]


class UnconditionalityReport(BaseModel):
    max_deviation: float
    trials: int
    tolerance: float
    passed: bool


EXHAUSTIVE_SIGN_DIM = 20
_SIGN_CHUNK = 1 << 14


def check_unconditionality(norm: Union[UnconditionalNorm, Callable[[np.ndarray], float]],
                           trials: int, seed: int, dim: Optional[int] = None,
                           tolerance: float = 1e-10) -> UnconditionalityReport:
    """Max relative change of N under random sign flips.

    `norm` may also be a plain callable oracle, in which case `dim` is required.
    For n <= EXHAUSTIVE_SIGN_DIM the first sample is additionally checked
    against all 2^n sign patterns, in chunks.
    """
    if trials < 1:
        raise NormError(f"trials must be >= 1, got {trials}")
    if isinstance(norm, _NormBase):
        n = norm.dim
        evaluate = norm._eval
    else:
        if dim is None:
            raise NormError("dim is required when checking a callable oracle")
        n = dim
        oracle = norm
        evaluate = lambda pts: np.array([float(oracle(row)) for row in pts])
    rng = np.random.default_rng(seed)
    alphas = rng.standard_normal((trials, n))
    signs = rng.choice([-1.0, 1.0], size=(trials, n))
    base = evaluate(alphas)
    deviation = np.abs(evaluate(signs * alphas) - base) / np.where(base > 0, base, 1.0)
    max_dev = float(deviation.max())
    checked = trials
    if n <= EXHAUSTIVE_SIGN_DIM:
        first, first_value = alphas[0], base[0]
        scale = first_value if first_value > 0 else 1.0
        bits = np.arange(n)
        for start in range(0, 2 ** n, _SIGN_CHUNK):
            index = np.arange(start, min(start + _SIGN_CHUNK, 2 ** n))
            patterns = 1.0 - 2.0 * ((index[:, None] >> bits) & 1)
            flipped = evaluate(patterns * first)
            max_dev = max(max_dev, float(np.abs(flipped - first_value).max()) / scale)
            checked += len(index)
    return UnconditionalityReport(max_deviation=max_dev, trials=checked,
                                  tolerance=tolerance, passed=max_dev <= tolerance)


class SubspaceBasis(BaseModel):
    """A k-dimensional subspace E of R^n given by k basis rows."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    basis: list[list[float]]

    @model_validator(mode="after")
    def _check_shape(self):
        if not self.basis or not self.basis[0]:
            raise ValueError("basis must be non-empty")
        n = len(self.basis[0])
        if any(len(row) != n for row in self.basis):
            raise ValueError("basis rows must have equal length")
        if len(self.basis) > n:
            raise ValueError(f"sub_dim {len(self.basis)} exceeds ambient_dim {n}")
        if not np.all(np.isfinite(np.asarray(self.basis, dtype=float))):
            raise ValueError("basis has non-finite entries")
        return self

    @classmethod
    def from_rows(cls, rows) -> "SubspaceBasis":
        """Build and rank-check a basis; raises RankDeficiencyError."""
        basis = cls(basis=np.asarray(rows, dtype=float).tolist())
        basis.validate_rank()
        return basis

    @property
    def ambient_dim(self) -> int:
        return len(self.basis[0])

    @property
    def sub_dim(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> np.ndarray:
        """n x k matrix whose columns span E."""
        return np.asarray(self.basis, dtype=float).T

    def validate_rank(self, rank_tol: float = 1e-10):
        check_full_column_rank(self.matrix, rank_tol)

    def orthonormal_frame(self) -> np.ndarray:
        """Fixed orthonormal frame of E (n x k); all E-volumes are measured in it."""
        return orthonormal_columns(self.matrix)


__all__ = [
    "LpNorm", "BlockNorm", "Block", "UnconditionalNorm", "SubspaceBasis",
    "parse_norm", "eval_norm", "eval_dual_norm", "sample_unit_sphere",
    "check_unconditionality", "UnconditionalityReport", "conjugate_exponent",
]
