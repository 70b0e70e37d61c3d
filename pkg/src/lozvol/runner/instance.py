"""Module defining the Instance data model and its loader."""

import json
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from lozvol.defaults import DEFAULT_SETTINGS, deep_merge
from lozvol.errors import DegenerateBodyError, InstanceValidationError, RankDeficiencyError, SelectionMethod
from lozvol.norms import LpNorm, SubspaceBasis, UnconditionalNorm
from lozvol.volume.bodies import NormBall, QuotientBall
from lozvol.volume.polytopes import PolytopeH, PolytopeV


class Instance(BaseModel):
    """One problem: a norm on R^n, a subspace E (rows of a basis) and/or a quotient map Q (k x n).

    Without `subspace` the subspace stages run on E = R^n. `settings` are
    deep-merged over the defaults while the instance runs.
    """
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    dim: Optional[int] = None
    norm: UnconditionalNorm
    subspace: Optional[list[list[float]]] = None
    quotient: Optional[list[list[float]]] = None
    seed: int = 0
    method: SelectionMethod = SelectionMethod.EXACT
    theorem4_constant: Optional[float] = None
    settings: dict[str, Any] = {}

    @property
    def n(self) -> int:
        return self.norm.dim

    @property
    def k(self) -> int:
        return len(self.subspace) if self.subspace is not None else self.n

    def subspace_basis(self) -> SubspaceBasis:
        if self.subspace is None:
            return SubspaceBasis(basis=np.eye(self.n).tolist())
        return SubspaceBasis(basis=self.subspace)

    def quotient_matrix(self) -> Optional[np.ndarray]:
        return None if self.quotient is None else np.asarray(self.quotient, dtype=float)

    def check(self) -> "Instance":
        """Cross-field consistency; raises InstanceValidationError naming the field."""
        n = self.norm.dim
        if self.dim is not None and self.dim != n:
            if isinstance(self.norm, LpNorm):
                raise InstanceValidationError("norm.weights", "weights.length != dim")
            raise InstanceValidationError("norm", f"norm acts on R^{n} but dim is {self.dim}")
        if self.subspace is not None:
            if not self.subspace or any(len(row) != n for row in self.subspace):
                raise InstanceValidationError("subspace", f"every basis row must have length {n}")
            if len(self.subspace) > n:
                raise InstanceValidationError("subspace", f"more than {n} basis rows")
            try:
                SubspaceBasis.from_rows(self.subspace)
            except RankDeficiencyError as e:
                raise InstanceValidationError("subspace", f"basis is rank deficient ({e})")
            except ValidationError as e:
                raise InstanceValidationError("subspace", e.errors()[0]["msg"])
        if self.quotient is not None:
            if not self.quotient or any(len(row) != n for row in self.quotient):
                raise InstanceValidationError("quotient", f"every row of the quotient map must have length {n}")
            q = np.asarray(self.quotient, dtype=float)
            if not np.all(np.isfinite(q)) or np.linalg.matrix_rank(q) < q.shape[0]:
                raise InstanceValidationError("quotient", "quotient not surjective")
        if self.settings:
            try:
                deep_merge(DEFAULT_SETTINGS, self.settings)
            except KeyError as e:
                raise InstanceValidationError("settings", str(e).strip("\"'"))
        return self


def load_instance(data: dict) -> Instance:
    try:
        instance = Instance.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise InstanceValidationError(field, first["msg"])
    return instance.check()


def read_json_object(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceValidationError("<root>", f"invalid JSON: {e}")
    if not isinstance(data, dict):
        raise InstanceValidationError("<root>", "expected a JSON object")
    return data


def parse_instance(path) -> Instance:
    """Read and validate an instance file (UTF-8 JSON)."""
    return load_instance(read_json_object(path))


def parse_body(path):
    """A body file: {"vrep": points}, {"hrep": normals} or {"norm": ..., "subspace"|"quotient": rows}."""
    data = read_json_object(path)
    kinds = [key for key in ("vrep", "hrep", "norm") if key in data]
    if len(kinds) != 1:
        raise InstanceValidationError("<root>", "exactly one of vrep, hrep, norm is required")
    try:
        if "vrep" in data:
            return PolytopeV(np.asarray(data["vrep"], dtype=float))
        if "hrep" in data:
            return PolytopeH(np.asarray(data["hrep"], dtype=float))
    except (ValueError, DegenerateBodyError) as e:
        raise InstanceValidationError(kinds[0], str(e))
    extra = set(data) - {"norm", "subspace", "quotient"}
    if extra:
        raise InstanceValidationError(sorted(extra)[0], "unknown field")
    inst = load_instance({key: data[key] for key in ("norm", "subspace", "quotient") if key in data})
    if inst.quotient is not None:
        if inst.subspace is not None:
            raise InstanceValidationError("<root>", "give either subspace or quotient, not both")
        return QuotientBall.of_map(inst.norm, inst.quotient_matrix())
    return NormBall.of_subspace(inst.norm, inst.subspace_basis())
