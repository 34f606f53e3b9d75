"""Request schemas for the command endpoints.

Field names match the CLI flag names so a request body is exactly the
payload the CLI builds.  Unknown fields are rejected.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict


class GammaCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: list[list[int]] | None = None
    k: list[int] | None = None
    p: int | None = None
    sigma: str | list[int] | None = None
    mu: list[int] | None = None
    random: int | None = None
    seed: int = 0
    exploratory: bool = False


class ChEvalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factors: list[str]
    testform: str
    weights: list[int] | None = None
    units: list[str] | None = None
    profile: int = 4
    exploratory: bool = False


class ProductEvalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factors: list[str]
    testform: str
    weights: list[int] | None = None
    profile: int = 4
    exploratory: bool = False


class MEvalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factors: list[str]
    testform: str
    weights: list[int] | None = None
    profile: int = 4
    exploratory: bool = False


class DualityRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ci: list[str]
    g: str


class QuadCompareRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factors: list[str]
    testform: str
    weights: list[int] | None = None
    profile: int = 4
    nu: list[int]
    deltas: list[float]
    cutoff: str = "smoothstep"
    order: int = 2
    rtol: float = 1e-6
    tolerance: float = 5e-3
    lambda_tol: float = 1e-6
    lambdas: list[list[float]] | None = None


REQUEST_MODELS = {
    "gamma-check": GammaCheckRequest,
    "ch-eval": ChEvalRequest,
    "product-eval": ProductEvalRequest,
    "m-eval": MEvalRequest,
    "duality": DualityRequest,
    "quad-compare": QuadCompareRequest,
}
