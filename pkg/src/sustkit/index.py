"""Weighted sustainability-index evaluation, (alpha, beta) fitting and the
interval form of the index time derivative.

Index values are computed directly from the closed forms (plain scalar
arithmetic); :mod:`sustkit.polynomials` builds the same families as exact
polynomials, which the test suite uses as an independent cross-check.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import riemann_stieltjes as rs

#: the seven factor variables of the headline index: (symbol, name, what the
#: value measures).  Proportions and levels are normalised to [0, 1] by
#: convention; durations are rescaled by the caller.
SEVEN_VARIABLES = (
    ("psi1", "food and agriculture",
     "proportion of food-production yield to arable land"),
    ("psi2", "climate and environment",
     "proportion of people living with clean air, clean water and normal "
     "climatic conditions"),
    ("psi3", "population and economics",
     "proportion of people above multidimensional-poverty levels and the "
     "skilled-population share needed for economic growth"),
    ("psi4", "political situation",
     "duration the population has lived under a stable political situation"),
    ("psi5", "medical technology",
     "proportion of people within reach of good medical treatment and "
     "health facilities"),
    ("psi6", "energy",
     "proportion of industry, transport, agriculture and general "
     "infrastructure with sufficient electricity for optimum productivity"),
    ("psi7", "science and technology",
     "level of basic research and of technology available to support the "
     "population's needs"),
)


class RankDeficiencyError(ValueError):
    """Observations do not determine both fit parameters."""


class PsiRangeWarning(UserWarning):
    """Factor values fell outside the conventional [0, 1] band."""


@dataclass
class IndexInputs:
    """One evaluation point: time, factor values and scalar weights."""

    k: int
    t: float
    psi: tuple[float, ...]
    weights: tuple[float, ...]
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need k >= 2, got {self.k}")
        self.psi = tuple(float(x) for x in self.psi)
        self.weights = tuple(float(w) for w in self.weights)
        if len(self.psi) != self.k or len(self.weights) != self.k:
            raise ValueError(
                f"psi and weights must each have length k={self.k}, got "
                f"{len(self.psi)} and {len(self.weights)}"
            )
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be strictly positive")
        for name, v in (("alpha", self.alpha), ("beta", self.beta)):
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __mul__(self, other: "Interval") -> "Interval":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(products), max(products))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


def _basis_terms(k: int, t: float, psi: Sequence[float], weights: Sequence[float]):
    """The two building blocks of the parametrised weighted index:
    u = k! * sum(w) * t + sum(w_i psi_i^k) and v = prod(w) * (t + prod(psi))."""
    fact = math.factorial(k)
    sum_w = math.fsum(weights)
    prod_w = math.prod(weights)
    sum_wpk = math.fsum(w * x**k for w, x in zip(weights, psi))
    prod_psi = math.prod(psi)
    u = fact * sum_w * t + sum_wpk
    v = prod_w * t + prod_w * prod_psi
    return u, v


def index_value(inputs: IndexInputs, variant: str) -> float:
    """Evaluate one closed-form index family at (t, psi).

    Raises ValueError when the chosen family needs parameters the inputs do
    not carry (alpha/beta for C_ab and C2w_ab; weights are always present
    on IndexInputs and ignored by the unweighted families).
    """
    k, t, psi, w = inputs.k, inputs.t, inputs.psi, inputs.weights
    fact = math.factorial(k)
    sum_psi2 = math.fsum(x * x for x in psi)
    sum_psik = math.fsum(x**k for x in psi)
    prod_psi = math.prod(psi)
    if variant == "T1a":
        return k * t + 0.5 * sum_psi2
    if variant == "T1b":
        return 2 * k * t + sum_psi2
    if variant == "T2a":
        return (k + 1) * t + sum_psik / fact + prod_psi
    if variant == "T2b":
        return (fact * k + 1) * t + sum_psik + prod_psi
    if variant == "C_ab":
        if inputs.alpha is None or inputs.beta is None:
            raise ValueError("C_ab needs alpha and beta")
        a, b = inputs.alpha, inputs.beta
        return (k * a * fact + b) * t + a * sum_psik + b * prod_psi
    sum_w = math.fsum(w)
    prod_w = math.prod(w)
    sum_wpk = math.fsum(wi * x**k for wi, x in zip(w, psi))
    prod_wpsi = prod_w * prod_psi
    if variant == "T3w":
        return (fact * sum_w + prod_w) * t + sum_wpk + prod_wpsi
    if variant == "C1w":
        return (sum_w + prod_w) * t + sum_wpk / fact + prod_wpsi
    if variant == "C2w_ab":
        if inputs.alpha is None or inputs.beta is None:
            raise ValueError("C2w_ab needs alpha and beta")
        a, b = inputs.alpha, inputs.beta
        return (a * fact * sum_w + b * prod_w) * t + a * sum_wpk + b * prod_wpsi
    raise ValueError(f"unknown family variant {variant!r}")


def index_seven_ab(inputs: IndexInputs) -> float:
    """Seven-variable parametrised index
    (alpha*7!*sum(w) + beta*prod(w))*t + alpha*sum(w_i psi_i^7)
    + beta*prod(w_i psi_i).

    The factor values of the seven-variable table are proportions or levels
    normalised to [0, 1]; values outside that band are accepted with a
    warning.
    """
    if inputs.k != 7:
        raise ValueError(f"the seven-variable index needs k=7, got {inputs.k}")
    if inputs.alpha is None or inputs.beta is None:
        raise ValueError("the seven-variable index needs alpha and beta")
    out_of_band = [x for x in inputs.psi if not 0.0 <= x <= 1.0]
    if out_of_band:
        warnings.warn(
            f"psi values outside [0, 1]: {out_of_band}; accepted as given",
            PsiRangeWarning,
            stacklevel=2,
        )
    return index_value(inputs, "C2w_ab")


@dataclass
class FitResult:
    alpha: float
    beta: float
    residual_norm: float
    n_obs: int

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "residual_norm": self.residual_norm,
            "n_obs": self.n_obs,
        }


def fit_alpha_beta(observations: Sequence[tuple[IndexInputs, float]]) -> FitResult:
    """Least-squares fit of (alpha, beta) in H = alpha*u + beta*v.

    u and v are the two basis terms of the parametrised weighted family
    (see ``_basis_terms``).  Solved through the 2x2 normal equations after
    scaling each column to unit 2-norm; with only two parameters the
    conditioning is benign once scaled.
    """
    if len(observations) < 2:
        raise ValueError(f"need at least 2 observations, got {len(observations)}")
    us, vs, hs = [], [], []
    for inputs, h_obs in observations:
        u, v = _basis_terms(inputs.k, inputs.t, inputs.psi, inputs.weights)
        us.append(u)
        vs.append(v)
        hs.append(float(h_obs))
    su = math.sqrt(math.fsum(u * u for u in us))
    sv = math.sqrt(math.fsum(v * v for v in vs))
    if su == 0.0 or sv == 0.0:
        raise RankDeficiencyError(
            "a basis column is identically zero; alpha and beta are not identifiable"
        )
    un = [u / su for u in us]
    vn = [v / sv for v in vs]
    g11 = math.fsum(u * u for u in un)
    g12 = math.fsum(u * v for u, v in zip(un, vn))
    g22 = math.fsum(v * v for v in vn)
    b1 = math.fsum(u * h for u, h in zip(un, hs))
    b2 = math.fsum(v * h for v, h in zip(vn, hs))
    det = g11 * g22 - g12 * g12
    if abs(det) < 1e-12:
        raise RankDeficiencyError(
            "observations are proportional in (u, v); the design matrix has rank < 2"
        )
    a_scaled = (g22 * b1 - g12 * b2) / det
    b_scaled = (g11 * b2 - g12 * b1) / det
    alpha = a_scaled / su
    beta = b_scaled / sv
    resid = math.sqrt(
        math.fsum(
            (alpha * u + beta * v - h) ** 2 for u, v, h in zip(us, vs, hs)
        )
    )
    return FitResult(alpha=alpha, beta=beta, residual_norm=resid, n_obs=len(observations))


def dHdt_interval(intervals: Sequence[Interval]) -> Interval:
    """Interval form of the index time derivative: sum of the k weight
    intervals plus their product (endpoint-combination arithmetic, folded
    pairwise)."""
    ivs = list(intervals)
    if len(ivs) < 2:
        raise ValueError(f"need k >= 2 intervals, got {len(ivs)}")
    total_sum = ivs[0]
    total_prod = ivs[0]
    for iv in ivs[1:]:
        total_sum = total_sum + iv
        total_prod = total_prod * iv
    return total_sum + total_prod


def weight_from_function(
    importance,
    weight_fn: rs.WeightFunction,
    eta: float = 1e-6,
    normalize: bool = True,
) -> float:
    """Bridge from a weight *function* to the scalar weight used by the
    index families: the Riemann-Stieltjes integral of an importance density
    against the function, divided by the domain length when ``normalize``.

    This is an artifact convention, not a prescribed rule; any positive
    scalar weight may be supplied to the families directly.
    """
    lo, hi = weight_fn.domain_lo, weight_fn.domain_hi
    value = rs.rs_integrate(importance, weight_fn, lo, hi, eta)
    return value / (hi - lo) if normalize else value


# -- IO ----------------------------------------------------------------------


def read_observations_csv(path: str | Path) -> list[tuple[IndexInputs, float]]:
    """Read fit observations from CSV with header
    t, psi1..psik, omega1..omegak, H_obs (k inferred from the header)."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        k = sum(1 for h in header if h.startswith("psi"))
        expected = (
            ["t"]
            + [f"psi{i}" for i in range(1, k + 1)]
            + [f"omega{i}" for i in range(1, k + 1)]
            + ["H_obs"]
        )
        if k == 0 or header != expected:
            raise ValueError(
                f"{path}: expected header t, psi1..psik, omega1..omegak, H_obs, "
                f"got {header}"
            )
        obs = []
        for row in reader:
            if not row:
                continue
            vals = [float(x) for x in row]
            if len(vals) != 2 * k + 2:
                raise ValueError(f"{path}: row has {len(vals)} fields, expected {2 * k + 2}")
            inputs = IndexInputs(
                k=k,
                t=vals[0],
                psi=tuple(vals[1 : 1 + k]),
                weights=tuple(vals[1 + k : 1 + 2 * k]),
            )
            obs.append((inputs, vals[-1]))
    return obs


def read_observations_json(path: str | Path) -> list[tuple[IndexInputs, float]]:
    """Read fit observations from JSON: a list of objects with fields
    t, psi (length-k array), omega (length-k array) and H_obs."""
    path = Path(path)
    with open(path) as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise ValueError(f"{path}: expected a JSON array of observations")
    obs = []
    for i, rec in enumerate(records):
        try:
            psi = tuple(float(x) for x in rec["psi"])
            weights = tuple(float(w) for w in rec["omega"])
            inputs = IndexInputs(
                k=len(psi), t=float(rec["t"]), psi=psi, weights=weights
            )
            obs.append((inputs, float(rec["H_obs"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}, record {i}: {exc}") from exc
    return obs


def read_observations(path: str | Path) -> list[tuple[IndexInputs, float]]:
    """Dispatch on extension: .json records or the CSV column layout."""
    if str(path).endswith(".json"):
        return read_observations_json(path)
    return read_observations_csv(path)


def write_fit_report(result: FitResult, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_json_dict(), fh, sort_keys=True)
        fh.write("\n")
