"""Explicit finite-difference solver for the diffusion-type index model.

Forward-time centred-space (FTCS) stepping of

    dH/dt = sum_i d^2 H / dpsi_i^2      (unit diffusion coefficient)

on a rectangular lattice with time-dependent Dirichlet boundary data.
Dimension k = 2 is the main use; k = 1..3 are supported.

Rule callables are vectorised: a boundary rule receives ``(coords, t)``
where ``coords`` is a tuple of broadcastable coordinate arrays (one per
axis) and must return an array broadcastable to their common shape, or a
scalar.  ``lambda coords, t: s * t`` and numpy expressions both qualify.

Stepping double-buffers (reads the previous level, writes the next), and
scenario runs share no state, so independent runs may execute concurrently.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

CFL_SAFETY = 0.9


class StabilityError(ValueError):
    """Requested time step exceeds the explicit stability bound."""


class NonFiniteFieldError(RuntimeError):
    """A step produced NaN or infinity; the run is aborted."""


def stable_dt(spacings: Sequence[float]) -> float:
    """Largest admitted explicit step: CFL_SAFETY / (2 * sum_i 1/dpsi_i^2)."""
    return CFL_SAFETY / (2.0 * sum(1.0 / h**2 for h in spacings))


@dataclass
class ScalarField:
    """Index values H on a rectangular lattice at one instant.

    ``values`` is a dense float64 array of shape ``extents`` (row-major);
    ``origin[i] + j * spacings[i]`` is the coordinate of lattice index j
    along axis i.
    """

    k: int
    extents: tuple[int, ...]
    spacings: tuple[float, ...]
    origin: tuple[float, ...]
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.extents = tuple(int(n) for n in self.extents)
        self.spacings = tuple(float(h) for h in self.spacings)
        self.origin = tuple(float(o) for o in self.origin)
        if not (len(self.extents) == len(self.spacings) == len(self.origin) == self.k):
            raise ValueError("extents, spacings and origin must all have length k")
        if any(h <= 0 for h in self.spacings):
            raise ValueError("spacings must be positive")
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != self.extents:
            raise ValueError(
                f"values shape {self.values.shape} != extents {self.extents}"
            )

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacings[axis] * np.arange(self.extents[axis])

    def coordinate_grids(self) -> tuple[np.ndarray, ...]:
        """Sparse broadcastable coordinate arrays, one per axis."""
        return tuple(
            np.meshgrid(*(self.axis_coords(a) for a in range(self.k)),
                        indexing="ij", sparse=True)
        )

    def copy(self) -> "ScalarField":
        return replace(self, values=self.values.copy())

    def interior(self) -> np.ndarray:
        return self.values[tuple(slice(1, -1) for _ in range(self.k))]

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.extents, dtype=bool)
        for a in range(self.k):
            idx_lo = [slice(None)] * self.k
            idx_lo[a] = 0
            mask[tuple(idx_lo)] = True
            idx_hi = [slice(None)] * self.k
            idx_hi[a] = -1
            mask[tuple(idx_hi)] = True
        return mask


@dataclass
class ScenarioSpec:
    """One solver run: domain, lattice, data rules and horizon.

    ``boundary_rule(coords, t)`` supplies Dirichlet values on every face
    (corners included); ``initial_rule(coords)`` fills the lattice at t=0.
    ``dt`` is a float or "auto" (the stability bound).
    """

    domain: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]
    boundary_rule: Callable
    initial_rule: Callable
    s: float = 10.0
    t_end: float = 1.0
    dt: float | str = "auto"

    def __post_init__(self):
        self.domain = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        self.resolution = tuple(int(n) for n in self.resolution)
        if len(self.domain) != len(self.resolution):
            raise ValueError("domain and resolution must have equal length")
        if any(hi <= lo for lo, hi in self.domain):
            raise ValueError("each axis needs lo < hi")
        if any(n < 3 for n in self.resolution):
            raise ValueError("need at least 3 points per axis")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")

    @property
    def k(self) -> int:
        return len(self.domain)

    def spacings(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / (n - 1) for (lo, hi), n in zip(self.domain, self.resolution)
        )

    def resolved_dt(self) -> float:
        bound = stable_dt(self.spacings())
        if self.dt == "auto":
            return bound
        dt = float(self.dt)
        if dt > bound * (1.0 + 1e-12):
            raise StabilityError(
                f"dt={dt:g} exceeds the stability bound {bound:g}"
            )
        return dt

    def initial_field(self) -> ScalarField:
        fld = ScalarField(
            k=self.k,
            extents=self.resolution,
            spacings=self.spacings(),
            origin=tuple(lo for lo, _ in self.domain),
            values=np.zeros(self.resolution),
            time=0.0,
        )
        grids = fld.coordinate_grids()
        fld.values[...] = np.broadcast_to(
            np.asarray(self.initial_rule(grids), dtype=float), fld.extents
        )
        _apply_boundary(fld.values, _boundary_faces(fld), self.boundary_rule, 0.0)
        if not np.all(np.isfinite(fld.values)):
            raise NonFiniteFieldError("initial data is not finite")
        return fld


def _boundary_faces(field: ScalarField):
    """Precompute (index, coords) for every boundary face of a lattice."""
    faces = []
    coords_full = [field.axis_coords(a) for a in range(field.k)]
    for a in range(field.k):
        for side, fixed in ((0, field.origin[a]),
                            (-1, field.origin[a] + field.spacings[a] * (field.extents[a] - 1))):
            idx = [slice(None)] * field.k
            idx[a] = side
            coords = []
            for b in range(field.k):
                if b == a:
                    coords.append(np.asarray(fixed))
                else:
                    shape = [1] * (field.k - 1)
                    shape[b if b < a else b - 1] = field.extents[b]
                    coords.append(coords_full[b].reshape(shape))
            faces.append((tuple(idx), tuple(coords)))
    return faces


def _apply_boundary(values: np.ndarray, faces, boundary_rule: Callable, t: float) -> None:
    for idx, coords in faces:
        val = np.asarray(boundary_rule(coords, t), dtype=float)
        face = values[idx]
        if np.ndim(face) == 0:  # k=1: a face is a single point
            values[idx] = float(val)
        else:
            face[...] = np.broadcast_to(val, face.shape)


def _interior_laplacian(u: np.ndarray, spacings: Sequence[float]) -> np.ndarray:
    k = u.ndim
    core = tuple(slice(1, -1) for _ in range(k))
    lap = np.zeros_like(u[core])
    for a in range(k):
        lo = list(core)
        lo[a] = slice(0, -2)
        hi = list(core)
        hi[a] = slice(2, None)
        lap += (u[tuple(hi)] - 2.0 * u[core] + u[tuple(lo)]) / spacings[a] ** 2
    return lap


def step_explicit(field: ScalarField, boundary_rule: Callable, dt: float) -> ScalarField:
    """One FTCS step: interior updated from the discrete Laplacian, then
    every boundary node overwritten with the rule at the new time.

    ``dt`` must satisfy dt <= CFL_SAFETY / (2 * sum_i 1/dpsi_i^2); a larger
    step is rejected before anything is computed.
    """
    if any(n < 3 for n in field.extents):
        raise ValueError("stepping needs at least 3 points per axis")
    bound = stable_dt(field.spacings)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:g} exceeds the stability bound {bound:g}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    t_new = field.time + dt
    u = field.values
    out = u.copy()
    core = tuple(slice(1, -1) for _ in range(field.k))
    out[core] = u[core] + dt * _interior_laplacian(u, field.spacings)
    _apply_boundary(out, _boundary_faces(field), boundary_rule, t_new)
    if not np.all(np.isfinite(out)):
        raise NonFiniteFieldError(f"non-finite values after step to t={t_new:g}")
    return replace(field, values=out, time=t_new)


def run_scenario(spec: ScenarioSpec, snapshot_times: Sequence[float]) -> list[ScalarField]:
    """Advance a scenario from t=0 to t_end, returning one field per
    requested snapshot time (nearest completed step; dt is not adjusted to
    hit the times exactly)."""
    snapshot_times = [float(t) for t in snapshot_times]
    for t in snapshot_times:
        if not 0.0 <= t <= spec.t_end * (1.0 + 1e-12):
            raise ValueError(f"snapshot time {t} outside [0, {spec.t_end}]")
    dt = spec.resolved_dt()
    n_steps = max(1, math.ceil(spec.t_end / dt - 1e-12))
    want: dict[int, list[int]] = {}
    for pos, t in enumerate(snapshot_times):
        step_idx = min(n_steps, max(0, round(t / dt)))
        want.setdefault(step_idx, []).append(pos)

    field = spec.initial_field()
    faces = _boundary_faces(field)
    spacings = field.spacings
    core = tuple(slice(1, -1) for _ in range(field.k))
    out: list[ScalarField | None] = [None] * len(snapshot_times)
    if 0 in want:
        for pos in want[0]:
            out[pos] = field.copy()

    u = field.values
    for step in range(1, n_steps + 1):
        t_new = step * dt
        nxt = u.copy()
        nxt[core] = u[core] + dt * _interior_laplacian(u, spacings)
        _apply_boundary(nxt, faces, spec.boundary_rule, t_new)
        if not np.all(np.isfinite(nxt)):
            raise NonFiniteFieldError(f"non-finite values after step to t={t_new:g}")
        u = nxt
        if step in want:
            snap = replace(field, values=u.copy(), time=t_new)
            for pos in want[step]:
                out[pos] = snap.copy()
    return [f for f in out]  # type: ignore[misc]


# -- verification ------------------------------------------------------------


def manufactured_quadratic(k: int) -> Callable:
    """k*t + 0.5 * sum_i psi_i^2; solves the diffusion model exactly and is
    reproduced by the FTCS stencil to rounding error."""

    def h(coords, t):
        return k * t + 0.5 * sum(np.asarray(c) ** 2 for c in coords)

    return h


def manufactured_exponential(k: int) -> Callable:
    """exp(k*t + sum_i psi_i); smooth non-polynomial diffusion solution used
    to expose the scheme's O(h^2) truncation error."""

    def h(coords, t):
        return np.exp(k * t + sum(np.asarray(c) for c in coords))

    return h


@dataclass
class ConvergenceResult:
    resolutions: list[int]
    spacings: list[float]
    max_errors: list[float]
    observed_orders: list[float]  # between consecutive resolutions


def convergence_study(
    manufactured: Callable,
    resolutions: Sequence[int],
    domain: tuple[tuple[float, float], ...] = ((0.0, 1.0), (0.0, 1.0)),
    t_end: float = 0.1,
    dt: float | str = "auto",
) -> ConvergenceResult:
    """Max-norm error of the solver against a closed form solving the
    diffusion model, for a list of per-axis resolutions.

    Boundary and initial data are taken from the manufactured solution.
    The observed order between spacings h1 > h2 is
    log(e1/e2) / log(h1/h2) (log2 of the error ratio when h halves).
    """
    spacings: list[float] = []
    errors: list[float] = []
    for n in resolutions:
        spec = ScenarioSpec(
            domain=domain,
            resolution=tuple(int(n) for _ in domain),
            boundary_rule=manufactured,
            initial_rule=lambda coords: manufactured(coords, 0.0),
            t_end=t_end,
            dt=dt,
        )
        final = run_scenario(spec, [t_end])[0]
        exact = np.broadcast_to(
            np.asarray(manufactured(final.coordinate_grids(), final.time), dtype=float),
            final.extents,
        )
        spacings.append(max(final.spacings))
        errors.append(float(np.max(np.abs(final.values - exact))))
    orders = []
    for (h1, e1), (h2, e2) in zip(zip(spacings, errors), zip(spacings[1:], errors[1:])):
        if e1 > 0 and e2 > 0:
            orders.append(math.log(e1 / e2) / math.log(h1 / h2))
        else:
            orders.append(math.inf)
    return ConvergenceResult(
        resolutions=[int(n) for n in resolutions],
        spacings=spacings,
        max_errors=errors,
        observed_orders=orders,
    )


# -- IO ----------------------------------------------------------------------


def field_to_csv(field: ScalarField, path: str | Path) -> None:
    """One row per lattice point: psi coordinates then the value."""
    grids = np.meshgrid(
        *(field.axis_coords(a) for a in range(field.k)), indexing="ij"
    )
    cols = [g.ravel() for g in grids] + [field.values.ravel()]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"psi{a + 1}" for a in range(field.k)] + ["value"])
        for row in zip(*cols):
            writer.writerow([f"{x:.17g}" for x in row])


def field_to_json(field: ScalarField, path: str | Path) -> None:
    data = {
        "k": field.k,
        "extents": list(field.extents),
        "spacings": list(field.spacings),
        "origin": list(field.origin),
        "time": field.time,
        "values": field.values.ravel().tolist(),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True)
        fh.write("\n")


def field_from_json(path: str | Path) -> ScalarField:
    with open(path) as fh:
        data = json.load(fh)
    return ScalarField(
        k=data["k"],
        extents=tuple(data["extents"]),
        spacings=tuple(data["spacings"]),
        origin=tuple(data["origin"]),
        values=np.asarray(data["values"], dtype=float).reshape(data["extents"]),
        time=data["time"],
    )


def scenario_from_json(source: str | Path | dict) -> ScenarioSpec:
    """Build a ScenarioSpec from a JSON file or dict.

    Recognised fields: domain [[lo, hi], ...], resolution [n, ...],
    s (default 10), t_end, dt (number or "auto"), boundary ("s*t" or a
    number, default "s*t") and initial (a number, default 0).
    """
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = dict(source)
    missing = [k for k in ("domain", "resolution", "t_end") if k not in data]
    if missing:
        raise ValueError(f"scenario spec is missing required fields {missing}")
    s = float(data.get("s", 10.0))
    boundary = data.get("boundary", "s*t")
    if boundary == "s*t":
        boundary_rule = lambda coords, t: s * t  # noqa: E731
    elif isinstance(boundary, (int, float)):
        boundary_rule = lambda coords, t, _c=float(boundary): _c  # noqa: E731
    else:
        raise ValueError(f"unsupported boundary rule {boundary!r}")
    initial = data.get("initial", 0.0)
    if not isinstance(initial, (int, float)):
        raise ValueError(f"unsupported initial rule {initial!r}")
    initial_rule = lambda coords, _c=float(initial): _c  # noqa: E731
    return ScenarioSpec(
        domain=tuple((lo, hi) for lo, hi in data["domain"]),
        resolution=tuple(data["resolution"]),
        boundary_rule=boundary_rule,
        initial_rule=initial_rule,
        s=s,
        t_end=float(data["t_end"]),
        dt=data.get("dt", "auto"),
    )
