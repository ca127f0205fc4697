"""Explicit SSP Runge-Kutta integrators in Shu-Osher form.

Each update row of a method is a convex combination of earlier stage
values plus scaled right-hand-side evaluations,

    v_r = sum_k alpha_{rk} v_k + dt * beta_{rk} f(v_k),

with nonnegative alpha summing to 1 per row.  Coefficients follow
Gottlieb & Shu (1998) for the two- and three-stage methods and
Ketcheson (2008) for the ten-stage fourth-order method; they are
validated against the linear-stability polynomial rather than trusted.
"""

import math
from dataclasses import dataclass

import numpy as np

Row = tuple[tuple[int, float, float], ...]


class InstabilityError(RuntimeError):
    """Raised when a trajectory blows up (non-finite state or runaway energy)."""

    def __init__(self, message: str, time: float, step: int):
        super().__init__(message)
        self.time = time
        self.step = step


@dataclass(frozen=True)
class RKMethod:
    """Explicit RK method in sparse Shu-Osher representation.

    ``rows[r]`` lists (stage index, convex weight, rhs multiplier)
    triples producing stage value r+1 from earlier values; the last row
    produces the new solution.  ``stages`` counts right-hand-side
    evaluations.  ``cfl_constant`` is the known energy-stability
    constant C in dt * ||L|| <= C for semibounded L, where available.
    """

    name: str
    stages: int
    order: int
    rows: tuple[Row, ...]
    cfl_constant: float | None = None

    def __post_init__(self) -> None:
        for r, row in enumerate(self.rows):
            weights = [a for _, a, _ in row]
            if any(a < 0 for a in weights) or abs(sum(weights) - 1.0) > 1e-14:
                raise ValueError(f"row {r} of {self.name} is not a convex combination")
            if any(k > r for k, _, _ in row):
                raise ValueError(f"row {r} of {self.name} references a later stage")
        n_evals = len({k for row in self.rows for k, _, b in row if b != 0.0})
        if n_evals != self.stages:
            raise ValueError(f"{self.name}: {n_evals} rhs evaluations, declared {self.stages}")
        coeffs = stability_polynomial(self)
        taylor = 1.0 / np.array([math.factorial(k) for k in range(self.order + 1)])
        if np.max(np.abs(coeffs[: self.order + 1] - taylor)) > 1e-12:
            raise ValueError(f"{self.name} stability polynomial misses order {self.order}")


def stability_polynomial(method: RKMethod) -> np.ndarray:
    """Coefficients (ascending in z) of P with u^{n+1} = P(dt L) u^n."""
    n = method.stages + 1
    values = [np.zeros(n)]
    values[0][0] = 1.0
    for row in method.rows:
        acc = np.zeros(n)
        for k, a, b in row:
            acc += a * values[k]
            if b != 0.0:
                shifted = np.zeros(n)
                shifted[1:] = values[k][:-1]
                acc += b * shifted
        values.append(acc)
    return values[-1]


EULER = RKMethod("euler", stages=1, order=1, rows=(((0, 1.0, 1.0),),))

SSPRK22 = RKMethod(
    "ssprk22",
    stages=2,
    order=2,
    rows=(
        ((0, 1.0, 1.0),),
        ((0, 0.5, 0.0), (1, 0.5, 0.5)),
    ),
)

SSPRK33 = RKMethod(
    "ssprk33",
    stages=3,
    order=3,
    rows=(
        ((0, 1.0, 1.0),),
        ((0, 0.75, 0.0), (1, 0.25, 0.25)),
        ((0, 1.0 / 3.0, 0.0), (2, 2.0 / 3.0, 2.0 / 3.0)),
    ),
    cfl_constant=1.0,
)

# Ketcheson's low-storage ten-stage method: five forward-Euler legs, a
# convex recombination, four more legs, and a final three-term combine.
SSPRK104 = RKMethod(
    "ssprk104",
    stages=10,
    order=4,
    rows=(
        ((0, 1.0, 1.0 / 6.0),),
        ((1, 1.0, 1.0 / 6.0),),
        ((2, 1.0, 1.0 / 6.0),),
        ((3, 1.0, 1.0 / 6.0),),
        ((4, 1.0, 1.0 / 6.0),),
        ((0, 3.0 / 5.0, 0.0), (5, 2.0 / 5.0, 0.0)),
        ((6, 1.0, 1.0 / 6.0),),
        ((7, 1.0, 1.0 / 6.0),),
        ((8, 1.0, 1.0 / 6.0),),
        ((9, 1.0, 1.0 / 6.0),),
        ((0, 1.0 / 25.0, 0.0), (5, 9.0 / 25.0, 0.0), (10, 3.0 / 5.0, 1.0 / 10.0)),
    ),
    cfl_constant=0.67493,
)

METHODS = {m.name: m for m in (EULER, SSPRK22, SSPRK33, SSPRK104)}


def _rhs_of(op):
    return op.apply if hasattr(op, "apply") else op


def step(method: RKMethod, op, u: np.ndarray, dt: float) -> np.ndarray:
    """One explicit RK step of u' = L u; linear in u.

    ``op`` may be a GlobalOperator or any callable v -> L v.
    """
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    rhs = _rhs_of(op)
    values = [np.asarray(u, dtype=float)]
    evals: dict[int, np.ndarray] = {}
    for row in method.rows:
        acc = np.zeros_like(values[0])
        for k, a, b in row:
            if a != 0.0:
                acc += a * values[k]
            if b != 0.0:
                f = evals.get(k)
                if f is None:
                    f = evals[k] = rhs(values[k])
                acc += (dt * b) * f
        values.append(acc)
    return values[-1]


@dataclass(frozen=True)
class Trajectory:
    """Recorded history of an integration run."""

    times: np.ndarray
    energies: np.ndarray
    final_state: np.ndarray
    max_energy: float
    n_steps: int


def evolve(
    method: RKMethod,
    op,
    u0: np.ndarray,
    dt: float,
    t_final: float,
    record_every: int = 1,
    energy_limit_factor: float = 1e3,
    mass: np.ndarray | None = None,
) -> Trajectory:
    """Integrate to ``t_final``, shortening the last step to land exactly.

    The mass-weighted energy ||u|| is tracked at every step.  A
    non-finite state or energy beyond ``energy_limit_factor`` times the
    initial energy aborts with :class:`InstabilityError`, the signal the
    CFL search relies on.
    """
    if t_final <= 0 or dt <= 0:
        raise ValueError("dt and t_final must be positive")
    u = np.asarray(u0, dtype=float).copy()
    if mass is None:
        mass = getattr(op, "mass", None)
    m = np.ones_like(u) if mass is None else np.asarray(mass, dtype=float)

    # For small systems a cached dense matvec beats the per-block loop.
    rhs = _rhs_of(op)
    if hasattr(op, "dense") and op.dim <= 20000:
        A = op.dense()
        rhs = A.__matmul__

    def energy(v: np.ndarray) -> float:
        return float(np.sqrt(np.dot(m, v * v)))

    e0 = energy(u)
    limit = energy_limit_factor * max(e0, 1e-300)
    times = [0.0]
    energies = [e0]
    max_energy = e0
    t = 0.0
    n_steps = 0
    while t < t_final - 1e-14 * t_final:
        h = min(dt, t_final - t)
        u = step(method, rhs, u, h)
        t += h
        n_steps += 1
        e = energy(u)
        if not np.isfinite(e) or e > limit:
            raise InstabilityError(
                f"{method.name} blew up at t={t:.6g} (energy {e:.3e} from {e0:.3e})",
                time=t,
                step=n_steps,
            )
        max_energy = max(max_energy, e)
        if n_steps % record_every == 0 or t >= t_final - 1e-14 * t_final:
            times.append(t)
            energies.append(e)
    return Trajectory(
        times=np.asarray(times),
        energies=np.asarray(energies),
        final_state=u,
        max_energy=max_energy,
        n_steps=n_steps,
    )
