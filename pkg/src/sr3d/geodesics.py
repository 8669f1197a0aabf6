"""Normal geodesics of left-invariant structures on matrix-group models.

The Hamiltonian system splits into a vertical covector subsystem driven by
the frame constants,

    h1' = -(c12_1 h1 + c12_2 h2 + h0) h2
    h2' =  (c12_1 h1 + c12_2 h2 + h0) h1
    h0' = -(c01_1 h1 + c01_2 h2) h1 - (c02_1 h1 + c02_2 h2) h2

and a horizontal subsystem g' = g (h1 A1 + h2 A2) on a matrix (or unit
quaternion) realization of the group.  Both are integrated jointly with
fixed-step classical Runge-Kutta; no adaptive stepping, so the order-4
convergence is directly testable.

Four models are provided: the 3x3 unipotent realization of the Heisenberg
group, the 3x3 affine realization of A+(R) x R, SL(2) as 2x2 matrices, and
SU(2) as unit quaternions (kept in real arithmetic on purpose).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .classify import catalog_entry
from .frames import AdaptedFrame, frame_from_orthonormal, reeb_frame

MODEL_IDS = ("heisenberg", "a_plus_r", "sl2", "su2")


class IntegrationBlowUpError(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"state became non-finite at step {step}")
        self.step = step


def quat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternions stored as (w, x, y, z)."""
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


@dataclass(frozen=True)
class GroupModel:
    """A matrix (or quaternion) realization of one catalog group.

    ``a1, a2, a0`` realize the adapted frame (f1, f2, f0); their commutators
    reproduce the frame constants to rounding, which is asserted at build
    time.  ``kind`` is "matrix" or "quaternion".
    """

    id: str
    kind: str
    frame: AdaptedFrame
    a1: np.ndarray
    a2: np.ndarray
    a0: np.ndarray
    identity: np.ndarray

    def mul(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        if self.kind == "quaternion":
            return quat_mul(g, h)
        return g @ h

    def commutator(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.mul(a, b) - self.mul(b, a)

    def combo(self, u1: float, u2: float, u0: float) -> np.ndarray:
        return u1 * self.a1 + u2 * self.a2 + u0 * self.a0

    def group_defect(self, g: np.ndarray) -> float:
        """Distance from the model's group manifold (structural, not projected)."""
        if self.id == "sl2":
            return abs(float(np.linalg.det(g)) - 1.0)
        if self.id == "su2":
            return abs(float(np.linalg.norm(g)) - 1.0)
        if self.id == "heisenberg":
            return float(
                max(
                    abs(g[0, 0] - 1), abs(g[1, 1] - 1), abs(g[2, 2] - 1),
                    abs(g[1, 0]), abs(g[2, 0]), abs(g[2, 1]),
                )
            )
        # a_plus_r: [[a, 0, b], [0, 1, c], [0, 0, 1]] with a > 0.
        return float(
            max(
                abs(g[0, 1]), abs(g[1, 0]), abs(g[1, 1] - 1),
                abs(g[2, 0]), abs(g[2, 1]), abs(g[2, 2] - 1),
            )
        )


@dataclass(frozen=True)
class GeodesicState:
    g: np.ndarray
    h1: float
    h2: float
    h0: float


# --- basis realizations -----------------------------------------------------

def _heisenberg_basis() -> List[np.ndarray]:
    e1 = np.zeros((3, 3)); e1[0, 1] = 1.0
    e2 = np.zeros((3, 3)); e2[1, 2] = 1.0
    e3 = np.zeros((3, 3)); e3[0, 2] = 1.0
    return [e1, e2, e3]


def _a_plus_r_basis() -> List[np.ndarray]:
    e1 = np.zeros((3, 3)); e1[0, 2] = 1.0
    e2 = np.zeros((3, 3)); e2[0, 0] = -1.0
    e3 = np.zeros((3, 3)); e3[1, 2] = 1.0
    return [e1, e2, e3]


def sl2_basis() -> List[np.ndarray]:
    g1 = 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]])
    g2 = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]])
    g3 = 0.5 * np.array([[0.0, 1.0], [-1.0, 0.0]])
    return [g1, g2, g3]


def _su2_basis() -> List[np.ndarray]:
    return [
        0.5 * np.array([0.0, 1.0, 0.0, 0.0]),
        0.5 * np.array([0.0, 0.0, 1.0, 0.0]),
        0.5 * np.array([0.0, 0.0, 0.0, 1.0]),
    ]


def build_model(model_id: str) -> GroupModel:
    """Build a model whose generators realize the catalog entry's frame."""
    if model_id == "heisenberg":
        frame = reeb_frame(catalog_entry("h3").structure)
        basis, kind, identity = _heisenberg_basis(), "matrix", np.eye(3)
    elif model_id == "a_plus_r":
        frame = reeb_frame(catalog_entry("aplus").structure)
        basis, kind, identity = _a_plus_r_basis(), "matrix", np.eye(3)
    elif model_id == "sl2":
        entry = catalog_entry("sl2_elliptic_killing")
        # Fix the frame order to the 2x2 realization used by the isometry
        # maps: (g1, g2) with Reeb vector -g3.
        frame = frame_from_orthonormal(
            entry.structure.algebra, np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
        )
        basis, kind, identity = sl2_basis(), "matrix", np.eye(2)
    elif model_id == "su2":
        frame = reeb_frame(catalog_entry("su2_killing").structure)
        basis, kind, identity = _su2_basis(), "quaternion", np.array([1.0, 0, 0, 0])
    else:
        raise KeyError(f"unknown model {model_id!r}; choose from {MODEL_IDS}")

    def realize(vec):
        return sum(float(vec[j]) * basis[j] for j in range(3))

    model = GroupModel(
        model_id, kind, frame, realize(frame.f1), realize(frame.f2), realize(frame.f0),
        identity,
    )
    _assert_model_matches_frame(model)
    return model


def _assert_model_matches_frame(model: GroupModel) -> None:
    f = model.frame
    pairs = [
        (model.commutator(model.a1, model.a0), f.c01_1, f.c01_2, 0.0),
        (model.commutator(model.a2, model.a0), f.c02_1, f.c02_2, 0.0),
        (model.commutator(model.a2, model.a1), f.c12_1, f.c12_2, 1.0),
    ]
    for got, k1, k2, k0 in pairs:
        want = k1 * model.a1 + k2 * model.a2 + k0 * model.a0
        if float(np.max(np.abs(got - want))) > 1e-12:
            raise AssertionError(
                f"model {model.id}: generator commutators do not realize the frame"
            )


# --- vertical subsystem -----------------------------------------------------

def vertical_rhs(
    frame: AdaptedFrame, h1: float, h2: float, h0: float
) -> Tuple[float, float, float]:
    """Covector equations of the normal geodesic flow for this frame."""
    w = frame.c12_1 * h1 + frame.c12_2 * h2 + h0
    dh1 = -w * h2
    dh2 = w * h1
    dh0 = -(frame.c01_1 * h1 + frame.c01_2 * h2) * h1 - (
        frame.c02_1 * h1 + frame.c02_2 * h2
    ) * h2
    return dh1, dh2, dh0


# --- coupled integration ----------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    model_id: str
    times: np.ndarray
    covectors: np.ndarray  # shape (n+1, 3): columns h1, h2, h0
    elements: np.ndarray   # shape (n+1, ...) group elements
    max_group_defect: float

    @property
    def endpoint(self) -> np.ndarray:
        return self.elements[-1]

    @property
    def final_covector(self) -> Tuple[float, float, float]:
        h = self.covectors[-1]
        return float(h[0]), float(h[1]), float(h[2])

    def hamiltonian(self) -> np.ndarray:
        return 0.5 * (self.covectors[:, 0] ** 2 + self.covectors[:, 1] ** 2)

    def hamiltonian_drift(self) -> float:
        h = self.hamiltonian()
        return float(np.max(np.abs(h - h[0])))


def integrate_geodesic(
    model: GroupModel,
    frame: AdaptedFrame,
    initial: GeodesicState,
    t_final: float,
    steps: int,
) -> Trajectory:
    """Fixed-step RK4 on the coupled horizontal + vertical system.

    Quaternion states are renormalized after every step; the pre-projection
    defect is what :attr:`Trajectory.max_group_defect` reports.  Matrix
    states are never projected.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = t_final / steps
    g = np.array(initial.g, dtype=float)
    h = np.array([initial.h1, initial.h2, initial.h0], dtype=float)

    times = np.linspace(0.0, t_final, steps + 1)
    covectors = np.empty((steps + 1, 3))
    elements = np.empty((steps + 1,) + g.shape)
    covectors[0] = h
    elements[0] = g
    max_defect = model.group_defect(g)
    quaternion = model.kind == "quaternion"

    def rhs(gc, hc):
        dg = model.mul(gc, hc[0] * model.a1 + hc[1] * model.a2)
        dh = np.array(vertical_rhs(frame, hc[0], hc[1], hc[2]))
        return dg, dh

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(steps):
            k1g, k1h = rhs(g, h)
            k2g, k2h = rhs(g + 0.5 * dt * k1g, h + 0.5 * dt * k1h)
            k3g, k3h = rhs(g + 0.5 * dt * k2g, h + 0.5 * dt * k2h)
            k4g, k4h = rhs(g + dt * k3g, h + dt * k3h)
            g = g + (dt / 6.0) * (k1g + 2 * k2g + 2 * k3g + k4g)
            h = h + (dt / 6.0) * (k1h + 2 * k2h + 2 * k3h + k4h)
            if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
                raise IntegrationBlowUpError(n + 1)
            max_defect = max(max_defect, model.group_defect(g))
            if quaternion:
                g = g / np.linalg.norm(g)
            covectors[n + 1] = h
            elements[n + 1] = g

    return Trajectory(model.id, times, covectors, elements, max_defect)


def integrate_controls(
    model: GroupModel,
    controls: Sequence[Tuple[float, float, float]],
    t_final: float,
    steps: int = 1000,
) -> np.ndarray:
    """Endpoint of g' = g (u1 A1 + u2 A2 + u0 A0) for piecewise-constant u.

    Each control triple acts for an equal share of ``t_final``; ``steps`` is
    the total RK4 step count, split evenly across segments.
    """
    if not controls:
        raise ValueError("control schedule must be nonempty")
    seg_steps = max(1, steps // len(controls))
    seg_t = t_final / len(controls)
    g = np.array(model.identity, dtype=float)
    quaternion = model.kind == "quaternion"
    with np.errstate(over="ignore", invalid="ignore"):
        for u1, u2, u0 in controls:
            m = model.combo(u1, u2, u0)
            dt = seg_t / seg_steps
            for n in range(seg_steps):
                k1 = model.mul(g, m)
                k2 = model.mul(g + 0.5 * dt * k1, m)
                k3 = model.mul(g + 0.5 * dt * k2, m)
                k4 = model.mul(g + dt * k3, m)
                g = g + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                if not np.all(np.isfinite(g)):
                    raise IntegrationBlowUpError(n + 1)
                if quaternion:
                    g = g / np.linalg.norm(g)
    return g


# --- shooting ---------------------------------------------------------------

@dataclass(frozen=True)
class ShootingResult:
    """Heuristic distance estimate; never a claim of optimality."""

    distance: float
    covector: Tuple[float, float, float]
    endpoint_error: float
    converged: bool


HIT_TOLERANCE = 1e-6


def _shoot_steps(t: float) -> int:
    # Order-4 steps: error ~ (1/80)^4 * t stays two decades under the hit
    # tolerance for desk-scale times.
    return max(40, int(math.ceil(80.0 * t)))


def _shoot_endpoint(model, alpha, h0, t):
    """Endpoint only; no trajectory storage, for use inside optimizers."""
    frame = model.frame
    g = np.array(model.identity, dtype=float)
    h = np.array([math.cos(alpha), math.sin(alpha), h0])
    steps = _shoot_steps(t)
    dt = t / steps
    quaternion = model.kind == "quaternion"
    for _ in range(steps):
        k1g = model.mul(g, h[0] * model.a1 + h[1] * model.a2)
        k1h = np.array(vertical_rhs(frame, h[0], h[1], h[2]))
        g2, h2 = g + 0.5 * dt * k1g, h + 0.5 * dt * k1h
        k2g = model.mul(g2, h2[0] * model.a1 + h2[1] * model.a2)
        k2h = np.array(vertical_rhs(frame, h2[0], h2[1], h2[2]))
        g3, h3 = g + 0.5 * dt * k2g, h + 0.5 * dt * k2h
        k3g = model.mul(g3, h3[0] * model.a1 + h3[1] * model.a2)
        k3h = np.array(vertical_rhs(frame, h3[0], h3[1], h3[2]))
        g4, h4 = g + dt * k3g, h + dt * k3h
        k4g = model.mul(g4, h4[0] * model.a1 + h4[1] * model.a2)
        k4h = np.array(vertical_rhs(frame, h4[0], h4[1], h4[2]))
        g = g + (dt / 6.0) * (k1g + 2 * k2g + 2 * k3g + k4g)
        h = h + (dt / 6.0) * (k1h + 2 * k2h + 2 * k3h + k4h)
        if quaternion:
            g = g / np.linalg.norm(g)
    return g


def _batched_endpoints(model, alphas, h0s, t):
    """Endpoints for a whole batch of unit covectors at a common time t."""
    frame = model.frame
    n = alphas.size
    h = np.column_stack([np.cos(alphas), np.sin(alphas), h0s])
    if model.kind == "quaternion":
        g = np.tile(model.identity, (n, 1))

        def mul(gs, ms):
            w1, x1, y1, z1 = gs.T
            w2, x2, y2, z2 = ms.T
            return np.column_stack([
                w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            ])

        def combo(hs):
            return hs[:, :1] * model.a1 + hs[:, 1:2] * model.a2
    else:
        g = np.tile(model.identity, (n, 1, 1))

        def mul(gs, ms):
            return gs @ ms

        def combo(hs):
            return (
                hs[:, 0, None, None] * model.a1 + hs[:, 1, None, None] * model.a2
            )

    def vertical(hs):
        w = frame.c12_1 * hs[:, 0] + frame.c12_2 * hs[:, 1] + hs[:, 2]
        return np.column_stack([
            -w * hs[:, 1],
            w * hs[:, 0],
            -(frame.c01_1 * hs[:, 0] + frame.c01_2 * hs[:, 1]) * hs[:, 0]
            - (frame.c02_1 * hs[:, 0] + frame.c02_2 * hs[:, 1]) * hs[:, 1],
        ])

    steps = _shoot_steps(t)
    dt = t / steps
    for _ in range(steps):
        k1g, k1h = mul(g, combo(h)), vertical(h)
        g2, h2 = g + 0.5 * dt * k1g, h + 0.5 * dt * k1h
        k2g, k2h = mul(g2, combo(h2)), vertical(h2)
        g3, h3 = g + 0.5 * dt * k2g, h + 0.5 * dt * k2h
        k3g, k3h = mul(g3, combo(h3)), vertical(h3)
        g4, h4 = g + dt * k3g, h + dt * k3h
        k4g, k4h = mul(g4, combo(h4)), vertical(h4)
        g = g + (dt / 6.0) * (k1g + 2 * k2g + 2 * k3g + k4g)
        h = h + (dt / 6.0) * (k1h + 2 * k2h + 2 * k3h + k4h)
        if model.kind == "quaternion":
            g = g / np.linalg.norm(g, axis=1, keepdims=True)
    return g


def shoot_distance(
    model: GroupModel,
    target: np.ndarray,
    budget: int = 200,
    t_max: float = 2.0,
    h0_max: float = 3.0,
) -> ShootingResult:
    """Estimate the path-length distance from the identity to ``target``.

    Initial covectors are arc-length normalized (h1^2 + h2^2 = 1, free h0)
    so the time of flight is the candidate length.  A coarse deterministic
    grid over (direction angle, h0, t) is refined with Nelder-Mead simplex
    (reflection 1, expansion 2, contraction 1/2, shrink 1/2, at most
    ``budget`` iterations).  Returns the shortest refined hit whose endpoint
    error is below 1e-6, else the best found with its error.  Candidates are
    reduced in grid-index order, so the result is schedule-independent.
    """
    target = np.asarray(target, dtype=float)
    if float(np.max(np.abs(target - model.identity))) <= 1e-12:
        return ShootingResult(0.0, (0.0, 0.0, 0.0), 0.0, True)

    def objective(params):
        alpha, h0, t = params
        if t <= 0.0:
            return 10.0 + abs(t)
        end = _shoot_endpoint(model, alpha, h0, t)
        return float(np.linalg.norm(end - target))

    alphas = np.linspace(0.0, 2.0 * math.pi, 12, endpoint=False)
    h0s = np.linspace(-h0_max, h0_max, 9)
    ts = np.linspace(0.15, t_max, 10)
    grid_a, grid_h = np.meshgrid(alphas, h0s, indexing="ij")
    grid_a, grid_h = grid_a.ravel(), grid_h.ravel()
    candidates = []
    for k, t in enumerate(ts):
        ends = _batched_endpoints(model, grid_a, grid_h, float(t))
        errs = np.linalg.norm(
            ends.reshape(ends.shape[0], -1) - target.ravel(), axis=1
        )
        for idx in range(errs.size):
            candidates.append(
                (float(errs[idx]), int(idx), k, float(grid_a[idx]),
                 float(grid_h[idx]), float(t))
            )
    candidates.sort()  # lexicographic: error first, then grid indices

    hits = []
    best = None
    for err, _, _, alpha, h0, t in candidates[:3]:
        res = minimize(
            objective,
            x0=np.array([alpha, h0, t]),
            method="Nelder-Mead",
            options={
                "maxiter": budget,
                "xatol": 1e-10,
                "fatol": 1e-12,
            },
        )
        alpha_r, h0_r, t_r = res.x
        err_r = float(res.fun)
        cov = (math.cos(alpha_r), math.sin(alpha_r), float(h0_r))
        result = ShootingResult(float(t_r), cov, err_r, err_r < HIT_TOLERANCE)
        if result.converged:
            hits.append(result)
        if best is None or err_r < best.endpoint_error:
            best = result
    if hits:
        return min(hits, key=lambda r: r.distance)
    return best


# --- export -----------------------------------------------------------------

def trajectory_to_csv(traj: Trajectory, stream: IO[str]) -> None:
    """CSV rows "t,h1,h2,h0,g00,g01,..." with row-major group entries."""
    flat0 = traj.elements[0].ravel()
    header = ["t", "h1", "h2", "h0"] + [f"g{i//_cols(traj)}{i%_cols(traj)}" for i in range(flat0.size)]
    writer = csv.writer(stream)
    writer.writerow(header)
    for t, h, g in zip(traj.times, traj.covectors, traj.elements):
        writer.writerow(
            [repr(float(t))]
            + [repr(float(x)) for x in h]
            + [repr(float(x)) for x in g.ravel()]
        )


def _cols(traj: Trajectory) -> int:
    shape = traj.elements[0].shape
    return shape[1] if len(shape) == 2 else shape[0]
