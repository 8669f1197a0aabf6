"""Explicit isometry between the affine-line group model and SL(2).

The group A+(R) x R is realized as 3x3 matrices [[-y, 0, x], [0, 1, z],
[0, 0, 1]] with y < 0, carrying the left-invariant structure spanned by
(e2, e1 + e3) with Reeb vector -e3.  In these coordinates a point-dependent
rotation of the horizontal frame produces the coordinate frame

    fhat1 = ( y sin z, -y cos z, -sin z)
    fhat2 = (-y cos z, -y sin z,  cos z)

whose bracket relations match those of the canonical SL(2) frame
(g1, g2, g0 = -g3).  Flowing both control systems with equal controls
therefore intertwines endpoints; composing the resulting endpoint maps
gives the closed-form diffeomorphism

    Psi(rho, theta, phi) = (rho cos theta)^(-1/2) [[cos phi, sin phi],
                           [rho sin(theta - phi), rho cos(theta - phi)]]

in half-plane polar coordinates (x = rho sin theta, y = -rho cos theta,
phi = z / 2).  Everything here is a verbatim transcription of those closed
forms plus the redundancy checks that certify them numerically: endpoint-map
consistency, control-flow (Nagano) intertwining, pushforward of the frame,
and the kernel / centrality facts that make Psi well defined on the
quotient by z -> z + 4 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .geodesics import sl2_basis

TWO_PI = 2.0 * math.pi


class ChartExitError(RuntimeError):
    """A flow left the |z| < 2 pi chart where the comparison is valid."""


@dataclass(frozen=True)
class APoint:
    """Cartesian coordinates on the affine model; y < 0 strictly."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not self.y < 0:
            raise ValueError(f"APoint requires y < 0, got y = {self.y}")


@dataclass(frozen=True)
class PolarPoint:
    """Half-plane polar coordinates (rho, theta) plus the third coordinate.

    ``phi_or_z`` is the unbounded cover coordinate z, or the quotient angle
    phi = z / 2 in [-pi, pi], depending on context.
    """

    rho: float
    theta: float
    phi_or_z: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"PolarPoint requires rho > 0, got {self.rho}")
        if not abs(self.theta) < 0.5 * math.pi:
            raise ValueError(f"PolarPoint requires |theta| < pi/2, got {self.theta}")


def to_polar(p: APoint) -> PolarPoint:
    """x = rho sin(theta), y = -rho cos(theta); theta measured from the -y axis."""
    rho = math.hypot(p.x, p.y)
    theta = math.atan2(p.x, -p.y)
    return PolarPoint(rho, theta, p.z)


def from_polar(pp: PolarPoint) -> APoint:
    return APoint(
        pp.rho * math.sin(pp.theta), -pp.rho * math.cos(pp.theta), pp.phi_or_z
    )


def half_angle_ratio(x: float, y: float) -> float:
    """tan(theta/2) for the half-plane point (x, y), continuous through x = 0.

    Algebraically equal to (y + sqrt(x^2 + y^2)) / x for x != 0, but the
    form x / (rho - y) has no cancellation near x = 0 and extends to 0 there.
    """
    rho = math.hypot(x, y)
    return x / (rho - y)


# --- group operations on the affine model -----------------------------------

IDENTITY_APOINT = APoint(0.0, -1.0, 0.0)


def a_mul(p: APoint, q: APoint) -> APoint:
    """Group law (x, y, z)(x', y', z') = (x - y x', -y y', z + z')."""
    return APoint(p.x - p.y * q.x, -p.y * q.y, p.z + q.z)


def apoint_to_matrix(p: APoint) -> np.ndarray:
    return np.array([[-p.y, 0.0, p.x], [0.0, 1.0, p.z], [0.0, 0.0, 1.0]])


def matrix_to_apoint(g: np.ndarray) -> APoint:
    return APoint(float(g[0, 2]), -float(g[0, 0]), float(g[1, 2]))


# --- coordinate frame on the chart -------------------------------------------

def frame_hat(p: APoint) -> Tuple[np.ndarray, np.ndarray]:
    """The rotated orthonormal frame in (dx, dy, dz) components."""
    s, c = math.sin(p.z), math.cos(p.z)
    f1 = np.array([p.y * s, -p.y * c, -s])
    f2 = np.array([-p.y * c, -p.y * s, c])
    return f1, f2


def f0_chart() -> np.ndarray:
    """Reeb vector of the structure in chart components: -d/dz."""
    return np.array([0.0, 0.0, -1.0])


# --- endpoint maps ------------------------------------------------------------

def map_F(t1: float, t2: float, t0: float) -> APoint:
    """Endpoint of the composed frame flows (rescaled by 2) on the affine model."""
    tau = math.tanh(t2)
    s = math.exp(-2.0 * t1)
    d = 1.0 + tau * tau
    return APoint(
        2.0 * s * tau / d,
        -s * (1.0 - tau * tau) / d,
        2.0 * (math.atan(tau) - t0),
    )


def map_F_inv(p: APoint) -> Tuple[float, float, float]:
    """Closed-form inverse of :func:`map_F`; defined on the whole half-space."""
    rho = math.hypot(p.x, p.y)
    xi = half_angle_ratio(p.x, p.y)
    return (-0.5 * math.log(rho), math.atanh(xi), math.atan(xi) - 0.5 * p.z)


def map_G(t1: float, t2: float, t0: float) -> np.ndarray:
    """Product of the three exponential factors on the SL(2) side.

    diag(e^t1, e^-t1) . [[cosh t2, sinh t2], [sinh t2, cosh t2]]
    . [[cos t0, -sin t0], [sin t0, cos t0]]; each factor has determinant 1.
    """
    first = np.array([[math.exp(t1), 0.0], [0.0, math.exp(-t1)]])
    second = np.array(
        [[math.cosh(t2), math.sinh(t2)], [math.sinh(t2), math.cosh(t2)]]
    )
    third = np.array(
        [[math.cos(t0), -math.sin(t0)], [math.sin(t0), math.cos(t0)]]
    )
    return first @ second @ third


def psi_entries(rho, theta, phi, signs=(1.0, 1.0, 1.0, 1.0), arg_sign=1.0):
    """Entries of Psi; broadcasts over array inputs.

    ``signs`` and ``arg_sign`` exist solely as a mutation hook for the
    certification tests; production callers leave them at +1.
    """
    pref = 1.0 / np.sqrt(rho * np.cos(theta))
    delta = arg_sign * (theta - phi)
    return (
        signs[0] * pref * np.cos(phi),
        signs[1] * pref * np.sin(phi),
        signs[2] * pref * rho * np.sin(delta),
        signs[3] * pref * rho * np.cos(delta),
    )


def map_Psi(pp: PolarPoint) -> np.ndarray:
    """The global isometry, with ``phi_or_z`` read as the angle phi."""
    m11, m12, m21, m22 = psi_entries(pp.rho, pp.theta, pp.phi_or_z)
    return np.array([[m11, m12], [m21, m22]])


PsiFn = Callable[..., Tuple[float, float, float, float]]


def psi_of_apoint(p: APoint, psi: PsiFn = psi_entries) -> np.ndarray:
    """Psi evaluated on a chart point, converting z to phi = z / 2."""
    pp = to_polar(p)
    m11, m12, m21, m22 = psi(pp.rho, pp.theta, 0.5 * pp.phi_or_z)
    return np.array([[m11, m12], [m21, m22]])


def psi_consistency(
    t1: float, t2: float, t0: float, psi: PsiFn = psi_entries
) -> float:
    """Max-norm gap between Psi(polar(F(t))) and G(t); zero analytically."""
    lhs = psi_of_apoint(map_F(t1, t2, t0), psi)
    rhs = map_G(t1, t2, t0)
    return float(np.max(np.abs(lhs - rhs)))


# --- control flows on both sides ----------------------------------------------

def _chart_rhs(x, y, z, u1, u2, u0):
    s, c = math.sin(z), math.cos(z)
    dx = u1 * y * s - u2 * y * c
    dy = -u1 * y * c - u2 * y * s
    dz = -u1 * s + u2 * c - u0
    return dx, dy, dz


def integrate_chart(
    controls: Sequence[Tuple[float, float, float]],
    t_final: float,
    steps: int,
    start: APoint = IDENTITY_APOINT,
    enforce_chart: bool = True,
) -> APoint:
    """RK4 flow of u1 fhat1 + u2 fhat2 + u0 f0 in chart coordinates."""
    x, y, z = start.x, start.y, start.z
    seg_steps = max(1, steps // len(controls))
    dt = t_final / len(controls) / seg_steps
    for u1, u2, u0 in controls:
        for _ in range(seg_steps):
            k1 = _chart_rhs(x, y, z, u1, u2, u0)
            k2 = _chart_rhs(x + 0.5 * dt * k1[0], y + 0.5 * dt * k1[1],
                            z + 0.5 * dt * k1[2], u1, u2, u0)
            k3 = _chart_rhs(x + 0.5 * dt * k2[0], y + 0.5 * dt * k2[1],
                            z + 0.5 * dt * k2[2], u1, u2, u0)
            k4 = _chart_rhs(x + dt * k3[0], y + dt * k3[1], z + dt * k3[2],
                            u1, u2, u0)
            x += (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            y += (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            z += (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            if enforce_chart and abs(z) >= TWO_PI:
                raise ChartExitError(f"|z| reached {abs(z):.3f} >= 2 pi")
    return APoint(x, y, z)


def _sl2_rhs(a, b, c, d, u1, u2, u0):
    # u1 g1 + u2 g2 + u0 g0 = 0.5 [[u1, u2 - u0], [u2 + u0, -u1]]
    m11 = 0.5 * u1
    m12 = 0.5 * (u2 - u0)
    m21 = 0.5 * (u2 + u0)
    return (
        a * m11 + b * m21, a * m12 - b * m11,
        c * m11 + d * m21, c * m12 - d * m11,
    )


def integrate_sl2(
    controls: Sequence[Tuple[float, float, float]],
    t_final: float,
    steps: int,
) -> np.ndarray:
    """RK4 flow of the matching left-invariant system on SL(2)."""
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    seg_steps = max(1, steps // len(controls))
    dt = t_final / len(controls) / seg_steps
    for u1, u2, u0 in controls:
        for _ in range(seg_steps):
            k1 = _sl2_rhs(a, b, c, d, u1, u2, u0)
            k2 = _sl2_rhs(a + 0.5 * dt * k1[0], b + 0.5 * dt * k1[1],
                          c + 0.5 * dt * k1[2], d + 0.5 * dt * k1[3], u1, u2, u0)
            k3 = _sl2_rhs(a + 0.5 * dt * k2[0], b + 0.5 * dt * k2[1],
                          c + 0.5 * dt * k2[2], d + 0.5 * dt * k2[3], u1, u2, u0)
            k4 = _sl2_rhs(a + dt * k3[0], b + dt * k3[1],
                          c + dt * k3[2], d + dt * k3[3], u1, u2, u0)
            a += (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            b += (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            c += (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            d += (dt / 6.0) * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    return np.array([[a, b], [c, d]])


def nagano_check(
    controls: Sequence[Tuple[float, float, float]],
    t_final: float,
    steps: int = 4000,
    psi: PsiFn = psi_entries,
) -> float:
    """Endpoint intertwining: Psi(chart endpoint) vs SL(2) endpoint.

    Both systems are driven by the same piecewise-constant control from
    their identities; the max-norm endpoint gap is the residual.
    """
    q_end = integrate_chart(controls, t_final, steps)
    x_end = integrate_sl2(controls, t_final, steps)
    return float(np.max(np.abs(psi_of_apoint(q_end, psi) - x_end)))


# --- pushforward of the frame ---------------------------------------------------

def _flow_frame_field(p: APoint, index: int, eps: float, steps: int = 8) -> APoint:
    u = (1.0, 0.0, 0.0) if index == 1 else (0.0, 1.0, 0.0)
    return integrate_chart([u], eps, steps, start=p, enforce_chart=False)


def pushforward_check(p: APoint, eps: float, psi: PsiFn = psi_entries) -> float:
    """Forward-difference pushforward against the left-invariant generators.

    residual = max_i || (Psi(flow_i(eps, p)) - Psi(p)) / eps - Psi(p) G_i ||;
    expected O(eps) by Taylor expansion.
    """
    g1, g2, _ = sl2_basis()
    base = psi_of_apoint(p, psi)
    residual = 0.0
    for index, gen in ((1, g1), (2, g2)):
        moved = psi_of_apoint(_flow_frame_field(p, index, eps), psi)
        diff = (moved - base) / eps
        residual = max(residual, float(np.max(np.abs(diff - base @ gen))))
    return residual


def pushforward_gram(p: APoint, eps: float = 1e-4, psi: PsiFn = psi_entries) -> np.ndarray:
    """Gram matrix of the pushed-forward frame in the SL(2) metric.

    Central differences give the image vectors; left translation back to
    the identity expresses them in the (g1, g2, g3) basis, where the metric
    makes (g1, g2) orthonormal.  Should be the 2x2 identity up to O(eps^2).
    """
    base = psi_of_apoint(p, psi)
    base_inv = np.linalg.inv(base)
    horizontal = []
    for index in (1, 2):
        plus = psi_of_apoint(_flow_frame_field(p, index, eps), psi)
        minus = psi_of_apoint(_flow_frame_field(p, index, -eps), psi)
        v = base_inv @ (plus - minus) / (2.0 * eps)
        # Decompose v = a g1 + b g2 + c g3.
        a = float(v[0, 0] - v[1, 1])
        b = float(v[0, 1] + v[1, 0])
        horizontal.append((a, b))
    return np.array(
        [[hi[0] * hj[0] + hi[1] * hj[1] for hj in horizontal] for hi in horizontal]
    )


# --- quotient behaviour ----------------------------------------------------------

def kernel_point(k: int) -> APoint:
    """The k-th preimage of the identity, (0, -1, -4 k pi)."""
    return APoint(0.0, -1.0, -4.0 * math.pi * k)


def quotient_check(k_range: Sequence[int], rng: Optional[np.random.Generator] = None,
                   psi: PsiFn = psi_entries) -> bool:
    """Kernel points map to the identity and are central in the group."""
    if rng is None:
        rng = np.random.default_rng(0)
    for k in k_range:
        img = psi_of_apoint(kernel_point(k), psi)
        if float(np.max(np.abs(img - np.eye(2)))) > 1e-12:
            return False
        center = kernel_point(k)
        for _ in range(100):
            q = APoint(
                float(rng.uniform(-3, 3)),
                float(rng.uniform(-3, -0.1)),
                float(rng.uniform(-3, 3)),
            )
            left, right = a_mul(center, q), a_mul(q, center)
            if (left.x, left.y, left.z) != (right.x, right.y, right.z):
                return False
    return True


# --- finite-difference bracket certification -------------------------------------

def _chart_field(p: APoint, index: int) -> np.ndarray:
    if index == 0:
        return f0_chart()
    return frame_hat(p)[index - 1]


def finite_difference_bracket(
    index_a: int, index_b: int, p: APoint, step: float = 1e-4
) -> np.ndarray:
    """Central-difference Lie bracket [X_a, X_b](p) of the chart fields.

    [X, Y] = dY[X] - dX[Y] evaluated with symmetric differences of the
    coefficient functions along straight coordinate shifts.
    """
    coords = np.array([p.x, p.y, p.z])

    def field(idx, c):
        return _chart_field(APoint(c[0], c[1], c[2]), idx)

    xa = field(index_a, coords)
    xb = field(index_b, coords)

    def directional(idx, direction):
        plus = field(idx, coords + step * direction)
        minus = field(idx, coords - step * direction)
        return (plus - minus) / (2.0 * step)

    return directional(index_b, xa) - directional(index_a, xb)


# --- certification driver ----------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool


def _result(name: str, samples: int, residual: float, tol: float) -> CheckResult:
    return CheckResult(name, samples, residual, tol, residual <= tol)


NON_HOMOMORPHISM_PRODUCT = np.array([[2.0, 0.0], [0.5, 0.5]])


def run_certification(
    samples: int = 50,
    seed: int = 42,
    psi: PsiFn = psi_entries,
    nagano_steps: int = 4000,
) -> List[CheckResult]:
    """Run the whole certification battery; deterministic for a fixed seed.

    ``samples`` scales the randomized checks (endpoint-map consistency uses
    20x samples, the control-flow check uses 1x, pushforward decay 0.4x).
    With samples = 0 only the exact fixed-point checks run.
    """
    rng = np.random.default_rng(seed)
    results: List[CheckResult] = []

    # Exact fixed points.
    half = math.sqrt(0.5)
    identity_gap = float(np.max(np.abs(
        np.array(_psi_matrix(psi, 1.0, 0.0, 0.0)) - np.eye(2)
    )))
    results.append(_result("psi_identity_fixed_point", 1, identity_gap, 1e-12))

    prod = np.array(_psi_matrix(psi, half, 0.25 * math.pi, math.pi)) @ np.array(
        _psi_matrix(psi, half, -0.25 * math.pi, -math.pi)
    )
    prod_gap = float(np.max(np.abs(prod - NON_HOMOMORPHISM_PRODUCT)))
    results.append(_result("psi_nonhomomorphism_product", 1, prod_gap, 1e-12))

    ks = range(-2, 3)
    kernel_gap = 0.0
    for k in ks:
        p = map_F(0.0, 0.0, 2.0 * math.pi * k)
        expect = kernel_point(k)
        kernel_gap = max(
            kernel_gap,
            abs(p.x - expect.x), abs(p.y - expect.y), abs(p.z - expect.z),
        )
    results.append(_result("kernel_points", len(list(ks)), kernel_gap, 1e-12))
    results.append(_result(
        "kernel_centrality", 5,
        0.0 if quotient_check(range(-2, 3), rng, psi) else 1.0, 0.0,
    ))

    if samples <= 0:
        return results

    # Matrix-side commutators are exact integer combinations.
    g1, g2, g3 = sl2_basis()
    g0 = -g3
    comm_gap = max(
        float(np.max(np.abs((g1 @ g0 - g0 @ g1) - (-g2)))),
        float(np.max(np.abs((g2 @ g0 - g0 @ g2) - g1))),
        float(np.max(np.abs((g2 @ g1 - g1 @ g2) - g0))),
    )
    results.append(_result("matrix_commutators", 3, comm_gap, 1e-14))

    # Finite-difference brackets of the chart frame.
    fd_gap = 0.0
    n_fd = 2 * samples
    for _ in range(n_fd):
        p = _random_apoint(rng)
        f1, f2 = frame_hat(p)
        fd_gap = max(
            fd_gap,
            float(np.max(np.abs(finite_difference_bracket(1, 0, p) - (-f2)))),
            float(np.max(np.abs(finite_difference_bracket(2, 0, p) - f1))),
            float(np.max(np.abs(finite_difference_bracket(2, 1, p) - f0_chart()))),
        )
    results.append(_result("frame_commutators_fd", n_fd, fd_gap, 1e-5))

    # Determinant identity and endpoint-map consistency.
    n_psi = 20 * samples
    det_gap = 0.0
    cons_gap = 0.0
    round_gap = 0.0
    for _ in range(n_psi):
        t1 = float(rng.uniform(-1.5, 1.5))
        t2 = float(rng.uniform(-3.0, 3.0))
        t0 = float(rng.uniform(-1.5, 1.5))
        cons_gap = max(cons_gap, psi_consistency(t1, t2, t0, psi))
        back = map_F_inv(map_F(t1, t2, t0))
        round_gap = max(
            round_gap, abs(back[0] - t1), abs(back[1] - t2), abs(back[2] - t0)
        )
        pp = to_polar(_random_apoint(rng))
        m = np.array(_psi_matrix(psi, pp.rho, pp.theta, 0.5 * pp.phi_or_z))
        det_gap = max(det_gap, abs(float(np.linalg.det(m)) - 1.0))
    results.append(_result("psi_consistency", n_psi, cons_gap, 1e-10))
    results.append(_result("endpoint_map_roundtrip", n_psi, round_gap, 1e-10))
    results.append(_result("psi_determinant", n_psi, det_gap, 1e-10))

    # Control-flow intertwining.
    nag_gap = 0.0
    for _ in range(samples):
        n_seg = int(rng.integers(1, 6))
        schedule = [tuple(rng.uniform(-1.0, 1.0, size=3)) for _ in range(n_seg)]
        nag_gap = max(nag_gap, nagano_check(schedule, 1.0, nagano_steps, psi))
    results.append(_result("nagano_intertwining", samples, nag_gap, 1e-6))

    # Pushforward: first-order decay in eps and orthonormality transport.
    n_push = max(1, (2 * samples) // 5)
    ratio_gap = 0.0
    gram_gap = 0.0
    for _ in range(n_push):
        p = _random_apoint(rng)
        r1 = pushforward_check(p, 1e-3, psi)
        r2 = pushforward_check(p, 5e-4, psi)
        ratio_gap = max(ratio_gap, abs(r2 / r1 - 0.5))
        gram_gap = max(
            gram_gap, float(np.max(np.abs(pushforward_gram(p, psi=psi) - np.eye(2))))
        )
    results.append(_result("pushforward_decay", n_push, ratio_gap, 0.2))
    results.append(_result("pushforward_orthonormality", n_push, gram_gap, 1e-6))

    return results


def _psi_matrix(psi: PsiFn, rho: float, theta: float, phi: float):
    m11, m12, m21, m22 = psi(rho, theta, phi)
    return ((m11, m12), (m21, m22))


def _random_apoint(rng: np.random.Generator) -> APoint:
    return APoint(
        float(rng.uniform(-2.0, 2.0)),
        float(rng.uniform(-2.5, -0.4)),
        float(rng.uniform(-2.5, 2.5)),
    )


def injectivity_collisions(grid: int = 50, psi: PsiFn = psi_entries) -> int:
    """Collision search for Psi over a grid of the fundamental domain.

    Returns the number of grid pairs whose images are within 1e-8 in max
    norm while the preimages are farther than 1e-8 apart.  Candidate pairs
    are generated with 16 half-cell-shifted quantizations, which cannot miss
    an image collision at this tolerance.
    """
    rho = np.linspace(0.25, 3.0, grid)
    theta = np.linspace(-1.45, 1.45, grid)
    phi = np.linspace(-math.pi + TWO_PI / grid, math.pi, grid)
    r, t, f = np.meshgrid(rho, theta, phi, indexing="ij")
    r, t, f = r.ravel(), t.ravel(), f.ravel()
    m11, m12, m21, m22 = psi(r, t, f)
    images = np.column_stack([m11, m12, m21, m22])
    pre = np.column_stack([r, t, f])

    cell = 1e-7
    collisions = set()
    scaled = images / cell
    for mask in range(16):
        shift = np.array([0.5 if mask & (1 << d) else 0.0 for d in range(4)])
        keys = np.floor(scaled + shift).astype(np.int64)
        order = np.lexsort(keys.T)
        sorted_keys = keys[order]
        same = np.all(sorted_keys[1:] == sorted_keys[:-1], axis=1)
        # Equal keys are contiguous after the sort; walk each run and test
        # every pair inside it (runs are tiny for a well-spread grid).
        boundaries = np.nonzero(~same)[0]
        starts = np.concatenate([[0], boundaries + 1])
        stops = np.concatenate([boundaries + 1, [len(order)]])
        for lo, hi in zip(starts, stops):
            if hi - lo < 2:
                continue
            group = order[lo:hi]
            for a in range(len(group)):
                for b in range(a + 1, len(group)):
                    i, j = int(group[a]), int(group[b])
                    pair = (min(i, j), max(i, j))
                    if pair in collisions:
                        continue
                    if np.max(np.abs(images[i] - images[j])) <= 1e-8 and np.max(
                        np.abs(pre[i] - pre[j])
                    ) > 1e-8:
                        collisions.add(pair)
    return len(collisions)
