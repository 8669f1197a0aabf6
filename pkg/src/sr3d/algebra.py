"""Core arithmetic for real 3-dimensional Lie algebras.

An algebra is stored as its full antisymmetric structure-constant tensor
``c`` with ``[e_i, e_j] = sum_k c[i, j, k] e_k``.  On top of that the module
provides the bracket, a Jacobi-identity verifier, the Killing form, basis
changes, and a coarse identification of the algebra among the isomorphism
classes that admit left-invariant contact structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Tuple

import numpy as np

from .config import rel_tol

Vector3 = np.ndarray

# Coarse isomorphism labels.  "a(R)+R" is the direct sum of the affine
# algebra of the line with a 1-dimensional center; "solv+"/"solv-" are the
# solvable families with 2-dimensional derived algebra split by the sign of
# the determinant of the adjoint action on it.
H3 = "h3"
A_PLUS_R = "a(R)+R"
SE2 = "se(2)"
SH2 = "sh(2)"
SOLV_PLUS = "solv+"
SOLV_MINUS = "solv-"
SL2 = "sl(2)"
SU2 = "su(2)"
OTHER = "other"

ALGEBRA_LABELS = (H3, A_PLUS_R, SE2, SH2, SOLV_PLUS, SOLV_MINUS, SL2, SU2, OTHER)


def as_vector3(coeffs: Iterable[float]) -> Vector3:
    """Coerce to a finite float vector of length 3."""
    v = np.asarray(tuple(coeffs), dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected 3 coefficients, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector coefficients must be finite")
    return v


@dataclass(frozen=True)
class LieAlgebra3:
    """A 3D real Lie algebra in a fixed basis.

    ``c[i, j, k]`` is the ``e_k`` coefficient of ``[e_i, e_j]``.  The tensor
    must be exactly antisymmetric in (i, j); construction rejects anything
    else rather than symmetrizing.  The Jacobi identity is *not* enforced at
    construction (see :func:`check_jacobi`) so that deliberately broken
    tensors can be built and reported on.
    """

    c: np.ndarray
    basis_labels: Tuple[str, str, str] = ("e1", "e2", "e3")

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.shape != (3, 3, 3):
            raise ValueError(f"structure tensor must be 3x3x3, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("structure constants must be finite")
        if not np.array_equal(c, -np.swapaxes(c, 0, 1)):
            raise ValueError("structure tensor is not antisymmetric in (i, j)")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))

    @classmethod
    def from_brackets(
        cls,
        brackets: Mapping[Tuple[int, int], Iterable[float]],
        basis_labels: Tuple[str, str, str] = ("e1", "e2", "e3"),
    ) -> "LieAlgebra3":
        """Build the tensor from the nonzero brackets ``{(i, j): [e_i, e_j]}``.

        The antisymmetric completion ``c[j, i] = -c[i, j]`` is filled in
        automatically.  Conflicting duplicate entries are rejected.
        """
        c = np.zeros((3, 3, 3))
        seen = {}
        for (i, j), coeffs in brackets.items():
            if i == j:
                raise ValueError(f"bracket ({i},{i}) must vanish by antisymmetry")
            key = (min(i, j), max(i, j))
            v = as_vector3(coeffs)
            signed = v if (i, j) == key else -v
            if key in seen and not np.array_equal(seen[key], signed):
                raise ValueError(f"conflicting values for bracket {key}")
            seen[key] = signed
            c[key[0], key[1], :] = signed
            c[key[1], key[0], :] = -signed
        return cls(c, basis_labels)

    @property
    def scale(self) -> float:
        """Largest absolute structure constant (0 for the abelian algebra)."""
        return float(np.max(np.abs(self.c)))

    def basis_vector(self, i: int) -> Vector3:
        e = np.zeros(3)
        e[i] = 1.0
        return e


def bracket(algebra: LieAlgebra3, x: Vector3, y: Vector3) -> Vector3:
    """Lie bracket [x, y] of two coefficient vectors."""
    return np.einsum("i,j,ijk->k", np.asarray(x, float), np.asarray(y, float), algebra.c)


def ad_matrix(algebra: LieAlgebra3, x: Vector3) -> np.ndarray:
    """Matrix of ad(x): y -> [x, y] in the algebra basis."""
    # (ad x)[k, j] = sum_i x_i c[i, j, k]
    return np.einsum("i,ijk->kj", np.asarray(x, float), algebra.c)


@dataclass(frozen=True)
class JacobiReport:
    max_residual: float
    tolerance: float
    passed: bool


def jacobi_tolerance(algebra: LieAlgebra3) -> float:
    # The Jacobi sum is quadratic in the constants, so the rounding floor
    # scales with (1 + max|c|)^2.
    return 1e-12 * (1.0 + algebra.scale) ** 2


def check_jacobi(algebra: LieAlgebra3) -> JacobiReport:
    """Verify the Jacobi identity; returns the worst residual and a verdict.

    Residual for indices (i, j, k, l):
    ``sum_m c[i,j,m] c[m,k,l] + c[j,k,m] c[m,i,l] + c[k,i,m] c[m,j,l]``.
    """
    c = algebra.c
    s = (
        np.einsum("ijm,mkl->ijkl", c, c)
        + np.einsum("jkm,mil->ijkl", c, c)
        + np.einsum("kim,mjl->ijkl", c, c)
    )
    residual = float(np.max(np.abs(s)))
    tol = jacobi_tolerance(algebra)
    return JacobiReport(residual, tol, residual <= tol)


def killing_form(algebra: LieAlgebra3) -> np.ndarray:
    """Killing form K[i, j] = trace(ad e_i . ad e_j); symmetric 3x3."""
    ads = [ad_matrix(algebra, algebra.basis_vector(i)) for i in range(3)]
    k = np.array([[np.trace(ads[i] @ ads[j]) for j in range(3)] for i in range(3)])
    return 0.5 * (k + k.T)


def is_unimodular(algebra: LieAlgebra3) -> bool:
    """True iff trace(ad x) = 0 for every x, within tolerance."""
    traces = np.einsum("ijj->i", algebra.c)
    return bool(np.max(np.abs(traces)) <= rel_tol() * (1.0 + algebra.scale))


def change_basis(algebra: LieAlgebra3, b: np.ndarray) -> LieAlgebra3:
    """Structure constants in the new basis e'_i = sum_j b[j, i] e_j.

    Columns of ``b`` are the new basis vectors in old coordinates.
    """
    b = np.asarray(b, float)
    b_inv = np.linalg.inv(b)
    c_new = np.einsum("ki,lj,klm,nm->ijn", b, b, algebra.c, b_inv)
    # Exact antisymmetry can be lost to rounding; restore it explicitly.
    c_new = 0.5 * (c_new - np.swapaxes(c_new, 0, 1))
    return LieAlgebra3(c_new, algebra.basis_labels)


def derived_subalgebra(algebra: LieAlgebra3) -> np.ndarray:
    """Orthonormal basis (rows) of the span of all brackets [e_i, e_j]."""
    gens = np.array(
        [algebra.c[0, 1], algebra.c[0, 2], algebra.c[1, 2]]
    )
    scale = max(1.0, algebra.scale)
    u, s, vt = np.linalg.svd(gens)
    rank = int(np.sum(s > rel_tol() * scale))
    return vt[:rank]


def identify_algebra(algebra: LieAlgebra3) -> str:
    """Coarse isomorphism label of the algebra.

    Discriminates on the dimension of the derived algebra, then on the
    adjoint action / Killing signature:

    * dim 0: abelian, not one of the contact-admitting classes -> "other";
    * dim 1: Heisenberg when the derived line is central, else a(R)+R;
    * dim 2: the adjoint action A of a complementary vector on the derived
      plane decides -- det A > 0 with trace 0 gives se(2), det A < 0 with
      trace 0 gives sh(2), nonzero trace gives solv+/solv- by sign of det;
    * dim 3: semisimple; Killing form definite gives su(2), else sl(2).

    Never raises: anything that fits no pattern is labelled "other".
    """
    scale = max(1.0, algebra.scale)
    tol = rel_tol() * scale
    derived = derived_subalgebra(algebra)
    dim = derived.shape[0]

    if dim == 0:
        return OTHER

    if dim == 1:
        d = derived[0]
        # Central derived line <=> [d, e_i] = 0 for all i.
        central = all(
            np.max(np.abs(bracket(algebra, d, algebra.basis_vector(i)))) <= tol
            for i in range(3)
        )
        return H3 if central else A_PLUS_R

    if dim == 2:
        # Pick the unit vector orthogonal to the derived plane as the
        # complement; ad of it preserves the plane (an ideal).
        normal = _unit_normal(derived)
        a_op = derived @ ad_matrix(algebra, normal) @ derived.T
        det = float(np.linalg.det(a_op))
        trace = float(np.trace(a_op))
        op_scale = max(1.0, float(np.max(np.abs(a_op))))
        if abs(det) <= rel_tol() * op_scale**2:
            return OTHER
        if abs(trace) <= rel_tol() * op_scale:
            return SE2 if det > 0 else SH2
        return SOLV_PLUS if det > 0 else SOLV_MINUS

    # dim == 3: semisimple.
    eigs = np.linalg.eigvalsh(killing_form(algebra))
    if np.max(np.abs(eigs)) <= tol**2:
        return OTHER
    if np.all(eigs < 0):
        return SU2
    if np.all(eigs > 0):  # impossible for a real form, but do not crash
        return OTHER
    return SL2


def _unit_normal(plane_basis: np.ndarray) -> Vector3:
    """Unit vector orthogonal to a 2-plane given by orthonormal rows."""
    n = np.cross(plane_basis[0], plane_basis[1])
    return n / np.linalg.norm(n)


def restrict_bilinear(form: np.ndarray, v1: Vector3, v2: Vector3) -> np.ndarray:
    """2x2 restriction of a symmetric bilinear form to span{v1, v2}."""
    vs = (v1, v2)
    return np.array([[vs[a] @ form @ vs[b] for b in range(2)] for a in range(2)])
