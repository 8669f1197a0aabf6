"""Global numerical tolerance handling.

Every "is this coefficient zero" decision in the library is made relative to
a scale (largest structure constant in play) times a single relative
tolerance.  The default is 1e-9 and can be overridden through the SR3D_TOL
environment variable.
"""

import os

DEFAULT_REL_TOL = 1e-9


def rel_tol() -> float:
    """Relative tolerance used for rank / zero decisions.

    Reads SR3D_TOL from the environment on every call so tests and CLI runs
    can override it without re-importing.
    """
    raw = os.environ.get("SR3D_TOL")
    if raw is None:
        return DEFAULT_REL_TOL
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"SR3D_TOL must be a float, got {raw!r}") from exc
    if not value > 0.0:
        raise ValueError(f"SR3D_TOL must be positive, got {value}")
    return value
