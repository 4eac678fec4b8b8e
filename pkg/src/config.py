"""
config.py
Solver tolerances and worker count.

Precedence (lowest to highest):
    built-in defaults  <  environment variables  <  command-line flags

Environment variables
---------------------
    NCQM_QUAD_TOL   : relative quadrature tolerance      (default 1e-12)
    NCQM_ROOT_TOL   : root bracket width in eta          (default 1e-12)
    NCQM_CRIT_TOL   : critical-coupling bisection width  (default 1e-7)
    NCQM_THREADS    : worker processes for sweeps        (default 1)
"""

import os
from dataclasses import dataclass, replace
from typing import Mapping

from numerics import QuadratureSpec

ENV_PREFIX = "NCQM_"

DEFAULT_QUAD_TOL = 1e-12
DEFAULT_ROOT_TOL = 1e-12
DEFAULT_CRIT_TOL = 1e-7


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical knobs exposed to the user.

    Attributes:
        quad_tol : relative tolerance of every semi-infinite integral
        root_tol : final bracket width of the eta roots
        crit_tol : bisection width of the critical coupling search
        threads  : number of worker processes used by sweeps
    """

    quad_tol: float = DEFAULT_QUAD_TOL
    root_tol: float = DEFAULT_ROOT_TOL
    crit_tol: float = DEFAULT_CRIT_TOL
    threads: int = 1

    def __post_init__(self):
        for name in ("quad_tol", "root_tol", "crit_tol"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads!r}")

    @property
    def quadrature(self) -> QuadratureSpec:
        """QuadratureSpec matching quad_tol (absolute tolerance two orders lower)."""
        return QuadratureSpec(
            relative_tolerance=self.quad_tol,
            absolute_tolerance=self.quad_tol * 1e-2,
        )

    # ------------------------------------------------------------------------------
    # Layering
    # ------------------------------------------------------------------------------

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> "Tolerances":
        """Defaults overridden by any NCQM_* variable that is set."""
        environ = os.environ if environ is None else environ
        found = {}
        for field, cast in (("quad_tol", float), ("root_tol", float),
                            ("crit_tol", float), ("threads", int)):
            raw = environ.get(ENV_PREFIX + field.upper())
            if raw is None or raw.strip() == "":
                continue
            try:
                found[field] = cast(raw)
            except ValueError:
                raise ValueError(
                    f"{ENV_PREFIX + field.upper()}={raw!r} is not a valid {cast.__name__}"
                ) from None
        return cls(**found)

    def with_overrides(self, **overrides) -> "Tolerances":
        """Apply flag values; None means 'flag not given'."""
        given = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **given)


def resolve(environ: Mapping[str, str] | None = None, **flags) -> Tolerances:
    """Defaults -> environment -> flags."""
    return Tolerances.from_env(environ).with_overrides(**flags)
