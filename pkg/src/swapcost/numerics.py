"""Scalar root finding: damped Newton-Raphson and bisection.

Both solvers are deterministic and allocation-free in the iteration loop.
Newton is the fast path for the invariant solves; bisection doubles as the
independent cross-check and as the fallback when Newton cannot make progress.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DerivativeVanished, NoBracket, NonConvergence

__all__ = [
    "RootConfig",
    "RootResult",
    "newton_raphson",
    "newton_raphson_fused",
    "bisection",
]

# Halvings allowed when a Newton step exits the validity domain.
_MAX_DAMPINGS = 10


@dataclass(frozen=True)
class RootConfig:
    rel_tolerance: float = 1e-12
    abs_tolerance: float = 1e-10
    max_iterations: int = 255


DEFAULT_ROOT_CONFIG = RootConfig()


@dataclass(frozen=True)
class RootResult:
    root: float
    iterations: int
    residual: float
    converged: bool


def newton_raphson(
    f: Callable[[float], float],
    df: Callable[[float], float],
    x0: float,
    config: RootConfig = DEFAULT_ROOT_CONFIG,
    domain: Callable[[float], bool] | None = None,
) -> RootResult:
    """Find a root of ``f`` starting from ``x0`` using damped Newton steps.

    Parameters
    ----------
    f, df : callables
        Residual and its derivative.
    x0 : float
        Initial iterate.
    config : RootConfig
        Tolerances and iteration budget. An iterate is accepted when the
        step size falls below ``max(abs_tolerance, rel_tolerance * |x|)``
        or the residual reaches exactly zero.
    domain : callable, optional
        Validity predicate. A step landing outside the domain is halved,
        up to a fixed number of times, before giving up.

    Raises
    ------
    DerivativeVanished
        If ``df`` evaluates to zero or the step is not finite.
    NonConvergence
        If the iteration budget or the damping budget is exhausted.
    """
    return newton_raphson_fused(lambda x: (f(x), df(x)), x0, config, domain)


def newton_raphson_fused(
    fdf: Callable[[float], tuple[float, float]],
    x0: float,
    config: RootConfig = DEFAULT_ROOT_CONFIG,
    domain: Callable[[float], bool] | None = None,
) -> RootResult:
    """Newton-Raphson with a fused residual/derivative callable.

    Same contract as :func:`newton_raphson`; the single callable returns
    ``(f(x), df(x))`` so shared subexpressions are evaluated once per
    iteration. This is the hot path for the invariant solves.
    """
    abs_tol = config.abs_tolerance
    rel_tol = config.rel_tolerance
    x = x0
    fx, dfx = fdf(x)
    if fx == 0.0:
        return RootResult(root=x, iterations=0, residual=0.0, converged=True)
    for i in range(1, config.max_iterations + 1):
        if dfx == 0.0 or not math.isfinite(dfx):
            raise DerivativeVanished(f"derivative {dfx!r} at x={x!r}")
        step = fx / dfx
        if not math.isfinite(step):
            raise DerivativeVanished(f"non-finite step at x={x!r}")
        x_new = x - step
        if domain is not None:
            halvings = 0
            while not domain(x_new):
                if halvings >= _MAX_DAMPINGS:
                    raise NonConvergence(
                        f"step from x={x!r} cannot be damped into the domain"
                    )
                step *= 0.5
                x_new = x - step
                halvings += 1
        fx_new, dfx_new = fdf(x_new)
        if abs(x_new - x) <= max(abs_tol, rel_tol * abs(x_new)) or fx_new == 0.0:
            return RootResult(root=x_new, iterations=i, residual=fx_new, converged=True)
        x, fx, dfx = x_new, fx_new, dfx_new
    raise NonConvergence(f"no root within {config.max_iterations} iterations")


def bisection(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    config: RootConfig = DEFAULT_ROOT_CONFIG,
) -> RootResult:
    """Find a root of ``f`` on ``[lo, hi]`` by interval halving.

    The endpoints must bracket a sign change. Converges when the interval
    width falls below ``max(abs_tolerance, rel_tolerance * |mid|)``.

    Raises
    ------
    NoBracket
        If ``f(lo)`` and ``f(hi)`` have the same nonzero sign.
    NonConvergence
        If the iteration budget is exhausted.
    """
    if lo > hi:
        lo, hi = hi, lo
    flo = f(lo)
    if flo == 0.0:
        return RootResult(root=lo, iterations=0, residual=0.0, converged=True)
    fhi = f(hi)
    if fhi == 0.0:
        return RootResult(root=hi, iterations=0, residual=0.0, converged=True)
    if (flo > 0.0) == (fhi > 0.0):
        raise NoBracket(f"f({lo!r})={flo!r} and f({hi!r})={fhi!r} have equal sign")
    abs_tol = config.abs_tolerance
    rel_tol = config.rel_tolerance
    for i in range(1, config.max_iterations + 1):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            # interval no longer representable any tighter
            return RootResult(root=mid, iterations=i, residual=f(mid), converged=True)
        fmid = f(mid)
        if fmid == 0.0:
            return RootResult(root=mid, iterations=i, residual=0.0, converged=True)
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if (hi - lo) <= max(abs_tol, rel_tol * abs(mid)):
            root = 0.5 * (lo + hi)
            return RootResult(root=root, iterations=i, residual=f(root), converged=True)
    raise NonConvergence(f"interval not resolved within {config.max_iterations} iterations")
