"""Minimax polynomial fitting (Remez exchange) and approximant evaluation.

Polynomials are stored as monomial coefficients ``a_0 .. a_n`` in the
original variable, so that they can be evaluated by plain Horner
recurrences inside the filter kernels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import minimize_scalar

__all__ = [
    "PolyApprox",
    "RationalApprox",
    "ConvergenceError",
    "NumericalError",
    "DomainError",
    "eval_poly",
    "eval_rational",
    "remez_fit",
    "certify_error",
    "format_record",
    "parse_record",
    "write_table",
    "read_table",
]

Interval = tuple[float, float]


class ConvergenceError(RuntimeError):
    """Remez iteration did not reach the equioscillation tolerance."""

    def __init__(self, message: str, last: "PolyApprox"):
        super().__init__(message)
        self.last = last


class NumericalError(ArithmeticError):
    """The levelled-error interpolation system could not be solved."""


class DomainError(ArithmeticError):
    """Rational approximant evaluated where its denominator vanishes."""


@dataclass
class PolyApprox:
    coeffs: tuple[float, ...]
    interval: Interval
    eps: float = 0.0
    # final reference set of a Remez fit; None for tabulated approximants
    reference: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        self.coeffs = tuple(float(c) for c in self.coeffs)
        a, b = (float(v) for v in self.interval)
        self.interval = (a, b)
        if not self.coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        if not a < b:
            raise ValueError(f"empty interval [{a}, {b}]")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return eval_poly(self, z)


@dataclass
class RationalApprox:
    num: tuple[float, ...]
    den: tuple[float, ...]
    interval: Interval
    eps: float = 0.0

    def __post_init__(self):
        self.num = tuple(float(c) for c in self.num)
        self.den = tuple(float(c) for c in self.den)
        a, b = (float(v) for v in self.interval)
        self.interval = (a, b)
        if not self.num or not self.den:
            raise ValueError("numerator and denominator need coefficients")
        if not a < b:
            raise ValueError(f"empty interval [{a}, {b}]")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    def __call__(self, z):
        return eval_rational(self, z)


Approx = Union[PolyApprox, RationalApprox]


def _horner(coeffs: Sequence[float], z):
    acc = coeffs[-1] + 0.0 * z
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def eval_poly(p: PolyApprox | Sequence[float], z):
    """Evaluate ``a_0 + a_1 z + ... + a_n z**n`` by nested multiplication.

    Works elementwise on numpy arrays. Accepts a bare coefficient sequence
    as well as a :class:`PolyApprox`.
    """
    coeffs = p.coeffs if isinstance(p, PolyApprox) else tuple(p)
    return _horner(coeffs, z)


def eval_rational(r: RationalApprox, z):
    num = _horner(r.num, z)
    den = _horner(r.den, z)
    if np.any(np.abs(den) <= np.finfo(float).tiny):
        raise DomainError(f"denominator vanishes on {r.interval}")
    return num / den


def _vectorized(f: Callable, probe: float) -> Callable:
    try:
        out = np.asarray(f(np.array([probe, probe])), dtype=float)
        if out.shape == (2,):
            return f
    except (TypeError, ValueError):
        pass
    return np.vectorize(f, otypes=[float])


def certify_error(approx: Approx, f: Callable, grid_points: int = 10**6) -> float:
    """Measure ``max |f - approx|`` on a uniform grid and store it in ``eps``."""
    if grid_points < 10**4:
        raise ValueError("grid_points must be at least 1e4")
    a, b = approx.interval
    z = np.linspace(a, b, int(grid_points))
    f = _vectorized(f, 0.5 * (a + b))
    if isinstance(approx, RationalApprox):
        den = _horner(approx.den, z)
        if np.any(den == 0) or np.any(np.sign(den) != np.sign(den[0])):
            raise DomainError(f"denominator has a zero on [{a}, {b}]")
        approx_vals = _horner(approx.num, z) / den
    else:
        approx_vals = _horner(approx.coeffs, z)
    err = float(np.max(np.abs(np.asarray(f(z), dtype=float) - approx_vals)))
    approx.eps = err
    return err


# --------------------------------------------------------------------------
# Remez exchange
# --------------------------------------------------------------------------


def _to_t(z, a, b):
    return (2.0 * z - (a + b)) / (b - a)


def _to_z(t, a, b):
    return 0.5 * (a + b) + 0.5 * (b - a) * t


def _solve_levelled(t_ref, fz, degree):
    """Solve sum_k c_k T_k(t_i) + (-1)^i E = f(z_i) for Chebyshev coefficients."""
    m = degree + 2
    A = np.empty((m, m))
    A[:, : degree + 1] = cheb.chebvander(t_ref, degree)
    A[:, -1] = (-1.0) ** np.arange(m)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond):
        raise NumericalError("singular Remez interpolation system")
    if cond > 1e12:
        warnings.warn(f"Remez system is ill-conditioned (cond={cond:.3e})", RuntimeWarning)
    try:
        sol = np.linalg.solve(A, fz)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(str(exc)) from exc
    return sol[:-1], sol[-1]


def _alternating_extrema(t, e):
    """Pick one extremum of |e| per run of constant sign."""
    sign = np.sign(e)
    sign[sign == 0] = 1
    breaks = np.flatnonzero(np.diff(sign)) + 1
    idx = []
    for run in np.split(np.arange(len(t)), breaks):
        idx.append(run[np.argmax(np.abs(e[run]))])
    return idx


def _prune(idx, e, m):
    idx = list(idx)
    while len(idx) > m:
        mags = np.abs(e[idx])
        k = int(np.argmin(mags))
        if k in (0, len(idx) - 1) or len(idx) - 2 < m:
            # drop the weaker end point
            if abs(e[idx[0]]) < abs(e[idx[-1]]):
                idx.pop(0)
            else:
                idx.pop()
        else:
            # removing an interior extremum merges its two neighbours
            left, right = idx[k - 1], idx[k + 1]
            keep = left if abs(e[left]) >= abs(e[right]) else right
            idx[k - 1 : k + 2] = [keep]
    return idx


def remez_fit(
    f: Callable,
    degree: int,
    interval: Iterable[float],
    tol: float = 1e-8,
    max_iters: int = 50,
    grid_points: int = 10**5,
) -> PolyApprox:
    """Minimax polynomial of the given degree for ``f`` on ``interval``.

    Multi-point exchange starting from Chebyshev points of the second kind.
    ``f`` should accept numpy arrays; scalar-only callables are vectorized.
    Iteration stops once the error magnitudes at the reference extrema
    agree to ``tol`` relative. The returned ``eps`` is the max error over a
    uniform grid of ``grid_points`` samples.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    a, b = (float(v) for v in interval)
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    f = _vectorized(f, 0.5 * (a + b))
    m = degree + 2

    def err_t(tt):
        return np.asarray(f(_to_z(tt, a, b)), dtype=float) - cheb.chebval(tt, coef)

    t_ref = np.sort(np.cos(np.pi * np.arange(m) / (m - 1)))
    dense = np.sort(np.cos(np.linspace(0.0, np.pi, 2000 * m + 1)))
    last = None
    for _ in range(max_iters):
        fz = np.asarray(f(_to_z(t_ref, a, b)), dtype=float)
        coef, level = _solve_levelled(t_ref, fz, degree)
        grid = np.union1d(dense, t_ref)
        e = err_t(grid)
        if np.max(np.abs(e)) <= 1e-15 * max(1.0, np.max(np.abs(fz))):
            # f is (numerically) a polynomial of this degree already
            return _finish(coef, a, b, t_ref, f, grid_points)
        idx = _alternating_extrema(grid, e)
        if len(idx) < m:
            raise NumericalError(
                f"error has only {len(idx)} alternations, expected {m}"
            )
        idx = _prune(idx, e, m)
        t_new = np.array([_refine(err_t, grid, i, e[i]) for i in idx])
        ref_err = err_t(t_new)
        t_ref = t_new
        mags = np.abs(ref_err)
        spread = (mags.max() - mags.min()) / mags.max()
        last = _finish(coef, a, b, t_ref, f, grid_points)
        if spread <= tol:
            return last
    raise ConvergenceError(
        f"Remez did not converge in {max_iters} iterations", last
    )


def _refine(err_t, grid, i, e_i):
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    s = 1.0 if e_i >= 0 else -1.0
    best_t, best = grid[i], abs(e_i)
    if hi > lo:
        res = minimize_scalar(
            lambda tt: -s * float(err_t(np.array([tt]))[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-15},
        )
        if -res.fun > best:
            best_t = res.x
    return best_t


def _finish(coef, a, b, t_ref, f, grid_points) -> PolyApprox:
    mono = Chebyshev(coef, domain=[a, b]).convert(kind=Polynomial).coef
    p = PolyApprox(tuple(mono), (a, b), reference=tuple(float(v) for v in _to_z(t_ref, a, b)))
    certify_error(p, f, max(grid_points, 10**4))
    return p


# --------------------------------------------------------------------------
# Coefficient table file format
# --------------------------------------------------------------------------


def _fmt(values: Iterable[float]) -> str:
    return ",".join(f"{v:.10e}" for v in values)


def format_record(name: str, approx: Approx) -> str:
    """One ``NAME kind=... interval=a,b eps=E coeffs=... [den=...]`` line."""
    if any(c.isspace() for c in name) or not name:
        raise ValueError(f"bad record name {name!r}")
    a, b = approx.interval
    if isinstance(approx, RationalApprox):
        return (
            f"{name} kind=rational interval={_fmt((a, b))} eps={approx.eps:.10e} "
            f"coeffs={_fmt(approx.num)} den={_fmt(approx.den)}"
        )
    return (
        f"{name} kind=poly interval={_fmt((a, b))} eps={approx.eps:.10e} "
        f"coeffs={_fmt(approx.coeffs)}"
    )


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def parse_record(line: str) -> tuple[str, Approx]:
    parts = line.split()
    if len(parts) < 2:
        raise ValueError(f"malformed coefficient record: {line!r}")
    name, fields = parts[0], {}
    for item in parts[1:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed field {item!r} in record {name}")
        fields[key] = value
    try:
        kind = fields["kind"]
        interval = _floats(fields["interval"])
        eps = float(fields["eps"])
        coeffs = _floats(fields["coeffs"])
    except KeyError as exc:
        raise ValueError(f"record {name} lacks field {exc.args[0]}") from None
    if len(interval) != 2:
        raise ValueError(f"record {name}: interval needs two endpoints")
    if kind == "poly":
        return name, PolyApprox(coeffs, interval, eps)
    if kind == "rational":
        if "den" not in fields:
            raise ValueError(f"rational record {name} lacks den")
        return name, RationalApprox(coeffs, _floats(fields["den"]), interval, eps)
    raise ValueError(f"record {name}: unknown kind {kind!r}")


def write_table(path, records: dict[str, Approx]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for name, approx in records.items():
            fh.write(format_record(name, approx) + "\n")


def read_table(path) -> dict[str, Approx]:
    out = {}
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                name, approx = parse_record(line)
                out[name] = approx
    return out
