"""Exact and minimax-approximated ARCCOS, EXP(-u) and z*log(z) kernels.

The approximate kernels evaluate tabulated polynomials / rationals by
Horner recurrences and never call into libm, except for the one square
root of the composite arccos branch. Scalar kernels are numba-compiled so
the filter loops can inline them; the public wrappers accept scalars or
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .minimax import PolyApprox, RationalApprox, certify_error, read_table

__all__ = [
    "KernelTable",
    "DEFAULT_TABLE",
    "EXP_VARIANTS",
    "arccos_exact",
    "arccos_approx",
    "exp_neg_exact",
    "exp_neg_approx",
    "ent_exact",
    "ent_approx",
    "arcsin2",
    "certify_table",
]

SQRT_HALF = 1.0 / math.sqrt(2.0)
EXP_VARIANTS = ("rational", "poly2", "poly3", "poly4")

# Minimax coefficients, lowest order first.
ARCCOS_COEFFS = (1.570786, -9.990285e-01, -1.429899e-02, -9.481335e-02, -1.381942e-01)
ARCCOS_EPS = 1.048949e-05
# fitted to g(t) = 2*arcsin(t/sqrt(2)) for t = sqrt(1 - z) in [0, 1/sqrt(2)]
ARCSIN_COEFFS = (2.097797e-05, 1.412840, 1.429881e-02, 6.704361e-02, 6.909677e-02)
ARCSIN_EPS = 2.097814e-05

EXP_POLY_COEFFS = {
    2: ((8.214528e-01, -3.186948e-01, 2.544088e-02), 1.785517e-01),
    3: ((9.174126e-01, -5.631179e-01, 1.015041e-01, -5.519183e-03), 8.259345e-02),
    4: (
        (9.666313e-01, -7.620584e-01, 2.145386e-01, -2.509526e-02, 1.032877e-03),
        3.337085e-02,
    ),
}
EXP_RAT_NUM = (3.206619e-02, -1.195191e-02, 1.756974e-03, -1.199261e-04, 3.182685e-06)
EXP_RAT_DEN = (3.206627e-02, 2.011147e-02, 5.853684e-03, 9.780143e-04, 1.251598e-04)
EXP_RAT_EPS = 2.227050e-06

ENT_RAT_NUM = (-1.519742e-04, -6.835769e-02, -8.856923e-01, -5.369609e-01, 1.491165)
ENT_RAT_DEN = (1.532270e-02, 3.987796e-01, 1.461793, 6.827004e-01, -4.469776e-02)
ENT_RAT_EPS = 7.342477e-07

EXP_CUTOFF = 10.0
ENT_CUTOFF = 0.05


def _default_exp_polys():
    return {
        d: PolyApprox(c, (0.0, EXP_CUTOFF), eps) for d, (c, eps) in EXP_POLY_COEFFS.items()
    }


@dataclass(frozen=True)
class KernelTable:
    arccos_poly: PolyApprox = field(
        default_factory=lambda: PolyApprox(ARCCOS_COEFFS, (0.0, 0.5), ARCCOS_EPS)
    )
    arcsin_poly: PolyApprox = field(
        default_factory=lambda: PolyApprox(ARCSIN_COEFFS, (0.0, SQRT_HALF), ARCSIN_EPS)
    )
    exp_rational: RationalApprox = field(
        default_factory=lambda: RationalApprox(
            EXP_RAT_NUM, EXP_RAT_DEN, (0.0, EXP_CUTOFF), EXP_RAT_EPS
        )
    )
    exp_polys: dict = field(default_factory=_default_exp_polys)
    ent_rational: RationalApprox = field(
        default_factory=lambda: RationalApprox(
            ENT_RAT_NUM, ENT_RAT_DEN, (ENT_CUTOFF, 1.0), ENT_RAT_EPS
        )
    )
    exp_cutoff: float = EXP_CUTOFF
    ent_cutoff: float = ENT_CUTOFF

    # record names used in coefficient table files
    RECORD_NAMES = {
        "ARCCOS": "arccos_poly",
        "ARCSIN2": "arcsin_poly",
        "EXP_RATIONAL": "exp_rational",
        "ENT_RATIONAL": "ent_rational",
    }

    @classmethod
    def from_file(cls, path) -> "KernelTable":
        """Load approximants from a coefficient table file.

        Records missing from the file keep their built-in values.
        """
        records = read_table(path)
        kwargs = {}
        for name, attr in cls.RECORD_NAMES.items():
            if name in records:
                kwargs[attr] = records[name]
        polys = _default_exp_polys()
        for name, approx in records.items():
            if name.startswith("EXP_POLY") and isinstance(approx, PolyApprox):
                polys[approx.degree] = approx
        kwargs["exp_polys"] = polys
        for attr in ("arccos_poly", "arcsin_poly"):
            if attr in kwargs and not isinstance(kwargs[attr], PolyApprox):
                raise ValueError(f"{attr} must be a polynomial record")
        for attr in ("exp_rational", "ent_rational"):
            if attr in kwargs and isinstance(kwargs[attr], PolyApprox):
                p = kwargs[attr]
                kwargs[attr] = RationalApprox(p.coeffs, (1.0,), p.interval, p.eps)
        return cls(**kwargs)

    def records(self) -> dict:
        out = {name: getattr(self, attr) for name, attr in self.RECORD_NAMES.items()}
        for d, p in sorted(self.exp_polys.items()):
            out[f"EXP_POLY{d}"] = p
        return out

    def kernel_args(self, exp_variant: str = "rational") -> dict:
        """Coefficient tuples in the layout the compiled kernels expect.

        Tuples rather than arrays: they are passed by value, so the inner
        loops pay no reference counting per kernel call.
        """
        if exp_variant == "rational":
            exp_num, exp_den = self.exp_rational.num, self.exp_rational.den
        elif exp_variant in EXP_VARIANTS:
            degree = int(exp_variant[-1])
            if degree not in self.exp_polys:
                raise ValueError(f"no degree-{degree} EXP polynomial in table")
            exp_num, exp_den = self.exp_polys[degree].coeffs, (1.0,)
        else:
            raise ValueError(f"unknown exp variant {exp_variant!r}")
        f64 = lambda v: tuple(float(c) for c in v)  # noqa: E731
        return {
            "acos_c": f64(self.arccos_poly.coeffs),
            "asin_c": f64(self.arcsin_poly.coeffs),
            "exp_num": f64(exp_num),
            "exp_den": f64(exp_den),
            "exp_cutoff": float(self.exp_cutoff),
            "ent_num": f64(self.ent_rational.num),
            "ent_den": f64(self.ent_rational.den),
            "ent_cutoff": float(self.ent_cutoff),
        }


DEFAULT_TABLE = KernelTable()


# --------------------------------------------------------------------------
# compiled scalar kernels
# --------------------------------------------------------------------------


@njit(cache=True)
def _horner(c, z):
    acc = 0.0
    for k in range(len(c) - 1, -1, -1):
        acc = acc * z + c[k]
    return acc


@njit(cache=True)
def _arccos_exact(z):
    if z > 1.0:
        z = 1.0
    elif z < -1.0:
        z = -1.0
    return math.acos(z)


@njit(cache=True)
def _arccos_approx(z, acos_c, asin_c):
    if z > 1.0:
        z = 1.0
    elif z < 0.0:
        z = 0.0
    if z <= 0.5:
        return _horner(acos_c, z)
    return _horner(asin_c, math.sqrt(1.0 - z))


@njit(cache=True)
def _exp_neg_exact(u):
    return math.exp(-u)


@njit(cache=True)
def _exp_neg_approx(u, num, den, cutoff):
    if u > cutoff:
        return 0.0
    return _horner(num, u) / _horner(den, u)


@njit(cache=True)
def _ent_exact(z):
    if z <= 0.0:
        return 0.0
    return z * math.log(z)


@njit(cache=True)
def _ent_approx(z, num, den, cutoff):
    if z < cutoff:
        return 0.0
    return _horner(num, z) / _horner(den, z)


# array loops used for dense certification and property checks


@njit(cache=True)
def _map_arccos(zs, approx, acos_c, asin_c):
    out = np.empty(zs.shape[0])
    for i in range(zs.shape[0]):
        if approx:
            out[i] = _arccos_approx(zs[i], acos_c, asin_c)
        else:
            out[i] = _arccos_exact(zs[i])
    return out


@njit(cache=True)
def _map_exp_approx(us, num, den, cutoff):
    out = np.empty(us.shape[0])
    for i in range(us.shape[0]):
        out[i] = _exp_neg_approx(us[i], num, den, cutoff)
    return out


@njit(cache=True)
def _map_ent_approx(zs, num, den, cutoff):
    out = np.empty(zs.shape[0])
    for i in range(zs.shape[0]):
        out[i] = _ent_approx(zs[i], num, den, cutoff)
    return out


# --------------------------------------------------------------------------
# public wrappers
# --------------------------------------------------------------------------


def _dispatch(z, mapper, *args):
    if np.ndim(z) == 0:
        return float(mapper(np.array([float(z)]), *args)[0])
    arr = np.asarray(z, dtype=np.float64)
    return mapper(arr.reshape(-1), *args).reshape(arr.shape)


def arccos_exact(z):
    """Inverse cosine in radians, argument clamped to [-1, 1]."""
    arr = DEFAULT_TABLE.kernel_args()
    return _dispatch(z, _map_arccos, False, arr["acos_c"], arr["asin_c"])


def arccos_approx(z, table: KernelTable | None = None):
    """Composite minimax arccos on [0, 1].

    ``z <= 0.5`` uses the ARCCOS polynomial directly; above that the
    polynomial for ``2*arcsin(t/sqrt(2))`` is evaluated at ``t = sqrt(1-z)``.
    """
    arr = (table or DEFAULT_TABLE).kernel_args()
    return _dispatch(z, _map_arccos, True, arr["acos_c"], arr["asin_c"])


def exp_neg_exact(u):
    return float(math.exp(-u)) if np.ndim(u) == 0 else np.exp(-np.asarray(u, dtype=np.float64))


def exp_neg_approx(u, table: KernelTable | None = None, variant: str = "rational"):
    """``exp(-u)`` for ``u >= 0``; returns 0 beyond the cutoff."""
    arr = (table or DEFAULT_TABLE).kernel_args(variant)
    return _dispatch(
        u, _map_exp_approx, arr["exp_num"], arr["exp_den"], arr["exp_cutoff"]
    )


def ent_exact(z):
    """``z * ln(z)`` with the limit value 0 at ``z = 0``."""
    return float(_ent_exact(float(z))) if np.ndim(z) == 0 else _ent_reference(z)


def ent_approx(z, table: KernelTable | None = None):
    arr = (table or DEFAULT_TABLE).kernel_args()
    return _dispatch(
        z, _map_ent_approx, arr["ent_num"], arr["ent_den"], arr["ent_cutoff"]
    )


def arcsin2(t):
    """The function fitted by the ARCSIN table row: ``2*arcsin(t/sqrt(2))``."""
    return 2.0 * np.arcsin(np.asarray(t) / math.sqrt(2.0))


# --------------------------------------------------------------------------
# certification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    name: str
    measured: float
    claimed: float
    ratio_limit: float = 1.2

    @property
    def passed(self) -> bool:
        return self.measured <= self.ratio_limit * self.claimed

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name:<18} measured={self.measured:.6e} "
            f"claimed={self.claimed:.6e} ratio={self.measured / self.claimed:.4f} {status}"
        )


def _ent_reference(z):
    z = np.asarray(z, dtype=np.float64)
    return np.where(z > 0, z * np.log(np.where(z > 0, z, 1.0)), 0.0)


def certify_table(
    table: KernelTable | None = None,
    grid_points: int = 10**6,
    include_polys: bool = False,
) -> list[Certificate]:
    """Dense-sample every approximant against its exact function.

    Measured errors are compared to the eps stored with each approximant.
    The composite arccos line checks the full [0, 1] range through
    :func:`arccos_approx` against the larger of the two table errors.
    """
    t = table or DEFAULT_TABLE
    certs = []

    def check(name, approx, f):
        claimed = approx.eps
        measured = certify_error(replace(approx), f, grid_points)
        certs.append(Certificate(name, measured, claimed))

    check("ARCCOS", t.arccos_poly, np.arccos)
    check("ARCSIN2", t.arcsin_poly, arcsin2)
    z = np.linspace(0.0, 1.0, int(grid_points))
    composite = float(np.max(np.abs(arccos_approx(z, t) - np.arccos(z))))
    certs.append(
        Certificate(
            "ARCCOS_COMPOSITE",
            composite,
            max(t.arccos_poly.eps, t.arcsin_poly.eps),
        )
    )
    check("EXP_RATIONAL", t.exp_rational, lambda u: np.exp(-u))
    check("ENT_RATIONAL", t.ent_rational, _ent_reference)
    if include_polys:
        for d, p in sorted(t.exp_polys.items()):
            check(f"EXP_POLY{d}", p, lambda u: np.exp(-u))
    return certs
