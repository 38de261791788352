import ast
import inspect
import math
import re

import numba
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fastvf import fastmath
from fastvf.fastmath import (
    ARCCOS_EPS,
    ARCSIN_EPS,
    DEFAULT_TABLE,
    ENT_RAT_EPS,
    EXP_POLY_COEFFS,
    EXP_RAT_EPS,
    SQRT_HALF,
    KernelTable,
    arccos_approx,
    arccos_exact,
    arcsin2,
    certify_table,
    ent_approx,
    ent_exact,
    exp_neg_approx,
    exp_neg_exact,
)

N = 10**6


def test_arccos_exact_values():
    assert arccos_exact(1.0) == 0.0
    assert arccos_exact(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert arccos_exact(0.5) == pytest.approx(math.pi / 3, abs=1e-15)
    assert arccos_exact(1.0 + 1e-15) == 0.0  # clamped


def test_arccos_approx_values():
    assert arccos_approx(0.0) == 1.570786
    assert arccos_approx(1.0) == 2.097797e-05
    # oracle: mpmath acos(0.25) at 30 digits
    assert abs(arccos_approx(0.25) - 1.31811607165281796) <= 2.1e-05


def test_exp_values():
    assert exp_neg_exact(0.0) == 1.0
    assert exp_neg_exact(10.0) == pytest.approx(4.539993e-05, rel=1e-7)
    assert exp_neg_exact(math.log(2)) == pytest.approx(0.5, rel=1e-15)
    assert exp_neg_approx(11.0) == 0.0
    # table rounding: 2.49e-06 at the endpoint, inside the 1.2 eps band
    assert abs(exp_neg_approx(0.0) - 1.0) <= 1.2 * EXP_RAT_EPS
    # oracle: mpmath exp(-5)
    assert abs(exp_neg_approx(5.0) - 0.006737946999085467) <= 2.5e-06


def test_ent_values():
    assert ent_exact(1.0) == 0.0
    assert ent_exact(0.0) == 0.0
    assert ent_exact(1 / math.e) == pytest.approx(-0.3678794, abs=1e-7)
    assert ent_approx(0.01) == 0.0
    assert abs(ent_approx(1.0)) <= 1.2 * ENT_RAT_EPS
    # oracle: mpmath 0.5*log(0.5); the natural log is the base that fits
    assert abs(ent_approx(0.5) - -0.34657359027997265) <= 1e-06
    assert abs(ent_approx(0.5) - 0.5 * math.log10(0.5)) > 0.1


@pytest.mark.parametrize(
    "name, approx, exact, lo, hi, eps",
    [
        ("arccos", arccos_approx, np.arccos, 0.0, 1.0, max(ARCCOS_EPS, ARCSIN_EPS)),
        ("arcsin2", lambda t: DEFAULT_TABLE.arcsin_poly(t), arcsin2, 0.0, SQRT_HALF, ARCSIN_EPS),
        ("exp", exp_neg_approx, lambda u: np.exp(-u), 0.0, 10.0, EXP_RAT_EPS),
        ("ent", ent_approx, ent_exact, 0.05, 1.0, ENT_RAT_EPS),
    ]
    + [
        (f"exp_poly{d}", lambda u, v=f"poly{d}": exp_neg_approx(u, variant=v),
         lambda u: np.exp(-u), 0.0, 10.0, eps)
        for d, (_, eps) in EXP_POLY_COEFFS.items()
    ],
)
def test_dense_error_bound(name, approx, exact, lo, hi, eps):
    z = np.linspace(lo, hi, N)
    assert np.max(np.abs(approx(z) - exact(z))) <= 1.2 * eps


def test_arccos_approx_monotone():
    v = arccos_approx(np.linspace(0, 1, 10**4))
    assert np.max(np.diff(v)) <= 2 * ARCSIN_EPS


@given(st.floats(0, 1e6))
def test_exp_range(u):
    for variant in ("rational", "poly2", "poly3", "poly4"):
        eps = EXP_RAT_EPS if variant == "rational" else EXP_POLY_COEFFS[int(variant[-1])][1]
        assert -1.2 * eps <= exp_neg_approx(u, variant=variant) <= 1 + 1.2 * eps


def test_exp_cutoff_boundary():
    assert exp_neg_approx(10.0) != 0.0
    assert exp_neg_approx(np.nextafter(10.0, 11.0)) == 0.0


def test_array_and_scalar_agree(rng):
    z = rng.uniform(0, 1, 7)
    assert np.array_equal(arccos_approx(z), [arccos_approx(float(v)) for v in z])
    assert arccos_approx(z.reshape(7, 1)).shape == (7, 1)


# structural checks: the approximate kernels call no transcendental routine
# other than the square root of the composite arccos


def _called_names(func):
    tree = ast.parse(inspect.getsource(func.py_func)).body[0]
    tree.decorator_list = []
    names = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            names.add(ast.unparse(node.func))
    return names


@pytest.mark.parametrize(
    "kernel, allowed",
    [
        (fastmath._horner, {"range", "len"}),
        (fastmath._arccos_approx, {"_horner", "math.sqrt"}),
        (fastmath._exp_neg_approx, {"_horner"}),
        (fastmath._ent_approx, {"_horner"}),
    ],
)
def test_approx_kernels_structural(kernel, allowed):
    assert _called_names(kernel) <= allowed


_TRANSCENDENTAL = re.compile(r"(^|\.)(a?(sin|cos|tan)h?|exp\w*|log\w*|pow)(\.f64)?$")


def _llvm_callees(kernel, *args):
    # a fresh, uncached compile so the IR can be inspected
    f = numba.njit(getattr(fastmath, kernel).py_func)
    f(*args)
    ir = "\n".join(f.inspect_llvm().values())
    return set(re.findall(r"call [^@]*@\"?([\w.]+)", ir))


_T = DEFAULT_TABLE.kernel_args()
_ARGS = {
    "_arccos_approx": (0.7, _T["acos_c"], _T["asin_c"]),
    "_exp_neg_approx": (0.7, _T["exp_num"], _T["exp_den"], _T["exp_cutoff"]),
    "_ent_approx": (0.7, _T["ent_num"], _T["ent_den"], _T["ent_cutoff"]),
    "_arccos_exact": (0.7,),
    "_exp_neg_exact": (0.7,),
    "_ent_exact": (0.7,),
}


@pytest.mark.parametrize("kernel", ["_arccos_approx", "_exp_neg_approx", "_ent_approx"])
def test_approx_kernels_llvm(kernel):
    callees = _llvm_callees(kernel, *_ARGS[kernel])
    assert {c for c in callees if _TRANSCENDENTAL.search(c)} == set()


@pytest.mark.parametrize("kernel", ["_arccos_exact", "_exp_neg_exact", "_ent_exact"])
def test_llvm_check_detects_libm(kernel):
    callees = _llvm_callees(kernel, *_ARGS[kernel])
    assert {c for c in callees if _TRANSCENDENTAL.search(c)}


def test_exact_kernels_do_call_libm():
    assert "math.acos" in _called_names(fastmath._arccos_exact)
    assert "math.exp" in _called_names(fastmath._exp_neg_exact)
    assert "math.log" in _called_names(fastmath._ent_exact)


def test_certify_table_default():
    certs = certify_table(grid_points=N)
    assert [c.name for c in certs] == [
        "ARCCOS", "ARCSIN2", "ARCCOS_COMPOSITE", "EXP_RATIONAL", "ENT_RATIONAL",
    ]
    assert all(c.passed for c in certs)
    for c in certs:
        assert 0.8 <= c.measured / c.claimed <= 1.2


def test_builtin_coefficient_digits():
    recs = DEFAULT_TABLE.records()
    assert [f"{c:.6e}" for c in recs["ARCCOS"].coeffs] == [
        "1.570786e+00", "-9.990285e-01", "-1.429899e-02", "-9.481335e-02", "-1.381942e-01",
    ]
    assert recs["ARCSIN2"].coeffs[1] == pytest.approx(math.sqrt(2), rel=1e-3)


def test_table_from_file(tmp_path):
    from fastvf.minimax import PolyApprox, write_table

    path = tmp_path / "t.txt"
    write_table(path, {"ARCCOS": PolyApprox((1.0, -1.0), (0, 0.5), 0.1)})
    table = KernelTable.from_file(path)
    assert table.arccos_poly.coeffs == (1.0, -1.0)
    assert table.arcsin_poly == DEFAULT_TABLE.arcsin_poly
    assert arccos_approx(0.25, table) == 0.75


def test_unknown_variant():
    with pytest.raises(ValueError):
        exp_neg_approx(1.0, variant="poly9")
