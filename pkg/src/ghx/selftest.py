"""Pinned regression cases, runnable as ``ghx selftest``.

``--mutate polarization-sign`` flips the inclusion-exclusion sign used by
the polarization before running; the suite must then fail, which shows
the pinned cases actually exercise that code path.
"""

from __future__ import annotations

import contextlib
import math
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import sympoly
from .errors import ConeViolation, DegenerateInputError, PreconditionError
from .garding import garding_gap, mixed_positivity, positive_representer
from .herm import HermitianForm, MetricPencil, RealBasis, inner, pencil_eigenvalues, proportionality
from .hodge import (corollary_hodge_index, gram_matrix, gram_report, log_concavity, minor_2x2,
                    primitive_basis, verify_theorem_a)
from .sympoly import (MixedContext, PolyOnLine, TracePowerPolynomial, hyperbolic_at, in_cone,
                      in_gamma_m, linearity_dimension, mixed_sigma, mixed_sigma_oracle, real_rooted,
                      restrict_line, sigma)

I2, I3 = MetricPencil.identity(2), MetricPencil.identity(3)
D = np.diag


def _close(a, b, tol=1e-10) -> bool:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol * (1 + np.abs(b))))


def _raises(exc, fn) -> bool:
    try:
        fn()
    except exc:
        return True
    return False


def _e(n, j, k):
    e = np.zeros((n, n))
    e[j, k] = 1.0
    return e


@dataclass(frozen=True)
class Case:
    name: str
    check: Callable[[], bool]


def _cases() -> list:
    d2, d33 = D([1.0, 2.0]), D([3.0, 3.0, -1.0])
    s2 = MixedContext(2, I2)
    c = []
    add = lambda name, fn: c.append(Case(name, fn))

    add("pencil diag(2,4) vs diag(1,2)", lambda: _close(pencil_eigenvalues(D([2., 4.]), MetricPencil(d2)), [2, 2]))
    add("pencil identity", lambda: _close(pencil_eigenvalues(np.eye(3), I3), [1, 1, 1]))
    add("pencil diag(1,2,3)", lambda: _close(pencil_eigenvalues(D([1., 2., 3.]), I3), [1, 2, 3]))
    add("inner(I,I) = 3", lambda: _close(inner(np.eye(3), np.eye(3)), 3))
    add("inner diag = 11", lambda: _close(inner(d2, D([3., 4.])), 11))
    add("basis units orthogonal", lambda: _close(inner(*RealBasis(2).matrices[2:4]), 0))
    add("proportional 3I vs I", lambda: _close(proportionality(3 * np.eye(2), np.eye(2)), 3))
    add("not proportional", lambda: proportionality(d2, np.eye(2)) is None)
    add("proportional under 1e-12 noise",
        lambda: _close(proportionality(2 * np.eye(2) + 1e-12 * _e(2, 0, 0), np.eye(2)), 2, 1e-9))
    add("sigma_2 diag(1,2,3) = 11", lambda: _close(sigma(D([1., 2., 3.]), I3, 2), 11))
    add("sigma_2(I_3) = 3", lambda: _close(sigma(np.eye(3), I3, 2), 3))
    add("sigma_2, sigma_3 of diag(3,3,-1)",
        lambda: _close([sigma(d33, I3, 2), sigma(d33, I3, 3)], [3, -9]))
    for label, args, want in (("D(diag(1,2), I) = 1.5", (d2, np.eye(2)), 1.5),
                              ("D(E11, E22) = 0.5", (_e(2, 0, 0), _e(2, 1, 1)), 0.5)):
        add(label, lambda a=args, w=want: _close(mixed_sigma(s2, a), w))
        add("oracle " + label, lambda a=args, w=want: _close(mixed_sigma_oracle(s2, a), w))
    a3 = D([1., 2., 3.])
    add("D(A,A,A) = 6", lambda: _close(mixed_sigma(MixedContext(3, I3), [a3] * 3), 6))
    add("oracle D(A,A,A) = 6", lambda: _close(mixed_sigma_oracle(MixedContext(3, I3), [a3] * 3), 6))
    add("oracle D(0, B) = 0", lambda: _close(mixed_sigma_oracle(s2, [np.zeros((2, 2)), d2]), 0))
    add("restrict_line s^2+3s+2",
        lambda: _close(restrict_line(s2, np.eye(2), d2).coefficients, [2, 3, 1]))
    add("restrict_line x = 0 gives s^m",
        lambda: _close(restrict_line(MixedContext(3, I3), np.eye(3), np.zeros((3, 3))).coefficients,
                       [0, 0, 0, 1]))
    add("restrict_line x = -a",
        lambda: _close(restrict_line(s2, d2, -d2).coefficients, [2, -4, 2]))
    add("real_rooted s^2+3s+2", lambda: real_rooted(PolyOnLine([2., 3., 1.])))
    add("s^2+1 not real rooted", lambda: not real_rooted(PolyOnLine([1., 0., 1.])))
    add("double root real", lambda: real_rooted(PolyOnLine([1., -2., 1.])))
    add("sigma_2 hyperbolic at I (n=3)", lambda: hyperbolic_at(MixedContext(2, I3), np.eye(3)).hyperbolic)
    add("(2,0,2) form not hyperbolic",
        lambda: not hyperbolic_at(gram_report(D([1., 1., -1., -1.]), 2).as_polynomial(), np.eye(2)).hyperbolic)
    add("hyperbolic_at on a zero of P",
        lambda: _raises(PreconditionError, lambda: hyperbolic_at(s2, _e(2, 0, 0))))
    add("in_cone a = x = I margin 1",
        lambda: _close(in_cone(MixedContext(3, I3), np.eye(3), np.eye(3)).margin, 1))
    add("diag(3,3,-1) in sigma_2 cone", lambda: in_cone(MixedContext(2, I3), np.eye(3), d33).member)
    add("diag(3,3,-1) not in sigma_3 cone", lambda: not in_cone(MixedContext(3, I3), np.eye(3), d33).member)
    add("diag(3,3,-1) in Gamma_2 not Gamma_3",
        lambda: in_gamma_m(d33, I3, 2).member and not in_gamma_m(d33, I3, 3).member)
    add("G in every Gamma_m", lambda: all(in_gamma_m(np.eye(3), I3, m).member for m in (1, 2, 3)))
    add("-I in no Gamma_m", lambda: not any(in_gamma_m(-np.eye(3), I3, m).member for m in (1, 2, 3)))
    add("sigma_m complete", lambda: linearity_dimension(MixedContext(2, I3), 3) == 0)
    add("Hodge-index form complete",
        lambda: linearity_dimension(gram_matrix([], I3).as_polynomial(), 3) == 0)
    add("trace power linearity n^2-1", lambda: linearity_dimension(TracePowerPolynomial(3, 2), 3) == 8)

    def garding_example():
        g = garding_gap([d2, np.eye(2)], I2)
        return _close([g.lhs, g.rhs], [1.5, math.sqrt(2)]) and g.holds()
    add("garding 1.5 >= sqrt 2", garding_example)
    add("garding equal arguments",
        lambda: (lambda g: abs(g.gap) <= 1e-10 * g.rhs and _close(g.equality_witness[(0, 1)], 1))(
            garding_gap([d2, d2], I2)))
    add("garding B1 = 2 B2",
        lambda: (lambda g: abs(g.gap) <= 1e-10 * g.rhs and _close(g.equality_witness[(0, 1)], 2))(
            garding_gap([2 * d2, d2], I2)))
    add("D(E11, I) = 1", lambda: _close(mixed_positivity(_e(3, 0, 0), [np.eye(3)], I3), 1))
    add("D(I, I) = 3", lambda: _close(mixed_positivity(np.eye(3), [np.eye(3)], I3), 3))
    add("mixed positivity rejects 0",
        lambda: _raises(DegenerateInputError, lambda: mixed_positivity(np.zeros((3, 3)), [np.eye(3)], I3)))
    add("representer diag(1,2)", lambda: _close(positive_representer([d2], I2).H.matrix, D([1., 0.5])))
    add("representer of identities",
        lambda: _close(positive_representer([np.eye(4)] * 2, MetricPencil.identity(4)).H.matrix,
                       math.comb(3, 2) / 3 * np.eye(4)))
    add("representer diag(3,3,-1)", lambda: _close(positive_representer([d33], I3).H.matrix, D([1., 1., 3.])))
    add("signature n=2 Minkowski", lambda: gram_matrix([], I2).signature == (1, 0, 3))
    add("signature n=3 m=2", lambda: gram_matrix([], I3).signature == (1, 0, 8))
    add("diag(3,3,-1) rejected as Gamma_3 slot",
        lambda: _raises(ConeViolation, lambda: gram_matrix([d33], I3)))
    add("Frobenius gram not Lorentzian", lambda: gram_report(np.eye(4), 2).signature == (4, 0, 0)
        and not gram_report(np.eye(4), 2).lorentzian)
    add("primitive hyperplane n=2", lambda: primitive_basis([], np.eye(2), I2).basis.shape == (3, 4))
    add("primitive hyperplane diag(3,3,-1)",
        lambda: (lambda p: p.basis.shape == (8, 9)
                 and np.abs(RealBasis(3).coords(D([1., 1., 3.])) @ p.basis.T).max() <= 1e-10)(
            primitive_basis([], d33, I3)))
    add("primitive spectrum n=2", lambda: _close(verify_theorem_a([np.eye(2)], I2).restricted_spectrum, [-1, -1, -0.5]))
    add("primitive spectrum diag(3,3,-1)", lambda: bool(np.all(verify_theorem_a([d33], I3).restricted_spectrum < 0)))
    add("classical case Lorentzian",
        lambda: verify_theorem_a([np.eye(3)] * 2, I3).signature == (1, 0, 8))
    add("hodge-index inequality beta = alpha", lambda: _close(corollary_hodge_index(d2, d2, I2, 2).defect, 0))
    add("hodge-index inequality example",
        lambda: (lambda r: _close([r.pairing, r.q_value, r.top], [0.5, -1, 2]) and r.holds())(
            corollary_hodge_index(d2, D([1., -1.]), I2, 2)))
    add("minor proportional degenerate",
        lambda: minor_2x2(D([1., -1.]), D([2., -2.]), [np.eye(2)], I2).degenerate)
    off = np.array([[0., 1.], [1., 0.]])
    add("minor example", lambda: _close(minor_2x2(D([1., -1.]), off, [np.eye(2)], I2).matrix, D([-1., -1.])))
    add("log concave (1, 1.5, 2)", lambda: _close(log_concavity(d2, np.eye(2), I2, 2).a, [1, 1.5, 2]))
    add("log concave beta = alpha equality", lambda: bool(np.all(log_concavity(d2, d2, I2, 2).equality)))
    add("log concave (3, 5, 3)", lambda: _close(log_concavity(d33, np.eye(3), I3, 2).a, [3, 5, 3]))
    c.extend(_torus_cases())
    return c


def _torus_cases() -> list:
    from .torus import (ScalarField, TorusContext, ddc, hessian_constant_check, integral_pairing,
                        laplacian_solve)
    out = []
    ctx = TorusContext(1, 16)
    x = ctx.coordinates()[0]
    cosx = ScalarField(ctx, np.cos(2 * np.pi * x))
    out.append(Case("ddc cos = -pi^2 cos",
                    lambda: _close(ddc(cosx)[..., 0, 0], -np.pi ** 2 * cosx.values, 1e-12)))
    out.append(Case("solve cos: -cos/pi^2",
                    lambda: _close(laplacian_solve(np.eye(1), cosx).values, -cosx.values / np.pi ** 2, 1e-12)))
    c2 = TorusContext(2, 8)
    out.append(Case("torus pairing constants",
                    lambda: _close(integral_pairing([D([1., 2.]), np.eye(2)], I2, c2), 1.5)))
    out.append(Case("torus hessian identity",
                    lambda: (lambda h: _close(h.c, [1, 1]) and h.equality)(
                        hessian_constant_check([np.eye(2)], I2, c2, m=2))))
    out.append(Case("torus hessian 1.5 >= sqrt 2",
                    lambda: (lambda h: _close([h.integrated, h.rhs], [1.5, math.sqrt(2)]) and h.holds())(
                        hessian_constant_check([D([1., 2.]), np.eye(2)], I2, c2))))
    return out


@contextlib.contextmanager
def polarization_sign_flipped():
    original = sympoly._subset_sign
    sympoly._subset_sign = lambda m, size: -original(m, size)
    try:
        yield
    finally:
        sympoly._subset_sign = original


MUTATIONS = {"polarization-sign": polarization_sign_flipped}


def run_cases(cases=None) -> list:
    results = []
    for case in cases or _cases():
        try:
            ok = bool(case.check())
            detail = ""
        except Exception as exc:  # a crashing case is a failing case
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((case.name, ok, detail))
    return results


def run(list_only: bool = False, mutate=None, verbose: bool = False, stream=None) -> int:
    stream = stream or sys.stdout
    cases = _cases()
    if list_only:
        for case in cases:
            print(case.name, file=stream)
        return 0
    ctx = MUTATIONS[mutate]() if mutate else contextlib.nullcontext()
    # mutated code yields garbage values; numpy warnings about them are noise
    with ctx, np.errstate(all="ignore") if mutate else contextlib.nullcontext():
        results = run_cases(cases)
    failed = [r for r in results if not r[1]]
    for name, ok, detail in results:
        if verbose or not ok:
            print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""), file=stream)
    print(f"{len(results) - len(failed)}/{len(results)} pinned cases passed"
          + (f" under mutation {mutate}" if mutate else ""), file=stream)
    return 0 if not failed else 2
