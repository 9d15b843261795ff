"""Reference values for convolution pairings, computed without the bump algebra.

Bumps are re-evaluated from their closed form ``exp(-1/(1-u^2))`` with
hand-derived first and second derivatives; pairings use scipy quadrature.
Only one-dimensional configs with derivative orders up to 2 are supported.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from scipy import integrate

__all__ = ["OracleUnsupported", "bump_closed_form", "bump_integral", "coef_value", "pairing_oracle"]

QUAD_OPTS = {"epsabs": 1e-13, "epsrel": 1e-12, "limit": 200}


class OracleUnsupported(ValueError):
    pass


def bump_closed_form(center: float, radius: float, coef: complex = 1.0):
    """``(f, f', f'')`` for ``coef * exp(-1/(1-u^2))``, ``u = (x - center)/radius``."""

    def derivs(x: float, j: int) -> complex:
        u = (x - center) / radius
        w = 1.0 - u * u
        if w <= 0.0:
            return 0.0
        b = np.exp(-1.0 / w)
        if j == 0:
            v = b
        elif j == 1:
            v = b * (-2.0 * u / w**2) / radius
        elif j == 2:
            g1 = -2.0 * u / w**2
            g2 = -2.0 / w**2 - 8.0 * u * u / w**3
            v = b * (g1 * g1 + g2) / radius**2
        else:
            raise OracleUnsupported("oracle derivatives stop at order 2")
        return coef * v

    return derivs


def _support(spec: dict[str, Any]) -> tuple[float, float]:
    c, r = float(spec.get("center", 0.0)), float(spec.get("radius", 1.0))
    return c - r, c + r


def _quad_complex(fn, lo: float, hi: float) -> complex:
    re, _ = integrate.quad(lambda x: complex(fn(x)).real, lo, hi, **QUAD_OPTS)
    im, _ = integrate.quad(lambda x: complex(fn(x)).imag, lo, hi, **QUAD_OPTS)
    return complex(re, im)


def _scalar(x) -> float:
    return float(np.atleast_1d(x)[0])


def coef_value(c) -> complex:
    if isinstance(c, (list, tuple)):
        return complex(*c)
    return complex(c)


def bump_integral(spec: dict[str, Any]) -> complex:
    f = bump_closed_form(float(spec.get("center", 0.0)), float(spec.get("radius", 1.0)), coef_value(spec.get("coef", 1.0)))
    lo, hi = _support(spec)
    return _quad_complex(lambda x: f(x, 0), lo, hi)


def _terms(spec: dict[str, Any], functions: dict[str, dict[str, Any]]):
    kind = spec["kind"]
    if kind == "delta":
        return ("point", _scalar(spec.get("at", 0.0)), int(_scalar(spec.get("order", 0) or 0)), coef_value(spec.get("coef", 1.0)))
    if kind == "density":
        fs = functions[spec["function"]]
        if fs.get("kind", "bump") != "bump":
            raise OracleUnsupported("density oracles need bump functions")
        return ("density", fs)
    if kind == "poly":
        return ("poly", [complex(c) for c in spec["coeffs"]])
    raise OracleUnsupported(kind)


def _poly_eval(c: list[complex], y: float) -> complex:
    return sum(ck * y**k for k, ck in enumerate(c))


def pairing_oracle(S_spec: dict, T_spec: dict, phi_spec: dict, functions: dict[str, dict[str, Any]]) -> complex:
    """``<S (x) T, phi(x + y)>`` with ``<c D^j delta_a, f> = c i^j f^(j)(a)``."""
    phi = bump_closed_form(float(phi_spec.get("center", 0.0)), float(phi_spec.get("radius", 1.0)), coef_value(phi_spec.get("coef", 1.0)))
    plo, phi_hi = _support(phi_spec)
    S, T = _terms(S_spec, functions), _terms(T_spec, functions)
    rank = {"point": 0, "density": 1, "poly": 2}
    if rank[S[0]] > rank[T[0]]:
        S, T = T, S
    if S[0] == "point":
        _, a, j, c = S
        if T[0] == "point":
            _, b, k, e = T
            return c * e * (1j) ** (j + k) * phi(a + b, j + k)
        if T[0] == "density":
            g = bump_closed_form(T[1]["center"], T[1]["radius"], coef_value(T[1].get("coef", 1.0)))
            lo, hi = _support(T[1])
            lo, hi = max(lo, plo - a), min(hi, phi_hi - a)
            if lo >= hi:
                return 0j
            return c * (1j) ** j * _quad_complex(lambda y: g(y, 0) * phi(a + y, j), lo, hi)
        q = T[1]
        return c * (1j) ** j * _quad_complex(lambda y: _poly_eval(q, y) * phi(a + y, j), plo - a, phi_hi - a)
    if S[0] == "density":
        f = bump_closed_form(S[1]["center"], S[1]["radius"], coef_value(S[1].get("coef", 1.0)))
        flo, fhi = _support(S[1])
        if T[0] == "density":
            g = bump_closed_form(T[1]["center"], T[1]["radius"], coef_value(T[1].get("coef", 1.0)))
            glo, ghi = _support(T[1])

            def inner(x: float) -> complex:
                lo, hi = max(glo, plo - x), min(ghi, phi_hi - x)
                return _quad_complex(lambda y: g(y, 0) * phi(x + y, 0), lo, hi) if lo < hi else 0j

            return _quad_complex(lambda x: f(x, 0) * inner(x), flo, fhi)
        q = T[1]

        def inner_poly(x: float) -> complex:
            return _quad_complex(lambda y: _poly_eval(q, y) * phi(x + y, 0), plo - x, phi_hi - x)

        return _quad_complex(lambda x: f(x, 0) * inner_poly(x), flo, fhi)
    raise OracleUnsupported("poly (x) poly pairings have no finite oracle")
