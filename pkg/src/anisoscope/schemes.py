r"""
Scheme definitions
------------------

Centered first-derivative schemes of the form

.. math::

    \sum_{k=1}^{N_c} \alpha_k (u'_{j+k} + u'_{j-k}) + u'_j
        = \frac{1}{h} \sum_{k=1}^{N_e} a_k (u_{j+k} - u_{j-k}),

prefactored (forward/backward bidiagonal) compact schemes, arbitrary 2D
stencils and the isotropy-corrected multidimensional constructions that
blend grid-line and diagonal differences with a weight :math:`\beta`.

Weights are kept as :class:`fractions.Fraction` whenever they are known as
rationals or as finite decimals, so that catalog comparisons are exact.
Conversion to floating point happens at evaluation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import singledispatch
from typing import Iterable, Sequence, Union

import numpy as np

from anisoscope.errors import ConsistencyError, InfeasibleError, ValidationError

Number = Union[int, float, Fraction]

#: relative tolerance applied to series coefficients of exact-weight schemes
ORDER_TOLERANCE = 1.0e-9
#: safety multiplier applied to the propagated rounding of tabulated weights
ROUNDING_SAFETY = 10.0
#: number of odd series coefficients examined by :func:`verify_formal_order`
MAX_SERIES_TERMS = 8


def _as_weight(x: Number) -> Number:
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"non-finite weight: {x!r}")
    return x


def _decimal(text: str, divisor: int = 1) -> tuple[Fraction, float]:
    """Parse a tabulated decimal and return it with half a unit of its last digit."""
    value = Fraction(text) / divisor
    digits = len(text.split(".")[1]) if "." in text else 0
    return value, 0.5 * 10.0**-digits / divisor


# {{{ 1D centered schemes


@dataclass(frozen=True)
class SchemeSpec:
    """A centered explicit (``alpha == ()``) or compact first-derivative scheme.

    .. attribute:: weight_tolerance

        Absolute uncertainty of the stored weights. Zero for exact weights;
        half a unit of the last printed digit for tabulated decimals.
    """

    label: str
    alpha: tuple = ()
    a: tuple = ()
    formal_order: int = 2
    weight_tolerance: float = 0.0

    def __post_init__(self) -> None:
        alpha = tuple(_as_weight(x) for x in self.alpha)
        a = tuple(_as_weight(x) for x in self.a)
        if not a:
            raise ValidationError(f"scheme {self.label!r} has no explicit weights")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "a", a)

    @property
    def is_compact(self) -> bool:
        return len(self.alpha) > 0

    @property
    def alpha_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.alpha], dtype=np.float64)

    @property
    def a_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.a], dtype=np.float64)

    @property
    def half_width(self) -> int:
        return max(len(self.a), len(self.alpha))


@dataclass(frozen=True)
class PrefactoredScheme:
    r"""Prefactored compact scheme split into a forward and a backward sweep.

    .. math::

        a u'^F_{j+1} + c u'^F_{j-1} + (1 - a - c) u'^F_j
            = \frac{1}{h} [b u_{j+1} - (2b - 1) u_j - (1 - b) u_{j-1}]

    and its mirror image for the backward sweep. The average of the two
    sweeps is a centered compact scheme, see :meth:`equivalent_central`.
    """

    label: str
    a_coef: float
    b_coef: float
    c_coef: float = 0.0
    formal_order: int = 6

    @property
    def e_coef(self) -> float:
        """Center weight of the forward explicit stencil."""
        return 2.0 * self.b_coef - 1.0

    @property
    def f_coef(self) -> float:
        """Trailing weight of the forward explicit stencil."""
        return 1.0 - self.b_coef

    def forward_weights(self) -> tuple[dict[int, float], dict[int, float]]:
        """(implicit, explicit) weights of the forward sweep keyed by offset."""
        a, b, c = self.a_coef, self.b_coef, self.c_coef
        lhs = {1: a, 0: 1.0 - a - c, -1: c}
        rhs = {1: b, 0: -(2.0 * b - 1.0), -1: -(1.0 - b)}
        return lhs, rhs

    def backward_weights(self) -> tuple[dict[int, float], dict[int, float]]:
        lhs, rhs = self.forward_weights()
        return ({-k: v for k, v in lhs.items()}, {-k: -v for k, v in rhs.items()})

    def sweep_form(self) -> dict[str, float]:
        """Coefficients of the explicit-recursion form used by the 2D sweeps.

        With ``c = 0`` the forward sweep is rewritten as
        ``u'_j = alpha u'_{j+1} + (b u_{j+1} - e u_j - f u_{j-1}) / h``.
        """
        if self.c_coef != 0.0:
            raise ValidationError("sweep form requires c = 0")
        d = 1.0 - self.a_coef
        return {
            "alpha": -self.a_coef / d,
            "b": self.b_coef / d,
            "e": self.e_coef / d,
            "f": self.f_coef / d,
        }

    def equivalent_central(self) -> SchemeSpec:
        """Centered compact scheme whose symbol is the average of both sweeps."""
        lhs, rhs = self.forward_weights()
        # Laurent coefficients on offsets -1..1 and -2..2
        num = np.array([rhs[-1], rhs[0], rhs[1]])
        den = np.array([lhs[-1], lhs[0], lhs[1]])
        den_conj = den[::-1]
        prod = np.convolve(num, den_conj)  # N * conj(D), offsets -2..2
        mod2 = np.convolve(den, den_conj)  # |D|^2, offsets -2..2
        q0 = mod2[2]
        alpha = [mod2[3] / q0, mod2[4] / q0]
        a = [(prod[3] - prod[1]) / (2 * q0), (prod[4] - prod[0]) / (2 * q0)]
        while alpha and alpha[-1] == 0.0:
            alpha.pop()
        while len(a) > 1 and a[-1] == 0.0:
            a.pop()
        return SchemeSpec(
            label=f"{self.label}-avg", alpha=tuple(alpha), a=tuple(a),
            formal_order=self.formal_order,
        )


# }}}


# {{{ 2D stencils

STENCIL_KINDS = {
    # kind: (derivative order, target moments {(p, q): coefficient})
    "dx": (1, {(1, 0): 1}),
    "dy": (1, {(0, 1): 1}),
    "dxx": (2, {(2, 0): 1}),
    "dyy": (2, {(0, 2): 1}),
    "laplacian": (2, {(2, 0): 1, (0, 2): 1}),
    "dxy": (2, {(1, 1): 1}),
}

_TRANSPOSED_KIND = {"dx": "dy", "dy": "dx", "dxx": "dyy", "dyy": "dxx"}

# parity of the weights under di -> -di and dj -> -dj (0 = not checked)
_PARITY = {"dx": (-1, 1), "dy": (1, -1), "dxx": (1, 1), "dyy": (1, 1),
           "laplacian": (1, 1), "dxy": (-1, -1)}


@dataclass(frozen=True)
class Stencil2D:
    """Weights on integer offsets ``(di, dj)``; the operator is ``sum(w u) / h**m``.

    ``m`` is the derivative order of :attr:`kind`.
    """

    entries: tuple
    kind: str = "dx"

    def __post_init__(self) -> None:
        if self.kind not in STENCIL_KINDS:
            raise ValidationError(f"unknown stencil kind {self.kind!r}")
        merged: dict[tuple[int, int], Number] = {}
        for di, dj, w in self.entries:
            key = (int(di), int(dj))
            merged[key] = merged.get(key, 0) + _as_weight(w)
        entries = tuple(
            (di, dj, w) for (di, dj), w in sorted(merged.items()) if w != 0
        )
        if not entries:
            raise ValidationError("empty stencil")
        for axis, sign in enumerate(_PARITY[self.kind]):
            for (di, dj), w in merged.items():
                mirror = (-di, dj) if axis == 0 else (di, -dj)
                other = merged.get(mirror, 0)
                if abs(float(other - sign * w)) > 1e-12 * max(abs(float(w)), 1.0):
                    raise ValidationError(
                        f"{self.kind} stencil breaks its mirror symmetry at offset {(di, dj)}")
        object.__setattr__(self, "entries", entries)

    @property
    def derivative_order(self) -> int:
        return STENCIL_KINDS[self.kind][0]

    @property
    def radius(self) -> int:
        return max(max(abs(di), abs(dj)) for di, dj, _ in self.entries)

    def weights(self) -> dict[tuple[int, int], Number]:
        return {(di, dj): w for di, dj, w in self.entries}

    def transpose(self) -> "Stencil2D":
        kind = _TRANSPOSED_KIND.get(self.kind, self.kind)
        return Stencil2D(tuple((dj, di, w) for di, dj, w in self.entries), kind)

    def scaled(self, factor: Number) -> "Stencil2D":
        factor = _as_weight(factor)
        return Stencil2D(tuple((di, dj, factor * w) for di, dj, w in self.entries),
                         self.kind)

    def combine(self, other: "Stencil2D", kind: str | None = None) -> "Stencil2D":
        if self.derivative_order != other.derivative_order:
            raise ValidationError("cannot add stencils of different derivative order")
        return Stencil2D(self.entries + other.entries, kind or self.kind)

    def apply(self, u: np.ndarray, h: float = 1.0) -> np.ndarray:
        """Apply on a periodic grid; axis 0 is ``x`` (index ``i``)."""
        out = np.zeros(u.shape, dtype=np.result_type(u, np.float64))
        for di, dj, w in self.entries:
            out += float(w) * np.roll(u, (-di, -dj), axis=(0, 1))
        return out / h**self.derivative_order


@dataclass(frozen=True)
class MultiDimScheme:
    r"""Isotropy-corrected explicit scheme.

    .. math::

        (\partial_x u)_{i,j} = \frac{1}{h (1 + \beta)} \sum_\nu a_\nu
            \left[u_{i+\nu,j} + \frac{\beta}{2}(u_{i+\nu,j+\nu} + u_{i+\nu,j-\nu})\right]
    """

    base: SchemeSpec
    icf_beta: float = 0.0

    def __post_init__(self) -> None:
        if self.base.is_compact:
            raise ValidationError("multidimensional construction needs an explicit base")
        beta = float(self.icf_beta)
        if not math.isfinite(beta) or beta < 0.0:
            raise ValidationError(f"isotropy corrector factor must be >= 0, got {beta}")

    @property
    def label(self) -> str:
        return f"{self.base.label}-md(beta={self.icf_beta:g})"

    def to_stencil(self) -> Stencil2D:
        beta = self.icf_beta
        if isinstance(beta, (int, Fraction)):
            beta = Fraction(beta)
        axis = 1 / (1 + beta)
        diag = beta / (2 * (1 + beta))
        entries = []
        for n, an in enumerate(self.base.a, start=1):
            for nu, w in ((n, an), (-n, -an)):
                entries.append((nu, 0, w * axis))
                entries.append((nu, nu, w * diag))
                entries.append((nu, -nu, w * diag))
        return Stencil2D(tuple(entries), "dx")


@dataclass(frozen=True)
class MultiDimPrefactored:
    """Isotropy-corrected prefactored compact scheme (forward/backward sweeps)."""

    base: PrefactoredScheme
    icf_beta: float = 0.0

    def __post_init__(self) -> None:
        if self.icf_beta < 0.0:
            raise ValidationError("isotropy corrector factor must be >= 0")


# }}}


# {{{ catalog


def _table_scheme(label: str, alpha: Sequence, a: Sequence, order: int) -> SchemeSpec:
    """Build a scheme from tabulated entries: ``str`` or ``(str, divisor)`` decimals."""
    tol = 0.0
    parsed = []
    for group in (alpha, a):
        values = []
        for item in group:
            if isinstance(item, Fraction):
                values.append(item)
                continue
            text, div = (item, 1) if isinstance(item, str) else item
            if "/" in text:
                values.append(Fraction(text) / div)
                continue
            value, delta = _decimal(text, div)
            values.append(value)
            tol = max(tol, delta)
        parsed.append(tuple(values))
    return SchemeSpec(label, parsed[0], parsed[1], order, weight_tolerance=tol)


def _build_table() -> dict[str, SchemeSpec]:
    # measured orders for the optimized entries are recorded in README
    rows = [
        ("E2", [], ["1/2"], 2),
        ("E4", [], ["2/3", "-1/12"], 4),
        ("E6", [], ["3/4", "-3/20", "1/60"], 6),
        ("DRP", [], ["0.770882380", "-0.166705904", "0.020843142"], 4),
        ("C4", ["1/4"], ["3/4"], 4),
        ("Haras", ["0.3534620"], [("1.5669657", 2), ("0.13995831", 4)], 2),
        ("Lui", ["0.5381301", "0.0666331"],
         [("1.36757772", 2), ("0.823428170", 4), ("0.0185207834", 6)], 6),
        ("Lele", ["0.5771439", "0.0896406"],
         [("1.3025166", 2), ("0.99355", 4), ("0.03750245", 6)], 4),
    ]
    return {label: _table_scheme(label, al, a, n) for label, al, a, n in rows}


TABLE1: dict[str, SchemeSpec] = _build_table()

#: sixth-order prefactored coefficients in closed form
HIXON6_A = 0.5 - 1.0 / (2.0 * math.sqrt(5.0))
HIXON6_B = 1.0 - 1.0 / (30.0 * HIXON6_A)


def builtin_catalog() -> dict[str, Union[SchemeSpec, PrefactoredScheme]]:
    """Table schemes plus the prefactored schemes, keyed by label."""
    catalog: dict[str, Union[SchemeSpec, PrefactoredScheme]] = dict(TABLE1)
    catalog["Hixon6"] = PrefactoredScheme("Hixon6", HIXON6_A, HIXON6_B, 0.0, 6)
    catalog["Hixon4"] = derive_prefactored(4)
    return catalog


def get_scheme(label: str):
    catalog = builtin_catalog()
    try:
        return catalog[label]
    except KeyError:
        known = ", ".join(catalog)
        raise ValidationError(f"unknown scheme {label!r} (known: {known})") from None


def format_catalog(schemes: Iterable) -> str:
    """One record per scheme: ``label;order;alpha[...];a[...]``."""
    lines = ["# label;order;alpha;a"]
    for s in schemes:
        if isinstance(s, PrefactoredScheme):
            s = s.equivalent_central()
            label = s.label[: -len("-avg")] + " (averaged sweeps)"
        else:
            label = s.label
        alpha = ",".join(_fmt_weight(x) for x in s.alpha)
        a = ",".join(_fmt_weight(x) for x in s.a)
        lines.append(f"{label};{s.formal_order};[{alpha}];[{a}]")
    return "\n".join(lines) + "\n"


def _fmt_weight(x: Number) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator < 10**4 else format(float(x), ".17g")
    return format(float(x), ".17g")


# }}}


# {{{ Taylor series verification


def _series_coefficients(scheme: SchemeSpec, terms: int = MAX_SERIES_TERMS):
    """Coefficients of ``z**(2p+1)`` in ``N(z) - z D(z)`` and their tolerances.

    ``N`` and ``D`` are the numerator and denominator of the modified
    wavenumber, so a vanishing coefficient means the symbol matches ``z``
    through that power.
    """
    coefs, tols = [], []
    for p in range(terms):
        sign = -1 if p % 2 else 1
        num_terms = [2 * an * n ** (2 * p + 1) for n, an in enumerate(scheme.a, 1)]
        if p == 0:
            den_terms = [1] + [2 * al for al in scheme.alpha]
            den_sens = 2 * len(scheme.alpha)
        else:
            den_terms = [2 * al * n ** (2 * p) for n, al in enumerate(scheme.alpha, 1)]
            den_sens = sum(2 * n ** (2 * p) for n in range(1, len(scheme.alpha) + 1))
            den_sens /= math.factorial(2 * p)
        num = sum(num_terms) / math.factorial(2 * p + 1)
        den = sum(den_terms) / (math.factorial(2 * p) if p else 1)
        coefs.append(sign * (num - den))
        scale = (sum(abs(float(t)) for t in num_terms) / math.factorial(2 * p + 1)
                 + sum(abs(float(t)) for t in den_terms) / math.factorial(2 * p))
        num_sens = sum(2 * n ** (2 * p + 1) for n in range(1, len(scheme.a) + 1))
        num_sens /= math.factorial(2 * p + 1)
        tols.append(ORDER_TOLERANCE * max(scale, 1.0)
                    + ROUNDING_SAFETY * scheme.weight_tolerance * (num_sens + den_sens))
    return coefs, tols


@singledispatch
def verify_formal_order(scheme) -> int:
    """Largest ``n`` such that the truncation error is ``O(h**n)``."""
    raise ValidationError(f"cannot verify order of {type(scheme).__name__}")


@verify_formal_order.register
def _(scheme: SchemeSpec) -> int:
    coefs, tols = _series_coefficients(scheme)
    for p, (c, tol) in enumerate(zip(coefs, tols)):
        if abs(float(c)) > tol:
            if p == 0:
                raise ConsistencyError(
                    f"scheme {scheme.label!r} is inconsistent: "
                    f"first-derivative moment off by {float(c):.3e}")
            return 2 * p
    return 2 * len(coefs)


@verify_formal_order.register
def _(scheme: PrefactoredScheme) -> int:
    return verify_formal_order(scheme.equivalent_central())


def stencil_moments(stencil: Stencil2D, degree: int) -> dict[tuple[int, int], Number]:
    """Taylor moments ``sum(w di**p dj**q) / (p! q!)`` with ``p + q = degree``."""
    out = {}
    for p in range(degree + 1):
        q = degree - p
        m = sum(w * di**p * dj**q for di, dj, w in stencil.entries)
        out[(p, q)] = m / (math.factorial(p) * math.factorial(q))
    return out


@verify_formal_order.register
def _(scheme: Stencil2D, max_degree: int = 12) -> int:
    m, target = STENCIL_KINDS[scheme.kind]
    tol = ORDER_TOLERANCE * max(1.0, sum(abs(float(w)) for *_, w in scheme.entries))
    for degree in range(0, m + 1):
        for pq, value in stencil_moments(scheme, degree).items():
            if abs(float(value - target.get(pq, 0))) > tol:
                raise ConsistencyError(
                    f"{scheme.kind} stencil fails moment {pq}: {float(value)!r}")
    for degree in range(m + 1, max_degree + 1):
        if any(abs(float(v)) > tol for v in stencil_moments(scheme, degree).values()):
            return degree - m
    return max_degree - m + 1


def leading_error_terms(stencil: Stencil2D) -> dict[tuple[int, int], Number]:
    """Non-zero Taylor coefficients of the leading truncation term.

    Keys ``(p, q)`` stand for ``h**n d^p/dx^p d^q/dy^q u`` where ``n`` is the
    formal order.
    """
    n = verify_formal_order(stencil)
    moments = stencil_moments(stencil, stencil.derivative_order + n)
    return {pq: v for pq, v in moments.items() if v != 0}


# }}}


# {{{ constructors


def kumar_stencils() -> tuple[Stencil2D, Stencil2D, Stencil2D, Stencil2D]:
    """Isotropic d/dx, d2/dx2, Laplacian and the conventional cross derivative."""
    rows = {-1: Fraction(1, 6), 0: Fraction(4, 6), 1: Fraction(1, 6)}
    dx = Stencil2D(tuple(
        e for dj, w in rows.items()
        for e in ((1, dj, w / 2), (-1, dj, -w / 2))), "dx")

    rows2 = {-1: Fraction(1, 12), 0: Fraction(10, 12), 1: Fraction(1, 12)}
    dxx = Stencil2D(tuple(
        e for dj, w in rows2.items()
        for e in ((1, dj, w), (0, dj, -2 * w), (-1, dj, w))), "dxx")

    lap = dxx.combine(dxx.transpose(), kind="laplacian")
    q = Fraction(1, 4)
    dxy = Stencil2D(((1, 1, q), (1, -1, -q), (-1, 1, -q), (-1, -1, q)), "dxy")
    return dx, dxx, lap, dxy


def five_point_laplacian() -> Stencil2D:
    return trefethen_laplacian(1, 0)


def trefethen_laplacian(w_axis: Number = Fraction(2, 3),
                        w_diag: Number = Fraction(1, 3)) -> Stencil2D:
    """Blend of the axis 5-point Laplacian and its rotated (step sqrt(2) h) twin."""
    w_axis, w_diag = _as_weight(w_axis), _as_weight(w_diag)
    if abs(float(w_axis + w_diag) - 1.0) > 1e-12:
        raise ValidationError(f"blend weights must sum to 1, got {w_axis} + {w_diag}")
    half = Fraction(1, 2)
    entries = [(0, 0, -4 * w_axis - 4 * half * w_diag)]
    for d in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        entries.append((*d, w_axis))
    for d in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        entries.append((*d, half * w_diag))
    return Stencil2D(tuple(entries), "laplacian")


def _prefactored_residuals(a: float, b: float, c: float, powers: Sequence[int]):
    coefs, _ = _series_coefficients(
        PrefactoredScheme("trial", a, b, c).equivalent_central(), max(powers) + 1)
    return [float(coefs[p]) for p in powers]


def derive_prefactored(order: int) -> PrefactoredScheme:
    """Solve the Taylor conditions of the averaged sweeps on the 3-point stencil.

    Both variants keep ``c = 0``. Order 6 solves the ``z**3`` and ``z**5``
    conditions for ``(a, b)``. Order 4 is one condition for two unknowns; the
    forward sweep is then restricted to the two-point difference ``b = 1``
    and ``a`` solves the ``z**3`` condition. Roots with ``a < 1/2`` are taken
    so that the sweeps are diagonally dominant.
    """
    from scipy.optimize import brentq, root

    if order not in (4, 6):
        raise ValidationError(f"prefactored order must be 4 or 6, got {order}")

    if order == 4:
        a = brentq(lambda x: _prefactored_residuals(x, 1.0, 0.0, [1])[0],
                   1e-6, 0.5 - 1e-9, xtol=1e-15, rtol=1e-15, maxiter=200)
        scheme = PrefactoredScheme("Hixon4", a, 1.0, 0.0, 4)
    else:
        sol = root(lambda x: _prefactored_residuals(x[0], x[1], 0.0, [1, 2]),
                   x0=[0.3, 0.9], method="hybr")
        a, b = sol.x
        if max(abs(r) for r in _prefactored_residuals(a, b, 0.0, [1, 2])) > 1e-13:
            raise InfeasibleError(f"no sixth-order prefactored solution: {sol.message}")
        if not 0.0 < a < 0.5:
            raise InfeasibleError(f"sixth-order root a={a} is not diagonally dominant")
        scheme = PrefactoredScheme("Hixon6", float(a), float(b), 0.0, 6)

    if verify_formal_order(scheme) < order:
        raise InfeasibleError(f"derived coefficients do not reach order {order}")
    return scheme


# }}}
