"""Scalar backends: exact rationals or float64 with a tolerance.

Every tensor in the engine is a numpy array.  In exact mode the dtype is
``object`` holding :class:`fractions.Fraction` entries; in float mode it is
``float64``.  The backend owns the handful of operations whose semantics
differ between the two (square roots, zero tests, linear algebra).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable

import numpy as np

DEFAULT_TOLERANCE = 1e-9


class IrrationalRootError(ValueError):
    """Raised when exact mode needs the square root of a non-square rational."""


class SingularMatrixError(ValueError):
    """Raised when a matrix that must be invertible is not."""


def parse_scalar(value) -> Fraction | float:
    """Parse ``"p/q"``, decimal strings, ints and Fractions exactly; floats stay floats."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    raise TypeError(f"unsupported scalar {value!r}")


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    q = Fraction(q)
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def format_scalar(x) -> str | float:
    """JSON-friendly form: exact values as ``"p/q"`` strings, floats as floats."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return float(x)


def is_exact_array(a: np.ndarray) -> bool:
    return np.asarray(a).dtype == object


@dataclass(frozen=True)
class ScalarBackend:
    """Arithmetic mode plus comparison tolerance.

    ``tol`` is the threshold actually used for zero tests: 0 in exact mode,
    ``tolerance`` in float mode.
    """

    mode: str = "exact"
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown backend mode {self.mode!r}")
        if not self.tolerance > 0:
            raise ValueError("float tolerance must be positive")

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def tol(self):
        return Fraction(0) if self.exact else self.tolerance

    def as_float(self) -> "ScalarBackend":
        return ScalarBackend("float", self.tolerance)

    # -- scalars -------------------------------------------------------
    def scalar(self, x):
        if self.exact:
            if isinstance(x, Fraction):
                return x
            if isinstance(x, (float, np.floating)):
                raise TypeError(f"float {x!r} cannot enter the exact backend")
            return parse_scalar(x)
        return float(x)

    def sqrt(self, x):
        """Square root; exact mode raises :class:`IrrationalRootError` if irrational."""
        if self.exact:
            r = rational_sqrt(self.scalar(x))
            if r is None:
                raise IrrationalRootError(f"sqrt({x}) is not rational")
            return r
        if x < 0:
            raise ValueError(f"sqrt of negative number {x}")
        return math.sqrt(float(x))

    def is_zero(self, x) -> bool:
        return abs(x) <= self.tol

    def ok(self, residual, tolerance=None) -> bool:
        return residual <= (self.tol if tolerance is None else tolerance)

    # -- arrays --------------------------------------------------------
    def array(self, data) -> np.ndarray:
        if self.exact:
            raw = np.asarray(data, dtype=object)
            out = np.empty(raw.shape, dtype=object)
            for idx, v in np.ndenumerate(raw):
                out[idx] = self.scalar(v)
            return out
        return np.asarray(np.asarray(data, dtype=object).astype(float), dtype=float)

    def cast(self, a: np.ndarray) -> np.ndarray:
        """Convert an array produced by either backend into this backend."""
        a = np.asarray(a)
        if self.exact:
            if a.dtype != object:
                raise TypeError("cannot cast float data into the exact backend")
            return a
        return a.astype(float)

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = Fraction(1) if self.exact else 1.0
        return out

    def half(self):
        return Fraction(1, 2) if self.exact else 0.5

    def max_abs(self, a) -> Fraction | float:
        a = np.asarray(a)
        if a.size == 0:
            return self.tol * 0
        m = np.abs(a).max()
        return Fraction(m) if self.exact else float(m)

    # -- linear algebra ------------------------------------------------
    def inv(self, a: np.ndarray) -> np.ndarray:
        if self.exact:
            mat = _to_sympy(a)
            if mat.det() == 0:
                raise SingularMatrixError("matrix is singular (determinant 0)")
            return _from_sympy(mat.inv())
        cond = np.linalg.cond(a)
        if not np.isfinite(cond) or cond > 1.0 / (self.tolerance * 1e-3):
            raise SingularMatrixError(
                f"matrix is numerically singular (condition {cond:.3e}, "
                f"determinant {np.linalg.det(a):.3e})"
            )
        return np.linalg.inv(a)

    def solve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.exact:
            mat = _to_sympy(a)
            if mat.det() == 0:
                raise SingularMatrixError("matrix is singular (determinant 0)")
            return _from_sympy(mat.LUsolve(_to_sympy(b)))
        return np.linalg.solve(a, b)

    def nullspace(self, a: np.ndarray) -> np.ndarray:
        """Basis of the kernel as columns (shape ``(cols, k)``)."""
        a = np.atleast_2d(a)
        if self.exact:
            vecs = _to_sympy(a).nullspace()
            if not vecs:
                return self.zeros((a.shape[1], 0))
            return np.hstack([_from_sympy(v) for v in vecs])
        from scipy.linalg import null_space

        return null_space(a.astype(float), rcond=1e-7)

    def rank(self, a: np.ndarray) -> int:
        a = np.atleast_2d(a)
        if a.size == 0:
            return 0
        if self.exact:
            return int(_to_sympy(a).rank())
        return int(np.linalg.matrix_rank(a.astype(float), tol=max(self.tolerance, 1e-7)))

    def signature(self, a: np.ndarray) -> tuple[int, int]:
        """(negative, positive) eigenvalue counts of a symmetric matrix.

        Exact mode counts sign changes of the characteristic polynomial
        (Descartes' rule is exact for real-rooted polynomials).
        """
        if self.exact:
            import sympy

            x = sympy.Symbol("x")
            poly = _to_sympy(a).charpoly(x)
            coeffs = [c for c in poly.all_coeffs()]
            pos = _sign_changes(coeffs)
            neg = _sign_changes([c * (-1) ** (len(coeffs) - 1 - i) for i, c in enumerate(coeffs)])
            return neg, pos
        ev = np.linalg.eigvalsh(np.asarray(a, dtype=float))
        cut = max(self.tolerance, 1e-7) * max(1.0, float(np.abs(ev).max()))
        return int((ev < -cut).sum()), int((ev > cut).sum())


def _sign_changes(coeffs: Iterable) -> int:
    signs = [1 if c > 0 else -1 for c in coeffs if c != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _to_sympy(a):
    import sympy

    a = np.atleast_2d(np.asarray(a, dtype=object))
    return sympy.Matrix(
        a.shape[0], a.shape[1], [sympy.Rational(int(v.numerator), int(v.denominator)) for v in a.flat]
    )


def _from_sympy(mat) -> np.ndarray:
    out = np.empty(mat.shape, dtype=object)
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            v = mat[i, j]
            out[i, j] = Fraction(int(v.p), int(v.q))
    return out


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return Fraction(int(v))


def roots_backend(backend: ScalarBackend, *radicands) -> tuple[ScalarBackend, list]:
    """Square roots of ``radicands``, dropping to float if any is irrational.

    Returns the backend the roots live in together with the roots.
    """
    if backend.exact:
        out = []
        for r in radicands:
            s = rational_sqrt(Fraction(r))
            if s is None:
                break
            out.append(s)
        else:
            return backend, out
        backend = backend.as_float()
    return backend, [math.sqrt(float(r)) for r in radicands]


def convert(x, backend: ScalarBackend):
    """Convert a scalar computed elsewhere into ``backend``."""
    if backend.exact:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        raise TypeError(f"cannot convert {x!r} into the exact backend")
    return float(x)
