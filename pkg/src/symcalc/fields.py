"""Expression-backed fields on a single coordinate patch of R^4.

A field is a small expression DAG over the four patch coordinates.  Every
node knows its exact partial derivatives, so symbols built from the
coefficients of an operator (which need first x-derivatives) never go
through finite differences.  Values are complex throughout; "real" fields
are simply ones whose imaginary part vanishes.

Only light constant folding is done (zeros, ones, constant sub-products);
there is no general simplifier.
"""

from __future__ import annotations

import numbers

import numpy as np

NDIM = 4


def as_points(x):
    """Return ``(points, single)`` with points of shape ``(N, 4)``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape != (NDIM,):
            raise ValueError(f"a point needs {NDIM} coordinates, got shape {arr.shape}")
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != NDIM:
        raise ValueError(f"expected points of shape (N, {NDIM}), got {arr.shape}")
    return arr, False


class Expr:
    """Base node.  Subclasses implement ``_eval`` and ``_diff``."""

    children: tuple = ()

    def diff(self, alpha: int) -> "Expr":
        """Exact partial derivative with respect to coordinate ``alpha`` (0-based)."""
        cache = self.__dict__.setdefault("_dcache", {})
        if alpha not in cache:
            cache[alpha] = self._diff(alpha)
        return cache[alpha]

    def gradient(self) -> tuple:
        return tuple(self.diff(a) for a in range(NDIM))

    def __call__(self, x):
        pts, single = as_points(x)
        out = evaluate([self], pts)[0]
        return out[0] if single else out

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(-1.0, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(-1.0, self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    __rmul__ = __mul__

    def __neg__(self):
        return mul(-1.0, self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1.0))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1.0))

    def __pow__(self, n):
        return power(self, n)

    def conj(self) -> "Expr":
        return conj(self)

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def is_constant(self) -> bool:
        return False


class Const(Expr):
    def __init__(self, value):
        self.value = complex(value)

    def _eval(self, X, args):
        return self.value

    def _diff(self, alpha):
        return ZERO

    @property
    def is_zero(self):
        return self.value == 0

    @property
    def is_constant(self):
        return True

    def __repr__(self):
        v = self.value
        return repr(v.real) if v.imag == 0 else repr(v)


ZERO = Const(0.0)
ONE = Const(1.0)


class Coord(Expr):
    def __init__(self, alpha: int):
        if not 0 <= alpha < NDIM:
            raise ValueError(f"coordinate index {alpha} out of range")
        self.alpha = alpha

    def _eval(self, X, args):
        return X[:, self.alpha]

    def _diff(self, alpha):
        return ONE if alpha == self.alpha else ZERO

    def __repr__(self):
        return f"x{self.alpha + 1}"


class Add(Expr):
    def __init__(self, terms):
        self.children = tuple(terms)

    def _eval(self, X, args):
        total = args[0]
        for a in args[1:]:
            total = total + a
        return total

    def _diff(self, alpha):
        return add(*(t.diff(alpha) for t in self.children))

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.children)) + ")"


class Mul(Expr):
    def __init__(self, factors):
        self.children = tuple(factors)

    def _eval(self, X, args):
        total = args[0]
        for a in args[1:]:
            total = total * a
        return total

    def _diff(self, alpha):
        terms = []
        for i, f in enumerate(self.children):
            df = f.diff(alpha)
            if df.is_zero:
                continue
            terms.append(mul(*self.children[:i], df, *self.children[i + 1:]))
        return add(*terms)

    def __repr__(self):
        return "*".join(map(repr, self.children))


class Pow(Expr):
    def __init__(self, base: Expr, exponent: float):
        self.children = (base,)
        self.exponent = float(exponent)

    def _eval(self, X, args):
        base = np.asarray(args[0], dtype=complex)
        if self.exponent == -1.0:
            return 1.0 / base
        if self.exponent.is_integer():
            return base ** int(self.exponent)
        return np.power(base, self.exponent)

    def _diff(self, alpha):
        base = self.children[0]
        db = base.diff(alpha)
        if db.is_zero:
            return ZERO
        return mul(self.exponent, power(base, self.exponent - 1.0), db)

    def __repr__(self):
        return f"{self.children[0]!r}**{self.exponent:g}"


class _Unary(Expr):
    name = "?"
    fn = None

    def __init__(self, arg: Expr):
        self.children = (arg,)

    def _eval(self, X, args):
        return type(self).fn(np.asarray(args[0], dtype=complex))

    def __repr__(self):
        return f"{self.name}({self.children[0]!r})"


class Sin(_Unary):
    name, fn = "sin", np.sin

    def _diff(self, alpha):
        u = self.children[0]
        return mul(cos(u), u.diff(alpha))


class Cos(_Unary):
    name, fn = "cos", np.cos

    def _diff(self, alpha):
        u = self.children[0]
        return mul(-1.0, sin(u), u.diff(alpha))


class Exp(_Unary):
    name, fn = "exp", np.exp

    def _diff(self, alpha):
        return mul(self, self.children[0].diff(alpha))


class Conj(_Unary):
    name, fn = "conj", np.conj

    def _diff(self, alpha):
        return conj(self.children[0].diff(alpha))


class Abs(_Unary):
    """Modulus.  Differentiable wherever the argument is nonzero."""

    name, fn = "abs", np.abs

    def _diff(self, alpha):
        u = self.children[0]
        du = u.diff(alpha)
        if du.is_zero:
            return ZERO
        # d|u| = Re(conj(u) du) / |u|
        re = mul(0.5, add(mul(conj(u), du), mul(u, conj(du))))
        return mul(re, power(self, -1.0))


# folding constructors ----------------------------------------------------

def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, numbers.Number):
        return Const(value)
    raise TypeError(f"cannot use {type(value).__name__} as a scalar field")


def add(*terms) -> Expr:
    flat = []
    const = 0j
    for t in map(as_expr, terms):
        if isinstance(t, Add):
            for c in t.children:
                if isinstance(c, Const):
                    const += c.value
                else:
                    flat.append(c)
        elif isinstance(t, Const):
            const += t.value
        else:
            flat.append(t)
    if const != 0:
        flat.append(Const(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(flat)


def mul(*factors) -> Expr:
    flat = []
    const = 1 + 0j
    for f in map(as_expr, factors):
        if isinstance(f, Mul):
            for c in f.children:
                if isinstance(c, Const):
                    const *= c.value
                else:
                    flat.append(c)
        elif isinstance(f, Const):
            const *= f.value
        else:
            flat.append(f)
        if const == 0:
            return ZERO
    if not flat:
        return Const(const)
    if const != 1:
        flat.insert(0, Const(const))
    if len(flat) == 1:
        return flat[0]
    return Mul(flat)


def power(base, exponent: float) -> Expr:
    base = as_expr(base)
    exponent = float(exponent)
    if exponent == 0.0:
        return ONE
    if exponent == 1.0:
        return base
    if isinstance(base, Const):
        return Const(complex(base.value) ** exponent)
    return Pow(base, exponent)


def sin(u) -> Expr:
    u = as_expr(u)
    return Const(np.sin(u.value)) if isinstance(u, Const) else Sin(u)


def cos(u) -> Expr:
    u = as_expr(u)
    return Const(np.cos(u.value)) if isinstance(u, Const) else Cos(u)


def exp(u) -> Expr:
    u = as_expr(u)
    return Const(np.exp(u.value)) if isinstance(u, Const) else Exp(u)


def conj(u) -> Expr:
    u = as_expr(u)
    if isinstance(u, Const):
        return Const(np.conj(u.value))
    if isinstance(u, (Coord, Abs)):
        return u
    if isinstance(u, Conj):
        return u.children[0]
    return Conj(u)


def absolute(u) -> Expr:
    u = as_expr(u)
    return Const(abs(u.value)) if isinstance(u, Const) else Abs(u)


def coords() -> tuple:
    """The four coordinate projections ``(x1, x2, x3, x4)``."""
    return tuple(Coord(a) for a in range(NDIM))


def evaluate(exprs, X) -> list:
    """Evaluate several expressions at points ``X`` (N, 4) with a shared node cache.

    Returns complex arrays of shape ``(N,)``.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    cache: dict[int, object] = {}

    def ev(node):
        key = id(node)
        if key in cache:
            return cache[key]
        # iterative post-order to stay clear of the recursion limit on deep DAGs
        stack = [(node, False)]
        while stack:
            cur, ready = stack.pop()
            if id(cur) in cache:
                continue
            if ready or not cur.children:
                args = [cache[id(c)] for c in cur.children]
                cache[id(cur)] = cur._eval(X, args)
            else:
                stack.append((cur, True))
                for c in cur.children:
                    if id(c) not in cache:
                        stack.append((c, False))
        return cache[key]

    out = []
    for e in exprs:
        val = ev(e)
        out.append(np.broadcast_to(np.asarray(val, dtype=complex), (n,)).copy())
    return out


class MatrixField:
    """An array (any shape, usually 2x2, 2 or 4x4) of scalar fields."""

    def __init__(self, entries):
        arr = np.empty(np.shape(entries), dtype=object)
        src = np.asarray(entries, dtype=object)
        for idx in np.ndindex(arr.shape):
            arr[idx] = as_expr(src[idx])
        self.entries = arr

    @classmethod
    def constant(cls, M) -> "MatrixField":
        M = np.asarray(M, dtype=complex)
        if M.ndim == 0:
            raise ValueError("use Const for scalar values")
        return cls(np.vectorize(Const, otypes=[object])(M))

    @classmethod
    def zeros(cls, shape) -> "MatrixField":
        arr = np.empty(shape, dtype=object)
        arr.fill(ZERO)
        return cls(arr)

    @property
    def shape(self):
        return self.entries.shape

    def __getitem__(self, idx):
        out = self.entries[idx]
        return MatrixField(out) if isinstance(out, np.ndarray) else out

    def __iter__(self):
        for i in range(self.shape[0]):
            yield self[i]

    def flat(self) -> list:
        return list(self.entries.ravel())

    def __call__(self, x):
        pts, single = as_points(x)
        out = evaluate_fields([self], pts)[0]
        return out[0] if single else out

    def diff(self, alpha: int) -> "MatrixField":
        return MatrixField(np.vectorize(lambda e: e.diff(alpha), otypes=[object])(self.entries))

    def map(self, fn) -> "MatrixField":
        return MatrixField(np.vectorize(fn, otypes=[object])(self.entries))

    def conj(self) -> "MatrixField":
        return self.map(conj)

    @property
    def T(self) -> "MatrixField":
        return MatrixField(self.entries.T)

    @property
    def H(self) -> "MatrixField":
        """Conjugate transpose."""
        return MatrixField(self.conj().entries.T)

    def trace(self) -> Expr:
        return add(*(self.entries[i, i] for i in range(self.shape[0])))

    def det2(self) -> Expr:
        a, b = self.entries[0]
        c, d = self.entries[1]
        return add(mul(a, d), mul(-1.0, b, c))

    def adj(self) -> "MatrixField":
        """2x2 matrix adjugate [[d, -b], [-c, a]]."""
        a, b = self.entries[0]
        c, d = self.entries[1]
        return MatrixField([[d, mul(-1.0, b)], [mul(-1.0, c), a]])

    def _coerce(self, other):
        if isinstance(other, MatrixField):
            return other.entries
        if isinstance(other, np.ndarray):
            return MatrixField.constant(other).entries
        return as_expr(other)

    def __add__(self, other):
        o = self._coerce(other)
        if isinstance(o, Expr):
            raise TypeError("adding a scalar to a matrix field is ambiguous")
        return MatrixField(_elementwise(add, self.entries, o))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * MatrixField(self._coerce(other))

    def __rsub__(self, other):
        return MatrixField(self._coerce(other)) - self

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        o = self._coerce(other)
        if isinstance(o, Expr):
            return self.map(lambda e: mul(o, e))
        return MatrixField(_elementwise(mul, self.entries, o))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return MatrixField(_matmul(self.entries, self._coerce(other)))

    def __rmatmul__(self, other):
        return MatrixField(_matmul(self._coerce(other), self.entries))

    def __repr__(self):
        return f"MatrixField(shape={self.shape})"


def _elementwise(fn, a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=object), np.asarray(b, dtype=object))
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = fn(a[idx], b[idx])
    return out


def _matmul(a, b):
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    if a.ndim == 1 or a.ndim > 2 or b.ndim > 2:
        raise ValueError("matrix fields multiply as (n, k) @ (k, m) or (n, k) @ (k,)")
    k = a.shape[1]
    if b.shape[0] != k:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if b.ndim == 1:
        return np.array([add(*(mul(a[i, j], b[j]) for j in range(k))) for i in range(a.shape[0])],
                        dtype=object)
    out = np.empty((a.shape[0], b.shape[1]), dtype=object)
    for i in range(a.shape[0]):
        for m in range(b.shape[1]):
            out[i, m] = add(*(mul(a[i, j], b[j, m]) for j in range(k)))
    return out


def evaluate_fields(fields, X) -> list:
    """Evaluate MatrixFields (or bare Exprs) at points ``X`` (N, 4) sharing one cache.

    Each result has shape ``(N, *field.shape)``.
    """
    exprs = []
    spans = []
    for f in fields:
        if isinstance(f, Expr):
            spans.append((len(exprs), 1, ()))
            exprs.append(f)
        else:
            flat = f.flat()
            spans.append((len(exprs), len(flat), f.shape))
            exprs.extend(flat)
    vals = evaluate(exprs, X)
    n = np.asarray(X).shape[0]
    out = []
    for start, count, shape in spans:
        block = np.stack(vals[start:start + count], axis=-1) if count else np.empty((n, 0), complex)
        out.append(block.reshape((n,) + tuple(shape)))
    return out


def substitute_affine(expr: Expr, Ainv: np.ndarray, c: np.ndarray, _memo=None) -> Expr:
    """Compose ``expr`` with the affine map ``x = Ainv @ x' + c``.

    The result is a field in the primed coordinates.
    """
    memo = {} if _memo is None else _memo
    key = id(expr)
    if key in memo:
        return memo[key]
    primed = coords()
    if isinstance(expr, Const):
        out = expr
    elif isinstance(expr, Coord):
        a = expr.alpha
        out = add(*(mul(float(Ainv[a, b]), primed[b]) for b in range(NDIM) if Ainv[a, b] != 0),
                  float(c[a]))
    else:
        kids = [substitute_affine(ch, Ainv, c, memo) for ch in expr.children]
        if isinstance(expr, Add):
            out = add(*kids)
        elif isinstance(expr, Mul):
            out = mul(*kids)
        elif isinstance(expr, Pow):
            out = power(kids[0], expr.exponent)
        else:
            out = {Sin: sin, Cos: cos, Exp: exp, Conj: conj, Abs: absolute}[type(expr)](kids[0])
    memo[key] = out
    return out
