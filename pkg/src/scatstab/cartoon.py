"""Cartoon functions ``f1 + 1_B * f2`` and their size parameter ``K``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .signals import Grid, Signal, japanese_bracket

__all__ = [
    "SmoothPart",
    "DomainB",
    "CartoonSpec",
    "DecayCheck",
    "SizeEstimate",
    "sample_cartoon",
    "boundary_length",
    "verify_decay",
    "decay_constant",
    "estimate_size",
    "dense_max",
]

# Points evaluated per chunk in dense sweeps.
_CHUNK = 1 << 18


def dense_max(func, grid: Grid, factor: int = 4):
    """Maximum of ``func(points)`` over ``grid`` refined ``factor`` times.

    The refined grid contains every sample of ``grid``. Evaluated in chunks of
    rows so 2-d sweeps stay memory bounded. Returns ``(value, point)``.
    """
    fine = grid.refined(factor)
    axes = [fine.axis(k) for k in range(fine.dim)]
    best, best_point = -np.inf, None
    if fine.dim == 1:
        blocks = [axes[0][i:i + _CHUNK] for i in range(0, len(axes[0]), _CHUNK)]
        make = lambda b: b[:, None]
    else:
        rows = max(1, _CHUNK // len(axes[1]))
        blocks = [axes[0][i:i + rows] for i in range(0, len(axes[0]), rows)]
        make = lambda b: np.stack(np.meshgrid(b, axes[1], indexing="ij"), axis=-1)
    for block in blocks:
        pts = make(block)
        vals = np.asarray(func(pts), dtype=float)
        k = int(np.argmax(vals))
        if vals.flat[k] > best:
            best = float(vals.flat[k])
            best_point = pts.reshape(-1, fine.dim)[k].copy()
    return best, best_point


@dataclass(frozen=True)
class SmoothPart:
    """A ``C^1`` function with closed-form gradient.

    ``kind`` is one of ``"gaussian"``, ``"gaussian-mixture"``, ``"bump"``
    (smoothed polynomial bump ``a * (1 - |x-c|^2 / r^2)^p``), ``"constant"``
    or ``"zero"``. ``components`` holds per-kind parameter tuples:
    ``(amplitude, center, width)`` for Gaussians, ``(amplitude, center,
    radius, power)`` for bumps and ``(value,)`` for constants. Constants are
    not square integrable and are only meaningful as the ``f2`` factor.
    """

    kind: str
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in ("gaussian", "gaussian-mixture", "bump", "constant", "zero"):
            raise ValueError(f"unknown smooth part kind {self.kind!r}")
        comps = []
        for comp in self.components:
            comp = tuple(comp)
            if self.kind in ("gaussian", "gaussian-mixture", "bump"):
                amp, center = complex(comp[0]), tuple(float(c) for c in np.atleast_1d(comp[1]))
                if not comp[2] > 0:
                    raise ValueError("width/radius must be positive")
                comp = (amp, center) + tuple(float(c) for c in comp[2:])
                if self.kind == "bump" and comp[3] < 2:
                    raise ValueError("bump power must be >= 2 for a C^1 function")
            else:
                comp = (complex(comp[0]),)
            comps.append(comp)
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def gaussian(cls, amplitude=1.0, center=0.0, width=1.0) -> "SmoothPart":
        return cls("gaussian", ((amplitude, center, width),))

    @classmethod
    def mixture(cls, components) -> "SmoothPart":
        return cls("gaussian-mixture", tuple(components))

    @classmethod
    def bump(cls, amplitude=1.0, center=0.0, radius=1.0, power=3) -> "SmoothPart":
        return cls("bump", ((amplitude, center, radius, power),))

    @classmethod
    def constant(cls, value=1.0) -> "SmoothPart":
        return cls("constant", ((value,),))

    @classmethod
    def zero(cls) -> "SmoothPart":
        return cls("zero")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or all(c[0] == 0 for c in self.components)

    def scaled(self, factor) -> "SmoothPart":
        comps = tuple((c[0] * factor,) + c[1:] for c in self.components)
        return SmoothPart(self.kind, comps)

    @staticmethod
    def _offset(points, center):
        # a 1-tuple center broadcasts over all axes
        return points - np.asarray(center)

    def __call__(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        out = np.zeros(points.shape[:-1], dtype=np.complex128)
        for comp in self.components:
            if self.kind == "constant":
                out = out + comp[0]
                continue
            y = self._offset(points, comp[1])
            r2 = np.sum(y * y, axis=-1)
            if self.kind == "bump":
                u = np.clip(1.0 - r2 / comp[2] ** 2, 0.0, None)
                out = out + comp[0] * u ** comp[3]
            else:
                out = out + comp[0] * np.exp(-r2 / (2 * comp[2] ** 2))
        return out

    def gradient(self, points) -> np.ndarray:
        """Gradient with shape ``points.shape``."""
        points = np.asarray(points, dtype=float)
        out = np.zeros(points.shape, dtype=np.complex128)
        for comp in self.components:
            if self.kind == "constant":
                continue
            y = self._offset(points, comp[1])
            r2 = np.sum(y * y, axis=-1)
            if self.kind == "bump":
                radius, power = comp[2], comp[3]
                u = np.clip(1.0 - r2 / radius**2, 0.0, None)
                coef = comp[0] * power * u ** (power - 1) * (-2.0 / radius**2)
            else:
                coef = comp[0] * np.exp(-r2 / (2 * comp[2] ** 2)) * (-1.0 / comp[2] ** 2)
            out = out + coef[..., None] * y
        return out

    def sup_abs(self, grid: Grid | None = None) -> float:
        """``||f||_inf``: exact for single components, dense-sampled otherwise."""
        if self.is_zero:
            return 0.0
        if len(self.components) == 1:
            return abs(self.components[0][0])
        if grid is None:
            raise ValueError("a grid is needed to bound a multi-component part")
        return dense_max(lambda p: np.abs(self(p)), grid)[0]


@dataclass(frozen=True)
class DomainB:
    """Compact domain with ``C^2`` boundary.

    ``kind`` / ``params``:

    * ``"interval"``: ``(a, b)``; membership is half-open ``[a, b)``.
    * ``"disc"``: ``(cx, cy, r)``.
    * ``"ellipse"``: ``(cx, cy, a, b, angle)``.
    * ``"star"``: ``(cx, cy, r0, ((k, a_k, b_k), ...))`` with radius
      ``r0 + sum a_k cos(k t) + b_k sin(k t)``, required positive.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        p = self.params
        if self.kind == "interval":
            if not p[0] < p[1]:
                raise ValueError(f"empty interval {p}")
        elif self.kind == "disc":
            if not p[2] > 0:
                raise ValueError("disc radius must be positive")
        elif self.kind == "ellipse":
            if not (p[2] > 0 and p[3] > 0):
                raise ValueError("ellipse semi-axes must be positive")
        elif self.kind == "star":
            harmonics = tuple(tuple(h) for h in p[3])
            object.__setattr__(self, "params", (p[0], p[1], p[2], harmonics))
            theta = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
            if self.radius(theta).min() <= 0:
                raise ValueError("star-shaped radius must stay positive")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def interval(cls, a=-1.0, b=1.0) -> "DomainB":
        return cls("interval", (float(a), float(b)))

    @classmethod
    def disc(cls, radius=1.0, center=(0.0, 0.0)) -> "DomainB":
        return cls("disc", (float(center[0]), float(center[1]), float(radius)))

    @classmethod
    def ellipse(cls, a, b, center=(0.0, 0.0), angle=0.0) -> "DomainB":
        return cls("ellipse", (float(center[0]), float(center[1]), float(a), float(b), float(angle)))

    @classmethod
    def star(cls, r0, harmonics, center=(0.0, 0.0)) -> "DomainB":
        return cls("star", (float(center[0]), float(center[1]), float(r0), tuple(harmonics)))

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    def radius(self, theta):
        """Star-shaped radius function ``r(t)`` and, for discs, the constant radius."""
        if self.kind == "disc":
            return np.full_like(np.asarray(theta, dtype=float), self.params[2])
        r = np.full_like(np.asarray(theta, dtype=float), self.params[2])
        for k, a, b in self.params[3]:
            r = r + a * np.cos(k * theta) + b * np.sin(k * theta)
        return r

    def _radius_derivative(self, theta):
        dr = np.zeros_like(np.asarray(theta, dtype=float))
        for k, a, b in self.params[3]:
            dr = dr - k * a * np.sin(k * theta) + k * b * np.cos(k * theta)
        return dr

    def contains(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ValueError(f"{self.kind} domain needs {self.dim}-d points")
        p = self.params
        if self.kind == "interval":
            x = points[..., 0]
            return (x >= p[0]) & (x < p[1])
        y = points - np.array([p[0], p[1]])
        if self.kind == "disc":
            return np.sum(y * y, axis=-1) <= p[2] ** 2
        if self.kind == "ellipse":
            c, s = np.cos(p[4]), np.sin(p[4])
            u = c * y[..., 0] + s * y[..., 1]
            v = -s * y[..., 0] + c * y[..., 1]
            return (u / p[2]) ** 2 + (v / p[3]) ** 2 <= 1.0
        theta = np.arctan2(y[..., 1], y[..., 0])
        return np.hypot(y[..., 0], y[..., 1]) <= self.radius(theta)

    def extent_box(self) -> np.ndarray:
        """Axis-aligned bounding box as ``(dim, 2)`` array of ``(lo, hi)``."""
        p = self.params
        if self.kind == "interval":
            return np.array([[p[0], p[1]]])
        if self.kind == "disc":
            r = p[2]
        elif self.kind == "ellipse":
            r = max(p[2], p[3])
        else:
            theta = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
            r = self.radius(theta).max() * 1.001
        return np.array([[p[0] - r, p[0] + r], [p[1] - r, p[1] + r]])

    def boundary_points(self, n: int = 4096) -> np.ndarray:
        """Points on the boundary curve (2-d) or the two endpoints (1-d)."""
        p = self.params
        if self.kind == "interval":
            return np.array([[p[0]], [p[1]]])
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        if self.kind == "ellipse":
            c, s = np.cos(p[4]), np.sin(p[4])
            u, v = p[2] * np.cos(t), p[3] * np.sin(t)
            return np.stack([p[0] + c * u - s * v, p[1] + s * u + c * v], axis=-1)
        r = self.radius(t)
        return np.stack([p[0] + r * np.cos(t), p[1] + r * np.sin(t)], axis=-1)


def boundary_length(domain: DomainB) -> float:
    """``vol^{d-1}`` of the boundary.

    Intervals count their two endpoints (``vol^0 = 2``); the disc and the
    ellipse use closed forms (complete elliptic integral of the second kind);
    star-shaped domains integrate ``sqrt(r^2 + r'^2)`` adaptively.
    """
    p = domain.params
    if domain.kind == "interval":
        return 2.0
    if domain.kind == "disc":
        return 2 * np.pi * p[2]
    if domain.kind == "ellipse":
        a, b = max(p[2], p[3]), min(p[2], p[3])
        return float(4 * a * special.ellipe(1.0 - (b / a) ** 2))
    speed = lambda t: np.hypot(domain.radius(t), domain._radius_derivative(t))
    value, _ = integrate.quad(speed, 0.0, 2 * np.pi, epsabs=0.0, epsrel=1e-12, limit=500)
    return float(value)


@dataclass(frozen=True)
class CartoonSpec:
    """``f = f1 + 1_B f2`` with optional declared size ``K``."""

    f1: SmoothPart
    f2: SmoothPart
    domain: DomainB
    size: float | None = None

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        inside = self.domain.contains(points)
        return self.f1(points) + inside * self.f2(points)

    def scaled_f2(self, factor) -> "CartoonSpec":
        return CartoonSpec(self.f1, self.f2.scaled(factor), self.domain, self.size)

    def check(self, grid: Grid) -> list[str]:
        """Violations of the declared size (empty list when ``K`` admits the cartoon)."""
        if self.size is None:
            raise ValueError("no declared size to check against")
        K = self.size
        problems = []
        for name, part in (("f1", self.f1), ("f2", self.f2)):
            result = verify_decay(part, K, grid)
            if not result.passed:
                problems.append(f"{name} violates the decay bound at x={result.point}")
        if not self.f2.is_zero and boundary_length(self.domain) > K:
            problems.append("boundary measure exceeds K")
        if self.f2.sup_abs(grid) > K:
            problems.append("sup |f2| exceeds K")
        return problems


def _check_safe_region(domain: DomainB, grid: Grid):
    box = domain.extent_box()
    for k in range(grid.dim):
        half = grid.lengths[k] / 4
        if box[k, 0] < -half or box[k, 1] > half:
            raise ValueError(
                f"domain {domain.kind} exceeds the central half of the grid along axis {k}"
            )


def sample_cartoon(spec: CartoonSpec, grid: Grid) -> Signal:
    """Evaluate ``f1(x) + 1_B(x) f2(x)`` at the grid coordinates.

    A sample is inside ``B`` iff its coordinate is (no anti-aliasing).
    """
    if spec.dim != grid.dim:
        raise ValueError(f"{spec.dim}-d cartoon on a {grid.dim}-d grid")
    _check_safe_region(spec.domain, grid)
    return Signal(grid, spec(grid.points()))


@dataclass(frozen=True)
class DecayCheck:
    passed: bool
    point: np.ndarray | None
    worst_ratio: float

    def __bool__(self) -> bool:
        return self.passed


def _decay_ratio(part: SmoothPart, points, dim: int):
    grad = part.gradient(points)
    mag = np.sqrt(np.sum(np.abs(grad) ** 2, axis=-1))
    return mag * japanese_bracket(points) ** dim


def decay_constant(part: SmoothPart, grid: Grid) -> float:
    """Smallest ``C`` with ``|grad f(x)| <= C <x>^{-d}`` on the dense sample."""
    if part.is_zero or part.kind == "constant":
        return 0.0
    return dense_max(lambda p: _decay_ratio(part, p, grid.dim), grid)[0]


def verify_decay(part: SmoothPart, K: float, grid: Grid) -> DecayCheck:
    """Check ``|grad f(x)| <= K <x>^{-d}`` on the grid and a 4x oversampled set.

    ``point`` is the first violating point in scan order, if any.
    """
    if part.is_zero or part.kind == "constant":
        return DecayCheck(True, None, 0.0)
    worst = decay_constant(part, grid) / K
    if worst <= 1.0:
        return DecayCheck(True, None, worst)
    fine = grid.refined(4)
    pts = fine.points().reshape(-1, grid.dim)
    for start in range(0, len(pts), _CHUNK):
        block = pts[start:start + _CHUNK]
        bad = np.nonzero(_decay_ratio(part, block, grid.dim) > K)[0]
        if bad.size:
            return DecayCheck(False, block[bad[0]].copy(), worst)
    return DecayCheck(False, None, worst)


@dataclass(frozen=True)
class SizeEstimate:
    """Componentwise contributions to the size ``K``."""

    decay_f1: float
    decay_f2: float
    boundary: float
    f2_sup: float

    @property
    def K(self) -> float:
        return max(self.decay_f1, self.decay_f2, self.boundary, self.f2_sup)

    def __float__(self) -> float:
        return self.K


def estimate_size(spec: CartoonSpec, grid: Grid) -> SizeEstimate:
    """Smallest size ``K`` admitting ``spec``, measured on a dense sample.

    When ``f2`` vanishes the boundary does not enter: the domain can be
    shrunk at will without changing the function.
    """
    f2_zero = spec.f2.is_zero
    return SizeEstimate(
        decay_f1=decay_constant(spec.f1, grid),
        decay_f2=decay_constant(spec.f2, grid),
        boundary=0.0 if f2_zero else boundary_length(spec.domain),
        f2_sup=spec.f2.sup_abs(grid),
    )
