"""Deformation fields and the warping operator ``(F_tau f)(x) = f(x - tau(x))``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft
from scipy import integrate, ndimage, special

from .cartoon import CartoonSpec, DomainB, dense_max
from .signals import Grid, Signal

__all__ = [
    "DeformationField",
    "DeformationRangeError",
    "sup_norm",
    "jacobian_sup",
    "apply_deformation",
    "warp_function",
    "tube_volume",
    "lemma1_constant",
    "geometric_ladder",
    "deform_cartoon",
]


class DeformationRangeError(ValueError):
    """The field violates ``||tau||_inf < 1/2`` and no override was given."""


@dataclass(frozen=True)
class DeformationField:
    """Displacement field ``tau: R^d -> R^d`` with analytic Jacobian.

    Kinds:

    * ``"translation"``: constant ``shift`` vector.
    * ``"gaussian-bump"``: ``amplitude * exp(-|x|^2 / width^2) * direction``.
    * ``"smooth-random"``: random trigonometric polynomial with integer wave
      vectors up to ``modes`` on a periodic window of side ``period``,
      normalized so that ``amplitude`` is its sup norm.
    """

    kind: str
    dim: int
    amplitude: float = 0.0
    shift: tuple = ()
    direction: tuple = ()
    width: float = 1.0
    seed: int = 0
    period: float = 1.0
    modes: int = 2

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("fields are 1-d or 2-d")
        if self.kind == "translation":
            shift = tuple(float(s) for s in np.atleast_1d(self.shift))
            if len(shift) != self.dim:
                raise ValueError(f"shift needs {self.dim} components")
            object.__setattr__(self, "shift", shift)
        elif self.kind == "gaussian-bump":
            direction = self.direction or (1.0,) + (0.0,) * (self.dim - 1)
            direction = np.asarray(direction, dtype=float)
            if len(direction) != self.dim or not np.linalg.norm(direction) > 0:
                raise ValueError("direction must be a nonzero vector of matching dimension")
            object.__setattr__(self, "direction", tuple(direction / np.linalg.norm(direction)))
            if not self.width > 0:
                raise ValueError("bump width must be positive")
        elif self.kind == "smooth-random":
            if self.modes < 1 or not self.period > 0:
                raise ValueError("smooth-random fields need modes >= 1 and a positive period")
        else:
            raise ValueError(f"unknown deformation kind {self.kind!r}")

    # -- constructors

    @classmethod
    def translation(cls, shift) -> "DeformationField":
        shift = tuple(np.atleast_1d(np.asarray(shift, dtype=float)))
        return cls("translation", len(shift), shift=shift,
                   amplitude=float(np.linalg.norm(shift)))

    @classmethod
    def zero(cls, dim: int) -> "DeformationField":
        return cls.translation((0.0,) * dim)

    @classmethod
    def gaussian_bump(cls, amplitude: float, dim: int = 1, width: float = 1.0, direction=()) -> "DeformationField":
        return cls("gaussian-bump", dim, amplitude=float(amplitude), width=width, direction=tuple(direction))

    @classmethod
    def smooth_random(cls, amplitude: float, dim: int, seed: int, period: float, modes: int = 2):
        return cls("smooth-random", dim, amplitude=float(amplitude), seed=int(seed),
                   period=float(period), modes=int(modes))

    def scaled_to(self, amplitude: float) -> "DeformationField":
        """Same shape with a new sup-norm amplitude (translations keep direction)."""
        if self.kind == "translation":
            norm = np.linalg.norm(self.shift)
            unit = np.asarray(self.shift) / norm if norm > 0 else np.eye(self.dim)[0]
            return DeformationField.translation(unit * amplitude)
        return DeformationField(self.kind, self.dim, float(amplitude), self.shift, self.direction,
                                self.width, self.seed, self.period, self.modes)

    # -- smooth-random internals

    def _random_terms(self):
        rng = np.random.default_rng(self.seed)
        m = self.modes
        if self.dim == 1:
            waves = [(k,) for k in range(1, m + 1)]
        else:
            waves = [(kx, ky) for kx in range(0, m + 1) for ky in range(-m, m + 1)
                     if (kx, ky) != (0, 0) and not (kx == 0 and ky < 0)]
        waves = np.array(waves, dtype=float)
        decay = 1.0 / np.sum(waves**2, axis=1)
        cos_c = rng.standard_normal((len(waves), self.dim)) * decay[:, None]
        sin_c = rng.standard_normal((len(waves), self.dim)) * decay[:, None]
        return 2 * np.pi * waves / self.period, cos_c, sin_c

    def _unit_random(self, points, jac: bool, norm: float | None = None):
        norm = self._norm if norm is None else norm
        omega, cos_c, sin_c = self._terms
        phase = points @ omega.T  # (..., n_waves)
        c, s = np.cos(phase), np.sin(phase)
        if not jac:
            return (c @ cos_c + s @ sin_c) / norm
        # d/dx_j of cos(w.x) a_i = -sin(w.x) w_j a_i
        return (np.einsum("...k,ki,kj->...ij", -s, cos_c, omega)
                + np.einsum("...k,ki,kj->...ij", c, sin_c, omega)) / norm

    @cached_property
    def _terms(self):
        return self._random_terms()

    @property
    def _norm(self) -> float:
        return _random_unit_stats(self.dim, self.seed, self.period, self.modes)[0]

    # -- evaluation

    def __call__(self, points) -> np.ndarray:
        """Displacements with the shape of ``points`` (``(..., d)``)."""
        points = np.asarray(points, dtype=float)
        if self.kind == "translation":
            return np.broadcast_to(np.asarray(self.shift), points.shape).copy()
        if self.kind == "gaussian-bump":
            env = self.amplitude * np.exp(-np.sum(points**2, axis=-1) / self.width**2)
            return env[..., None] * np.asarray(self.direction)
        return self.amplitude * self._unit_random(points, False)

    def jacobian(self, points) -> np.ndarray:
        """``D tau`` with shape ``points.shape + (d,)``, entry ``[i, j] = d tau_i / d x_j``."""
        points = np.asarray(points, dtype=float)
        if self.kind == "translation":
            return np.zeros(points.shape + (self.dim,))
        if self.kind == "gaussian-bump":
            env = self.amplitude * np.exp(-np.sum(points**2, axis=-1) / self.width**2)
            grad_env = env[..., None] * (-2.0 * points / self.width**2)
            return np.asarray(self.direction)[:, None] * grad_env[..., None, :]
        return self.amplitude * self._unit_random(points, True)

    @property
    def is_zero(self) -> bool:
        if self.kind == "translation":
            return not any(self.shift)
        return self.amplitude == 0.0


def _period_grid(dim: int, period: float) -> Grid:
    n = 512 if dim == 1 else 128
    return Grid(dim, (n,) * dim, period / n)


@lru_cache(maxsize=64)
def _random_unit_stats(dim: int, seed: int, period: float, modes: int):
    """Sup norm of the raw random series and Jacobian sups of the normalized one.

    Fields are periodic, so one period sampled 4x densely covers ``R^d``.
    """
    raw = DeformationField("smooth-random", dim, 1.0, seed=seed, period=period, modes=modes)
    grid = _period_grid(dim, period)
    norm = dense_max(lambda p: np.linalg.norm(raw._unit_random(p, False, 1.0), axis=-1), grid)[0]
    jac = {
        name: dense_max(lambda p: _matrix_norm(raw._unit_random(p, True, norm), name), grid)[0]
        for name in ("entry", "operator")
    }
    return norm, jac


def geometric_ladder(s0: float = 0.25, rungs: int = 7) -> np.ndarray:
    """Amplitudes ``s0 * 2**-k`` for ``k = 0 .. rungs - 1``."""
    return s0 * 2.0 ** -np.arange(rungs)


def _sample_grid(tau: DeformationField, grid: Grid | None) -> Grid:
    if grid is not None:
        return grid
    if tau.kind == "smooth-random":
        return _period_grid(tau.dim, tau.period)
    n = 1024 if tau.dim == 1 else 256
    return Grid(tau.dim, (n,) * tau.dim, 8.0 * tau.width / n)


def sup_norm(tau: DeformationField, grid: Grid | None = None) -> float:
    """``sup_x |tau(x)|`` over the grid and a 4x oversampled set.

    Exact for translations; periodic random fields are measured once over a
    densely sampled period, independent of ``grid``.
    """
    if tau.kind == "translation":
        return float(np.linalg.norm(tau.shift))
    if tau.is_zero:
        return 0.0
    if tau.kind == "smooth-random":
        # normalized on a dense sample of one period, which covers R^d
        return abs(tau.amplitude)
    return dense_max(lambda p: np.linalg.norm(tau(p), axis=-1), _sample_grid(tau, grid))[0]


def _matrix_norm(jac: np.ndarray, norm: str) -> np.ndarray:
    if norm in ("entry", "max-entry"):
        return np.abs(jac).max(axis=(-2, -1))
    if norm in ("operator", "spectral"):
        return np.linalg.norm(jac, ord=2, axis=(-2, -1))
    raise ValueError(f"unknown matrix norm {norm!r}")


def jacobian_sup(tau: DeformationField, grid: Grid | None = None, norm: str = "entry") -> float:
    """``sup_x ||D tau(x)||`` on a dense sample; max-abs-entry norm by default."""
    if tau.kind == "translation" or tau.is_zero:
        return 0.0
    if tau.kind == "smooth-random":
        if norm not in ("entry", "max-entry", "operator", "spectral"):
            raise ValueError(f"unknown matrix norm {norm!r}")
        key = "entry" if norm in ("entry", "max-entry") else "operator"
        stats = _random_unit_stats(tau.dim, tau.seed, tau.period, tau.modes)[1]
        return abs(tau.amplitude) * stats[key]
    return dense_max(lambda p: _matrix_norm(tau.jacobian(p), norm), _sample_grid(tau, grid))[0]


def warp_function(func, tau: DeformationField, grid: Grid) -> Signal:
    """Sample ``func(x - tau(x))`` on ``grid`` for an analytically known ``func``."""
    points = grid.points()
    return Signal(grid, func(points - tau(points)))


def _check_range(tau, grid, allow_large):
    if not allow_large and sup_norm(tau, grid) >= 0.5:
        raise DeformationRangeError(
            f"||tau||_inf = {sup_norm(tau, grid):.4g} >= 1/2; pass allow_large=True to override"
        )


_ORDERS = {"nearest": 0, "linear": 1, "cubic": 3}


def apply_deformation(
    f: Signal, tau: DeformationField, interp: str = "linear", allow_large: bool = False
) -> Signal:
    """Resample ``f`` at ``x - tau(x)`` with periodic extension.

    Displacements that are whole multiples of the spacing at every sample
    (``tau = 0``, grid-aligned translations) are applied as exact index
    shifts. Otherwise ``interp`` selects nearest, (bi)linear or cubic spline
    interpolation; ``"fourier"`` applies translations as an exact phase ramp
    for band-limited signals.
    """
    grid = f.grid
    if tau.dim != grid.dim:
        raise ValueError(f"{tau.dim}-d field on a {grid.dim}-d signal")
    _check_range(tau, grid, allow_large)
    if tau.is_zero:
        return f
    points = grid.points()
    steps = tau(points) / grid.spacing
    whole = np.rint(steps)
    if np.all(np.abs(steps - whole) < 1e-9):
        index = np.indices(grid.shape)
        src = tuple((index[k] - whole[..., k].astype(np.int64)) % grid.extent[k]
                    for k in range(grid.dim))
        return Signal(grid, f.samples[src])
    if interp == "fourier":
        if tau.kind != "translation":
            raise ValueError("Fourier warping is only exact for translations")
        phase = np.exp(-2j * np.pi * (grid.frequencies() @ np.asarray(tau.shift)))
        return Signal(grid, sfft.ifftn(f.fft() * phase))
    if interp not in _ORDERS:
        raise ValueError(f"unknown interpolation {interp!r}")
    index = np.indices(grid.shape).astype(float) - np.moveaxis(steps, -1, 0)
    order = _ORDERS[interp]
    resample = lambda a: ndimage.map_coordinates(a, index, order=order, mode="grid-wrap")
    return Signal(grid, resample(f.samples.real) + 1j * resample(f.samples.imag))


def tube_volume(domain: DomainB, tau: DeformationField, grid: Grid) -> float:
    """Grid-counted volume of ``S = {x : 1_B(x) != 1_B(x - tau(x))}``.

    Membership uses sample coordinates, matching :func:`sample_cartoon`.
    """
    if domain.dim != grid.dim:
        raise ValueError("domain and grid dimensions differ")
    if sup_norm(tau, grid) > 1.0:
        raise DeformationRangeError("tube estimates need ||tau||_inf <= 1")
    points = grid.points()
    moved = domain.contains(points) != domain.contains(points - tau(points))
    return float(np.count_nonzero(moved) * grid.cell_volume)


def lemma1_constant(d: int) -> float:
    """``D = (vol(B_1) + 2^d * int <u>^{-2d} du) ** 0.5`` with the integral by quadrature.

    The radial integral ``|S^{d-1}| int_0^inf r^{d-1} (1 + r^2)^{-d} dr`` is
    evaluated with adaptive quadrature over ``[0, inf)``.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    ball = math.pi ** (d / 2) / special.gamma(d / 2 + 1)
    sphere = 2 * math.pi ** (d / 2) / special.gamma(d / 2)
    radial, _ = integrate.quad(lambda r: r ** (d - 1) * (1 + r * r) ** (-d), 0, np.inf,
                               epsabs=0.0, epsrel=1e-12, limit=200)
    return float(np.sqrt(ball + 2**d * sphere * radial))


def deform_cartoon(spec: CartoonSpec, tau: DeformationField, grid: Grid) -> Signal:
    """``F_tau f`` for a cartoon sampled exactly (no interpolation)."""
    return warp_function(spec, tau, grid)

