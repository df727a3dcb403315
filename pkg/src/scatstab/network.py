"""Layer operators, path propagation and the feature extractor.

A :class:`ModuleSequence` of depth ``N`` holds modules ``0..N``. Module ``n``
emits the layer-``n`` features with its output atom ``chi_n`` and propagates
layer-``n`` signals to layer ``n + 1`` with its remaining atoms, so the
module at index ``N`` only contributes ``chi_N``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .frames import ADMISSIBILITY_TOL, FilterBank, bessel_bound
from .signals import Grid, Signal, l2_norm, subsample

__all__ = [
    "AdmissibilityError",
    "Nonlinearity",
    "LIPSCHITZ",
    "Module",
    "ModuleSequence",
    "FeatureCollection",
    "propagate_one",
    "extract_features",
    "feature_distance",
    "contractivity_ratio",
    "check_admissibility",
    "format_path",
]

LIPSCHITZ = {
    "modulus": 1.0,
    "relu": 1.0,
    "tanh": 1.0,
    "sigmoid": 0.25,
    "identity": 1.0,
}
_ALIASES = {"shifted-logistic-sigmoid": "sigmoid", "abs": "modulus"}


class AdmissibilityError(ValueError):
    """A module violates ``bessel_bound * max(1, L**2) <= 1``."""

    def __init__(self, layer: int, budget: float):
        self.layer = layer
        self.budget = budget
        super().__init__(
            f"module {layer} is not weakly admissible: "
            f"bessel_bound * max(1, L^2) = {budget:.6g} > 1"
        )


def _sigmoid0(x):
    # logistic sigmoid shifted so that 0 maps to 0, written to avoid overflow
    return 0.5 * np.tanh(0.5 * x)


@dataclass(frozen=True)
class Nonlinearity:
    """Pointwise non-linearity with ``M(0) = 0``.

    Real-valued maps (ReLU, tanh, shifted sigmoid) act on real and imaginary
    parts separately, which keeps the scalar Lipschitz constant.
    """

    kind: str = "modulus"

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in LIPSCHITZ:
            raise ValueError(f"unknown non-linearity {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def lipschitz(self) -> float:
        return LIPSCHITZ[self.kind]

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        if self.kind == "modulus":
            return np.abs(z).astype(np.complex128)
        if self.kind == "identity":
            return z
        func = {"relu": lambda x: np.maximum(x, 0.0), "tanh": np.tanh, "sigmoid": _sigmoid0}[self.kind]
        return func(z.real) + 1j * func(z.imag)


@dataclass(frozen=True)
class Module:
    """One network layer: atoms, non-linearity and sub-sampling factor."""

    bank: FilterBank
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity)
    subsampling: int = 1

    def __post_init__(self):
        if isinstance(self.nonlinearity, str):
            object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        if int(self.subsampling) < 1:
            raise ValueError(f"sub-sampling factor must be >= 1, got {self.subsampling}")
        object.__setattr__(self, "subsampling", int(self.subsampling))

    @property
    def grid(self) -> Grid:
        return self.bank.grid

    @property
    def output_grid(self) -> Grid:
        return self.grid.decimated(self.subsampling)

    @property
    def budget(self) -> float:
        """``bessel_bound * max(1, L**2)``; at most 1 for admissible modules."""
        return bessel_bound(self.bank) * max(1.0, self.nonlinearity.lipschitz**2)

    def _propagate_hat(self, f_hat: np.ndarray, label) -> Signal:
        try:
            transfer = self.bank.transfer[label]
        except KeyError:
            raise KeyError(f"unknown atom label {label!r}") from None
        out = Signal(self.grid, self.nonlinearity(sfft.ifftn(f_hat * transfer)))
        return subsample(out, self.subsampling)

    def _output_hat(self, f: Signal, f_hat: np.ndarray) -> Signal:
        if self.bank.is_identity:
            return f
        return Signal(self.grid, sfft.ifftn(f_hat * self.bank.output_transfer))


@dataclass(frozen=True)
class ModuleSequence:
    """Depth-truncated module-sequence; ``modules[n]`` acts on layer ``n``."""

    modules: tuple
    max_depth: int = 3

    def __post_init__(self):
        modules = tuple(self.modules)
        object.__setattr__(self, "modules", modules)
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if len(modules) < self.max_depth + 1:
            raise ValueError(
                f"depth {self.max_depth} needs {self.max_depth + 1} modules, got {len(modules)}"
            )
        for n in range(self.max_depth):
            if modules[n + 1].grid != modules[n].output_grid:
                raise ValueError(
                    f"module {n + 1} grid {modules[n + 1].grid} does not match "
                    f"module {n} output grid {modules[n].output_grid}"
                )

    @classmethod
    def build(cls, grid: Grid, depth: int, bank_factory, nonlinearity="modulus", subsampling=1):
        """Chain ``depth + 1`` modules, calling ``bank_factory(grid, n)`` per layer."""
        modules = []
        for n in range(depth + 1):
            modules.append(Module(bank_factory(grid, n), nonlinearity, subsampling))
            if n < depth:
                grid = modules[-1].output_grid
        return cls(tuple(modules), depth)

    @property
    def grid(self) -> Grid:
        return self.modules[0].grid

    @property
    def active(self) -> tuple:
        return self.modules[: self.max_depth + 1]

    def truncated(self, depth: int) -> "ModuleSequence":
        if depth > self.max_depth:
            raise ValueError("cannot extend a sequence by truncation")
        return ModuleSequence(self.modules, depth)

    def feature_count(self) -> int:
        total, width = 0, 1
        for n, module in enumerate(self.active):
            total += width
            width *= len(module.bank.atoms)
        return total


def check_admissibility(seq: ModuleSequence) -> None:
    """Raise :class:`AdmissibilityError` naming the first violating module."""
    for n, module in enumerate(seq.active):
        budget = module.budget
        if budget > 1.0 + ADMISSIBILITY_TOL:
            raise AdmissibilityError(n, budget)


def format_path(path: tuple) -> str:
    """``()`` -> ``"e"``, ``(3, 1)`` -> ``"3/1"``."""
    return "/".join(str(lab) for lab in path) if path else "e"


@dataclass(frozen=True, eq=False)
class FeatureCollection:
    """Features ``(U[q] f) * chi_n`` keyed by layer and path.

    ``tail_energy`` bounds the energy of all features deeper than the last
    layer for admissible sequences: ``sum_q ||U[q]f||**2 - ||U[q]f * chi_N||**2``
    over the last layer's paths.
    """

    layers: tuple
    internal: tuple | None = None
    tail_energy: float = 0.0

    def __getitem__(self, path) -> Signal:
        return self.layers[len(path)][tuple(path)]

    def __len__(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def items(self):
        for n, layer in enumerate(self.layers):
            for path in sorted(layer):
                yield n, path, layer[path]

    def energy(self) -> float:
        """Squared feature-space norm."""
        total = 0.0
        for _, _, g in self.items():
            total += g.grid.cell_volume * np.vdot(g.samples, g.samples).real
        return total

    def norm(self) -> float:
        return float(np.sqrt(self.energy()))

    def layer_energies(self) -> list[float]:
        return [
            sum(l2_norm(g) ** 2 for g in layer.values()) for layer in self.layers
        ]

    def to_vector(self) -> np.ndarray:
        """All feature samples concatenated in (layer, sorted path) order."""
        return np.concatenate([g.samples.ravel() for _, _, g in self.items()])

    def norms_vector(self) -> np.ndarray:
        return np.array([l2_norm(g) for _, _, g in self.items()])


def propagate_one(module: Module, f: Signal, label) -> Signal:
    """``U[label] f = R**(d/2) * M(f * g_label)(R x)`` for one module."""
    if f.grid != module.grid:
        raise ValueError(f"signal grid {f.grid} does not match module grid {module.grid}")
    return module._propagate_hat(f.fft(), label)


def _process_node(module: Module, f: Signal, propagate: bool):
    f_hat = None if module.bank.is_identity and not propagate else f.fft()
    feature = module._output_hat(f, f_hat)
    children = {}
    if propagate:
        for label in sorted(module.bank.labels):
            children[label] = module._propagate_hat(f_hat, label)
    return feature, children


def extract_features(
    seq: ModuleSequence, f: Signal, keep_internal: bool = False, n_jobs: int | None = None
) -> FeatureCollection:
    """Compute all features up to ``seq.max_depth``, paths enumerated breadth-first.

    Sibling paths are independent and are evaluated on a thread pool when
    ``n_jobs > 1``; the result does not depend on ``n_jobs``.
    """
    if f.grid != seq.grid:
        raise ValueError(f"signal grid {f.grid} does not match sequence grid {seq.grid}")
    frontier = {(): f}
    layers, internal = [], []
    tail = 0.0
    pool = ThreadPoolExecutor(n_jobs) if n_jobs and n_jobs > 1 else None
    try:
        for n, module in enumerate(seq.active):
            propagate = n < seq.max_depth
            paths = sorted(frontier)
            jobs = [(module, frontier[q], propagate) for q in paths]
            results = pool.map(lambda a: _process_node(*a), jobs) if pool else map(
                lambda a: _process_node(*a), jobs
            )
            layer, nxt = {}, {}
            for q, (feature, children) in zip(paths, results):
                layer[q] = feature
                for label, child in children.items():
                    nxt[q + (label,)] = child
            layers.append(layer)
            if keep_internal:
                internal.append(frontier)
            if not propagate:
                for q in paths:
                    tail += max(0.0, l2_norm(frontier[q]) ** 2 - l2_norm(layer[q]) ** 2)
            frontier = nxt
    finally:
        if pool:
            pool.shutdown()
    return FeatureCollection(tuple(layers), tuple(internal) if keep_internal else None, tail)


def _check_structure(a: FeatureCollection, b: FeatureCollection):
    if len(a.layers) != len(b.layers):
        raise ValueError("feature collections have different depths")
    for n, (la, lb) in enumerate(zip(a.layers, b.layers)):
        if la.keys() != lb.keys():
            raise ValueError(f"feature collections differ in the paths of layer {n}")
        for q in la:
            if la[q].grid != lb[q].grid:
                raise ValueError(f"feature {format_path(q)} lives on different grids")


def feature_distance(a: FeatureCollection, b: FeatureCollection) -> float:
    """``|||a - b|||``: root of the summed squared L2 distances of same-path features."""
    _check_structure(a, b)
    total = 0.0
    for n, q, g in a.items():
        diff = g.samples - b.layers[n][q].samples
        total += g.grid.cell_volume * np.vdot(diff, diff).real
    return float(np.sqrt(total))


def contractivity_ratio(seq: ModuleSequence, f: Signal, h: Signal, n_jobs: int | None = None) -> float:
    """``|||Phi(f) - Phi(h)||| / ||f - h||``; at most 1 for admissible sequences."""
    check_admissibility(seq)
    denom = l2_norm(f - h)
    if denom == 0.0:
        raise ValueError("contractivity ratio is undefined for f == h")
    return feature_distance(extract_features(seq, f, n_jobs=n_jobs), extract_features(seq, h, n_jobs=n_jobs)) / denom
