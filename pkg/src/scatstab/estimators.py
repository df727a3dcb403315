"""scikit-learn compatible feature extractor."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .frames import identity_bank, make_gabor_bank, make_random_bank, make_wavelet_bank, normalize_bank
from .network import ModuleSequence, Nonlinearity, check_admissibility, extract_features, format_path
from .network import feature_distance as _feature_distance
from .signals import Grid, Signal

__all__ = ["ScatteringFeatures", "check_signal_array", "check_grid_compatible"]


def check_signal_array(X, dim: int | None = None) -> np.ndarray:
    """Validate a stack of signals: ``(n_samples, n)`` for 1-d, ``(n_samples, h, w)`` for 2-d.

    Extents must be powers of two and values finite. Real input stays real;
    complex input is kept complex.
    """
    if np.iscomplexobj(X):
        # sklearn validation refuses complex dtypes; validate the two parts
        X = np.asarray(X)
        re = check_array(X.real, dtype=np.float64, allow_nd=True)
        im = check_array(X.imag, dtype=np.float64, allow_nd=True)
        X = re + 1j * im
    else:
        X = check_array(X, dtype=np.float64, allow_nd=True)
    if X.ndim not in (2, 3):
        raise ValueError(f"expected a 2-d or 3-d array of signals, got ndim={X.ndim}")
    if dim is not None and X.ndim - 1 != dim:
        raise ValueError(f"expected {dim}-d signals, got {X.ndim - 1}-d")
    for n in X.shape[1:]:
        if n < 2 or n & (n - 1):
            raise ValueError(f"signal extents must be powers of two, got {X.shape[1:]}")
    return X


def check_grid_compatible(X: np.ndarray, grid: Grid) -> None:
    if tuple(X.shape[1:]) != grid.extent:
        raise ValueError(f"signals of shape {X.shape[1:]} do not match fitted extent {grid.extent}")


class ScatteringFeatures(TransformerMixin, BaseEstimator):
    """Deep convolutional feature extractor with weakly admissible filter banks.

    Parameters
    ----------
    bank : {"wavelet", "gabor", "random", "identity"}
    num_scales, mother, orientations : wavelet bank options.
    centers, width : Gabor bank options (cycles per unit length).
    count, smoothness : random bank options.
    nonlinearity : name of the point-wise non-linearity.
    subsampling : sub-sampling factor applied after every layer.
    max_depth : number of propagation layers.
    spacing : sample spacing of the input signals.
    normalize : scale banks so that the network is weakly admissible.
    seed : seed for random banks.
    output : ``"norms"`` gives one L2 norm per path; ``"flat"`` gives all
        feature samples as ``[real, imag]`` weighted by ``sqrt(spacing**d)``,
        so Euclidean distances between rows equal feature-space distances.
    n_jobs : threads used for sibling paths.
    """

    def __init__(self, bank="wavelet", num_scales=2, mother="morlet", orientations=None,
                 centers=(0.0, 0.125, 0.25), width=0.05, count=4, smoothness=2.0,
                 nonlinearity="modulus", subsampling=1, max_depth=2, spacing=1.0,
                 normalize=True, seed=0, output="norms", n_jobs=None):
        self.bank = bank
        self.num_scales = num_scales
        self.mother = mother
        self.orientations = orientations
        self.centers = centers
        self.width = width
        self.count = count
        self.smoothness = smoothness
        self.nonlinearity = nonlinearity
        self.subsampling = subsampling
        self.max_depth = max_depth
        self.spacing = spacing
        self.normalize = normalize
        self.seed = seed
        self.output = output
        self.n_jobs = n_jobs

    def _make_bank(self, grid: Grid, layer: int, lipschitz: float):
        if self.bank == "wavelet":
            bank = make_wavelet_bank(grid, self.num_scales, self.mother, self.orientations)
        elif self.bank == "gabor":
            bank = make_gabor_bank(grid, self.centers, self.width)
        elif self.bank == "random":
            bank = make_random_bank(grid, self.count, self.seed + layer, self.smoothness)
        elif self.bank == "identity":
            bank = identity_bank(grid)
        else:
            raise ValueError(f"unknown bank {self.bank!r}")
        return normalize_bank(bank, lipschitz) if self.normalize else bank

    def fit(self, X, y=None):
        if self.output not in ("norms", "flat"):
            raise ValueError(f"output must be 'norms' or 'flat', got {self.output!r}")
        if self.bank == "identity" and self.max_depth:
            raise ValueError("the identity bank has no propagation atoms; use max_depth=0")
        X = check_signal_array(X)
        nonlinearity = Nonlinearity(self.nonlinearity)
        grid = Grid(X.ndim - 1, X.shape[1:], float(self.spacing))
        seq = ModuleSequence.build(
            grid, self.max_depth, lambda g, n: self._make_bank(g, n, nonlinearity.lipschitz),
            nonlinearity, self.subsampling,
        )
        check_admissibility(seq)
        self.sequence_ = seq
        self.grid_ = grid
        self.n_features_in_ = int(np.prod(X.shape[1:]))
        probe = extract_features(seq, Signal.zeros(grid))
        self.paths_ = [(n, q) for n, q, _ in probe.items()]
        self._sizes = [g.grid.size for _, _, g in probe.items()]
        return self

    def _features(self, row: np.ndarray):
        return extract_features(self.sequence_, Signal(self.grid_, row), n_jobs=self.n_jobs)

    def transform(self, X):
        check_is_fitted(self, "sequence_")
        X = check_signal_array(X, self.grid_.dim)
        check_grid_compatible(X, self.grid_)
        rows = []
        weight = np.sqrt(self.grid_.cell_volume)
        for row in X:
            feats = self._features(row)
            if self.output == "norms":
                rows.append(feats.norms_vector())
            else:
                v = feats.to_vector() * weight
                rows.append(np.concatenate([v.real, v.imag]))
        return np.vstack(rows)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "sequence_")
        names = [f"layer{n}:{format_path(q)}" for n, q in self.paths_]
        if self.output == "norms":
            return np.asarray(names, dtype=object)
        out = []
        for part in ("re", "im"):
            for name, size in zip(names, self._sizes):
                out.extend(f"{name}[{i}].{part}" for i in range(size))
        return np.asarray(out, dtype=object)

    def feature_distance(self, a, b) -> float:
        """Feature-space distance between two single signals."""
        check_is_fitted(self, "sequence_")
        return _feature_distance(self._features(np.asarray(a)), self._features(np.asarray(b)))
