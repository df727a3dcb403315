"""Filter banks (atom collections) and their Bessel bounds.

Atoms are designed as transfer functions on the DFT frequency grid and stored
as spatial :class:`~scatstab.signals.Signal` objects whose
:func:`~scatstab.signals.fourier_multiplier` reproduces the design. On a
periodic grid the Bessel bound ``max_k sum_atoms |g_hat(k)|**2`` is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .signals import Grid, Signal, delta, fourier_multiplier, save_signal

__all__ = [
    "FilterBank",
    "ADMISSIBILITY_TOL",
    "bessel_bound",
    "admissibility_factor",
    "normalize_bank",
    "scale_bank",
    "identity_bank",
    "make_gabor_bank",
    "make_wavelet_bank",
    "make_random_bank",
    "export_bank",
]

# Relative slack when comparing a Bessel bound against 1.
ADMISSIBILITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Propagation atoms ``g_lambda`` plus the output-generating atom ``chi``.

    ``atoms`` is a tuple of ``(label, Signal)`` pairs with integer labels.
    ``scale`` is the cumulative amplitude factor applied by normalization.
    """

    grid: Grid
    atoms: tuple
    output_atom: Signal
    scale: float = 1.0
    kind: str = "custom"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        atoms = tuple((lab, g) for lab, g in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        labels = [lab for lab, _ in atoms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate atom labels: {labels}")
        for lab, g in atoms:
            if g.grid != self.grid:
                raise ValueError(f"atom {lab!r} lives on {g.grid}, bank grid is {self.grid}")
            if g is self.output_atom:
                raise ValueError("the output atom must be distinct from propagation atoms")
        if self.output_atom.grid != self.grid:
            raise ValueError("output atom grid does not match the bank grid")
        for _, g in atoms + (("chi", self.output_atom),):
            if not np.all(np.isfinite(g.samples)):
                raise ValueError("atoms must have finite samples")

    @classmethod
    def from_signals(cls, output_atom: Signal, propagation, **kwargs) -> "FilterBank":
        """Bank with propagation atoms labelled ``0, 1, ...`` in the given order."""
        atoms = tuple(enumerate(propagation))
        return cls(output_atom.grid, atoms, output_atom, **kwargs)

    @classmethod
    def from_transfer(cls, grid: Grid, output_hat, propagation_hat, **kwargs) -> "FilterBank":
        """Bank from transfer functions sampled on ``grid.frequencies()``."""
        to_signal = lambda h: Signal(grid, sfft.fftshift(sfft.ifftn(h)) / grid.cell_volume)
        return cls.from_signals(
            to_signal(output_hat), [to_signal(h) for h in propagation_hat], **kwargs
        )

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.atoms)

    def __len__(self) -> int:
        return len(self.atoms) + 1

    def atom(self, label) -> Signal:
        for lab, g in self.atoms:
            if lab == label:
                return g
        raise KeyError(f"unknown atom label {label!r}")

    @property
    def is_identity(self) -> bool:
        """Exact discrete Dirac output atom and no propagation atoms."""
        return self.kind == "identity" and self.scale == 1.0 and not self.atoms

    @cached_property
    def transfer(self) -> dict:
        """Transfer function for each propagation label."""
        return {lab: fourier_multiplier(g) for lab, g in self.atoms}

    @cached_property
    def output_transfer(self) -> np.ndarray:
        return fourier_multiplier(self.output_atom)

    def spectral_energy(self) -> np.ndarray:
        """``sum over all atoms (chi included) of |g_hat|**2`` per DFT bin."""
        total = np.abs(self.output_transfer) ** 2
        for h in self.transfer.values():
            total = total + np.abs(h) ** 2
        return total


def bessel_bound(bank: FilterBank) -> float:
    """Smallest ``B`` with ``sum_lambda ||f * g_lambda||**2 <= B ||f||**2`` on the grid."""
    if len(bank) == 0:
        raise ValueError("empty filter bank")
    return float(bank.spectral_energy().max())


def scale_bank(bank: FilterBank, factor: float) -> FilterBank:
    if factor == 1.0:
        return bank
    atoms = tuple((lab, g * factor) for lab, g in bank.atoms)
    return FilterBank(
        bank.grid, atoms, bank.output_atom * factor,
        scale=bank.scale * factor, kind=bank.kind, info=dict(bank.info),
    )


def admissibility_factor(bank: FilterBank, lipschitz: float) -> float:
    """Amplitude factor ``c <= 1`` making ``B * max(1, L**2) <= 1``."""
    budget = bessel_bound(bank) * max(1.0, lipschitz**2)
    if budget <= 1.0 + ADMISSIBILITY_TOL:
        return 1.0
    return 1.0 / np.sqrt(budget)


def normalize_bank(bank: FilterBank, lipschitz: float = 1.0) -> FilterBank:
    """Scale every atom so the weak admissibility condition holds.

    Banks that already satisfy it are returned unchanged; the applied factor
    is ``result.scale / bank.scale``.
    """
    if not lipschitz > 0:
        raise ValueError(f"Lipschitz constant must be positive, got {lipschitz}")
    return scale_bank(bank, admissibility_factor(bank, lipschitz))


# ----------------------------------------------------------------- builders


def _gaussian(freqs: np.ndarray, center, width: float, period: float) -> np.ndarray:
    """Gaussian bump in frequency at ``center``, wrapped onto one DFT period."""
    offset = freqs - np.asarray(center, dtype=float)
    offset = (offset + period / 2) % period - period / 2
    return np.exp(-np.sum(offset**2, axis=-1) / (2 * width**2))


def identity_bank(grid: Grid) -> FilterBank:
    """Only the output atom, a discrete Dirac: features equal the input."""
    return FilterBank(grid, (), delta(grid), kind="identity")


def make_gabor_bank(grid: Grid, center_frequencies, width: float) -> FilterBank:
    """Weyl-Heisenberg bank of Gaussian windows modulated to the given centers.

    ``center_frequencies`` are in cycles per unit length (scalars for 1-d,
    pairs for 2-d). The center closest to zero frequency becomes ``chi``.
    """
    centers = np.asarray(center_frequencies, dtype=float).reshape(-1, grid.dim)
    if len(centers) == 0:
        raise ValueError("need at least one center frequency")
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    freqs, period = grid.frequencies(), 1.0 / grid.spacing
    order = np.argsort(np.linalg.norm(centers, axis=1), kind="stable")
    chi, rest = centers[order[0]], [centers[i] for i in sorted(order[1:])]
    return FilterBank.from_transfer(
        grid,
        _gaussian(freqs, chi, width, period),
        [_gaussian(freqs, c, width, period) for c in rest],
        kind="gabor",
        info={"centers": [c.tolist() for c in rest], "chi_center": chi.tolist(), "width": width},
    )


def make_wavelet_bank(
    grid: Grid,
    num_scales: int,
    mother: str = "morlet",
    orientations: int | None = None,
    xi_max: float = 0.35,
    sigma_max: float = 0.12,
) -> FilterBank:
    """Dyadic wavelet bank with a Gaussian low-pass ``chi``.

    Parameters
    ----------
    grid : Grid
    num_scales : int
        Number of dyadic scales ``J``.
    mother : {"morlet", "dog"}
        Morlet: Gaussian at ``xi_max * 2**-j`` along each orientation, minus a
        multiple of the centered Gaussian so that ``psi_hat(0) = 0``.
        Difference of Gaussians: ``G(sigma_j) - G(sigma_j / 2)`` (isotropic).
    orientations : int, optional
        Morlet only. Defaults to 1 in 1-d and 4 in 2-d (angles in ``[0, pi)``).
    xi_max, sigma_max : float
        Finest center frequency and bandwidth in cycles per sample.

    Returns
    -------
    FilterBank
        ``J * orientations`` band-pass atoms labelled scale-major, plus ``chi``.
    """
    if num_scales < 1:
        raise ValueError(f"num_scales must be >= 1, got {num_scales}")
    freqs, period = grid.frequencies(), 1.0 / grid.spacing
    xi0, sigma0 = xi_max / grid.spacing, sigma_max / grid.spacing
    if not (xi0 > 0 and sigma0 > 0):
        raise ValueError("xi_max and sigma_max must be positive")
    atoms, info = [], []
    if mother == "morlet":
        if orientations is None:
            orientations = 1 if grid.dim == 1 else 4
        if orientations < 1:
            raise ValueError(f"orientations must be >= 1, got {orientations}")
        if grid.dim == 1 and orientations > 2:
            raise ValueError("1-d Morlet banks support 1 or 2 orientations")
        for j in range(num_scales):
            xi, sigma = xi0 * 2.0**-j, sigma0 * 2.0**-j
            low = _gaussian(freqs, np.zeros(grid.dim), sigma, period)
            for k in range(orientations):
                if grid.dim == 1:
                    direction = np.array([1.0 if k == 0 else -1.0])
                else:
                    theta = np.pi * k / orientations
                    direction = np.array([np.cos(theta), np.sin(theta)])
                gabor = _gaussian(freqs, xi * direction, sigma, period)
                kappa = gabor.flat[0] / low.flat[0]
                atoms.append(gabor - kappa * low)
                info.append((j, k))
        sigma_chi = 0.5 * xi0 * 2.0 ** -(num_scales - 1)
    elif mother in ("dog", "difference-of-gaussians"):
        mother = "dog"
        for j in range(num_scales):
            sigma = sigma0 * 2.0**-j
            zero = np.zeros(grid.dim)
            outer = _gaussian(freqs, zero, sigma, period)
            atoms.append(outer - _gaussian(freqs, zero, sigma / 2, period))
            info.append((j, 0))
        sigma_chi = sigma0 * 2.0**-num_scales
    else:
        raise ValueError(f"unknown mother wavelet {mother!r}")
    chi = _gaussian(freqs, np.zeros(grid.dim), sigma_chi, period)
    return FilterBank.from_transfer(
        grid, chi, atoms, kind=f"wavelet-{mother}",
        info={"scale_orientation": info, "num_scales": num_scales},
    )


def make_random_bank(grid: Grid, count: int, seed: int, smoothness: float) -> FilterBank:
    """Unstructured random filters: smoothed white noise under a Gaussian envelope.

    ``smoothness`` is the spatial correlation length (physical units); the
    envelope has width ``4 * smoothness``. Atoms are real with unit L2 norm.
    The atom with the lowest spectral centroid becomes ``chi``.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not smoothness > 0:
        raise ValueError(f"smoothness must be positive, got {smoothness}")
    rng = np.random.default_rng(seed)
    points = grid.points()
    freqs = grid.frequencies()
    envelope = np.exp(-np.sum(points**2, axis=-1) / (2 * (4 * smoothness) ** 2))
    smoother = np.exp(-2 * np.pi**2 * smoothness**2 * np.sum(freqs**2, axis=-1))
    radius = np.linalg.norm(freqs, axis=-1)
    signals, centroids = [], []
    for _ in range(count):
        noise = rng.standard_normal(grid.shape)
        smooth = sfft.ifftn(sfft.fftn(noise) * smoother).real * envelope
        g = Signal(grid, smooth / np.sqrt(grid.cell_volume * np.sum(smooth**2)))
        power = np.abs(fourier_multiplier(g)) ** 2
        centroids.append(float(np.sum(radius * power) / np.sum(power)))
        signals.append(g)
    chi_index = int(np.argmin(centroids))
    chi = signals.pop(chi_index)
    return FilterBank.from_signals(
        chi, signals, kind="random", info={"seed": seed, "smoothness": smoothness}
    )


def export_bank(bank: FilterBank, directory) -> list[Path]:
    """Write every atom in the ``SCS1`` format; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / "atom_chi.scs"]
    save_signal(bank.output_atom, paths[0])
    for lab, g in bank.atoms:
        paths.append(directory / f"atom_{lab}.scs")
        save_signal(g, paths[-1])
    return paths
