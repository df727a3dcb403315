"""Deformation-stability experiments.

Each experiment evaluates a ladder of deformation amplitudes ``s_k = s0 * 2**-k``
and records, per rung, the input error ``||f - F_tau f||`` and (when a network
is configured) the feature error ``|||Phi(F_tau f) - Phi(f)|||``. Rungs are
independent and may run on a thread pool; results are ordered by rung so the
output does not depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from ..cartoon import CartoonSpec, DomainB, SmoothPart, decay_constant, estimate_size, sample_cartoon
from ..deform import (
    DeformationField,
    apply_deformation,
    geometric_ladder,
    jacobian_sup,
    lemma1_constant,
    sup_norm,
    tube_volume,
    warp_function,
)
from ..frames import identity_bank, make_gabor_bank, make_random_bank, make_wavelet_bank, normalize_bank, scale_bank
from ..network import ModuleSequence, Nonlinearity, check_admissibility, extract_features, feature_distance
from ..signals import Grid, Signal, l2_norm, read_pgm
from .config import (
    ChecksConfig,
    ConfigError,
    DeformationConfig,
    ExperimentConfig,
    GridConfig,
    NetworkConfig,
    SignalConfig,
)

__all__ = [
    "ExponentFit",
    "DegenerateFitError",
    "Rung",
    "Check",
    "ExperimentResult",
    "fit_decay_exponent",
    "build_sequence",
    "build_source",
    "make_field",
    "deformation_error_curve",
    "feature_stability_curve",
    "cartoon_stability_constant",
    "sharpness_report",
    "counterexample_report",
    "smooth_class_report",
    "bandlimited_comparison",
    "stability_report",
    "run_experiment",
    "default_config",
]


# ------------------------------------------------------------------ fitting


class DegenerateFitError(ValueError):
    """Too few rungs or non-positive errors for a log-log fit."""


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares line ``log(error) = alpha * log(tau) + log_constant``."""

    pairs: tuple
    alpha: float
    log_constant: float
    residual: float

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)


def fit_decay_exponent(taus, errors) -> ExponentFit:
    """Fit the Lipschitz exponent from ``(||tau||, error)`` pairs.

    ``residual`` is the root-mean-square log residual.
    """
    taus = np.asarray(taus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(taus) < 4:
        raise DegenerateFitError(f"need at least 4 rungs, got {len(taus)}")
    if np.any(errors <= 0) or np.any(taus <= 0):
        raise DegenerateFitError("all amplitudes and errors must be positive")
    lx, ly = np.log(taus), np.log(errors)
    design = np.stack([lx, np.ones_like(lx)], axis=1)
    (alpha, logc), *_ = np.linalg.lstsq(design, ly, rcond=None)
    res = ly - (alpha * lx + logc)
    return ExponentFit(tuple(zip(taus.tolist(), errors.tolist())), float(alpha), float(logc),
                       float(np.sqrt(np.mean(res**2))))


# ------------------------------------------------------------ result types


@dataclass
class Rung:
    index: int
    amplitude: float
    tau_sup: float
    jacobian_sup: float
    input_error: float
    feature_error: float | None = None
    bound: float | None = None
    hypotheses: str = ""


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass
class ExperimentResult:
    name: str
    rungs: list
    input_fit: ExponentFit | None = None
    feature_fit: ExponentFit | None = None
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows(self) -> list[dict]:
        fit_in, fit_ft = self.input_fit, self.feature_fit
        out = []
        for r in self.rungs:
            out.append({
                "rung": r.index,
                "tau_sup": r.tau_sup,
                "jacobian_sup": r.jacobian_sup,
                "input_error": r.input_error,
                "feature_error": r.feature_error,
                "bound": r.bound,
                "alpha_input": fit_in.alpha if fit_in else None,
                "alpha_feature": fit_ft.alpha if fit_ft else None,
                "log_constant_feature": fit_ft.log_constant if fit_ft else None,
                "residual_feature": fit_ft.residual if fit_ft else None,
            })
        return out


# --------------------------------------------------------- signal sources


class _Source:
    """A signal family: sampling and exact (or interpolated) warping."""

    cartoon: CartoonSpec | None = None
    smooth: SmoothPart | None = None

    def sample(self, grid: Grid, amplitude: float) -> Signal:
        raise NotImplementedError

    def warp(self, tau: DeformationField, grid: Grid, amplitude: float) -> Signal:
        raise NotImplementedError

    depends_on_amplitude = False


class _AnalyticSource(_Source):
    def __init__(self, func, interp: str):
        self.func, self.interp = func, interp

    def sample(self, grid, amplitude):
        return Signal(grid, self.func(grid.points()))

    def warp(self, tau, grid, amplitude):
        if self.interp == "exact":
            return warp_function(self.func, tau, grid)
        return apply_deformation(self.sample(grid, amplitude), tau, self.interp, allow_large=True)


class _CartoonSource(_AnalyticSource):
    def __init__(self, spec: CartoonSpec, interp: str):
        super().__init__(spec, interp)
        self.cartoon = spec

    def sample(self, grid, amplitude):
        return sample_cartoon(self.cartoon, grid)


class _SmoothSource(_AnalyticSource):
    def __init__(self, part: SmoothPart, interp: str):
        super().__init__(part, interp)
        self.smooth = part


class _ConcentratedSource(_Source):
    """Unit-energy indicators of ``[-s/2, s/2)`` for the rung amplitude ``s``."""

    depends_on_amplitude = True

    def __init__(self, interp: str):
        self.interp = interp

    def _func(self, s):
        def func(points):
            x = points[..., 0]
            return ((x >= -s / 2) & (x < s / 2)) / math.sqrt(s) + 0j
        return func

    def sample(self, grid, amplitude):
        return Signal(grid, self._func(amplitude)(grid.points()))

    def warp(self, tau, grid, amplitude):
        if self.interp == "exact":
            return warp_function(self._func(amplitude), tau, grid)
        return apply_deformation(self.sample(grid, amplitude), tau, self.interp, allow_large=True)


def _smooth_bump(r):
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def bandlimited_signal(grid: Grid, bandwidth: float) -> Signal:
    """Unit-norm ``R^{d/2} phi(R x)`` with spectrum ``bump(|xi| / R)``, ``R = bandwidth``.

    The spectrum is a ``C^inf`` bump supported in ``|xi| < R`` (cycles per
    unit length), so the signal is exactly ``R``-band-limited on the grid.
    """
    if not 0 < bandwidth <= grid.nyquist / 2:
        raise ConfigError(
            f"bandwidth {bandwidth} violates the Nyquist guard (0, {grid.nyquist / 2}]"
        )
    xi = np.linalg.norm(grid.frequencies(), axis=-1)
    spectrum = _smooth_bump(xi / bandwidth)
    samples = sfft.fftshift(sfft.ifftn(spectrum)) / grid.cell_volume
    f = Signal(grid, samples)
    return f * (1.0 / l2_norm(f))


class _BandlimitedSource(_Source):
    def __init__(self, bandwidth: float, interp: str):
        self.bandwidth, self.interp = bandwidth, interp
        self._cache = {}

    def sample(self, grid, amplitude):
        if grid not in self._cache:
            self._cache[grid] = bandlimited_signal(grid, self.bandwidth)
        return self._cache[grid]

    def warp(self, tau, grid, amplitude):
        interp = self.interp
        if interp == "exact":
            interp = "fourier" if tau.kind == "translation" else "cubic"
        return apply_deformation(self.sample(grid, amplitude), tau, interp, allow_large=True)


class _GriddedSource(_Source):
    def __init__(self, signal: Signal, interp: str):
        self.signal = signal
        self.interp = "linear" if interp == "exact" else interp

    def sample(self, grid, amplitude):
        if grid != self.signal.grid:
            raise ConfigError(f"input signal lives on {self.signal.grid}, config grid is {grid}")
        return self.signal

    def warp(self, tau, grid, amplitude):
        return apply_deformation(self.sample(grid, amplitude), tau, self.interp, allow_large=True)


def _smooth_part(spec: dict, dim: int) -> SmoothPart:
    spec = dict(spec)
    kind = spec.pop("kind", "gaussian")
    center = spec.pop("center", 0.0)
    try:
        if kind == "zero":
            part = SmoothPart.zero()
        elif kind == "constant":
            part = SmoothPart.constant(spec.pop("value", 1.0))
        elif kind == "gaussian":
            part = SmoothPart.gaussian(spec.pop("amplitude", 1.0), center, spec.pop("width", 1.0))
        elif kind == "bump":
            part = SmoothPart.bump(spec.pop("amplitude", 1.0), center, spec.pop("radius", 1.0),
                                   spec.pop("power", 3))
        elif kind == "gaussian-mixture":
            comps = [(c.get("amplitude", 1.0), c.get("center", 0.0), c.get("width", 1.0))
                     for c in spec.pop("components")]
            part = SmoothPart.mixture(comps)
        else:
            raise ConfigError(f"unknown smooth part kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad smooth part: {exc}") from None
    if spec:
        raise ConfigError(f"unknown smooth part keys {sorted(spec)}")
    return part


def _domain(spec: dict) -> DomainB:
    spec = dict(spec)
    kind = spec.pop("kind", "interval")
    try:
        if kind == "interval":
            dom = DomainB.interval(spec.pop("a", -1.0), spec.pop("b", 1.0))
        elif kind == "disc":
            dom = DomainB.disc(spec.pop("radius", 1.0), spec.pop("center", (0.0, 0.0)))
        elif kind == "ellipse":
            dom = DomainB.ellipse(spec.pop("a"), spec.pop("b"), spec.pop("center", (0.0, 0.0)),
                                  spec.pop("angle", 0.0))
        elif kind == "star":
            dom = DomainB.star(spec.pop("r0"), [tuple(h) for h in spec.pop("harmonics", [])],
                               spec.pop("center", (0.0, 0.0)))
        else:
            raise ConfigError(f"unknown domain kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain: {exc}") from None
    if spec:
        raise ConfigError(f"unknown domain keys {sorted(spec)}")
    return dom


def build_source(sig: SignalConfig, dim: int, interp: str) -> _Source:
    if interp not in ("exact", "linear", "cubic", "nearest", "fourier"):
        raise ConfigError(f"unknown interpolation {interp!r}")
    if sig.kind == "cartoon":
        spec = CartoonSpec(_smooth_part(sig.f1, dim), _smooth_part(sig.f2, dim), _domain(sig.domain))
        if spec.dim != dim:
            raise ConfigError(f"{spec.dim}-d domain on a {dim}-d grid")
        return _CartoonSource(spec, interp)
    if sig.kind == "smooth":
        return _SmoothSource(_smooth_part(sig.part, dim), interp)
    if sig.kind == "concentrated":
        if dim != 1:
            raise ConfigError("the concentrated-indicator family is 1-d")
        return _ConcentratedSource(interp)
    if sig.kind == "bandlimited":
        return _BandlimitedSource(sig.bandwidth, interp)
    if sig.kind == "pgm":
        try:
            return _GriddedSource(read_pgm(sig.path), interp)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read PGM input: {exc}") from None
    raise ConfigError(f"unknown signal kind {sig.kind!r}")


# -------------------------------------------------------------- networks


def build_sequence(net: NetworkConfig, grid: Grid, seed: int = 0) -> ModuleSequence:
    """Module-sequence described by ``net``, normalized to weak admissibility if asked."""
    try:
        nonlinearity = Nonlinearity(net.nonlinearity)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    def factory(g: Grid, n: int):
        if net.kind == "identity":
            bank = identity_bank(g)
        elif net.kind == "wavelet":
            bank = make_wavelet_bank(g, net.num_scales, net.mother, net.orientations or None)
        elif net.kind == "gabor":
            bank = make_gabor_bank(g, net.centers, net.width)
        elif net.kind == "random":
            bank = make_random_bank(g, net.count, seed + n, net.smoothness)
        else:
            raise ConfigError(f"unknown network kind {net.kind!r}")
        if net.normalize:
            bank = normalize_bank(bank, nonlinearity.lipschitz)
        return scale_bank(bank, net.scale)

    try:
        return ModuleSequence.build(grid, net.depth, factory, nonlinearity, net.subsampling)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"network: {exc}") from None


# ----------------------------------------------------------------- fields


def make_field(dcfg: DeformationConfig, grid: Grid, amplitude: float, seed: int) -> DeformationField:
    dim = grid.dim
    try:
        if dcfg.kind == "translation":
            direction = np.asarray(dcfg.direction or np.eye(dim)[0], dtype=float)
            if direction.shape != (dim,):
                raise ValueError("direction must have one entry per axis")
            return DeformationField.translation(amplitude * direction / np.linalg.norm(direction))
        if dcfg.kind == "gaussian-bump":
            return DeformationField.gaussian_bump(amplitude, dim, dcfg.width, tuple(dcfg.direction))
        if dcfg.kind == "smooth-random":
            return DeformationField.smooth_random(amplitude, dim, seed, grid.lengths[0], dcfg.modes)
    except ValueError as exc:
        raise ConfigError(f"deformation: {exc}") from None
    raise ConfigError(f"unknown deformation kind {dcfg.kind!r}")


def _hypotheses(tau_sup: float, jac: float, dim: int) -> str:
    tags = []
    if tau_sup < 0.5:
        tags.append("sup-bound")
        if jac <= 1.0 / (2 * dim):
            tags.append("jacobian-bound")
    return "+".join(tags) or "none"


# ----------------------------------------------------------------- curves


def _grid(cfg: ExperimentConfig, grid: Grid | None) -> Grid:
    return grid if grid is not None else cfg.grid.build()


def _rung_fields(cfg: ExperimentConfig, grid: Grid, need_jacobian_bound: bool):
    dcfg = cfg.deformation
    out = []
    for k, s in enumerate(geometric_ladder(dcfg.s0, dcfg.rungs)):
        tau = make_field(dcfg, grid, float(s), cfg.seed)
        t_sup = sup_norm(tau, grid)
        jac = jacobian_sup(tau, grid, dcfg.jacobian_norm)
        if not dcfg.counterexample:
            if t_sup >= 0.5:
                raise ConfigError(
                    f"rung {k}: ||tau||_inf = {t_sup:.4g} >= 1/2; set counterexample = true"
                )
            if need_jacobian_bound and jac > 1.0 / (2 * grid.dim):
                raise ConfigError(
                    f"rung {k}: ||D tau||_inf = {jac:.4g} > 1/(2d); set counterexample = true"
                )
        out.append((k, float(s), tau, t_sup, jac))
    return out


def _run_rungs(cfg, grid, source, seq=None):
    fields_ = _rung_fields(cfg, grid, need_jacobian_bound=seq is not None)
    base = source.sample(grid, fields_[0][1])
    base_features = None
    if seq is not None and not source.depends_on_amplitude:
        base_features = extract_features(seq, base)

    def one(item):
        k, s, tau, t_sup, jac = item
        f = source.sample(grid, s) if source.depends_on_amplitude else base
        warped = source.warp(tau, grid, s)
        rung = Rung(k, s, t_sup, jac, l2_norm(f - warped), hypotheses=_hypotheses(t_sup, jac, grid.dim))
        if seq is not None:
            phi_f = base_features if base_features is not None else extract_features(seq, f)
            rung.feature_error = feature_distance(extract_features(seq, warped), phi_f)
        return rung

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            rungs = list(pool.map(one, fields_))
    else:
        rungs = [one(item) for item in fields_]
    return rungs


def deformation_error_curve(cfg: ExperimentConfig, grid: Grid | None = None) -> list[Rung]:
    """``(||tau_k||, ||f - F_tau_k f||)`` for every ladder rung."""
    grid = _grid(cfg, grid)
    source = build_source(cfg.signal, grid.dim, cfg.deformation.interp)
    return _run_rungs(cfg, grid, source)


def feature_stability_curve(cfg: ExperimentConfig, grid: Grid | None = None) -> list[Rung]:
    """Input and feature errors per rung; refuses inadmissible sequences."""
    grid = _grid(cfg, grid)
    source = build_source(cfg.signal, grid.dim, cfg.deformation.interp)
    seq = build_sequence(cfg.network, grid, cfg.seed)
    check_admissibility(seq)
    return _run_rungs(cfg, grid, source, seq)


def _fit(rungs, attr):
    values = [getattr(r, attr) for r in rungs]
    if any(v is None for v in values):
        return None
    try:
        return fit_decay_exponent([r.tau_sup for r in rungs], values)
    except DegenerateFitError:
        return None


def _window(name, value, window):
    lo, hi = window
    ok = (lo is None or value >= lo) and (hi is None or value <= hi)
    lo_s = "-inf" if lo is None else f"{lo:g}"
    hi_s = "inf" if hi is None else f"{hi:g}"
    return Check(name, bool(ok), f"{value:.6g} in [{lo_s}, {hi_s}]")


def _contractivity_check(rungs, slack):
    worst = max((r.feature_error / r.input_error if r.input_error > 0 else
                 (0.0 if r.feature_error == 0 else math.inf)) for r in rungs)
    ok = all(r.feature_error <= r.input_error * (1 + slack) for r in rungs)
    return Check("contractivity", ok, f"max feature/input ratio {worst:.12g} <= 1 + {slack:g}")


def _base_result(name, rungs) -> ExperimentResult:
    return ExperimentResult(name, rungs, _fit(rungs, "input_error"), _fit(rungs, "feature_error"))


# ------------------------------------------------------------ experiments


def cartoon_stability_constant(spec: CartoonSpec, grid: Grid, taus) -> dict:
    """Measured ingredients of the cartoon stability constant.

    ``C_K = 2 * max(2 K D, K * C_tube**0.5)`` with ``K`` from
    :func:`estimate_size`, ``D`` from :func:`lemma1_constant` and ``C_tube`` the
    largest measured ``vol(S) / ||tau||`` over the given fields.
    """
    K = estimate_size(spec, grid).K
    D = lemma1_constant(grid.dim)
    ratios = [tube_volume(spec.domain, tau, grid) / sup_norm(tau, grid) for tau in taus
              if sup_norm(tau, grid) > 0]
    c_tube = max(ratios) if ratios else 0.0
    return {"K": K, "D": D, "C_tube": c_tube, "C_K": 2 * max(2 * K * D, K * math.sqrt(c_tube))}


def _decoupling_check(spec: CartoonSpec, grid: Grid, fields_, rungs) -> Check:
    """Input error vs the sum of separately measured component errors."""
    f1 = Signal(grid, spec.f1(grid.points()))
    f2 = Signal(grid, spec.f2(grid.points()))
    ind = Signal(grid, spec.domain.contains(grid.points()).astype(float))
    f2_sup = spec.f2.sup_abs(grid)
    worst, ok = 0.0, True
    for (k, s, tau, *_), r in zip(fields_, rungs):
        term1 = l2_norm(f1 - warp_function(spec.f1, tau, grid))
        term2 = l2_norm(f2 - warp_function(spec.f2, tau, grid))
        term3 = l2_norm(ind - warp_function(lambda p: spec.domain.contains(p) + 0j, tau, grid))
        total = term1 + term2 + term3 * f2_sup
        ok &= r.input_error <= total * (1 + 1e-12)
        worst = max(worst, r.input_error / total if total > 0 else 0.0)
    return Check("decoupling", bool(ok), f"max input / (sum of component terms) = {worst:.6g} <= 1")


def _rung_tolerance_check(name, rungs, expected, tol):
    worst = 0.0
    for r in rungs:
        target = expected(r)
        worst = max(worst, abs(r.input_error / target - 1))
    return Check(name, worst <= tol, f"max relative deviation {worst:.4g} <= {tol:g}")


def stability_report(cfg: ExperimentConfig, grid: Grid | None = None) -> ExperimentResult:
    """Cartoon (or generic) input through an admissible network."""
    grid = _grid(cfg, grid)
    source = build_source(cfg.signal, grid.dim, cfg.deformation.interp)
    seq = build_sequence(cfg.network, grid, cfg.seed)
    check_admissibility(seq)
    rungs = _run_rungs(cfg, grid, source, seq)
    result = _base_result("stability", rungs)
    result.checks.append(_contractivity_check(rungs, cfg.checks.contractivity_slack))
    if source.cartoon is not None:
        fields_ = _rung_fields(cfg, grid, need_jacobian_bound=True)
        const = cartoon_stability_constant(source.cartoon, grid, [f[2] for f in fields_])
        for r in rungs:
            r.bound = const["C_K"] * math.sqrt(r.tau_sup)
        ok = all(r.feature_error <= r.bound for r in rungs)
        worst = max(r.feature_error / r.bound for r in rungs)
        result.checks.append(Check(
            "cartoon stability bound", ok,
            f"max feature_error / (C_K ||tau||^1/2) = {worst:.4g} <= 1 with "
            f"C_K={const['C_K']:.6g} (K={const['K']:.6g}, D={const['D']:.6g}, "
            f"C_tube={const['C_tube']:.6g})",
        ))
        result.checks.append(_decoupling_check(source.cartoon, grid, fields_, rungs))
        result.tables["constants"] = (("name", "value"), [{"name": k, "value": v} for k, v in const.items()])
    window = cfg.checks.alpha or [0.45, None]
    if result.feature_fit is not None:
        result.checks.append(_window("feature exponent", result.feature_fit.alpha, window))
    else:
        result.checks.append(Check("feature exponent", False, "fit is degenerate"))
    return result


def _require_indicator_translation(cfg: ExperimentConfig):
    sig, dcfg = cfg.signal, cfg.deformation
    ok = (sig.kind == "cartoon" and sig.f1.get("kind", "zero") == "zero"
          and sig.f2.get("kind") == "constant" and sig.f2.get("value", 1.0) == 1.0
          and sig.domain.get("kind") == "interval" and dcfg.kind == "translation"
          and cfg.grid.dim == 1)
    if not ok:
        raise ConfigError("the sharpness experiment needs a 1-d interval indicator under translations")


def sharpness_report(cfg: ExperimentConfig | None = None, grid: Grid | None = None) -> ExperimentResult:
    """Indicator of an interval under translations: error ``sqrt(2 s)``."""
    cfg = cfg or default_config("sharpness")
    _require_indicator_translation(cfg)
    rungs = feature_stability_curve(cfg, grid)
    result = _base_result("sharpness", rungs)
    chk = cfg.checks
    result.checks.append(_rung_tolerance_check(
        "sqrt(2s) law", rungs, lambda r: math.sqrt(2 * r.tau_sup), chk.rung_tolerance))
    if result.input_fit is None:
        result.checks.append(Check("input exponent", False, "fit is degenerate"))
    else:
        result.checks.append(_window("input exponent", result.input_fit.alpha, chk.alpha or [0.45, 0.55]))
        result.checks.append(_window("prefactor", result.input_fit.constant, chk.prefactor or [1.34, 1.49]))
    result.checks.append(_contractivity_check(rungs, chk.contractivity_slack))
    return result


def counterexample_report(cfg: ExperimentConfig | None = None, grid: Grid | None = None) -> ExperimentResult:
    """Unit-energy indicators shrinking with the shift: the error stays ``sqrt(2)``."""
    cfg = cfg or default_config("counterexample")
    if cfg.signal.kind != "concentrated" or not cfg.deformation.counterexample:
        raise ConfigError("the counterexample experiment needs signal.kind = 'concentrated' "
                          "and deformation.counterexample = true")
    rungs = feature_stability_curve(cfg, grid)
    result = _base_result("counterexample", rungs)
    chk = cfg.checks
    result.checks.append(_rung_tolerance_check("constant sqrt(2) error", rungs,
                                               lambda r: math.sqrt(2), chk.rung_tolerance))
    if result.input_fit is None:
        result.checks.append(Check("input exponent", False, "fit is degenerate"))
    else:
        result.checks.append(_window("input exponent", result.input_fit.alpha, chk.alpha or [-0.05, 0.05]))
    result.checks.append(_contractivity_check(rungs, chk.contractivity_slack))
    return result


def smooth_class_report(cfg: ExperimentConfig | None = None, grid: Grid | None = None) -> ExperimentResult:
    """Smooth decaying inputs: linear decay of the feature error."""
    cfg = cfg or default_config("smooth")
    grid = _grid(cfg, grid)
    if cfg.signal.kind != "smooth":
        raise ConfigError(
            f"signal kind {cfg.signal.kind!r} is not in the smooth class: it has no "
            "gradient satisfying the decay bound"
        )
    source = build_source(cfg.signal, grid.dim, cfg.deformation.interp)
    C = decay_constant(source.smooth, grid)
    D = lemma1_constant(grid.dim)
    rungs = feature_stability_curve(cfg, grid)
    result = _base_result("smooth", rungs)
    for r in rungs:
        r.bound = C * D * r.tau_sup
    chk = cfg.checks
    slack = 1.05
    worst = max(max(r.input_error, r.feature_error) / r.bound for r in rungs)
    result.checks.append(Check(
        "smooth-part bound", worst <= slack,
        f"max error / (C D ||tau||) = {worst:.4g} <= {slack} with C={C:.6g}, D={D:.6g}"))
    if result.feature_fit is None:
        result.checks.append(Check("feature exponent", False, "fit is degenerate"))
    else:
        result.checks.append(_window("feature exponent", result.feature_fit.alpha, chk.alpha or [0.9, 1.1]))
    result.checks.append(_contractivity_check(rungs, chk.contractivity_slack))
    result.tables["constants"] = (("name", "value"), [{"name": "C", "value": C}, {"name": "D", "value": D}])
    return result


def bandlimited_comparison(cfg: ExperimentConfig | None = None, grid: Grid | None = None) -> ExperimentResult:
    """Band-limited inputs: error growth with the bandwidth at a fixed shift.

    Also runs the amplitude ladder at the configured bandwidth, whose error
    decays linearly, and reports the bandwidth-independent indicator error
    ``sqrt(2 s)`` at the same shift for comparison.
    """
    cfg = cfg or default_config("bandlimited")
    grid = _grid(cfg, grid)
    if cfg.signal.kind != "bandlimited":
        raise ConfigError("the bandlimited experiment needs signal.kind = 'bandlimited'")
    if cfg.deformation.kind != "translation":
        raise ConfigError("the bandlimited experiment uses translations")
    chk = cfg.checks
    bandwidths = [float(b) for b in chk.bandwidths]
    for b in bandwidths + [cfg.signal.bandwidth]:
        if not 0 < b <= grid.nyquist / 2:
            raise ConfigError(f"bandwidth {b} violates the Nyquist guard (0, {grid.nyquist / 2}]")
    rungs = feature_stability_curve(cfg, grid)
    result = _base_result("bandlimited", rungs)
    window = chk.alpha or [0.9, 1.1]
    if result.feature_fit is None:
        result.checks.append(Check("feature exponent", False, "fit is degenerate"))
    else:
        result.checks.append(_window("feature exponent", result.feature_fit.alpha, window))
    result.checks.append(_contractivity_check(rungs, chk.contractivity_slack))

    seq = build_sequence(cfg.network, grid, cfg.seed)
    shift = chk.bandlimited_shift
    tau = make_field(cfg.deformation, grid, shift, cfg.seed)
    rows, previous = [], None
    for b in bandwidths:
        f = bandlimited_signal(grid, b)
        warped = apply_deformation(f, tau, "fourier")
        err_in = l2_norm(f - warped)
        err_ft = feature_distance(extract_features(seq, warped), extract_features(seq, f))
        growth = err_ft / previous if previous else None
        rows.append({
            "bandwidth": b, "tau_sup": shift, "input_error": err_in, "feature_error": err_ft,
            "growth": growth, "normalized": err_ft / (b * shift * l2_norm(f)),
            "cartoon_error": math.sqrt(2 * shift),
        })
        previous = err_ft
    growths = [r["growth"] for r in rows if r["growth"] is not None]
    lo, hi = chk.growth
    for i, g in enumerate(growths):
        result.checks.append(_window(f"growth {bandwidths[i]:g}->{bandwidths[i + 1]:g}", g, (lo, hi)))
    result.tables["bandwidth"] = (
        ("bandwidth", "tau_sup", "input_error", "feature_error", "growth", "normalized", "cartoon_error"),
        rows,
    )
    return result


def _deformation_only(cfg, grid=None) -> ExperimentResult:
    grid = _grid(cfg, grid)
    result = _base_result("deformation", deformation_error_curve(cfg, grid))
    return result


_RUNNERS = {
    "deformation": _deformation_only,
    "stability": stability_report,
    "sharpness": sharpness_report,
    "counterexample": counterexample_report,
    "smooth": smooth_class_report,
    "bandlimited": bandlimited_comparison,
}


def run_experiment(cfg: ExperimentConfig, grid_refine: int = 0) -> ExperimentResult:
    """Dispatch on ``cfg.experiment``; ``grid_refine`` halves the spacing that many times."""
    grid = cfg.grid.build(grid_refine)
    return _RUNNERS[cfg.experiment](cfg, grid)


# ---------------------------------------------------------------- defaults


def default_config(name: str) -> ExperimentConfig:
    """Built-in configuration for the named experiment."""
    fine_1d = GridConfig(dim=1, extent=8192, spacing=2.0**-10)
    if name == "sharpness":
        return ExperimentConfig(
            experiment="sharpness", grid=fine_1d,
            signal=SignalConfig(kind="cartoon"),
            network=NetworkConfig(kind="identity", depth=0),
            deformation=DeformationConfig(kind="translation", s0=0.25, rungs=7),
            checks=ChecksConfig(alpha=[0.45, 0.55], prefactor=[1.34, 1.49]),
        )
    if name == "counterexample":
        return ExperimentConfig(
            experiment="counterexample", grid=fine_1d,
            signal=SignalConfig(kind="concentrated"),
            network=NetworkConfig(kind="identity", depth=0),
            deformation=DeformationConfig(kind="translation", s0=0.25, rungs=7, counterexample=True),
            checks=ChecksConfig(alpha=[-0.05, 0.05]),
        )
    if name == "stability":
        return ExperimentConfig(
            experiment="stability",
            grid=GridConfig(dim=2, extent=512, length=8.0),
            signal=SignalConfig(
                kind="cartoon",
                f1={"kind": "gaussian", "amplitude": 0.5, "width": 1.5},
                f2={"kind": "gaussian", "amplitude": 1.0, "width": 2.0},
                domain={"kind": "disc", "radius": 1.0},
            ),
            network=NetworkConfig(kind="wavelet", depth=2, num_scales=2, mother="morlet"),
            deformation=DeformationConfig(kind="smooth-random", s0=0.25, rungs=7, modes=2),
            checks=ChecksConfig(alpha=[0.45, None]),
        )
    if name == "smooth":
        return ExperimentConfig(
            experiment="smooth", grid=GridConfig(dim=1, extent=4096, length=32.0),
            signal=SignalConfig(kind="smooth", part={
                "kind": "gaussian-mixture",
                "components": [
                    {"amplitude": 1.0, "center": -1.0, "width": 1.0},
                    {"amplitude": 0.6, "center": 1.5, "width": 0.7},
                ],
            }),
            network=NetworkConfig(kind="wavelet", depth=2, num_scales=3, mother="morlet", orientations=2),
            deformation=DeformationConfig(kind="translation", s0=0.25, rungs=7),
            checks=ChecksConfig(alpha=[0.9, 1.1]),
        )
    if name == "bandlimited":
        return ExperimentConfig(
            experiment="bandlimited", grid=GridConfig(dim=1, extent=8192, length=64.0),
            signal=SignalConfig(kind="bandlimited", bandwidth=4.0),
            network=NetworkConfig(kind="identity", depth=0),
            deformation=DeformationConfig(kind="translation", s0=0.01, rungs=7),
            checks=ChecksConfig(alpha=[0.9, 1.1], growth=[1.5, 2.5],
                                bandwidths=[2.0, 4.0, 8.0, 16.0], bandlimited_shift=1e-3),
        )
    if name == "deformation":
        return ExperimentConfig(experiment="deformation", grid=fine_1d)
    raise KeyError(f"no default config for {name!r}")
