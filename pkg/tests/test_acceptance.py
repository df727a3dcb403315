"""Acceptance gate: ten criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, random_signal  # noqa: E402
from scatstab import (  # noqa: E402
    DeformationField, DomainB, Grid, ModuleSequence, Nonlinearity, bessel_bound,
    contractivity_ratio, geometric_ladder, identity_bank, lemma1_constant, make_gabor_bank,
    make_random_bank, make_wavelet_bank, normalize_bank, scale_bank, tube_volume,
)
from scatstab.harness import (  # noqa: E402
    default_config, deformation_error_curve, feature_stability_curve, run, run_experiment,
)
from scatstab.harness.config import DeformationConfig, GridConfig, NetworkConfig  # noqa: E402

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_indicator_sharpness():
    start = time.perf_counter()
    result = run_experiment(default_config("sharpness"))
    elapsed = time.perf_counter() - start
    worst = max(abs(r.input_error / math.sqrt(2 * r.tau_sup) - 1) for r in result.rungs)
    alpha = result.input_fit.alpha
    ok = worst <= 0.02 and 0.45 <= alpha <= 0.55 and elapsed < 10
    record(1, "indicator translation sharpness", ok,
           f"max rung deviation {worst:.3g} <= 0.02, alpha {alpha:.4f} in [0.45, 0.55], "
           f"{elapsed:.2f} s < 10 s")


def test_02_cartoon_stability():
    cfg = default_config("stability")
    assert cfg.grid.build().extent == (512, 512)
    start = time.perf_counter()
    result = run_experiment(cfg)
    elapsed = time.perf_counter() - start
    worst = max(r.feature_error / r.bound for r in result.rungs)
    alpha = result.feature_fit.alpha
    ok = worst <= 1 and alpha >= 0.45 and elapsed < 120
    const = dict((row["name"], row["value"]) for row in result.tables["constants"][1])
    record(2, "cartoon stability bound", ok,
           f"max feature_error/(C_K ||tau||^1/2) {worst:.4g} <= 1 (C_K {const['C_K']:.4g}), "
           f"alpha {alpha:.4f} >= 0.45, {elapsed:.1f} s < 120 s")


def test_03_smooth_class_rate():
    result = run_experiment(default_config("smooth"))
    alpha = result.feature_fit.alpha
    worst = max(max(r.input_error, r.feature_error) / r.bound for r in result.rungs)
    ok = 0.9 <= alpha <= 1.1 and worst <= 1.05
    record(3, "smooth-class linear rate", ok,
           f"alpha {alpha:.4f} in [0.9, 1.1], max error/(C D ||tau||) {worst:.4g} <= 1.05")


def test_04_lemma1_constant():
    d1 = abs(lemma1_constant(1) ** 2 / (2 + 2 * math.pi) - 1)
    d2 = abs(lemma1_constant(2) ** 2 / (5 * math.pi) - 1)
    record(4, "lemma1 constant", d1 <= 1e-4 and d2 <= 1e-4,
           f"relative error d=1 {d1:.2e}, d=2 {d2:.2e} <= 1e-4")


def _lens(s, r=1.0):
    return 2 * r * r * math.acos(s / (2 * r)) - s / 2 * math.sqrt(4 * r * r - s * s)


def test_05_tube_law():
    g1 = Grid(1, (8192,), 2.0**-10)
    g2 = Grid.regular(2, 1024, 4.0)
    interval_dev, disc_dev = 0.0, 0.0
    for s in geometric_ladder(0.25, 7):
        vol = tube_volume(DomainB.interval(-1, 1), DeformationField.translation(s), g1)
        interval_dev = max(interval_dev, abs(vol - 2 * s) / g1.spacing)
        vol = tube_volume(DomainB.disc(1.0), DeformationField.translation((s, 0.0)), g2)
        disc_dev = max(disc_dev, abs(vol / (2 * (math.pi - _lens(s))) - 1))
    record(5, "tube volume law", interval_dev <= 1 and disc_dev <= 0.03,
           f"interval max |vol - 2s| = {interval_dev:.3g} cells <= 1, "
           f"disc max relative deviation {disc_dev:.4f} <= 0.03")


def _sequences():
    g1 = Grid.regular(1, 256, 16.0)
    g2 = Grid.regular(2, 32, 8.0)

    def build(grid, factory, nonlinearity):
        lip = Nonlinearity(nonlinearity).lipschitz
        return ModuleSequence.build(grid, 2, lambda g, n: normalize_bank(factory(g, n), lip),
                                    nonlinearity)

    return {
        "morlet/modulus 1-d": build(g1, lambda g, n: make_wavelet_bank(g, 3), "modulus"),
        "gabor/relu 1-d": build(g1, lambda g, n: make_gabor_bank(g, [0, 0.5, 1, 1.5, -1], 0.4), "relu"),
        "random/sigmoid 2-d": build(g2, lambda g, n: make_random_bank(g, 4, n, 0.3), "sigmoid"),
    }


def test_06_contractivity():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for seq in _sequences().values():
        for _ in range(100):
            f, h = random_signal(seq.grid, rng), random_signal(seq.grid, rng)
            worst = max(worst, contractivity_ratio(seq, f, h))
    record(6, "contractivity", worst <= 1 + 1e-8,
           f"max ratio over 3 x 100 pairs {worst:.12f} <= 1 + 1e-8")


def test_07_weak_admissibility():
    worst = 0.0
    count = 0
    for grid in (Grid.regular(1, 256, 16.0), Grid.regular(2, 64, 8.0)):
        banks = [
            identity_bank(grid),
            make_gabor_bank(grid, np.arange(5) * 0.4 if grid.dim == 1 else
                            [(0, 0), (0.5, 0), (0, 0.5), (0.5, 0.5)], 0.3),
            make_wavelet_bank(grid, 3, "morlet"),
            make_wavelet_bank(grid, 3, "dog"),
            make_random_bank(grid, 5, 0, 0.3),
        ]
        for bank in banks:
            for L in (0.25, 1.0, 2.0):
                for c in (0.3, 1.0, 5.0):
                    out = normalize_bank(scale_bank(bank, c), L)
                    worst = max(worst, bessel_bound(out) * max(1.0, L * L))
                    count += 1
    record(7, "weak admissibility after normalization", worst <= 1 + 1e-12,
           f"max B * max(1, L^2) over {count} banks = {worst!r} <= 1 + 1e-12")


def test_08_concentrated_counterexample():
    result = run_experiment(default_config("counterexample"))
    worst = max(abs(r.input_error / math.sqrt(2) - 1) for r in result.rungs)
    alpha = result.input_fit.alpha
    record(8, "concentrated counterexample", worst <= 0.02 and -0.05 <= alpha <= 0.05,
           f"max deviation from sqrt(2) {worst:.3g} <= 0.02, alpha {alpha:.3g} in [-0.05, 0.05]")


def test_09_identity_extractor():
    cfgs = [default_config("sharpness"),
            replace(default_config("stability"), network=NetworkConfig(kind="identity"),
                    grid=GridConfig(dim=2, extent=256, length=8.0))]
    same = True
    for cfg in cfgs:
        a, b = deformation_error_curve(cfg), feature_stability_curve(cfg)
        same &= [r.input_error for r in a] == [r.feature_error for r in b]
    record(9, "identity extractor", same,
           "feature curve equals input curve bit-exactly (1-d indicator, 2-d disc cartoon)")


def test_10_determinism(tmp_path):
    small_stability = tmp_path / "stability_small.toml"
    small_stability.write_text((CONFIGS / "stability.toml").read_text()
                               .replace("extent = 512", "extent = 128").replace("n_jobs = 1", "n_jobs = 3"))
    configs = [p for p in sorted(CONFIGS.glob("*.toml")) if p.stem not in ("stability", "inadmissible")]
    configs.append(small_stability)
    identical = True
    for path in configs:
        outs = []
        for k in range(2):
            out = tmp_path / f"{path.stem}_{k}"
            run(path, out, seed=7)
            outs.append(sorted((p.name, p.read_bytes()) for p in out.glob("*.csv")))
        identical &= outs[0] == outs[1] and len(outs[0]) > 0
    record(10, "determinism", identical,
           f"byte-identical CSV output for {len(configs)} configs run twice")


if __name__ == "__main__":
    import tempfile

    failures = 0
    for name, func in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                if "tmp_path" in func.__code__.co_varnames[: func.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as tmp:
                        func(Path(tmp))
                else:
                    func()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
