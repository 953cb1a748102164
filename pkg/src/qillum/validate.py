"""Cross-validation battery: theory oracle vs Monte Carlo vs enumeration.

``run_validate`` executes every module-level invariant at a deterministic
seed and reports one line per check.  The CLI maps a failed report to
exit code 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend, estimators, theory
from .harness import SweepSpec, collect_stats, run_nrf_sweep
from .params import BackgroundParams, DetectionParams, SourceKind, SourceParams
from .streams import child_generator

DEFAULT_SEED = 20139


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append((name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def lines(self) -> list[str]:
        out = []
        for name, passed, detail in self.checks:
            status = "PASS" if passed else "FAIL"
            suffix = f"  ({detail})" if detail else ""
            out.append(f"[{status}] {name}{suffix}")
        out.append(f"validate: {sum(p for _, p, _ in self.checks)}"
                   f"/{len(self.checks)} checks passed")
        return out


def _rel_err(a: float, b: float) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def _check_sigma0_paths(report: ValidationReport) -> None:
    """sigma0 closed form vs moment-based NRF, machine precision."""
    worst = 0.0
    for eta1 in (0.2, 0.4, 0.9):
        for eta2 in (0.1, 0.2, 0.45):
            for mu in (0.01, 0.075, 0.5):
                src = SourceParams(mu, 90_000, SourceKind.TWIN_BEAM)
                det = DetectionParams(eta1, eta2, True)
                bg = BackgroundParams(0.0, 57)
                a = theory.nrf_theory(src, det, bg)
                b = theory.nrf_zero_background(eta1, eta2, mu)
                worst = max(worst, _rel_err(a, b))
    report.add("sigma0 formula path == moment path", worst < 1e-12,
               f"worst rel err {worst:.2e}")


def _check_enumeration(report: ValidationReport) -> None:
    """Fourth-moment engine vs brute-force enumeration (36-point grid)."""
    worst = 0.0
    for modes in (1, 2, 3):
        for mu in (0.05, 0.1, 0.2):
            for eta in (0.5, 1.0):
                for kind in SourceKind:
                    src = SourceParams(mu, modes, kind)
                    det = DetectionParams(eta, eta, True)
                    bg = BackgroundParams(0.0, 1)
                    exact = theory.covariance_product_noise(src, det, bg)
                    brute = theory.covariance_product_noise_enumerated(src, det)
                    worst = max(worst, _rel_err(exact, brute))
    report.add("fourth-moment engine == enumeration", worst < 1e-9,
               f"worst rel err {worst:.2e}")


def _check_background_factorization(report: ValidationReport) -> None:
    """Target absent: k <d^2 Delta> = var(N1) var(N_b) exactly."""
    worst = 0.0
    for kind in SourceKind:
        src = SourceParams(0.075, 90_000, kind)
        det = DetectionParams(0.4, 0.0, False)
        for nb, mb in ((100.0, 57), (2000.0, 1300)):
            bg = BackgroundParams(nb, mb)
            ms = theory.detected_moments(src, det, bg)
            noise = theory.covariance_product_noise(src, det, bg)
            worst = max(worst, _rel_err(noise, ms.var1 * bg.variance))
    report.add("target-absent noise == var1 * var_b", worst < 1e-12,
               f"worst rel err {worst:.2e}")


def _check_epsilon_loss_invariance(report: ValidationReport) -> None:
    eps = [theory.epsilon_theory(SourceParams(0.075, 90_000,
                                              SourceKind.TWIN_BEAM),
                                 DetectionParams(e1, e2, True),
                                 BackgroundParams(0.0, 57))
           for e1, e2 in ((0.4, 0.2), (0.2, 0.1), (1.0, 1.0), (0.05, 0.9))]
    worst = max(_rel_err(e, eps[0]) for e in eps)
    report.add("epsilon theory loss-invariant (TWB)", worst < 1e-12,
               f"worst rel err {worst:.2e}")


def _mc_grid_spec(seed: int, frames: int) -> SweepSpec:
    return SweepSpec(source="both", frames=frames, seed=seed)


def _check_mc_vs_theory(report: ValidationReport, seed: int,
                        frames: int) -> None:
    """Theory vs Monte Carlo on a 3x3x3 (mu, eta2, N_b) grid, 3 sigma."""
    fails = []
    point = 0
    for mu in (0.03, 0.075, 0.3):
        for eta2 in (0.1, 0.2, 0.45):
            for nb in (0.0, 200.0, 2000.0):
                spec = SweepSpec(source="twb", mu=mu, eta1=min(2 * eta2, 1.0),
                                 eta2=eta2, seed=seed, frames=frames)
                src, det, bg = spec.point_params(SourceKind.TWIN_BEAM, nb, True)
                stats = collect_stats(spec, SourceKind.TWIN_BEAM, nb, point,
                                      frames)
                point += 1
                ms = theory.detected_moments(src, det, bg)
                n = stats.n_frames * stats.npix
                t = stats.sums.sum(axis=0)
                m1, m2 = t[0] / n, t[1] / n
                v1 = t[2] / n - m1 * m1
                v2 = t[3] / n - m2 * m2
                cov = t[4] / n - m1 * m2
                # Standard errors of the pooled moment estimators.
                se_m1 = math.sqrt(ms.var1 / n)
                se_m2 = math.sqrt(ms.var2 / n)
                se_v1 = ms.var1 * math.sqrt(2.0 / n)
                se_v2 = ms.var2 * math.sqrt(2.0 / n)
                se_cov = math.sqrt(ms.cov_noise / n)
                for label, est, ref, se in (
                        ("mean1", m1, ms.mean1, se_m1),
                        ("mean2", m2, ms.mean2, se_m2),
                        ("var1", v1, ms.var1, se_v1),
                        ("var2", v2, ms.var2, se_v2),
                        ("cov", cov, ms.cov, se_cov)):
                    if abs(est - ref) > 3.0 * se:
                        fails.append(f"{label}@mu={mu},eta2={eta2},nb={nb}: "
                                     f"{(est - ref) / se:+.1f} sigma")
    report.add("MC moments within 3 sigma of theory (27-point grid)",
               not fails, "; ".join(fails[:4]))


def _check_variance_law(report: ValidationReport, seed: int) -> None:
    """var over frames of the per-image covariance ~= noise / K (10%)."""
    worst = 0.0
    for kind in SourceKind:
        spec = SweepSpec(source="both", seed=seed, frames=4000)
        src, det, bg = spec.point_params(kind, 300.0, True)
        stats = collect_stats(spec, kind, 300.0, 40, 4000)
        deltas = estimators.per_frame_covariance(stats)
        expected = theory.covariance_noise_exact(src, det, bg, spec.npix)
        worst = max(worst, abs(deltas.var(ddof=1) / expected - 1.0))
    report.add("covariance variance law (10%)", worst < 0.10,
               f"worst deviation {worst * 100:.1f}%")


def _check_bias_law(report: ValidationReport, seed: int) -> None:
    """mean over frames of the per-image covariance = (1 - 1/K) cov."""
    spec = SweepSpec(source="twb", seed=seed, frames=6000)
    src, det, bg = spec.point_params(SourceKind.TWIN_BEAM, 0.0, True)
    stats = collect_stats(spec, SourceKind.TWIN_BEAM, 0.0, 41, 6000)
    deltas = estimators.per_frame_covariance(stats)
    expected = (1.0 - 1.0 / spec.npix) * theory.detected_moments(
        src, det, bg).cov
    se = deltas.std(ddof=1) / math.sqrt(deltas.size)
    dev = abs(deltas.mean() - expected) / se
    report.add("covariance bias law (1 - 1/K)", dev < 3.0,
               f"{dev:.1f} sigma")


def _check_estimator_nrf_epsilon(report: ValidationReport, seed: int) -> None:
    """Pooled NRF and epsilon agree with theory at 3 sigma (TWB + split)."""
    fails = []
    for kind in SourceKind:
        for nb in (0.0, 500.0):
            spec = SweepSpec(source="both", seed=seed, frames=3000)
            src, det, bg = spec.point_params(kind, nb, True)
            stats = collect_stats(spec, kind, nb, 50, 3000)
            est = estimators.nrf(stats)
            ref = theory.nrf_theory(src, det, bg)
            if abs(est.value - ref) > 3.0 * est.std_error:
                fails.append(f"nrf {kind.value}@nb={nb}")
            est = estimators.cauchy_schwarz_epsilon(stats)
            ref = theory.epsilon_theory(src, det, bg)
            if abs(est.value - ref) > 3.0 * est.std_error:
                fails.append(f"epsilon {kind.value}@nb={nb}")
    report.add("NRF/epsilon estimators within 3 sigma of theory",
               not fails, "; ".join(fails))


def _check_determinism(report: ValidationReport, seed: int) -> None:
    spec1 = SweepSpec(source="both", nb_points=3, frames=50, seed=seed,
                      threads=1)
    spec3 = SweepSpec(source="both", nb_points=3, frames=50, seed=seed,
                      threads=3)
    csv1 = run_nrf_sweep(spec1).to_csv_text()
    csv3 = run_nrf_sweep(spec3).to_csv_text()
    report.add("sweep CSV byte-identical across thread counts", csv1 == csv3)


def _check_backend_equivalence(report: ValidationReport, seed: int) -> None:
    backends = _backend.available_backends()
    if len(backends) < 2:
        report.add("backend equivalence", True,
                   "compiled kernel absent; python backend only")
        return
    frames = {}
    for name in backends:
        impl = _backend.get_backend(name)
        out = []
        for kind_code in (impl.KIND_TWIN_BEAM, impl.KIND_SPLIT_THERMAL):
            rng = child_generator(seed, domain=99, point=7, frame=3)
            n1 = np.empty(64, dtype=np.int64)
            n2 = np.empty(64, dtype=np.int64)
            impl.fill_frame(rng, kind_code, 0.075, 90_000.0, 0.4, 0.2, True,
                            800.0, 57.0, n1, n2)
            out.append((n1.copy(), n2.copy()))
        frames[name] = out
    same = all(np.array_equal(a, b)
               for pair_a, pair_b in zip(frames[backends[0]],
                                         frames[backends[1]])
               for a, b in zip(pair_a, pair_b))
    report.add("compiled and python backends draw identical frames", same)


def _check_perr_fixtures(report: ValidationReport, seed: int) -> None:
    rng = child_generator(seed, domain=98)
    same = rng.normal(0.0, 1.0, size=4000)
    res = estimators.error_probability(same, same.copy(), 10, 400,
                                       child_generator(seed, domain=97))
    ok_half = abs(res.p_err - 0.5) <= 0.1
    p_prev, monotone = 1.0, True
    far_in = rng.normal(10.0, 1.0, size=4000)
    far_out = rng.normal(-10.0, 1.0, size=4000)
    for nimg in (1, 4, 16):
        r = estimators.error_probability(far_in, far_out, nimg, 250,
                                         child_generator(seed, domain=96))
        monotone = monotone and r.p_err <= p_prev + 1e-12
        p_prev = r.p_err
    report.add("error-probability fixtures (0.5 null, monotone in n_img)",
               ok_half and monotone and p_prev < 1e-3)


def run_validate(seed: int = DEFAULT_SEED, frames: int = 1500,
                 deep: bool = True) -> ValidationReport:
    """Run the full invariant battery at a deterministic seed."""
    report = ValidationReport()
    _check_sigma0_paths(report)
    _check_enumeration(report)
    _check_background_factorization(report)
    _check_epsilon_loss_invariance(report)
    _check_backend_equivalence(report, seed)
    _check_determinism(report, seed)
    _check_perr_fixtures(report, seed)
    if deep:
        _check_mc_vs_theory(report, seed, frames)
        _check_variance_law(report, seed)
        _check_bias_law(report, seed)
        _check_estimator_nrf_epsilon(report, seed)
    return report
