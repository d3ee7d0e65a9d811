"""Declarative experiment registry behind the command line runner.

A config is a flat ``key = value`` text file: blank lines and ``#``
comment lines are ignored, there is no nesting and no inline comment
syntax.  Every config carries ``config_version = 1``, names its ``kind``
and a single integer ``seed``; the kind's schema supplies coercion,
validation and defaults for the remaining keys, and unknown keys are
rejected outright.  All randomness of a run flows from that one seed
(auxiliary draws use spawn keys off it), so identical configs reproduce
identical numbers at any thread count.

Runners hand back plain rows plus a JSON-ready summary and a list of
per-assertion verdicts; file writing stays with the caller, which keeps
the registry importable and testable without touching the filesystem.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .chaos import DiscreteIsonormal, double_wiener_integral, moment_ratio
from .grids import StepFunction, TimeGrid
from .integrals import isometry_report
from .processes import Family, FracParams, default_isonormal, simulate_fbm, simulate_hermite_k2
from .sobolev import integrand_norm, norm_equivalence_constant, sobolev_norm_fourier
from .spde import (
    NeumannKernelConfig,
    boundary_solution_check,
    build_spectral_model,
    existence_report,
    holder_exponent_estimate,
    mode_norm,
    neumann_boundary_integral,
    semigroup_smoothing_exponent,
    solve_mild,
)

__all__ = [
    "CONFIG_VERSION",
    "SUMMARY_VERSION",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "Verdict",
    "Experiment",
    "EXPERIMENTS",
    "parse_flat_config",
    "validate_config",
    "load_config",
    "run_experiment",
    "list_experiments_text",
    "column_docs_text",
]

CONFIG_VERSION = 1
SUMMARY_VERSION = 1

GAUSSIAN_RATIO = 3.0**0.25  # L4/L2 of a centered Gaussian
CHAOS2_RATIO = 60.0**0.25 / 2.0**0.5  # same ratio for xi^2 - 1

_KEY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ConfigError(Exception):
    """Invalid experiment configuration; one entry per problem found."""

    def __init__(self, problems: Sequence[str]):
        self.problems = [str(p) for p in problems]
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated config: kind, seed and fully defaulted parameters."""

    kind: str
    seed: int
    params: Mapping[str, object]
    text_hash: str = ""
    out_dir: Optional[str] = None


@dataclass(frozen=True)
class Verdict:
    """Outcome of one in-config assertion."""

    case: str
    passed: bool
    detail: str

    def to_record(self) -> dict:
        return {"case": self.case, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class ExperimentResult:
    columns: tuple
    rows: list
    summary: dict
    verdicts: list
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


# ---------------------------------------------------------------------------
# flat key = value parsing


def parse_flat_config(text: str) -> dict:
    """Parse the flat format into a raw string-to-string mapping."""
    out: dict = {}
    problems = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            problems.append(f"line {ln}: expected 'key = value', got {line!r}")
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        if not _KEY_RE.fullmatch(key):
            problems.append(f"line {ln}: bad key {key!r}")
            continue
        if key in out:
            problems.append(f"line {ln}: duplicate key {key!r}")
            continue
        out[key] = val.strip()
    if problems:
        raise ConfigError(problems)
    return out


# coercers: raw string -> typed value, ValueError on nonsense


def _int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"expected an integer, got {raw!r}") from None


def _float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"expected a number, got {raw!r}") from None


def _bool(raw: str):
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    raise ValueError(f"expected true or false, got {raw!r}")


def _floats(raw: str) -> tuple:
    toks = [t.strip() for t in raw.split(",") if t.strip()]
    return tuple(_float(t) for t in toks)


def _str(raw: str) -> str:
    return raw


def _choice(*options: str):
    def coerce(raw: str) -> str:
        if raw in options:
            return raw
        raise ValueError(f"expected one of {', '.join(options)}; got {raw!r}")

    return coerce


# checks: typed value -> problem string or None


def _ge(bound):
    return lambda v: None if v >= bound else f"must be >= {bound}"


def _positive(v):
    return None if v > 0 else "must be positive"


def _open_unit(v):
    return None if 0.0 < v < 1.0 else "must lie in (0, 1)"


def _nonempty_unit_grid(vs):
    if not vs:
        return "parameter grid is empty"
    if any(not 0.0 < v < 1.0 for v in vs):
        return "every value must lie in (0, 1)"
    return None


def _nonempty_grid(vs):
    return None if vs else "parameter grid is empty"


def _fraction(v):
    return None if 0.0 < v <= 1.0 else "must lie in (0, 1]"


@dataclass(frozen=True)
class _Key:
    name: str
    coerce: Callable
    check: Optional[Callable] = None
    default: object = None


# ---------------------------------------------------------------------------
# validation


def validate_config(raw: Mapping[str, str], text_hash: str = "") -> ExperimentConfig:
    """Check a raw mapping against its kind's schema; all problems at once."""
    problems = []
    kind = raw.get("kind")
    if kind is None:
        problems.append("missing required key 'kind'")
    elif kind not in EXPERIMENTS:
        problems.append(f"unknown experiment kind {kind!r}; see list-experiments")
    ver = raw.get("config_version")
    if ver is None:
        problems.append("missing required key 'config_version'")
    else:
        try:
            if int(ver) != CONFIG_VERSION:
                problems.append(
                    f"unsupported config_version {ver} (this build reads version {CONFIG_VERSION})"
                )
        except ValueError:
            problems.append(f"key 'config_version': expected an integer, got {ver!r}")
    if kind not in EXPERIMENTS:
        raise ConfigError(problems)
    exp = EXPERIMENTS[kind]

    params: dict = {}
    seen = {"kind", "config_version", "seed", "out_dir"}

    def take(key: _Key, required: bool):
        if key.name not in raw:
            if required:
                problems.append(f"missing required key '{key.name}'")
            else:
                params[key.name] = key.default
            return
        try:
            value = key.coerce(raw[key.name])
        except ValueError as exc:
            problems.append(f"key '{key.name}': {exc}")
            return
        msg = key.check(value) if key.check else None
        if msg:
            problems.append(f"key '{key.name}': {msg}")
        else:
            params[key.name] = value

    seed = 0
    if "seed" not in raw:
        problems.append("missing required key 'seed'")
    else:
        try:
            seed = _int(raw["seed"])
            if seed < 0:
                problems.append("key 'seed': must be >= 0")
        except ValueError as exc:
            problems.append(f"key 'seed': {exc}")

    for key in exp.required:
        take(key, required=True)
        seen.add(key.name)
    for key in exp.optional:
        take(key, required=False)
        seen.add(key.name)

    for name in sorted(set(raw) - seen):
        problems.append(f"unknown key {name!r} for kind {kind!r}")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(kind, seed, params, text_hash, raw.get("out_dir"))


def load_config(path) -> ExperimentConfig:
    """Read, parse and validate a config file."""
    import hashlib

    with open(path, "rb") as fh:
        data = fh.read()
    raw = parse_flat_config(data.decode("utf-8"))
    return validate_config(raw, text_hash=hashlib.sha256(data).hexdigest())


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    return EXPERIMENTS[cfg.kind].runner(cfg, threads)


# ---------------------------------------------------------------------------
# shared helpers


def _aux_rng(seed: int, lane: int) -> np.random.Generator:
    # auxiliary draws (integrand shapes, combination coefficients) live on
    # spawn lanes so they never collide with the path substreams
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(lane,)))


def _aligned_step(rng: np.random.Generator, grid: TimeGrid, pieces: int) -> StepFunction:
    idx = np.sort(rng.choice(grid.n_steps + 1, size=pieces + 1, replace=False))
    return StepFunction(grid.nodes[idx], rng.normal(size=pieces))


def _frac_params(family: str, h: float, sigma: float, p: Mapping) -> FracParams:
    try:
        fam = Family(family)
        if fam is Family.FBM:
            return FracParams.fbm(h, sigma)
        if fam is Family.ROSENBLATT:
            return FracParams.rosenblatt(h, sigma)
        if p.get("alpha") is None or p.get("beta") is None:
            raise ValueError("the generalized family needs keys alpha and beta")
        pr = FracParams.generalized(p["alpha"], p["beta"], int(p.get("k") or 2), sigma)
        if abs(pr.h - h) > 1e-12:
            raise ValueError(
                f"hurst {h:g} inconsistent with alpha + beta + k/2 + 1 = {pr.h:g}"
            )
        return pr
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None


# ---------------------------------------------------------------------------
# norm-identity


def _run_norm_identity(cfg: ExperimentConfig, threads: int) -> ExperimentResult:
    p = cfg.params
    if p["pieces"] >= p["grid_steps"]:
        raise ConfigError(["pieces must be smaller than grid_steps"])
    grid = TimeGrid(0.0, p["t_end"] / p["grid_steps"], p["grid_steps"])
    rng = _aux_rng(cfg.seed, 0)
    rows, verdicts = [], []
    targets = {}
    worst = 0.0
    for h in p["hurst"]:
        target = norm_equivalence_constant(h, p["sigma"])
        targets[f"{h:g}"] = target
        for fid in range(p["n_functions"]):
            f = _aligned_step(rng, grid, p["pieces"])
            dh = integrand_norm(f, h, p["sigma"])
            four = sobolev_norm_fourier(f.to_grid(grid), 0.5 - h)
            case = f"H={h:g} f={fid}"
            if four == 0.0:
                rows.append((h, fid, dh, four, math.nan, False))
                verdicts.append(Verdict(case, False, "degenerate draw: zero Sobolev norm"))
                continue
            ratio = dh / four
            rel = abs(ratio - target) / target
            worst = max(worst, rel)
            ok = rel <= p["ratio_rtol"]
            rows.append((h, fid, dh, four, ratio, ok))
            verdicts.append(
                Verdict(case, ok, f"ratio {ratio:.8g} vs constant {target:.8g} (rel dev {rel:.2e})")
            )
    summary = {
        "summary_version": SUMMARY_VERSION,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "target_constant": targets,
        "max_rel_deviation": worst,
        "ratio_rtol": p["ratio_rtol"],
        "n_cases": len(rows),
        "n_failed": sum(not v.passed for v in verdicts),
    }
    return ExperimentResult(
        columns=("H", "f-id", "dh_norm", "fourier_norm", "ratio", "pass"),
        rows=rows,
        summary=summary,
        verdicts=verdicts,
    )


# ---------------------------------------------------------------------------
# isometry


def _run_isometry(cfg: ExperimentConfig, threads: int) -> ExperimentResult:
    p = cfg.params
    if p["pieces"] >= p["grid_steps"]:
        raise ConfigError(["pieces must be smaller than grid_steps"])
    grid = TimeGrid(0.0, p["t_end"] / p["grid_steps"], p["grid_steps"])
    rng = _aux_rng(cfg.seed, 1)
    warnings = []
    if p["n_paths"] < 1000:
        warnings.append(f"n_paths = {p['n_paths']} is small for stable z-scores")
    rows = []
    zs = []
    for i, h in enumerate(p["hurst"]):
        params = _frac_params(p["family"], h, p["sigma"], p)
        if params.family is Family.FBM:
            ens = simulate_fbm(
                params, grid, p["n_paths"], cfg.seed, stream=i, threads=threads,
                method=p["method"],
            )
        else:
            iso = default_isonormal(p["t_end"], cfg.seed, p["n_noise_cells"], stream=i)
            ens = simulate_hermite_k2(params, grid, iso, p["n_paths"], threads)
        for fid in range(p["n_functions"]):
            f = _aligned_step(rng, grid, p["pieces"])
            rep = isometry_report(f, ens)
            ok = abs(rep.z_score) <= p["z_max"]
            zs.append(rep.z_score)
            rows.append((p["family"], h, fid, rep.dh_norm_sq, rep.mc_var, rep.z_score, ok))
    frac = sum(abs(z) <= p["z_max"] for z in zs) / len(zs)
    passed = frac >= p["pass_fraction"]
    verdicts = [
        Verdict(
            "z-band fraction",
            passed,
            f"{frac:.4f} of {len(zs)} cells within |z| <= {p['z_max']:g} "
            f"(need >= {p['pass_fraction']:g})",
        )
    ]
    summary = {
        "summary_version": SUMMARY_VERSION,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "family": p["family"],
        "z_scores": zs,
        "z_max": p["z_max"],
        "fraction_within": frac,
        "pass_fraction": p["pass_fraction"],
        "n_cases": len(rows),
        "passed": passed,
    }
    return ExperimentResult(
        columns=("family", "H", "f-id", "dh_norm_sq", "mc_var", "z", "pass"),
        rows=rows,
        summary=summary,
        verdicts=verdicts,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# moments


def _run_moments(cfg: ExperimentConfig, threads: int) -> ExperimentResult:
    p = cfg.params
    warnings = []
    if p["n_paths"] < 1000:
        warnings.append(f"n_paths = {p['n_paths']} is small for stable moment ratios")
    n_cells = p["n_cells"]
    iso = DiscreteIsonormal(TimeGrid(0.0, p["t_end"] / n_cells, n_cells), seed=cfg.seed)
    e = np.ones(n_cells) / math.sqrt(p["t_end"])  # unit L2 weight on the window
    first = iso.first_order(e, p["n_paths"], threads).values
    second = double_wiener_integral(np.outer(e, e), iso, p["n_paths"], threads).values

    g_ratio = moment_ratio(first, 4, 2)
    c_ratio = moment_ratio(second, 4, 2)
    g_ok = abs(g_ratio - GAUSSIAN_RATIO) <= p["gauss_rtol"] * GAUSSIAN_RATIO
    c_ok = abs(c_ratio - CHAOS2_RATIO) <= p["chaos2_rtol"] * CHAOS2_RATIO
    rows = [("gaussian", 0, g_ratio, GAUSSIAN_RATIO, g_ok), ("chaos2", 0, c_ratio, CHAOS2_RATIO, c_ok)]

    rng = _aux_rng(cfg.seed, 2)
    bound = p["combo_bound"]
    combo_max = 0.0
    combo_all_ok = True
    for j in range(p["n_draws"]):
        a = rng.normal(size=3)
        while np.abs(a).sum() < 1e-6:
            a = rng.normal(size=3)
        ratio = moment_ratio(a[0] + a[1] * first + a[2] * second, 4, 2)
        ok = ratio <= bound
        combo_max = max(combo_max, ratio)
        combo_all_ok = combo_all_ok and ok
        rows.append(("combo", j, ratio, bound, ok))

    verdicts = [
        Verdict("gaussian moment ratio", g_ok, f"{g_ratio:.6g} vs {GAUSSIAN_RATIO:.6g}"),
        Verdict("second-chaos moment ratio", c_ok, f"{c_ratio:.6g} vs {CHAOS2_RATIO:.6g}"),
        Verdict(
            "mixed-combination bound",
            combo_all_ok,
            f"max ratio {combo_max:.6g} over {p['n_draws']} draws (bound {bound:g})",
        ),
    ]
    summary = {
        "summary_version": SUMMARY_VERSION,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "gaussian_ratio": g_ratio,
        "chaos2_ratio": c_ratio,
        "combo_max_ratio": combo_max,
        "combo_bound": bound,
        "n_draws": p["n_draws"],
        "n_paths": p["n_paths"],
    }
    return ExperimentResult(
        columns=("check", "draw", "ratio", "reference", "pass"),
        rows=rows,
        summary=summary,
        verdicts=verdicts,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# spde-distributed


def _run_spde_distributed(cfg: ExperimentConfig, threads: int) -> ExperimentResult:
    p = cfg.params
    warnings = []
    if p["n_paths"] < 1000:
        warnings.append(f"n_paths = {p['n_paths']} is small for stable z-scores")
    if p["fit_smoothing"] and p["truncation"] < 128:
        warnings.append(
            f"truncation = {p['truncation']} is coarse for the smoothing-exponent fit; "
            "128+ modes give a stable slope"
        )
    try:
        model = build_spectral_model(
            p["length"], p["m"], p["truncation"], lambda_shift=p["lambda_shift"], p=p["p"]
        )
        params = _frac_params(p["family"], p["hurst"], p["sigma"], p)
        grid = TimeGrid(0.0, p["t_end"] / p["grid_steps"], p["grid_steps"])
        ens = solve_mild(
            model, params, grid, p["n_paths"], p["alpha"], seed=cfg.seed, threads=threads,
            n_noise_cells=p["n_noise_cells"],
        )
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None

    n_check = min(p["check_modes"], model.truncation)
    rows, verdicts = [], []
    for j in range(n_check):
        vals = np.asarray(ens.coeffs[:, j, -1], dtype=float)
        mc = float(np.mean(vals**2))
        target = mode_norm(model, j + 1, p["t_end"], p["hurst"], p["alpha"], p["sigma"]) ** 2
        se = float(np.std(vals**2, ddof=1) / math.sqrt(len(vals)))
        z = 0.0 if se == 0.0 else (mc - target) / se
        ok = abs(z) <= p["z_max"]
        rows.append((j + 1, float(model.eigenvalues[j]), mc, target, z, ok))
        verdicts.append(
            Verdict(f"mode {j + 1} second moment", ok, f"z = {z:.3f} (|z| <= {p['z_max']:g})")
        )

    fitted = {}
    if p["fit_holder"]:
        lp = None if p["p"] == 2.0 else p["p"]
        slope = holder_exponent_estimate(ens, lp)
        fitted["holder"] = slope
        if p["holder_floor"] is not None:
            ok = slope > p["holder_floor"]
            verdicts.append(
                Verdict(
                    "temporal regularity exponent",
                    ok,
                    f"fitted slope {slope:.4f} vs floor {p['holder_floor']:g}",
                )
            )
    if p["fit_smoothing"]:
        slope = semigroup_smoothing_exponent(model, p["alpha"])
        expected = -1.0 / (4.0 * p["m"]) - p["alpha"]
        fitted["smoothing"] = slope
        ok = abs(slope - expected) <= p["smoothing_tol"]
        verdicts.append(
            Verdict(
                "semigroup smoothing exponent",
                ok,
                f"fitted slope {slope:.4f} vs {expected:.4f} (tol {p['smoothing_tol']:g})",
            )
        )

    summary = {
        "summary_version": SUMMARY_VERSION,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "family": p["family"],
        "hurst": p["hurst"],
        "alpha": p["alpha"],
        "existence_threshold": p["hurst"] - 1.0 / (4.0 * p["m"]),
        "fitted_exponents": fitted,
        "n_modes_checked": n_check,
        "n_failed": sum(not v.passed for v in verdicts),
    }
    return ExperimentResult(
        columns=("mode", "eigenvalue", "mc_second_moment", "expected_second_moment", "z", "pass"),
        rows=rows,
        summary=summary,
        verdicts=verdicts,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# spde-boundary


def _run_spde_boundary(cfg: ExperimentConfig, threads: int) -> ExperimentResult:
    p = cfg.params
    warnings = []
    if p["n_paths"] < 1000:
        warnings.append(f"n_paths = {p['n_paths']} is small for stable z-scores")
    if p["x_nodes"] is not None and p["n_x"] is not None:
        raise ConfigError(["give either x_nodes or n_x, not both"])
    try:
        kcfg = NeumannKernelConfig(p["length"], p["t0"], p["hurst"], p["p"], p["image_terms"])
        params = FracParams.fbm(p["hurst"], p["sigma"])
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None

    rec = neumann_boundary_integral(kcfg)
    trace = [float(v) for v in rec.refinement_trace]
    if len(trace) >= 2 and trace[-1] != 0.0:
        drift = abs(trace[-1] - trace[-2]) / abs(trace[-1])
    else:
        drift = math.inf
    if p["expect"] == "finite":
        int_ok = (not rec.diverged) and drift <= p["stability_rtol"]
        detail = (
            f"value {rec.value:.6g}, last refinement moved {drift:.2e} "
            f"(allow {p['stability_rtol']:g})"
        )
    else:
        int_ok = bool(rec.diverged)
        detail = "flagged diverged" if rec.diverged else "expected divergence, got a stable value"
    verdicts = [Verdict("boundary-noise integral", int_ok, detail)]

    kwargs = {}
    if p["x_nodes"] is not None:
        kwargs["x_nodes"] = np.asarray(p["x_nodes"], dtype=float)
    elif p["n_x"] is not None:
        kwargs["n_x"] = p["n_x"]
    try:
        check = boundary_solution_check(
            kcfg, params, p["n_paths"], grid_steps=p["grid_steps"], seed=cfg.seed,
            threads=threads, kernel_pieces=p["kernel_pieces"], **kwargs,
        )
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None

    rows = []
    se_rel = math.sqrt(2.0 / p["n_paths"])  # Gaussian driver: var of a squared mean
    for x, mc, exp_v in zip(check.x_nodes, check.variance_profile, check.expected_profile):
        z = 0.0 if exp_v == 0.0 else (mc - exp_v) / (exp_v * se_rel)
        ok = abs(z) <= p["z_max"]
        rows.append((float(x), float(mc), float(exp_v), z, ok))
        verdicts.append(Verdict(f"wall variance at x={x:g}", ok, f"z = {z:.3f}"))

    summary = {
        "summary_version": SUMMARY_VERSION,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "integral_value": rec.value,
        "integral_diverged": rec.diverged,
        "refinement_trace": trace,
        "gamma_norm": check.gamma_norm,
        "n_paths": p["n_paths"],
        "n_failed": sum(not v.passed for v in verdicts),
    }
    return ExperimentResult(
        columns=("x", "mc_variance", "expected_variance", "z", "pass"),
        rows=rows,
        summary=summary,
        verdicts=verdicts,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# threshold-sweep


def _run_threshold_sweep(cfg: ExperimentConfig, threads: int) -> ExperimentResult:
    p = cfg.params
    try:
        model = build_spectral_model(p["length"], p["m"], p["truncation"], p=p["p"])
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    rows, verdicts = [], []
    flips = {}
    for h in p["hurst"]:
        threshold = h - 1.0 / (4.0 * p["m"])
        flags = []
        all_rows_ok = True
        for a in p["alpha"]:
            try:
                rep = existence_report(
                    model, h, a, p["t0"], sigma=p["sigma"], doublings=p["doublings"],
                    n_x=p["n_x"],
                )
            except ValueError as exc:
                raise ConfigError([str(exc)]) from None
            diverged = not rep.finite
            if abs(a - threshold) <= p["margin"]:
                ok = True  # indeterminate zone around the threshold
            else:
                ok = diverged == (a > threshold)
            all_rows_ok = all_rows_ok and ok
            flags.append((a, diverged))
            rows.append((h, a, threshold, rep.gamma_norm_lp_value, diverged, ok))
        flags.sort(key=lambda t: t[0])
        ordered = [d for _, d in flags]
        monotone = all(not (x and not y) for x, y in zip(ordered, ordered[1:]))
        first_div = next((a for a, d in flags if d), None)
        flips[f"{h:g}"] = first_div
        ok = all_rows_ok and monotone
        msg = "verdicts monotone in alpha" if monotone else "verdicts not monotone in alpha"
        if first_div is not None:
            msg += f"; first diverged at alpha = {first_div:g} (threshold {threshold:g})"
        verdicts.append(Verdict(f"H={h:g} sweep", ok, msg))
    summary = {
        "summary_version": SUMMARY_VERSION,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "first_diverged_alpha": flips,
        "margin": p["margin"],
        "n_cases": len(rows),
    }
    return ExperimentResult(
        columns=("H", "alpha", "threshold", "gamma_norm", "diverged", "pass"),
        rows=rows,
        summary=summary,
        verdicts=verdicts,
    )


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class Experiment:
    name: str
    blurb: str
    required: tuple
    optional: tuple
    columns: tuple
    column_doc: str
    runner: Callable


EXPERIMENTS: dict = {}


def _register(exp: Experiment):
    EXPERIMENTS[exp.name] = exp


_register(
    Experiment(
        name="norm-identity",
        blurb="integrand norm over Sobolev norm against the closed-form constant",
        required=(
            _Key("hurst", _floats, _nonempty_unit_grid),
            _Key("n_functions", _int, _ge(1)),
        ),
        optional=(
            _Key("sigma", _float, _positive, 1.0),
            _Key("ratio_rtol", _float, _positive, 0.01),
            _Key("pieces", _int, _ge(1), 6),
            _Key("grid_steps", _int, _ge(8), 256),
            _Key("t_end", _float, _positive, 1.0),
        ),
        columns=("H", "f-id", "dh_norm", "fourier_norm", "ratio", "pass"),
        column_doc=(
            "H             Hurst parameter of the row\n"
            "f-id          index of the random step integrand in the draw sequence\n"
            "dh_norm       integrand norm of the draw (tail-transform route)\n"
            "fourier_norm  homogeneous Sobolev norm of order 1/2 - H (FFT route)\n"
            "ratio         dh_norm / fourier_norm\n"
            "pass          true when the ratio is within ratio_rtol of the constant"
        ),
        runner=_run_norm_identity,
    )
)

_register(
    Experiment(
        name="isometry",
        blurb="Monte Carlo second moment of Wiener integrals against the integrand norm",
        required=(
            _Key("family", _choice("fbm", "rosenblatt", "generalized")),
            _Key("hurst", _floats, _nonempty_unit_grid),
            _Key("n_paths", _int, _ge(2)),
            _Key("n_functions", _int, _ge(1)),
        ),
        optional=(
            _Key("sigma", _float, _positive, 1.0),
            _Key("alpha", _float),
            _Key("beta", _float),
            _Key("k", _int, _ge(1)),
            _Key("grid_steps", _int, _ge(8), 256),
            _Key("t_end", _float, _positive, 1.0),
            _Key("pieces", _int, _ge(1), 4),
            _Key("z_max", _float, _positive, 3.0),
            _Key("pass_fraction", _float, _fraction, 0.95),
            _Key("n_noise_cells", _int, _ge(16), 1024),
            _Key("method", _choice("circulant", "cholesky"), None, "circulant"),
        ),
        columns=("family", "H", "f-id", "dh_norm_sq", "mc_var", "z", "pass"),
        column_doc=(
            "family        driver family of the row (fbm, rosenblatt, generalized)\n"
            "H             Hurst parameter of the driver\n"
            "f-id          index of the random step integrand\n"
            "dh_norm_sq    exact squared integrand norm (the isometry target)\n"
            "mc_var        Monte Carlo variance of the integral\n"
            "z             (mc_var - dh_norm_sq) / SE\n"
            "pass          true when |z| <= z_max"
        ),
        runner=_run_isometry,
    )
)

_register(
    Experiment(
        name="moments",
        blurb="hypercontractive moment ratios of first and second chaos samples",
        required=(_Key("n_paths", _int, _ge(2)),),
        optional=(
            _Key("n_draws", _int, _ge(1), 100),
            _Key("n_cells", _int, _ge(8), 128),
            _Key("t_end", _float, _positive, 1.0),
            _Key("gauss_rtol", _float, _positive, 0.01),
            _Key("chaos2_rtol", _float, _positive, 0.02),
            _Key("combo_bound", _float, _positive, 3.0),
        ),
        columns=("check", "draw", "ratio", "reference", "pass"),
        column_doc=(
            "check         gaussian | chaos2 | combo\n"
            "draw          coefficient-draw index (0 for the two fixed checks)\n"
            "ratio         empirical L4/L2 moment ratio\n"
            "reference     exact target (gaussian, chaos2) or the order-2 bound (combo)\n"
            "pass          true when the ratio matches (fixed checks) or stays bounded"
        ),
        runner=_run_moments,
    )
)

_register(
    Experiment(
        name="spde-distributed",
        blurb="mild solution mode variances, optional regularity exponent fits",
        required=(
            _Key("family", _choice("fbm", "rosenblatt")),
            _Key("hurst", _float, _open_unit),
            _Key("m", _int, _ge(1)),
            _Key("length", _float, _positive),
            _Key("truncation", _int, _ge(1)),
            _Key("grid_steps", _int, _ge(2)),
            _Key("t_end", _float, _positive),
            _Key("n_paths", _int, _ge(2)),
            _Key("alpha", _float, _ge(0.0)),
        ),
        optional=(
            _Key("sigma", _float, _positive, 1.0),
            _Key("p", _float, _ge(1.0), 2.0),
            _Key("lambda_shift", _float, _ge(0.0), 0.0),
            _Key("check_modes", _int, _ge(1), 4),
            _Key("z_max", _float, _positive, 3.0),
            _Key("fit_holder", _bool, None, False),
            _Key("holder_floor", _float),
            _Key("fit_smoothing", _bool, None, False),
            _Key("smoothing_tol", _float, _positive, 0.05),
            _Key("n_noise_cells", _int, _ge(16), 512),
        ),
        columns=("mode", "eigenvalue", "mc_second_moment", "expected_second_moment", "z", "pass"),
        column_doc=(
            "mode                    eigenmode index (1-based)\n"
            "eigenvalue              spectral eigenvalue of the mode\n"
            "mc_second_moment        Monte Carlo E y_k(t_end)^2\n"
            "expected_second_moment  exact mode norm squared\n"
            "z                       (mc - expected) / SE\n"
            "pass                    true when |z| <= z_max"
        ),
        runner=_run_spde_distributed,
    )
)

_register(
    Experiment(
        name="spde-boundary",
        blurb="Neumann boundary-noise integral and wall variance profile",
        required=(
            _Key("hurst", _float, lambda v: None if 0.5 <= v < 1.0 else "must lie in [1/2, 1)"),
            _Key("p", _float, lambda v: None if 1.0 < v <= 2.0 else "must lie in (1, 2]"),
            _Key("t0", _float, _positive),
            _Key("length", _float, _positive),
            _Key("n_paths", _int, _ge(2)),
            _Key("grid_steps", _int, _ge(2)),
        ),
        optional=(
            _Key("sigma", _float, _positive, 1.0),
            _Key("image_terms", _int, _ge(1), 20),
            _Key("n_x", _int, _ge(2)),
            _Key("x_nodes", _floats, _nonempty_grid),
            _Key("kernel_pieces", _int, _ge(8), 96),
            _Key("z_max", _float, _positive, 3.0),
            _Key("expect", _choice("finite", "diverged"), None, "finite"),
            _Key("stability_rtol", _float, _positive, 0.01),
        ),
        columns=("x", "mc_variance", "expected_variance", "z", "pass"),
        column_doc=(
            "x                  spatial node of the wall-variance check\n"
            "mc_variance        Monte Carlo variance of the boundary-driven solution\n"
            "expected_variance  exact variance via the integrand norm of the kernel\n"
            "z                  (mc - expected) / (expected * sqrt(2/n_paths))\n"
            "pass               true when |z| <= z_max"
        ),
        runner=_run_spde_boundary,
    )
)

_register(
    Experiment(
        name="threshold-sweep",
        blurb="existence verdicts across a fractional-power grid",
        required=(
            _Key("hurst", _floats, _nonempty_unit_grid),
            _Key("alpha", _floats, _nonempty_grid),
            _Key("m", _int, _ge(1)),
        ),
        optional=(
            _Key("length", _float, _positive, 1.0),
            _Key("truncation", _int, _ge(8), 64),
            _Key("t0", _float, _positive, 1.0),
            _Key("p", _float, _ge(1.0), 2.0),
            _Key("sigma", _float, _positive, 1.0),
            _Key("doublings", _int, _ge(1), 3),
            _Key("margin", _float, _ge(0.0), 0.005),
            _Key("n_x", _int, _ge(4), 64),
        ),
        columns=("H", "alpha", "threshold", "gamma_norm", "diverged", "pass"),
        column_doc=(
            "H           Hurst parameter of the driving noise\n"
            "alpha       fractional power applied to the operator weights\n"
            "threshold   H - 1/(4m), where the mode series stops converging\n"
            "gamma_norm  truncated value of the solution-norm series\n"
            "diverged    detector verdict for the series\n"
            "pass        true when the verdict matches the side of the threshold\n"
            "            (rows within margin of the threshold pass unconditionally)"
        ),
        runner=_run_threshold_sweep,
    )
)


# ---------------------------------------------------------------------------
# documentation text (kept stable; README quotes it verbatim)


def list_experiments_text() -> str:
    """Three lines per kind: name + blurb, required keys, optional keys."""
    lines = []
    for exp in EXPERIMENTS.values():
        req = ["config_version", "kind", "seed"] + [k.name for k in exp.required]
        opt = [k.name for k in exp.optional] + ["out_dir"]
        lines.append(f"{exp.name:<17} {exp.blurb}")
        lines.append(f"  required: {', '.join(req)}")
        lines.append(f"  optional: {', '.join(opt)}")
    return "\n".join(lines)


def column_docs_text() -> str:
    """Per-kind documentation of every results.csv column."""
    blocks = []
    for exp in EXPERIMENTS.values():
        body = "\n".join("  " + line for line in exp.column_doc.splitlines())
        blocks.append(f"{exp.name} results.csv:\n{body}")
    return "\n\n".join(blocks)
