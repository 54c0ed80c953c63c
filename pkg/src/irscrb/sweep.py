"""Config-driven parameter sweeps over the estimation bounds.

A sweep varies one system quantity over a value list, draws seeded channel
(and fading) realizations per point, evaluates one bounding scheme and
averages over trials.  Draw seeds depend only on ``(seed, trial)``, never on
the swept value or the scheme, so curves over the same seed are paired
point-by-point and dropping a trial leaves the others untouched.

Configuration files are INI-style with three sections; powers are given in
dBm, ratios in dB and angles in degrees, mirroring how the quantities are
usually plotted::

    [system]
    m = 8               ; BS antennas
    n = 8               ; IRS elements
    k = 8               ; IRS sensors
    t = 64              ; probing symbols
    p0_dbm = 30
    wavelength_m = 0.2
    spacing_m = 0.1     ; defaults to wavelength/2
    noise_dbm = -90
    d_bi_m = 60
    d_it_m = 20
    c0_loss_db = 30     ; path loss at the 1 m reference
    alpha_bi = 2.5
    rician_db = 5
    rcs_dbsm = 7

    [scene]
    theta_deg = 60      ; clamped to +-89 degrees

    [sweep]
    target = point      ; point | extended
    vary = P0           ; P0 | M | N | K | beta_BI | W_I | Q_tot
    values = 10, 20, 30 ; dBm for P0, dB for beta_BI, plain otherwise
    schemes = proposed_ao, random_phase
    trials = 3
    seed = 1234
    average_alpha = true
    alpha_draws = 50
    q_tot = 600         ; only for W_I / Q_tot sweeps
    w_i = 1
    w_s = 1

Sweeps over ``W_I`` or ``Q_tot`` first solve the element/sensor allocation
for each value, round the continuous split to integers and then evaluate
the scheme with those counts.

The CSV contract: header ``vary,value,scheme,crb,crb_db,trials,status,
wall_ms``, one row per (value, scheme), floats in full-precision scientific
notation, infinite bounds spelled ``inf`` with status ``rank_deficient``,
UTF-8 with LF line endings.  All columns except ``wall_ms`` are
deterministic for a fixed config and seed.

Set ``IRSCRB_WORKERS`` to evaluate independent (value, trial) items in a
thread pool; results are merged in deterministic order either way.
"""

from __future__ import annotations

import configparser
import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .allocation import allocate_optimal
from .ao import ao_minimize_crb, gaussian_randomization, irs_subproblem, transmit_subproblem
from .arrays import target_steering
from .channel import rician_channel
from .config import (SystemConfig, db_to_linear, dbm_to_watt, make_rng,
                     point_scene)
from .extended import (EstimabilityError, FullyPassiveConfig, crb_extended_iso,
                       crb_extended_opt, crb_fully_passive,
                       optimal_transmit_extended)
from .pointcrb import crb_point_closed, single_antenna_optimum

POINT_SCHEMES = ("proposed_ao", "random_phase", "isotropic_tx",
                 "single_antenna_closed")
EXTENDED_SCHEMES = ("extended_opt", "extended_iso", "fully_passive")
VARY_CHOICES = ("P0", "M", "N", "K", "beta_BI", "W_I", "Q_tot")

CSV_HEADER = ("vary", "value", "scheme", "crb", "crb_db", "trials", "status",
              "wall_ms")

# stream tags for the per-trial substreams
_CHANNEL, _AO, _PHASE, _RANDOMIZE, _ALPHA, _RETURN = range(6)


def reference_config(**overrides) -> SystemConfig:
    """Desk-scale default setup (theta is a scene parameter, not here)."""
    defaults = dict(
        M=4, N=4, K=4, T=64,
        P0=dbm_to_watt(30.0),
        wavelength=0.2,
        spacing=0.1,
        noise_power=dbm_to_watt(-90.0),
        d_bi=60.0, d_it=20.0,
        c0=db_to_linear(-30.0),
        alpha_bi=2.5,
        rician_factor=db_to_linear(5.0),
        rcs=db_to_linear(7.0),
    )
    defaults.update(overrides)
    return SystemConfig(**defaults)


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    theta: float                    # rad
    vary: str
    values: tuple[float, ...]       # file-level units (dBm / dB / counts)
    scheme: str
    trials: int = 1
    seed: int = 0
    average_alpha: bool = True
    alpha_draws: int = 50
    q_tot: float = 600.0            # allocation-driven sweeps only
    w_i: float = 1.0
    w_s: float = 1.0
    ao_samples: int = 200

    def __post_init__(self):
        if self.vary not in VARY_CHOICES:
            raise ValueError(f"unknown vary {self.vary!r}; choose from {VARY_CHOICES}")
        if self.scheme not in POINT_SCHEMES + EXTENDED_SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if len(self.values) == 0:
            raise ValueError("value list must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.vary in ("W_I", "Q_tot") and self.scheme in EXTENDED_SCHEMES:
            raise ValueError("allocation sweeps apply to the point-target model")

    @property
    def target(self) -> str:
        return "point" if self.scheme in POINT_SCHEMES else "extended"


@dataclass(frozen=True)
class SweepRecord:
    vary: str
    value: float
    scheme: str
    crb_mean: float
    crb_db: float
    trials_used: int
    wall_ms: float
    status: str


def _config_for(spec: SweepSpec, value: float) -> SystemConfig:
    base = spec.base
    if spec.vary == "P0":
        return replace(base, P0=dbm_to_watt(value))
    if spec.vary == "M":
        return replace(base, M=int(value))
    if spec.vary == "N":
        return replace(base, N=int(value))
    if spec.vary == "K":
        return replace(base, K=int(value))
    if spec.vary == "beta_BI":
        return replace(base, rician_factor=db_to_linear(value))
    if spec.vary == "W_I":
        split = allocate_optimal(spec.q_tot, value, spec.w_s)
    else:  # Q_tot
        split = allocate_optimal(value, spec.w_i, spec.w_s)
    n = max(1, round(split.n_cont))
    k = max(2, round(split.k_cont))
    return replace(base, N=n, K=k)


def _point_unit_crb(spec: SweepSpec, cfg: SystemConfig, trial: int) -> float:
    """Bound for a unit small-scale draw (alpha0 = 1)."""
    scene = point_scene(cfg, spec.theta, alpha0=1.0 + 0j)
    ch = rician_channel(cfg, seed=_derive_seed(spec.seed, trial, _CHANNEL))
    if spec.scheme == "proposed_ao":
        res = ao_minimize_crb(scene, ch.G, cfg,
                              samples=spec.ao_samples,
                              seed=_derive_seed(spec.seed, trial, _AO))
        return res.crb
    a = target_steering(scene.theta, cfg.N, cfg.spacing, cfg.wavelength)
    if spec.scheme == "random_phase":
        rng = make_rng(spec.seed, trial, _PHASE)
        v = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cfg.N))
        r_x = transmit_subproblem(np.outer(v, v.conj()), a, ch.G, cfg.K, cfg.P0)
        return crb_point_closed(scene, r_x, v, ch.G, cfg)
    if spec.scheme == "isotropic_tx":
        r_iso = (cfg.P0 / cfg.M) * np.eye(cfg.M, dtype=complex)
        lifted = irs_subproblem(r_iso, a, ch.G, cfg.K)
        profile = gaussian_randomization(lifted, r_iso, a, ch.G, cfg.K,
                                         spec.ao_samples,
                                         _derive_seed(spec.seed, trial, _RANDOMIZE))
        return crb_point_closed(scene, r_iso, profile.v, ch.G, cfg)
    # single_antenna_closed
    if cfg.M != 1:
        raise ValueError("single_antenna_closed requires a config with M = 1")
    _, _, crb = single_antenna_optimum(scene, ch.h_bi, cfg)
    return crb


def _alpha_factor(spec: SweepSpec, trial: int) -> float:
    """Scale from the unit-draw bound to the fading-aware bound.

    The bound is exactly proportional to 1/|alpha0|^2, so averaging over
    fading draws multiplies the unit-draw bound by mean(1/|alpha0|^2).
    """
    rng = make_rng(spec.seed, trial, _ALPHA)
    draws = spec.alpha_draws if spec.average_alpha else 1
    a0 = (rng.standard_normal(draws) + 1j * rng.standard_normal(draws)) / np.sqrt(2.0)
    return float(np.mean(1.0 / np.abs(a0) ** 2))


def _extended_crb(spec: SweepSpec, cfg: SystemConfig, trial: int) -> float:
    ch = rician_channel(cfg, seed=_derive_seed(spec.seed, trial, _CHANNEL))
    if spec.scheme == "extended_opt":
        return crb_extended_opt(ch.G, cfg.P0, cfg.K, cfg.T, cfg.noise_power).crb
    if spec.scheme == "extended_iso":
        return crb_extended_iso(ch.G, cfg.P0, cfg.M, cfg.K, cfg.T,
                                cfg.noise_power).crb
    # fully_passive reference: echoes return through the IRS to K BS
    # receive antennas; the transmit side reuses the optimal covariance.
    back_cfg = replace(cfg, M=cfg.K)
    g_r = rician_channel(back_cfg, seed=_derive_seed(spec.seed, trial, _RETURN)).G.T
    fp = FullyPassiveConfig(m_r=cfg.K, g_r=g_r)
    r_x = optimal_transmit_extended(ch.G, cfg.P0)
    return crb_fully_passive(r_x, ch.G, fp, cfg.T, cfg.noise_power)


def _derive_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_trial(spec: SweepSpec, cfg: SystemConfig, trial: int) -> tuple[float, str]:
    try:
        if spec.target == "point":
            crb = _point_unit_crb(spec, cfg, trial)
            if np.isfinite(crb):
                crb *= _alpha_factor(spec, trial)
        else:
            crb = _extended_crb(spec, cfg, trial)
    except EstimabilityError:
        return float("inf"), "rank_deficient"
    except (ArithmeticError, RuntimeError) as exc:
        return float("nan"), f"error:{type(exc).__name__}"
    if not np.isfinite(crb):
        return float("inf"), "rank_deficient"
    return float(crb), "ok"


def run_sweep(spec: SweepSpec) -> list[SweepRecord]:
    """Evaluate the scheme over all (value, trial) items and average."""
    workers = int(os.environ.get("IRSCRB_WORKERS", "1"))
    configs = [_config_for(spec, value) for value in spec.values]

    value_ms = {}
    if workers > 1:
        items = [(vi, trial) for vi in range(len(spec.values))
                 for trial in range(spec.trials)]
        start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                (vi, trial): pool.submit(_run_trial, spec, configs[vi], trial)
                for vi, trial in items
            }
            results = {key: fut.result() for key, fut in futures.items()}
        elapsed = (time.perf_counter() - start) * 1e3
        value_ms = {vi: elapsed / len(spec.values) for vi in range(len(spec.values))}
    else:
        results = {}
        for vi in range(len(spec.values)):
            tic = time.perf_counter()
            for trial in range(spec.trials):
                results[(vi, trial)] = _run_trial(spec, configs[vi], trial)
            value_ms[vi] = (time.perf_counter() - tic) * 1e3

    records = []
    for vi, value in enumerate(spec.values):
        crbs = [results[(vi, trial)][0] for trial in range(spec.trials)]
        statuses = [results[(vi, trial)][1] for trial in range(spec.trials)]
        if any(s.startswith("error") for s in statuses):
            status = next(s for s in statuses if s.startswith("error"))
            mean = float("nan")
        elif any(s == "rank_deficient" for s in statuses):
            status = "rank_deficient"
            mean = float("inf")
        else:
            status = "ok"
            mean = float(np.mean(crbs))
        crb_db = 10.0 * np.log10(mean) if mean > 0 else float("nan")
        records.append(SweepRecord(
            vary=spec.vary, value=float(value), scheme=spec.scheme,
            crb_mean=mean, crb_db=float(crb_db), trials_used=spec.trials,
            wall_ms=value_ms[vi], status=status,
        ))
    return records


# -- CSV ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    if np.isnan(x):
        return "nan"
    return f"{x:.17e}"


def emit_csv(records: list[SweepRecord], path: str) -> None:
    """Write records under the documented CSV contract."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for rec in records:
            fh.write(",".join([
                rec.vary,
                _fmt(rec.value),
                rec.scheme,
                _fmt(rec.crb_mean),
                _fmt(rec.crb_db),
                str(rec.trials_used),
                rec.status,
                _fmt(rec.wall_ms),
            ]) + "\n")


def read_csv(path: str) -> list[SweepRecord]:
    """Parse a file produced by :func:`emit_csv`."""
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for row in reader:
            records.append(SweepRecord(
                vary=row[0], value=float(row[1]), scheme=row[2],
                crb_mean=float(row[3]), crb_db=float(row[4]),
                trials_used=int(row[5]), status=row[6], wall_ms=float(row[7]),
            ))
    return records


# -- config files -------------------------------------------------------------

def load_config(path: str) -> tuple[SystemConfig, float, list[SweepSpec]]:
    """Read an INI config; returns (system, theta, one spec per scheme)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(path)

    sys_sec = parser["system"] if parser.has_section("system") else {}
    wavelength = float(sys_sec.get("wavelength_m", 0.2))
    base = reference_config(
        M=int(sys_sec.get("m", 4)),
        N=int(sys_sec.get("n", 4)),
        K=int(sys_sec.get("k", 4)),
        T=int(sys_sec.get("t", 64)),
        P0=dbm_to_watt(float(sys_sec.get("p0_dbm", 30.0))),
        wavelength=wavelength,
        spacing=float(sys_sec.get("spacing_m", wavelength / 2.0)),
        noise_power=dbm_to_watt(float(sys_sec.get("noise_dbm", -90.0))),
        d_bi=float(sys_sec.get("d_bi_m", 60.0)),
        d_it=float(sys_sec.get("d_it_m", 20.0)),
        c0=db_to_linear(-float(sys_sec.get("c0_loss_db", 30.0))),
        alpha_bi=float(sys_sec.get("alpha_bi", 2.5)),
        rician_factor=db_to_linear(float(sys_sec.get("rician_db", 5.0))),
        rcs=db_to_linear(float(sys_sec.get("rcs_dbsm", 7.0))),
    )

    scene_sec = parser["scene"] if parser.has_section("scene") else {}
    theta_deg = float(scene_sec.get("theta_deg", 60.0))
    theta_deg = float(np.clip(theta_deg, -89.0, 89.0))
    theta = float(np.deg2rad(theta_deg))

    specs: list[SweepSpec] = []
    if parser.has_section("sweep"):
        sweep_sec = parser["sweep"]
        values = tuple(float(x) for x in sweep_sec["values"].split(","))
        schemes = [s.strip() for s in sweep_sec["schemes"].split(",")]
        for scheme in schemes:
            specs.append(SweepSpec(
                base=base,
                theta=theta,
                vary=sweep_sec.get("vary", "P0").strip(),
                values=values,
                scheme=scheme,
                trials=int(sweep_sec.get("trials", 1)),
                seed=int(sweep_sec.get("seed", 0)),
                average_alpha=sweep_sec.get("average_alpha", "true").strip().lower()
                in ("1", "true", "yes", "on"),
                alpha_draws=int(sweep_sec.get("alpha_draws", 50)),
                q_tot=float(sweep_sec.get("q_tot", 600.0)),
                w_i=float(sweep_sec.get("w_i", 1.0)),
                w_s=float(sweep_sec.get("w_s", 1.0)),
                ao_samples=int(sweep_sec.get("ao_samples", 200)),
            ))
        target = sweep_sec.get("target")
        if target is not None:
            for spec in specs:
                if spec.target != target.strip():
                    raise ValueError(
                        f"scheme {spec.scheme!r} does not match target {target!r}"
                    )
    return base, theta, specs
