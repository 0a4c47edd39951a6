"""Per-point evaluators for each CLI experiment.

Every experiment exposes a fixed column list and a top-level ``evaluate``
function that maps one grid point to one row, so points can be shipped to a
process pool.  Recoverable failures turn into rows with the ``error`` column
set and the numeric columns left at zero.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import fock, gadgets, kerr, states, teleport
from .config import SweepConfig, expand_grid
from .errors import ConfigError, HybridTeleportError
from .teleport import MeasurementModel, UnknownQubit

COLUMNS = {
    "teleport-fidelity": ["theta", "phi", "alpha", "f_quantum", "f_classical", "f_dv_classical", "error"],
    "teleport-fidelity+sim": [
        "theta", "phi", "alpha", "f_quantum", "f_classical", "f_dv_classical", "f_quantum_sim", "error",
    ],
    "bsm-stats": [
        "theta", "phi", "alpha", "p_g_plus", "p_g_minus", "p_e_plus", "p_e_minus", "p_total", "sampled", "error",
    ],
    "verify-ecs": ["alpha", "state", "zz_correlation", "parity_correlation", "fringe_wigner_origin", "verdict", "error"],
    "pauli-x": ["alpha", "trials", "success_probability", "mean_rounds", "failures", "error"],
    "kerr-sweep": [
        "flux", "K_kHz", "omega_tilde", "lambda_F01", "lambda_F12", "lambda_F02", "error",
    ],
    "wigner-grid": ["x", "y", "W", "error"],
}

RECOVERABLE = (HybridTeleportError, ValueError, np.linalg.LinAlgError)


def columns_for(cfg: SweepConfig) -> list[str]:
    if cfg.experiment == "teleport-fidelity" and cfg.options.get("simulate"):
        return COLUMNS["teleport-fidelity+sim"]
    return COLUMNS[cfg.experiment]


def _blank(columns, point, message):
    row = {c: 0.0 for c in columns}
    row.update({k: v for k, v in point.items() if k in row})
    for c in ("sampled", "state", "verdict"):
        if c in row and not isinstance(row[c], str):
            row[c] = ""
    row["error"] = message
    return row


# --- evaluators (top-level so they pickle) -----------------------------------


def _teleport_fidelity(point):
    theta, phi, alpha = point["theta"], point["phi"], point["alpha"]
    rep = teleport.fidelity_report(theta, phi, alpha)
    row = {
        "theta": theta, "phi": phi, "alpha": alpha,
        "f_quantum": rep.f_quantum, "f_classical": rep.f_classical, "f_dv_classical": rep.f_dv_classical,
    }
    if point.get("simulate"):
        row["f_quantum_sim"] = teleport.simulated_fidelity(
            UnknownQubit(theta, phi), alpha, point["dim"] or teleport.default_dim(alpha)
        )
    row["error"] = ""
    return row


def _bsm_stats(point):
    theta, phi, alpha = point["theta"], point["phi"], point["alpha"]
    outs = teleport.simulate(UnknownQubit(theta, phi), alpha, point["dim"], point["model"])
    p = outs.probabilities()
    pick = outs.sample(np.random.default_rng(point["seed"]))
    return {
        "theta": theta, "phi": phi, "alpha": alpha,
        "p_g_plus": p[0], "p_g_minus": p[1], "p_e_plus": p[2], "p_e_minus": p[3], "p_total": p.sum(),
        "sampled": f"{pick.qubit}{'+' if pick.cavity_sign > 0 else '-'}", "error": "",
    }


def _verify_ecs(point):
    alpha, which = point["alpha"], point["state"]
    dim = point["dim"] or teleport.default_dim(alpha)
    if which == "ecs":
        state = states.ecs(states.EcsKind.PHI_PLUS, alpha, dim)
    elif which == "mixture":
        state = teleport.classical_channel(alpha, dim)
    else:
        raise ConfigError("options.states", f"unknown state {which!r} (use ecs or mixture)")
    rep = gadgets.verify_ecs(state, alpha, point["model"])
    return {
        "alpha": alpha, "state": which, "zz_correlation": rep.zz_correlation,
        "parity_correlation": rep.parity_correlation, "fringe_wigner_origin": rep.fringe_wigner_origin,
        "verdict": rep.verdict, "error": "",
    }


def _pauli_x(point):
    alpha, trials, max_rounds = point["alpha"], point["trials"], point["max_rounds"]
    dim = point["dim"]
    table = gadgets.round_probabilities(gadgets.build_ghz(alpha, dim))
    rng = np.random.default_rng(point["seed"])
    rounds, failures = [], 0
    for _ in range(trials):
        try:
            r, _ = gadgets.pauli_x_until_success(alpha, max_rounds, rng=rng, table=table)
            rounds.append(r)
        except gadgets.MaxRoundsExceeded:
            failures += 1
    mean = float(np.mean(rounds)) if rounds else 0.0
    row = {
        "alpha": alpha, "trials": trials,
        "success_probability": sum(p for (la, lx), (p, _) in table.items() if la != lx),
        "mean_rounds": mean, "failures": failures, "error": "",
    }
    if failures:
        row["error"] = f"MaxRoundsExceeded: {failures} of {trials} trials hit {max_rounds} rounds"
    return row


EVALUATORS = {
    "teleport-fidelity": _teleport_fidelity,
    "bsm-stats": _bsm_stats,
    "verify-ecs": _verify_ecs,
    "pauli-x": _pauli_x,
}


def evaluate(task):
    name, columns, point = task
    try:
        row = EVALUATORS[name](point)
    except RECOVERABLE as exc:
        return _blank(columns, point, f"{type(exc).__name__}: {exc}")
    return {c: row[c] for c in columns}


# --- point generation ---------------------------------------------------------


def _seeds(seed: int, count: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _option(cfg, key, default, kind):
    value = cfg.options.get(key, default)
    if kind is int and (isinstance(value, bool) or not isinstance(value, int) or value < 1):
        raise ConfigError(f"options.{key}", "must be a positive integer")
    if kind is float:
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"options.{key}", "must be a number") from None
    return value


def points_for(cfg: SweepConfig) -> list[dict]:
    common = {"dim": cfg.fock_dim, "model": MeasurementModel(cfg.measurement_model)}
    exp = cfg.experiment
    if exp in ("teleport-fidelity", "bsm-stats"):
        grid = itertools.product(cfg.grid("alpha"), cfg.grid("theta"), cfg.grid("phi"))
        pts = [
            dict(common, alpha=float(a), theta=float(t), phi=float(p), simulate=bool(cfg.options.get("simulate")))
            for a, t, p in grid
        ]
    elif exp == "verify-ecs":
        which = cfg.options.get("states", ["ecs", "mixture"])
        if not isinstance(which, list) or not which:
            raise ConfigError("options.states", "must be a non-empty list")
        if set(which) - {"ecs", "mixture"}:
            raise ConfigError("options.states", "entries must be 'ecs' or 'mixture'")
        pts = [dict(common, alpha=float(a), state=s) for a in cfg.grid("alpha") for s in which]
    elif exp == "pauli-x":
        trials = _option(cfg, "trials", 10000, int)
        max_rounds = _option(cfg, "max_rounds", 64, int)
        pts = [dict(common, alpha=float(a), trials=trials, max_rounds=max_rounds) for a in cfg.grid("alpha")]
    else:
        raise ConfigError("experiment", f"{exp} has no point-wise evaluator")
    for pt, s in zip(pts, _seeds(cfg.seed, len(pts))):
        pt["seed"] = s
    return pts


# --- kerr sweep (already parallel in the library) ------------------------------


def _kerr_rows(cfg: SweepConfig, jobs: int) -> list[dict]:
    opts = cfg.options
    mode = opts.get("calibration", "derived")
    if mode not in ("derived", "explicit"):
        raise ConfigError("options.calibration", "must be 'derived' or 'explicit'")
    cavity = _option(cfg, "cavity_freq", 9.2, float)
    nmax = _option(cfg, "n_photon_max", 4, int)
    if nmax < 4:
        raise ConfigError("options.n_photon_max", "must be at least 4")
    try:
        fp = replace(kerr.FluxoniumParams(), **opts.get("fluxonium", {}))
        tp = replace(kerr.TransmonParams(), **opts.get("transmon", {}))
    except TypeError as exc:
        raise ConfigError("options.fluxonium/transmon", str(exc)) from None
    cal = kerr.Calibration(mode=mode)
    columns = COLUMNS["kerr-sweep"]
    rows = []
    for pt in kerr.kerr_flux_sweep(fp, tp, cavity, cfg.grid("flux"), cal, nmax, jobs):
        if pt.result is None:
            rows.append(_blank(columns, {"flux": pt.flux}, pt.error))
            continue
        lam = pt.couplings
        rows.append({
            "flux": pt.flux, "K_kHz": pt.result.K, "omega_tilde": pt.result.omega_tilde,
            "lambda_F01": lam.get((0, 1), 0.0), "lambda_F12": lam.get((1, 2), 0.0),
            "lambda_F02": lam.get((0, 2), 0.0), "error": "",
        })
    return rows


def run_rows(cfg: SweepConfig, jobs: int = 1) -> list[dict]:
    """All rows of a validated config, in grid order."""
    if cfg.experiment == "kerr-sweep":
        return _kerr_rows(cfg, jobs)
    if cfg.experiment == "wigner-grid":
        return _wigner_rows(cfg)
    columns = columns_for(cfg)
    tasks = [(cfg.experiment, columns, pt) for pt in points_for(cfg)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(evaluate, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [evaluate(t) for t in tasks]


# --- wigner maps ------------------------------------------------------------------

WIGNER_STATES = ("scs+", "scs-", "vacuum", "coherent", "ecs-conditional", "mixture", "teleport-output")


def wigner_state(kind: str, alpha: float, dim: int | None = None, theta: float = math.pi / 2,
                 phi: float = 0.0, outcome: str = "g+"):
    """Single-cavity state named by ``kind``, as a StateVector or DensityOperator."""
    dim = dim or teleport.default_dim(alpha)
    if kind == "scs+":
        return states.scs(1, alpha, dim)
    if kind == "scs-":
        return states.scs(-1, alpha, dim)
    if kind == "vacuum":
        return states.vacuum(dim, "C")
    if kind == "coherent":
        return fock.coherent_state(alpha, dim)
    if kind == "ecs-conditional":
        return gadgets.verify_parity(states.ecs(states.EcsKind.PHI_PLUS, alpha, dim))[1]
    if kind == "mixture":
        return gadgets.verify_parity(teleport.classical_channel(alpha, dim))[1]
    if kind == "teleport-output":
        if outcome not in ("g+", "g-", "e+", "e-"):
            raise ConfigError("outcome", "must be one of g+, g-, e+, e-")
        key = (outcome[0], 1 if outcome[1] == "+" else -1)
        return teleport.simulate(UnknownQubit(theta, phi), alpha, dim).get(*key).post_state
    raise ConfigError("state", f"unknown state {kind!r} (have {', '.join(WIGNER_STATES)})")


def _wigner_rows(cfg: SweepConfig) -> list[dict]:
    # long format: one row per (x, y) point, y outermost
    opts = cfg.options
    alpha = _option(cfg, "alpha", 2.0, float)
    xs = expand_grid(opts.get("x", {"start": -3, "stop": 3, "step": 0.15}), "options.x")
    ys = expand_grid(opts.get("y", opts.get("x", {"start": -3, "stop": 3, "step": 0.15})), "options.y")
    if xs.size == 0 or ys.size == 0:
        raise ConfigError("options.x", "grid is empty")
    if cfg.fock_dim is not None:
        fock.check_truncation(alpha, cfg.fock_dim)
    rho = wigner_state(
        opts.get("state", "scs+"), alpha, cfg.fock_dim, _option(cfg, "theta", math.pi / 2, float),
        _option(cfg, "phi", 0.0, float), opts.get("outcome", "g+"),
    )
    grid = fock.wigner_grid(rho, xs, ys)
    return [
        {"x": float(x), "y": float(y), "W": float(grid[i, j]), "error": ""}
        for i, y in enumerate(ys) for j, x in enumerate(xs)
    ]
