"""Scenario runner: configs in, CSV artifacts and audit summaries out.

Each run consumes one YAML config describing a scenario ``kind`` from
{TwoLevelWW, MarkovLimit, GenericSystem, JaynesCummings, PlateauFigure,
EntropyScan}, dispatches to the solver modules and writes the artifacts
into the output directory together with ``summary.json``, a
machine-readable audit report.  Dimensionful config keys carry their
unit in the name (``dt_time``, ``center_per_time``) so rescaled inputs
cannot be mixed up silently.

Exit codes: 0 all audits within tolerance, 1 an audit exceeded its
tolerance, 2 config or comparison-input error, 3 solver failure.

``compare`` diffs the artifacts of two finished runs column by column;
grids may differ by an integer subsampling factor, anything else is a
shape mismatch.  Identical configs reproduce byte-identical artifacts:
every summation order is fixed and nothing depends on wall-clock state.

Thread demand is forwarded through the standard BLAS/OpenMP environment
variables; NMKRAUS_THREADS overrides ``--threads``.  Pools spun up
before the override applies keep their size.
"""

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from . import dynamics as dy
from . import jaynescummings as jc
from . import kraus as kr
from . import reservoir as rv

_FMT = "%.16e"
_MISSING = object()


class ConfigError(ValueError):
    """Config rejected; the message names the offending field path."""


class ShapeMismatchError(ValueError):
    """Compared runs do not share kind, columns, or a nested grid."""


# ---------------------------------------------------------------------------
# config access with field paths


def _fetch(cfg, path, default=_MISSING):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is _MISSING:
                raise ConfigError(f"{path} is required")
            return default
        node = node[part]
    return node


def _num(cfg, path, default=_MISSING):
    v = _fetch(cfg, path, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path} must be a number")
    return float(v)


def _pos(cfg, path, default=_MISSING):
    v = _num(cfg, path, default)
    if v <= 0:
        raise ConfigError(f"{path} must be positive")
    return v


def _nonneg(cfg, path, default=_MISSING):
    v = _num(cfg, path, default)
    if v < 0:
        raise ConfigError(f"{path} must be nonnegative")
    return v


def _int(cfg, path, default=_MISSING, minimum=0):
    v = _fetch(cfg, path, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path} must be an integer")
    if v < minimum:
        raise ConfigError(f"{path} must be >= {minimum}")
    return v


def _str(cfg, path, default=_MISSING):
    v = _fetch(cfg, path, default)
    if not isinstance(v, str):
        raise ConfigError(f"{path} must be a string")
    return v


def _list(cfg, path):
    v = _fetch(cfg, path)
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path} must be a nonempty list")
    return v


def _build_spectral(cfg, base, scale2=1.0):
    fam = _str(cfg, "spectral.family").lower()
    try:
        if fam == "lorentzian":
            return rv.SpectralDensity.lorentzian(
                scale2 * _pos(cfg, "spectral.strength_per_time2"),
                _num(cfg, "spectral.center_per_time"),
                _pos(cfg, "spectral.width_per_time"),
            )
        if fam == "flat_window":
            lo = _num(cfg, "spectral.omega_lo_per_time")
            hi = _num(cfg, "spectral.omega_hi_per_time")
            if hi <= lo:
                raise ConfigError(
                    "spectral.omega_hi_per_time must exceed spectral.omega_lo_per_time"
                )
            return rv.SpectralDensity.flat_window(
                scale2 * _nonneg(cfg, "spectral.height_per_time"), lo, hi
            )
        if fam == "tabulated":
            rel = _str(cfg, "spectral.table_path")
            path = base / rel
            if not path.is_file():
                raise ConfigError(f"spectral.table_path: no file at {path}")
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
            if data.shape[1] != 2:
                raise ConfigError(
                    "spectral.table_path must hold two columns omega,g2"
                )
            return rv.SpectralDensity.tabulated(data[:, 0], scale2 * data[:, 1])
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"spectral: {e}") from e
    raise ConfigError(
        "spectral.family must be one of lorentzian, flat_window, tabulated"
    )


def _initial_two_level(cfg, path="initial"):
    rho = np.array(
        [
            [
                _nonneg(cfg, f"{path}.rho11", 0.0),
                _num(cfg, f"{path}.rho21_re", 0.0)
                - 1j * _num(cfg, f"{path}.rho21_im", 0.0),
            ],
            [
                _num(cfg, f"{path}.rho21_re", 0.0)
                + 1j * _num(cfg, f"{path}.rho21_im", 0.0),
                _nonneg(cfg, f"{path}.rho22", 1.0),
            ],
        ]
    )
    try:
        return dy._validate_density(rho, 2)
    except dy.StateValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def _initial_matrix(cfg, dim):
    re = np.asarray(_list(cfg, "initial.rho_re"), dtype=float)
    im = _fetch(cfg, "initial.rho_im", None)
    im = np.zeros_like(re) if im is None else np.asarray(im, dtype=float)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ConfigError(f"initial.rho_re must be a {dim}x{dim} matrix")
    try:
        return dy._validate_density(re + 1j * im, dim)
    except dy.StateValidationError as e:
        raise ConfigError(f"initial: {e}") from e


def _build_basis(cfg):
    try:
        return jc.DressedBasis(
            _num(cfg, "system.atom_omega_1_per_time", 0.0),
            _num(cfg, "system.atom_omega_2_per_time"),
            _pos(cfg, "system.coupling_per_time"),
            _int(cfg, "system.photon_cutoff", minimum=1),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"system: {e}") from e


# ---------------------------------------------------------------------------
# artifacts


def _write_csv(path, columns, arrays):
    data = np.column_stack([np.asarray(a, dtype=float) for a in arrays])
    np.savetxt(
        path, data, fmt=_FMT, delimiter=",", header=",".join(columns), comments=""
    )


def _check(name, value, limit, sense="<="):
    ok = value <= limit if sense == "<=" else value >= limit
    return {
        "name": name,
        "value": float(value),
        "limit": float(limit),
        "sense": sense,
        "passed": bool(ok),
    }


def _conservation_checks(cfg, traj, trace_default=1e-6, eig_default=1e-10):
    trace_tol = _pos(cfg, "audit.trace_tol", trace_default)
    eig_tol = _pos(cfg, "audit.eig_tol", eig_default)
    rep = dy.audit_conservation(traj, trace_tol=trace_tol, eig_tol=eig_tol)
    return [
        _check("trace_max_error", rep.max_trace_error, trace_tol),
        _check("min_eigenvalue", rep.min_eigenvalue, -eig_tol, ">="),
    ]


def _finish(outdir, kind, artifacts, checks):
    summary = {
        "kind": kind,
        "artifacts": artifacts,
        "audits": {
            c["name"]: {k: c[k] for k in ("value", "limit", "sense", "passed")}
            for c in checks
        },
        "passed": all(c["passed"] for c in checks),
    }
    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, fname in artifacts.items():
        print(f"wrote {name}: {outdir / fname}")
    for c in checks:
        state = "pass" if c["passed"] else "FAIL"
        print(
            f"audit {c['name']}: value = {c['value']:.6e}, "
            f"limit {c['sense']} {c['limit']:.3e}: {state}"
        )
    print(f"wrote summary: {outdir / 'summary.json'}")
    return 0 if summary["passed"] else 1


# ---------------------------------------------------------------------------
# scenarios


def _two_level_pieces(cfg, base, scale2=1.0):
    sd = _build_spectral(cfg, base, scale2)
    w1 = _num(cfg, "system.omega_1_per_time", 0.0)
    w2 = _num(cfg, "system.omega_2_per_time")
    if w2 <= w1:
        raise ConfigError("system.omega_2_per_time must exceed system.omega_1_per_time")
    rho0 = _initial_two_level(cfg)
    dt = _pos(cfg, "numerics.dt_time")
    T = _pos(cfg, "numerics.t_final_time")
    if T <= dt:
        raise ConfigError("numerics.t_final_time must exceed numerics.dt_time")
    sys_ = kr.SystemSpec((w1, w2), rv.kernel_table(sd, {(2, 1, 1, 2): 1.0}))
    W = kr.solve_time_domain(sys_, T, dt)
    return sd, sys_, W, dy.two_level_trajectory(sys_, W, rho0), rho0


def _run_two_level_ww(cfg, base, outdir):
    _, _, W, traj, _ = _two_level_pieces(cfg, base)
    m = traj.matrices
    _write_csv(
        outdir / "trajectory.csv",
        ["t_time", "rho11", "rho22", "rho21_re", "rho21_im"],
        [traj.times, m[:, 0, 0].real, m[:, 1, 1].real, m[:, 1, 0].real, m[:, 1, 0].imag],
    )
    checks = _conservation_checks(cfg, traj)
    checks.append(
        _check("volterra_residual", W.max_residual, _pos(cfg, "audit.solver_tol", 1e-8))
    )
    return {"trajectory": "trajectory.csv"}, checks


def _run_markov_limit(cfg, base, outdir):
    lam = _pos(cfg, "coupling.scale")
    sd, sys_, W, traj, rho0 = _two_level_pieces(cfg, base, scale2=lam * lam)
    w21 = sys_.energies[1] - sys_.energies[0]
    gamma = math.pi * float(sd.weight(w21))
    if gamma <= 0:
        raise ConfigError("spectral weight vanishes at the transition frequency")
    obar = _num(cfg, "channel.omega_bar_per_time", 0.0)
    chan = dy.markovian_channel(gamma, obar, rho0, traj.times)
    chan_dev = float(np.max(np.abs(traj.matrices - chan)))
    M, N = dy.channel_pair(gamma, obar, traj.times)
    Mh = np.conj(np.swapaxes(M, -1, -2))
    Nh = np.conj(np.swapaxes(N, -1, -2))
    ident = float(np.max(np.abs(Mh @ M + Nh @ N - np.eye(2))))

    T = traj.times[-1]
    mask = (traj.times >= 0.25 * T) & (traj.times <= 0.75 * T)
    p2 = traj.matrices[:, 1, 1].real
    if not np.all(p2[mask] > 0):
        raise ValueError("excited population not positive over the fit window")
    slope = np.polyfit(traj.times[mask], np.log(p2[mask]), 1)[0]
    fitted = -0.5 * float(slope)
    rate_err = abs(fitted - gamma) / gamma

    m = traj.matrices
    _write_csv(
        outdir / "trajectory.csv",
        ["t_time", "rho11", "rho22", "rho21_re", "rho21_im", "channel_rho22"],
        [
            traj.times,
            m[:, 0, 0].real,
            m[:, 1, 1].real,
            m[:, 1, 0].real,
            m[:, 1, 0].imag,
            chan[:, 1, 1].real,
        ],
    )
    checks = _conservation_checks(cfg, traj)
    checks += [
        _check("rate_rel_error", rate_err, _pos(cfg, "audit.rate_rel_tol", 0.05)),
        _check("channel_max_dev", chan_dev, _pos(cfg, "audit.channel_dev_tol", 0.05)),
        _check("channel_identity", ident, _pos(cfg, "audit.identity_tol", 1e-12)),
    ]
    return {"trajectory": "trajectory.csv"}, checks


def _run_generic_system(cfg, base, outdir):
    sd = _build_spectral(cfg, base)
    en = _list(cfg, "system.energies_per_time")
    try:
        en = [float(x) for x in en]
    except (TypeError, ValueError):
        raise ConfigError("system.energies_per_time must be numbers") from None
    rule = {}
    for i, slot in enumerate(_list(cfg, "system.slots")):
        if not isinstance(slot, dict):
            raise ConfigError(f"system.slots[{i}] must be a mapping")
        key = tuple(
            _int(slot, name, minimum=1)
            for name in ("row", "mid_out", "mid_in", "col")
        )
        rule[key] = complex(
            _num(slot, "weight_re"), _num(slot, "weight_im", 0.0)
        )
    try:
        sys_ = kr.SystemSpec(tuple(en), rv.kernel_table(sd, rule))
    except (ValueError, rv.IndexCollisionError) as e:
        raise ConfigError(f"system: {e}") from e
    rho0 = _initial_matrix(cfg, sys_.dim)
    dt = _pos(cfg, "numerics.dt_time")
    T = _pos(cfg, "numerics.t_final_time")
    if T <= dt:
        raise ConfigError("numerics.t_final_time must exceed numerics.dt_time")

    W = kr.solve_time_domain(sys_, T, dt)
    xi = dy.solve_bitemporal(sys_, W, rho0, T, dt)
    traj = dy.extract_density(xi)
    mins = np.linalg.eigvalsh(traj.matrices)[:, 0]
    cols = ["t_time"] + [f"pop_{k}" for k in range(1, sys_.dim + 1)]
    arrays = [traj.times] + [
        traj.matrices[:, k, k].real for k in range(sys_.dim)
    ]
    _write_csv(
        outdir / "trajectory.csv",
        cols + ["trace_re", "min_eigenvalue"],
        arrays + [np.trace(traj.matrices, axis1=1, axis2=2).real, mins],
    )
    solver_tol = _pos(cfg, "audit.solver_tol", 1e-8)
    checks = _conservation_checks(cfg, traj)
    checks += [
        _check("volterra_residual", W.max_residual, solver_tol),
        _check("bitemporal_residual", xi.max_residual, solver_tol),
        _check("hermiticity_residual", traj.herm_residual, 1e-10),
    ]
    return {"trajectory": "trajectory.csv"}, checks


def _run_jaynes_cummings(cfg, base, outdir):
    basis = _build_basis(cfg)
    sd = _build_spectral(cfg, base)
    p = _int(cfg, "initial.photon_number", minimum=0)
    if p > basis.n_max:
        raise ConfigError("initial.photon_number exceeds system.photon_cutoff")
    init = jc.JCInitialState(_initial_two_level(cfg), p)
    solver = _str(cfg, "numerics.solver", "series")
    if solver not in ("series", "bitemporal"):
        raise ConfigError("numerics.solver must be series or bitemporal")
    T = _pos(cfg, "numerics.t_final_time")
    n_times = _int(cfg, "numerics.n_times", minimum=2)
    times = np.linspace(0.0, T, n_times)

    if solver == "series":
        r_max = _int(cfg, "numerics.r_max", minimum=0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = jc.atomic_population_series(basis, sd, init, times, r_max)
        excited, ground = res.excited, res.ground
        checks = [
            _check(
                "truncation_estimate",
                res.truncation_estimate,
                _pos(cfg, "audit.truncation_tol", 2e-2),
            ),
            _check("population_bound", float(np.max(excited)), 1.0 + 1e-9),
        ]
    else:
        dt = T / (n_times - 1)
        sysj = jc.build_dressed_system(basis, sd)
        W = kr.solve_time_domain(sysj, T, dt)
        rho0 = jc.dressed_initial_state(basis, init)
        xi = dy.solve_bitemporal(sysj, W, rho0, T, dt)
        traj = dy.extract_density(xi)
        red = jc.reduce_atomic(basis, traj.matrices)
        excited, ground = red[:, 1, 1].real, red[:, 0, 0].real
        solver_tol = _pos(cfg, "audit.solver_tol", 1e-8)
        checks = _conservation_checks(cfg, traj)
        checks += [
            _check("volterra_residual", W.max_residual, solver_tol),
            _check("bitemporal_residual", xi.max_residual, solver_tol),
        ]
    _write_csv(
        outdir / "trajectory.csv",
        ["t_time", "excited", "ground"],
        [times, excited, ground],
    )
    return {"trajectory": "trajectory.csv"}, checks


def _run_plateau_figure(cfg, base, outdir):
    ps = _list(cfg, "photon_numbers")
    if any(isinstance(p, bool) or not isinstance(p, int) or p < 1 for p in ps):
        raise ConfigError("photon_numbers must be integers >= 1")
    r11 = _nonneg(cfg, "initial.rho11", 0.0)
    r22 = _nonneg(cfg, "initial.rho22", 1.0)
    if abs(r11 + r22 - 1.0) > 1e-9:
        raise ConfigError("initial populations must sum to 1")
    tau_max = _pos(cfg, "grid.tau_max", 160.0)
    dtau = _pos(cfg, "grid.dtau", 0.1)
    taus = np.arange(0.0, tau_max + 0.5 * dtau, dtau)
    plateau_tol = _pos(cfg, "audit.plateau_tol", 1e-2)
    tail_tol = _pos(cfg, "audit.tail_tol", 1e-2)

    cols, arrays, checks = ["tau"], [taus], []
    for p in ps:
        tail_start = p + 5.0 * math.sqrt(p)
        if tau_max < tail_start + 1.0:
            raise ConfigError(
                f"grid.tau_max must reach p + 5 sqrt(p) + 1 = {tail_start + 1.0:.1f} "
                f"for photon_numbers entry {p}"
            )
        F = jc.plateau_oracle(jc.PlateauParams(taus, p, r11, r22))
        cols.append(f"F_p{p}")
        arrays.append(F)
        # settled stretch starts past the first few scaled lifetimes; the
        # onset analysis lives with the acceptance records
        window = (taus >= 5.5) & (taus <= p - 3.0 * math.sqrt(p))
        if np.any(window):
            checks.append(
                _check(
                    f"plateau_dev_p{p}",
                    float(np.max(np.abs(F[window] - 0.5))),
                    plateau_tol,
                )
            )
        checks.append(
            _check(f"tail_max_p{p}", float(np.max(F[taus >= tail_start])), tail_tol)
        )
    _write_csv(outdir / "figure.csv", cols, arrays)
    return {"figure": "figure.csv"}, checks


def _run_entropy_scan(cfg, base, outdir):
    basis = _build_basis(cfg)
    sd = _build_spectral(cfg, base)
    alpha = _num(cfg, "exponents.alpha")
    beta = _num(cfg, "exponents.beta")
    lams = _list(cfg, "couplings")
    rho_a = None
    if _fetch(cfg, "initial", None) is not None:
        rho_a = _initial_two_level(cfg)
    try:
        rows = jc.entropy_limit_scan(
            basis,
            sd,
            alpha,
            beta,
            lams,
            p_tilde=_pos(cfg, "scaling.p_tilde"),
            t_tilde=_pos(cfg, "scaling.t_tilde", 1.0),
            rho_a=rho_a,
        )
    except jc.EntropyScalingError as e:
        raise ConfigError(f"exponents: {e}") from e
    except ValueError as e:
        raise ConfigError(str(e)) from e
    _write_csv(
        outdir / "scan.csv",
        ["lam", "photon_number", "tau", "excited", "distance", "coherence_bound"],
        [
            [r.lam for r in rows],
            [r.photon_number for r in rows],
            [r.tau for r in rows],
            [r.excited for r in rows],
            [r.distance for r in rows],
            [r.coherence_bound for r in rows],
        ],
    )
    checks = []
    if len(rows) >= 2:
        drop = min(a.distance - b.distance for a, b in zip(rows, rows[1:]))
        checks.append(_check("min_distance_drop", drop, 1e-12, ">="))
    return {"scan": "scan.csv"}, checks


_SCENARIOS = {
    "TwoLevelWW": _run_two_level_ww,
    "MarkovLimit": _run_markov_limit,
    "GenericSystem": _run_generic_system,
    "JaynesCummings": _run_jaynes_cummings,
    "PlateauFigure": _run_plateau_figure,
    "EntropyScan": _run_entropy_scan,
}


# ---------------------------------------------------------------------------
# comparison


def _load_artifact(summary_path, fname):
    path = summary_path.parent / fname
    if not path.is_file():
        raise ShapeMismatchError(f"artifact file missing: {path}")
    table = np.genfromtxt(path, delimiter=",", names=True)
    if table.dtype.names is None:
        raise ShapeMismatchError(f"no header row in {path}")
    return {name: np.atleast_1d(table[name]) for name in table.dtype.names}


def _subsample(key_a, key_b):
    na, nb = key_a.size, key_b.size
    if na == nb:
        ia = ib = slice(None)
    elif na > nb and nb > 1 and (na - 1) % (nb - 1) == 0:
        ia, ib = slice(None, None, (na - 1) // (nb - 1)), slice(None)
    elif nb > na and na > 1 and (nb - 1) % (na - 1) == 0:
        ia, ib = slice(None), slice(None, None, (nb - 1) // (na - 1))
    else:
        raise ShapeMismatchError(f"row counts {na} and {nb} do not nest")
    scale = 1.0 + float(np.max(np.abs(key_a)))
    if np.max(np.abs(key_a[ia] - key_b[ib])) > 1e-9 * scale:
        raise ShapeMismatchError("first columns do not align after subsampling")
    return ia, ib


def _cmd_compare(args):
    report = {"artifacts": {}}
    summaries = []
    for label in (args.summary_a, args.summary_b):
        path = Path(label)
        if path.is_dir():
            path = path / "summary.json"
        if not path.is_file():
            raise ConfigError(f"summary file missing: {path}")
        with open(path) as fh:
            summaries.append((path, json.load(fh)))
    (pa, sa), (pb, sb) = summaries
    if sa.get("kind") != sb.get("kind"):
        raise ShapeMismatchError(
            f"scenario kinds differ: {sa.get('kind')} vs {sb.get('kind')}"
        )
    report["kind"] = sa.get("kind")
    shared = sorted(set(sa.get("artifacts", {})) & set(sb.get("artifacts", {})))
    if not shared:
        raise ShapeMismatchError("runs share no artifact names")
    for name in shared:
        ta = _load_artifact(pa, sa["artifacts"][name])
        tb = _load_artifact(pb, sb["artifacts"][name])
        if list(ta) != list(tb):
            raise ShapeMismatchError(
                f"artifact {name}: column names differ: {list(ta)} vs {list(tb)}"
            )
        key = next(iter(ta))
        ia, ib = _subsample(ta[key], tb[key])
        entry = {}
        for col in ta:
            diff = np.abs(ta[col][ia] - tb[col][ib])
            ref = float(np.max(np.abs(ta[col][ia])))
            entry[col] = {
                "max_abs": float(np.max(diff)),
                "max_rel": float(np.max(diff) / ref) if ref > 0 else 0.0,
            }
        report["artifacts"][name] = {
            "rows_a": int(ta[key].size),
            "rows_b": int(tb[key].size),
            "columns": entry,
        }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# entry points


def _apply_threads(args):
    raw = os.environ.get("NMKRAUS_THREADS")
    if raw is None and args.threads is not None:
        raw = str(args.threads)
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigError("threads must be a positive integer")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def _cmd_run(args):
    _apply_threads(args)
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError(f"config file missing: {path}")
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except yaml.YAMLError as e:
        raise ConfigError(f"config does not parse: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config top level must be a mapping")
    kind = _str(cfg, "kind")
    runner = _SCENARIOS.get(kind)
    if runner is None:
        raise ConfigError(
            f"kind must be one of {', '.join(sorted(_SCENARIOS))}; got {kind}"
        )
    outdir = Path(
        args.out
        if args.out is not None
        else _str(cfg, "output.directory", f"runs/{kind}")
    )
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        artifacts, checks = runner(cfg, path.parent, outdir)
    except ConfigError:
        raise
    except (ValueError, ArithmeticError, RuntimeError) as e:
        print(f"solver error in {kind} ({type(e).__name__}): {e}", file=sys.stderr)
        return 3
    return _finish(outdir, kind, artifacts, checks)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nmkraus",
        description="run solver scenarios from configs and compare their artifacts",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    prun = sub.add_parser("run", help="execute one scenario config")
    prun.add_argument("config", help="YAML scenario file")
    prun.add_argument("--out", default=None, help="output directory override")
    prun.add_argument("--threads", type=int, default=None, help="thread cap")
    pcmp = sub.add_parser("compare", help="diff the artifacts of two runs")
    pcmp.add_argument("summary_a", help="summary.json (or run dir) of the first run")
    pcmp.add_argument("summary_b", help="summary.json (or run dir) of the second run")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_compare(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ShapeMismatchError as e:
        print(f"compare error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
