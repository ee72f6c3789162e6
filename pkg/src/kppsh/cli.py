"""Command-line front end: gate, spectra, front, simulation, filters, GL, Evans.

Every command reads a TOML (or JSON) config, writes its artifacts into a run
directory, and records a manifest with content hashes so reruns are
byte-comparable.  CSV output is RFC-4180 with 17 significant digits;
snapshot binaries are a one-line JSON header followed by raw little-endian
float64.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (decay_fit, find_pattern_window, pattern_amplitude,
                          pattern_wavenumber, predicted_pattern_amplitude)
from .evans import evans_winding, wronskian_identity_check
from .fields import Grid1D
from .front import check_front_asymptotics, solve_front, tail_rate
from .gl import (approximation_experiment, derive_ansatz_vectors,
                 default_gl_grid, GLField, simulate_gl, gl_residual_vectors)
from .modefilter import (default_filter_grid, make_mode_filters, project,
                         quadratic_vanishing_check, semigroup_bounds)
from .params import SystemParams, check_hypotheses, default_preset, gamma_rem
from .sim import SimConfig, default_sim_grid, run_simulation
from .spectral import fredholm_border, select_theta, weighted_symbol

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

__all__ = ["main", "run_pipeline", "RunManifest", "load_config"]

STAGES = ("gate", "spectrum", "front", "simulate", "filters", "gl", "evans",
          "scan", "report")


# -- config -------------------------------------------------------------------

def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        return json.loads(text.decode())
    return tomllib.loads(text.decode())


def params_from_config(cfg: dict) -> SystemParams:
    section = cfg.get("params", {})
    base = default_preset()
    kwargs = {k: float(section[k]) for k in
              ("d", "alpha", "beta", "gamma", "sigma", "mu", "mu0")
              if k in section}
    return base.with_(**kwargs)


def sim_config_from(cfg: dict, p: SystemParams) -> SimConfig:
    gsec = cfg.get("grid", {})
    tsec = cfg.get("time", {})
    ssec = cfg.get("sponge", {})
    isec = cfg.get("ic", {})
    grid = default_sim_grid(float(gsec.get("x_min", -800.0)),
                            float(gsec.get("x_max", 40.0)),
                            float(gsec.get("dx", 0.13)))
    return SimConfig(
        params=p,
        grid=grid,
        dt=float(tsec.get("dt", 0.004)),
        t_end=float(tsec.get("t_end", 400.0)),
        record_every=float(tsec.get("record_every", 0.5)),
        snapshot_every=float(tsec.get("snapshot_every", 50.0)),
        sponge_width=float(ssec.get("width", 40.0)),
        sponge_strength=float(ssec.get("strength", 5.0)),
        ic_amplitude_rel=float(isec.get("amplitude_rel", 0.01)),
        ic_center=float(isec.get("center", 0.0)),
        ic_width=float(isec.get("width", 3.0)),
    )


# -- artifact writers ---------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)  # RFC-4180: comma separated, CRLF endings
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (int, float, np.floating))
                             else str(v) for v in row])


def write_snapshot_binary(path: Path, grid: Grid1D, fields: dict) -> None:
    """One-line JSON header, then the named arrays as little-endian f64."""
    names = list(fields)
    header = {
        "format": "kppsh-snapshot-v1",
        "endianness": "little",
        "dtype": "float64",
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n": grid.n,
                 "frame": grid.frame, "periodic": grid.periodic},
        "fields": names,
        "n_points": grid.n,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for name in names:
            arr = np.ascontiguousarray(np.asarray(fields[name], dtype="<f8"))
            fh.write(arr.tobytes())


def read_snapshot_binary(path: Path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        out = {}
        n = int(header["n_points"])
        for name in header["fields"]:
            out[name] = np.frombuffer(fh.read(8 * n), dtype="<f8")
    return header, out


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    params: dict
    config_hash: str
    code_version: str = __version__
    seeds: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""

    def write(self, out_dir: Path) -> Path:
        self.finished = time.strftime("%Y-%m-%dT%H:%M:%S")
        for f in sorted(out_dir.iterdir()):
            if f.name != "manifest.json" and f.is_file():
                self.outputs[f.name] = _sha256(f)
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True))
        return path


def _manifest(command: str, p: SystemParams, cfg: dict) -> RunManifest:
    cfg_hash = hashlib.sha256(
        json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()
    return RunManifest(command=command, params=p.__dict__.copy(),
                       config_hash=cfg_hash,
                       started=time.strftime("%Y-%m-%dT%H:%M:%S"))


def _out_dir(args, command: str) -> Path:
    out = Path(args.out) if args.out else Path("runs") / command
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands -----------------------------------------------------------------

def cmd_gate(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    rep = check_hypotheses(p)
    payload = rep.to_dict()
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    out = _out_dir(args, "gate")
    (out / "gate.json").write_text(text)
    _manifest("gate", p, cfg).write(out)
    return 0 if rep.admissible else 1


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    choice = select_theta(p)
    out = _out_dir(args, "spectrum")
    rows = []
    for which in ("kpp+", "kpp-", "sh+", "sh-"):
        (curve,) = fredholm_border(weighted_symbol(p, which, choice.theta))
        rows.extend((xi, lam.real, lam.imag, which)
                    for xi, lam in zip(curve.xi, curve.lam))
    write_csv(out / "borders.csv", ["xi", "re_lambda", "im_lambda", "border"], rows)
    theta_payload = {"theta": choice.theta, "eta": choice.eta,
                     "margins": choice.margins}
    (out / "theta.json").write_text(json.dumps(theta_payload, indent=2,
                                               sort_keys=True))
    print(json.dumps(theta_payload, indent=2, sort_keys=True))
    _manifest("spectrum", p, cfg).write(out)
    return 0


def cmd_front(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    fsec = cfg.get("front", {})
    domain = (float(fsec.get("x_min", -40.0)), float(fsec.get("x_max", 60.0)))
    n = int(fsec.get("n", 4001))
    f = solve_front(p, domain=domain, n=n)
    out = _out_dir(args, "front")
    write_csv(out / "front.csv", ["x", "q", "qprime"],
              zip(f.x, f.q, f.qprime))
    fit = check_front_asymptotics(f)
    payload = {"residual": f.residual, "speed": f.c,
               "tail_rate": tail_rate(f),
               "fit": {"a": fit.a, "b": fit.b, "r_squared": fit.r_squared,
                       "window": list(fit.window)}}
    (out / "front.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    print(json.dumps(payload, indent=2, sort_keys=True))
    _manifest("front", p, cfg).write(out)
    return 0


def _simulate_single(cfg: dict, p: SystemParams, out: Path) -> dict:
    sim_cfg = sim_config_from(cfg, p)
    rep = check_hypotheses(p)
    if not rep.admissible:
        raise ValueError(f"gate refused: gamma = {p.gamma} outside "
                         f"({rep.gamma_rem:.6g}, {rep.gamma_gl:.6g})")
    series = run_simulation(sim_cfg)
    write_csv(out / "series.csv",
              ["t", "u_weighted_sup", "u2_sup", "v_sup", "interface"],
              zip(series.t, series.metrics["u_weighted_sup"],
                  series.metrics["u2_sup"], series.metrics["v_sup"],
                  series.metrics["interface"]))
    t_last, u_last, v_last = series.snapshots[-1]
    write_snapshot_binary(out / "snapshot_final.bin", sim_cfg.grid,
                          {"u": u_last, "v": v_last})
    write_csv(out / "plot_final.csv", ["x", "u", "v"],
              zip(sim_cfg.grid.x, u_last, v_last))
    summary = {
        "mu": p.mu,
        "t_end": sim_cfg.t_end,
        "truncated": series.truncated,
        "wave_speed": series.extras.get("wave_speed"),
        "sponge_end": series.extras.get("sponge_end"),
        "final_interface": float(series.metrics["interface"][-1]),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return summary


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    out = _out_dir(args, "simulate")
    try:
        summary = _simulate_single(cfg, p, out)
    except ValueError as exc:
        print(f"simulate refused: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True))
    _manifest("simulate", p, cfg).write(out)
    return 0


def cmd_filters(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    spec = make_mode_filters(p, default_filter_grid())
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    coeffs = rng.normal(size=(2, spec.grid.n)) + 1j * rng.normal(size=(2, spec.grid.n))
    coeffs[:, np.abs(spec.xi) > 3.0] = 0.0
    v = np.fft.ifft(coeffs, axis=1).real
    v /= np.max(np.abs(v))
    total = project(spec, v, "c") + project(spec, v, "s")
    partition = float(np.max(np.abs(total - v)))
    w = np.fft.ifft(np.where(np.abs(np.abs(spec.xi) - 1.0) < 2.0, coeffs, 0),
                    axis=1).real
    vanishing = quadratic_vanishing_check(spec, v, w)
    bounds = semigroup_bounds(spec, np.linspace(0.0, 300.0, 61))
    payload = {
        "partition_residual": partition,
        "quadratic_vanishing": vanishing,
        "stable_rate": bounds["stable_rate"],
        "kappa_theory": bounds["kappa_theory"],
    }
    out = _out_dir(args, "filters")
    (out / "filters.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    print(json.dumps(payload, indent=2, sort_keys=True))
    _manifest("filters", p, cfg).write(out)
    return 0


def cmd_gl(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    out = _out_dir(args, "gl")
    mode = args.mode
    if mode == "derive":
        gl = derive_ansatz_vectors(p)
        res = gl_residual_vectors(p, gl)
        payload = {
            "rho_c": list(gl.rho_c), "rho_c_star": list(gl.rho_c_star),
            "rho_0": list(gl.rho_0),
            "rho_1": [[z.real, z.imag] for z in gl.rho_1],
            "rho_2": list(gl.rho_2),
            "diffusion": gl.diffusion, "linear": gl.linear, "cubic": gl.cubic,
            "residuals": {k: (abs(v) if isinstance(v, complex) else v)
                          for k, v in res.items()},
        }
    elif mode == "simulate":
        gsec = cfg.get("gl", {})
        grid = default_gl_grid(n=int(gsec.get("n", 1024)))
        a0 = complex(gsec.get("a0", 0.1)) * np.ones(grid.n)
        b = float(gsec.get("b", -1.0))
        final, hist = simulate_gl(GLField(grid=grid, a=a0), b=b,
                                  dt=float(gsec.get("dt", 0.01)),
                                  t_end=float(gsec.get("t_end", 20.0)),
                                  record_every=10)
        write_csv(out / "gl_series.csv", ["T", "sup_abs_A"], hist)
        payload = {"b": b, "final_sup": float(np.max(np.abs(final.a))),
                   "saturation": 1.0 / math.sqrt(-b)}
    elif mode == "approx":
        gsec = cfg.get("gl", {})
        eps_values = [float(e) for e in gsec.get("eps_values", [0.2, 0.1])]
        results = [approximation_experiment(p, eps,
                                            t_slow=float(gsec.get("t_slow", 5.0)))
                   for eps in eps_values]
        payload = {"residuals": {str(r["eps"]): r["residual"] for r in results}}
        if len(results) >= 2:
            payload["ratio"] = results[-1]["residual"] / results[0]["residual"]
    else:
        raise ValueError(f"unknown gl mode {mode!r}")
    (out / f"gl_{mode}.json").write_text(json.dumps(payload, indent=2,
                                                    sort_keys=True))
    print(json.dumps(payload, indent=2, sort_keys=True))
    _manifest(f"gl-{mode}", p, cfg).write(out)
    return 0


def cmd_evans(args) -> int:
    cfg = load_config(args.config)
    p = params_from_config(cfg)
    esec = cfg.get("evans", {})
    choice = select_theta(p)
    front = solve_front(p)
    rep = evans_winding(p, front, choice.theta, choice.eta,
                        n_per_edge=int(esec.get("n_per_edge", 16)))
    out = _out_dir(args, "evans")
    write_csv(out / "evans_samples.csv",
              ["re_lambda", "im_lambda", "re_w", "im_w"],
              [(s.lam.real, s.lam.imag, s.value.real, s.value.imag)
               for s in rep["samples"]])
    payload = {
        "winding": rep["winding"],
        "min_abs": rep["min_abs"],
        "median_abs": rep["median_abs"],
        "n_samples": rep["n_samples"],
        "wronskian_deviation_kpp": wronskian_identity_check(p, "kpp", 0.7 + 0.2j, front),
        "wronskian_deviation_sh": wronskian_identity_check(p, "sh", 0.7 + 0.2j, front),
        "theta": choice.theta,
        "eta": choice.eta,
    }
    (out / "evans.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    print(json.dumps(payload, indent=2, sort_keys=True))
    _manifest("evans", p, cfg).write(out)
    return 0


def _scan_worker(item):
    cfg, mu, out_name = item
    p = params_from_config(cfg).with_(mu=mu)
    out = Path(out_name)
    out.mkdir(parents=True, exist_ok=True)
    summary = _simulate_single(cfg, p, out)
    _manifest("simulate", p, cfg).write(out)
    return summary


def cmd_scan(args) -> int:
    cfg = load_config(args.config)
    mu_values = [float(m) for m in cfg.get("scan", {}).get("mu_values", [0.05, 0.1])]
    out = _out_dir(args, "scan")
    workers = int(os.environ.get("KPPSH_WORKERS", "1"))
    items = [(cfg, mu, str(out / f"mu_{mu:g}")) for mu in mu_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_scan_worker, items))
    else:
        summaries = [_scan_worker(it) for it in items]
    (out / "scan.json").write_text(json.dumps(summaries, indent=2, sort_keys=True))
    print(json.dumps(summaries, indent=2, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    scan_dir = Path(args.runs or (Path("runs") / "scan"))
    entries = []
    for sub in sorted(scan_dir.glob("mu_*")):
        summary = json.loads((sub / "summary.json").read_text())
        series_rows = list(csv.DictReader(open(sub / "series.csv", newline="")))
        t = np.array([float(r["t"]) for r in series_rows])
        uw = np.array([float(r["u_weighted_sup"]) for r in series_rows])
        header, snap = read_snapshot_binary(sub / "snapshot_final.bin")
        g = header["grid"]
        x = g["x_min"] + (g["x_max"] - g["x_min"]) / g["n"] * np.arange(g["n"])
        fit = decay_fit(t, uw, window=(10.0, min(200.0, t[-1])))
        entry = {"mu": summary["mu"], "slope": fit.slope,
                 "r_squared": fit.r_squared,
                 "final_interface": summary["final_interface"]}
        try:
            win = find_pattern_window(x, snap["v"], summary["final_interface"],
                                      summary["sponge_end"])
            entry["amplitude"] = pattern_amplitude(x, snap["v"], win)
            entry["xi_peak"] = pattern_wavenumber(x, snap["v"], win)["xi_peak"]
            p = params_from_config(cfg).with_(mu=summary["mu"])
            entry["amplitude_predicted"] = predicted_pattern_amplitude(p)
        except ValueError as exc:
            entry["pattern"] = f"unavailable: {exc}"
        entries.append(entry)
    out = _out_dir(args, "report")
    (out / "report.json").write_text(json.dumps(entries, indent=2, sort_keys=True))
    lines = ["# Scan report", ""]
    lines.append("| mu | decay slope | r^2 | amplitude | predicted | xi peak |")
    lines.append("|----|-------------|-----|-----------|-----------|---------|")
    for e in entries:
        lines.append("| {mu:g} | {slope:.3f} | {r_squared:.4f} | {amp} | {pred} | {xi} |".format(
            mu=e["mu"], slope=e["slope"], r_squared=e["r_squared"],
            amp=f"{e.get('amplitude', float('nan')):.4f}" if "amplitude" in e else "-",
            pred=f"{e.get('amplitude_predicted', float('nan')):.4f}" if "amplitude_predicted" in e else "-",
            xi=f"{e.get('xi_peak', float('nan')):.4f}" if "xi_peak" in e else "-"))
    if len(entries) >= 2:
        ratio = entries[1].get("amplitude", np.nan) / entries[0].get("amplitude", np.nan)
        expected = math.sqrt(entries[1]["mu"] / entries[0]["mu"])
        lines += ["", f"Amplitude ratio: {ratio:.4f} (sqrt-mu scaling predicts "
                  f"{expected:.4f})"]
    (out / "report.md").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def run_pipeline(config_path, stages, out_root) -> int:
    """Execute stages in order into per-stage directories; stop on failure."""
    out_root = Path(out_root)
    handlers = {"gate": cmd_gate, "spectrum": cmd_spectrum, "front": cmd_front,
                "simulate": cmd_simulate, "filters": cmd_filters,
                "evans": cmd_evans, "scan": cmd_scan, "report": cmd_report}
    for stage in stages:
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        ns = argparse.Namespace(config=config_path, out=str(out_root / stage),
                                mode="derive", runs=str(out_root / "scan"))
        if stage == "gl":
            rc = cmd_gl(ns)
        else:
            rc = handlers[stage](ns)
        if rc != 0:
            if stage == "gate":
                print("pipeline halted: the parameter gate is not admissible; "
                      "dependent stages need gamma inside the admissible "
                      "interval", file=sys.stderr)
            return rc
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="kppsh",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.add_argument("--config", default=None, help="TOML or JSON config file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.set_defaults(func=fn)
        return sp

    add("gate", cmd_gate, help="check the coupling-threshold gate")
    add("spectrum", cmd_spectrum, help="weighted Fredholm borders and theta")
    add("front", cmd_front, help="critical front profile and asymptotics")
    add("simulate", cmd_simulate, help="co-moving simulation of the full system")
    sp_filters = add("filters", cmd_filters, help="mode-filter self tests")
    sp_filters.add_argument("mode", nargs="?", default="selftest",
                            choices=["selftest"])
    sp_gl = add("gl", cmd_gl, help="amplitude-equation tools")
    sp_gl.add_argument("mode", choices=["derive", "simulate", "approx"])
    add("evans", cmd_evans, help="Evans winding and wronskian checks")
    add("scan", cmd_scan, help="simulate across a list of mu values")
    sp_rep = add("report", cmd_report, help="post-process a scan directory")
    sp_rep.add_argument("--runs", default=None, help="scan directory to read")

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
