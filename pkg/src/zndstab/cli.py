"""Batch command-line runner.

    zndstab profile    --config run.json [--out DIR] [--format json|csv]
    zndstab sweep      --config run.json [--jobs N]
    zndstab verify     --config run.json
    zndstab crosscheck [--config run.json]

Exit codes: 0 success, 1 runtime failure, 2 configuration error (nothing is
written), 3 an internal consistency gate failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import RunConfig
from .eos import ConfigError
from .stability import ConsistencyError

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_GATE = 0, 1, 2, 3


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, complex to [re, im], nan to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v)
                    for v in r])
    return buf.getvalue()


def _write_all(directory: Path, files: dict):
    """Single writer: every file goes through a temporary name first."""
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in sorted(files.items()):
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{name}.")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, directory / name)


# --------------------------------------------------------------------------
# commands


def build_profile(cfg: RunConfig):
    from .profile import calibrate_rate, integrate_profile, mach_from_overdrive

    det = cfg.detonation
    model = cfg.model
    mach = det.mach if det.mach is not None else mach_from_overdrive(model, det.overdrive)
    if det.half_reaction_length is not None:
        model = calibrate_rate(model, mach, det.half_reaction_length)
    return integrate_profile(model, mach, tol_eq=cfg.domain.tol_eq, rtol=cfg.domain.rtol)


def cmd_profile(cfg: RunConfig, args, log):
    prof = build_profile(cfg)
    res = prof.conservation_residuals()
    log(f"profile type {prof.ptype}" + (f" (x_M = {prof.x_M:.6g})" if prof.x_M else ""))
    log(f"X_max {prof.X_max:.6g}, conservation residuals "
        + ", ".join(f"{k} {v:.2e}" for k, v in sorted(res.items())))
    files = {}
    data = prof.to_json_dict()
    if "classify" in cfg.tasks:
        data["frequency_classes"] = _classify_table(prof, cfg)
    if "json" in cfg.output.formats:
        files["profile.json"] = _dumps(data)
    if "csv" in cfg.output.formats:
        files["profile.csv"] = prof.to_csv()
    return files, EXIT_OK


def _classify_table(prof, cfg):
    from .frame import classify_zeta, exceptional_values

    out = {"exceptional_values": exceptional_values(prof), "ranges": prof.ranges()}
    if cfg.frequencies is not None:
        out["rows"] = [{"zeta_i": z, "class": classify_zeta(1j * z, prof)}
                       for z in cfg.frequencies.zeta_i]
    return out


def _sweep(cfg: RunConfig, prof, jobs):
    from .instability import sweep

    fr = cfg.need_frequencies()
    R = math.inf if fr.R_bound is None else fr.R_bound
    return sweep(prof, fr.zeta_i, fr.im_nu, R, fr.eps_min, fr.eps_max, jobs=jobs)


_SWEEP_HEADER = ["zeta_i", "verdict", "regime", "criterion_lhs", "criterion_rhs", "L1", "L2",
                 "beta1", "beta2", "beta3", "re_nu_star", "im_nu_star", "n_eps", "first_eps",
                 "out_of_ball", "note"]


def _sweep_rows(report):
    rows = []
    for r in report.rows:
        bt = r.betas
        rows.append([
            r.zeta_i, r.verdict, r.regime, r.criterion_lhs, r.criterion_rhs, r.L1, r.L2,
            None if bt is None else bt.beta1, None if bt is None else bt.beta2,
            None if bt is None else bt.beta3,
            None if r.nu_star is None else r.nu_star.real,
            None if r.nu_star is None else r.nu_star.imag,
            len(r.eps_list), r.eps_list[0] if r.eps_list else None, r.out_of_ball, r.note,
        ])
    return rows


def cmd_sweep(cfg: RunConfig, args, log):
    from .stability import L_dual, jump_data

    prof = build_profile(cfg)
    jd = jump_data(prof)
    fr = cfg.need_frequencies()
    # dual-evaluation gate on the swept axis before the sweep itself
    L_dual(1j * np.asarray(fr.zeta_i), prof, jd)
    report = _sweep(cfg, prof, args.jobs)
    n_un = sum(r.verdict == "unstable_hf" for r in report.rows)
    log(f"profile type {prof.ptype}: {len(report.rows)} zeta_i, {n_un} unstable, "
        f"interval {report.unstable_interval}, overlap cutoff {report.eps_cutoff}")
    files = {}
    if "json" in cfg.output.formats:
        files["stability_report.json"] = _dumps({
            "config": cfg.to_dict(),
            "units": {"x": "upstream specific volume / upstream sound speed", "zeta": "1",
                      "eps": "1"},
            "report": report.to_dict(),
        })
    if "csv" in cfg.output.formats:
        files["stability_report.csv"] = _csv(_SWEEP_HEADER, _sweep_rows(report))
    return files, EXIT_OK


def cmd_verify(cfg: RunConfig, args, log):
    from .instability import evaluate_criterion, rouche_verify
    from .stability import jump_data

    prof = build_profile(cfg)
    jd = jump_data(prof)
    ver = cfg.verify
    fr = cfg.frequencies
    eps_min = 0.0 if fr is None else fr.eps_min
    eps_max = 200.0 if fr is None else fr.eps_max
    im_nu = 0.0 if fr is None else fr.im_nu
    if ver.zeta_i is not None:
        zi = ver.zeta_i
    else:
        report = _sweep(cfg, prof, args.jobs)
        un = [r for r in report.rows if r.verdict == "unstable_hf"]
        if not un:
            raise RuntimeError("no unstable verdict in the sweep; give verify.zeta_i")
        zi = max(un, key=lambda r: r.criterion_lhs / r.criterion_rhs).zeta_i
    v = evaluate_criterion(zi, prof, im_nu, math.inf, eps_min, eps_max, jd)
    if v.verdict != "unstable_hf":
        raise RuntimeError(f"zeta_i = {zi} is not in the unstable set ({v.verdict})")
    eps_n = v.eps_list[: ver.periods + 1]
    rows = []
    gate_ok = True
    for e in eps_n:
        w = rouche_verify(zi, v.nu_star, e, ver.delta, "Va", prof, v, jd=jd)
        c = rouche_verify(zi, v.nu_star + ver.control_offset, e, ver.delta, "Va", prof, v, jd=jd)
        gate_ok &= w.winding == 1 and c.winding == 0
        rows.append(["Va", e, "predicted", w.radius, w.winding, w.min_abs, w.conclusive])
        rows.append(["Va", e, "control", c.radius, c.winding, c.min_abs, c.conclusive])
    if ver.exact:
        feas = [e for e in v.eps_list if e <= ver.exact_eps_max]
        if feas:
            e = feas[-1]
            w = rouche_verify(zi, v.nu_star, e, ver.delta, "V", prof, v, jd=jd,
                              oracle_tol=cfg.domain.oracle_tol)
            rows.append(["V", e, "predicted", w.radius, w.winding, w.min_abs, w.conclusive])
            if w.winding != 1:
                log(f"warning: exact-V winding {w.winding} at eps {e:.4g} (flagged)")
        else:
            log("no predicted eps within the exact-V budget")
    for r in rows:
        log(f"{r[0]:>2} eps {r[1]:9.4f} {r[2]:9s} winding {r[4]}")
    header = ["target", "eps", "point", "radius", "winding", "min_abs", "conclusive"]
    files = {}
    if "json" in cfg.output.formats:
        files["verify.json"] = _dumps({
            "zeta_i": zi, "nu_star": v.nu_star, "verdict": v.to_dict(),
            "rows": [dict(zip(header, r)) for r in rows],
        })
    if "csv" in cfg.output.formats:
        files["verify.csv"] = _csv(header, rows)
    if not gate_ok:
        log("V_a windings disagree with the predicted locus")
        return files, EXIT_GATE
    return files, EXIT_OK


def cmd_crosscheck(cfg: RunConfig | None, args, log):
    from .acceptance import run_all

    results = run_all(progress=lambda r: log(r.line()))
    formats = cfg.output.formats if cfg is not None else ("json",)
    if args.format:
        formats = (args.format,)
    files = {}
    if "json" in formats:
        files["crosscheck.json"] = _dumps([r.to_dict() for r in results])
    if "csv" in formats:
        files["crosscheck.csv"] = _csv(["criterion", "name", "passed", "detail"],
                                       [[r.number, r.name, r.passed, r.detail] for r in results])
    return files, EXIT_OK if all(r.passed for r in results) else EXIT_GATE


COMMANDS = {"profile": cmd_profile, "sweep": cmd_sweep, "verify": cmd_verify,
            "crosscheck": cmd_crosscheck}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def make_parser():
    p = _Parser(prog="zndstab", description="High-frequency stability of ZND detonations.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    p.add_argument("--format", choices=("json", "csv"), help="single output format")
    return p


def main(argv=None) -> int:
    def log(msg):
        print(msg, flush=True)

    try:
        args = make_parser().parse_args(argv)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg = None
        if args.config is not None:
            cfg = RunConfig.load(args.config)
        elif args.command != "crosscheck":
            raise ConfigError("--config is required")
        if cfg is not None and args.format:
            from dataclasses import replace

            cfg = replace(cfg, output=replace(cfg.output, formats=(args.format,)))
        out_dir = Path(args.out or (cfg.output.directory if cfg else "out"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        files, code = COMMANDS[args.command](cfg, args, log)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConsistencyError as exc:
        print(f"consistency gate failed: {exc}", file=sys.stderr)
        return EXIT_GATE
    except Exception as exc:  # noqa: BLE001  runtime failures map to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        _write_all(out_dir, files)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for name in sorted(files):
        log(f"wrote {out_dir / name}")
    return code


if __name__ == "__main__":
    sys.exit(main())
