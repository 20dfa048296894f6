"""Batch driver: reproducible runs of the package pipelines.

Subcommands: jmap (exchange map over a plane), radii (equivalent
viability radii from maps), density (analytic gate-density scans),
mc (point-pattern trials), mace (cluster spin dynamics), gatecheck
(phase-gate unitary report). Every artifact is accompanied by a JSON
sidecar with the fully resolved configuration and seed.

Exit codes: 0 success, 2 validation error, 3 runtime error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import densities, mace, maps, pointsim, presets, runio
from .constants import j_dec
from .exchange import IntegratorSettings, PairConfig
from .phasegate import phase_gate_sequence


class ValidationError(ValueError):
    pass


_PAIR_NAMES = {
    "As1s-As1s": ("1s", "As", "1s", "As"),
    "P1s-As1s": ("1s", "P", "1s", "As"),
    "P1s-P1s": ("1s", "P", "1s", "P"),
    "P2ppm-As1s": ("2ppm", "P", "1s", "As"),
    "P2ppm-P2ppm": ("2ppm", "P", "2ppm", "P"),
}


def _pair_from_name(name: str) -> PairConfig:
    try:
        s1, sp1, s2, sp2 = _PAIR_NAMES[name]
    except KeyError:
        raise ValidationError(
            f"unknown pair {name!r}; have {sorted(_PAIR_NAMES)}") from None
    return PairConfig(s1, sp1, s2, sp2)


def _merge_config(args: argparse.Namespace, parser_keys: set) -> dict:
    """Start from flags, overlay the config file, reject unknown fields."""
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "config") and v is not None}
    if getattr(args, "config", None):
        loaded = runio.read_config(args.config)
        unknown = set(loaded) - parser_keys
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        cfg.update(loaded)
    return cfg


def _outdir(cfg: dict) -> Path:
    out = Path(cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gatecheck(cfg: dict) -> int:
    rep = phase_gate_sequence()
    out = _outdir(cfg)
    payload = {
        "unitary_real": rep.unitary.real.tolist(),
        "unitary_imag": rep.unitary.imag.tolist(),
        "distance_to_controlled_phase": rep.distance_to_cz,
    }
    runio.write_sidecar(out / "gatecheck.json", {**payload, "config": cfg})
    print(f"controlled-phase distance: {rep.distance_to_cz:.3e}")
    return 0


def cmd_density(cfg: dict) -> int:
    geom = presets.get_preset(cfg["preset"])
    kind = cfg["kind"]
    if kind not in densities.GATE_KINDS:
        raise ValidationError(f"unknown gate kind {kind!r}")
    lo, hi, n = cfg["lo"], cfg["hi"], int(cfg["points"])
    if not (0 < lo < hi) or n < 2:
        raise ValidationError("need 0 < lo < hi and points >= 2")
    dr = np.geomspace(lo, hi, n)
    curve = densities.density_scan(kind, geom, dr)
    peak_d, peak_v = densities.peak_density(kind, geom, lo, hi)
    out = _outdir(cfg)
    stem = f"density_{kind}_{cfg['preset']}"
    runio.write_curve_csv(out / f"{stem}.csv", curve, geom.dimension)
    runio.write_sidecar(out / f"{stem}.json", {
        "config": cfg,
        "control_density": curve.control_density,
        "peak": {"readout_density": peak_d, "active_density": peak_v},
    })
    print(f"{kind} peak: {peak_v:.4g} per cm^{geom.dimension} "
          f"at readout density {peak_d:.4g}")
    return 0


def cmd_mc(cfg: dict) -> int:
    geom = presets.get_preset(cfg["preset"])
    region = pointsim.SimRegion(geom.dimension, float(cfg["box"]),
                                cfg["boundary"])
    if cfg["readout_density"] < 0 or cfg["control_density"] < 0:
        raise ValidationError("densities must be nonnegative")
    stats = pointsim.run_trials(
        region, geom, float(cfg["control_density"]),
        float(cfg["readout_density"]), int(cfg["trials"]),
        seed=int(cfg["seed"]), include_pairs=bool(cfg.get("pairs")),
        threads=int(cfg["threads"]))
    summary = {name: {"mean": stats.mean(name), "std": stats.std(name)}
               for name in sorted(stats.quantities)}
    out = _outdir(cfg)
    runio.write_sidecar(out / "mc_summary.json", {"config": cfg,
                                                  "densities": summary})
    for name, v in summary.items():
        std = "n/a" if v["std"] is None else f"{v['std']:.3g}"
        print(f"{name}: {v['mean']:.4g} +- {std} per cm^{geom.dimension}")
    return 0


def cmd_jmap(cfg: dict) -> int:
    pair = _pair_from_name(cfg["pair"])
    st = IntegratorSettings(n_samples=int(cfg["samples"]), n_iter=5,
                            seed=int(cfg["seed"]))
    imap = maps.interaction_map(pair, extent=float(cfg["extent"]),
                                spacing=float(cfg["spacing"]),
                                plane_offset=float(cfg["offset"]),
                                settings=st)
    out = _outdir(cfg)
    stem = f"jmap_{cfg['pair']}"
    runio.write_map_csv(out / f"{stem}.csv", imap)
    runio.write_sidecar(out / f"{stem}.json", {"config": cfg})
    try:
        req = maps.equivalent_radius(imap, j_dec())
        print(f"{cfg['pair']}: equivalent radius {req:.2f} nm at J_dec")
    except maps.EmptyZoneError:
        print(f"{cfg['pair']}: no zone above J_dec within the map extent")
    return 0


def cmd_radii(cfg: dict) -> int:
    names = cfg["pairs"].split(",")
    report = {}
    for name in names:
        pair = _pair_from_name(name.strip())
        extent = float(cfg["extent"])
        st = IntegratorSettings(n_samples=int(cfg["samples"]), n_iter=5,
                                seed=int(cfg["seed"]))
        imap = maps.interaction_map(pair, extent=extent,
                                    spacing=float(cfg["spacing"]),
                                    plane_offset=float(cfg["offset"]),
                                    settings=st)
        req = maps.equivalent_radius(imap, j_dec())
        report[name.strip()] = {"radius_nm": req, "tolerance": 0.15}
        print(f"{name.strip()}: {req:.2f} nm")
    out = _outdir(cfg)
    runio.write_sidecar(out / "radii.json", {"config": cfg, "radii": report})
    return 0


def cmd_mace(cfg: dict) -> int:
    side = float(cfg["box"])
    dens = float(cfg["density"])
    g = int(cfg["g"])
    n_cl = int(cfg["clusters"])
    seed = int(cfg["seed"])
    if dens < 0 or g < 1 or n_cl < 1:
        raise ValidationError("bad mace parameters")
    t = np.linspace(0.0, 200.0, 201)
    rng = np.random.default_rng(seed)
    system = mace.sample_spin_system(side, dens, rng, control_state="1s")
    readout_ids = np.nonzero(~system.is_control)[0]
    if n_cl > len(readout_ids):
        raise ValidationError("more clusters than readout sites in the box")
    focals = np.random.default_rng(seed + 1).choice(readout_ids, size=n_cl,
                                                    replace=False)
    trajs = {}
    for state in ("1s", "2ppm"):
        system.control_state = state
        coup = mace.build_couplings(
            system, tables=mace.default_coupling_tables(state))
        trajs[state] = mace.mace_average(system, coup, g, n_cl, t,
                                         seed=seed + 1, focals=focals)
    out = _outdir(cfg)
    runio.write_trajectory_csv(out / "mace_trajectory.csv",
                               trajs["1s"], trajs["2ppm"])
    peak, err = mace.excitation_peak_difference(trajs["1s"], trajs["2ppm"])
    runio.write_sidecar(out / "mace_trajectory.json", {
        "config": cfg, "peak_abs_diff": peak, "peak_err": err})
    print(f"peak |P_sf(2p) - P_sf(1s)| = {peak:.4f} +- {err:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="donorgates", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; overrides flags")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("gatecheck", help="phase-gate unitary report")
    common(sp)
    sp.set_defaults(func=cmd_gatecheck)

    sp = sub.add_parser("density", help="analytic gate-density scan")
    common(sp)
    sp.add_argument("--preset", default="monolayer-inplane")
    sp.add_argument("--kind", default="HeisExGd")
    sp.add_argument("--lo", type=float, default=5e9)
    sp.add_argument("--hi", type=float, default=4e11)
    sp.add_argument("--points", type=int, default=40)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("mc", help="point-pattern gate trials")
    common(sp)
    sp.add_argument("--preset", default="monolayer-inplane")
    sp.add_argument("--box", type=float, default=10_000.0)
    sp.add_argument("--boundary", default="periodic",
                    choices=["periodic", "open"])
    sp.add_argument("--control-density", dest="control_density", type=float,
                    default=1.79e10)
    sp.add_argument("--readout-density", dest="readout_density", type=float,
                    default=8e10)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--pairs", action="store_true",
                    help="also tally excited-excited pairs on the controls")
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("jmap", help="exchange map over a plane")
    common(sp)
    sp.add_argument("--pair", default="P2ppm-As1s")
    sp.add_argument("--extent", type=float, default=30.0)
    sp.add_argument("--spacing", type=float, default=1.0)
    sp.add_argument("--offset", type=float, default=0.0,
                    help="out-of-plane separation of the second donor")
    sp.add_argument("--samples", type=int, default=30_000)
    sp.set_defaults(func=cmd_jmap)

    sp = sub.add_parser("radii", help="equivalent viability radii")
    common(sp)
    sp.add_argument("--pairs", default="As1s-As1s,P2ppm-As1s")
    sp.add_argument("--extent", type=float, default=34.0)
    sp.add_argument("--spacing", type=float, default=0.5)
    sp.add_argument("--offset", type=float, default=0.0)
    sp.add_argument("--samples", type=int, default=30_000)
    sp.set_defaults(func=cmd_radii)

    sp = sub.add_parser("mace", help="cluster spin-dynamics trajectories")
    common(sp)
    sp.add_argument("--density", type=float, default=7e9,
                    help="per-species density, per cm^2")
    sp.add_argument("--box", type=float, default=3200.0)
    sp.add_argument("--g", type=int, default=8)
    sp.add_argument("--clusters", type=int, default=400)
    sp.set_defaults(func=cmd_mace)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    keys = {k for k in vars(args) if k not in ("func", "config")}
    try:
        cfg = _merge_config(args, keys)
        return args.func(cfg)
    except (ValidationError, ValueError) as exc:
        json.dump({"error": "validation", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except Exception as exc:   # noqa: BLE001 - surface runtime failures as exit 3
        json.dump({"error": "runtime", "message": f"{type(exc).__name__}: {exc}"},
                  sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
