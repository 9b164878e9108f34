"""Command-line surface: simulate | reconstruct | compare | probe | plot-data.

File formats are JSON (UTF-8, no NaN/Inf) for structured data and CSV for
node tables and plot slices. All outputs are written atomically and are
byte-deterministic for identical inputs and flags. Exit codes: 0 success,
2 input error, 3 numerical failure, 4 degenerate-frame saturation.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import kernels
from .bodies import Ball, Ellipsoid, HarmonicBody, ShiftedBall, StarBody
from .errors import DegenerateSaturationError, InputError, NumericalError
from .inversion import Convention, _mean_value_field, multiplier_probe, parse_convention
from .reconstruct import (
    DEFAULT_BAND,
    DEFAULT_TP_FLOOR,
    _blend_weight,
    fit_scattered_to_grid,
    reconstruct_from_reduced,
    reconstruct_radial,
)
from .sphere import build_grid, unit_vector
from .transforms import HemiDataset, SectionFrame, simulate_dataset
from .bodies import SphericalFunction


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def body_from_dict(spec: dict, source: str = "<body>") -> StarBody:
    try:
        n = int(spec["n"])
        kind = spec["type"]
        if kind == "ball":
            return Ball(n, float(spec.get("radius", 1.0)))
        if kind == "shifted_ball":
            return ShiftedBall(n, tuple(spec["center"]), float(spec.get("radius", 1.0)))
        if kind == "ellipsoid":
            return Ellipsoid(n, tuple(spec["semiaxes"]))
        if kind == "harmonic":
            return HarmonicBody(n, float(spec["base"]), tuple(tuple(t) for t in spec.get("terms", ())))
        raise InputError(f"{source}: unknown body type {kind!r}")
    except KeyError as exc:
        raise InputError(f"{source}: missing body field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"{source}: {exc}") from exc


def load_body(path: str) -> StarBody:
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})")
    return body_from_dict(spec, path)


def dataset_to_dict(data: HemiDataset) -> dict:
    records = []
    for frame, value in data.records:
        rec: dict = {"sign": "+" if frame.sign > 0 else "-", "value": float(value)}
        if frame.mode == "full":
            rec["frame"] = {"u": list(frame.u)}
        else:
            rec["frame"] = {"v": list(frame.v), "w": list(frame.w)}
        records.append(rec)
    return {"version": 1, "n": data.n, "k": data.k, "mode": data.mode, "records": records}


def dataset_from_dict(doc: dict, source: str = "<dataset>") -> HemiDataset:
    try:
        if int(doc["version"]) != 1:
            raise InputError(f"{source}: unrecognized dataset version {doc['version']!r}")
        n, k, mode = int(doc["n"]), int(doc["k"]), doc["mode"]
        records = []
        for i, rec in enumerate(doc["records"]):
            fr = rec["frame"]
            if mode == "full":
                frame = SectionFrame(n, k, mode, rec["sign"], u=tuple(fr["u"]))
            else:
                frame = SectionFrame(n, k, mode, rec["sign"], v=tuple(fr["v"]), w=tuple(fr["w"]))
            records.append((frame, float(rec["value"])))
        return HemiDataset(n, k, mode, tuple(records))
    except KeyError as exc:
        raise InputError(f"{source}: missing dataset field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"{source}: {exc}") from exc


def save_dataset(path: str, data: HemiDataset) -> None:
    _atomic_write(path, _dump_json(dataset_to_dict(data)))


def load_dataset(path: str) -> HemiDataset:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})")
    return dataset_from_dict(doc, path)


_CSV_COLUMNS = {2: ("colatitude", "azimuth"), 3: ("chi", "colatitude", "azimuth")}


def write_radial_csv(path: str, grid, rho: np.ndarray) -> None:
    cols = _CSV_COLUMNS[grid.dim]
    coords = np.meshgrid(*grid.axes, indexing="ij")
    flat = [c.reshape(-1) for c in coords]
    lines = [",".join(cols + ("rho",))]
    for i in range(len(rho)):
        lines.append(",".join(repr(float(c[i])) for c in flat) + "," + repr(float(rho[i])))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_radial_csv(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            raw = np.loadtxt(fh, delimiter=",", ndmin=2)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file")
    except ValueError as exc:
        raise InputError(f"{path}: malformed CSV ({exc})")
    dims = {("colatitude", "azimuth", "rho"): 2, ("chi", "colatitude", "azimuth", "rho"): 3}
    if tuple(header) not in dims:
        raise InputError(f"{path}: unrecognized radial CSV header {header}")
    d = dims[tuple(header)]
    axes = [np.unique(raw[:, j]) for j in range(d)]
    if int(np.prod([len(a) for a in axes])) != raw.shape[0]:
        raise InputError(f"{path}: nodes do not form a product grid")
    grid = build_grid(d, len(axes[0]) if d == 2 else len(axes[0]) // 2)
    if tuple(len(a) for a in axes) != grid.shape:
        raise InputError(f"{path}: grid shape {tuple(len(a) for a in axes)} is not a known layout")
    for a, b in zip(axes, grid.axes):
        if np.max(np.abs(a - b)) > 1e-9:
            raise InputError(f"{path}: grid coordinates do not match a known layout")
    expect = np.meshgrid(*grid.axes, indexing="ij")
    for j in range(d):
        if np.max(np.abs(expect[j].reshape(-1) - raw[:, j])) > 1e-9:
            raise InputError(f"{path}: rows are not in product-chart order")
    return grid, raw[:, d]


def save_report(path: str, report: dict) -> None:
    _atomic_write(path, _dump_json(report))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _configure_threads() -> None:
    env = os.environ.get("HALFSECT_THREADS", "").strip()
    if env and kernels.backend_name() == "numba":
        try:
            import numba

            numba.set_num_threads(max(1, int(env)))
        except (ImportError, ValueError):
            pass


def cmd_simulate(args) -> int:
    body = load_body(args.body)
    if args.mode == "full":
        if args.frames is None:
            raise InputError("full mode needs --frames")
        from .transforms import full_frames_detailed

        frames, skipped = full_frames_detailed(args.n, args.frames)
        if skipped:
            print(f"skipped {len(skipped)} degenerate frames at indices {skipped[:20]}",
                  file=sys.stderr)
    else:
        if args.v_res is None or args.w_res is None:
            raise InputError("reduced mode needs --v-res and --w-res")
        from .reconstruct import build_reduced_frames

        frames = build_reduced_frames(args.n, args.k, args.v_res, args.w_res).frames()
    data = simulate_dataset(body, frames, args.m)
    save_dataset(args.out, data)
    print(f"wrote {len(data)} records to {args.out}")
    return 0


def _error_metrics(rho_rec, nodes, body, band, tp_floor=None):
    truth = body.radial_points(nodes)
    mask = np.abs(nodes[:, -1]) >= band
    if tp_floor is not None and nodes.shape[1] >= 4:
        mask &= np.linalg.norm(nodes[:, :2], axis=1) > tp_floor
    rel = np.abs(rho_rec - truth) / np.abs(truth)
    if not np.any(mask):
        raise InputError("comparison band excludes every node")
    return float(np.max(rel[mask])), float(np.mean(rel[mask])), int(np.sum(mask))


def _meanvalue_reconstruct(data: HemiDataset, args, conv: Convention):
    """Diagnostic backend: pointwise mean-value inversion of the fitted data."""
    if data.mode != "full" or data.n != 3:
        raise InputError("the meanvalue backend supports full-mode n=3 datasets")
    k = data.k
    fit_grid = build_grid(2, max(2 * args.l_max, 16))
    us, vp, vm = data.paired_arrays()
    phi_p = SphericalFunction.from_grid(fit_grid, fit_scattered_to_grid(us, 2.0 * k * vp, fit_grid.nodes))
    phi_m = SphericalFunction.from_grid(fit_grid, fit_scattered_to_grid(us, 2.0 * k * vm, fit_grid.nodes))
    out_grid = build_grid(2, args.grid_res or 16)
    # interpolated field data are not exactly polynomial in s^2; the strict
    # library default for the fit guard would reject them
    f_p = _mean_value_field(phi_p.evaluate, out_grid.nodes, k=k, convention=conv, fit_tol=5e-2)
    f_m = _mean_value_field(phi_m.evaluate, out_grid.nodes, k=k, convention=conv, fit_tol=5e-2)
    w = _blend_weight(out_grid.nodes[:, 2], args.band)
    power = w * f_p + (1.0 - w) * f_m
    # pointwise inversion overshoots near the equator jump of the evenized
    # data; this backend is diagnostic, so clamp with a warning instead of
    # applying the calibrated pipeline's 5% hard failure
    from .bodies import TabulatedBody
    from .reconstruct import ReconstructionResult

    eps = 1e-6 * max(float(np.max(power)), 1e-300)
    bad = np.flatnonzero(power <= 0.0)
    warnings = ()
    if bad.size:
        warnings = (f"clamped {bad.size} non-positive power values: nodes {bad[:20].tolist()}",)
    rho = np.maximum(power, eps) ** (1.0 / k)
    return ReconstructionResult(
        TabulatedBody.from_samples(out_grid, rho),
        SphericalFunction.from_grid(out_grid, power),
        out_grid,
        "meanvalue",
        {"convention": conv.tag(), "band": args.band, "clamped_nodes": int(bad.size)},
        warnings,
    )


def cmd_reconstruct(args) -> int:
    t0 = time.perf_counter()
    data = load_dataset(args.data)
    report: dict = {"backend": args.backend, "l_max": args.l_max, "n": data.n, "k": data.k,
                    "mode": data.mode, "band": args.band}
    if args.backend == "meanvalue":
        if args.convention is None:
            raise InputError("the meanvalue backend requires an explicit --convention")
        conv = parse_convention(args.convention)
        probe0 = multiplier_probe(0, conv)
        banner = (
            f"DIAGNOSTIC BACKEND: mean-value inversion under the {conv.tag()} convention "
            f"rescales degree 0 by mu_0 = {probe0.mu:.3f} (1.0 would be exact); "
            "use the harmonic backend for calibrated reconstructions"
        )
        print(banner, file=sys.stderr)
        report["convention"] = conv.tag()
        report["mu_0"] = probe0.mu
        report["diagnostic_banner"] = banner
        result = _meanvalue_reconstruct(data, args, conv)
    elif data.mode == "reduced":
        result = reconstruct_from_reduced(data, args.l_max, args.grid_res or 16, args.band, args.tp_floor)
    else:
        result = reconstruct_radial(data, data.k, args.l_max, args.grid_res, args.band)
    rho = result.radial.fn.values
    write_radial_csv(args.out_radial, result.grid, rho)
    report["grid_shape"] = list(result.grid.shape)
    report["clamp_warnings"] = list(result.warnings)
    report["diagnostics"] = {
        key: (val if isinstance(val, (int, float, str)) else str(val))
        for key, val in result.diagnostics.items()
    }
    if args.truth:
        body = load_body(args.truth)
        tp_floor = args.tp_floor if data.mode == "reduced" else None
        mx, mn, cnt = _error_metrics(rho, result.grid.nodes, body, args.band, tp_floor)
        report["max_rel_error"] = mx
        report["mean_rel_error"] = mn
        report["compared_nodes"] = cnt
    report["wall_seconds"] = round(time.perf_counter() - t0, 3)
    save_report(args.out_report, report)
    print(f"wrote radial table to {args.out_radial} and report to {args.out_report}")
    return 0


def cmd_compare(args) -> int:
    if not (0.0 <= args.band <= 0.5):
        raise InputError("band must lie in [0, 0.5]")
    grid, rho = read_radial_csv(args.radial)
    body = load_body(args.body)
    if body.dim != grid.dim + 1:
        raise InputError("body and radial table dimensions do not match")
    tp_floor = args.tp_floor if grid.dim == 3 else None
    mx, mn, cnt = _error_metrics(rho, grid.nodes, body, args.band, tp_floor)
    report = {
        "max_rel_error": mx,
        "mean_rel_error": mn,
        "compared_nodes": cnt,
        "band": args.band,
        "grid_shape": list(grid.shape),
    }
    if tp_floor is not None:
        report["tp_floor"] = tp_floor
    if args.out:
        save_report(args.out, report)
    print(f"max rel error {mx:.6e}, mean rel error {mn:.6e} over {cnt} nodes")
    return 0


def cmd_probe(args) -> int:
    conv = parse_convention(args.convention)
    ells = [int(x) for x in args.ell.split(",")]
    for l in ells:
        if l % 2 != 0:
            raise InputError(f"probe degrees must be even, got {l}")
        if l > 8:
            raise InputError("probe degrees above 8 are out of desk scale")
    print(f"convention: {conv.tag()}")
    print(f"{'l':>3} {'mu_l':>10} {'cross_talk':>12} {'flag':>6}")
    for l in ells:
        res = multiplier_probe(l, conv)
        print(f"{l:>3} {res.mu:>10.4f} {res.cross_talk:>12.3e} {'WARN' if res.flagged else 'ok':>6}")
    return 0


def slice_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic in-plane basis of the plane orthogonal to the normal;
    the slice angle is measured from b1 towards b2."""
    ez = np.array([0.0, 0.0, 1.0])
    b1 = np.cross(ez, normal)
    if np.linalg.norm(b1) < 1e-9:
        b1 = np.cross(np.array([1.0, 0.0, 0.0]), normal)
    b1 /= np.linalg.norm(b1)
    return b1, np.cross(normal, b1)


def cmd_plotdata(args) -> int:
    grid, rho = read_radial_csv(args.radial)
    if grid.dim != 2:
        raise InputError("plot-data slices need a 3-dimensional body (S^2 radial table)")
    normal = unit_vector(np.array([float(x) for x in args.normal.split(",")]), 3)
    if args.samples < 1:
        raise InputError("need at least one sample")
    fn = SphericalFunction.from_grid(grid, rho)
    b1, b2 = slice_basis(normal)
    ang = 2.0 * np.pi * np.arange(args.samples) / args.samples
    pts = np.outer(np.cos(ang), b1) + np.outer(np.sin(ang), b2)
    vals = fn.evaluate(pts)
    lines = ["angle,rho"]
    for a, v in zip(ang, vals):
        lines.append(f"{float(a)!r},{float(v)!r}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.samples} slice samples to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="halfsect",
                                description="Simulate half-section volumes of star bodies and "
                                            "reconstruct radial functions from hemispherical data.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a half-section dataset for a body")
    s.add_argument("--body", required=True, help="body description JSON")
    s.add_argument("--mode", choices=("full", "reduced"), default="full")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--frames", type=int, help="frame count (full mode)")
    s.add_argument("--v-res", type=int, dest="v_res", help="v-grid resolution (reduced mode)")
    s.add_argument("--w-res", type=int, dest="w_res", help="w-grid resolution (reduced mode)")
    s.add_argument("--m", type=int, default=512, help="quadrature points per half circle")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reconstruct", help="reconstruct a radial function from a dataset")
    r.add_argument("--data", required=True)
    r.add_argument("--backend", choices=("harmonic", "meanvalue"), default="harmonic")
    r.add_argument("--l-max", type=int, default=16, dest="l_max")
    r.add_argument("--grid-res", type=int, dest="grid_res")
    r.add_argument("--band", type=float, default=DEFAULT_BAND)
    r.add_argument("--tp-floor", type=float, default=DEFAULT_TP_FLOOR, dest="tp_floor")
    r.add_argument("--convention", help="meanvalue measure convention: probability | calibrated:<kappa>")
    r.add_argument("--truth", help="optional body JSON for error metrics in the report")
    r.add_argument("--out-radial", required=True, dest="out_radial")
    r.add_argument("--out-report", required=True, dest="out_report")
    r.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("compare", help="error metrics of a radial table against a body")
    c.add_argument("--radial", required=True)
    c.add_argument("--body", required=True)
    c.add_argument("--band", type=float, default=DEFAULT_BAND)
    c.add_argument("--tp-floor", type=float, default=DEFAULT_TP_FLOOR, dest="tp_floor")
    c.add_argument("--out", help="report JSON path")
    c.set_defaults(func=cmd_compare)

    pr = sub.add_parser("probe", help="mean-value backend multiplier diagnostics")
    pr.add_argument("--ell", default="0,2,4", help="comma-separated even degrees (<= 8)")
    pr.add_argument("--convention", default="probability")
    pr.set_defaults(func=cmd_probe)

    pl = sub.add_parser("plot-data", help="polar slice of a radial table for external plotting")
    pl.add_argument("--radial", required=True)
    pl.add_argument("--normal", required=True, help="plane normal, comma-separated")
    pl.add_argument("--samples", type=int, default=360)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    _configure_threads()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except DegenerateSaturationError as exc:
        print(f"degenerate-frame saturation: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
