"""Command-line interface: ``pdtm generate|fit|eval|grid|compare|reproduce``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import datagen
from .baselines import witnessed_model
from .files import cloud_hash, load_model, read_points, save_model, write_rows
from .kpdtm import PowerModel, best_restart, empirical_loss, fit_restarts
from .neighbors import build_index
from .powereval import compare_fields, dtm_field, eval_grid, sublevel_mask

log = logging.getLogger("pdtm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


class CommandError(Exception):
    pass


def _write_csv(path, rows, header=None):
    if path in (None, "-"):
        arr = np.asarray(rows)
        arr = arr[:, None] if arr.ndim == 1 else arr
        if header:
            print(",".join(header))
        for row in arr:
            print(",".join(format(float(v), ".17g") for v in row))
    else:
        write_rows(path, rows, header)


# field selection -----------------------------------------------------------


def _add_field_flags(p: argparse.ArgumentParser, data_required: bool = False) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--model", metavar="PATH", help="power model file written by 'fit'")
    g.add_argument("--dtm", action="store_true", help="empirical DTM of --data")
    g.add_argument("--witnessed", action="store_true", help="q-witnessed distance of --data")
    p.add_argument("--data", metavar="CSV", required=data_required, help="point cloud for --dtm/--witnessed")
    p.add_argument("--q", type=int, help="neighbor count for --dtm/--witnessed")


def _selected_field(args):
    if args.model:
        model, _ = load_model(args.model)
        return model
    return _named_field("dtm" if args.dtm else "witnessed", args.data, args.q)


def _named_field(name, data_path, q):
    if data_path is None:
        raise CommandError(f"--data is required for the {name} field")
    if q is None:
        raise CommandError(f"--q is required for the {name} field")
    points = read_points(data_path)
    if name == "dtm":
        return dtm_field(points, q)
    if name == "witnessed":
        return witnessed_model(points, q)
    raise CommandError(f"unknown field {name!r}")


def _field_from_spec(spec: str, data_path, q):
    if spec in ("dtm", "witnessed"):
        return _named_field(spec, data_path, q)
    path = spec[len("model:") :] if spec.startswith("model:") else spec
    if not Path(path).exists():
        raise CommandError(f"field must be 'dtm', 'witnessed' or a model file, got {spec!r}")
    return load_model(path)[0]


# commands ------------------------------------------------------------------


def _spec_from_args(args) -> datagen.ShapeSpec:
    box = None
    if args.outlier_box:
        x0, y0, x1, y1 = args.outlier_box
        box = ((x0, y0), (x1, y1))
    kw = dict(
        shape=args.shape,
        n=args.n,
        noise_sigma=args.sigma,
        outlier_fraction=args.outlier_fraction,
        outlier_box=box,
        seed=args.seed,
    )
    if args.radius is not None:
        kw["radius"] = args.radius
    if args.radii is not None:
        kw["radii"] = tuple(args.radii)
    if args.side is not None:
        kw["side"] = args.side
    if args.length is not None:
        kw["length"] = args.length
    return datagen.ShapeSpec(**kw)


def cmd_generate(args) -> int:
    spec = _spec_from_args(args)
    pts = datagen.sample(spec)
    _write_csv(args.output, pts, ["x", "y"] if args.header else None)
    if args.meta:
        Path(args.meta).write_text(json.dumps(spec.metadata(), indent=1) + "\n")
    return 0


def cmd_fit(args) -> int:
    points = read_points(args.input)
    index = build_index(points)
    warm = anchors = None
    if args.init == "warm":
        if not args.warm_model:
            raise CommandError("--init warm requires --warm-model")
        warm, _ = load_model(args.warm_model)
    elif args.init == "explicit":
        if not args.anchors:
            raise CommandError("--init explicit requires --anchors")
        anchors = read_points(args.anchors)
    results = fit_restarts(
        index, args.q, args.k, args.restarts, args.max_iter, args.seed, args.init, warm=warm, anchors=anchors
    )
    model, report = best_restart(results)
    if args.output:
        save_model(args.output, model, report, restarts=args.restarts, data_hash=cloud_hash(points))
    for _, rep in results:
        print(
            f"restart {rep.restart_id}: iterations={rep.iterations} reseeds={rep.reseeds} "
            f"converged={str(rep.converged).lower()} loss={rep.final_loss:.17g}"
        )
    print(f"best restart={report.restart_id} k={model.k} q={model.q} loss={report.final_loss:.17g}")
    return 0


def cmd_eval(args) -> int:
    field = _selected_field(args)
    queries = read_points(args.queries)
    values = np.sqrt(np.asarray(field(queries)))
    _write_csv(args.output, values)
    return 0


def cmd_grid(args) -> int:
    field = _selected_field(args)
    d = len(args.lower)
    resolution = args.resolution if len(args.resolution) == d else args.resolution * d
    if len(args.upper) != d or len(resolution) != d:
        raise CommandError("--lower, --upper and --resolution must have matching lengths")
    grid = eval_grid(field, args.lower, args.upper, resolution)
    cols = [grid.centers(), np.sqrt(grid.values)[:, None]]
    header = [f"x{i}" for i in range(d)] + ["value"]
    for r in args.sublevel or []:
        cols.append(sublevel_mask(grid, r)[:, None].astype(np.float64))
        header.append(f"mask_{r:g}")
    _write_csv(args.output, np.hstack(cols), header if args.header else None)
    return 0


def cmd_compare(args) -> int:
    points = read_points(args.input)
    fa = _field_from_spec(args.a, args.data or args.input, args.q)
    fb = _field_from_spec(args.b, args.data or args.input, args.q)
    cmp = compare_fields(fa, fb, points)
    print(f"l1_mean={cmp.l1_mean:.17g}")
    print(f"max_gap={cmp.max_gap:.17g}")
    print(f"dominance_violations={cmp.dominance_violations}")
    return 0


def cmd_reproduce(args) -> int:
    """Sample the two-loop cloud, fit k=100 then k=300 warm-started, export grids."""
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    spec = datagen.ShapeSpec("sideways", n=args.n, noise_sigma=args.sigma, seed=args.seed)
    points = datagen.sample(spec)
    write_rows(out / "sample.csv", points)
    (out / "sample.json").write_text(json.dumps(spec.metadata(), indent=1) + "\n")
    index = build_index(points)
    digest = cloud_hash(points)
    witnessed = witnessed_model(index, args.q)
    models: dict[str, PowerModel] = {}
    prev = None
    for k in args.k:
        init = "uniform" if prev is None else "warm"
        model, report = best_restart(
            fit_restarts(index, args.q, k, args.restarts, args.max_iter, args.seed, init, warm=prev)
        )
        save_model(out / f"model_k{k}.json", model, report, restarts=args.restarts, data_hash=digest)
        models[f"k{k}"] = model
        prev = model
        print(f"k={k}: loss={report.final_loss:.17g} iterations={report.iterations} reseeds={report.reseeds}")
    models["witnessed"] = witnessed
    lo = points.min(axis=0) - args.margin
    hi = points.max(axis=0) + args.margin
    radii = (args.r / 2, args.r, 2 * args.r)
    w2 = witnessed(points)
    for name, model in models.items():
        grid = eval_grid(model, lo, hi, (args.resolution, args.resolution))
        masks = [sublevel_mask(grid, r) for r in radii]
        cols = [grid.centers(), np.sqrt(grid.values)[:, None]] + [m[:, None].astype(np.float64) for m in masks]
        header = ["x0", "x1", "value"] + [f"mask_{r:g}" for r in radii]
        write_rows(out / f"grid_{name}.csv", np.hstack(cols), header)
        gap = float(np.mean(np.abs(model(points) - w2)))
        print(
            f"{name}: loss={empirical_loss(model, index):.17g} cells<=r={int(masks[1].sum())} "
            f"l1_vs_witnessed={gap:.17g}"
        )
    return 0


# parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pdtm", description="Distance to measure and k-PDTM coresets for point clouds.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a synthetic point cloud")
    g.add_argument("--shape", required=True, choices=datagen.SHAPES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--radius", type=float)
    g.add_argument("--radii", type=float, nargs=2)
    g.add_argument("--side", type=float)
    g.add_argument("--length", type=float)
    g.add_argument("--sigma", type=float, default=0.0, help="Gaussian noise standard deviation")
    g.add_argument("--outlier-fraction", type=float, default=0.0)
    g.add_argument("--outlier-box", type=float, nargs=4, metavar=("X0", "Y0", "X1", "Y1"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--header", action="store_true")
    g.add_argument("--meta", metavar="JSON", help="also write the dataset metadata here")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit a k-PDTM model")
    f.add_argument("input")
    f.add_argument("--q", type=int, required=True)
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--restarts", type=int, default=10)
    f.add_argument("--max-iter", type=int, default=10)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--init", choices=("uniform", "warm", "explicit"), default="uniform")
    f.add_argument("--warm-model", metavar="PATH")
    f.add_argument("--anchors", metavar="CSV")
    f.add_argument("-o", "--output", metavar="PATH")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="evaluate a distance field at query points")
    _add_field_flags(e)
    e.add_argument("queries")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_eval)

    gr = sub.add_parser("grid", help="evaluate a distance field on a regular grid")
    _add_field_flags(gr)
    gr.add_argument("--lower", type=float, nargs="+", required=True)
    gr.add_argument("--upper", type=float, nargs="+", required=True)
    gr.add_argument("--resolution", type=int, nargs="+", required=True)
    gr.add_argument("--sublevel", type=float, action="append", metavar="R")
    gr.add_argument("--header", action="store_true")
    gr.add_argument("-o", "--output")
    gr.set_defaults(func=cmd_grid)

    c = sub.add_parser("compare", help="compare two squared fields over a point cloud")
    c.add_argument("input")
    c.add_argument("--a", required=True, help="'dtm', 'witnessed' or a model file")
    c.add_argument("--b", required=True, help="'dtm', 'witnessed' or a model file")
    c.add_argument("--data", metavar="CSV", help="cloud defining dtm/witnessed (default: input)")
    c.add_argument("--q", type=int)
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("reproduce", help="run the two-loop sublevel-set experiment")
    r.add_argument("outdir")
    r.add_argument("--n", type=int, default=6000)
    r.add_argument("--sigma", type=float, default=0.45)
    r.add_argument("--q", type=int, default=50)
    r.add_argument("--k", type=int, nargs="+", default=[100, 300])
    r.add_argument("--restarts", type=int, default=10)
    r.add_argument("--max-iter", type=int, default=10)
    r.add_argument("--r", type=float, default=0.24)
    r.add_argument("--resolution", type=int, default=200)
    r.add_argument("--margin", type=float, default=0.5)
    r.add_argument("--seed", type=int, default=1)
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (CommandError, ValueError, OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"pdtm {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
