"""Command-line front end: graph generation, profile runs, checks, fitting,
and plot-ready CSV emission.

Every run writes a manifest echoing the full configuration and input digests;
identical manifests imply byte-identical outputs.  Exit codes: 0 success,
1 usage, 2 precondition errors, 3 budget/time exhaustion (partial certified
output still written).
"""

import argparse
import csv
import hashlib
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import bounds as B
from . import cuts, generators, graphio, profiles
from .errors import BudgetExceeded, SepprofError
from .graph import VertexSet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_BUDGET = 3


def _frac_str(x):
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def _point_json(p):
    return {
        "n": p.n,
        "value": _frac_str(p.value),
        "value_float": float(p.value),
        "exact": p.exact,
        "ambient_certified": p.ambient_certified,
        "window_limited": p.window_limited,
        "trivial": p.trivial,
        "radius": p.radius,
        "witness_size": len(p.witness) if p.witness is not None else 0,
    }


def table_json(table):
    return {"kind": table.kind, "points": [_point_json(p) for p in table.points]}


def write_table_csv(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "value_num", "value_den", "exact", "ambient_certified", "witness_size"])
        for row in table.csv_rows():
            w.writerow(row)


def read_table_csv(path, kind="sep_lower"):
    pts = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pts.append(
                profiles.ProfilePoint(
                    n=int(row["n"]),
                    value=Fraction(int(row["value_num"]), int(row["value_den"])),
                    witness=None,
                    exact=bool(int(row["exact"])),
                    ambient_certified=bool(int(row["ambient_certified"])),
                )
            )
    return profiles.ProfileTable(kind=kind, points=pts)


def emit_plot_data(table, overlays=(), path=None):
    """Log-log ready columns with optional bound overlays.

    Columns: n, log2_n, value, log2_value, then one column per overlay
    BoundExpr (empty where the form's domain excludes n).
    """
    from .errors import DomainError, EmptyTable

    if not table.points:
        raise EmptyTable("no points to plot")
    header = ["n", "log2_n", "value", "log2_value"]
    header += [f"bound_{i}_{b.form}" for i, b in enumerate(overlays)]
    rows = [header]
    for p in table.points:
        v = float(p.value)
        row = [
            p.n,
            float(np.log2(p.n)),
            v,
            float(np.log2(v)) if v > 0 else "",
        ]
        for b in overlays:
            try:
                row.append(B.evaluate_bound(b, p.n))
            except DomainError:
                row.append("")
        rows.append(row)
    if path:
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
    return rows


def write_manifest(out_path, command, config, inputs=None, outputs=None):
    manifest = {
        "tool": "sepprof",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": inputs or {},
        "outputs": outputs or {},
    }
    path = f"{out_path}.manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_gen(args):
    fam = args.family
    if fam == "lattice":
        g = generators.lattice_window(args.d, args.radius)
    elif fam == "cayley":
        spec = {
            "zd": generators.GroupSpec("free_abelian", d=args.d),
            "heisenberg": generators.GroupSpec("heisenberg3"),
            "lamplighter": generators.GroupSpec("lamplighter_z2_z"),
        }[args.group]
        g = generators.cayley_ball(spec, args.radius)
    elif fam == "carpet":
        pattern = generators.STANDARD_CARPET
        if args.side != 3 or args.removed:
            removed = (
                frozenset(
                    tuple(int(x) for x in cell.split(","))
                    for cell in args.removed.split(";")
                )
                if args.removed
                else frozenset({(args.side // 2, args.side // 2)})
            )
            pattern = generators.CarpetPattern(side=args.side, removed=removed)
        g = generators.sierpinski_carpet(pattern, args.level)
    elif fam == "percolation":
        cfg = generators.PercolationConfig(
            dimension=args.d, box_half_width=args.box, p=args.p, seed=args.seed
        )
        g = generators.percolation_cluster(cfg)
    else:  # pragma: no cover - argparse restricts choices
        raise SepprofError(f"unknown family {fam}")
    digest = graphio.write_graph(g, args.out)
    write_manifest(
        args.out,
        "gen",
        {k: v for k, v in vars(args).items() if k != "func"},
        outputs={args.out: digest},
    )
    print(f"wrote {args.out}: {g.n} vertices, {g.edge_count} edges ({g.label})")
    return EXIT_OK


def _load(args):
    return graphio.read_graph(args.graph)


def _emit_profile(args, table, extra=None):
    base = args.out
    if base.endswith(".json"):
        json_path, csv_path = base, base[:-5] + ".csv"
    elif base.endswith(".csv"):
        json_path, csv_path = base[:-4] + ".json", base
    else:
        json_path, csv_path = base + ".json", base + ".csv"
    write_table_csv(table, csv_path)
    payload = table_json(table)
    if extra:
        payload.update(extra)
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    write_manifest(
        base,
        args.command,
        {k: v for k, v in vars(args).items() if k != "func"},
        inputs={args.graph: _sha256_file(args.graph)},
        outputs={csv_path: _sha256_file(csv_path), json_path: _sha256_file(json_path)},
    )
    print(f"wrote {csv_path} and {json_path}")


def _cmd_iso(args):
    g = _load(args)
    code = EXIT_OK
    try:
        table, records = profiles.iso_profile(g, args.nmax, budget=args.budget)
    except BudgetExceeded:
        raise
    extra = {
        "optimal_integers": [r.n for r in records if r.is_optimal_integer],
        "records": [
            {
                "n": r.n,
                "ratio": _frac_str(r.ratio),
                "size": len(r.set),
                "optimal": r.is_optimal_integer,
            }
            for r in records
        ],
    }
    if any(not p.exact for p in table.points):
        code = EXIT_BUDGET
    _emit_profile(args, table, extra)
    return code


def _cmd_sep(args):
    g = _load(args)
    if args.mode == "exact":
        table = profiles.sep_exact(g, args.nmax, exact_threshold=args.exact_threshold)
    else:
        fams = args.families.split(",") if args.families else ["balls", "boxes"]
        iso_records = None
        if any(f.strip().lower().startswith("optimal") for f in fams):
            _, iso_records = profiles.iso_profile(g, min(args.nmax, 12))
        table = profiles.sep_lower_envelope(
            g,
            args.nmax,
            families=[f.strip() for f in fams],
            iso_records=iso_records,
            threads=args.threads,
        )
    _emit_profile(args, table)
    return EXIT_OK


def _cmd_local_sep(args):
    g = _load(args)
    v = args.vertex if args.vertex is not None else profiles.canonical_center(g)
    table = profiles.local_sep(g, v, args.nmax)
    _emit_profile(args, table, extra={"vertex": int(v)})
    return EXIT_OK


def _cmd_cheeger(args):
    g = _load(args)
    if args.subset:
        with open(args.subset) as fh:
            ids = [int(x) for x in fh.read().split()]
        from .graph import induced_subgraph

        g = induced_subgraph(g, VertexSet(ids))
    if args.mode == "exact":
        interval = cuts.cheeger_exact(g, exact_threshold=args.exact_threshold)
    elif args.mode == "sweep":
        interval = cuts.cheeger_sweep(g)
    else:
        cut = cuts.ball_shell_cut(g, profiles.canonical_center(g))
        interval = cuts.CheegerInterval(
            lo=Fraction(0),
            hi=cut.ratio,
            witness=cut,
            method=cuts.METHOD_BALL_SHELL,
            degenerate=cut.degenerate,
        )
    payload = {
        "lo": _frac_str(interval.lo),
        "lo_float": float(interval.lo),
        "hi": _frac_str(interval.hi),
        "hi_float": float(interval.hi),
        "method": interval.method,
        "witness": sorted(interval.witness.part.members),
        "witness_boundary": interval.witness.boundary_edges,
        "disconnected": interval.disconnected,
    }
    out = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
        write_manifest(
            args.out,
            "cheeger",
            {k: v for k, v in vars(args).items() if k != "func"},
            inputs={args.graph: _sha256_file(args.graph)},
        )
    else:
        print(out)
    return EXIT_OK


def _parse_params(spec):
    out = {}
    if not spec:
        return out
    for item in spec.split(","):
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError:
            try:
                out[k.strip()] = float(v)
            except ValueError:
                out[k.strip()] = v.strip()
    return out


def _cmd_fit(args):
    table = read_table_csv(args.profile)
    if args.per_vertex:
        table = B.per_vertex_table(table)
    bound = B.BoundExpr(args.form, _parse_params(args.params))
    report = B.fit_and_compare(table, bound)
    payload = {
        "form": args.form,
        "fitted_constants": {k: float(v) for k, v in report.fitted_constants.items()},
        "residual": report.residual,
        "slope": report.slope,
        "slope_halfwidth": report.slope_halfwidth,
        "verdict": report.verdict,
        "notes": report.notes,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_percolate(args):
    cfg = generators.PercolationConfig(
        dimension=args.d, box_half_width=args.box, p=args.p, seed=args.seed
    )
    g = generators.percolation_cluster(cfg)
    digest = graphio.write_graph(g, args.out)
    stats = {
        "vertices": g.n,
        "edges": g.edge_count,
        "box_vertices": g.meta["box_vertices"],
        "density": g.n / g.meta["box_vertices"],
        "interior": int(g.interior.sum()),
    }
    write_manifest(
        args.out,
        "percolate",
        {k: v for k, v in vars(args).items() if k != "func"},
        outputs={args.out: digest},
    )
    print(json.dumps(stats, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_report(args):
    g = _load(args)
    t0 = time.monotonic()
    timings = {}
    table, records = profiles.iso_profile(g, args.nmax)
    timings["iso"] = time.monotonic() - t0
    t1 = time.monotonic()
    env = profiles.sep_lower_envelope(
        g, args.sep_nmax, iso_records=records, families=["balls", "boxes", "optimalsets"]
    )
    timings["envelope"] = time.monotonic() - t1
    audits = profiles.lemma_optimal_audit(g, table, records)
    report = {
        "kind": "report",
        "input_digest": _sha256_file(args.graph),
        "label": g.label,
        "tables": {"iso": table_json(table), "sep_lower": table_json(env)},
        "verdicts": {
            "lemma_optimal": all(ok for *_x, ok in audits),
            "lemma_checks": len(audits),
            "iso_monotone": table.is_monotone(),
            "envelope_monotone": env.is_monotone(),
        },
        "timings": timings,
    }
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    plot_path = args.out + ".plot.csv"
    overlays = []
    if args.overlay:
        overlays = [B.BoundExpr(args.overlay, _parse_params(args.overlay_params))]
    emit_plot_data(env, overlays=overlays, path=plot_path)
    write_manifest(
        args.out,
        "report",
        {k: v for k, v in vars(args).items() if k != "func"},
        inputs={args.graph: _sha256_file(args.graph)},
        outputs={args.out: _sha256_file(args.out), plot_path: _sha256_file(plot_path)},
    )
    print(f"wrote {args.out} and {plot_path}")
    return EXIT_OK


# -- check suites -----------------------------------------------------------


def _suite_lemma_optimal(g, args):
    table, records = profiles.iso_profile(g, args.nmax)
    audits = profiles.lemma_optimal_audit(g, table, records)
    return [
        {"n": n, "lhs": _frac_str(l), "rhs": _frac_str(r), "ok": ok}
        for n, l, r, ok in audits
    ]


def _suite_chain(g, args):
    table, records = profiles.iso_profile(g, args.nmax)
    env = profiles.sep_lower_envelope(
        g,
        args.nmax,
        families=["balls", "optimalsets"],
        iso_records=records,
        exact_threshold=max(cuts.EXACT_DEFAULT, args.nmax),
    )
    out = []
    for eps in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        for n in range(1, args.nmax // 2 + 1):
            target = (1 - eps) * table.value(n)
            m = next((k for k in table.ns() if table.value(k) <= target), None)
            if m is None:
                continue
            try:
                w = B.chain_lower_bound_symmetric(table, eps, n, m)
            except (SepprofError, KeyError):
                continue
            audit = B.chain_audit(w, envelope=env)
            out.append(
                {
                    "eps": _frac_str(eps),
                    "n": n,
                    "m": m,
                    "N": w.chosen_N,
                    "bound": _frac_str(w.bound_value),
                    "sound": audit.get("envelope"),
                }
            )
    return out


def _suite_decay(g, args):
    table, records = profiles.iso_profile(g, args.nmax)
    env = profiles.sep_lower_envelope(
        g,
        args.nmax,
        families=["balls", "optimalsets"],
        iso_records=records,
        exact_threshold=max(cuts.EXACT_DEFAULT, args.nmax),
    )
    out = []
    for n in range(1, args.nmax + 1):
        try:
            w = B.decay_lower_bound(table, n)
        except SepprofError:
            continue
        audit = B.chain_audit(w, envelope=env)
        out.append(
            {
                "n": n,
                "N": w.chosen_N,
                "bound": _frac_str(w.bound_value),
                "sound": audit.get("envelope"),
            }
        )
    return out


def _suite_growth_upper(g, args):
    center = profiles.canonical_center(g)
    cut = cuts.ball_shell_cut(g, center)
    env = profiles.sep_lower_envelope(g, args.nmax, families=["balls"])
    d = g.meta.get("d", 2)
    fit = B.fit_and_compare(
        B.per_vertex_table(env), B.BoundExpr(B.FORM_GROWTH_UPPER_POLYNOMIAL, {"d": d})
    )
    return [
        {
            "shell_ratio": _frac_str(cut.ratio),
            "shell_bound": cut.bound_value,
            "shell_ok": cut.guarantee_met,
            "fit_verdict": fit.verdict,
            "fit_K": float(fit.fitted_constants.get("K", 1.0)),
        }
    ]


def _suite_local_poly(g, args):
    out = []
    for d in (2, 3, 4, 5):
        a = B.local_poly_a_exponent(d, d)
        b = B.local_poly_b_exponent(d, d)
        out.append(
            {
                "d": d,
                "exponent_a": _frac_str(a),
                "exponent_b": _frac_str(b),
                "agree": a == b == Fraction(d - 1, d),
            }
        )
    return out


def _suite_percolation(g, args):
    v = profiles.canonical_center(g)
    ns = [2**k for k in range(6, 13)]
    table = profiles.local_sep(g, v, max(ns), ns=ns)
    pts = [p for p in table.points if p.ambient_certified and p.value > 0]
    slope, hw = B.fit_slope([p.n for p in pts], [float(p.value) for p in pts])
    return [{"vertex": int(v), "slope": slope, "halfwidth": hw, "points": len(pts)}]


def _suite_jv(g, args):
    coords = g.meta.get("coords")
    if coords is None:
        raise SepprofError("jv suite needs a coordinate-bearing graph")
    sub_ids = np.arange(min(g.n, 64))
    from .graph import induced_subgraph

    sub = induced_subgraph(g, VertexSet(sub_ids))
    dist = np.vstack(
        [
            np.asarray(
                __import__("sepprof.kernels", fromlist=["bfs_distances"]).bfs_distances(
                    sub.indptr, sub.indices, sub.n, s
                )
            )
            for s in range(sub.n)
        ]
    )
    emb = sub.meta["coords"].astype(float)
    res = B.distortion(dist, emb, p=2.0)
    rep = B.jv_consistency(sub, res.value, K=0.1)
    return [
        {
            "distortion": res.value,
            "scale": res.scale,
            "verdict": rep.verdict,
            "h_lo": rep.fitted_constants["h_lo"],
        }
    ]


_SUITES = {
    "lemma-optimal": _suite_lemma_optimal,
    "chain": _suite_chain,
    "decay": _suite_decay,
    "growth-upper": _suite_growth_upper,
    "local-poly": _suite_local_poly,
    "percolation": _suite_percolation,
    "jv": _suite_jv,
}


def _cmd_check(args):
    g = _load(args) if args.graph else None
    results = _SUITES[args.suite](g, args)
    payload = {"suite": args.suite, "results": results}
    out = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
        write_manifest(
            args.out,
            "check",
            {k: v for k, v in vars(args).items() if k != "func"},
            inputs={args.graph: _sha256_file(args.graph)} if args.graph else {},
        )
    else:
        print(out)
    bad = [r for r in results if r.get("ok") is False or r.get("sound") is False]
    return EXIT_OK if not bad else EXIT_PRECONDITION


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="sepprof", description=__doc__)
    ap.add_argument("--version", action="version", version=f"sepprof {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a graph window")
    g.add_argument("--family", required=True, choices=["lattice", "cayley", "carpet", "percolation"])
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--radius", type=int, default=4)
    g.add_argument("--group", choices=["zd", "heisenberg", "lamplighter"], default="zd")
    g.add_argument("--level", type=int, default=1)
    g.add_argument("--side", type=int, default=3)
    g.add_argument("--removed", default="")
    g.add_argument("--p", type=float, default=0.7)
    g.add_argument("--box", type=int, default=32)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    i = sub.add_parser("iso", help="isoperimetric profile")
    i.add_argument("--graph", required=True)
    i.add_argument("--nmax", type=int, required=True)
    i.add_argument("--budget", type=int, default=None)
    i.add_argument("--out", required=True)
    i.set_defaults(func=_cmd_iso)

    s = sub.add_parser("sep", help="separation profile (exact or lower envelope)")
    s.add_argument("--graph", required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--mode", choices=["exact", "envelope"], default="exact")
    s.add_argument("--families", default="")
    s.add_argument("--exact-threshold", type=int, default=profiles.SEP_EXACT_DEFAULT)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_sep)

    l = sub.add_parser("local-sep", help="local separation profile")
    l.add_argument("--graph", required=True)
    l.add_argument("--nmax", type=int, required=True)
    l.add_argument("--vertex", type=int, default=None)
    l.add_argument("--out", required=True)
    l.set_defaults(func=_cmd_local_sep)

    c = sub.add_parser("cheeger", help="Cheeger constant interval")
    c.add_argument("--graph", required=True)
    c.add_argument("--subset", default=None)
    c.add_argument("--mode", choices=["exact", "sweep", "shell"], default="exact")
    c.add_argument("--exact-threshold", type=int, default=cuts.EXACT_DEFAULT)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_cheeger)

    k = sub.add_parser("check", help="run a verification suite")
    k.add_argument("--suite", required=True, choices=sorted(_SUITES))
    k.add_argument("--graph", default=None)
    k.add_argument("--nmax", type=int, default=10)
    k.add_argument("--out", default=None)
    k.set_defaults(func=_cmd_check)

    f = sub.add_parser("fit", help="fit a bound form against a profile CSV")
    f.add_argument("--profile", required=True)
    f.add_argument("--form", required=True)
    f.add_argument("--params", default="")
    f.add_argument("--per-vertex", action="store_true")
    f.set_defaults(func=_cmd_fit)

    p = sub.add_parser("percolate", help="sample a percolation cluster")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--box", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_percolate)

    r = sub.add_parser("report", help="bundle iso/envelope/audits for a graph")
    r.add_argument("--graph", required=True)
    r.add_argument("--nmax", type=int, default=8)
    r.add_argument("--sep-nmax", type=int, default=64)
    r.add_argument("--overlay", default=None)
    r.add_argument("--overlay-params", default="")
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_report)

    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, 0 for --help/--version
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SepprofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
