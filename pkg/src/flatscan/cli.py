"""Command-line front end: ``flatscan scan | compare | euler | probe | demo | plot``."""

import argparse
import math
import sys
import time

import numpy as np

from . import io as fio
from .complex import (
    ParseError,
    betti,
    cubical_from_occupancy,
    euler_characteristic,
    flat_filtration,
    load_grid,
    load_off,
)
from .grassmann import canonicalize, sample_flats
from .persistence import PersistenceDiagram, bottleneck, pd0_union_find, wasserstein
from .plot import render_svg
from .shapes import annulus, ball, disk, shell
from .transform import (
    chi_grassmannian,
    chi_grassmannian_recursive,
    chi_table,
    betti_slice_euler,
    continuity_probe,
    dpht_scan,
    euler_curve,
    hpht_vs_cpht_demo,
    injectivity_probe,
    radon_chi,
    rotation_schedule,
    translation_schedule,
    unit_direction,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def load_shape(path):
    """Read a grid or OFF file, chosen by its first token."""
    text = _read(path)
    first = text.lstrip().split(None, 1)[0] if text.strip() else ""
    try:
        if first.startswith("OFF"):
            return load_off(text)
        return load_grid(text)
    except ParseError as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_json(path):
    try:
        return fio.load_json(_read(path))
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _fmt(x):
    return "inf" if math.isinf(x) else f"{x:.6g}"


# ---------------------------------------------------------------------------


def cmd_scan(args):
    shape = load_shape(args.input)
    radius = args.radius if args.radius is not None else shape.bounding_radius
    if radius <= 0:
        raise CliError("shape is empty; pass --radius to sample flats anyway")
    flats = sample_flats(args.m, shape.ambient_dim, args.num_flats, radius, args.seed)
    t0 = time.perf_counter()
    try:
        result = dpht_scan(
            shape,
            args.m,
            flats,
            args.max_degree,
            shape_id=args.shape_id or args.input,
            euler=not args.no_euler,
            slice_chi=True,
            epsilon=args.epsilon,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    _write(args.out, fio.dumps(fio.result_to_dict(result)))
    points = sum(len(D) for ds in result.diagrams for D in ds)
    print(f"flats: {len(result)}  degrees: 0..{result.max_degree}  diagram points: {points}  wall time: {elapsed:.3f} s")
    return EXIT_OK


def _same_flats(a, b):
    if a.m != b.m or len(a.flats) != len(b.flats):
        return False
    for P, Q in zip(a.flats, b.flats):
        if P.basis.shape != Q.basis.shape or P.displacement.shape != Q.displacement.shape:
            return False
        if not (np.array_equal(P.basis, Q.basis) and np.array_equal(P.displacement, Q.displacement)):
            return False
    return True


def cmd_compare(args):
    a = _load_json(args.a)
    b = _load_json(args.b)
    if isinstance(a, PersistenceDiagram) or isinstance(b, PersistenceDiagram):
        raise CliError("compare expects two scan results")
    if not _same_flats(a, b):
        raise CliError("flat lists differ; scan both shapes with the same seed, count and radius", EXIT_MISMATCH)
    if args.metric == "wasserstein" and args.p < 1:
        raise CliError("--p must be at least 1")
    degrees = min(a.max_degree, b.max_degree) + 1
    for k in range(degrees):
        best, where = 0.0, None
        for i, (da, db) in enumerate(zip(a.diagrams, b.diagrams)):
            if args.metric == "bottleneck":
                v = bottleneck(da[k], db[k]).value
            else:
                v = wasserstein(da[k], db[k], args.p).value
            if where is None or v > best:
                best, where = v, i
        label = args.metric if args.metric == "bottleneck" else f"wasserstein p={args.p:g}"
        at = f" at flat {where}" if where is not None else ""
        print(f"degree {k}: max {label} = {_fmt(best)}{at}")
    return EXIT_OK


def cmd_euler(args):
    shape = load_shape(args.input)
    chi = euler_characteristic(shape)
    bettis = betti(shape, shape.ambient_dim - 1)
    print(f"euler characteristic: {chi}  betti: {bettis}")
    radius = args.radius if args.radius is not None else shape.bounding_radius
    if radius <= 0:
        return EXIT_OK
    flats = sample_flats(args.m, shape.ambient_dim, args.num_flats, radius, args.seed)
    entries, mismatches = [], 0
    for P in flats:
        curve = euler_curve(shape, flat_filtration(shape, P))
        c = radon_chi(shape, P, args.epsilon)
        t = betti_slice_euler(shape, P, args.m, args.epsilon) if args.m > 0 else c
        mismatches += int(t != c)
        entries.append(
            {
                "basis": P.basis.tolist(),
                "displacement": P.displacement.tolist(),
                "euler_curve": [[r, v] for r, v in curve],
                "slice_chi": c,
                "truncated_chi": t,
            }
        )
    values, counts = np.unique([e["slice_chi"] for e in entries], return_counts=True)
    hist = ", ".join(f"{v}: {n}" for v, n in zip(values.tolist(), counts.tolist()))
    print(f"slice chi over {len(flats)} flats: {{{hist}}}")
    print(f"truncated betti sum differs from slice chi on {mismatches} flats")
    if args.out:
        doc = {"shape_id": args.input, "chi": chi, "betti": bettis, "m": args.m, "flats": entries}
        _write(args.out, fio.dumps(doc))
    return EXIT_OK


def cmd_probe(args):
    if args.kind == "injectivity":
        rep = injectivity_probe(args.grid_size, args.pairs, args.seed)
        print(f"grid {rep.grid_size}x{rep.grid_size}, {rep.line_count} lines, {rep.pair_count} pairs")
        print(f"distinguished: {rep.distinguished}/{rep.pair_count} (fraction {rep.fraction:.6g})")
        return EXIT_OK
    shape = load_shape(args.input) if args.input else cubical_from_occupancy(annulus())
    P = canonicalize([[1.0, 0.0]] if shape.ambient_dim == 2 else [[0.0, 0.0, 1.0]], np.zeros(shape.ambient_dim))
    if args.kind == "rotation":
        if shape.ambient_dim != 2:
            raise CliError("rotation schedule needs a planar shape")
        schedule = rotation_schedule(P, args.steps)
    else:
        schedule = translation_schedule(P, args.steps)
    rep = continuity_probe(shape, P, schedule, tolerance=args.tolerance)
    print("step  affine_dist  sup_gap  bottleneck")
    for k, (d, g, b) in enumerate(zip(rep.affine_distances, rep.sup_gaps, rep.bottlenecks), start=1):
        print(f"{k:4d}  {d:.6g}  {g:.6g}  {_fmt(b)}")
    print(f"stable: {rep.stable}  non-increasing: {rep.monotone}  final below {args.tolerance:g}: {rep.converged}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# demos


class _Checks:
    def __init__(self):
        self.failed = 0

    def check(self, label, ok, detail=""):
        print(f"{'PASS' if ok else 'FAIL'}: {label}" + (f" ({detail})" if detail else ""))
        self.failed += int(not ok)
        return ok


def _demo_annulus(checks):
    S = cubical_from_occupancy(annulus(64, 24, 10))
    P = canonicalize([[1.0, 0.0]], [0.0, 0.0])
    D = pd0_union_find(S, flat_filtration(S, P))
    checks.check("tubular-through-hole PD0 has 2 points", len(D) == 2, f"got {len(D)}: {D.points.tolist()}")
    c = radon_chi(S, P)
    checks.check("slice through the hole has chi 2", c == 2, f"got {c}")
    t = betti_slice_euler(S, P, 1)
    checks.check("degree-0 betti of the slice gives chi 2", t == 2, f"got {t}")
    rep = hpht_vs_cpht_demo(S, unit_direction(math.pi / 2))
    checks.check("height PD0 along e2 has 1 point", rep.height_count == 1, f"got {rep.height_count}")


def _demo_ball_sphere(checks):
    P = canonicalize([[0.0, 0.0, 1.0]], [0.0, 0.0, 0.0])
    for name, occ, want in (("ball", ball(32, 14), 1), ("shell", shell(32, 14, 9), 2)):
        S = cubical_from_occupancy(occ)
        D = pd0_union_find(S, flat_filtration(S, P))
        checks.check(f"{name} PD0 count {want}", len(D) == want, f"got {len(D)}: {D.points.tolist()}")


def _demo_hpht(checks):
    S = cubical_from_occupancy(annulus(64, 24, 10))
    for k in range(8):
        rep = hpht_vs_cpht_demo(S, unit_direction(2 * math.pi * k / 8))
        checks.check(
            f"direction {k}/8: height PD0 shifted by M equals tangent-line PD0",
            rep.shift_matches(1e-9),
            f"gap {rep.shift_gap:.3g}",
        )
    rep = hpht_vs_cpht_demo(S, unit_direction(math.pi / 2))
    checks.check(
        "through-hole line PD0 has 2 points, height along e2 has 1",
        rep.through_count == 2 and rep.height_count == 1,
        f"got {rep.through_count} vs {rep.height_count}",
    )
    D = cubical_from_occupancy(disk(64, 24))
    rep = hpht_vs_cpht_demo(D, unit_direction(math.pi / 2))
    checks.check("disk: 1 point both ways", rep.through_count == 1 and rep.height_count == 1)


def _demo_chi_table(checks):
    print(" n  m  chi1  chi2  case")
    table = chi_table(12)
    for p in table:
        if p.m >= 1:
            print(f"{p.n:2d} {p.m:2d} {p.chi1:5d} {p.chi2:5d}  {p.case_tag}")
    bad_formula = [
        (k, n) for n in range(13) for k in range(n + 1) if chi_grassmannian(k, n) != chi_grassmannian_recursive(k, n)
    ]
    checks.check("closed form equals recursion for 0 <= k <= n <= 12", not bad_formula, f"{bad_formula[:5]}")
    bad_ineq = [(p.m, p.n) for p in table if p.m >= 1 and (p.case_tag == "2.4") == p.distinct]
    checks.check("chi1 != chi2 exactly when m, n are not both odd", not bad_ineq, f"{bad_ineq[:5]}")
    bad_ratio = [(p.m, p.n) for p in table if p.case_tag == "2.3" and p.chi1 * (p.m // 2) != (p.n // 2) * p.chi2]
    checks.check("even-even ratio chi1 = (n/m) chi2", not bad_ratio, f"{bad_ratio[:5]}")
    bad_m0 = [p.n for p in table if p.m == 0 and (p.chi1, p.chi2) != (1, 0)]
    checks.check("points: chi1 = 1, chi2 = 0", not bad_m0)


DEMOS = {
    "annulus": _demo_annulus,
    "ball-sphere": _demo_ball_sphere,
    "hpht-vs-cpht": _demo_hpht,
    "chi-table": _demo_chi_table,
}


def cmd_demo(args):
    checks = _Checks()
    DEMOS[args.name](checks)
    return EXIT_OK if checks.failed == 0 else EXIT_FAIL


def cmd_plot(args):
    obj = _load_json(args.input)
    _write(args.out, render_svg(obj))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="flatscan", description="Distance-to-flat persistent homology scans.")
    sub = parser.add_subparsers(dest="command", required=True)

    def sampling(p):
        p.add_argument("--input", required=True, help="grid or OFF shape file")
        p.add_argument("--m", type=int, default=1, help="flat dimension")
        p.add_argument("--num-flats", type=_positive_int, default=64)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--epsilon", type=float, default=None, help="slice thickness")
        p.add_argument("--radius", type=float, default=None, help="sampling radius (default: bounding radius)")

    p = sub.add_parser("scan", help="scan a shape with random flats and write the result JSON")
    sampling(p)
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--shape-id", default=None)
    p.add_argument("--no-euler", action="store_true", help="skip Euler curves")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("compare", help="distance between two scan results over the same flats")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", choices=("bottleneck", "wasserstein"), default="bottleneck")
    p.add_argument("--p", type=float, default=1.0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("euler", help="Euler characteristic, Betti numbers and slice Euler statistics")
    sampling(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_euler)

    p = sub.add_parser("probe", help="injectivity or continuity probe")
    p.add_argument("kind", choices=("injectivity", "rotation", "translation"))
    p.add_argument("--grid-size", type=int, default=5)
    p.add_argument("--pairs", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--input", default=None, help="shape for continuity probes (default: built-in annulus)")
    p.add_argument("--steps", type=_positive_int, default=8)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("demo", help="built-in demonstrations with PASS/FAIL checks")
    p.add_argument("name", choices=sorted(DEMOS))
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("plot", help="render a scan result or diagram JSON as SVG")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"flatscan: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
