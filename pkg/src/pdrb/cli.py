"""Command-line front end: ``pdrb <command> ...``.

Every command writes its outputs atomically plus a ``<output>.manifest.json``
recording the command, its parameters and the tool version.  Randomness
comes only from ``--seed`` through numpy's PCG64 generator.

Exit codes: 0 success, 1 I/O or parse error, 2 parameter contract
violation, 3 numerical failure.
"""

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import io, svg
from .barycenter import Q1_WARNING, BarycenterConfig, compute_barycenter
from .clustering import kmeans
from .dictionary import EncodeConfig, encode, planar_layout
from .diagram import prune
from .extract import CONNECTIVITIES, extract_max_pairs, threshold_top_k
from .metric import distance_matrix
from .synthetic import DEFAULT_ENSEMBLE, make_outlier_ensemble
from .validation import check_q

EXIT_IO, EXIT_CONTRACT, EXIT_NUMERIC = 1, 2, 3


class ContractError(ValueError):
    """A parameter violates a documented precondition."""


def _q(args, *, barycentric):
    try:
        q = check_q(args.q)
    except ValueError as exc:
        raise ContractError(str(exc)) from None
    if barycentric and q == 1 and not args.unsafe_q1:
        raise ContractError(f"refusing q = 1: {Q1_WARNING}; pass --unsafe-q1 to run anyway")
    return q


def _weights(text, n):
    if text is None:
        return None
    try:
        w = [float(t) for t in text.split(",")]
    except ValueError:
        raise ContractError(f"--weights must be comma-separated reals, got {text!r}") from None
    if len(w) != n:
        raise ContractError(f"--weights has {len(w)} entries for {n} diagrams")
    if any(not np.isfinite(x) or x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-9:
        raise ContractError("--weights must be non-negative and sum to 1")
    return tuple(w)


def _manifest(args, output, **extra):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    io.write_json(f"{output}.manifest.json", {
        "command": args.command, "parameters": params, "version": __version__, **extra,
    })


def _read_diagrams(paths):
    return [io.read_diagram(p) for p in paths]


def _sibling(output, suffix):
    out = Path(output)
    return out.with_name(out.stem + suffix)


def cmd_extract(args):
    grid = io.read_grid(args.grid)
    pairs = extract_max_pairs(grid, connectivity=args.connectivity)
    if args.epsilon is not None:
        pairs = prune(pairs, args.epsilon)
    if args.top_k is not None:
        pairs = threshold_top_k(pairs, args.top_k)
    io.write_diagram(args.output, pairs)
    _manifest(args, args.output)


def cmd_dist(args):
    q = _q(args, barycentric=False)
    D = distance_matrix(_read_diagrams(args.diagrams), q)
    io.write_matrix(args.output, D)
    if args.svg:
        io.atomic_write(_sibling(args.output, ".svg"),
                        svg.heatmap(D, [Path(p).stem for p in args.diagrams]))
    _manifest(args, args.output)


def _bary_config(args, q, **kw):
    return BarycenterConfig(q=q, max_iter=args.T, epsilon=args.epsilon,
                            allow_q1=args.unsafe_q1, **kw)


def cmd_bary(args):
    q = _q(args, barycentric=True)
    diagrams = _read_diagrams(args.diagrams)
    weights = _weights(args.weights, len(diagrams))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = compute_barycenter(diagrams, _bary_config(args, q, weights=weights))
    _check_finite(result.barycenter, result.energy_trace)
    io.write_diagram(args.output, result.barycenter)
    io.write_json(_sibling(args.output, ".trace.json"), result.energy_trace)
    _manifest(args, args.output, n_iter=result.n_iter, converged=result.converged)


def cmd_cluster(args):
    q = _q(args, barycentric=True)
    diagrams = _read_diagrams(args.diagrams)
    if not 1 <= args.k <= len(diagrams):
        raise ContractError(f"--k must be in [1, {len(diagrams)}], got {args.k}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = kmeans(diagrams, args.k, q, _bary_config(args, q), args.seed,
                        max_iter=args.max_iter, n_init=args.n_init)
    _check_finite(result.total_energy, *result.centroids)
    io.write_labels(args.output, result.labels)
    centroids = []
    for j, c in enumerate(result.centroids):
        path = _sibling(args.output, f".centroid{j}.csv")
        io.write_diagram(path, prune(c, args.epsilon))
        centroids.append(path.name)
    _manifest(args, args.output, energy=result.total_energy, iterations=result.iterations,
              centroids=centroids)


def cmd_encode(args):
    q = _q(args, barycentric=True)
    diagrams = _read_diagrams(args.diagrams)
    if not 2 <= args.m <= len(diagrams):
        raise ContractError(f"--m must be in [2, {len(diagrams)}], got {args.m}")
    config = EncodeConfig(max_epochs=args.epochs, lr_atoms=args.lr_atoms,
                          lr_weights=args.lr_weights, barycenter=_bary_config(args, q))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = encode(diagrams, args.m, q, config, args.seed)
    _check_finite(result.coefficients, result.energy_trace, *result.atoms)
    atoms = []
    for j, a in enumerate(result.atoms):
        path = _sibling(args.output, f".atom{j}.csv")
        io.write_diagram(path, prune(a))
        atoms.append(path.name)
    io.write_json(args.output, {
        "q": q, "atoms": atoms, "inputs": list(args.diagrams),
        "coefficients": result.coefficients, "energy_trace": result.energy_trace,
    })
    _manifest(args, args.output, n_epochs=result.n_epochs)


def cmd_layout(args):
    bundle = io.read_json(args.bundle)
    try:
        atom_files, lam, q = bundle["atoms"], np.asarray(bundle["coefficients"]), bundle["q"]
    except KeyError as exc:
        raise io.ParseError(args.bundle, 0, f"bundle lacks key {exc}") from None
    if len(atom_files) != 3:
        raise ContractError(f"layout needs a 3-atom dictionary, got {len(atom_files)} atoms")
    base = Path(args.bundle).parent
    atoms = [io.read_diagram(base / f) for f in atom_files]
    if args.labels is not None:
        labels = [str(v) for v in io.read_labels(args.labels)]
    else:
        labels = [Path(p).stem for p in bundle.get("inputs", [])] or [str(i) for i in range(len(lam))]
    if len(labels) != len(lam):
        raise ContractError(f"{len(labels)} labels for {len(lam)} coefficient vectors")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        points, vertices = planar_layout(atoms, lam, q)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    io.write_layout(args.output, points, labels)
    if args.svg:
        io.atomic_write(_sibling(args.output, ".svg"), svg.scatter(points, labels, vertices))
    _manifest(args, args.output, vertices=vertices)


def cmd_plot(args):
    diagrams = _read_diagrams(args.diagrams)
    io.atomic_write(args.output, svg.diagram_plot(diagrams, [Path(p).stem for p in args.diagrams]))
    _manifest(args, args.output)


def cmd_synth(args):
    spec = DEFAULT_ENSEMBLE if args.spec is None else {**DEFAULT_ENSEMBLE, **io.read_json(args.spec)}
    try:
        grids, labels, outliers = make_outlier_ensemble(spec, args.seed)
    except (KeyError, TypeError) as exc:
        raise ContractError(f"invalid ensemble spec: {exc}") from None
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for i, g in enumerate(grids):
        io.write_grid(out / f"member{i:03d}.grid", g)
    io.write_labels(out / "labels.csv", labels)
    io.write_json(out / "ensemble.json", {"spec": spec, "seed": args.seed, "outliers": outliers})


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(np.asarray(v, dtype=float))):
            raise FloatingPointError("computation produced non-finite values")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pdrb", description="Robust W_q barycenters of persistence diagrams.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        return p

    def common(p, *, q=True, seed=False, bary=False):
        p.add_argument("-o", "--output", required=True, help="output path")
        if q:
            p.add_argument("--q", type=float, default=2.0, help="transport exponent (default 2)")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="PCG64 seed (default 0)")
        if bary:
            p.add_argument("--T", type=int, default=10, help="barycenter iterations (default 10)")
            p.add_argument("--epsilon", type=float, default=0.0,
                           help="drop output pairs with persistence <= epsilon")
            p.add_argument("--unsafe-q1", action="store_true",
                           help="allow q = 1 despite non-unique ground barycenters")

    p = add("extract", cmd_extract, "persistence pairs of maxima of a grid file")
    p.add_argument("grid")
    p.add_argument("--connectivity", choices=CONNECTIVITIES, default="full")
    p.add_argument("--top-k", type=int, default=None, help="keep the k most persistent pairs")
    p.add_argument("--epsilon", type=float, default=None,
                   help="drop pairs with persistence <= epsilon (default: keep all)")
    common(p, q=False)

    p = add("dist", cmd_dist, "pairwise W_q distance matrix")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--svg", action="store_true", help="also write a heatmap next to the output")
    common(p)

    p = add("bary", cmd_bary, "W_q barycenter of diagrams")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--weights", default=None, help="barycentric weights w1,...,wm")
    common(p, bary=True)

    p = add("cluster", cmd_cluster, "k-means of diagrams under W_q")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--n-init", type=int, default=1)
    common(p, seed=True, bary=True)

    p = add("encode", cmd_encode, "Wasserstein dictionary encoding")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--m", type=int, required=True, help="number of atoms")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr-atoms", type=float, default=1e-2)
    p.add_argument("--lr-weights", type=float, default=1e-2)
    common(p, seed=True, bary=True)

    p = add("layout", cmd_layout, "planar layout of a 3-atom encoding bundle")
    p.add_argument("bundle")
    p.add_argument("--labels", default=None, help="labels CSV, one integer per input")
    p.add_argument("--svg", action="store_true", help="also write a scatter plot")
    common(p, q=False)

    p = add("plot", cmd_plot, "SVG plot of persistence diagrams")
    p.add_argument("diagrams", nargs="+")
    common(p, q=False)

    p = add("synth", cmd_synth, "seeded synthetic Gaussian-mixture ensemble with outliers")
    p.add_argument("--spec", default=None, help="ensemble spec JSON (defaults fill gaps)")
    common(p, q=False, seed=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (io.ParseError, OSError) as exc:
        print(f"pdrb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"pdrb {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"pdrb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    return 0


if __name__ == "__main__":
    sys.exit(main())
