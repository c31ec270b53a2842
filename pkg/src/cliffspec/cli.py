"""Command-line front end.

Exit codes: 0 ok, 1 bad input (or a failed check/verification), 2 clustering
ambiguity, 3 map degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis as an
from . import calculus as ca
from . import moebius as mo
from . import spectrum as sp
from .clifford_core import to_blade_map
from .errors import AmbiguityError, CliffspecError, MapDegeneracyError

EXIT_OK, EXIT_INPUT, EXIT_AMBIGUITY, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# i/o ----------------------------------------------------------------------------

def _meta(args, **tolerances):
    if "cluster_tol" in tolerances and tolerances["cluster_tol"] is None:
        tolerances["cluster_tol"] = "1e-7 * ||M||_2"
    if "rank_tol" in tolerances and tolerances["rank_tol"] is None:
        tolerances["rank_tol"] = sp.DEFAULT_RANK_TOL
    return {"tool": "cliffspec", "version": __version__, "seed": args.seed, "tolerances": tolerances}


def _dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_json(source):
    """Parse inline JSON or the contents of a file."""
    text = source if source.lstrip().startswith(("{", "[")) else None
    if text is None:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {source}: {exc}") from exc


def _load_pair(data, symmetric):
    """Matrix document {"n": 2, "d": d, "A": [A1, A2]} as an OperatorTuple."""
    try:
        mats = [np.asarray(a, dtype=float) for a in data["A"]]
        n, d = int(data.get("n", len(mats))), int(data.get("d", mats[0].shape[0]))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise UsageError(f"malformed matrix document: {exc}") from exc
    if len(mats) != n or any(m.shape != (d, d) for m in mats):
        raise UsageError(f"matrix document declares n={n}, d={d} but the entries disagree")
    return ca.OperatorTuple(mats, check=symmetric)


def _pair_doc(t):
    return {"n": t.n, "d": t.d, "A": [m.tolist() for m in t.mats]}


def _example_pair(name):
    if name == "pauli":
        return sp.pauli_pair()
    if name == "fig1":
        M = sp.fig1_matrix()
        return ca.OperatorTuple((M.real, M.imag), check=False)
    raise UsageError(f"unknown example {name!r}")


def _pair(args, symmetric):
    if args.example:
        return _example_pair(args.example)
    if not args.matrices:
        raise UsageError("give --matrices FILE or --example NAME")
    return _load_pair(_load_json(args.matrices), symmetric)


def _parse_phi(text):
    if text == "identity":
        return sp.HoloMap.identity()
    if text == "fig1":
        return sp.fig1_phi()
    return sp.HoloMap.parse(text)


def _parse_point(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"cannot parse point {text!r}") from exc


# subcommands ---------------------------------------------------------------------

def cmd_spectrum(args):
    t = _pair(args, symmetric=False)
    meta = _meta(args, cluster_tol=args.cluster_tol, rank_tol=args.rank_tol)
    try:
        S = sp.joint_spectrum(t, args.cluster_tol, args.rank_tol)
    except AmbiguityError as exc:
        _write(args.out, _dumps({"meta": meta, "error": "ambiguity", "message": str(exc)}))
        print(f"clustering ambiguity: {exc}", file=sys.stderr)
        return EXIT_AMBIGUITY
    doc = {"meta": meta, "source": _pair_doc(t), **S.to_json()}
    _write(args.out, _dumps(doc))
    if args.svg:
        Path(args.svg).write_text(sp.render_spectrum(S, args.mode))
    return EXIT_OK


def cmd_specmap(args):
    data = _load_json(args.spectrum)
    S = sp.JointSpectrum.from_json(data)
    phi = _parse_phi(args.phi)
    meta = _meta(args, deriv_tol=args.deriv_tol, cluster_tol=args.cluster_tol, rank_tol=args.rank_tol)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        phi.check_disk()
    notes = [str(w.message) for w in caught]
    try:
        mapped = sp.spectral_map(S, phi, args.deriv_tol)
    except MapDegeneracyError as exc:
        _write(args.out, _dumps({"meta": meta, "error": "map degeneracy", "message": str(exc)}))
        print(f"map degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    doc = {"meta": meta, "phi": phi.spec(), "warnings": notes, **mapped.to_json()}
    code = EXIT_OK
    if args.verify:
        if args.verify in ("pauli", "fig1"):
            t = _example_pair(args.verify)
        else:
            t = _load_pair(_load_json(args.verify), symmetric=False)
        try:
            oracle = sp.joint_spectrum(sp.matrix_function(phi, sp.complexify(t), args.cluster_tol, args.rank_tol),
                                       args.cluster_tol, args.rank_tol)
        except AmbiguityError as exc:
            doc["verify"] = {"passed": False, "error": str(exc)}
            _write(args.out, _dumps(doc))
            return EXIT_AMBIGUITY
        ok, dist = sp.match_spectra(mapped, oracle, args.verify_tol)
        doc["verify"] = {"passed": bool(ok), "max_distance": float(dist), "tol": args.verify_tol}
        print(f"verify: {'PASS' if ok else 'FAIL'} (max distance {dist:.3e})", file=sys.stderr)
        code = EXIT_OK if ok else EXIT_INPUT
    _write(args.out, _dumps(doc))
    if args.svg:
        Path(args.svg).write_text(sp.render_spectrum(S, "mapped-pair", mapped))
    return code


def cmd_resolvent(args):
    t = _pair(args, symmetric=True)
    xs, ys, inside, member = ca.clifford_spectrum_grid(ca.embed(t), args.grid, args.radius)
    buf = io.StringIO()
    buf.write(f"# cliffspec {__version__} seed={args.seed} grid={args.grid} radius={args.radius!r} "
              f"cond_limit={ca.COND_LIMIT!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u1", "u2", "member"])
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if inside[i, j]:
                w.writerow([repr(float(x)), repr(float(y)), int(member[i, j])])
    _write(args.out, buf.getvalue())
    return EXIT_OK


def _function(name, dim):
    if name in ("1", "const"):
        return an.vacuum(dim)
    if name.startswith("z^"):
        if dim != 2:
            raise UsageError("z^k is defined for --dim 2")
        try:
            return an.complex_power(int(name[2:]))
        except ValueError as exc:
            raise UsageError(f"bad exponent in {name!r}") from exc
    if name.startswith("V:"):
        try:
            m = tuple(int(v) for v in name[2:].split(","))
        except ValueError as exc:
            raise UsageError(f"bad multi-index in {name!r}") from exc
        return an.v_basis(m, dim)
    raise UsageError(f"unknown function {name!r} (use 1, z^k or V:m1,...)")


def cmd_cauchy(args):
    f = _function(args.fn, args.dim)
    u = _parse_point(args.point)
    if u.size != args.dim:
        raise UsageError(f"point has {u.size} coordinates, expected {args.dim}")
    quad = an.sphere_rule(args.dim, args.nodes) if args.nodes else an.default_rule(args.dim)
    val = an.cauchy_integral(f, u, quad)
    doc = {"meta": _meta(args, nodes=quad.size), "fn": args.fn, "point": u.tolist(),
           "value": to_blade_map(val), "exact": to_blade_map(f.at(u))}
    if args.dim == 2:
        z = an.to_complex(val)
        doc["complex"] = [z.real, z.imag]
    _write(args.out, _dumps(doc))
    return EXIT_OK


def _element(source, dim=None):
    try:
        return mo.MoebElement.from_json(_load_json(source), dim)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed Möbius element: {exc}") from exc


def cmd_moeb(args):
    g = _element(args.g)
    meta = _meta(args)
    if args.op == "apply":
        if not args.x:
            raise UsageError("moeb apply needs --x")
        y = mo.moebius_apply(mo.from_uw(g), _parse_point(args.x))
        doc = {"meta": meta, "x": _parse_point(args.x).tolist(),
               "y": "infinity" if mo.is_infinity(y) else [float(v) for v in y]}
    elif args.op == "compose":
        if not args.h:
            raise UsageError("moeb compose needs --h")
        doc = {"meta": meta, **mo.compose(g, _element(args.h, g.dim)).to_json()}
    else:
        doc = {"meta": meta, **mo.inverse(g).to_json()}
    _write(args.out, _dumps(doc))
    return EXIT_OK


def cmd_check(args):
    from . import checks

    rows = checks.run(args.suite, args.seed)
    width = max(len(r.name) for r in rows)
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.value:.3e} < {r.tol:.0e}  {r.detail}")
    if args.out:
        doc = {"meta": _meta(args), "suite": args.suite, "results": [r.to_json() for r in rows]}
        # timings vary between runs; keep the document reproducible
        for r in doc["results"]:
            r.pop("seconds")
        _write(args.out, _dumps(doc))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_INPUT


# parser --------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="cliffspec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cliffspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--out", default=None, help="output path (default stdout)")

    def tolerances(q):
        q.add_argument("--cluster-tol", type=float, default=None)
        q.add_argument("--rank-tol", type=float, default=None)

    def source(q):
        g = q.add_mutually_exclusive_group()
        g.add_argument("--matrices", help='JSON {"n": 2, "d": d, "A": [A1, A2]}')
        g.add_argument("--example", choices=["pauli", "fig1"])

    q = sub.add_parser("spectrum", help="jet-labelled joint spectrum of a pair")
    source(q)
    common(q)
    tolerances(q)
    q.add_argument("--svg")
    q.add_argument("--mode", choices=["jet", "classical"], default="jet")
    q.set_defaults(func=cmd_spectrum)

    q = sub.add_parser("specmap", help="push a spectrum through a holomorphic map")
    q.add_argument("--spectrum", required=True)
    q.add_argument("--phi", required=True, help="poly:c0,c1,..., disk:re,im[,theta], identity or fig1")
    q.add_argument("--verify", help="matrix JSON (or pauli/fig1) for the matrix-function oracle")
    q.add_argument("--verify-tol", type=float, default=1e-6)
    q.add_argument("--deriv-tol", type=float, default=sp.DEFAULT_DERIV_TOL)
    q.add_argument("--svg")
    common(q)
    tolerances(q)
    q.set_defaults(func=cmd_specmap)

    q = sub.add_parser("resolvent", help="Clifford resolvent membership on a grid (CSV)")
    source(q)
    q.add_argument("--grid", type=int, default=101)
    q.add_argument("--radius", type=float, default=0.99)
    common(q)
    q.set_defaults(func=cmd_resolvent)

    q = sub.add_parser("cauchy", help="Cauchy integral of a monogenic function")
    q.add_argument("--dim", type=int, choices=[2, 3], default=2)
    q.add_argument("--fn", required=True, help="1, z^k (n = 2) or V:m1,...,mn")
    q.add_argument("--point", required=True)
    q.add_argument("--nodes", type=int, default=None)
    common(q)
    q.set_defaults(func=cmd_cauchy)

    q = sub.add_parser("moeb", help="Möbius elements in (u, w) coordinates")
    q.add_argument("op", choices=["apply", "compose", "inv"])
    q.add_argument("--g", required=True, help='JSON {"u": [...], "w": {...}} or a file')
    q.add_argument("--h")
    q.add_argument("--x")
    common(q)
    q.set_defaults(func=cmd_moeb)

    q = sub.add_parser("check", help="run the property suites")
    q.add_argument("--suite", choices=["all", "clifford", "moebius", "analysis", "calculus", "spectrum"],
                   default="all")
    q.add_argument("--seed", type=int, default=7)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AmbiguityError as exc:
        print(f"clustering ambiguity: {exc}", file=sys.stderr)
        return EXIT_AMBIGUITY
    except MapDegeneracyError as exc:
        print(f"map degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (UsageError, CliffspecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
