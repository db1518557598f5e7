"""qroe command line: JSON manifests in, JSON reports out.

Exit codes: 0 pass, 1 negative verdict, 2 unknown or budget exhausted,
3 input error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import asydim, coarse, morph, qrel, qura, suppexp, vna
from . import linalg as la
from .linalg import DEFAULT_TOL
from .qrel import ClassicalRelation

REPORT_VERSION = "1"
EXIT_PASS, EXIT_NEGATIVE, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3


class ManifestError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# ---------------------------------------------------------------- manifest parsing

def _get(obj, key, path, kind=None, default=...):
    if not isinstance(obj, dict):
        raise ManifestError(path, "expected an object")
    if key not in obj:
        if default is ...:
            raise ManifestError(f"{path}.{key}", "missing")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ManifestError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def _matrix(obj, path, n=None) -> np.ndarray:
    try:
        a = la.decode_array(obj, 2)
    except (TypeError, ValueError) as e:
        raise ManifestError(path, f"not a matrix ({e})") from None
    if a.shape[0] != a.shape[1]:
        raise ManifestError(path, f"matrix must be square, got {a.shape}")
    if n is not None and a.shape[0] != n:
        raise ManifestError(path, f"expected a {n} x {n} matrix, got {a.shape}")
    return a


def parse_algebra(node, path, tol):
    if not isinstance(node, dict):
        raise ManifestError(path, "expected an object")
    if "blocks" in node:
        blocks = _get(node, "blocks", path, list)
        try:
            return vna.algebra_from_blocks([tuple(b) for b in blocks], tol)
        except (TypeError, ValueError) as e:
            raise ManifestError(f"{path}.blocks", str(e)) from None
    if "diagonal" in node:
        n = _get(node, "diagonal", path, int)
        if n < 1:
            raise ManifestError(f"{path}.diagonal", "must be positive")
        return vna.diagonal_algebra(n, tol)
    if "standard_form" in node:
        n = _get(node, "standard_form", path, int)
        if n < 2:
            raise ManifestError(f"{path}.standard_form", "must be at least 2")
        return suppexp.standard_form_full_matrix(n)
    if "generators" in node:
        raw = _get(node, "generators", path, list)
        n = _get(node, "dim", path, int, None)
        if n is None:
            if not raw:
                raise ManifestError(f"{path}.dim", "required when there are no generators")
            n = _matrix(raw[0], f"{path}.generators[0]").shape[0]
        gens = [_matrix(g, f"{path}.generators[{i}]", n) for i, g in enumerate(raw)]
        return vna.algebra_from_generators(gens, n, tol)
    raise ManifestError(path, "algebra needs one of blocks, diagonal, standard_form, generators")


def parse_relation(node, M, path):
    if not isinstance(node, dict):
        raise ManifestError(path, "expected an object")
    n = M.ambient_dim
    if "classical" in node:
        inner = _get(node, "classical", path, dict)
        if _get(inner, "n", f"{path}.classical", int) != n:
            raise ManifestError(f"{path}.classical.n", f"must equal the algebra dimension {n}")
        return parse_relation({"pairs": _get(inner, "pairs", f"{path}.classical", list)}, M, f"{path}.classical")
    if "seed_matrices" in node:
        node = {"span": _get(node, "seed_matrices", path, list)}
    if "pairs" in node:
        if not vna.is_diagonal_algebra(M):
            raise ManifestError(path, "pair relations need a diagonal algebra")
        try:
            pairs = frozenset((int(x), int(y)) for x, y in _get(node, "pairs", path, list))
            E = ClassicalRelation(n, pairs)
        except (TypeError, ValueError) as e:
            raise ManifestError(f"{path}.pairs", str(e)) from None
        return qrel.relation_to_subspace(E, M)
    if "band" in node:
        if not vna.is_diagonal_algebra(M):
            raise ManifestError(path, "band relations need a diagonal algebra")
        r = _get(node, "band", path, (int, float))
        return qrel.relation_to_subspace(coarse.band_relation(coarse.path_distances(n), r), M)
    if "span" in node:
        mats = [_matrix(m, f"{path}.span[{i}]", n) for i, m in enumerate(_get(node, "span", path, list))]
        return qrel.bimodule_closure(M, mats)
    if "diagonal" in node:
        return qrel.diagonal_relation(M)
    raise ManifestError(path, "relation needs one of pairs, classical, band, span, seed_matrices, diagonal")


def parse_structure(node, path, tol, depth):
    M = parse_algebra(_get(node, "algebra", path), f"{path}.algebra", tol)
    key = "generators" if "generators" in node and "relations" not in node else "relations"
    rels = [parse_relation(r, M, f"{path}.{key}[{i}]") for i, r in enumerate(_get(node, key, path, list))]
    if depth is None:
        depth = _get(node, "max_depth", path, int, None)
    return coarse.build_ladder(rels, depth, algebra=M)


# ---------------------------------------------------------------- commands

def cmd_algebra(man, ctx):
    M = parse_algebra(_get(man, "algebra", "$"), "$.algebra", ctx["tol"])
    return {"mode": "exact", "dim": M.dim, "commutant_dim": M.commutant_basis.dim,
            "center_dim": M.center_basis.dim, "minimal_central_projections": len(M.minimal_central_projections),
            "blocks": None if M.block_form is None else [list(b) for b in M.block_form],
            "is_abelian": M.is_abelian}, EXIT_PASS


def cmd_structure(man, ctx):
    S = parse_structure(man, "$", ctx["tol"], ctx["depth"])
    out = {"mode": "exact", "ladder_dims": S.dims(), "stabilized": S.stabilized,
           "stabilization_level": S.stabilization_level, "max_depth": S.max_depth}
    code = EXIT_PASS if S.stabilized else EXIT_UNKNOWN
    if "query" in man:
        V = parse_relation(man["query"], S.algebra, "$.query")
        m = coarse.member_relation(S, V)
        out["membership"] = str(m)
        code = {"yes": EXIT_PASS, "no": EXIT_NEGATIVE, "unknown": EXIT_UNKNOWN}[m.status]
    return out, code


def cmd_qura(man, ctx):
    if "subalgebra" in man:
        M = parse_algebra(_get(man, "algebra", "$"), "$.algebra", ctx["tol"])
        A = parse_algebra(man["subalgebra"], "$.subalgebra", ctx["tol"])
        if A.ambient_dim != M.ambient_dim:
            raise ManifestError("$.subalgebra", "ambient dimension differs from the algebra")
        try:
            S = qura.structure_for_algebra(M, A)
        except qura.Refused as e:
            return {"mode": "exact", "refused": str(e), "certificate": la.encode_array(e.certificate)}, EXIT_NEGATIVE
    else:
        S = parse_structure(man, "$", ctx["tol"], ctx["depth"])
    R = qura.assemble_roe(S)
    if not R.stabilized:
        return {"mode": "exact", "stabilized": False, "roe_dim_lower_bound": S.top.dim}, EXIT_UNKNOWN
    out = {"mode": "exact"}
    out.update(qura.classify_triviality(R).report())
    return out, EXIT_PASS


def cmd_suppexp(man, ctx):
    M = parse_algebra(_get(man, "algebra", "$"), "$.algebra", ctx["tol"])
    if man.get("operator") == "transpose":
        if M.block_form is None or len(M.block_form) != 1 or M.block_form[0][0] != M.block_form[0][1]:
            raise ManifestError("$.operator", "transpose needs a standard-form algebra")
        a = suppexp.transpose_operator(M.block_form[0][0])
    else:
        a = _matrix(_get(man, "operator", "$"), "$.operator", M.ambient_dim)
    weights = man.get("weights")
    try:
        tau = vna.trace_functional(M, weights)
    except ValueError as e:
        raise ManifestError("$.weights", str(e)) from None
    lam = float(_get(man, "lambda", "$", (int, float)))
    form = man.get("form", "projection")
    if form not in ("projection", "vector"):
        raise ManifestError("$.form", "expected projection or vector")
    samples = ctx["samples"]
    if M.is_abelian:
        v = suppexp.projection_constrained_abelian(a, M, tau, lam, ctx["tol"])
    elif form == "projection":
        v = suppexp.projection_constrained_sampled(a, M, tau, lam, samples, ctx["seed"])
    else:
        v = suppexp.vector_constrained(a, M, tau, lam, samples, ctx["seed"])
    out = v.to_json()
    out["form"] = form
    code = {"satisfied": EXIT_PASS, "refuted": EXIT_NEGATIVE, "inconclusive": EXIT_UNKNOWN}[v.status]
    if v.inconclusive:
        out["budget_exhausted"] = True
    return out, code


def _classical_side(node, path, depth):
    n = _get(node, "points", path, int)
    rels = []
    for i, r in enumerate(_get(node, "relations", path, list)):
        p = f"{path}.relations[{i}]"
        if "pairs" in r:
            rels.append(ClassicalRelation(n, frozenset((int(x), int(y)) for x, y in r["pairs"])))
        elif "band" in r:
            rels.append(coarse.band_relation(coarse.path_distances(n), r["band"]))
        else:
            raise ManifestError(p, "classical relations need pairs or band")
    return n, rels, coarse.classical_space(n, rels, depth), coarse.classical_structure(n, rels, depth)


def cmd_morph(man, ctx):
    if "classical_map" in man:
        f = [int(y) for y in _get(man, "classical_map", "$", list)]
        nx, _, X, QX = _classical_side(_get(man, "domain", "$"), "$.domain", ctx["depth"])
        ny, _, Y, QY = _classical_side(_get(man, "codomain", "$"), "$.codomain", ctx["depth"])
        if len(f) != nx or min(f) < 0 or max(f) >= ny:
            raise ManifestError("$.classical_map", "map must send every domain point into the codomain")
        phi = morph.from_classical_function(f, ny)
        qc = morph.is_coarse(phi, QX, QY)
        qe = morph.is_expanding(phi, QX, QY)
        out = {"mode": "exact",
               "coarse": {"classical": morph.is_coarse_classical(f, X, Y), "quantum": qc.to_json()},
               "expanding": {"classical": morph.is_expanding_classical(f, X, Y), "quantum": qe.to_json()},
               "cobounded": morph.is_cobounded_classical(f, Y)}
        statuses = [qc.status, qe.status]
    elif "spatial" in man:
        sp = man["spatial"]
        Q = parse_structure(_get(man, "target", "$"), "$.target", ctx["tol"], ctx["depth"])
        R = parse_structure(_get(man, "source", "$"), "$.source", ctx["tol"], ctx["depth"])
        M, N = R.algebra, Q.algebra
        u = la.decode_array(_get(sp, "u", "$.spatial"), 2)
        r = _matrix(_get(sp, "r", "$.spatial"), "$.spatial.r", M.ambient_dim)
        try:
            phi = morph.SpatialHom(M, N, r, u)
        except ValueError as e:
            raise ManifestError("$.spatial", str(e)) from None
        qc = morph.is_coarse(phi, Q, R, ctx["samples"], ctx["seed"])
        out = {"mode": qc.mode, "coarse": qc.to_json()}
        RQ, RR = qura.assemble_roe(Q), qura.assemble_roe(R)
        emb = morph.embed_roe(phi, RQ, RR)
        out["embedding"] = emb.to_json()
        out["embedding"]["hereditary"] = morph.hereditary_image_check(emb, r, RR)
        statuses = [qc.status, "yes" if emb.ok else "no"]
    else:
        raise ManifestError("$", "morphism needs classical_map or spatial")
    if all(s == "yes" for s in statuses):
        code = EXIT_PASS
    elif "no" in statuses:
        code = EXIT_NEGATIVE
    else:
        code = EXIT_UNKNOWN
    return out, code


def cmd_asydim(man, ctx):
    n = _get(man, "points", "$", int)
    if "metric" in man and man["metric"] != "path":
        try:
            dist = coarse.check_metric(man["metric"])
        except ValueError as e:
            raise ManifestError("$.metric", str(e)) from None
    else:
        dist = coarse.path_distances(n)
    M = vna.diagonal_algebra(n, ctx["tol"])
    ent = _get(man, "entourage", "$")
    R = parse_relation(ent, M, "$.entourage")
    E = qrel.subspace_to_relation(R)
    if "search" in man:
        s = man["search"]
        res = asydim.search_decomposition(dist, E, _get(s, "n", "$.search", int),
                                          _get(s, "max_diam", "$.search", (int, float)))
        out = {"mode": "exact"}
        out.update(res.to_json())
        return out, EXIT_PASS if res.found else EXIT_NEGATIVE
    rels = [parse_relation(r, M, f"$.relations[{i}]") for i, r in enumerate(_get(man, "relations", "$", list))]
    S = coarse.build_ladder(rels, ctx["depth"], algebra=M)
    fams_in = _get(man, "families", "$", list)
    fams = []
    for i, fam in enumerate(fams_in):
        cur = []
        for j, p in enumerate(fam):
            path = f"$.families[{i}][{j}]"
            if isinstance(p, list) and all(isinstance(x, int) for x in p):
                if any(x < 0 or x >= n for x in p):
                    raise ManifestError(path, "atom index out of range")
                cur.append(asydim.atom_set_projection(M, p))
            else:
                cur.append(_matrix(p, path, n))
        fams.append(cur)
    B = parse_relation(man["bound"], M, "$.bound") if "bound" in man else None
    try:
        v = asydim.check_decomposition(S, R, fams, B, samples=ctx["samples"], seed=ctx["seed"])
    except ValueError as e:
        return {"mode": "exact", "accepted": False, "certificate": str(e)}, EXIT_NEGATIVE
    out = v.to_json()
    out["families"] = fams_in
    return out, EXIT_PASS if v.accepted else EXIT_NEGATIVE


def cmd_suite(man, ctx):
    from .suite import run_suite
    results = run_suite(ctx["tol"], ctx["seed"])
    ok = all(r["pass"] for r in results.values())
    return {"mode": "exact", "fixtures": results, "all_pass": ok}, EXIT_PASS if ok else EXIT_NEGATIVE


COMMANDS = {"algebra": cmd_algebra, "structure": cmd_structure, "qura": cmd_qura, "suppexp": cmd_suppexp,
            "morph": cmd_morph, "asydim": cmd_asydim, "suite": cmd_suite}


# ---------------------------------------------------------------- entry point

def _json_default(o):
    if isinstance(o, np.ndarray):
        return la.encode_array(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _clean(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def dumps(report) -> str:
    return json.dumps(_clean(report), default=_json_default, sort_keys=True, indent=2) + "\n"


def default_tol() -> float:
    env = os.environ.get("QROE_DEFAULT_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        val = float(env)
    except ValueError:
        raise ManifestError("$env.QROE_DEFAULT_TOL", f"not a number: {env!r}") from None
    if not val > 0:
        raise ManifestError("$env.QROE_DEFAULT_TOL", "must be positive")
    return val


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qroe", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"qroe {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--in", dest="infile", required=name != "suite", help="manifest JSON ('-' for stdin)")
        p.add_argument("--out", dest="outfile", default="-", help="report JSON ('-' for stdout)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--depth", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
    return ap


def _load(infile):
    if infile is None:
        return {"version": REPORT_VERSION}
    try:
        if infile == "-":
            text = sys.stdin.read()
        else:
            with open(infile) as fh:
                text = fh.read()
    except OSError as e:
        raise ManifestError("$", f"cannot read manifest: {e}") from None
    try:
        man = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestError(f"$ (line {e.lineno}, column {e.colno})", f"malformed JSON: {e.msg}") from None
    if not isinstance(man, dict):
        raise ManifestError("$", "manifest must be an object")
    if "version" not in man:
        raise ManifestError("$.version", "missing")
    return man


def _write(outfile, text):
    if outfile == "-":
        sys.stdout.write(text)
    else:
        with open(outfile, "w") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    report = {"version": REPORT_VERSION, "command": args.command}
    try:
        man = _load(args.infile)
        tol = args.tol if args.tol is not None else float(man.get("tol", default_tol()))
        if not tol > 0:
            raise ManifestError("$.tol", "must be positive")
        seed = args.seed if args.seed is not None else int(man.get("seed", 0))
        samples = args.samples if args.samples is not None else int(man.get("samples", 1000))
        ctx = {"tol": tol, "seed": seed, "depth": args.depth, "samples": samples}
        report.update({"seed": seed, "tol": tol})
        body, code = COMMANDS[args.command](man, ctx)
        report["result"] = body
    except ManifestError as e:
        report["error"] = {"path": e.path, "message": e.message}
        code = EXIT_INPUT
    except (ValueError, TypeError, KeyError) as e:
        # inconsistent manifest content detected below the parser
        report["error"] = {"path": "$", "message": f"{type(e).__name__}: {e}"}
        code = EXIT_INPUT
    report["exit_code"] = code
    if args.timing:
        report["wall_time"] = time.perf_counter() - t0
    try:
        _write(args.outfile, dumps(report))
    except OSError as e:
        sys.stderr.write(f"qroe: cannot write report: {e}\n")
        return EXIT_INPUT
    return code


if __name__ == "__main__":
    sys.exit(main())
