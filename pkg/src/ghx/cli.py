"""Command-line front end: ``ghx <command> ...``.

Single instances are read from matrix text files (first line the
dimension, then n rows of complex entries).  ``--random`` runs a seeded
campaign instead; sample i always draws from ``stream(seed, i)``, chunks of
a fixed size are farmed out to ``GHX_THREADS`` worker threads and merged
in index order, so the JSON report does not depend on the thread count.

Exit codes: 0 success (member / no violations), 2 non-member or at least
one violation, 1 usage, input or precondition error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import report as reportlib
from .errors import ContractError, GhxError
from .garding import garding_gap, garding_gaps
from .herm import (DEFAULT_TOL, HermitianForm, MatrixFormatError, MetricPencil,
                   format_matrix_text, parse_matrix_text, proportionality)
from .hodge import log_concavity, verify_theorem_a
from .sampling import random_hermitian, random_metric, sample_gamma, stream
from .sympoly import MixedContext, hyperbolic_at, in_cone, in_gamma_m

CHUNK = 250
METRIC_STREAM = 1 << 40
MAX_RECORDS = 50

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(GhxError):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# -- input helpers -------------------------------------------------------------

def load_matrix(path) -> HermitianForm:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return parse_matrix_text(text)
    except MatrixFormatError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def thread_count() -> int:
    raw = os.environ.get("GHX_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise UsageError(f"GHX_THREADS must be an integer, got {raw!r}")


def resolve_metric(args, n: int) -> MetricPencil:
    if args.metric:
        G = MetricPencil(load_matrix(args.metric))
        if G.n != n:
            raise UsageError(f"metric has dimension {G.n}, expected {n}")
        return G
    if args.random_metric:
        return random_metric(stream(args.seed, METRIC_STREAM), n)
    return MetricPencil.identity(n)


def resolve_n(args, forms) -> int:
    if forms:
        dims = {f.n for f in forms}
        if len(dims) != 1:
            raise UsageError(f"input matrices have different dimensions {sorted(dims)}")
        n = dims.pop()
        if args.n is not None and args.n != n:
            raise UsageError(f"--n {args.n} does not match input dimension {n}")
        return n
    if args.n is None:
        raise UsageError("--n is required without input files")
    return args.n


def echo(args, G: MetricPencil, n: int, m: int, **extra) -> dict:
    out = {"command": args.command, "n": n, "m": m, "tol": args.tol}
    if args.random:
        out.update(seed=args.seed, samples=args.samples)
    out["metric"] = format_matrix_text(G.G)
    out.update(extra)
    return out


# -- campaign machinery --------------------------------------------------------

@dataclass
class Outcome:
    index: int
    score: float                     # smaller is worse
    violation: Optional[dict] = None
    tags: tuple = ()


def run_campaign(samples: int, work: Callable[[int, int], list]) -> list:
    chunks = [(s, min(s + CHUNK, samples)) for s in range(0, samples, CHUNK)]
    threads = thread_count()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda c: work(*c), chunks))
    else:
        parts = [work(*c) for c in chunks]
    return [o for part in parts for o in part]


def summarise(outcomes: list, args, score_name: str) -> dict:
    viol = [o for o in outcomes if o.violation is not None]
    worst = min(outcomes, key=lambda o: (o.score, o.index)) if outcomes else None
    tags = {}
    for o in outcomes:
        for t in o.tags:
            tags[t] = tags.get(t, 0) + 1
    out = {
        "samples": len(outcomes),
        "violations": len(viol),
        f"worst_{score_name}": worst.score if worst else None,
        "worst_index": worst.index if worst else None,
    }
    if tags:
        out["counts"] = dict(sorted(tags.items()))
    out["violation_records"] = [dict(seed=args.seed, index=o.index, **o.violation)
                                for o in viol[:MAX_RECORDS]]
    return out


def forms_text(mats) -> list:
    return [format_matrix_text(HermitianForm(a)) for a in mats]


# -- commands ------------------------------------------------------------------

def cmd_cone(args):
    x = load_matrix(args.matrix)
    n = resolve_n(args, [x])
    m = args.m or n
    G = resolve_metric(args, n)
    direction = load_matrix(args.direction) if args.direction else G.G
    gm = in_gamma_m(x, G, m, args.tol)
    cm = in_cone(MixedContext(m, G), direction, x, args.tol)
    rep = {"input": echo(args, G, n, m, matrix=format_matrix_text(x)),
           "sigmas": gm.sigmas, "margins": gm.margins, "member": gm.member,
           "first_failure": gm.first_failure(args.tol),
           "direction": format_matrix_text(direction),
           "roots": np.sort_complex(cm.roots), "cone_margin": cm.margin, "cone_member": cm.member}
    if args.hyperbolic_samples:
        hy = hyperbolic_at(MixedContext(m, G), direction, args.hyperbolic_samples, args.seed)
        rep["hyperbolicity"] = {"hyperbolic": hy.hyperbolic, "samples": hy.samples,
                                "witness": None if hy.witness is None else format_matrix_text(hy.witness)}
    return rep, EXIT_OK if gm.member else EXIT_FAIL


def cmd_garding(args):
    if args.random:
        n, m = args.n or 3, args.m or args.n or 3
        G = resolve_metric(args, n)

        def work(lo, hi):
            stack = []
            for i in range(lo, hi):
                rng = stream(args.seed, i)
                if args.proportional:
                    b = sample_gamma(rng, G, m)
                    c = np.exp(rng.uniform(-1.0, 1.0, m))
                    stack.append(c[:, None, None] * b)
                else:
                    stack.append(sample_gamma(rng, G, m, size=m))
            stack = np.array(stack)
            lhs, rhs = garding_gaps(stack, G)
            out = []
            for k, i in enumerate(range(lo, hi)):
                rel = (lhs[k] - rhs[k]) / rhs[k]
                bad = rel < -args.tol or (args.proportional and abs(rel) > args.equality_tol)
                v = None
                if bad:
                    v = {"lhs": lhs[k], "rhs": rhs[k], "relative_gap": rel,
                         "inputs": {"matrices": forms_text(stack[k]), "metric": format_matrix_text(G.G)}}
                # proportional tuples should sit on the equality case, so any |gap| is bad
                score = -abs(rel) if args.proportional else rel
                out.append(Outcome(i, float(score), v))
            return out

        res = summarise(run_campaign(args.samples, work), args,
                        "negated_abs_gap" if args.proportional else "relative_gap")
        rep = {"input": echo(args, G, n, m, proportional=args.proportional), "result": res}
        return rep, EXIT_OK if res["violations"] == 0 else EXIT_FAIL

    Bs = [load_matrix(p) for p in args.matrices]
    if not Bs:
        raise UsageError("give m matrix files or --random")
    n = resolve_n(args, Bs)
    m = len(Bs)
    if args.m and args.m != m:
        raise UsageError(f"--m {args.m} but {m} matrices given")
    G = resolve_metric(args, n)
    gg = garding_gap(Bs, G, args.tol)
    wit = None
    if gg.equality_witness is not None:
        wit = [{"pair": list(k), "ratio": v} for k, v in gg.equality_witness.items()]
    # a fully proportional tuple must sit on the equality case
    proportional = all(proportionality(Bs[i], Bs[0]) is not None for i in range(1, m))
    equality_missed = proportional and abs(gg.relative_gap) > args.equality_tol
    ok = gg.holds(args.tol) and not equality_missed
    rep = {"input": echo(args, G, n, m, matrices=forms_text(Bs)),
           "lhs": gg.lhs, "rhs": gg.rhs, "gap": gg.gap, "relative_gap": gg.relative_gap,
           "holds": gg.holds(args.tol), "proportional": proportional,
           "equality_missed": equality_missed, "equality_witness": wit}
    return rep, EXIT_OK if ok else EXIT_FAIL


def _hodge_verdict(r, n):
    problems = []
    if tuple(r.signature) != (1, 0, n * n - 1):
        problems.append("signature")
    if not r.nonsingular:
        problems.append("singular")
    if not r.primitive_negative:
        problems.append("primitive_not_negative")
    if r.decomposition_residual > 1e-10:
        problems.append("decomposition_residual")
    return problems


def _hodge_fields(r) -> dict:
    return {"signature": list(r.signature), "indeterminate": r.indeterminate,
            "primitive_max_eigenvalue": float(r.restricted_spectrum.max()),
            "relative_primitive_max": float(r.restricted_spectrum.max()) / r.scale,
            "min_abs_eigenvalue": r.min_abs_eigenvalue,
            "decomposition_residual": r.decomposition_residual}


def cmd_hodge(args):
    if args.random:
        n, m = args.n or 3, args.m or 2
        G = resolve_metric(args, n)

        def work(lo, hi):
            out = []
            for i in range(lo, hi):
                rng = stream(args.seed, i)
                if args.classical:
                    alphas = [G.G] * (m - 1)
                else:
                    alphas = list(sample_gamma(rng, G, m, size=m - 1))
                gamma = random_hermitian(rng, n)
                r = verify_theorem_a(alphas, G, gamma=gamma, check=False)
                probs = _hodge_verdict(r, n)
                v = None
                if probs:
                    v = {"problems": probs, **_hodge_fields(r),
                         "inputs": {"alphas": forms_text(alphas), "beta": format_matrix_text(gamma),
                                    "metric": format_matrix_text(G.G)}}
                out.append(Outcome(i, -float(r.restricted_spectrum.max()) / r.scale, v,
                                   ("signature " + ",".join(map(str, r.signature)),)))
            return out

        res = summarise(run_campaign(args.samples, work), args, "primitive_margin")
        rep = {"input": echo(args, G, n, m, classical=args.classical), "result": res}
        return rep, EXIT_OK if res["violations"] == 0 else EXIT_FAIL

    alphas = [load_matrix(p) for p in args.matrices]
    if not alphas:
        raise UsageError("give alpha_1 .. alpha_{m-1} files or --random")
    n = resolve_n(args, alphas)
    m = len(alphas) + 1
    if args.m and args.m != m:
        raise UsageError(f"--m {args.m} needs {args.m - 1} alpha files, got {len(alphas)}")
    G = resolve_metric(args, n)
    beta = load_matrix(args.beta) if args.beta else None
    r = verify_theorem_a(alphas, G, gamma=beta, seed=args.seed, tol=args.tol)
    probs = _hodge_verdict(r, n)
    rep = {"input": echo(args, G, n, m, alphas=forms_text(alphas),
                         beta=None if beta is None else format_matrix_text(beta)),
           **_hodge_fields(r), "gram_eigenvalues": r.eigenvalues,
           "restricted_spectrum": r.restricted_spectrum,
           "decomposition_constant": r.decomposition_constant, "problems": probs}
    return rep, EXIT_OK if not probs else EXIT_FAIL


def _lc_fields(lc) -> dict:
    return {"a": lc.a, "defects": lc.defects, "holds": lc.holds, "equality": lc.equality,
            "proportional": lc.proportional, "log_concave": lc.log_concave,
            "consistent": lc.consistent}


def cmd_logconcavity(args):
    if args.random:
        n, m = args.n or 3, args.m or args.n or 3
        G = resolve_metric(args, n)

        def work(lo, hi):
            out = []
            for i in range(lo, hi):
                rng = stream(args.seed, i)
                if args.proportional:
                    a = sample_gamma(rng, G, m)
                    b = float(np.exp(rng.uniform(-1.0, 1.0))) * a
                else:
                    a, b = sample_gamma(rng, G, m, size=2)
                lc = log_concavity(a, b, G, m, tol=args.tol, equality_tol=args.equality_tol)
                k = np.arange(1, m)
                score = float(np.min(lc.defects / lc.a[k] ** 2))
                v = None
                if not (lc.log_concave and lc.consistent):
                    v = {**_lc_fields(lc), "inputs": {"alpha": format_matrix_text(a),
                                                      "beta": format_matrix_text(b),
                                                      "metric": format_matrix_text(G.G)}}
                tags = ("equality",) if np.all(lc.equality) else ()
                out.append(Outcome(i, score, v, tags))
            return out

        res = summarise(run_campaign(args.samples, work), args, "relative_defect")
        rep = {"input": echo(args, G, n, m, proportional=args.proportional), "result": res}
        return rep, EXIT_OK if res["violations"] == 0 else EXIT_FAIL

    if len(args.matrices) != 2:
        raise UsageError("give exactly two files (alpha, beta) or --random")
    a, b = (load_matrix(p) for p in args.matrices)
    n = resolve_n(args, [a, b])
    m = args.m or n
    G = resolve_metric(args, n)
    lc = log_concavity(a, b, G, m, tol=args.tol, equality_tol=args.equality_tol)
    rep = {"input": echo(args, G, n, m, alpha=format_matrix_text(a), beta=format_matrix_text(b)),
           **_lc_fields(lc)}
    return rep, EXIT_OK if lc.log_concave and lc.consistent else EXIT_FAIL


def _torus_instance(args, alphas, beta, G, ctx, index):
    from .torus import random_potential, verify_theorem_a_torus
    psi = None if args.no_noise else random_potential(stream(args.seed, index, 1), ctx,
                                                      args.modes, args.amplitude)
    r = verify_theorem_a_torus(alphas, G, beta, psi, ctx, tol=args.tol)
    checks = r.checks()
    if args.zero_class:
        checks["gauge_recovered"] = r.gauge_residual <= 1e-8
    fields = {"checks": checks, "solver_residual": r.solver_residual,
              "primitivity_residual": r.primitivity_residual, "pointwise_max": r.pointwise_max,
              "pointwise_scale": r.pointwise_scale, "integrated": r.integrated,
              "constant_model": r.constant_model, "relative_mismatch": r.relative_mismatch,
              "gauge_residual": r.gauge_residual, "representer_min_eigenvalue": r.representer_min_eig}
    return r, psi, fields, all(checks.values())


def cmd_torus(args):
    from .torus import TorusContext, ddc, export_field
    if args.random:
        n, m = args.n or 2, args.m or 2
        G = resolve_metric(args, n)
        ctx = TorusContext(n, args.N or 0)

        def work(lo, hi):
            out = []
            for i in range(lo, hi):
                rng = stream(args.seed, i)
                alphas = list(sample_gamma(rng, G, m, size=m - 1))
                beta = np.zeros((n, n)) if args.zero_class else random_hermitian(rng, n)
                r, _, fields, ok = _torus_instance(args, alphas, beta, G, ctx, i)
                v = None
                if not ok:
                    v = {**fields, "inputs": {"alphas": forms_text(alphas),
                                              "beta": format_matrix_text(beta),
                                              "metric": format_matrix_text(G.G), "N": ctx.N,
                                              "modes": args.modes, "amplitude": args.amplitude}}
                out.append(Outcome(i, -r.relative_mismatch, v))
            return out

        res = summarise(run_campaign(args.samples, work), args, "negative_relative_mismatch")
        rep = {"input": echo(args, G, n, m, N=ctx.N, modes=args.modes, amplitude=args.amplitude,
                             zero_class=args.zero_class), "result": res}
        return rep, EXIT_OK if res["violations"] == 0 else EXIT_FAIL

    alphas = [load_matrix(p) for p in args.matrices]
    if not alphas:
        raise UsageError("give alpha_1 .. alpha_{m-1} files or --random")
    n = resolve_n(args, alphas)
    m = len(alphas) + 1
    if args.m and args.m != m:
        raise UsageError(f"--m {args.m} needs {args.m - 1} alpha files, got {len(alphas)}")
    G = resolve_metric(args, n)
    ctx = TorusContext(n, args.N or 0)
    if args.zero_class:
        beta = np.zeros((n, n))
    elif args.beta:
        beta = load_matrix(args.beta)
    else:
        beta = random_hermitian(stream(args.seed, args.index), n)
    r, psi, fields, ok = _torus_instance(args, alphas, beta, G, ctx, args.index)
    rep = {"input": echo(args, G, n, m, alphas=forms_text(alphas), beta=format_matrix_text(beta),
                         N=ctx.N, modes=args.modes, amplitude=args.amplitude, index=args.index,
                         seed=args.seed, noise=not args.no_noise),
           "primitive_class": format_matrix_text(r.beta_class), **fields}
    if args.snapshot:
        base = Path(args.snapshot)
        files = []
        if psi is not None:
            files += export_field(base.with_suffix(".psi.bin"), psi.values, ctx, "psi",
                                  "noise potential")
            files += export_field(base.with_suffix(".beta_hat.bin"),
                                  r.beta_class.matrix + ddc(psi, ctx), ctx, "beta_hat",
                                  "representative primitive class + ddc psi")
        rep["snapshots"] = [str(f) for f in files]
    return rep, EXIT_OK if ok else EXIT_FAIL


def cmd_selftest(args):
    from . import selftest
    return selftest.run(list_only=args.list, mutate=args.mutate, verbose=args.verbose)


# -- parser --------------------------------------------------------------------

def _common(p, campaign=True):
    p.add_argument("--config", help="JSON file of default flag values")
    p.add_argument("--n", type=int, help="matrix dimension")
    p.add_argument("--m", type=int, help="degree of sigma_m")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric", help="file holding the metric G (default identity)")
    p.add_argument("--random-metric", action="store_true", help="seeded random metric")
    p.add_argument("--json-out", help="also write the report here")
    if campaign:
        p.add_argument("--random", action="store_true", help="run a seeded random campaign")
        p.add_argument("--samples", type=int, default=1000)


def build_parser() -> Parser:
    ap = Parser(prog="ghx", description="Mixed Hodge-index and Garding-cone verification toolkit")
    sub = ap.add_subparsers(dest="command", parser_class=Parser, required=True)

    p = sub.add_parser("cone", help="Gamma_m membership of one matrix")
    _common(p, campaign=False)
    p.add_argument("matrix")
    p.add_argument("--direction", help="hyperbolicity direction (default: the metric)")
    p.add_argument("--hyperbolic-samples", type=int, default=0,
                   help="also probe hyperbolicity with this many random lines")
    p.set_defaults(func=cmd_cone, random=False)

    p = sub.add_parser("garding", help="Garding inequality for m matrices in Gamma_m")
    _common(p)
    p.add_argument("matrices", nargs="*")
    p.add_argument("--proportional", action="store_true", help="campaign over proportional tuples")
    p.add_argument("--equality-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_garding)

    p = sub.add_parser("hodge", help="Lorentzian signature and primitive negativity")
    _common(p)
    p.add_argument("matrices", nargs="*", help="alpha_1 .. alpha_{m-1}")
    p.add_argument("--beta", help="class to decompose (default: seeded random)")
    p.add_argument("--classical", action="store_true", help="campaign with every alpha = metric")
    p.set_defaults(func=cmd_hodge)

    p = sub.add_parser("logconcavity", help="log-concavity of mixed values a_k")
    _common(p)
    p.add_argument("matrices", nargs="*", help="alpha beta")
    p.add_argument("--proportional", action="store_true")
    p.add_argument("--equality-tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_logconcavity)

    p = sub.add_parser("torus", help="end-to-end torus pipeline")
    _common(p)
    p.add_argument("matrices", nargs="*", help="alpha_1 .. alpha_{m-1}")
    p.add_argument("--beta", help="class to make primitive (default: seeded random)")
    p.add_argument("--N", type=int, help="grid points per axis")
    p.add_argument("--modes", type=int, default=6)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--index", type=int, default=0, help="sample index selecting the noise stream")
    p.add_argument("--no-noise", action="store_true")
    p.add_argument("--zero-class", action="store_true", help="beta = 0: checks psi is undone")
    p.add_argument("--snapshot", help="export fields next to this path")
    p.set_defaults(func=cmd_torus)

    p = sub.add_parser("selftest", help="run the pinned regression cases")
    p.add_argument("--list", action="store_true")
    p.add_argument("--mutate", choices=["polarization-sign"])
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_selftest)
    return ap, sub


def _parse(argv):
    ap, sub = build_parser()
    args = ap.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load config {cfg_path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        sp = sub.choices[args.command]
        known = {a.dest for a in sp._actions}
        unknown = sorted(k for k in cfg if k.replace("-", "_") not in known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = ap.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
        out = args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ContractError, OSError) as exc:
        print(f"ghx: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if isinstance(out, int):
        return out
    rep, code = out
    text = reportlib.dumps(rep)
    sys.stdout.write(text)
    if getattr(args, "json_out", None):
        try:
            Path(args.json_out).write_text(text)
        except OSError as exc:
            print(f"ghx: error: cannot write {args.json_out}: {exc}", file=sys.stderr)
            return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
