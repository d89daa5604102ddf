"""Command-line entry point: every check and experiment behind one binary.

Primary output (JSON or CSV) goes to stdout or --out and is byte-identical
across runs with the same seed and flags; the run manifest (flags, seed,
version, wall time) goes to stderr, or to <out>.manifest.json when --out is
given. Exit codes: 0 pass, 1 check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .quadspace import (
    QuadraticSpace,
    Subspace,
    orthogonal_frame,
    read_gram,
    signature,
)
from .posgrass import (
    GraphChart,
    NonPositivePlaneError,
    disc_embed,
    null_to_plane,
    plane_to_null,
    random_positive_plane,
    retract,
    standard_disc_frame,
)
from .perigeo import (
    CauchyDivisor,
    IntersectionKind,
    NotFujikiError,
    TwistorCurve,
    fujiki_polarize,
    monomial_form,
    period_image_rank,
    random_twistor_curve,
    twistor_cauchy_intersection,
)
from .lorkahler import closedness_suite, fubini_study_suite, invariance_suite
from .lattice_density import (
    HolomorphicDisc,
    density_csv,
    density_report,
    random_disc,
    standard_lattice,
)
from . import torusmod

_CHECK_DEFAULTS = {
    "lebrun": 1e-9,
    "disc-model": 1e-9,
    "retract": 1e-9,
    "twistor-intersect": 1e-10,
    "closedness": 1e-6,
    "fubini-study": 1e-8,
    "invariance": 1e-8,
}


def _usage(message: str) -> SystemExit:
    print(message, file=sys.stderr)
    return SystemExit(2)


def _parse_signature(text: str) -> QuadraticSpace:
    try:
        p, m = (int(tok) for tok in text.split(","))
    except ValueError:
        raise _usage(f"error: malformed signature {text!r} (expected p,m)")
    return QuadraticSpace.diagonal(p, m)


def _json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _tol(args, default: float) -> float:
    return default if args.tolerance is None else args.tolerance


# ---------------------------------------------------------------------------
# subcommands (each returns (exit_code, primary_text, manifest_extra))
# ---------------------------------------------------------------------------

def _cmd_signature(args):
    if args.lattice:
        lat = standard_lattice(args.lattice)
        p, m, z = lat.signature()
    else:
        if not args.gram:
            raise _usage("error: signature needs --lattice or --gram")
        gram = read_gram(open(args.gram, encoding="utf-8").read())
        if args.exact:
            p, m, z = signature(gram)
        else:
            p, m, z = signature(np.vectorize(float)(gram),
                                tol=args.tolerance)
    return 0, _json({"positive": p, "negative": m, "zero": z}), {}


def _cmd_lebrun(args):
    space = _parse_signature(args.signature)
    tol = _tol(args, _CHECK_DEFAULTS["lebrun"])
    rng = np.random.default_rng(args.seed)
    worst_plane = worst_null = 0.0
    law_violations = 0
    for _ in range(args.samples):
        W = random_positive_plane(space, rng)
        w = plane_to_null(W)
        worst_null = max(worst_null, abs(complex(space.q(w.vec, w.vec))))
        worst_plane = max(worst_plane, W.distance(null_to_plane(w)))
        if not plane_to_null(W.reverse()).same_line(np.conj(w.vec)):
            law_violations += 1
    payload = {
        "samples": args.samples,
        "max_plane_distance": worst_plane,
        "max_null_residual": worst_null,
        "conjugation_law_violations": law_violations,
    }
    ok = worst_plane < tol and worst_null < 1e-10 and law_violations == 0
    payload["check_passed"] = ok
    return (0 if ok else 1), _json(payload), {}


def _cmd_disc_model(args):
    space = QuadraticSpace.diagonal(2, 1)
    frame = standard_disc_frame(space)
    u, v, w = frame
    G = space.gram
    n = args.grid
    xs = np.linspace(-1.2, 1.2, n)
    mismatches = 0
    margin = np.zeros((n, n))
    for i, a in enumerate(xs):
        for j, b in enumerate(xs):
            basis = np.column_stack([v + a * u, w + b * u])
            g2 = basis.T @ G @ basis
            oracle = bool(np.linalg.eigvalsh(g2)[0] > 0)
            margin[i, j] = np.linalg.eigvalsh(g2)[0]
            try:
                disc_embed(space, a, b, frame)
                lib = True
            except NonPositivePlaneError:
                lib = False
            mismatches += lib != (a * a + b * b < 1.0) or lib != oracle
    # boundary-adjacent ring, half just inside, half just outside
    rng = np.random.default_rng(args.seed)
    boundary_mismatches = 0
    for k in range(args.boundary):
        theta = rng.uniform(0, 2 * np.pi)
        r2 = 1.0 + (5e-4 if k % 2 else -5e-4)
        a, b = np.sqrt(r2) * np.cos(theta), np.sqrt(r2) * np.sin(theta)
        try:
            disc_embed(space, a, b, frame)
            lib = True
        except NonPositivePlaneError:
            lib = False
        boundary_mismatches += lib != (r2 < 1.0)
    payload = {
        "grid": n * n,
        "boundary": args.boundary,
        "mismatches": int(mismatches),
        "boundary_mismatches": int(boundary_mismatches),
        "check_passed": mismatches == 0 and boundary_mismatches == 0,
    }
    extra = {}
    if args.plot:
        from .plotting import disc_model_figure
        path = (args.out.rsplit(".", 1)[0] if args.out else "disc_model") + ".png"
        A, B = np.meshgrid(xs, xs, indexing="ij")
        extra["figure"] = disc_model_figure(A, B, margin, path)
    code = 0 if payload["check_passed"] else 1
    return code, _json(payload), extra


def _cmd_retract(args):
    space = _parse_signature(args.signature)
    tol = _tol(args, _CHECK_DEFAULTS["retract"])
    rng = np.random.default_rng(args.seed)
    F, eps = orthogonal_frame(space)
    npos = int(np.sum(eps > 0))
    worst_orth = worst_idem = 0.0
    for _ in range(args.samples):
        W = random_positive_plane(space, rng)
        c = rng.standard_normal(space.dim - npos)
        c /= np.linalg.norm(c)
        t = rng.uniform(0, 0.7)
        p = rng.standard_normal(npos)
        p *= t / np.linalg.norm(p)
        u = F[:, npos:] @ c + F[:, :npos] @ p      # q(u,u) = t^2 - 1 < 0
        line = Subspace(space, u)
        R = retract(W, line)
        worst_orth = max(worst_orth, float(np.max(np.abs(u @ space.gram @ R.basis))))
        worst_idem = max(worst_idem, R.distance(retract(R, line)))
    payload = {
        "samples": args.samples,
        "max_orthogonality_residual": worst_orth,
        "max_idempotence_distance": worst_idem,
        "check_passed": worst_orth < tol and worst_idem < tol,
    }
    return (0 if payload["check_passed"] else 1), _json(payload), {}


def _cmd_twistor_intersect(args):
    space = _parse_signature(args.signature)
    tol = _tol(args, _CHECK_DEFAULTS["twistor-intersect"])
    rng = np.random.default_rng(args.seed)
    F, eps = orthogonal_frame(space)
    npos = int(np.sum(eps > 0))
    worst_div = worst_curve = 0.0
    pair_failures = 0
    for _ in range(args.samples):
        curve = random_twistor_curve(space, rng)
        c = rng.standard_normal(npos)
        c /= np.linalg.norm(c)
        t = rng.uniform(0, 0.9)
        m = rng.standard_normal(space.dim - npos)
        m *= t / np.linalg.norm(m)
        v = F[:, :npos] @ c + F[:, npos:] @ m      # q(v,v) = 1 - t^2 > 0
        divisor = CauchyDivisor(space, v)
        res = twistor_cauchy_intersection(curve, divisor)
        if res.kind is not IntersectionKind.HITS or len(res.planes) != 2:
            pair_failures += 1
            continue
        for P in res.planes:
            E = P.orthonormal_basis()
            worst_div = max(worst_div, float(np.max(np.abs(
                E.T @ space.gram @ v))) / np.sqrt(divisor.norm))
            prj = curve.frame @ (curve.frame.T @ space.gram) @ P.basis
            worst_curve = max(worst_curve, float(np.max(np.abs(prj - P.basis))))
        if res.planes[1].orientation_sign(res.planes[0]) != -1:
            pair_failures += 1
    # degenerate demonstration needs a positive vector orthogonal to U,
    # hence a second positive direction outside the 3-space: use (4, 1)
    demo_space = QuadraticSpace.diagonal(4, 1)
    demo_curve = TwistorCurve(demo_space, np.eye(5)[:, :3])
    demo = twistor_cauchy_intersection(
        demo_curve, CauchyDivisor(demo_space, np.eye(5)[:, 3]))
    payload = {
        "samples": args.samples,
        "max_divisor_residual": worst_div,
        "max_curve_residual": worst_curve,
        "conjugate_pair_failures": pair_failures,
        "degenerate_demo": demo.kind.value,
        "check_passed": (worst_div < tol and worst_curve < tol
                         and pair_failures == 0
                         and demo.kind is IntersectionKind.CONTAINED),
    }
    return (0 if payload["check_passed"] else 1), _json(payload), {}


def _cmd_closedness(args):
    space = _parse_signature(args.signature)
    tol = _tol(args, _CHECK_DEFAULTS["closedness"])
    out = closedness_suite(space, samples=args.samples, h=args.step,
                           seed=args.seed)
    out["check_passed"] = bool(out["residual_max"] < tol
                               and 1.8 <= out["order_estimate"] <= 2.2
                               and out["control_max"] > 1e-3)
    return (0 if out["check_passed"] else 1), _json(out), {}


def _cmd_fubini_study(args):
    space = _parse_signature(args.signature)
    tol = _tol(args, _CHECK_DEFAULTS["fubini-study"])
    out = fubini_study_suite(space, curves=args.curves, points=args.points,
                             seed=args.seed)
    out["check_passed"] = bool(out["max_deviation"] < tol)
    return (0 if out["check_passed"] else 1), _json(out), {}


def _cmd_invariance(args):
    space = _parse_signature(args.signature)
    tol = _tol(args, _CHECK_DEFAULTS["invariance"])
    out = invariance_suite(space, isometries=args.samples, seed=args.seed)
    out["check_passed"] = bool(out["residual_max"] < tol)
    return (0 if out["check_passed"] else 1), _json(out), {}


def _parse_disc(spec: str, space: QuadraticSpace) -> HolomorphicDisc:
    if spec.startswith("seed:"):
        return random_disc(space, int(spec[5:]))
    if spec.startswith("file:"):
        with open(spec[5:], encoding="utf-8") as fh:
            lines = [ln.split("#", 1)[0].strip() for ln in fh]
        lines = [ln for ln in lines if ln]
        degree = int(lines[0])
        rows = [[complex(tok) for tok in ln.split()] for ln in lines[1:]]
        if len(rows) != space.dim or any(len(r) != degree + 1 for r in rows):
            raise _usage("error: disc file needs dim rows of degree+1 "
                         "coefficients")
        return HolomorphicDisc(space, np.array(rows, dtype=complex).T)
    raise _usage(f"error: disc spec must be seed:<int> or file:<path>, "
                 f"got {spec!r}")


def _cmd_density(args):
    lattice = standard_lattice(args.lattice)
    heights = [int(h) for h in args.heights.split(",")]
    disc = _parse_disc(args.disc, lattice.space())
    report = density_report(disc, lattice, heights, norm_sign=args.norm_sign)
    extra = {"contained_vectors": report.contained}
    if args.plot:
        from .plotting import density_figure
        path = (args.out.rsplit(".", 1)[0] if args.out else "density") + ".png"
        extra["figure"] = density_figure(report, path)
    return 0, density_csv(report), extra


def _cmd_fujiki_polarize(args):
    with open(args.file, encoding="utf-8") as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    terms = []
    dim = args.dim
    for ln in lines:
        toks = ln.split()
        if dim is None:
            dim = len(toks) - 1
        expo = [int(t) for t in toks[:dim]]
        coeff = Fraction(toks[dim]) if args.exact else float(toks[dim])
        terms.append((expo, coeff))
    F = monomial_form(dim, args.n, terms, exact=args.exact)
    try:
        res = fujiki_polarize(F)
    except NotFujikiError as exc:
        return 1, _json({"error": str(exc), "check_passed": False}), {}
    if args.exact:
        gram = [[str(x) for x in row] for row in res.gram]
        const = str(res.constant)
    else:
        gram = [[float(x) for x in row] for row in res.gram]
        const = float(res.constant)
    return 0, _json({"gram": gram, "constant": const,
                     "residual": res.residual}), {}


def _cmd_torus_reconstruct(args):
    g, psi = torusmod.random_pair(args.n, args.seed)
    J = torusmod.two_out_of_three(g, psi)
    m = 2 * args.n
    PJ = psi @ J
    payload = {
        "n": args.n,
        "seed": args.seed,
        "residual_J2": float(np.max(np.abs(J @ J + np.eye(m)))),
        "residual_orthogonal": float(np.max(np.abs(J.T @ g @ J - g))),
        "residual_cau_symmetry": float(np.max(np.abs(PJ - PJ.T))),
        "cau_min_eig": float(np.linalg.eigvalsh(0.5 * (PJ + PJ.T))[0]),
        "orientation": torusmod.orientation_class(J),
        "dims": {
            "all": torusmod.tangent_dimension("all", J),
            "orthogonal": torusmod.tangent_dimension("orthogonal", J, g=g),
            "cau": torusmod.tangent_dimension("cau", J, psi=psi),
        },
        "transversality_defect": torusmod.transversality_defect(g, psi, J=J),
        "J": [[float(x) for x in row] for row in J],
    }
    ok = (payload["residual_J2"] < 1e-10
          and payload["residual_orthogonal"] < 1e-8
          and payload["residual_cau_symmetry"] < 1e-8
          and payload["cau_min_eig"] > 0
          and payload["transversality_defect"] == 0)
    payload["check_passed"] = ok
    return (0 if ok else 1), _json(payload), {}


def _parse_n_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _cmd_torus_dims(args):
    table = {}
    ok = True
    for n in _parse_n_range(args.n):
        J0 = torusmod.standard_complex_structure(n)
        Psi = torusmod.standard_symplectic(n)
        dims = {
            "all": torusmod.tangent_dimension("all", J0, exact=True),
            "orthogonal": torusmod.tangent_dimension(
                "orthogonal", J0, g=np.eye(2 * n), exact=True),
            "cau": torusmod.tangent_dimension("cau", J0, psi=Psi, exact=True),
        }
        dims["matches_formulas"] = (dims["all"] == 2 * n * n
                                    and dims["orthogonal"] == n * n - n
                                    and dims["cau"] == n * n + n)
        ok = ok and dims["matches_formulas"]
        table[str(n)] = dims
    table["check_passed"] = ok
    return (0 if ok else 1), _json(table), {}


def _cmd_period_rank(args):
    space = _parse_signature(args.signature)
    rng = np.random.default_rng(args.seed)
    if args.case == "twistor":
        curve = random_twistor_curve(space, rng)
        phi = lambda b: curve.point(complex(b[0], b[1]))
        points = [np.array([0.1, 0.2]), np.array([-0.3, 0.4])]
    elif args.case == "chart":
        chart = GraphChart(random_positive_plane(space, rng))

        def phi(b):
            A = np.zeros((chart.codim, 2))
            A[0, 0], A[0, 1], A[1, 0], A[1, 1] = b
            return chart.plane_at(A, check=False)

        points = [np.zeros(4), np.array([0.05, -0.02, 0.03, 0.01])]
    elif args.case == "constant":
        W = random_positive_plane(space, rng)
        phi = lambda b: W
        points = [np.zeros(2)]
    else:
        raise _usage(f"error: unknown case {args.case!r}")
    rank = period_image_rank(phi, points)
    return 0, _json({"case": args.case, "rank": rank}), {}


# ---------------------------------------------------------------------------
# parser plumbing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the subcommand's check tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--exact", action="store_true",
                        help="rational arithmetic where supported")
    common.add_argument("--out", default=None,
                        help="write primary output to this file "
                             "(manifest goes to <out>.manifest.json)")

    p = argparse.ArgumentParser(prog="periodgeom",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("signature", _cmd_signature, help="signature of a lattice or Gram file")
    sp.add_argument("--lattice", default=None)
    sp.add_argument("--gram", default=None)

    sp = add("lebrun", _cmd_lebrun, help="plane/null-vector roundtrip sweep")
    sp.add_argument("--signature", default="3,19")
    sp.add_argument("--samples", type=int, default=1000)

    sp = add("disc-model", _cmd_disc_model, help="disc chart positivity sweep")
    sp.add_argument("--grid", type=int, default=200)
    sp.add_argument("--boundary", type=int, default=500)
    sp.add_argument("--plot", action="store_true")

    sp = add("retract", _cmd_retract, help="negative-line retraction sweep")
    sp.add_argument("--signature", default="3,19")
    sp.add_argument("--samples", type=int, default=1000)

    sp = add("twistor-intersect", _cmd_twistor_intersect,
             help="twistor curve vs Cauchy divisor sweep")
    sp.add_argument("--signature", default="3,19")
    sp.add_argument("--samples", type=int, default=1000)

    sp = add("closedness", _cmd_closedness, help="finite-difference d omega sweep")
    sp.add_argument("--signature", default="3,4")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--step", type=float, default=1e-3)

    sp = add("fubini-study", _cmd_fubini_study,
             help="twistor restriction vs FS density")
    sp.add_argument("--signature", default="3,19")
    sp.add_argument("--curves", type=int, default=10)
    sp.add_argument("--points", type=int, default=50)

    sp = add("invariance", _cmd_invariance, help="isometry invariance sweep")
    sp.add_argument("--signature", default="3,19")
    sp.add_argument("--samples", type=int, default=100)

    sp = add("density", _cmd_density, help="integral Cauchy divisor density table")
    sp.add_argument("--lattice", default="diag:2,2")
    sp.add_argument("--disc", default="seed:42")
    sp.add_argument("--heights", default="1,2,4,8")
    sp.add_argument("--norm-sign", type=int, choices=(1, -1), default=1)
    sp.add_argument("--plot", action="store_true")

    sp = add("fujiki-polarize", _cmd_fujiki_polarize,
             help="recover q and c from a monomial functional")
    sp.add_argument("--file", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--dim", type=int, default=None)

    sp = add("torus-reconstruct", _cmd_torus_reconstruct,
             help="2-out-of-3 complex structure from a random (g, psi)")
    sp.add_argument("--n", type=int, default=3)

    sp = add("torus-dims", _cmd_torus_dims, help="tangent dimension table")
    sp.add_argument("--n", default="1..4")

    sp = add("period-rank", _cmd_period_rank, help="differential rank estimator")
    sp.add_argument("--case", choices=("twistor", "chart", "constant"),
                    default="twistor")
    sp.add_argument("--signature", default="3,19")

    return p


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code, text, extra = args.fn(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    manifest = {
        "subcommand": args.command,
        "flags": {k: v for k, v in sorted(vars(args).items())
                  if k not in ("fn", "command") and v is not None
                  and not callable(v)},
        "version": __version__,
        "wall_time_ms": (time.perf_counter() - start) * 1e3,
    }
    manifest.update(extra)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(_json(manifest))
    else:
        sys.stdout.write(text)
        sys.stderr.write(_json(manifest))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
