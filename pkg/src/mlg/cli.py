"""Command line interface.

Six subcommands run verification sweeps over a graph definition and emit a
deterministic structured-text report (stdout or --out) plus optional CSV
grid dumps (--csv). Exit codes: 0 all checks passed, 2 at least one check
failed, 1 usage / parse / runtime error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace

import numpy as np

from . import bernstein, config, curvature, geometry, lewy, report
from .errors import (
    BoundViolated,
    DefinitionError,
    DomainError,
    MlgError,
    NotCommuting,
)
from .report import FAIL, PASS, SKIP, Report

VERSION = "0.1.0"

# gradient-formula and round-trip checks are second-order accurate in the
# step, so their tolerances scale with (eta / 1e-3)^2 from the documented
# baselines below
GRADIENT_TOL_BASE = 1e-5
ROUND_TRIP_TOL_BASE = 1e-5
FRAME_TOL = 1e-10
H_SYMMETRY_TOL = 1e-9
REWRITE_TOL = 1e-10
BOCHNER_NOISE_FLOOR = 1e-9
CONVERGENCE_RATIO = 3.0


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the exit-code contract
    # reserves 2 for failed checks, so route usage problems through 1
    def error(self, message):
        raise UsageError(message)


def _scaled_tol(base: float, eta: float) -> float:
    return base * (eta / 1e-3) ** 2


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="mlg",
        description="Numerical verification toolkit for minimal Lagrangian "
        "graphs defined by three potentials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, point=False, mode=False):
        src = p.add_argument_group("definition source (exactly one required)")
        src.add_argument("--def", dest="def_file", metavar="FILE", help="definition file path")
        src.add_argument(
            "--fixture",
            choices=config.FIXTURE_NAMES,
            help="built-in fixture name",
        )
        p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
        p.add_argument("--csv", metavar="FILE", help="write per-grid-point values as CSV")
        p.add_argument(
            "--grid",
            type=int,
            metavar="N",
            help="override points per axis (default: definition value, 11 if unset)",
        )
        p.add_argument(
            "--eta",
            type=float,
            metavar="H",
            help="finite-difference step (default: definition fd_step, 1e-3 if unset)",
        )
        if point:
            p.add_argument(
                "--point",
                metavar='"x1,x2,..."',
                help="evaluation point (default: box center)",
            )
        if mode:
            p.add_argument(
                "--mode",
                choices=(lewy.MODE_COMPLEX, lewy.MODE_QUATERNIONIC),
                default=lewy.MODE_COMPLEX,
                help="which rotation family to apply (default: complex)",
            )
            p.add_argument(
                "--c-bound",
                type=float,
                metavar="C",
                help="Hessian lower-bound constant (default: derived from the sampled grid)",
            )
        return p

    common(sub.add_parser("check", help="Lagrangian residuals over the grid"))
    common(sub.add_parser("frame", help="eigenbasis, frame vectors and volume ratio at one point"), point=True)
    common(sub.add_parser("curvature", help="volume ratio, mean curvature and derivative identities"))
    common(sub.add_parser("bochner", help="curvature identity on interior grid points"))
    common(sub.add_parser("hypotheses", help="theorem hypothesis margins over the grid"))
    common(sub.add_parser("lewy", help="rotate the graph and verify the transformed bounds"), mode=True)
    return parser


def _load(args):
    if (args.def_file is None) == (args.fixture is None):
        raise UsageError("exactly one of --def FILE or --fixture NAME is required")
    if args.def_file is not None:
        defn = config.load_definition(args.def_file)
    else:
        defn = config.fixture(args.fixture)
    if args.grid is not None:
        if args.grid < 2:
            raise UsageError("--grid must be >= 2")
        defn = replace(defn, grid=args.grid)
    if args.eta is not None:
        if not args.eta > 0:
            raise UsageError("--eta must be positive")
        if isinstance(defn, config.GraphDefinition):
            defn = replace(defn, fd_step=args.eta)
    return defn


def _require_triple(defn) -> config.GraphDefinition:
    if isinstance(defn, config.GeneralMapFixture):
        raise UsageError(
            "fixture %r is a general map without a potential triple; "
            "it only supports the check command" % defn.name
        )
    return defn


def _eta(args, defn) -> float:
    if args.eta is not None:
        return args.eta
    if isinstance(defn, config.GraphDefinition):
        return defn.fd_step
    return config.DEFAULT_FD_STEP


def _point_cols(n: int) -> list[str]:
    return ["x%d" % (i + 1) for i in range(n)]


def _parse_point(text: str, n: int) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError("--point must be comma-separated numbers, got %r" % text) from None
    if len(vals) != n:
        raise UsageError("--point needs %d coordinates, got %d" % (n, len(vals)))
    return np.asarray(vals, dtype=np.float64)


def _witness(rep: Report, key: str, x) -> None:
    rep.add(key, np.asarray(x, dtype=np.float64))


def _domain_guard(rep: Report, ok: np.ndarray) -> np.ndarray:
    """Report domain violations; returns the mask of usable points."""
    bad = int((~ok).sum())
    if bad:
        rep.add("domain_error_points", bad, status=FAIL)
    return ok


# ---------------------------------------------------------------------------
# check


def _cmd_check(args):
    defn = _load(args)
    rep = Report("check", VERSION)
    rep.definition_echo(defn)

    if isinstance(defn, config.GeneralMapFixture):
        X = defn.grid_points()
        D1, D2, D3, ok = defn.jacobians(X)
        _domain_guard(rep, ok)
        res = np.array(
            [
                geometry.lagrangian_residual_general(D1[p], D2[p], D3[p]) if ok[p] else np.nan
                for p in range(X.shape[0])
            ]
        )
        usable = np.where(ok, res, -np.inf)
        worst = int(np.argmax(usable))
        rep.begin("results")
        rep.note("general map: second block is x itself, no potential triple exists")
        rep.note("only the first-order residual applies to this fixture")
        rep.add("points", X.shape[0])
        rep.check("lagrangian_residual_general_sup", float(usable[worst]), defn.lagrangian_tol)
        _witness(rep, "witness_point", X[worst])
        rep.end()
        rows = [list(X[p]) + [res[p]] for p in range(X.shape[0])]
        return rep, (_point_cols(defn.n) + ["residual_general"], rows)

    pt = defn.potential_triple()
    X = config.grid_points(defn)
    P, n = X.shape
    _, hess, _, ok = geometry.triple_jets_batch(pt, X)
    _domain_guard(rep, ok)
    safe = np.where(ok[:, None, None, None], hess, 0.0)

    res_gen = np.empty(P)
    res_comm = np.empty(P)
    for p in range(P):
        res_gen[p] = geometry.lagrangian_residual_general(safe[p, 0], safe[p, 1], safe[p, 2])
        res_comm[p] = geometry.commutator_residual_matrices(safe[p, 0], safe[p, 1], safe[p, 2])

    tangents = np.zeros((P, n, 4 * n))
    tangents[:, :, :n] = np.eye(n)
    for s in range(3):
        tangents[:, :, (s + 1) * n : (s + 2) * n] = np.transpose(safe[:, s], (0, 2, 1))
    pulls = np.empty((P, 3))
    for k, M in enumerate(geometry.symplectic_structures(n).triple):
        R = np.einsum("pam,mq,pbq->pab", tangents, M, tangents)
        pulls[:, k] = np.abs(R).max(axis=(1, 2))
    pull_max = pulls.max(axis=1)

    def mask(v):
        return np.where(ok, v, -np.inf)

    rep.begin("results")
    rep.add("points", P)
    w = int(np.argmax(mask(res_gen)))
    rep.check("lagrangian_residual_general_sup", float(res_gen[w]), defn.lagrangian_tol)
    _witness(rep, "witness_point", X[w])
    wc = int(np.argmax(mask(res_comm)))
    rep.check("commutator_residual_sup", float(res_comm[wc]), defn.lagrangian_tol)
    _witness(rep, "commutator_witness_point", X[wc])
    wp = int(np.argmax(mask(pull_max)))
    rep.check("symplectic_pullback_sup", float(pull_max[wp]), defn.lagrangian_tol)
    _witness(rep, "pullback_witness_point", X[wp])
    rep.end()

    rows = [
        list(X[p]) + [res_gen[p], res_comm[p], pull_max[p]]
        for p in range(P)
    ]
    header = _point_cols(n) + ["residual_general", "residual_commutator", "pullback_max"]
    return rep, (header, rows)


# ---------------------------------------------------------------------------
# frame


def _cmd_frame(args):
    defn = _require_triple(_load(args))
    pt = defn.potential_triple()
    n = defn.n
    x = (
        _parse_point(args.point, n)
        if args.point is not None
        else np.array([(lo + hi) / 2.0 for lo, hi in defn.box])
    )
    rep = Report("frame", VERSION)
    rep.definition_echo(defn)
    rep.begin("results")
    _witness(rep, "point", x)
    try:
        pg = curvature.point_geometry(pt, x, tol=defn.lagrangian_tol)
    except NotCommuting as exc:
        rep.add("joint_diagonalization", str(exc), status=FAIL)
        rep.end()
        return rep, None

    spec = pg.spectrum
    qf = pg.frame
    structures = geometry.symplectic_structures(n).triple
    rep.begin("spectrum")
    for i in range(n):
        rep.add("lambda_%d" % (i + 1), spec.lambdas[i])
    rep.add("normalizers", spec.normalizers)
    rep.end()
    rep.check(
        "star_omega_route_difference",
        abs(pg.star_omega - pg.star_omega_determinant),
        FRAME_TOL * (1.0 + abs(pg.star_omega_determinant)),
    )
    rep.add("star_omega_spectral", pg.star_omega)
    rep.add("star_omega_determinant", pg.star_omega_determinant)

    vecs = qf.all_vectors()
    gram = vecs @ vecs.T
    rep.check("orthonormality_defect", float(np.abs(gram - np.eye(4 * n)).max()), FRAME_TOL)
    defect = 0.0
    for s in range(3):
        mapped = qf.tangent @ structures[s].T
        defect = max(defect, float(np.abs(qf.normal[s] - mapped).max()))
    rep.check("structure_map_defect", defect, FRAME_TOL)

    rep.begin("frame_vectors")
    labels = ["e_%d" % (i + 1) for i in range(n)]
    labels += ["e_%d" % (s * n + i + 1) for s in range(1, 4) for i in range(n)]
    for label, v in zip(labels, vecs):
        rep.add(label, v)
    rep.end()
    rep.end()

    rows = [
        [float(spec.lambdas[i, 0]), float(spec.lambdas[i, 1]), float(spec.lambdas[i, 2]),
         float(spec.normalizers[i])]
        for i in range(n)
    ]
    return rep, (["lambda1", "lambda2", "lambda3", "normalizer"], rows)


# ---------------------------------------------------------------------------
# curvature


def _sample_indices(P: int, want: int = 9) -> np.ndarray:
    if P <= want:
        return np.arange(P)
    return np.unique(np.linspace(0, P - 1, want).round().astype(int))


def _cmd_curvature(args):
    defn = _require_triple(_load(args))
    pt = defn.potential_triple()
    eta = _eta(args, defn)
    X = config.grid_points(defn)
    rep = Report("curvature", VERSION)
    rep.definition_echo(defn)
    batch = curvature.batch_surface_data(pt, X)
    rep.begin("results")
    rep.add("points", X.shape[0])
    rep.add("eta", eta)
    _domain_guard(rep, batch.ok)
    usable = batch.ok
    star = np.where(usable, batch.star_omega, np.nan)
    rep.add("star_omega_min", float(np.nanmin(star)))
    rep.add("star_omega_max", float(np.nanmax(star)))
    meanH = np.where(usable, batch.mean_curvature, -np.inf)
    w = int(np.argmax(meanH))
    rep.check("mean_curvature_sup", float(meanH[w]), defn.minimality_tol)
    _witness(rep, "witness_point", X[w])

    sym_tol = H_SYMMETRY_TOL
    grad_tol = _scaled_tol(GRADIENT_TOL_BASE, eta)
    idx = _sample_indices(X.shape[0])
    sym_sup = 0.0
    grad_sup = 0.0
    rewrite_sup = 0.0
    sampled = 0
    try:
        for p in idx:
            if not usable[p]:
                continue
            pg = curvature.point_geometry(pt, X[p], tol=defn.lagrangian_tol)
            sff = curvature.second_fundamental_form(pg.embedding, pg.frame, pg.metric)
            sym_sup = max(sym_sup, sff.symmetry_defect())
            grad_sup = max(
                grad_sup, curvature.star_omega_gradient_check(pt, X[p], eta=eta)
            )
            rhs_q, rhs_s = curvature._rhs_forms(pg.spectrum, sff)
            rewrite_sup = max(rewrite_sup, abs(rhs_q - rhs_s))
            sampled += 1
    except NotCommuting as exc:
        rep.add("joint_diagonalization", str(exc), status=FAIL)
        rep.end()
        return rep, None
    rep.add("sampled_points", sampled)
    rep.check("h_symmetry_defect_sup", sym_sup, sym_tol)
    rep.check("star_omega_gradient_sup", grad_sup, grad_tol)
    rep.check("rhs_rewrite_difference_sup", rewrite_sup, REWRITE_TOL)
    rep.end()

    rows = [
        list(X[p]) + [batch.star_omega[p], batch.mean_curvature[p]]
        for p in range(X.shape[0])
    ]
    return rep, (_point_cols(defn.n) + ["star_omega", "mean_curvature"], rows)


# ---------------------------------------------------------------------------
# bochner


def _cmd_bochner(args):
    defn = _require_triple(_load(args))
    pt = defn.potential_triple()
    eta = _eta(args, defn)
    centers = config.interior_points(defn, margin=2)
    rep = Report("bochner", VERSION)
    rep.definition_echo(defn)
    rep.begin("results")
    rep.add("interior_points", centers.shape[0])
    rep.add("eta", eta)
    if centers.shape[0] == 0:
        rep.add("interior_grid", "grid too coarse for a 2-cell margin", status=FAIL)
        rep.end()
        return rep, None

    sweeps = {}
    for step in (4.0 * eta, 2.0 * eta, eta):
        sweeps[step] = curvature.bochner_sweep(
            pt, centers, eta=step, minimality_tol=defn.minimality_tol
        )
    fine = sweeps[eta]

    not_minimal = np.flatnonzero(fine.status == curvature.BOCH_NOT_MINIMAL)
    domain_bad = np.flatnonzero(fine.status == curvature.BOCH_DOMAIN_ERROR)
    ok_mask = fine.status == curvature.BOCH_OK
    if len(not_minimal):
        rep.add("not_minimal_points", len(not_minimal), status=FAIL)
        for p in not_minimal[:10]:
            _witness(rep, "not_minimal_at", centers[p])
        if len(not_minimal) > 10:
            rep.note("listed the first 10 of %d" % len(not_minimal))
    if len(domain_bad):
        rep.add("domain_error_points", len(domain_bad), status=FAIL)

    if ok_mask.any():
        disc = np.where(ok_mask, fine.discrepancy, -np.inf)
        allow = 1e-4 * (1.0 + np.abs(fine.rhs_quadratic))
        rel = np.where(ok_mask, fine.discrepancy / allow, -np.inf)
        w = int(np.argmax(rel))
        rep.add("worst_discrepancy", float(disc.max()))
        rep.check("worst_discrepancy_over_tol", float(rel[w]), 1.0)
        _witness(rep, "witness_point", centers[w])
        rewrite = np.abs(fine.rhs_quadratic - fine.rhs_symmetrized)[ok_mask].max()
        rep.check("rhs_rewrite_difference_sup", float(rewrite), REWRITE_TOL)

        rep.begin("convergence")
        sups = []
        for step in (4.0 * eta, 2.0 * eta, eta):
            sw = sweeps[step]
            sup = float(np.where(ok_mask, sw.discrepancy, -np.inf).max())
            sups.append(sup)
            rep.add("sup_discrepancy_at_%s" % report.fmt_float(step), sup)
        if sups[-1] <= BOCHNER_NOISE_FLOOR:
            rep.add("convergence_ratios", "skipped, discrepancy at noise floor", status=SKIP)
        else:
            ratios = [sups[0] / max(sups[1], 1e-300), sups[1] / max(sups[2], 1e-300)]
            ok_ratio = all(r >= CONVERGENCE_RATIO for r in ratios)
            rep.add(
                "convergence_ratios",
                ratios,
                status=PASS if ok_ratio else FAIL,
            )
            rep.note("second-order stencils need ratio >= %s per halving" % report.fmt_float(CONVERGENCE_RATIO))
        rep.end()
    rep.end()

    header = _point_cols(defn.n) + [
        "lhs", "rhs_quadratic", "rhs_symmetrized", "mean_curvature", "status",
    ]
    rows = [
        list(centers[p])
        + [
            fine.lhs[p],
            fine.rhs_quadratic[p],
            fine.rhs_symmetrized[p],
            fine.mean_curvature[p],
            curvature.BOCH_STATUS_NAMES[fine.status[p]],
        ]
        for p in range(centers.shape[0])
    ]
    return rep, (header, rows)


# ---------------------------------------------------------------------------
# hypotheses


def _cmd_hypotheses(args):
    defn = _require_triple(_load(args))
    pt = defn.potential_triple()
    X = config.grid_points(defn)
    rep = Report("hypotheses", VERSION)
    rep.definition_echo(defn)
    rep.begin("results")
    rep.add("points", X.shape[0])
    try:
        hyp = bernstein.evaluate_hypotheses(pt, X, tol=defn.lagrangian_tol)
    except NotCommuting as exc:
        rep.add("joint_diagonalization", str(exc), status=FAIL)
        rep.end()
        return rep, None
    except DomainError as exc:
        rep.add("domain", str(exc), status=FAIL)
        rep.end()
        return rep, None
    for entry in hyp.entries:
        rep.begin(entry.theorem_id)
        rep.add("holds", entry.holds, status=PASS if entry.holds else FAIL)
        rep.add("margin", entry.margin)
        _witness(rep, "witness_point", entry.witness_point)
        rep.add("K", entry.K)
        rep.add("sampled_points", entry.sampled_points)
        if entry.note:
            rep.note(entry.note)
        rep.end()
    rep.end()

    lams = bernstein.spectra_over_points(pt, X, tol=defn.lagrangian_tol)
    from .kernels import min_eig_pair_sweep, min_eig_sum3_sweep

    m3 = 3.0 + min_eig_sum3_sweep(lams)
    m2 = 1.5 + min_eig_pair_sweep(lams)
    m1 = 1.5 - (lams**2).sum(axis=2).max(axis=1)
    rows = [
        list(X[p]) + [m3[p], m2[p], m1[p]]
        for p in range(X.shape[0])
    ]
    header = _point_cols(defn.n) + [
        "margin_thm_32", "margin_cor_sij", "margin_cor_lambda_norm",
    ]
    return rep, (header, rows)


# ---------------------------------------------------------------------------
# lewy


def _cmd_lewy(args):
    defn = _require_triple(_load(args))
    pt = defn.potential_triple()
    eta = _eta(args, defn)
    X = config.grid_points(defn)
    rep = Report("lewy", VERSION)
    rep.definition_echo(defn)
    rep.begin("results")
    rep.add("mode", args.mode)
    rep.add("points", X.shape[0])

    grads, hess, _, ok = geometry.triple_jets_batch(pt, X)
    _domain_guard(rep, ok)
    eigs = np.linalg.eigvalsh(np.where(ok[:, None, None, None], hess, 0.0)[:, 0])
    mins = np.where(ok, eigs[:, 0], np.inf)
    maxs = np.where(ok, eigs[:, -1], -np.inf)
    sampled_min = float(mins.min())
    if args.c_bound is not None:
        C = args.c_bound
        rep.add("c_bound", C)
    else:
        C = max(0.0, -sampled_min) + 1e-9
        rep.add("c_bound", C)
        rep.note("c_bound derived from the sampled grid")
    rep.add("sampled_min_eigenvalue", sampled_min)

    try:
        params = lewy.lewy_params(args.mode, C)
    except MlgError as exc:
        rep.add("params", str(exc), status=FAIL)
        rep.end()
        return rep, None

    strict_bound = (
        bernstein.C_BOUND_SINGLE if args.mode == lewy.MODE_COMPLEX else bernstein.C_BOUND_TRIPLE
    )
    rep.add(
        "c_bound_hypothesis",
        "C < %s" % report.fmt_float(strict_bound),
        status=PASS if C < strict_bound else FAIL,
    )
    rep.add("h", params.h)
    rep.add("transformed_bound", params.transformed_bound)
    rep.add("jacobian_lower_bound", params.jacobian_lower_bound)
    rep.check("fixed_point_residual", params.fixed_point_residual(), 1e-12)

    tmin, tmax = np.inf, -np.inf
    violations = 0
    for p in range(X.shape[0]):
        if not ok[p]:
            continue
        try:
            tp = lewy.transform_point(X[p], grads[p, 0], hess[p, 0], params)
        except BoundViolated:
            violations += 1
            continue
        eigs = np.linalg.eigvalsh(tp.hess_ubar)
        tmin = min(tmin, float(eigs[0]))
        tmax = max(tmax, float(eigs[-1]))
    if violations:
        rep.add("bound_violations", violations, status=FAIL)
    rep.add("transformed_min_eigenvalue", tmin)
    rep.add("transformed_max_eigenvalue", tmax)
    overshoot = max(abs(tmin), abs(tmax)) - params.transformed_bound
    rep.check("transformed_range_overshoot", max(0.0, overshoot), 1e-9)

    idx = _sample_indices(X.shape[0], want=16)
    samples = X[idx][ok[idx]]
    try:
        rt = lewy.verify_lewy_round_trip(pt, params, samples, eta=eta)
        rep.check("round_trip_discrepancy", rt, _scaled_tol(ROUND_TRIP_TOL_BASE, eta))
    except BoundViolated as exc:
        rep.add("round_trip", str(exc), status=FAIL)
    rep.end()

    trans = np.full((X.shape[0], 2), np.nan)
    for p in range(X.shape[0]):
        if not ok[p]:
            continue
        lo = lewy.mobius_eigenvalues(params, np.array([mins[p]]))[0]
        hi = lewy.mobius_eigenvalues(params, np.array([maxs[p]]))[0]
        trans[p] = (lo, hi)
    rows = [
        list(X[p]) + [mins[p], maxs[p], trans[p, 0], trans[p, 1]]
        for p in range(X.shape[0])
    ]
    header = _point_cols(defn.n) + [
        "min_eigenvalue", "max_eigenvalue", "transformed_min", "transformed_max",
    ]
    return rep, (header, rows)


_COMMANDS = {
    "check": _cmd_check,
    "frame": _cmd_frame,
    "curvature": _cmd_curvature,
    "bochner": _cmd_bochner,
    "hypotheses": _cmd_hypotheses,
    "lewy": _cmd_lewy,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    start = time.perf_counter()
    try:
        rep, csv_payload = _COMMANDS[args.command](args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except DefinitionError as exc:
        print("definition error: %s" % exc, file=sys.stderr)
        return 1
    except (MlgError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    text = rep.render(wall_time_s=time.perf_counter() - start)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.csv and csv_payload is not None:
        header, rows = csv_payload
        report.write_csv(args.csv, header, rows)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
