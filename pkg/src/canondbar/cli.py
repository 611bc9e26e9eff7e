"""Command-line front end.

Every subcommand writes a JSON report (sorted keys, config hash and seed
embedded, no timestamps) plus a separate timing file, and CSV point clouds
where applicable.  Exit status: 0 success, 1 failed invariant, 2 usage error,
3 numerical precondition failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .errors import DbarError, ParameterError
from .report import _jsonable

OUTPUT_ENV = "CANONDBAR_OUTPUT_DIR"


# -- serialization -------------------------------------------------------------------

def config_hash(config: dict) -> str:
    blob = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


SIG_DIGITS = 12
DECIMALS = 12


def _rounded(x):
    # BLAS and SIMD summation order depend on memory alignment, so the last
    # bits of a float differ between runs; reports carry a quantum of 1e-12
    if isinstance(x, float):
        return float(f"{round(x, DECIMALS):.{SIG_DIGITS}g}") + 0.0
    if isinstance(x, dict):
        return {k: _rounded(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_rounded(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_rounded(_jsonable(obj)), sort_keys=True, indent=2) + "\n"


def write_csv(path: Path, header: list, columns: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(_rounded(float(x))) for x in row])


def _split(z) -> list:
    z = np.asarray(z, dtype=complex).ravel()
    return [z.real, z.imag]


# -- subcommands ---------------------------------------------------------------------

def cmd_kernels(a, out: Path) -> dict:
    from .geometry import make_domain
    from .kernels import KernelSet, fit_kernel_decay
    from .report import PairSampler
    from .workflows import closed_form_errors, reproducing_error

    dom = make_domain(a.domain)
    if a.check == "closed-form":
        if not dom.is_unit_disc:
            raise ParameterError("closed-form check needs the unit disc")
        r = closed_form_errors(a.N, a.pairs, a.seed)
        w, z = r.pop("w"), r.pop("z")
        ks = KernelSet(dom, "nystrom-backed", a.N)
        S, K = ks.S(w, z), ks.K(w, z)
        rho = np.abs(z - w)
        ratio = np.abs(S) * rho / np.log(2 * dom.diameter / rho)
        write_csv(out / "kernels_pairs.csv",
                  ["w_re", "w_im", "z_re", "z_im", "ReS", "ImS", "ReK", "ImK", "bound_ratio"],
                  _split(w) + _split(z) + _split(S) + _split(K) + [ratio])
        rep = fit_kernel_decay(ks, PairSampler(dom, a.seed), "S-first", n=1000, doubling=False)
        ok = max(r["L"], r["S"], r["K"]) <= a.tol
        return {"status": "pass" if ok else "fail", "results": r, "estimate": rep.to_dict()}
    err = reproducing_error(dom, N=a.N)
    return {"status": "pass" if err <= 1e-6 else "fail", "results": {"reproducing_error": err}}


def cmd_estimate(a, out: Path) -> dict:
    from .geometry import make_domain
    from .greens import GREEN_FITS, GreenEvaluator, fit_green_bounds
    from .kernels import KERNEL_FITS, KernelSet, fit_kernel_decay
    from .report import PairSampler

    if a.bound in GREEN_FITS:
        dom = make_domain(a.domain)
        ev = GreenEvaluator(dom, N=a.N)
        rep = fit_green_bounds(ev, PairSampler(dom, a.seed, pole_floor=0.02 * dom.diameter),
                               a.bound, n=a.samples)
    elif a.bound in KERNEL_FITS:
        dom = make_domain(a.domain)
        rep = fit_kernel_decay(KernelSet(dom, None, a.N), PairSampler(dom, a.seed), a.bound,
                               n=a.samples)
    elif a.bound == "ee-bound":
        from .product import ProductPairSampler
        from .weights import audit_ee_bound, expand_e_derivative
        from .workflows import parse_domains

        pd = parse_domains(a.domains)
        if not 0 <= a.m <= pd.n - 1:
            raise ParameterError("need 0 <= m <= n - 1")
        tl = expand_e_derivative(tuple(range(pd.n)), pd.n - 1, tuple(range(a.m)))
        sigma = a.sigma if a.sigma is not None else 0.5 / (2 * (pd.n - 1))
        rep = audit_ee_bound(tl, ProductPairSampler(pd, a.seed), sigma, n=a.samples)
    elif a.bound == "pq-bound":
        from .geometry import make_domain
        from .kernels import KernelSet
        from .solve1d import norm_bound_probe
        from .workflows import DATA_1D

        dom = make_domain(a.domain)
        fam = [d for d, _ in DATA_1D.values()]
        rep = norm_bound_probe(KernelSet(dom), fam, a.p, a.q)
    elif a.bound == "uniform-bound":
        from .forms import bidisc_family
        from .product import uniform_bound_probe
        from .workflows import parse_domains

        rep = uniform_bound_probe(parse_domains(a.domains), bidisc_family(10))
    else:
        raise ParameterError(f"bound {a.bound!r} has no estimate workflow")
    ok = rep.finite and (a.stability_tol is None or rep.stability_ratio is None
                         or rep.stable(a.stability_tol))
    return {"status": "pass" if ok else "fail", "results": rep.to_dict()}


def cmd_solve1d(a, out: Path) -> dict:
    from .geometry import make_domain
    from .kernels import KernelSet
    from .solve1d import canonicity_defect, solve_T
    from .workflows import data_1d

    dom = make_domain(a.domain)
    ks = KernelSet(dom, None, a.N)
    f, exact = data_1d(a.data)
    u = solve_T(ks, f, None, a.grid, a.grid)
    write_csv(out / "solve1d_field.csv", ["re", "im", "u_re", "u_im"],
              _split(u.points) + _split(u.values))
    res = {"sup_norm": u.sup_norm, "l2_norm": u.l2_norm, "grid": u.meta,
           "canonicity_defects": canonicity_defect(ks, u) if dom.is_disc else None}
    ok = True
    if exact is not None and dom.is_unit_disc:
        res["sup_error"] = float(np.max(np.abs(u.values - exact(u.points))))
        ok = res["sup_error"] <= a.tol
    if res["canonicity_defects"] is not None:
        ok = ok and max(res["canonicity_defects"]) <= a.tol
    return {"status": "pass" if ok else "fail", "results": res}


def _defects_json(d: dict) -> dict:
    return {"max": d["max"], "best_effort": d["best_effort"],
            "defects": {",".join(map(str, k)): v for k, v in sorted(d["defects"].items())}}


def cmd_solve(a, out: Path) -> dict:
    from .forms import builtin_form
    from .product import TildeConfig, canonicity_defect_nd, solve_smooth, solve_tilde
    from .workflows import parse_domains

    pd = parse_domains(a.domains)
    f = builtin_form(a.form)
    T = pd.compact_targets(per_factor=a.per_factor, max_targets=a.max_targets, seed=a.seed)
    grid = {} if a.grid is None else {"n_radial": a.grid, "n_angular": 2 * a.grid}
    if a.mode == "smooth":
        u = solve_smooth(pd, f, T, **grid)
    else:
        u = solve_tilde(pd, f, T, TildeConfig() if a.grid is None
                        else TildeConfig(n_radial=a.grid, n_angular=2 * a.grid))
    res = {"mode": a.mode, "targets": len(T), "sup_norm": u.sup_norm}
    write_csv(out / "solve_targets.csv",
              sum(([f"z{j}_re", f"z{j}_im"] for j in range(pd.n)), []) + ["u_re", "u_im"],
              sum((_split(T[:, j]) for j in range(pd.n)), []) + _split(u.values))
    ok = True
    if f.exact is not None and pd.is_unit_polydisc:
        res["sup_error"] = float(np.max(np.abs(u.values - f.exact(T))))
        ok = res["sup_error"] <= 1e-2
    if f.deriv is not None:
        G = solve_smooth(pd, f, None, **grid)
        d = canonicity_defect_nd(pd, G, max_degree=6 if pd.n == 2 else 3)
        res["canonicity"] = _defects_json(d)
        res["canonicity_source"] = "tensor-grid output of the smooth operator"
        ok = ok and (d["best_effort"] or d["max"] <= 1e-3)
    return {"status": "pass" if ok else "fail", "results": res}


def cmd_oracle_compare(a, out: Path) -> dict:
    from .forms import builtin_form
    from .oracle import DiscreteDbarSystem, compare_with_tilde, least_norm_solve
    from .workflows import parse_domains

    pd = parse_domains(a.domains)
    f = builtin_form(a.form)
    sys_ = DiscreteDbarSystem(pd, f, a.grid)
    field = least_norm_solve(sys_, seed=a.seed)
    rec = compare_with_tilde(pd, f, a.grid, field=field)
    if f.exact is not None and pd.is_unit_polydisc:
        ex = f.exact(field.points)
        w = field.weights
        rec["oracle_rel_l2_error"] = float(np.sqrt(np.sum(np.abs(field.values - ex) ** 2 * w)
                                                   / max(np.sum(np.abs(ex) ** 2 * w), 1e-300)))
    ok = rec["rel_l2_diff"] <= 1e-2
    return {"status": "pass" if ok else "fail", "results": rec}


def cmd_stability(a, out: Path) -> dict:
    from .geometry import make_domain
    from .kernels import stability_probe

    levels = [int(x) for x in a.levels.split(",")]
    rows = stability_probe(make_domain(a.domain), levels, a.kappa, mode=a.mode)
    dev = [r["deviation"] for r in rows]
    dec = all(y < x for x, y in zip(dev[:-1], dev[1:]))
    ok = dec and dev[-1] <= a.tol
    return {"status": "pass" if ok else "fail",
            "results": {"levels": rows, "decreasing": dec, "final": dev[-1], "tol": a.tol}}


def cmd_appendix(a, out: Path) -> dict:
    from . import appendix as ap
    from .forms import _P, builtin_form

    rng = np.random.default_rng(a.seed)
    if a.test == "identity":
        t = rng.random((a.pairs, 2)) * 2 * np.pi
        zeta = np.exp(1j * t)
        z = (rng.random((a.pairs, 2)) * 0.95) * np.exp(2j * np.pi * rng.random((a.pairs, 2)))
        lhs, rhs = ap.cauchy_identity_check(zeta, z)
        err = float(np.max(np.abs(lhs - rhs) / np.abs(lhs)))
        return {"status": "pass" if err <= 1e-12 else "fail",
                "results": {"pairs": a.pairs, "max_rel_error": err}}
    if a.test == "bm":
        cases = [(ap.BidiscField.from_potential(_P(2, (1.0, (0, 0), (1, 0))), "zbar1"), [0.3, 0]),
                 (ap.BidiscField.from_potential(_P(2, (1.0, (1, 0), (0, 0))), "z1"), [0.2j, 0.1]),
                 (ap.BidiscField.from_potential(_P(2, (1.0, (0, 0), (1, 1))), "zbar1zbar2"),
                  [0.3 + 0.2j, -0.4])]
        rows = []
        for u, z in cases:
            z = np.asarray(z, dtype=complex)
            v = ap.bm_reconstruct(u, z)
            rows.append({"field": u.name, "z": z, "value": v,
                         "error": float(abs(v - u(z[None, :])[0]))})
        ok = max(r["error"] for r in rows) <= 1e-3
        return {"status": "pass" if ok else "fail", "results": {"cases": rows}}
    T = ap.unit_bidisc().compact_targets(per_factor=5, seed=a.seed)
    if a.test == "t1":
        fields = [ap.BidiscField.from_potential(_P(2, *t), nm) for nm, t in (
            ("zbar1zbar2+z1z2", ((1.0, (0, 0), (1, 1)), (1.0, (1, 1), (0, 0)))),
            ("z1^2zbar1", ((1.0, (2, 0), (1, 0)),)),
            ("mixed", ((1.0, (1, 0), (1, 1)), (0.5, (0, 1), (1, 0)))))]
        rows = [ap.check_t1(u, T) for u in fields]
        ok = max(r["residual"] for r in rows) <= 1e-3
        return {"status": "pass" if ok else "fail", "results": {"fields": rows}}
    if a.test == "t2":
        f = builtin_form(a.form)
        rep = ap.check_t2(ap.HenkinField(f), f)
        return {"status": "pass" if rep.finite else "fail", "results": rep.to_dict()}
    if a.test == "projection":
        from .product import solve_tilde

        f = builtin_form(a.form)
        Tc = ap.unit_bidisc().compact_targets(per_factor=5, max_targets=12, seed=a.seed)
        cp = ap.canonical_via_projection(ap.HenkinField(f), f, Tc)
        st = solve_tilde(ap.unit_bidisc(), f, Tc)
        err = float(np.max(np.abs(cp.values - st.values)))
        return {"status": "pass" if err <= 2e-2 else "fail",
                "results": {"targets": len(Tc), "sup_diff": err}}
    raise ParameterError(f"unknown appendix test {a.test!r}")


def cmd_report(a, out: Path) -> dict:
    src = Path(a.input) if a.input else out
    rows = {}
    for p in sorted(src.glob("*.json")):
        if p.name.endswith(".timing.json") or p.name == "report.json":
            continue
        try:
            d = json.loads(p.read_text())
        except json.JSONDecodeError:
            rows[p.name] = "unreadable"
            continue
        rows[p.name] = d.get("status", "unknown")
    ok = bool(rows) and all(v == "pass" for v in rows.values())
    return {"status": "pass" if ok else "fail", "results": {"reports": rows, "input": str(src)}}


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="canondbar", description="canonical dbar solver and checks")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or ./canondbar_out)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tag", default=None, help="suffix for the report file names")
    sub = p.add_subparsers(dest="cmd", required=True, metavar="subcommand")

    s = sub.add_parser("kernels", help="kernel checks")
    s.add_argument("--domain", default="disc")
    s.add_argument("--check", choices=["closed-form", "reproducing"], default="closed-form")
    s.add_argument("--pairs", type=int, default=100)
    s.add_argument("--N", type=int, default=256)
    s.add_argument("--tol", type=float, default=1e-8)

    s = sub.add_parser("estimate", help="empirical kernel and operator bounds")
    s.add_argument("--bound", required=True)
    s.add_argument("--domain", default="disc")
    s.add_argument("--domains", default="disc,disc")
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--N", type=int, default=256)
    s.add_argument("--m", type=int, default=0)
    s.add_argument("--sigma", type=float, default=None)
    s.add_argument("--p", type=float, default=np.inf)
    s.add_argument("--q", type=float, default=np.inf)
    s.add_argument("--stability-tol", type=float, default=None)

    s = sub.add_parser("solve1d", help="one-dimensional canonical solution")
    s.add_argument("--domain", default="disc")
    s.add_argument("--data", default="one")
    s.add_argument("--grid", type=int, default=128)
    s.add_argument("--N", type=int, default=256)
    s.add_argument("--tol", type=float, default=1e-3)

    s = sub.add_parser("solve", help="canonical solution on a product domain")
    s.add_argument("--domains", default="disc,disc")
    s.add_argument("--form", default="monomial11")
    s.add_argument("--mode", choices=["smooth", "tilde"], default="smooth")
    s.add_argument("--grid", type=int, default=None)
    s.add_argument("--per-factor", type=int, default=15)
    s.add_argument("--max-targets", type=int, default=24)

    s = sub.add_parser("oracle-compare", help="least-norm oracle against the integral operator")
    s.add_argument("--domains", default="disc,disc")
    s.add_argument("--form", default="monomial11")
    s.add_argument("--grid", type=int, default=32)

    s = sub.add_parser("stability", help="kernel stability along an exhaustion")
    s.add_argument("--domain", default="disc")
    s.add_argument("--levels", default="4,8,16,32")
    s.add_argument("--kappa", type=float, default=0.5)
    s.add_argument("--mode", choices=["collar", "scaling"], default="collar")
    s.add_argument("--tol", type=float, default=1e-2)

    s = sub.add_parser("appendix-check", help="bidisc representation checks")
    s.add_argument("--test", choices=["identity", "bm", "t1", "t2", "projection"], required=True)
    s.add_argument("--form", default="monomial11")
    s.add_argument("--pairs", type=int, default=1000)

    s = sub.add_parser("report", help="summarize the reports in a directory")
    s.add_argument("--input", default=None)
    return p


COMMANDS = {
    "kernels": cmd_kernels, "estimate": cmd_estimate, "solve1d": cmd_solve1d,
    "solve": cmd_solve, "oracle-compare": cmd_oracle_compare, "stability": cmd_stability,
    "appendix-check": cmd_appendix, "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Path(a.out or os.environ.get(OUTPUT_ENV) or "canondbar_out")
    out.mkdir(parents=True, exist_ok=True)
    config = {k: v for k, v in vars(a).items() if k not in ("out", "input", "tag")}
    name = a.cmd.replace("-", "_") + (f"-{a.tag}" if a.tag else "")
    t0 = time.perf_counter()
    try:
        body = COMMANDS[a.cmd](a, out)
        code = 0 if body["status"] == "pass" else 1
    except DbarError as exc:
        body = {"status": "error", "error": type(exc).__name__, "message": str(exc)}
        code = exc.exit_code
    elapsed = time.perf_counter() - t0
    report = {"subcommand": a.cmd, "config": config, "config_hash": config_hash(config),
              "seed": a.seed, **body}
    (out / f"{name}.json").write_text(dumps(report))
    (out / f"{name}.timing.json").write_text(dumps({"seconds": elapsed, "subcommand": a.cmd}))
    print(f"{a.cmd}: {report['status']} -> {out / (name + '.json')}")
    if code and "message" in body:
        print(f"{body['error']}: {body['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
