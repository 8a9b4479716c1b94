"""Command line entry point.

Exit codes: 0 when every check passes, 1 when a verification fails, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .cnd import (
    amalgam_cnd,
    check_cnd,
    gns_embed,
    gns_residuals,
    hnn_cnd,
    unit_indicator,
    vanishing_subgroup,
)
from .constructions import (
    AmalgamatedProduct,
    FreeProduct,
    HNNExtension,
    compute_Z,
    load_spec,
    resolve_construction,
)
from .embeddings import DistortionCertificate, factor_embedding, standard_free_product_embedding
from .errors import ConfigurationError, HscompressError
from .estimator import distortion_profile, fit_compression, verify_certificate
from .hnn_chains import ChainParams, finite_instance, minimal_feasible_m, schedule, schedule_csv, verify_chains


def _group(args):
    if args.group_spec:
        return load_spec(args.group_spec)
    if args.construction:
        return resolve_construction(args.construction)
    raise ConfigurationError("give --group-spec FILE or --construction SPEC")


def _embedding(G):
    if isinstance(G, FreeProduct):
        return standard_free_product_embedding(G)
    return factor_embedding(G)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _profile(args, f):
    ball = f.group.ball(args.radius)
    return distortion_profile(f, ball, args.radius, args.mode, args.sample_size, args.seed)


def cmd_embed(args) -> int:
    G = _group(args)
    f = _embedding(G)
    ball = G.ball(args.radius)
    if args.format == "json":
        data = {G.format(x): {repr(k): float(v) for k, v in sorted(f.vector(x).items(), key=lambda kv: repr(kv[0]))}
                for x in ball}
        _emit(args, _json(data))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["element", "key", "value"])
        for x in ball:
            for k, v in sorted(f.vector(x).items(), key=lambda kv: repr(kv[0])):
                w.writerow([G.format(x), repr(k), repr(float(v))])
        _emit(args, buf.getvalue())
    return 0


def cmd_estimate(args) -> int:
    G = _group(args)
    f = _embedding(G)
    prof = _profile(args, f)
    fit = fit_compression(prof, args.C or [1.0])
    cert = verify_certificate(prof, f.certificate) if f.certificate else None
    if args.format == "json":
        out = prof.to_json()
        out["fit"] = {"curve": fit.curve, "regression": fit.regression, "headline": fit.headline,
                      "degenerate": fit.degenerate}
        out["certificate_pass"] = None if cert is None else cert.passed
        _emit(args, _json(out))
    else:
        _emit(args, prof.to_csv())
    print(f"eps_hat={fit.headline!r} regression={fit.regression!r}", file=sys.stderr)
    return 0 if cert is None or cert.passed else 1


def cmd_verify(args) -> int:
    G = _group(args)
    f = _embedding(G)
    cert = f.certificate
    if args.eps is not None or args.C or args.D is not None:
        base = cert or DistortionCertificate(1.0, 1.0, 0.0)
        cert = DistortionCertificate(
            args.eps if args.eps is not None else base.eps,
            args.C[0] if args.C else base.C,
            args.D if args.D is not None else base.D,
        )
    if cert is None:
        raise ConfigurationError("no certificate to verify")
    prof = _profile(args, f)
    res = verify_certificate(prof, cert)
    payload = {"pass": res.passed, "eps": cert.eps, "C": cert.C, "D": cert.D, "side": res.worst_side,
               "d": res.worst_d, "value": res.worst_value, "bound": res.worst_bound, "witness": list(res.witness)}
    if args.format == "json":
        _emit(args, _json(payload))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(payload))
        w.writerow([repr(v) if isinstance(v, float) else v for v in payload.values()])
        _emit(args, buf.getvalue())
    return 0 if res.passed else 1


def cmd_chains(args) -> int:
    G = _group(args) if (args.group_spec or args.construction) else finite_instance()
    if not isinstance(G, HNNExtension):
        raise ConfigurationError("chains need an HNN construction")
    Z = compute_Z(G.app)
    if args.s is None:
        params = ChainParams.minimal(args.R, args.eps, Z)
    else:
        params = ChainParams(args.R, args.eps, args.s, args.n or int((Z + 2) * args.R + 0.999999), Z)
    bad = params.violations()
    if bad:
        raise ConfigurationError("; ".join(bad))
    res = verify_chains(G, params, args.radius)
    if args.format == "json":
        _emit(args, _json({"params": vars(params) if hasattr(params, "__dict__") else str(params),
                           "Z": Z, "pass": res.passed,
                           "rows": [r.__dict__ for r in res.rows]}))
    else:
        _emit(args, res.to_csv())
    return 0 if res.passed else 1


def _cnd_for(G):
    if isinstance(G, FreeProduct):
        return amalgam_cnd(G, unit_indicator(G.factors[0]), unit_indicator(G.factors[1]))
    if isinstance(G, AmalgamatedProduct):
        F2 = [G._phi[f] for f in G.F]
        return amalgam_cnd(G, unit_indicator(G.factors[0], G.F), unit_indicator(G.factors[1], F2))
    if isinstance(G, HNNExtension):
        return hnn_cnd(G, unit_indicator(G.H, vanishing_subgroup(G)))
    raise ConfigurationError("cnd needs a free product, amalgam or HNN construction")


def cmd_cnd(args) -> int:
    G = _group(args)
    psi = _cnd_for(G)
    rows = []
    ok = True
    for r in range(1, args.radius + 1):
        ball = G.ball(r)
        rep = check_cnd(psi, ball, args.trials, args.seed)
        res = gns_residuals(psi, gns_embed(psi, ball))
        ok &= rep.passed and res.passed
        rows.append([r, rep.size, repr(rep.max_form), repr(rep.scale), int(rep.passed),
                     repr(res.max_norm_residual), repr(res.max_pair_residual), int(res.passed)])
    header = ["radius", "size", "max_form", "scale", "cnd_pass", "max_norm_residual", "max_pair_residual", "gns_pass"]
    if args.format == "json":
        _emit(args, _json({"rows": [dict(zip(header, row)) for row in rows], "pass": ok}))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        _emit(args, buf.getvalue())
    return 0 if ok else 1


def cmd_schedule(args) -> int:
    exps = range(args.min_exp, args.max_exp + 1, args.step)
    rows = [schedule(10.0**e, args.p, args.alpha1, args.C_const, args.D_const, args.Z) for e in exps]
    both = minimal_feasible_m(args.p, args.Z, "both")
    if args.format == "json":
        _emit(args, _json({"beta": rows[0].beta if rows else None, "minimal_m": str(both.m),
                           "monotone": both.monotone, "rows": [r.__dict__ for r in rows]}))
    else:
        _emit(args, schedule_csv(rows))
    print(f"beta={rows[0].beta!r} minimal_m={both.m} monotone={both.monotone}", file=sys.stderr)
    return 0 if both.monotone else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group-spec", metavar="FILE")
    common.add_argument("--construction", metavar="SPEC", help="shipped spec name, JSON file or inline JSON")
    common.add_argument("--radius", type=int, default=4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", metavar="FILE")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="hscompress", description="Verify explicit Hilbert-space embeddings of groups.")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("embed", cmd_embed, "dump embedding vectors over a ball"),
        ("estimate", cmd_estimate, "distortion profile and compression fit"),
        ("verify", cmd_verify, "check a distortion certificate"),
    ):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--mode", choices=("exhaustive", "sample"), default="exhaustive")
        sp.add_argument("--sample-size", type=int, default=200_000)
        sp.add_argument("--C", type=float, action="append")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--D", type=float)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("chains", parents=[common], help="chain and averaged-vector report")
    sp.add_argument("--R", type=float, default=3.0)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--s", type=int)
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=cmd_chains, radius=5)

    sp = sub.add_parser("cnd", parents=[common], help="CND checks and GNS residuals per ball")
    sp.add_argument("--trials", type=int, default=200)
    sp.set_defaults(func=cmd_cnd)

    sp = sub.add_parser("schedule", parents=[common], help="asymptotic parameter table")
    sp.add_argument("--p", type=float, default=0.05)
    sp.add_argument("--alpha1", type=float, default=1.0)
    sp.add_argument("--C-const", type=float, default=1.0)
    sp.add_argument("--D-const", type=float, default=0.0)
    sp.add_argument("--Z", type=int, default=2)
    sp.add_argument("--min-exp", type=int, default=1)
    sp.add_argument("--max-exp", type=int, default=60)
    sp.add_argument("--step", type=int, default=1)
    sp.set_defaults(func=cmd_schedule)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except HscompressError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
