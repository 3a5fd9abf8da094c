"""Command-line entry points.

Subcommands: sample, evolve, observable, quadrature, experiment,
list-experiments.  Exit codes: 0 success (declared checks pass), 2 a declared
acceptance-style check failed, 1 usage/config/IO error.  All floating-point
output goes through 17 significant digits so runs can be re-analyzed
bit-faithfully.  A flat INI config file (key = value under [run]/[ensemble])
can pre-set any flag; explicit flags win.
"""

import argparse
import configparser
import json
import os
import sys

import numpy as np

from .bump import bump_definition_hash
from .experiments import EXPERIMENTS, environment_fingerprint, run_experiment
from .flow import FlowConfig, evolve, reversibility_check
from .measure import EnsembleSpec, besov_diagnostic, sample_mu
from .observables import (
    a_n_kernel,
    density_f_tn,
    f_n,
    g_n,
    i_s_quadrature,
    q_n,
    q_pi,
)
from .spectrum import PlusSpectrum, mass

_F = "{:.17g}".format

_ENSEMBLE_KEYS = {"seed", "samples", "s", "cutoffs", "times", "galerkin_factor"}
_RUN_KEYS = {"threads", "out", "verbose"}


class CliError(Exception):
    pass


def _load_config(path):
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise CliError(f"config file {path!r} not readable")
    out = {}
    for section in cp.sections():
        allowed = {"ensemble": _ENSEMBLE_KEYS, "run": _RUN_KEYS}.get(section)
        if allowed is None:
            raise CliError(f"unknown config section [{section}]")
        for key, val in cp.items(section):
            if key not in allowed:
                raise CliError(f"unknown config key {key!r} in [{section}]")
            out[key] = val
    return out


def _threads(args, cfg):
    if args.threads is not None:
        return args.threads
    if "threads" in cfg:
        return int(cfg["threads"])
    env = os.environ.get("SZEGO_LAB_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _parse_int_list(text):
    return tuple(int(x) for x in str(text).replace(",", " ").split())


def _parse_float_list(text):
    return tuple(float(x) for x in str(text).replace(",", " ").split())


def _ensemble(args, cfg):
    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in cfg:
            return cast(cfg[key])
        return default

    return EnsembleSpec(
        seed=pick(args.seed, "seed", int, 0),
        sample_count=pick(args.samples, "samples", int, 100),
        s=pick(args.s, "s", float, 0.6),
        cutoffs=pick(args.cutoffs, "cutoffs", _parse_int_list, ()),
        times=pick(args.times, "times", _parse_float_list, ()),
        galerkin_factor=pick(args.galerkin_factor, "galerkin_factor", int, 32),
    )


def build_parser():
    p = argparse.ArgumentParser(prog="szego-lab",
                                description="Truncated cubic Szego flow laboratory")
    p.add_argument("--config", help="INI file with [run]/[ensemble] defaults")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sample", help="draw mu_s samples and dump coefficients")
    ps.add_argument("--seed", type=int)
    ps.add_argument("--samples", type=int)
    ps.add_argument("--s", type=float)
    ps.add_argument("--cutoff", type=int, default=64)
    _common_ensemble_flags(ps)

    pe = sub.add_parser("evolve", help="integrate the truncated flow")
    pe.add_argument("--mode", choices=("single", "constant", "random"),
                    default="single")
    pe.add_argument("--n", type=int, default=5, help="mode number (single)")
    pe.add_argument("--amp", type=float, default=2.0)
    pe.add_argument("--t", type=float, default=1.0)
    pe.add_argument("--cutoff", type=int, default=8)
    pe.add_argument("--integrator", choices=("rk4_fixed", "dp54_adaptive"),
                    default="dp54_adaptive")
    pe.add_argument("--dt", type=float, default=0.0)
    pe.add_argument("--rtol", type=float, default=1e-12)
    pe.add_argument("--seed", type=int)
    pe.add_argument("--samples", type=int)
    pe.add_argument("--s", type=float)
    _common_ensemble_flags(pe)

    po = sub.add_parser("observable", help="evaluate one observable on a sample")
    po.add_argument("name", choices=("q-pi", "q-n", "f-n", "g-n", "a-n",
                                     "density", "besov"))
    po.add_argument("--seed", type=int)
    po.add_argument("--samples", type=int)
    po.add_argument("--s", type=float)
    po.add_argument("--sample-index", type=int, default=0)
    po.add_argument("--cutoff", type=int, default=64)
    po.add_argument("--block", type=int, default=16)
    po.add_argument("--t", type=float, default=0.1)
    po.add_argument("--mode-n", type=int, default=0)
    po.add_argument("--p", type=float, default=4.0)
    _common_ensemble_flags(po)

    pq = sub.add_parser("quadrature", help="the constant I_s, three routes")
    pq.add_argument("--s", type=float, required=True)

    px = sub.add_parser("experiment", help="run a scripted Monte Carlo study")
    px.add_argument("name", help="experiment name (see list-experiments)")
    px.add_argument("--seed", type=int)
    px.add_argument("--samples", type=int)
    px.add_argument("--s", type=float)
    px.add_argument("--no-retry", action="store_true")
    _common_ensemble_flags(px)

    sub.add_parser("list-experiments", help="names of available experiments")
    return p


def _common_ensemble_flags(sp):
    sp.add_argument("--cutoffs", type=_parse_int_list, default=None)
    sp.add_argument("--times", type=_parse_float_list, default=None)
    sp.add_argument("--galerkin-factor", dest="galerkin_factor", type=int,
                    default=None)


def _cmd_sample(args, cfg, threads):
    spec = _ensemble(args, cfg)
    rows = ["sample,n,re,im"]
    for i in range(spec.sample_count):
        u = sample_mu(spec, i, args.cutoff)
        for n, c in enumerate(u.coeffs):
            rows.append(f"{i},{n},{_F(c.real)},{_F(c.imag)}")
    text = "\n".join(rows) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "samples.csv")
        with open(path, "w") as fh:
            fh.write(text)
        manifest = {
            "seed": spec.seed, "s": spec.s, "samples": spec.sample_count,
            "cutoff": args.cutoff, "phi_hash": bump_definition_hash(),
            "environment": environment_fingerprint(),
        }
        with open(os.path.join(args.out, "samples.manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_evolve(args, cfg, threads):
    flow_cfg = FlowConfig(cutoff=args.cutoff, integrator=args.integrator,
                          dt=args.dt, rtol=args.rtol, atol=1e-14)
    if args.mode == "single":
        c = np.zeros(args.cutoff, dtype=complex)
        if args.n >= args.cutoff:
            raise CliError("--n must be below --cutoff")
        c[args.n] = args.amp
        u0 = PlusSpectrum(c)
        traj = evolve(u0, args.t, flow_cfg)
        exact = args.amp * np.exp(-1j * args.amp ** 2 * args.t)
        got = traj.states[-1].coeffs[args.n]
        rest = np.delete(traj.states[-1].coeffs, args.n)
        err = abs(got - exact) + float(np.max(np.abs(rest), initial=0.0))
        print(f"single-mode max error vs exact phase rotation: {_F(err)}")
        return 0 if err <= 1e-10 else 2
    if args.mode == "constant":
        c = np.zeros(args.cutoff, dtype=complex)
        c[0] = args.amp
        traj = evolve(PlusSpectrum(c), args.t, flow_cfg)
        exact = args.amp * np.exp(-1j * args.amp ** 2 * args.t)
        err = abs(traj.states[-1].coeffs[0] - exact) + float(
            np.max(np.abs(traj.states[-1].coeffs[1:]), initial=0.0))
        print(f"constant-datum max error vs exact phase rotation: {_F(err)}")
        return 0 if err <= 1e-10 else 2
    spec = _ensemble(args, cfg)
    u0 = sample_mu(spec, 0, args.cutoff)
    rev = reversibility_check(u0, args.t, flow_cfg)
    traj = evolve(u0, args.t, flow_cfg)
    drift = max(
        abs(traj.conserved[k][-1] - traj.conserved[k][0])
        / max(abs(traj.conserved[k][0]), 1e-300)
        for k in ("mass", "momentum", "hamiltonian")
    )
    print(f"reversibility L2 error: {_F(rev)}")
    print(f"max conserved-quantity drift: {_F(drift)}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        traj.dump(os.path.join(args.out, "trajectory"))
    return 0


def _cmd_observable(args, cfg, threads):
    spec = _ensemble(args, cfg)
    u = sample_mu(spec, args.sample_index, args.cutoff)
    if args.name == "q-pi":
        val = q_pi(u, spec.s, args.cutoff)
        print(f"Q_pi(u; s={spec.s}, N={args.cutoff}) = {_F(val)}")
    elif args.name == "q-n":
        val = q_n(u, args.block)
        print(f"Q_N(u; N={args.block}) = {_F(val)}")
    elif args.name == "f-n":
        val = f_n(u, spec.s, args.block)
        print(f"F_N(u; s={spec.s}, N={args.block}) = {_F(val)}")
    elif args.name == "g-n":
        val = g_n(u, spec.s, args.block)
        print(f"G_N(u; s={spec.s}, N={args.block}) = {_F(val)}")
    elif args.name == "a-n":
        val = a_n_kernel(args.mode_n, spec.s, args.block)
        print(f"A_N({args.mode_n}; s={spec.s}, N={args.block}) = {_F(val)}")
    elif args.name == "density":
        fc = FlowConfig(cutoff=args.cutoff, rtol=1e-10, atol=1e-13)
        d = density_f_tn(u, args.t, spec.s, fc)
        print(f"f_tN value = {_F(d.value)}")
        print(f"log density (formula)  = {_F(d.log_formula)}")
        print(f"log density (integral) = {_F(d.log_integral)}")
    elif args.name == "besov":
        for n, v in besov_diagnostic(u, spec.s, int(args.p)):
            print(f"N={n} N^(s-1/2)||P_N u||_{{L^{int(args.p)}}} = {_F(v)}")
    return 0


def _cmd_quadrature(args):
    res = i_s_quadrature(args.s)
    print(f"I_s({_F(args.s)}) = {_F(res.value)}")
    print(f"quadrature error estimate = {_F(res.error_estimate)}")
    print(f"(4s-3)I_s by triple/double/1-d routes: "
          f"{_F(res.scaled_triple)} {_F(res.scaled_double)} {_F(res.scaled_oned)}")
    print(f"cross-check residual = {_F(res.residual)}")
    if not res.converged:
        print("warning: representations disagree beyond 1e-6", file=sys.stderr)
        return 2
    return 0


def _cmd_experiment(args, cfg, threads):
    if args.name not in EXPERIMENTS:
        raise CliError(f"unknown experiment {args.name!r}; "
                       f"try list-experiments")
    spec = _ensemble(args, cfg)
    out_dir = args.out or "runs"
    rep = run_experiment(args.name, spec, out_dir=out_dir, threads=threads,
                         retry_factor=1 if args.no_retry else 4)
    for c in rep.checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['name']}: observed {_F(c['observed'])} "
              f"(threshold {_F(c['threshold'])})")
    for f in rep.fits:
        lo, hi = f["ci"]
        print(f"fit {f['quantity']}: exponent {_F(f['exponent'])} "
              f"CI [{_F(lo)}, {_F(hi)}]")
    if rep.params.get("degenerate"):
        print("degenerate case (s = 3/4): reported without sign checks")
    print(f"rows: {len(rep.rows)}; outputs under {out_dir}/")
    return 0 if rep.passed else 2


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        cfg = _load_config(args.config) if args.config else {}
        threads = _threads(args, cfg)
        if args.command == "sample":
            return _cmd_sample(args, cfg, threads)
        if args.command == "evolve":
            return _cmd_evolve(args, cfg, threads)
        if args.command == "observable":
            return _cmd_observable(args, cfg, threads)
        if args.command == "quadrature":
            return _cmd_quadrature(args)
        if args.command == "experiment":
            return _cmd_experiment(args, cfg, threads)
        if args.command == "list-experiments":
            for name in sorted(EXPERIMENTS):
                print(name)
            return 0
        raise CliError(f"unhandled command {args.command!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
