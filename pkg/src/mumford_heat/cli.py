"""Command-line front end: validate, spectrum, evolve, sample, audit, resolvent.

Outputs are deterministic: identical config, flags and seed produce
byte-identical files.  Every artifact embeds the config hash, the evaluation
mode, the resolved cutoff length and the certified tail bound at that
cutoff.  Exit codes: 0 success, 2 validation failure, 3 numerical breakdown.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .audit import audit_lemmas
from .config import (ParseError, RunConfig, ValidationError, emit_config,
                     format_rational, parse_config)
from .exactnum import PowerSum
from .heat import (NumericalBreakdown, SingularSystem, empirical_validation,
                   resolvent_solve, sample_paths, solve_cauchy,
                   spectral_data)
from .measure import RationalFunctionDatum
from .operator import (OperatorConfig, RatioNotConstant, generator_matrix,
                       spectrum, tail_bound)
from .schottky import DomainInvalid, verify_fundamental_domain
from .wavelets import LevelFunction, admissible_wavelets, wavelet_eval


def _scalar_str(value) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, PowerSum):
        return repr(float(value))
    return repr(value)


def _header_lines(run: RunConfig, op: OperatorConfig) -> list[str]:
    cut = op.cutoff()
    tb = tail_bound(op, cut) if op.group.genus else Fraction(0)
    return [
        f"# config_hash={run.config_hash}",
        f"# mode={op.mode}",
        f"# cutoff_len={cut}",
        f"# tail_bound={format_rational(tb)}",
    ]


def _meta(run: RunConfig, op: OperatorConfig) -> dict:
    cut = op.cutoff()
    tb = tail_bound(op, cut) if op.group.genus else Fraction(0)
    return {
        "config_hash": run.config_hash,
        "mode": op.mode,
        "cutoff_len": cut,
        "tail_bound": format_rational(tb),
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def cmd_validate(run: RunConfig, op: OperatorConfig, out: Path, args) -> int:
    report = verify_fundamental_domain(run.group, depth=4, raise_on_failure=False)
    payload = {
        "meta": _meta(run, op),
        "domain": {
            "holes_disjoint": report.holes_disjoint,
            "pairing_onto_targets": report.pairing_ok,
            "tiles_checked": report.tiles_checked,
            "tiles_disjoint": report.tiles_disjoint,
            "details": list(report.details),
            "measure": format_rational(run.group.fundamental_domain().measure()),
        },
        "measure": {
            "total_mass": format_rational(run.profile.total_mass),
            "pieces": len(run.profile.pieces),
            "zero_cores": len(run.profile.zero_cores),
        },
        "config": emit_config(run),
    }
    _write(out / "validation.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0 if report.ok else 2


def cmd_spectrum(run: RunConfig, op: OperatorConfig, out: Path, args) -> int:
    level = args.level if args.level is not None else run.run.level
    result = spectrum(op, level, datum=run.datum)
    lines = _header_lines(run, op)
    lines.append("radius_exp,density,lambda_formula,lambda_exact_lo,"
                 "lambda_exact_hi,multiplicity,n_witness_discs")
    for e in result.entries:
        lines.append(",".join([
            str(e.radius_exp),
            format_rational(e.density),
            _scalar_str(e.lam_formula.value),
            format_rational(e.lam_exact.lo),
            format_rational(e.lam_exact.hi),
            str(e.multiplicity),
            str(len(e.witnesses)),
        ]))
    lines.append("# word_census=" + ";".join(f"{l}:{n}" for l, n in result.word_counts))
    _write(out / "spectrum.csv", "\n".join(lines) + "\n")
    return 0


def _default_initial(run: RunConfig, op: OperatorConfig, gen, kind: str) -> LevelFunction:
    states = gen.states
    if kind == "wavelet":
        wavelets = admissible_wavelets(op.profile, gen.level)
        if not wavelets:
            raise ValidationError("run.level", "no admissible wavelet at this level")
        w = wavelets[0]
        return LevelFunction.from_mapping(
            gen.level,
            {d: complex(wavelet_eval(w, d.center, op.profile, "omega")).real
             for d in states})
    if kind == "indicator":
        idx = run.run.start_state
        return LevelFunction.from_mapping(
            gen.level, {d: (1.0 if i == idx else 0.0)
                        for i, d in enumerate(states)})
    raise ValidationError("--initial", f"unknown initial condition {kind!r}")


def cmd_evolve(run: RunConfig, op: OperatorConfig, out: Path, args) -> int:
    level = args.level if args.level is not None else run.run.level
    gen = generator_matrix(op, level)
    data = spectral_data(op, gen)
    h0 = _default_initial(run, op, gen, args.initial)
    times = args.times if args.times else list(run.run.times)
    sol = solve_cauchy(op, gen, h0, times, data)
    lines = _header_lines(run, op)
    lines.append("t,state_index,value")
    for ti, t in enumerate(sol.times):
        for si in range(len(sol.states)):
            value = complex(sol.values[ti, si])
            out_value = value.real if abs(value.imag) < 1e-12 else value
            lines.append(f"{t!r},{si},{out_value!r}")
    _write(out / "evolution.csv", "\n".join(lines) + "\n")
    return 0


def cmd_sample(run: RunConfig, op: OperatorConfig, out: Path, args) -> int:
    level = args.level if args.level is not None else run.run.level
    gen = generator_matrix(op, level)
    n_paths = args.paths if args.paths is not None else run.run.paths
    seed = args.seed if args.seed is not None else run.run.seed
    t_max = max(run.run.times) if run.run.times else 1.0
    workers = int(os.environ.get("MUMFORD_HEAT_THREADS", "1"))
    paths = sample_paths(gen, n_paths, t_max, seed,
                         start_index=run.run.start_state, workers=workers)
    lines = _header_lines(run, op)
    lines.append(f"# seed={seed} t_max={t_max!r} start_state={run.run.start_state}")
    lines.append("path_id,jump_time,state_index,state_center,state_radius_exp")
    for path in paths:
        disc0 = gen.states[path.states[0]]
        lines.append(f"{path.path_index},0.0,{path.states[0]},"
                     f"{format_rational(disc0.center)},{disc0.radius_exp}")
        for t, s in zip(path.jump_times, path.states[1:]):
            disc = gen.states[s]
            lines.append(f"{path.path_index},{t!r},{s},"
                         f"{format_rational(disc.center)},{disc.radius_exp}")
    _write(out / "paths.csv", "\n".join(lines) + "\n")
    checkpoints = [t for t in run.run.times if 0 < t <= t_max]
    if checkpoints:
        report = empirical_validation(op, gen, paths, checkpoints,
                                      start_index=run.run.start_state)
        payload = {
            "meta": _meta(run, op),
            "n_paths": report.n_paths,
            "threshold_sigmas": report.threshold,
            "passed": report.passed,
            "checkpoints": [
                {"t": r.t, "max_sigma": r.max_sigma,
                 "worst_state": r.worst_state, "passed": r.passed}
                for r in report.rows],
        }
        _write(out / "sample-validation.json",
               json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_audit(run: RunConfig, op: OperatorConfig, out: Path, args) -> int:
    datum = run.datum if run.datum is not None else RationalFunctionDatum.constant()
    report = audit_lemmas(op, datum, n_random=args.audit_samples,
                          level=run.run.level)
    payload = {"meta": _meta(run, op)}
    payload.update(report.to_dict())
    _write(out / "audit.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_resolvent(run: RunConfig, op: OperatorConfig, out: Path, args) -> int:
    level = args.level if args.level is not None else run.run.level
    gen = generator_matrix(op, level)
    eta = Fraction(args.eta) if args.eta else run.run.eta
    if eta <= 0:
        raise ValidationError("--eta", "eta must be positive")
    idx = run.run.start_state
    h = LevelFunction.from_mapping(
        gen.level, {d: (Fraction(1) if i == idx else Fraction(0))
                    for i, d in enumerate(gen.states)})
    u = resolvent_solve(gen, eta, h)
    ud = u.as_dict()
    hd = h.as_dict()
    lines = _header_lines(run, op)
    lines.append(f"# eta={format_rational(eta)}")
    lines.append("state_index,state_center,state_radius_exp,h,u")
    for i, d in enumerate(gen.states):
        uval = ud[d]
        ustr = format_rational(uval) if isinstance(uval, Fraction) else repr(uval)
        lines.append(f"{i},{format_rational(d.center)},{d.radius_exp},"
                     f"{format_rational(hd[d])},{ustr}")
    _write(out / "resolvent.csv", "\n".join(lines) + "\n")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "sample": cmd_sample,
    "audit": cmd_audit,
    "resolvent": cmd_resolvent,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mumford-heat",
        description="Spectra, heat flow and path sampling for the nonlocal "
                    "diffusion operator on a p-adic Schottky quotient.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("-c", "--config", required=True, help="JSON config file")
    parser.add_argument("--level", type=int, default=None,
                        help="state-space level (disc radius p^-level)")
    parser.add_argument("--t", "--times", dest="times", type=float, nargs="+",
                        default=None, help="time grid for evolve")
    parser.add_argument("--paths", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--mode", choices=("ambient", "transport"), default=None)
    parser.add_argument("--cutoff-len", type=int, default=None)
    parser.add_argument("--cutoff-tol", type=str, default=None)
    parser.add_argument("--eta", type=str, default=None,
                        help="resolvent shift (exact rational)")
    parser.add_argument("--initial", choices=("wavelet", "indicator"),
                        default="wavelet", help="initial condition for evolve")
    parser.add_argument("--audit-samples", type=int, default=2000)
    parser.add_argument("-o", "--out", type=Path, default=Path("."),
                        help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = parse_config(args.config)
        op = run.operator_config(
            mode=args.mode,
            cutoff_len=args.cutoff_len,
            cutoff_tol=Fraction(args.cutoff_tol) if args.cutoff_tol else None)
        code = COMMANDS[args.command](run, op, args.out, args)
    except (ParseError, ValidationError, DomainInvalid) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except (NumericalBreakdown, SingularSystem, RatioNotConstant) as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return 3
    return code


if __name__ == "__main__":
    sys.exit(main())
