"""Command-line interface.

Verbs: decompose, project, norm, verify, decouple, experiment, bohr.
Global flags: --seed, --scalar {float|rational}, --threads, --out.

File inputs carry their own scalar mode; --scalar selects the mode for
commands that build spaces themselves (verify, experiment).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import decoupling as dc
from .. import hoeffding as hf
from .. import martingale as mg
from .. import torus as tr
from ..space import (
    RATIONAL,
    REAL,
    function_from_json,
    function_to_json,
    lp_norm,
    uniform_space,
)
from . import ExperimentConfig, run_experiment
from .reports import jsonable


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(doc, out: str | None) -> None:
    text = json.dumps(jsonable(doc), sort_keys=True, indent=2)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _family_from_args(args, n_coords: int) -> mg.DifferenceFamily:
    kind = args.family
    if kind == "linear":
        return mg.linear_family(n_coords)
    if kind == "reversed":
        return mg.reversed_family(n_coords)
    if kind == "double":
        return mg.double_family(n_coords)
    if kind == "mlast":
        return mg.mlast_family(n_coords, args.family_m)
    raise SystemExit(f"unknown family {kind!r}")


def cmd_decompose(args) -> int:
    f = function_from_json(_read_json(args.input))
    comps = hf.hoeffding_decompose(f)
    _emit(comps.to_json(), args.out)
    return 0


def cmd_project(args) -> int:
    f = function_from_json(_read_json(args.input))
    if args.mask is None:
        g = hf.project_multiplicity(f, args.m)
    else:
        g = tr.project_mlast(f, args.mask)
    _emit(function_to_json(g), args.out)
    return 0


def cmd_norm(args) -> int:
    f = function_from_json(_read_json(args.input))
    family_name = None
    if args.kind == "lp":
        value = lp_norm(f, "sup" if args.p == "sup" else float(args.p))
    else:
        family = _family_from_args(args, f.space.n_coords)
        family_name = args.family
        if args.kind == "h1":
            value = mg.h1_norm(f, family)
        elif args.kind == "hp":
            value = mg.hp_norm(f, family, float(args.p))
        elif args.kind == "bmo":
            value = mg.bmo_norm(f, family)
        else:
            raise SystemExit(f"unknown norm kind {args.kind!r}")
    _emit({"kind": args.kind, "family": family_name, "value": value}, args.out)
    return 0


def cmd_verify(args) -> int:
    if args.check == "q-identity":
        rep = hf.verify_q_identity(args.N, args.n, args.m)
        doc = {
            "check": "q-identity",
            "N": args.N,
            "n": args.n,
            "m": args.m,
            "coefficient": f"{rep.coefficient.numerator}/{rep.coefficient.denominator}",
            "operator_match": rep.operator_match,
        }
        ok = rep.operator_match
    elif args.check == "multinomial":
        rep = hf.verify_multinomial_identity(args.n, args.m)
        doc = {
            "check": "multinomial",
            "n": args.n,
            "m": args.m,
            "count_per_B": rep.count_per_B,
            "match": rep.match,
        }
        ok = rep.match
    elif args.check == "tensor-power":
        mode = RATIONAL if args.scalar == "rational" else REAL
        space = uniform_space(args.outcomes, 1, mode)
        import numpy as np

        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
        vals = rng.standard_normal(args.outcomes)
        vals = vals - vals.mean()
        if mode == RATIONAL:
            from fractions import Fraction

            ints = [int(round(1000 * v)) for v in vals]
            ints[-1] -= sum(ints)  # force exact zero mean
            f = sp_tensor(space, [Fraction(i, 1000) for i in ints])
        else:
            f = sp_tensor(space, vals)
        rep = hf.tensor_power_projection_check(f, args.m)
        doc = {
            "check": "tensor-power",
            "outcomes": args.outcomes,
            "m": args.m,
            "identity_holds": rep.identity_holds,
            "lhs_norms": rep.lhs_norms,
            "rhs_norms": rep.rhs_norms,
        }
        ok = rep.identity_holds
    else:
        raise SystemExit(f"unknown check {args.check!r}")
    _emit(doc, args.out)
    return 0 if ok else 1


def sp_tensor(space, values):
    from ..space import tensor_function

    return tensor_function(space, values)


def cmd_decouple(args) -> int:
    doc = _read_json(args.input)
    from ..space import space_from_json

    space = space_from_json(doc["space"])
    funcs = [function_from_json(fj) for fj in doc["funcs"]]
    t = dc.adapted_tuple(space, funcs)
    lhs = dc.zinn_left(t)
    if args.mode == "exact":
        rhs = dc.zinn_right(t)
        out = {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs else None,
               "trials": None, "stderr": None, "seed": None}
    else:
        if args.seed is None:
            raise SystemExit("Monte Carlo mode requires --seed")
        est = dc.zinn_right_mc(t, args.trials, args.seed)
        out = {
            "lhs": lhs,
            "rhs": est["value"],
            "ratio": lhs / est["value"] if est["value"] else None,
            "trials": est["trials"],
            "stderr": est["stderr"],
            "seed": est["seed"],
        }
    _emit(out, args.out)
    return 0


def cmd_experiment(args) -> int:
    if args.config:
        doc = _read_json(args.config)
        params = doc.get("params", {})
        name = doc["experiment"]
        seed = doc.get("seed", args.seed)
        threads = doc.get("threads", args.threads)
        scalar = doc.get("scalar_mode", "real")
    else:
        if not args.name:
            raise SystemExit("give --config FILE or --name EXPERIMENT")
        name = args.name
        params = {}
        for kv in args.param or []:
            key, _, raw = kv.partition("=")
            if not _:
                raise SystemExit(f"bad -P {kv!r}; expected key=value")
            params[key] = json.loads(raw)
        seed = args.seed
        threads = args.threads
        scalar = RATIONAL if args.scalar == "rational" else REAL
    config = ExperimentConfig(
        experiment=name, params=params, seed=seed, scalar_mode=scalar, threads=threads
    )
    report = run_experiment(
        config, out_dir=args.out or "reports", render=not args.no_plots
    )
    print(json.dumps({"passed": report.passed, "summary": report.payload["summary"],
                      "paths": report.paths}, sort_keys=True, indent=2))
    return 0 if report.passed else 1


def cmd_bohr(args) -> int:
    if args.action == "lift":
        d = tr.DirichletPolynomial.from_json(_read_json(args.input))
        lifted = tr.bohr_lift(d)
        doc = [
            {"freq": list(v), "coeff": [c.real, c.imag]}
            for v, c in sorted(lifted.items())
        ]
    elif args.action == "drop":
        entries = _read_json(args.input)
        coeff_map = {
            tuple(e["freq"]): complex(e["coeff"][0], e["coeff"][1]) for e in entries
        }
        doc = tr.bohr_drop(coeff_map).to_json()
    elif args.action == "project":
        d = tr.DirichletPolynomial.from_json(_read_json(args.input))
        doc = tr.dirichlet_prime_projection(d, args.m).to_json()
    else:
        raise SystemExit(f"unknown bohr action {args.action!r}")
    _emit(doc, args.out)
    return 0


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d if suppress else None)
    parser.add_argument("--scalar", choices=["float", "rational"],
                        default=d if suppress else "float")
    parser.add_argument("--threads", type=int, default=d if suppress else 1)
    parser.add_argument("--out", default=d if suppress else None,
                        help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finprod",
        description="Decompositions, martingale norms and decoupling on finite product spaces.",
    )
    _add_global_flags(parser, suppress=False)
    subparsers = parser.add_subparsers(dest="command", required=True)

    class sub:
        # global flags are re-declared per verb (suppressed defaults) so they
        # may appear on either side of the subcommand
        @staticmethod
        def add_parser(name, **kwargs):
            p = subparsers.add_parser(name, **kwargs)
            _add_global_flags(p, suppress=True)
            return p

    p = sub.add_parser("decompose", help="full decomposition of a function file")
    p.add_argument("-i", "--input", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("project", help="multiplicity or trailing-sign projection")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-m", type=int, default=1)
    p.add_argument("--mask", type=int, default=None,
                   help="use the m-last spectral mask instead of multiplicity")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("norm", help="L^p, H^1, H^p or BMO norm of a function file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--kind", choices=["lp", "h1", "hp", "bmo"], default="lp")
    p.add_argument("--p", default="2")
    p.add_argument("--family", choices=["linear", "reversed", "double", "mlast"],
                   default="linear")
    p.add_argument("--family-m", dest="family_m", type=int, default=1)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("verify", help="exact operator-identity checks")
    p.add_argument("check", choices=["q-identity", "multinomial", "tensor-power"])
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--outcomes", type=int, default=2)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decouple", help="coupled vs decoupled square-sum means")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("experiment", help="run a named or configured experiment")
    p.add_argument("-c", "--config", default=None)
    p.add_argument("--name", default=None)
    p.add_argument("-P", "--param", action="append",
                   help="key=value (value parsed as JSON), repeatable")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bohr", help="prime-exponent lift of Dirichlet polynomials")
    p.add_argument("action", choices=["lift", "drop", "project"])
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-m", type=int, default=1)
    p.set_defaults(func=cmd_bohr)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
