"""Command-line front end: ``shapebandit <command> ...``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .baseline import uniform_fc_budget
from .core import BanditInstance, ShapeBanditError, validate_shape
from .ctb import PAPER_CONSTANT
from .harness import ALGORITHMS, estimate_regret, rate_sweep, rows_to_json, run_once, write_csv
from .instances import FAMILIES, FAMILY_SHAPE, default_epsilon, gen_lower_bound_instance, gen_random_instance
from .mtb import mtb_fc_budget

SEED_ENV = "SHAPEBANDIT_SEED"


class UsageError(Exception):
    pass


def _int_list(text):
    return [int(float(v)) for v in text.split(",") if v]


def _parse_spec(text):
    """'name:key=val,key=val' -> (name, dict)."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"bad instance spec item {item!r}")
        params[key.strip()] = val.strip()
    return name, params


def load_instance(spec: str, budget=None) -> BanditInstance:
    """Instance from a JSON file, 'family:K=..,index=..,epsilon=..' or
    'random:shape=..,K=..,seed=..'."""
    path = Path(spec)
    if path.exists():
        return BanditInstance.from_json(path.read_text())
    name, p = _parse_spec(spec)
    if name == "random":
        return gen_random_instance(p.get("shape", "none"), int(p["K"]), int(p.get("seed", 0)),
                                   p.get("variant", "bernoulli"))
    if name in FAMILIES:
        K = int(p["K"])
        sigma = float(p.get("sigma", 1.0))
        if "epsilon" in p:
            eps = float(p["epsilon"])
        elif budget is not None:
            eps = default_epsilon(name, K, budget, sigma)
        else:
            raise UsageError("family spec needs epsilon (or a budget to derive it)")
        if name == "hypercube":
            index = [int(v) for v in p["index"].split(";")] if "index" in p else [1] * K
        else:
            index = int(p.get("index", 1))
        return gen_lower_bound_instance(name, K, eps, sigma, index, p.get("variant", "gaussian"))
    raise UsageError(f"no instance file or known spec {spec!r}")


def _seed(args):
    if args.seed is not None:
        return args.seed
    if SEED_ENV in os.environ:
        return int(os.environ[SEED_ENV])
    return 0


def _config(args):
    cfg = {"ctb_constant": args.ctb_constant}
    if getattr(args, "eps_rule", None):
        cfg["eps_rule"] = args.eps_rule
    return cfg


def _instance_for(args):
    inst = load_instance(args.instance, args.budget)
    if args.tau_override is not None:
        inst = BanditInstance(inst.arms, args.tau_override, inst.shape, inst.sigma)
    if args.algo != "utb" and args.budget < inst.K:
        raise UsageError(f"budget {args.budget} is too small for K={inst.K} arms")
    return inst


def cmd_run(args):
    inst = _instance_for(args)
    res = run_once(args.algo, inst, args.budget, _seed(args), _config(args))
    print(json.dumps({"algo": args.algo, "K": inst.K, "budget": args.budget,
                      "regret": res.regret, "pulls": res.pulls, "khat": res.khat,
                      "qhat": list(res.qhat)}))
    return 0


def cmd_estimate(args):
    inst = _instance_for(args)
    mean, se = estimate_regret(args.algo, inst, args.budget, args.reps, _seed(args),
                               _config(args), args.threads)
    print(json.dumps({"algo": args.algo, "K": inst.K, "budget": args.budget,
                      "reps": args.reps, "regret_mean": mean, "regret_se": se}))
    return 0


def cmd_sweep(args):
    rows, fits = rate_sweep(args.algo, args.family, args.K_list, args.T_list, args.reps,
                            _seed(args), _config(args), args.threads)
    if args.out:
        write_csv(rows, args.out)
        Path(args.out).with_suffix(".json").write_text(rows_to_json(rows))
    else:
        write_csv(rows, sys.stdout)
    for K, fit in fits["T"].items():
        print(f"# K={K} T-slope={fit.slope:.4f} se={fit.slope_se:.4f}", file=sys.stderr)
    failed = False
    if args.slope_range:
        lo, hi = args.slope_range
        failed = any(not lo <= f.slope <= hi for f in fits["T"].values())
    return 1 if failed else 0


def cmd_budget(args):
    if args.algo == "uniform":
        print(uniform_fc_budget(args.K, args.epsilon, args.delta, args.sigma))
    else:
        print(mtb_fc_budget(args.K, args.epsilon, args.delta, args.sigma))
    return 0


def cmd_gen(args):
    if args.family:
        eps = args.epsilon
        if eps is None:
            if args.budget is None:
                raise UsageError("gen needs --epsilon or --budget")
            eps = default_epsilon(args.family, args.K, args.budget, args.sigma)
        if args.family == "hypercube":
            index = _int_list(args.q) if args.q else [1] * args.K
        elif args.family == "concave_ramp":
            index = args.l if args.l is not None else 1
        else:
            index = args.k if args.k is not None else 1
        inst = gen_lower_bound_instance(args.family, args.K, eps, args.sigma, index, args.variant)
    else:
        inst = gen_random_instance(args.shape or "none", args.K, _seed(args), args.variant)
    text = inst.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_validate(args):
    inst = BanditInstance.from_dict(json.loads(Path(args.file).read_text()) | {"shape": "none"})
    shape = args.shape or json.loads(Path(args.file).read_text()).get("shape", "none")
    ok = validate_shape(inst.means, shape)
    print(f"{shape}: {'ok' if ok else 'violated'}")
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="shapebandit",
                                description="Thresholding bandits under shape constraints.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, reps=False):
        sp.add_argument("--algo", choices=ALGORITHMS, required=True)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--ctb-constant", type=float, default=PAPER_CONSTANT)
        sp.add_argument("--eps-rule", choices=("tau", "true_mean"), default=None)
        if reps:
            sp.add_argument("--reps", type=int, default=1000)
            sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("run", help="one episode")
    common(sp)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--budget", type=int, required=True)
    sp.add_argument("--tau-override", type=float, default=None)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("estimate", help="Monte Carlo regret estimate")
    common(sp, reps=True)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--budget", type=int, required=True)
    sp.add_argument("--tau-override", type=float, default=None)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("sweep", help="(K, T) rate sweep on a lower-bound family")
    common(sp, reps=True)
    sp.add_argument("--family", choices=FAMILIES, required=True)
    sp.add_argument("--K-list", type=_int_list, required=True)
    sp.add_argument("--T-list", type=_int_list, required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--slope-range", type=float, nargs=2, default=None,
                    help="exit 1 unless every fitted T-slope lies in [LO, HI]")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("budget", help="fixed-confidence budget")
    sp.add_argument("--algo", choices=("uniform", "mtb"), required=True)
    sp.add_argument("--K", type=int, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.set_defaults(func=cmd_budget)

    sp = sub.add_parser("gen", help="write an instance as JSON")
    sp.add_argument("--family", choices=FAMILIES, default=None)
    sp.add_argument("--shape", choices=tuple(FAMILY_SHAPE.values()), default=None)
    sp.add_argument("--K", type=int, required=True)
    sp.add_argument("--epsilon", type=float, default=None)
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--variant", choices=("gaussian", "bernoulli"), default="gaussian")
    sp.add_argument("--k", type=int, default=None, help="step/spike position")
    sp.add_argument("--l", type=int, default=None, help="ramp level")
    sp.add_argument("--q", default=None, help="hypercube signs, comma separated")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("validate", help="shape-check an instance file")
    sp.add_argument("file")
    sp.add_argument("--shape", choices=tuple(FAMILY_SHAPE.values()), default=None)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ShapeBanditError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
