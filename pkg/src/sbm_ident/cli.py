"""``sbm-ident`` command line.

Subcommands: simulate, moments, estimate, oracle, check, recover. Reports
are JSON objects tagged ``"schema": "sbm-ident/1"``; they go to ``--out`` or
to stdout. Exit codes: 0 ok, 2 usage or parameters, 3 I/O, 4 size guard,
5 estimator degenerate or inconsistent case.
"""

from __future__ import annotations

import argparse
import io as _io
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import affiliation as aff
from .errors import EstimationError, InvalidParamsError, SizeGuardError
from .io import load_params, params_to_dict, read_edge_list, write_edge_list, write_latent
from .kruskal import (
    build_degree_family,
    check_base_case,
    erdos_gallai,
    kruskal_rank,
    kruskal_report,
)
from .mixture import (
    MixtureComponentSet,
    check_bin_independence,
    discretize,
    expand_kn_mixture,
    marginalize_to_edge,
    recover_affiliation_priors,
    recover_from_k3,
)
from .models import BinaryBlockParams, WeightedParams, ensure_valid
from .moments import MOMENT_NAMES, MOTIFS, MomentSet, empirical_moments, q1_statistic
from .oracle import exact_distribution, exact_motif_moment
from .sampler import sample_graph

SCHEMA = "sbm-ident/1"

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_GUARD, EXIT_ESTIMATOR = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64), got {text}")
    return v


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sbm-ident", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *, params=False, inp=False, seed=False, mode=None, n=False, tol=False):
        if params:
            p.add_argument("--params", help="parameter file (JSON)")
        if inp:
            p.add_argument("--input", help="input file")
        p.add_argument("--out", help="output file (default: stdout)")
        if seed:
            p.add_argument("--seed", type=_u64, help="random seed (unsigned 64-bit)")
        if mode:
            p.add_argument("--mode", choices=mode[1], default=mode[0])
        if n:
            p.add_argument("--n", type=int, help="number of nodes")
        if tol:
            p.add_argument("--tol", type=float, help="override the default tolerance")
        return p

    p = common(sub.add_parser("simulate", help="sample a graph"), params=True, seed=True, n=True)
    p.add_argument("--latent-out", help="also write the latent groups here")

    common(sub.add_parser("moments", help="empirical motif moments of an edge list"),
           inp=True, mode=("K4", ["K3", "K4"]))

    p = common(sub.add_parser("estimate", help="affiliation parameters from moments"),
               params=True, inp=True, mode=("k3-q2", ["k3-q2", "known-pi", "uniform-q"]), tol=True)
    p.add_argument("--pi", type=_floats, help="known priors, comma separated (known-pi mode)")

    common(sub.add_parser("oracle", help="exact configuration law or moments"),
           params=True, mode=("table", ["table", "moments"]), n=True)

    p = common(sub.add_parser("check", help="identifiability checks"),
               params=True, inp=True, seed=True, n=True,
               mode=("base-case", ["base-case", "degrees", "kruskal-rank", "bins"]))
    p.add_argument("--q", type=int, help="number of groups for random parameters or a degree family")
    p.add_argument("--cutpoints", type=_floats, help="bin boundaries, comma separated (bins mode)")

    p = common(sub.add_parser("recover", help="parameters from weighted mixture components"),
               params=True, inp=True, mode=("general", ["general", "affiliation"]))
    p.add_argument("--q", type=int, help="number of groups (affiliation mode, for the priors)")
    return ap


# -- helpers ----------------------------------------------------------------------------

def _load_json(path: str):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as err:
            raise InvalidParamsError(f"{path}: not valid JSON ({err})") from None


def _require(args, name: str, why: str):
    val = getattr(args, name)
    if val is None:
        raise UsageError(f"--{name.replace('_', '-')} is required {why}")
    return val


def _report(command: str, result: dict) -> dict:
    return {"schema": SCHEMA, "command": command, "result": result}


def _random_binary(Q: int, seed: int) -> BinaryBlockParams:
    rng = np.random.default_rng(seed)
    upper = rng.uniform(0.05, 0.95, size=(Q, Q))
    P = np.triu(upper) + np.triu(upper, 1).T
    return BinaryBlockParams(rng.dirichlet(np.ones(Q)), P)


def _moments_from_input(path: str, upto: str) -> MomentSet:
    with open(path) as fh:
        head = fh.read(1)
    if head == "{":
        d = _load_json(path)
        if "result" in d:
            d = d["result"].get("moments", d["result"])
        return MomentSet.from_dict(d)
    return empirical_moments(read_edge_list(path), upto)


# -- subcommands -------------------------------------------------------------------

def cmd_simulate(args) -> Optional[str]:
    params_path = _require(args, "params", "for simulate")
    n = _require(args, "n", "for simulate")
    seed = _require(args, "seed", "for simulate (runs must be reproducible)")
    params = load_params(params_path)
    g = sample_graph(params, n, seed, keep_latent=args.latent_out is not None)
    buf = _io.StringIO()
    write_edge_list(g, buf)
    if args.latent_out:
        with open(args.latent_out, "w") as fh:
            write_latent(g, fh)
    return buf.getvalue()


def cmd_moments(args) -> dict:
    g = read_edge_list(_require(args, "input", "for moments"))
    ms = empirical_moments(g, args.mode)
    return _report("moments", {"n": g.n, "moments": ms.as_dict()})


def _known_pi(args) -> np.ndarray:
    if args.pi is not None:
        return np.asarray(args.pi)
    if args.params is not None:
        return load_params(args.params).pi
    raise UsageError("known-pi mode needs --pi or --params")


def cmd_estimate(args) -> dict:
    path = _require(args, "input", "for estimate")
    upto = "K4" if args.mode == "uniform-q" else "K3"
    ms = _moments_from_input(path, upto)
    if args.mode == "k3-q2":
        res = aff.estimate_k3_q2(ms)
    elif args.mode == "known-pi":
        tol = aff.UNIFORM_TOL if args.tol is None else args.tol
        res = aff.estimate_known_pi(ms, _known_pi(args), tol)
    else:
        res = aff.estimate_q_uniform(ms)
    out = {"mode": args.mode, "moments": ms.as_dict(), "q1_statistic": q1_statistic(ms)}
    out.update(res.as_dict())
    return _report("estimate", out)


def _format_prob(p: float) -> str:
    return repr(float(p))


def cmd_oracle(args) -> object:
    params = load_params(_require(args, "params", "for oracle"))
    if args.mode == "moments":
        # every motif fits on four nodes
        dist = exact_distribution(params, 4)
        if dist.kappa != 2:
            raise InvalidParamsError("moments mode needs a binary or affiliation parameter file")
        ms = MomentSet(**{k: exact_motif_moment(dist, MOTIFS[k]) for k in MOMENT_NAMES}, source="exact")
        return _report("oracle", {"mode": "moments", "moments": ms.as_dict()})
    n = _require(args, "n", "for oracle")
    dist = exact_distribution(params, n)
    lines = [f"# n={n} kappa={dist.kappa} edges={dist.n_edges}"]
    for config, p in zip(dist.configurations(), dist.probs):
        lines.append(" ".join(str(x) for x in config) + "\t" + _format_prob(p))
    return "\n".join(lines) + "\n"


def _read_degrees(path: str) -> list[int]:
    with open(path) as fh:
        text = fh.read()
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise InvalidParamsError(f"{path}: degrees must be integers") from None


def cmd_check(args) -> dict:
    mode = args.mode
    if mode == "base-case":
        m = _require(args, "n", "(node count m) for base-case")
        if args.params is not None:
            params = load_params(args.params)
        else:
            Q = _require(args, "q", "for random base-case parameters (or give --params)")
            params = _random_binary(Q, _require(args, "seed", "for random parameters"))
        report = check_base_case(params, m)
        return _report("check", {"mode": mode, "m": m, **report.as_dict()})
    if mode == "degrees":
        if args.input is not None:
            d = _read_degrees(args.input)
            return _report("check", {"mode": mode, "degrees": d, "realizable": erdos_gallai(d)})
        Q = _require(args, "q", "for a degree family (or give --input)")
        m = _require(args, "n", "for a degree family")
        fam = build_degree_family(Q, m)
        return _report("check", {"mode": mode, "Q": Q, "m": m, "size": len(fam),
                                 "all_realizable": all(s.realizable for s in fam),
                                 "members": [{"degrees": list(s.degrees), "realizable": s.realizable}
                                             for s in fam]})
    if mode == "kruskal-rank":
        d = _load_json(_require(args, "input", "for kruskal-rank"))
        if "matrices" in d:
            rep = kruskal_report(*d["matrices"])
            return _report("check", {"mode": mode, "ranks": list(rep.ranks), "r": rep.r,
                                     "condition_met": rep.condition_met})
        return _report("check", {"mode": mode, "kruskal_rank": kruskal_rank(d["matrix"])})
    # bins
    params = load_params(_require(args, "params", "for bins"))
    if not isinstance(params, WeightedParams):
        raise InvalidParamsError("bins mode needs a weighted parameter file")
    fsp = discretize(params, _require(args, "cutpoints", "for bins"))
    ind = check_bin_independence(fsp)
    return _report("check", {"mode": mode, "kappa": fsp.kappa, "Pvec": fsp.Pvec.tolist(),
                             "rank": ind.rank, "n_vectors": ind.n_vectors,
                             "independent": ind.independent})


def _mixtures_from_args(args, sizes: Sequence[int]) -> dict:
    if args.params is not None:
        params = load_params(args.params)
        if not isinstance(params, WeightedParams):
            raise InvalidParamsError("recover needs a weighted parameter file")
        ensure_valid(params)
        return {n: expand_kn_mixture(params, n) for n in sizes}
    d = _load_json(_require(args, "input", "(components JSON) or --params"))
    return {int(k): MixtureComponentSet.from_json(v) for k, v in d["mixtures"].items()}


def cmd_recover(args) -> dict:
    if args.mode == "general":
        mx = _mixtures_from_args(args, (2, 3))
        k3 = mx[3]
        marginal = mx[2] if 2 in mx else None
        marginal = marginalize_to_edge(k3) if marginal is None else marginalize_to_edge(marginal)
        rec = recover_from_k3(k3, marginal)
        return _report("recover", {"mode": "general", "params": params_to_dict(rec)})
    Q = _require(args, "q", "for affiliation mode")
    mx = _mixtures_from_args(args, sorted(set(range(2, Q + 1)) | {3}))
    rec, pi = recover_affiliation_priors(mx, Q)
    return _report("recover", {"mode": "affiliation", "alpha": rec.alpha, "beta": rec.beta,
                               "theta_in": rec.theta_in, "theta_out": rec.theta_out,
                               "pi": pi.tolist()})


COMMANDS = {
    "simulate": cmd_simulate,
    "moments": cmd_moments,
    "estimate": cmd_estimate,
    "oracle": cmd_oracle,
    "check": cmd_check,
    "recover": cmd_recover,
}


def _emit(payload, out: Optional[str]) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(command: str, code: int, tag: str, message: str, **extra) -> int:
    print(f"sbm-ident: error: {message}", file=sys.stderr)
    err = {"code": tag, "message": message, **extra}
    sys.stdout.write(json.dumps({"schema": SCHEMA, "command": command, "error": err}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    cmd = args.command
    try:
        payload = COMMANDS[cmd](args)
        _emit(payload, args.out)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        return _fail(cmd, EXIT_USAGE, "USAGE", str(err))
    except InvalidParamsError as err:
        return _fail(cmd, EXIT_USAGE, "INVALID_PARAMS", str(err))
    except SizeGuardError as err:
        return _fail(cmd, EXIT_GUARD, "SIZE_GUARD", str(err), guard=err.guard)
    except EstimationError as err:
        return _fail(cmd, EXIT_ESTIMATOR, err.code, str(err))
    except OSError as err:
        return _fail(cmd, EXIT_IO, "IO_ERROR", str(err))
    except (KeyError, ValueError, TypeError) as err:
        return _fail(cmd, EXIT_USAGE, "INVALID_INPUT", str(err))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
