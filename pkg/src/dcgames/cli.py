"""Command-line entry point.

Every command prints one JSON report (or writes it to ``--json``).  Exit
status 0 means success / true / win, 1 means false / lose, 2 means a usage or
input error.
"""

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import channels as ch
from . import cones as C
from . import io
from .capacity import binary_entropy, info_capacity, requirement_value
from .errors import DCGamesError, InputError
from .games import (
    CodingScheme, GameSpec, check_zero_error_code, coding_feasible_by_degradedness,
    consistency_decoder, mail_game, mail_insurance, synthesize_strategy, verify_game,
    worst_case_error,
)
from .source import (
    SourceGameSpec, entropy, entropy_search, sanov_scheme, synthesize_source_strategy,
    verify_source_game,
)

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _vector(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"cannot parse {text!r} as a comma-separated vector") from None


def _load_cone(path):
    return io.cone_from_json(io.load_json(path))


# -- cone ---------------------------------------------------------------------


def cmd_cone_op(args):
    A = _load_cone(args.A)
    if args.kind in ("union", "intersection", "disjoint_sum", "minplus", "semidirect"):
        if args.B is None:
            raise InputError(f"{args.kind} needs a second cone")
        B = _load_cone(args.B)
    if args.kind in ("union", "intersection", "disjoint_sum"):
        out = C.combine(args.kind, A, B)
    elif args.kind == "minplus":
        out = C.minplus(A, B, args.lam)
    elif args.kind == "robustify":
        out = C.robustify(A, args.lam)
    else:
        out = C.semidirect_explicit([A, B])
    return {"cone": io.cone_to_json(out)}, EXIT_OK


def cmd_cone_dual(args):
    out = C.dual(_load_cone(args.A), prune=args.prune, tol=args.tol)
    return {"cone": io.cone_to_json(out)}, EXIT_OK


def cmd_cone_contains(args):
    ok, witness = C.contains_cone(_load_cone(args.A), _load_cone(args.B), args.tol)
    res = {"contains": bool(ok)}
    if witness is not None:
        res["witness"] = witness
    return res, EXIT_OK if ok else EXIT_FALSE


def cmd_cone_member(args):
    ok = C.contains_portfolio(_load_cone(args.A), _vector(args.portfolio), args.tol)
    return {"member": bool(ok)}, EXIT_OK if ok else EXIT_FALSE


def cmd_cone_informative(args):
    A = _load_cone(args.A)
    ok = C.is_informative(A, args.tol)
    res = {"informative": bool(ok)}
    if not ok:
        q = C.common_hull_point(A, args.tol)
        if q is not None:
            res["common_hull_point"] = q
    return res, EXIT_OK if ok else EXIT_FALSE


# -- capacity and entropy -----------------------------------------------------


def cmd_capacity(args):
    A = _load_cone(args.A)
    r = info_capacity(A, args.method)
    return {"capacity": r.value, "lower": r.lower, "upper": r.upper, "method": r.method,
            "prior": r.q, "iterations": r.iterations}, EXIT_OK


def cmd_entropy(args):
    if args.generators:
        gens = [_vector(g) for g in args.generators.split(";")]
        return {"entropy": entropy(gens, "generator_form"), "certified": True}, EXIT_OK
    if args.A is None:
        raise InputError("entropy needs a cone file or --generators")
    A = _load_cone(args.A)
    exact = A.is_empty or A.has_full_cell or (len(A.cells) == 1 and len(A.cells[0].normals) == 1)
    if args.method == "search_upper_bound" or (args.method == "auto" and not exact):
        value, a = entropy_search(A, seed=args.seed, tol=args.tol)
        res = {"entropy": value, "certified": bool(exact)}
        if a is not None:
            res["portfolio"] = a
        return res, EXIT_OK
    return {"entropy": entropy(A, args.method, args.tol), "certified": True}, EXIT_OK


# -- channels -----------------------------------------------------------------


def cmd_channel_build(args):
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise InputError(f"--params is not valid JSON: {exc}") from None
    W = ch.build_channel(args.kind, **params)
    return {"channel": io.channel_to_json(W)}, EXIT_OK


# -- games --------------------------------------------------------------------


def _model_from_json(data):
    kind = data.get("type")
    if kind == "dmc":
        return ch.DMCKernel(data["rows"], data.get("inputs"), data.get("outputs"))
    if kind == "avcf":
        return ch.AVCFKernel(data["p"], data.get("inputs"), data.get("causal"), data.get("adversary"),
                             data.get("outputs"))
    if kind == "graph":
        return ch.BipartiteGraph(data["edges"], data["inputs"], data["outputs"])
    raise InputError(f"unknown model type {kind!r}")


def _scheme_from_json(data, model):
    outputs = model.outputs
    decoder = {}
    for key, m in data["decoder"].items():
        seq = tuple(outputs.index(y) for y in key.split(",")) if key else ()
        decoder[seq] = None if m is None else int(m)
    causal = None
    if "causal" in data:
        table = {}
        for key, z in data["causal"].items():
            m, _, rest = key.partition("|")
            table[(int(m), tuple(outputs.index(y) for y in rest.split(",")) if rest else ())] = z
        causal = table
    return CodingScheme([None if c is None else list(c) for c in data["codewords"]], decoder,
                        data.get("model", "dmc"), causal, data.get("n"))


def cmd_game_synth(args):
    data = io.load_json(args.scheme)
    try:
        model = _model_from_json(data["model"])
        scheme = _scheme_from_json(data["scheme"], model)
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"scheme JSON is malformed: {exc}") from None
    kind = data.get("kind", "martingale")
    eps, _ = worst_case_error(scheme, model)
    strat, W = synthesize_strategy(kind, scheme, model, tol=args.tol)
    return {"worst_case_error": eps, "channel": io.channel_to_json(W),
            "strategy": io.strategy_to_json(strat, scheme.n, W.outputs)}, EXIT_OK


def cmd_game_verify(args):
    spec = io.spec_from_json(io.load_json(args.spec))
    strat = io.strategy_from_json(io.load_json(args.strategy), spec.channel.outputs)
    rep = verify_game(spec, strat, args.tol, args.node_cap)
    return io.report_to_json(rep), EXIT_OK if rep.win else EXIT_FALSE


def cmd_game_feasible(args):
    W = io.channel_from_json(io.load_json(args.channel))
    ok = coding_feasible_by_degradedness(W, args.n, args.L, args.eps, tol=args.tol)
    return {"feasible": bool(ok)}, EXIT_OK if ok else EXIT_FALSE


# -- source -------------------------------------------------------------------


def _parse_code(text, d):
    code = []
    for word in text.split(","):
        seq = tuple(int(c) for c in word)
        if any(not 0 <= x < d for x in seq):
            raise InputError(f"codeword {word!r} uses a symbol outside 0..{d - 1}")
        code.append(seq)
    return code


def cmd_source_synth(args):
    p = _vector(args.p)
    code = _parse_code(args.code, p.size)
    strat, pe = synthesize_source_strategy(p, args.n, code)
    policy = {",".join(map(str, k)): v for k, v in strat.policy.items()}
    return {"error_probability": pe, "codebook": [list(c) for c in code], "policy": policy}, EXIT_OK


def cmd_source_verify(args):
    p = _vector(args.p)
    code = _parse_code(args.code, p.size)
    strat, pe = synthesize_source_strategy(p, args.n, code)
    rep = verify_source_game(SourceGameSpec(C.halfspace(p), args.n, len(code), args.eps, strat),
                             args.tol, args.node_cap)
    res = io.report_to_json(rep)
    res["error_probability"] = pe
    return res, EXIT_OK if rep.win else EXIT_FALSE


def cmd_source_sanov(args):
    a = _vector(args.a)
    res = sanov_scheme(a, args.gamma, args.eps, args.n)
    out = {"size": res.size, "bound": res.bound, "bound_holds": res.bound_holds,
           "exponent": res.exponent, "S": [list(s) for s in res.S]}
    status = EXIT_OK
    if args.verify:
        A = C.from_generators([a])
        rep = verify_source_game(SourceGameSpec(A, args.n, max(res.size, 1), args.eps, res.strategy),
                                 args.tol, args.node_cap)
        out["verify"] = io.report_to_json(rep)
        status = EXIT_OK if rep.win else EXIT_FALSE
    return out, status


# -- demos --------------------------------------------------------------------


def demo_mail(args):
    strat, loss = mail_insurance(args.n, args.k, args.p)
    out = {"constant_loss": loss, "n": args.n, "k": args.k, "p": args.p}
    if 2 ** (args.n + 1) <= args.node_cap:
        spec = mail_game(args.n, args.k, args.p, eps=min(max(loss, 1e-12), 1 - 1e-12))
        rep = verify_game(spec, strat, args.tol, args.node_cap, collect_paths=True)
        spread = max(abs(payoff + loss) for _, _, payoff in rep.paths)
        out.update({"verified_paths": len(rep.paths), "win": rep.win, "max_deviation": spread})
        return out, EXIT_OK if rep.win and spread <= 1e-12 else EXIT_FALSE
    out.update({"verified_paths": 0, "win": None})
    return out, EXIT_OK


def demo_bsc_feedback(args):
    W = ch.bsc(args.beta, feedback=True)
    A = W.cone("0")
    r = info_capacity(A, "minimax")
    closed = 1.0 - binary_entropy(args.beta)
    ok = abs(r.value - closed) <= 1e-3
    return {"capacity": r.value, "closed_form": closed, "informative": bool(C.is_informative(A)),
            "cone": io.cone_to_json(A)}, EXIT_OK if ok else EXIT_FALSE


def demo_pentagon(args):
    g = ch.BipartiteGraph(ch.typewriter_edges(5), list("01234"), list("01234"))
    code = [(str(i), str(2 * i % 5)) for i in range(5)]
    dec = consistency_decoder(code, g)
    valid = check_zero_error_code(code, dec, g, 2, 5)
    strat, W = synthesize_strategy("zero_error", CodingScheme(code, dec, "zero_error"), g, args.tol)
    wins = {}
    for eps in (0.01, 0.5, 0.99):
        wins[str(eps)] = verify_game(GameSpec(W, 2, 5, eps), strat, args.tol, args.node_cap).win
    ok = valid and all(wins.values())
    return {"code": [list(c) for c in code], "zero_error": valid, "wins": wins}, \
        EXIT_OK if ok else EXIT_FALSE


def demo_fano(args):
    closed = requirement_value(args.L, args.eps)
    r = info_capacity(ch.requirement_cone(args.L, args.eps))
    ok = abs(r.value - closed) <= 2e-3
    return {"closed_form": closed, "solver": r.value, "difference": abs(r.value - closed)}, \
        EXIT_OK if ok else EXIT_FALSE


def demo_avcf_dual(args):
    flips = (0.1, 0.3)
    states = [np.array([1 - a, a]) for a in flips]
    encoder = C.DCCone(2, [[p] for p in states])
    adversary = C.DCCone(2, [states])
    state_duality = C.equals_cone(C.dual(encoder), adversary, args.tol)
    sym = list("01234")
    W = ch.adversarial_feedback(ch.typewriter_edges(5), sym, sym)
    covering = C.equals_cone(ch.dual_channel(W).cone("0"),
                             ch.covering_channel(ch.typewriter_edges(5), sym, sym).cone("0"), args.tol)
    ok = state_duality and covering
    return {"states": [p for p in states], "union_dual_is_intersection": bool(state_duality),
            "pentagon_dual_is_covering": bool(covering)}, EXIT_OK if ok else EXIT_FALSE


# -- parser -------------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=1e-9, help="numerical tolerance (default 1e-9)")
    p.add_argument("--json", metavar="OUT", help="write the report here instead of stdout")
    p.add_argument("--node-cap", type=int, default=10_000_000, help="game-tree node cap")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized search only")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="dcgames", description="Pricing DC cones and coding games.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(group, name, func, help_text):
        p = group.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    cone = sub.add_parser("cone", help="cone algebra").add_subparsers(dest="sub", required=True,
                                                                      parser_class=_Parser)
    p = leaf(cone, "op", cmd_cone_op, "combine cones")
    p.add_argument("kind", choices=["union", "intersection", "disjoint_sum", "minplus", "robustify",
                                    "semidirect"])
    p.add_argument("A")
    p.add_argument("B", nargs="?")
    p.add_argument("--lam", type=float, default=0.5)
    p = leaf(cone, "dual", cmd_cone_dual, "dual cone")
    p.add_argument("A")
    p.add_argument("--prune", action="store_true")
    p = leaf(cone, "contains", cmd_cone_contains, "whether B lies inside A")
    p.add_argument("A")
    p.add_argument("B")
    p = leaf(cone, "member", cmd_cone_member, "portfolio membership")
    p.add_argument("A")
    p.add_argument("--portfolio", required=True)
    p = leaf(cone, "informative", cmd_cone_informative, "informativeness test")
    p.add_argument("A")

    p = leaf(sub, "capacity", cmd_capacity, "information capacity")
    p.add_argument("A")
    p.add_argument("--method", default="auto", choices=["auto", "blahut_arimoto", "minimax", "oracle_grid"])

    p = leaf(sub, "entropy", cmd_entropy, "entropy of a cone")
    p.add_argument("A", nargs="?")
    p.add_argument("--generators", help="semicolon-separated generator vectors")
    p.add_argument("--method", default="auto",
                   choices=["auto", "halfspace_closed_form", "search_upper_bound"])

    chan = sub.add_parser("channel", help="channels").add_subparsers(dest="sub", required=True,
                                                                     parser_class=_Parser)
    p = leaf(chan, "build", cmd_channel_build, "build a channel")
    p.add_argument("kind")
    p.add_argument("--params", default="{}", help="constructor parameters as JSON")

    game = sub.add_parser("game", help="channel coding games").add_subparsers(dest="sub", required=True,
                                                                              parser_class=_Parser)
    p = leaf(game, "synth", cmd_game_synth, "strategy from a coding scheme")
    p.add_argument("scheme")
    p = leaf(game, "verify", cmd_game_verify, "exhaustive verification")
    p.add_argument("spec")
    p.add_argument("strategy")
    p = leaf(game, "feasible", cmd_game_feasible, "coding feasibility via degradedness")
    p.add_argument("channel")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)

    src = sub.add_parser("source", help="source coding games").add_subparsers(dest="sub", required=True,
                                                                              parser_class=_Parser)
    for name, func in (("synth", cmd_source_synth), ("verify", cmd_source_verify)):
        p = leaf(src, name, func, f"{name} a martingale source strategy")
        p.add_argument("--p", required=True, help="source distribution")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--code", required=True, help="comma-separated codewords, e.g. 00,01,10")
        if name == "verify":
            p.add_argument("--eps", type=float, required=True)
    p = leaf(src, "sanov", cmd_source_sanov, "type-class achievability scheme")
    p.add_argument("--a", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--verify", action="store_true")

    demo = sub.add_parser("demo", help="worked examples").add_subparsers(dest="sub", required=True,
                                                                         parser_class=_Parser)
    p = leaf(demo, "mail", demo_mail, "k-of-n mail insurance")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k", type=int, default=7)
    p.add_argument("--p", type=float, default=0.1)
    p = leaf(demo, "bsc-feedback", demo_bsc_feedback, "BSC with feedback")
    p.add_argument("--beta", type=float, default=0.11)
    leaf(demo, "pentagon", demo_pentagon, "zero-error pentagon code")
    p = leaf(demo, "fano", demo_fano, "requirement cone capacity")
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--eps", type=float, default=0.1)
    leaf(demo, "avcf-dual", demo_avcf_dual, "encoder/adversary state duality")
    return parser


def _digest(argv, args):
    h = hashlib.sha256(json.dumps(argv).encode())
    for name in ("A", "B", "spec", "strategy", "scheme", "channel"):
        path = getattr(args, name, None)
        if path:
            try:
                with open(path, "rb") as fh:
                    h.update(fh.read())
            except OSError:
                pass
    return h.hexdigest()


def _run(argv):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return {"command": argv, "error": str(exc), "status": EXIT_USAGE}, EXIT_USAGE, None
    try:
        results, status = args.func(args)
    except (DCGamesError, ValueError) as exc:
        report = {"command": argv, "error": f"{type(exc).__name__}: {exc}", "status": EXIT_USAGE}
        return report, EXIT_USAGE, args
    report = {"command": argv, "inputs_digest": _digest(argv, args), "results": results,
              "tolerance": args.tol, "status": status}
    return report, status, args


def dispatch(argv):
    """Run one command; returns ``(report, exit_code)``."""
    report, status, _ = _run(list(argv))
    return report, status


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    report, status, args = _run(argv)
    text = io.dumps(report)
    out = getattr(args, "json", None)
    if "error" in report:
        print(report["error"], file=sys.stderr)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(f"elapsed {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
