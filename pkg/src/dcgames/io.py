"""JSON interchange for cones, channels, game specs and strategies.

Everything is serialized with sorted keys and a fixed cell order so that
identical inputs give byte-identical output.
"""

import itertools
import json

import numpy as np

from . import channels as ch
from .cones import ConeKernel, DCCone
from .errors import InputError
from .games import GameSpec, TeamStrategy


def dumps(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        if np.isnan(v):
            return "nan"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


# -- cones --------------------------------------------------------------------


def cone_to_json(A):
    cells = sorted(sorted(c.normals.tolist()) for c in A.cells)
    return {"alphabet": list(A.alphabet.symbols), "cells": [{"normals": c} for c in cells]}


def cone_from_json(data):
    try:
        alphabet = data["alphabet"]
        cells = [c["normals"] for c in data["cells"]]
    except (KeyError, TypeError):
        raise InputError("cone JSON needs 'alphabet' and 'cells' with 'normals'") from None
    d = len(alphabet)
    return DCCone(alphabet, [np.asarray(c, dtype=float).reshape(len(c), d) for c in cells])


# -- channels -----------------------------------------------------------------


def channel_to_json(W):
    if W.kind != "explicit" and W.params:
        return {"kind": W.kind, "params": W.params}
    return {"kind": "explicit", "inputs": list(W.inputs.symbols),
            "cones": {x: cone_to_json(W.cone(x)) for x in W.inputs.symbols}}


def channel_from_json(data):
    try:
        kind = data["kind"]
    except (KeyError, TypeError):
        raise InputError("channel JSON needs a 'kind'") from None
    if kind == "explicit":
        try:
            inputs = data["inputs"]
            cones = [cone_from_json(data["cones"][str(x)]) for x in inputs]
        except (KeyError, TypeError):
            raise InputError("explicit channel JSON needs 'inputs' and one cone per input") from None
        return ch.GameChannel(ConeKernel(inputs, cones), "explicit", {})
    return ch.build_channel(kind, **data.get("params", {}))


# -- games --------------------------------------------------------------------


def _word(outputs, seq):
    return ",".join(outputs.symbols[y] for y in seq)


def _parse_word(outputs, text):
    return tuple(outputs.index(y) for y in text.split(",")) if text else ()


def strategy_to_json(strategy, n, outputs):
    """Tabulate a strategy over every prefix; sequences are comma-joined output labels."""
    outputs = ch.Alphabet(outputs)
    ny = len(outputs)
    policy, decoder = {}, {}
    for m in range(len(strategy.codebook)):
        for i in range(n):
            for prefix in itertools.product(range(ny), repeat=i):
                policy[f"{m}|{_word(outputs, prefix)}"] = strategy.portfolio(m, prefix).tolist()
    for y in itertools.product(range(ny), repeat=n):
        decoder[_word(outputs, y)] = strategy.decode(y)
    return {"codebook": {str(m): list(c) for m, c in enumerate(strategy.codebook)},
            "policy": policy, "decoder": decoder}


def strategy_from_json(data, outputs):
    outputs = ch.Alphabet(outputs)
    try:
        codebook = {int(m): [str(x) for x in c] for m, c in data["codebook"].items()}
        policy = {}
        for key, w in data["policy"].items():
            m, _, rest = key.partition("|")
            policy[(int(m), _parse_word(outputs, rest))] = np.asarray(w, dtype=float)
        decoder = {_parse_word(outputs, k): (None if v is None else int(v))
                   for k, v in data["decoder"].items()}
    except (KeyError, TypeError, ValueError, AttributeError):
        raise InputError("strategy JSON needs 'codebook', 'policy' and 'decoder'") from None
    return TeamStrategy(codebook, policy, lambda y: decoder.get(tuple(y)))


def spec_to_json(spec):
    return {"channel": channel_to_json(spec.channel), "n": spec.n, "L": spec.L, "eps": spec.eps,
            "prefix_rule": spec.prefix_rule}


def spec_from_json(data):
    try:
        return GameSpec(channel_from_json(data["channel"]), data["n"], data["L"], float(data["eps"]),
                        bool(data.get("prefix_rule", False)))
    except KeyError as exc:
        raise InputError(f"game spec JSON is missing {exc}") from None


def report_to_json(report):
    out = {"verdict": report.verdict, "min_payoff": report.min_payoff, "nodes": report.nodes,
           "violations": [[m, list(p), x] for m, p, x in report.violations],
           "prefix_violations": [[m, list(p), v] for m, p, v in report.prefix_violations]}
    if report.worst_path is not None:
        out["worst_path"] = {"message": report.worst_path[0], "outputs": list(report.worst_path[1])}
    return out
