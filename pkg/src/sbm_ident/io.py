"""Parameter files, edge lists and moment files.

Parameter files are JSON objects with a ``model`` field (``binary``,
``affiliation``, ``finite`` or ``weighted``), ``Q``, ``pi`` and a
model-specific block::

    {"model": "affiliation", "Q": 2, "pi": [0.3, 0.7], "alpha": 0.8, "beta": 0.2}
    {"model": "binary", "Q": 2, "pi": [0.5, 0.5], "P": [[0.8, 0.1], [0.1, 0.6]]}
    {"model": "finite", "Q": 1, "pi": [1], "kappa": 3, "Pvec": [[[0.2, 0.3, 0.5]]]}
    {"model": "weighted", "Q": 2, "pi": [0.4, 0.6], "family": "truncated-poisson",
     "sparsity": [[0.9, 0.5], [0.5, 0.9]], "theta": [[1, 3], [3, 1]]}

Weighted affiliation models may give ``alpha, beta, theta_in, theta_out``
instead of the two matrices.

Edge lists start with ``# n=<N> kind=<binary|finite|weighted>`` (finite
graphs add ``kappa=<K>``) followed by one ``i<TAB>j<TAB>value`` line per
pair, ``1 <= i < j <= N``, in lexicographic order.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import InvalidParamsError
from .models import (
    AffiliationParams,
    BinaryBlockParams,
    Family,
    FiniteStateParams,
    ModelParams,
    WeightedParams,
)
from .sampler import SampledGraph

PathLike = Union[str, Path]


def params_from_dict(d: dict) -> ModelParams:
    try:
        model = d["model"]
        pi = np.asarray(d["pi"], dtype=float)
        if "Q" in d and int(d["Q"]) != len(pi):
            raise InvalidParamsError(f"Q={d['Q']} but pi has {len(pi)} entries")
        if model == "affiliation":
            return AffiliationParams(pi, d["alpha"], d["beta"])
        if model == "binary":
            return BinaryBlockParams(pi, d["P"])
        if model == "finite":
            p = FiniteStateParams(pi, d["Pvec"])
            if "kappa" in d and int(d["kappa"]) != p.kappa:
                raise InvalidParamsError(f"kappa={d['kappa']} but Pvec has {p.kappa} states")
            return p
        if model == "weighted":
            family = Family(d.get("family", Family.TRUNCATED_POISSON.value))
            if "sparsity" in d:
                return WeightedParams(pi, d["sparsity"], d["theta"], family)
            return WeightedParams.affiliation(pi, d["alpha"], d["beta"],
                                              d["theta_in"], d["theta_out"], family)
    except KeyError as err:
        raise InvalidParamsError(f"parameter file lacks field {err}") from None
    except (TypeError, ValueError) as err:
        if isinstance(err, InvalidParamsError):
            raise
        raise InvalidParamsError(f"malformed parameter file: {err}") from None
    raise InvalidParamsError(f"unknown model {model!r}")


def params_to_dict(p: ModelParams) -> dict:
    if isinstance(p, AffiliationParams):
        return {"model": "affiliation", "Q": p.Q, "pi": p.pi.tolist(), "alpha": p.alpha, "beta": p.beta}
    if isinstance(p, BinaryBlockParams):
        return {"model": "binary", "Q": p.Q, "pi": p.pi.tolist(), "P": p.P.tolist()}
    if isinstance(p, FiniteStateParams):
        return {"model": "finite", "Q": p.Q, "pi": p.pi.tolist(), "kappa": p.kappa, "Pvec": p.Pvec.tolist()}
    if isinstance(p, WeightedParams):
        return {"model": "weighted", "Q": p.Q, "pi": p.pi.tolist(), "family": p.family.value,
                "sparsity": p.sparsity.tolist(), "theta": p.theta.tolist()}
    raise TypeError(type(p).__name__)


def load_params(path: PathLike) -> ModelParams:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as err:
            raise InvalidParamsError(f"{path}: not valid JSON ({err})") from None
    return params_from_dict(d)


def _format_value(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def write_edge_list(g: SampledGraph, fh: IO[str]) -> None:
    header = f"# n={g.n} kind={g.kind}"
    if g.kind == "finite":
        header += f" kappa={g.kappa}"
    fh.write(header + "\n")
    iu, ju = g.pairs()
    # plain Python scalars format several times faster than numpy ones
    values = g.edges.tolist()
    if g.edges.dtype.kind in "iub":
        lines = [f"{i}\t{j}\t{v}" for i, j, v in zip((iu + 1).tolist(), (ju + 1).tolist(), values)]
    else:
        lines = [f"{i}\t{j}\t{_format_value(v)}" for i, j, v in zip((iu + 1).tolist(), (ju + 1).tolist(), values)]
    fh.write("\n".join(lines))
    if lines:
        fh.write("\n")


def write_latent(g: SampledGraph, fh: IO[str]) -> None:
    if g.z is None:
        raise ValueError("graph was sampled without keeping latent groups")
    fh.write(f"# n={g.n}\n")
    for i, q in enumerate(g.z):
        fh.write(f"{i + 1}\t{int(q) + 1}\n")


def read_edge_list(path: PathLike) -> SampledGraph:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise InvalidParamsError(f"{path}: missing '# n=... kind=...' header")
        meta = dict(tok.split("=", 1) for tok in header[1:].split() if "=" in tok)
        try:
            n, kind = int(meta["n"]), meta["kind"]
        except KeyError as err:
            raise InvalidParamsError(f"{path}: header lacks {err}") from None
        data = np.loadtxt(fh, ndmin=2) if n > 1 else np.zeros((0, 3))
    if kind not in ("binary", "finite", "weighted"):
        raise InvalidParamsError(f"{path}: unknown kind {kind!r}")
    E = n * (n - 1) // 2
    if len(data) != E:
        raise InvalidParamsError(f"{path}: expected {E} edge lines, found {len(data)}")
    i = data[:, 0].astype(np.int64) - 1
    j = data[:, 1].astype(np.int64) - 1
    if np.any(i >= j) or np.any(i < 0) or np.any(j >= n):
        raise InvalidParamsError(f"{path}: pairs must satisfy 1 <= i < j <= n")
    # position of (i, j) in the lexicographic pair order
    pos = i * n - i * (i + 1) // 2 + (j - i - 1)
    edges = np.zeros(E, dtype=np.int64 if kind != "weighted" else float)
    edges[pos] = data[:, 2]
    if kind == "weighted" and np.all(edges == np.floor(edges)):
        edges = edges.astype(np.int64)
    kappa = int(meta["kappa"]) if "kappa" in meta else (2 if kind == "binary" else None)
    if kind == "finite" and kappa is None:
        kappa = int(edges.max()) + 1
    return SampledGraph(n, kind, edges, None, kappa)
