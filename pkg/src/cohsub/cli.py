"""Command-line interface and JSON document format.

Matrices and vectors travel as ``{"kind": ..., "dim": n, "data": ...}``
with every complex entry written as a ``[re, im]`` pair.  ``kind`` is one
of ``"density"``, ``"kraus"`` or ``"vector"``.  A channel file is a JSON
list of ``"kraus"`` documents (a single document is accepted too).

Exit status: 0 on success / feasible / no violations, 1 when infeasible
or violations were found, 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from . import paperbench
from .channels import (
    ChannelKind,
    VanishingProbabilityError,
    apply_channel,
    apply_stochastic,
    classify_kraus,
    validate_channel,
)
from .feasibility import (
    CompletionResult,
    RayMappingSolution,
    deterministic_completion_search,
    stochastic_io_reachable,
)
from .qcore import DensityMatrix, as_matrix
from .subspace import SubspaceReport, max_pure_coherent_subspace

log = logging.getLogger("cohsub")

KINDS = ("density", "kraus", "vector")
EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class DocumentError(ValueError):
    """A JSON document does not describe a valid value."""


# --------------------------------------------------------------------------
# encoding
# --------------------------------------------------------------------------

def encode_complex(z) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(m, kind: str = "kraus") -> dict:
    m = np.asarray(m)
    return {"kind": kind, "dim": int(m.shape[0]),
            "data": [[encode_complex(z) for z in row] for row in m]}


def encode_density(rho: DensityMatrix) -> dict:
    return encode_matrix(rho.matrix, "density")


def encode_vector(v) -> dict:
    v = np.asarray(v).reshape(-1)
    return {"kind": "vector", "dim": int(v.size), "data": [encode_complex(z) for z in v]}


def encode_subspace_report(report: SubspaceReport) -> dict:
    return {"max_dimension": report.max_dimension,
            "projector": list(report.witness_projector.indices),
            "state": encode_vector(report.witness_state)}


def encode_ray_solution(sol: RayMappingSolution) -> dict:
    return {"feasible": True,
            "pattern": list(sol.pattern.target_row),
            "kraus": encode_matrix(sol.kraus),
            "ray_constants": [encode_complex(c) for c in sol.ray_constants],
            "success_probability": sol.success_probability}


def encode_completion(res: CompletionResult) -> dict:
    channel = None if res.channel is None else [encode_matrix(k) for k in res.channel.kraus_ops]
    return {"success": res.success, "residual": res.residual,
            "restarts_used": res.restarts_used, "channel": channel}


# --------------------------------------------------------------------------
# decoding
# --------------------------------------------------------------------------

def _decode_complex(x, where: str) -> complex:
    if (not isinstance(x, (list, tuple)) or len(x) != 2
            or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in x)):
        raise DocumentError(f"{where}: complex entry must be a [re, im] pair of numbers")
    z = complex(float(x[0]), float(x[1]))
    if not np.isfinite(z):
        raise DocumentError(f"{where}: complex entry must be finite")
    return z


def decode_document(doc, expect: Optional[str] = None):
    """Parse a matrix/vector document into a value of its declared kind.

    Returns a :class:`DensityMatrix` for ``"density"``, a 2-D array for
    ``"kraus"`` and a 1-D array for ``"vector"``.

    Raises
    ------
    DocumentError
        Naming the first violated invariant.
    """
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise DocumentError(f"kind: expected one of {', '.join(KINDS)}, got {kind!r}")
    if expect is not None and kind != expect:
        raise DocumentError(f"kind: expected {expect!r}, got {kind!r}")
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise DocumentError("dim: must be a positive integer")
    data = doc.get("data")
    if not isinstance(data, list) or len(data) != dim:
        raise DocumentError(f"data: expected {dim} entries")
    if kind == "vector":
        return np.array([_decode_complex(x, f"data[{i}]") for i, x in enumerate(data)])
    rows = []
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != dim:
            raise DocumentError(f"data[{i}]: expected a row of {dim} entries")
        rows.append([_decode_complex(x, f"data[{i}][{j}]") for j, x in enumerate(row)])
    m = as_matrix(rows)
    if kind == "kraus":
        return m
    try:
        return DensityMatrix(m)
    except ValueError as exc:
        raise DocumentError(f"density: {exc}") from exc


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc


def load_document(path: str, expect: str):
    try:
        return decode_document(_load(path), expect)
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc}") from exc


def load_channel(path: str) -> List[np.ndarray]:
    doc = _load(path)
    docs = doc if isinstance(doc, list) else [doc]
    if not docs:
        raise DocumentError(f"{path}: empty Kraus list")
    try:
        return [decode_document(d, "kraus") for d in docs]
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _emit(obj) -> None:
    json.dump(obj, sys.stdout)
    sys.stdout.write("\n")


def _cmd_classify(args) -> int:
    k = load_document(args.kraus, "kraus")
    _emit({"class": classify_kraus(k).value, "dim": int(k.shape[0])})
    return EXIT_OK


def _parse_indices(text: str, count: int) -> List[int]:
    try:
        idx = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise DocumentError(f"--postselect: not a comma-separated index list: {text!r}") from exc
    if not idx or any(not 1 <= i <= count for i in idx):
        raise DocumentError(f"--postselect: indices must lie in 1..{count}")
    return sorted(set(idx))


def _cmd_apply(args) -> int:
    ops = load_channel(args.channel)
    rho = load_document(args.state, "density")
    if args.postselect is None:
        spec = validate_channel(ops)
        if spec.kind is not ChannelKind.TRACE_PRESERVING:
            raise DocumentError(f"{args.channel}: channel is not trace preserving ({spec.kind.value})")
        _emit({"state": encode_density(apply_channel(spec, rho))})
        return EXIT_OK
    subset = [ops[i - 1] for i in _parse_indices(args.postselect, len(ops))]
    try:
        out, prob = apply_stochastic(subset, rho)
    except VanishingProbabilityError as exc:
        _emit({"state": None, "probability": 0.0, "error": str(exc)})
        return EXIT_NEGATIVE
    _emit({"state": encode_density(out), "probability": prob})
    return EXIT_OK


def _cmd_subspace(args) -> int:
    rho = load_document(args.state, "density")
    _emit(encode_subspace_report(max_pure_coherent_subspace(rho)))
    return EXIT_OK


def _cmd_reach(args) -> int:
    rho = load_document(args.state, "density")
    phi = load_document(args.target, "vector")
    if phi.size != rho.dim:
        raise DocumentError(f"{args.target}: target dimension {phi.size} != state dimension {rho.dim}")
    nrm = np.linalg.norm(phi)
    if abs(nrm - 1) > 1e-9:
        raise DocumentError(f"{args.target}: target state must be normalized (norm {nrm:.12g})")
    if args.deterministic:
        res = deterministic_completion_search(rho, phi, restarts=args.restarts, seed=args.seed)
        _emit(encode_completion(res))
        return EXIT_OK if res.success else EXIT_NEGATIVE
    sol = stochastic_io_reachable(rho, phi)
    if sol is None:
        _emit({"feasible": False})
        return EXIT_NEGATIVE
    _emit(encode_ray_solution(sol))
    return EXIT_OK


def _run_campaign(name: str, samples: Optional[int], seed: int) -> paperbench.CampaignReport:
    if name == "theorem1":
        return paperbench.run_theorem1_campaign(samples or 10_000, seed)
    if name == "theorem3":
        return paperbench.run_theorem3_campaign(samples or 50, seed)
    if name == "sio-monotone":
        return paperbench.run_sio_monotone_campaign(samples or 500, seed)
    return paperbench.CAMPAIGNS[name]()


def _cmd_verify(args) -> int:
    names = list(paperbench.CAMPAIGNS) if args.which == "all" else [args.which]
    reports = [_run_campaign(n, args.samples, args.seed) for n in names]
    for r in reports:
        log.info("%s: %d violations over %d samples", r.name, r.violations, r.samples)
    if args.which == "all":
        _emit({"reports": [r.to_dict() for r in reports],
               "violations": sum(r.violations for r in reports)})
    else:
        _emit(reports[0].to_dict())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NEGATIVE


def _default_seed() -> int:
    raw = os.environ.get("COHERENCE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise DocumentError(f"COHERENCE_SEED: not an integer: {raw!r}") from None


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return val


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohsub",
        description="Coherence transformations under incoherent and strictly incoherent operations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a Kraus operator")
    p.add_argument("kraus")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("apply", help="apply a channel, or post-select on some of its Kraus operators")
    p.add_argument("channel")
    p.add_argument("state")
    p.add_argument("--postselect", metavar="I,J,...", help="1-based Kraus indices to keep")
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("subspace", help="maximal pure coherent-state subspace")
    p.add_argument("state")
    p.set_defaults(func=_cmd_subspace)

    p = sub.add_parser("reach", help="stochastic or deterministic reachability of a pure target")
    p.add_argument("state")
    p.add_argument("target")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--restarts", type=_positive, default=32)
    p.set_defaults(func=_cmd_reach)

    p = sub.add_parser("verify", help="run the reproduction campaigns")
    p.add_argument("which", choices=[*paperbench.CAMPAIGNS, "all"])
    p.add_argument("--samples", type=_positive)
    p.add_argument("--seed", type=int, default=default_seed)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        seed = _default_seed()
    except DocumentError as exc:
        print(f"cohsub: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    parser = build_parser(seed)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"cohsub: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
