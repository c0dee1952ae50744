"""Command line interface.

Subcommands: ``validate``, ``constants``, ``cohomology``, ``extend``,
``equivalence``, ``rigidity`` and ``demo``.  Documents are JSON; a document
may refer to another by a path relative to its own location.

Exit codes
----------
0  success: checks passed, extension found, rigidity certified, witness found
1  validation failure (first violation is reported)
2  usage error
3  I/O error
4  parse error (malformed document, including matrices of the wrong rank)
5  bound mismatch between documents or with a requested bound
6  negative verdict: obstructed extension, rigidity not certified, equivalence unknown
7  internal inconsistency (an identity that must hold failed; a bug)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .base import BaseRing, Z
from .deformation import (
    Automorphism,
    Deformation,
    automorphism_from_document,
    automorphism_to_document,
    deformation_from_document,
    deformation_to_document,
    equivalent_extensions,
    extend_automorphism,
    extend_deformation,
    random_deformation,
    rigidity_certificate,
    validate_automorphism,
    validate_deformation,
)
from .errors import BoundMismatch, DocumentError, InternalInconsistency
from .exp_seq import parse as parse_seq
from .fstar_complex import FStar
from .ln_structure import StructureTable, associativity_report
from .ring_core import FiniteRing, _plain, hochschild_cohomology, integers, truncated_polynomial_ring, validate_ring
from .s_algebra import ActionTable, canonical_instance, load_action, save_action, trivial_instance, validate_action

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_MISMATCH = 5
EXIT_NEGATIVE = 6
EXIT_INTERNAL = 7


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Document I/O
# ---------------------------------------------------------------------------


def dump_document(doc) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_document(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc


def write_document(path, doc) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(dump_document(doc))
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from exc


def _resolve(ref, origin: Path):
    """Inline document or a path relative to ``origin``'s directory."""
    if isinstance(ref, str):
        path = (origin.parent / ref).resolve()
        return read_document(path), path
    if isinstance(ref, dict):
        return ref, None
    raise CliError(EXIT_PARSE, f"{origin}: expected a document or a file reference")


def document_kind(doc) -> str:
    if not isinstance(doc, dict):
        raise CliError(EXIT_PARSE, "document must be a JSON object")
    if doc.get("kind") == "structure-table":
        return "structure-table"
    if "mult" in doc:
        return "ring"
    if "coeffs" in doc and "action" in doc:
        return "deformation"
    if "coeffs" in doc and "ring" in doc:
        return "automorphism"
    if "action" in doc and "bound" in doc:
        return "action"
    raise CliError(EXIT_PARSE, "unrecognised document (expected ring, action, deformation or automorphism)")


def load_ring(doc, origin: Path) -> FiniteRing:
    doc, _ = _resolve(doc, origin)
    return FiniteRing.from_document(doc)


def load_action_file(path) -> tuple[ActionTable, Path]:
    path = Path(path).resolve()
    doc = read_document(path)
    return _action_from(doc, path), path


def _action_from(doc, origin: Path) -> ActionTable:
    if not isinstance(doc, dict) or "ring" not in doc:
        raise CliError(EXIT_PARSE, f"{origin}: action document needs a 'ring'")
    ring = load_ring(doc["ring"], origin)
    return load_action(doc, ring)


def load_deformation_file(path) -> tuple[Deformation, Path, Path | None]:
    path = Path(path).resolve()
    doc = read_document(path)
    if not isinstance(doc, dict) or "action" not in doc:
        raise CliError(EXIT_PARSE, f"{path}: deformation document needs an 'action'")
    adoc, apath = _resolve(doc["action"], path)
    T = _action_from(adoc, apath or path)
    return deformation_from_document(doc, T), path, apath


def load_automorphism_file(path) -> Automorphism:
    path = Path(path).resolve()
    doc = read_document(path)
    if not isinstance(doc, dict) or "ring" not in doc:
        raise CliError(EXIT_PARSE, f"{path}: automorphism document needs a 'ring'")
    return automorphism_from_document(doc, load_ring(doc["ring"], path))


def _with_base(T: ActionTable, base: BaseRing) -> ActionTable:
    if base == T.base:
        return T
    ring = T.ring.with_base(base)
    return ActionTable(ring, T.bound, T.action)


def _vector(v) -> list:
    return [_plain(x) for x in np.asarray(v, dtype=object).reshape(-1)]


def _certificate(cert) -> dict | None:
    if cert is None:
        return None
    return {"functional": _vector(cert.functional), "modulus": int(cert.modulus)}


# ---------------------------------------------------------------------------
# Commands.  Each returns (exit code, text lines, result dict, meta dict).
# ---------------------------------------------------------------------------


def cmd_validate(args):
    lines, results, code = [], [], EXIT_OK
    bound_meta = None
    for p in args.paths:
        path = Path(p).resolve()
        doc = read_document(path)
        kind = document_kind(doc)
        verdicts = []
        if kind == "structure-table":
            S = StructureTable.from_document(doc)
            rep = associativity_report(S)
            verdicts.append(("associativity", bool(rep), "" if rep else f"counterexample {rep.counterexample[:4]}"))
            bound_meta = S.bound
        elif kind == "ring":
            A = FiniteRing.from_document(doc)
            rep = validate_ring(A)
            verdicts.append(("ring", bool(rep), "" if rep else str(rep)))
        elif kind == "automorphism":
            Phi = load_automorphism_file(path)
            rep = validate_ring(Phi.ring)
            verdicts.append(("ring", bool(rep), "" if rep else str(rep)))
            if rep:
                rep = validate_automorphism(Phi)
                verdicts.append(("automorphism", bool(rep), "" if rep else str(rep)))
        else:
            if kind == "action":
                T = _action_from(doc, path)
                D = None
            else:
                D, _, _ = load_deformation_file(path)
                T = D.action
            bound_meta = T.bound
            S = StructureTable(T.bound)
            rep = validate_ring(T.ring)
            verdicts.append(("ring", bool(rep), "" if rep else str(rep)))
            if rep:
                rep = validate_action(T, S)
                verdicts.append(("action", bool(rep), "" if rep else str(rep)))
            if rep and D is not None:
                rep = validate_deformation(D, S)
                verdicts.append(("deformation", bool(rep), "" if rep else str(rep)))
        for what, ok, detail in verdicts:
            lines.append(f"{p}: {what}: {'pass' if ok else detail}")
            if not ok:
                code = EXIT_INVALID
        results.append({"path": str(p), "kind": kind, "checks": [
            {"check": w, "pass": ok, "detail": d} for w, ok, d in verdicts
        ]})
    return code, lines, {"documents": results}, {"bound": bound_meta}


def cmd_constants(args):
    alpha, beta = parse_seq(args.alpha), parse_seq(args.beta)
    S = StructureTable(args.bound)
    if alpha.degree + beta.degree > args.bound:
        raise CliError(EXIT_MISMATCH, f"degree {alpha.degree}+{beta.degree} exceeds bound {args.bound}")
    consts = S.constants(alpha, beta)
    items = sorted(consts.items(), key=lambda gc: gc[0].sort_key())
    lines = [f"gamma {g} coeff {c}" for g, c in items]
    if args.dump:
        write_document(args.dump, S.to_document())
        lines.append(f"wrote structure table (bound {args.bound}) to {args.dump}")
    result = {"alpha": str(alpha), "beta": str(beta), "constants": [{"gamma": str(g), "coeff": c} for g, c in items]}
    return EXIT_OK, lines, result, {"bound": args.bound}


def cmd_cohomology(args):
    base = BaseRing.parse(args.base)
    if args.action:
        T, _ = load_action_file(args.action)
        ring = T.ring
    elif args.ring:
        path = Path(args.ring).resolve()
        ring, T = FiniteRing.from_document(read_document(path)), None
    else:
        raise CliError(EXIT_USAGE, "give --action or --ring")
    if args.complex == "hochschild":
        res = hochschild_cohomology(ring.with_base(base), args.n, args.representatives)
        name, bound = f"HH^{args.n}", None
    else:
        if T is None:
            raise CliError(EXIT_USAGE, "the fstar complex needs --action")
        if args.n not in (0, 1, 2):
            raise CliError(EXIT_USAGE, "fstar cohomology is provided for n in {0, 1, 2}")
        bound = T.bound if args.bound is None else args.bound
        if bound > T.bound:
            raise CliError(EXIT_MISMATCH, f"bound {bound} exceeds the action table bound {T.bound}")
        T = _with_base(T.restrict(bound), base)
        res = FStar(T, StructureTable(bound)).cohomology(args.n, args.representatives)
        name = f"H^{args.n}"
    lines = [f"{name} {res}"]
    for k, rep in enumerate(res.representatives):
        lines.append(f"representative {k + 1}: {_vector(rep)}")
    result = {
        "group": name,
        "complex": args.complex,
        "rank": res.free_rank,
        "torsion": res.torsion,
        "representatives": [_vector(r) for r in res.representatives],
    }
    return EXIT_OK, lines, result, {"bound": bound, "base": str(base)}


def cmd_extend(args):
    if args.automorphism:
        Phi = load_automorphism_file(args.automorphism)
        if not validate_automorphism(Phi):
            raise CliError(EXIT_INVALID, f"input automorphism is invalid: {validate_automorphism(Phi)}")
        lines = []
        while Phi.order < args.to_order:
            ext = extend_automorphism(Phi)
            if not ext.ok:
                lines.append(f"obstructed: order {Phi.order} does not extend (HH^2 class nonzero)")
                return EXIT_NEGATIVE, lines, {"reached": Phi.order, "certificate": _certificate(ext.certificate)}, {}
            Phi = ext.result
            lines.append(f"extended to order {Phi.order}")
        Phi = Phi.truncate(args.to_order)
        if args.emit:
            write_document(args.emit, automorphism_to_document(Phi, Phi.ring.to_document()))
            lines.append(f"wrote {args.emit}")
        return EXIT_OK, lines, {"reached": Phi.order}, {"base": str(Phi.ring.base)}
    if not args.deformation:
        raise CliError(EXIT_USAGE, "give --deformation or --automorphism")
    D, dpath, apath = load_deformation_file(args.deformation)
    S = StructureTable(D.action.bound)
    rep = validate_deformation(D, S)
    if not rep:
        raise CliError(EXIT_INVALID, f"input deformation is invalid: {rep}")
    lines = []
    while D.order < args.to_order:
        ext = extend_deformation(D, S)
        if not ext.ok:
            lines.append(f"obstructed: order {D.order} does not extend (class of Ob in H^2 is nonzero)")
            result = {"reached": D.order, "certificate": _certificate(ext.certificate)}
            return EXIT_NEGATIVE, lines, result, {"bound": D.action.bound}
        D = ext.result
        lines.append(f"extended to order {D.order}")
    D = D.truncate(args.to_order)
    if args.emit:
        emit = Path(args.emit).resolve()
        ref = os.path.relpath(apath, emit.parent) if apath is not None else None
        write_document(emit, deformation_to_document(D, ref))
        lines.append(f"wrote {args.emit}")
    return EXIT_OK, lines, {"reached": D.order}, {"bound": D.action.bound, "base": str(D.action.base)}


def cmd_equivalence(args):
    Dt, _, _ = load_deformation_file(args.first)
    Db, _, _ = load_deformation_file(args.second)
    if Dt.action != Db.action:
        raise CliError(EXIT_MISMATCH, "the two deformations use different action tables")
    S = StructureTable(Dt.action.bound)
    for D, name in ((Dt, args.first), (Db, args.second)):
        rep = validate_deformation(D, S)
        if not rep:
            raise CliError(EXIT_INVALID, f"{name} is invalid: {rep}")
    try:
        res = equivalent_extensions(Dt, Db, S)
    except ValueError as exc:
        raise CliError(EXIT_MISMATCH, str(exc)) from exc
    meta = {"bound": Dt.action.bound, "base": str(Dt.action.base)}
    if res.verdict == "equivalent":
        phi = res.witness.coefficient(res.witness.order)
        lines = ["equivalent", f"witness 1 + t^{res.witness.order} phi with phi = {[_vector(r) for r in phi]}"]
        if args.emit:
            write_document(args.emit, automorphism_to_document(res.witness))
            lines.append(f"wrote {args.emit}")
        return EXIT_OK, lines, {"verdict": "equivalent", "phi": [_vector(r) for r in phi]}, meta
    lines = ["unknown: the top coefficients differ by a nonzero class in H^1",
             f"class representative: {_vector(res.representative)}"]
    result = {"verdict": "unknown", "representative": _vector(res.representative),
              "certificate": _certificate(res.certificate)}
    return EXIT_NEGATIVE, lines, result, meta


def cmd_rigidity(args):
    T, _ = load_action_file(args.action)
    bound = T.bound if args.bound is None else args.bound
    if bound > T.bound:
        raise CliError(EXIT_MISMATCH, f"bound {bound} exceeds the action table bound {T.bound}")
    T = T.restrict(bound)
    S = StructureTable(bound)
    rep = validate_action(T, S)
    if not rep:
        raise CliError(EXIT_INVALID, f"action table is invalid: {rep}")
    report = rigidity_certificate(T, S, args.max_order, args.seed)
    lines = report.lines()
    if report.h1_representative is not None:
        lines.append(f"H^1 representative: {_vector(report.h1_representative)}")
    if report.hh2_representative is not None:
        lines.append(f"HH^2 representative: {_vector(report.hh2_representative)}")
    result = {
        "rigid": report.rigid,
        "max_order": args.max_order,
        "h1": {"rank": report.h1.free_rank, "torsion": report.h1.torsion},
        "hh2": {"rank": report.hh2.free_rank, "torsion": report.hh2.torsion},
        "h1_representative": None if report.h1_representative is None else _vector(report.h1_representative),
        "h1_certificate": _certificate(report.h1_certificate),
        "gauge_orders": [g.order for g in report.demonstration],
    }
    code = EXIT_OK if report.rigid else EXIT_NEGATIVE
    return code, lines, result, {"bound": bound, "base": str(T.base)}


def cmd_demo(args):
    out = Path(args.out)
    rng = np.random.default_rng(args.seed)
    N = args.bound
    files = {}
    Zr = integers()
    Zx2 = truncated_polynomial_ring(2)
    files["ring_Z.json"] = Zr.to_document()
    files["ring_Zx2.json"] = Zx2.to_document()
    T_Zx2 = trivial_instance(Zx2, N)
    files["action_Z_trivial.json"] = save_action(trivial_instance(Zr, N), "ring_Z.json")
    files["action_Zx2_trivial.json"] = save_action(T_Zx2, "ring_Zx2.json")
    cN = min(N, 3)
    ring, T = canonical_instance(cN)
    files["ring_canonical.json"] = ring.to_document()
    files[f"action_canonical{cN}.json"] = save_action(T, "ring_canonical.json")
    zero = Deformation(T_Zx2, [Zx2.base.zeros(T_Zx2.action.shape)])
    files["deformation_Zx2_trivial.json"] = deformation_to_document(zero, "action_Zx2_trivial.json")
    D = random_deformation(T, StructureTable(cN), 1, rng)
    files[f"deformation_canonical{cN}.json"] = deformation_to_document(D, f"action_canonical{cN}.json")
    lines = []
    for name, doc in files.items():
        write_document(out / name, doc)
        lines.append(f"wrote {out / name}")
    return EXIT_OK, lines, {"files": sorted(files)}, {"bound": N}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text", help="output format")
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (echoed in reports)")

    p = argparse.ArgumentParser(prog="lndeform", description=__doc__.split("\n")[0], parents=[common])
    p.add_argument("--version", action="version", version=f"lndeform {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="validate ring/action/deformation/automorphism documents")
    v.add_argument("paths", nargs="+")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("constants", parents=[common], help="structure constants n_gamma of s_alpha s_beta")
    c.add_argument("--alpha", required=True)
    c.add_argument("--beta", required=True)
    c.add_argument("--bound", type=int, default=4)
    c.add_argument("--dump", metavar="FILE", help="write the whole table")
    c.set_defaults(func=cmd_constants)

    h = sub.add_parser("cohomology", parents=[common], help="H^n of the truncated complex or HH^n")
    h.add_argument("--action", metavar="FILE")
    h.add_argument("--ring", metavar="FILE", help="ring document (hochschild only)")
    h.add_argument("--complex", choices=("fstar", "hochschild"), default="fstar")
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--bound", type=int, default=None, help="truncation bound (default: the action's bound)")
    h.add_argument("--base", default="Z", help="Z, Q or Zmod:p")
    h.add_argument("--representatives", type=int, default=0, metavar="K", help="dump up to K representatives")
    h.set_defaults(func=cmd_cohomology)

    e = sub.add_parser("extend", parents=[common], help="extend a deformation or automorphism order by order")
    e.add_argument("--deformation", metavar="FILE")
    e.add_argument("--automorphism", metavar="FILE")
    e.add_argument("--to-order", type=int, required=True)
    e.add_argument("--emit", metavar="FILE")
    e.set_defaults(func=cmd_extend)

    q = sub.add_parser("equivalence", parents=[common], help="compare two extensions of the same deformation")
    q.add_argument("--first", required=True, metavar="FILE")
    q.add_argument("--second", required=True, metavar="FILE")
    q.add_argument("--emit", metavar="FILE", help="write the witness automorphism")
    q.set_defaults(func=cmd_equivalence)

    r = sub.add_parser("rigidity", parents=[common], help="rigidity certificate at a bound and order")
    r.add_argument("--action", required=True, metavar="FILE")
    r.add_argument("--bound", type=int, default=None)
    r.add_argument("--max-order", type=int, default=3)
    r.set_defaults(func=cmd_rigidity)

    d = sub.add_parser("demo", parents=[common], help="write built-in fixture documents")
    d.add_argument("--out", default="lndeform-demo")
    d.add_argument("--bound", type=int, default=4)
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _kernels.apply_thread_cap()
    meta = {}
    try:
        code, lines, result, meta = args.func(args)
        error = None
    except CliError as exc:
        code, lines, result, error = exc.code, [], None, str(exc)
    except BoundMismatch as exc:
        code, lines, result, error = EXIT_MISMATCH, [], None, str(exc)
    except DocumentError as exc:
        code, lines, result, error = EXIT_PARSE, [], None, str(exc)
    except InternalInconsistency as exc:
        code, lines, result, error = EXIT_INTERNAL, [], None, f"internal inconsistency: {exc}"
    except (ValueError, KeyError, TypeError) as exc:
        code, lines, result, error = EXIT_PARSE, [], None, f"{type(exc).__name__}: {exc}"
    if args.format == "json":
        doc = {
            "tool": "lndeform",
            "version": __version__,
            "command": args.command,
            "seed": args.seed,
            "base": meta.get("base", str(Z)),
            "bound": meta.get("bound"),
            "exit_code": code,
            "result": result,
            "error": error,
            "lines": lines,
        }
        sys.stdout.write(dump_document(doc))
    else:
        for line in lines:
            print(line)
        if error:
            print(f"error: {error}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
