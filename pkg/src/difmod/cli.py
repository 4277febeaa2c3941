"""Command line interface: ``difmod COMMAND [FILE] [--builtin NAME] [--json]``.

Exit codes: 0 on success, 1 when a computation fails (for instance the
order cap of a completion is exceeded), 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field as dc_field

from . import builtins as bi
from .catalog import KINDS, n_variants, structure_data
from .dsl import DSLError, SystemDecl, decl_from_operator, parse
from .field import PoleError, TruncationError
from .involutive import CompletionError, complete, compatibility_conditions
from .weyl import OperatorMatrix

__all__ = ["OutputDocument", "run", "render", "main", "COMMANDS"]

SCHEMA = "1"

COMMANDS = (
    "cc",
    "adjoint",
    "involutive",
    "dims",
    "spencer",
    "paramtest",
    "torsion",
    "kalman",
    "geometry",
    "vessiot",
    "verify-param",
)


class InputError(ValueError):
    pass


@dataclass
class OutputDocument:
    command: str
    system: str | None = None
    seed: int = 0
    verdict: str | None = None
    summary: list = dc_field(default_factory=list)
    matrices: dict = dc_field(default_factory=dict)
    certificates: dict = dc_field(default_factory=dict)
    values: dict = dc_field(default_factory=dict)
    timing: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "schema": SCHEMA,
            "command": self.command,
            "system": self.system,
            "seed": self.seed,
            "verdict": self.verdict,
            "summary": list(self.summary),
            "matrices": {k: list(v) for k, v in self.matrices.items()},
            "certificates": dict(self.certificates),
            "values": self.values,
        }
        if self.timing is not None:
            d["timing"] = self.timing
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OutputDocument":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {d.get('schema')!r}")
        return cls(
            d["command"],
            d.get("system"),
            d.get("seed", 0),
            d.get("verdict"),
            list(d.get("summary", [])),
            {k: list(v) for k, v in d.get("matrices", {}).items()},
            dict(d.get("certificates", {})),
            d.get("values", {}),
            d.get("timing"),
        )


def _jsonable(v):
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


def render(doc: OutputDocument, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(doc.to_dict(), indent=2, sort_keys=True) + "\n"
    lines = []
    head = f"{doc.command}"
    if doc.system:
        head += f" [{doc.system}]"
    lines.append(head)
    lines.extend(doc.summary)
    for name, eqs in doc.matrices.items():
        lines.append(f"-- {name} ({len(eqs)} equation{'s' if len(eqs) != 1 else ''})")
        lines.extend(f"  {e}" for e in eqs)
    if doc.values:
        lines.append("-- values")
        for k, v in doc.values.items():
            lines.append(f"  {k}: {_text(v)}")
    if doc.certificates:
        lines.append("-- certificates")
        for k, v in doc.certificates.items():
            lines.append(f"  {k}: {'ok' if v else 'FAILED'}")
    if doc.timing is not None:
        lines.append("-- timing (s)")
        for k, v in doc.timing.items():
            lines.append(f"  {k}: {v}")
    return "\n".join(lines) + "\n"


def _text(v) -> str:
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_text(x) for x in v) + ")"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_text(x)}" for k, x in v.items()) + "}"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def _eqs(D: OperatorMatrix) -> list[str]:
    return [f"{e} = 0" for e in D.equations()]


# -- commands -----------------------------------------------------------------
@dataclass
class Context:
    decl: SystemDecl | None
    builtin: "bi.Builtin | None"
    args: argparse.Namespace

    @property
    def D(self) -> OperatorMatrix:
        if self.builtin is not None:
            return self.builtin.operator
        if self.decl is None:
            raise InputError("this command needs a system (FILE, '-' or --builtin)")
        return self.decl.operator()

    @property
    def name(self):
        if self.builtin is not None:
            return self.builtin.name
        return self.decl.name if self.decl else None

    def option(self, key, default=None):
        v = getattr(self.args, key, None)
        if v is not None:
            return v
        if self.decl is not None and key in self.decl.options:
            return self.decl.options[key]
        return default


def cmd_cc(ctx, doc):
    D = ctx.D
    C = compatibility_conditions(D, cap=ctx.option("cap"))
    doc.summary.append(f"{C.nrows} compatibility condition{'s' if C.nrows != 1 else ''}")
    doc.matrices["system"] = _eqs(D)
    doc.matrices["compatibility conditions"] = _eqs(C)
    doc.certificates["CC o D = 0"] = C.nrows == 0 or C.compose(D).is_zero()
    doc.verdict = "ok"


def cmd_adjoint(ctx, doc):
    D = ctx.D
    A = D.adjoint()
    doc.matrices["system"] = _eqs(D)
    doc.matrices["adjoint"] = _eqs(A)
    doc.certificates["ad(ad(D)) = D"] = A.adjoint(list(D.col_names)) == D
    doc.verdict = "ok"


def cmd_involutive(ctx, doc):
    from .jetspencer import JetSystem, involutivity_classes

    D = ctx.D
    B = complete(D, cap=ctx.option("cap"))
    doc.matrices["Janet basis"] = _eqs(B.matrix())
    doc.values["multiplicative variables"] = [
        [f"x{i + 1}" for i in sorted(m)] for m in B.multiplicative_vars()
    ]
    rep = involutivity_classes(JetSystem.from_operator(D), seed=ctx.args.seed)
    doc.values["symbol classes"] = {f"class {k}": v for k, v in sorted(rep.beta.items(), reverse=True) if v}
    doc.values["coordinates"] = rep.coordinates
    doc.values["order"] = rep.order
    C = compatibility_conditions(D, cap=ctx.option("cap"))
    doc.values["compatibility conditions"] = C.nrows
    doc.certificates["Janet basis is involutive"] = B.is_involutive()
    doc.verdict = "involutive" if rep.cartan else "not_involutive"
    doc.summary.append(f"symbol {'involutive' if rep.cartan else 'not involutive'} ({rep.coordinates} coordinates)")


def _jet_system(ctx):
    from .jetspencer import JetSystem, prolong

    p = ctx.option("prolong")
    if p is None:
        p = ctx.builtin.prolong if ctx.builtin is not None else 0
    R = JetSystem.from_operator(ctx.D)
    return prolong(R, p) if p else R, p


def cmd_dims(ctx, doc):
    from .jetspencer import bundle_dims

    R, p = _jet_system(ctx)
    t = bundle_dims(R, seed=ctx.args.seed)
    doc.summary.append(f"system of order {R.q} (prolonged {p} time{'s' if p != 1 else ''})")
    doc.summary.append(f"C = {_text(t.C)}")
    doc.summary.append(f"C(E) = {_text(t.CE)}")
    doc.summary.append(f"F = {_text(t.F)}")
    doc.values.update({"dim J": t.dim_J, "dim R": t.dim_R, "dim g": {str(k): v for k, v in t.dim_g.items()},
                       "C": list(t.C), "C(E)": list(t.CE), "F": list(t.F)})
    doc.certificates["C(E) = C + F columnwise"] = t.columns_exact()
    doc.verdict = "ok"


def cmd_spencer(ctx, doc):
    from .jetspencer import JetSystem, delta_cohomology, first_spencer_operator, symbol_family

    D = ctx.D
    R0 = JetSystem.from_operator(D)
    levels = ctx.option("levels", 2)
    fam = symbol_family(R0, levels, seed=ctx.args.seed)
    doc.values["symbol dims"] = {str(R0.q + s): fam[R0.q + s].dim for s in range(levels + 1)}
    rep = delta_cohomology(fam, [(2, R0.q)])
    B, Z, H = rep.entries[(2, R0.q)]
    doc.values[f"delta cohomology H^2 at order {R0.q} (B, Z, H)"] = [B, Z, H]
    doc.summary.append(f"dim H^2 = {H}")
    if not ctx.args.no_operator:
        R, p = _jet_system(ctx)
        D1, param = first_spencer_operator(R)
        doc.values["parametric jets"] = [f"{D.col_names[k]}_{''.join(str(i + 1) for i, e in enumerate(mu) for _ in range(e))}".rstrip("_") for k, mu in param]
        doc.matrices["first Spencer operator"] = _eqs(D1)
        doc.matrices["adjoint of the first Spencer operator"] = _eqs(D1.adjoint())
    doc.verdict = "ok"


def cmd_paramtest(ctx, doc):
    from .duality import double_duality_test

    D = ctx.D
    v = double_duality_test(D, cap=ctx.option("cap"))
    doc.verdict = v.verdict
    doc.matrices["system"] = _eqs(D)
    doc.matrices["step 3: CC(ad D)"] = _eqs(v.steps[3])
    doc.matrices["step 5: CC(D_-1)"] = _eqs(v.steps[5])
    if v.torsion_free:
        P = v.parametrization
        doc.summary.append(
            f"TORSION-FREE; parametrization: {P.nrows} equation{'s' if P.nrows != 1 else ''} "
            f"in {P.ncols} potential{'s' if P.ncols != 1 else ''}"
        )
        doc.matrices["parametrization"] = [f"{n} = {e}" for n, e in zip(D.col_names, P.equations())]
        doc.certificates["CC(D_-1) generates D"] = bool(v.certified)
        doc.certificates["D o D_-1 = 0"] = D.compose(P).is_zero()
    else:
        g = len(v.generators)
        doc.summary.append(f"TORSION; {g} torsion generator{'s' if g != 1 else ''}")
        _torsion_doc(v.generators, D, doc)


def _torsion_doc(gens, D, doc):
    doc.values["torsion generators"] = [
        {"element": t.fmt(), "annihilators": t.annihilator_strs()} for t in gens
    ]
    doc.certificates["annihilators verified by membership"] = all(all(c for c in t.certificates) for t in gens)
    doc.certificates["generators nonzero modulo D"] = all(t.verify(D) for t in gens)


def cmd_torsion(ctx, doc):
    from .duality import torsion_elements

    D = ctx.D
    gens = torsion_elements(D, cap=ctx.option("cap"))
    doc.summary.append(f"{len(gens)} torsion generator{'s' if len(gens) != 1 else ''}")
    doc.matrices["system"] = _eqs(D)
    _torsion_doc(gens, D, doc)
    doc.verdict = "torsion_free" if not gens else "has_torsion"


def _parse_matrix(text: str, what: str):
    from fractions import Fraction

    try:
        raw = json.loads(text)
        return [[Fraction(x) if not isinstance(x, float) else Fraction(str(x)) for x in row] for row in raw]
    except (ValueError, TypeError) as e:
        raise InputError(f"--{what}: expected a JSON matrix of rationals ({e})") from None


def _parse_subs(text: str | None) -> dict:
    from fractions import Fraction

    out = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise InputError(f"--subs: expected NAME=VALUE, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = Fraction(v.strip())
        except ValueError:
            raise InputError(f"--subs: {v!r} is not a rational number") from None
    return out


def cmd_kalman(ctx, doc):
    from .duality import adjoint_injectivity_test, kalman_test, specialize

    args = ctx.args
    AB = None
    if args.A is not None or args.B is not None:
        if args.A is None or args.B is None:
            raise InputError("--A and --B must be given together")
        AB = (_parse_matrix(args.A, "A"), _parse_matrix(args.B, "B"))
    elif ctx.builtin is not None and ctx.builtin.kalman is not None:
        AB = ctx.builtin.kalman
    if AB is not None:
        A, B = AB
        try:
            k = kalman_test(A, B)
        except ValueError as e:
            raise InputError(str(e)) from None
        doc.values["rank of (B, AB, ...)"] = k.rank
        doc.values["state dimension"] = k.m
        doc.values["rank test"] = "controllable" if k.rank_controllable else "not controllable"
        doc.values["duality test"] = "controllable" if k.duality_controllable else "not controllable"
        doc.certificates["rank and duality verdicts agree"] = k.agree
        doc.verdict = "controllable" if k.rank_controllable else "not_controllable"
        doc.summary.append("CONTROLLABLE" if k.rank_controllable else "NOT CONTROLLABLE")
        return
    D = ctx.D
    subs = _parse_subs(args.subs)
    if subs:
        D = specialize(D, subs)
        doc.values["specialization"] = {k: str(v) for k, v in subs.items()}
    r = adjoint_injectivity_test(D)
    doc.matrices["system"] = _eqs(D)
    doc.matrices["adjoint"] = _eqs(D.adjoint())
    if not r.injective:
        doc.verdict = "not_controllable"
        doc.summary.append("NOT CONTROLLABLE (adjoint not injective)")
        return
    ob = r.obstruction
    if not hasattr(ob, "is_constant") or ob.is_constant():
        doc.verdict = "controllable"
        doc.summary.append("CONTROLLABLE (adjoint injective)")
    else:
        doc.verdict = "generically_controllable"
        doc.summary.append(f"generically YES, obstruction = {ob}")
    doc.values["obstruction"] = str(ob)
    doc.values["assumed nonzero"] = [str(a) for a in r.assumed_nonzero]


def cmd_geometry(ctx, doc):
    from .geometry import (
        constant_curvature_check,
        einstein_operator,
        einstein_pairing,
        killing_operator,
        medolaghi,
    )
    from .jetspencer import JetSystem, involutivity_classes

    kind = ctx.args.kind
    if kind is None:
        raise InputError(f"geometry needs a kind: {', '.join(KINDS)} or einstein")
    if kind == "einstein":
        from .field import DiffField
        from .geometry import minkowski

        K = DiffField(["x1", "x2", "x3", "t"])
        w = minkowski(K)
        E = einstein_operator(w)
        P = einstein_pairing(w)
        doc.matrices["Einstein operator"] = _eqs(E)
        doc.certificates["self-adjoint under the raised pairing"] = E.adjoint().compose(P) == P.compose(E)
        C = compatibility_conditions(killing_operator(w))
        doc.values["CC of the Killing operator"] = C.nrows
        doc.verdict = "ok"
        return
    K, data, label = structure_data(kind, ctx.args.variant)
    D = medolaghi(kind, K, data)
    doc.summary.append(f"{kind}: {label}")
    doc.matrices["Medolaghi system"] = _eqs(D)
    rep = involutivity_classes(JetSystem.from_operator(D), seed=ctx.args.seed)
    doc.values["symbol classes"] = {f"class {k}": v for k, v in sorted(rep.beta.items(), reverse=True) if v}
    doc.values["coordinates"] = rep.coordinates
    doc.values["involutive"] = rep.cartan
    C = compatibility_conditions(D, cap=ctx.option("cap"))
    doc.values["compatibility conditions"] = C.nrows
    doc.matrices["compatibility conditions"] = _eqs(C)
    if kind == "riemann":
        rec = constant_curvature_check(data)
        doc.values["curvature constant"] = str(rec.constants.get("c")) if rec.constant else "not constant"
    doc.verdict = "ok"


def cmd_vessiot(ctx, doc):
    from .geometry import jacobi_check, vessiot_constants

    kind = ctx.args.kind
    if kind is None:
        raise InputError(f"vessiot needs a kind: {', '.join(KINDS)}")
    variants = [ctx.args.variant] if ctx.args.variant_given else range(n_variants(kind))
    out = []
    ok = True
    for v in variants:
        K, data, label = structure_data(kind, v)
        rec = vessiot_constants(kind, K, data)
        entry = {"data": label, "constant": rec.constant}
        if rec.constant:
            entry["constants"] = {(_cname(k)): str(c) for k, c in sorted(rec.constants.items(), key=lambda kv: str(kv[0]))}
            entry["jacobi"] = jacobi_check(rec, K.n)
            ok = ok and entry["jacobi"]
        else:
            entry["obstruction"] = [f"{_cname(k)}: {c}" for k, c in rec.obstruction]
        out.append(entry)
        doc.summary.append(f"{label}: " + (_text(entry.get("constants")) if rec.constant else "not constant"))
    doc.values["structures"] = out
    doc.certificates["Jacobi conditions hold"] = ok
    doc.verdict = "ok"


def _cname(k) -> str:
    if isinstance(k, tuple):
        t, a, b = k
        return f"c^{t + 1}_{a + 1}{b + 1}"
    return str(k)


def cmd_verify_param(ctx, doc):
    from .duality import verify_parametrization

    D = ctx.D
    cand = None
    if ctx.args.candidate:
        cdecl = _load_decl(ctx.args.candidate)
        cand = cdecl.operator()
        if cand.nrows != D.ncols:
            raise InputError("candidate must have one equation per unknown of the system")
        if cand.field.names != D.field.names:
            raise InputError("candidate and system must declare the same symbols")
    elif ctx.builtin is not None and ctx.builtin.candidate is not None:
        cand = ctx.builtin.candidate
    if cand is None:
        raise InputError("verify-param needs --candidate FILE or a builtin with a candidate")
    cap = ctx.option("inverse_cap", 2)
    r = verify_parametrization(D, cand, cap)
    doc.matrices["system"] = _eqs(D)
    doc.matrices["candidate"] = [f"{n} = {e}" for n, e in zip(D.col_names, cand.equations())]
    doc.certificates["(a) D o candidate = 0"] = r.composes_to_zero
    doc.certificates["(b) CC(candidate) generates D"] = r.generates_cc
    if r.left_inverse is not None:
        doc.matrices["left inverse"] = [f"{n} = {e}" for n, e in zip(cand.col_names, r.left_inverse.equations())]
        doc.values["left inverse"] = "found"
    else:
        doc.values["left inverse"] = f"none found up to order {cap}"
    doc.verdict = "parametrization" if r.ok else "not_a_parametrization"
    doc.summary.append(("VERIFIED" if r.ok else "NOT VERIFIED") + ("; injective" if r.left_inverse is not None else ""))


HANDLERS = {
    "cc": cmd_cc,
    "adjoint": cmd_adjoint,
    "involutive": cmd_involutive,
    "dims": cmd_dims,
    "spencer": cmd_spencer,
    "paramtest": cmd_paramtest,
    "torsion": cmd_torsion,
    "kalman": cmd_kalman,
    "geometry": cmd_geometry,
    "vessiot": cmd_vessiot,
    "verify-param": cmd_verify_param,
}


def _load_decl(path: str) -> SystemDecl:
    try:
        if path == "-":
            src = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                src = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return parse(src)


def run(command: str, decl: SystemDecl | None = None, builtin=None, args=None) -> OutputDocument:
    if command not in HANDLERS:
        raise InputError(f"unknown command {command!r}")
    if args is None:
        args = build_parser().parse_args([command])
    ctx = Context(decl, builtin, args)
    doc = OutputDocument(command, ctx.name or getattr(args, "kind", None), args.seed)
    t0 = time.perf_counter()
    HANDLERS[command](ctx, doc)
    if args.timing:
        doc.timing = {"total": round(time.perf_counter() - t0, 3)}
    doc.values = _jsonable(doc.values)
    return doc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="difmod", description="Linear systems of PDEs: compatibility conditions, duality, geometry.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("target", nargs="*", help="system file ('-' for stdin); for geometry/vessiot: KIND")
    p.add_argument("--builtin", help="named example system (" + ", ".join(sorted(bi.BUILTINS)) + ")")
    p.add_argument("--json", action="store_true", help="JSON output (schema 1)")
    p.add_argument("--seed", type=int, default=0, help="seed for generic-point sampling")
    p.add_argument("--cap", type=int, default=None, help="order cap for completions")
    p.add_argument("--prolong", type=int, default=None, help="prolongations before dims/spencer")
    p.add_argument("--levels", type=int, default=None, help="symbol levels for spencer")
    p.add_argument("--no-operator", action="store_true", help="spencer: skip the first Spencer operator")
    p.add_argument("--variant", type=int, default=None, help="geometry/vessiot: displayed data choice")
    p.add_argument("--candidate", help="verify-param: file with the candidate parametrization")
    p.add_argument("--inverse-cap", dest="inverse_cap", type=int, default=None, help="verify-param: left inverse order cap")
    p.add_argument("--A", dest="A", help="kalman: state matrix as JSON")
    p.add_argument("--B", dest="B", help="kalman: input matrix as JSON")
    p.add_argument("--subs", help="kalman: NAME=VALUE,... specialization of constants")
    p.add_argument("--timing", action="store_true", help="include wall-clock timing")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    args.kind = None
    args.variant_given = args.variant is not None
    if args.variant is None:
        args.variant = 0
    try:
        decl = None
        builtin = None
        targets = list(args.target)
        if args.command in ("geometry", "vessiot"):
            if targets:
                args.kind = targets.pop(0)
            if args.kind is not None and args.kind not in KINDS + ("einstein",):
                raise InputError(f"unknown kind {args.kind!r}")
        if len(targets) > 1:
            raise InputError("at most one system file")
        if args.builtin:
            try:
                builtin = bi.get_builtin(args.builtin)
            except KeyError as e:
                raise InputError(str(e.args[0])) from None
        elif targets:
            decl = _load_decl(targets[0])
        doc = run(args.command, decl, builtin, args)
    except (InputError, DSLError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (CompletionError, PoleError, TruncationError, RuntimeError) as e:
        print(f"computation failed: {e}", file=sys.stderr)
        return 1
    sys.stdout.write(render(doc, "json" if args.json else "text"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
