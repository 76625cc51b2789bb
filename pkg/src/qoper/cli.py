"""Batch front door: instance files in, machine-readable reports out.

Subcommands: solve, verify, backlund, wronskian, identities.  Instance
files are strict JSON (unknown keys rejected); complex scalars are
serialized as [re, im] pairs and polynomials lowest degree first.  Reports
are reproducible: the digest hashes the canonical JSON without timings.

Exit codes: 0 all checks pass; 1 checks ran with failures; 2 input error;
3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

import numpy as np

from .cartan import TwistZ, WeylWord, cartan_matrix, enumerate_weyl
from .polynomials import Poly, RatFun
from .qq import (DegenerateInstance, QQInstance, QQSolution, bethe_residual,
                 nondegenerate, qq_residual, resonance_check, solve_bethe)
from .backlund import backlund_step, full_qq_system
from .wronskian import (RatMatrix, build_wronskian,
                        check_fundamental_relation, check_lewis_carroll,
                        check_shifted_minor_relation,
                        check_wronskian_equations, miura_from_wronskian,
                        miura_plucker_blocks, miura_trivializer)

SCHEMA_VERSION = 1

_INSTANCE_KEYS = {"version", "lie_type", "rank", "ordering", "q", "zetas",
                  "lambdas", "degrees", "tolerances", "seed", "solution"}
_TOL_KEYS = {"tau", "bethe_tol", "K"}
_LAMBDA_KEYS_C = {"coeffs"}
_LAMBDA_KEYS_R = {"roots", "leading"}
_SOLUTION_KEYS = {"qplus", "qminus"}


class InputError(ValueError):
    pass


def _parse_scalar(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(float(Fraction(v)))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{where}: cannot parse scalar {v!r}")
    if isinstance(v, list) and len(v) == 2 and all(
            isinstance(c, (int, float)) for c in v):
        return complex(v[0], v[1])
    raise InputError(f"{where}: expected number, [re, im], or decimal string")


def _emit_scalar(c: complex) -> list:
    return [float(c.real), float(c.imag)]


def _parse_poly(obj, where: str) -> Poly:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: polynomial must be an object")
    keys = set(obj)
    if keys == _LAMBDA_KEYS_C:
        return Poly([_parse_scalar(c, where) for c in obj["coeffs"]])
    if keys == _LAMBDA_KEYS_R:
        roots = [_parse_scalar(c, where) for c in obj["roots"]]
        lead = _parse_scalar(obj["leading"], where)
        return Poly.from_roots(roots, lead)
    raise InputError(f"{where}: expected keys {{coeffs}} or {{roots, leading}},"
                     f" got {sorted(keys)}")


def parse_instance(doc: dict):
    """Strict-schema parse of an instance file into (QQInstance, extras)."""
    if not isinstance(doc, dict):
        raise InputError("instance file must hold a JSON object")
    unknown = set(doc) - _INSTANCE_KEYS
    if unknown:
        raise InputError(f"unknown keys in instance file: {sorted(unknown)}")
    if doc.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise InputError(f"unsupported schema version {doc.get('version')}")
    for key in ("lie_type", "rank", "q", "zetas", "lambdas", "degrees"):
        if key not in doc:
            raise InputError(f"missing required key {key!r}")

    cartan = cartan_matrix(doc["lie_type"], int(doc["rank"]))
    if "ordering" in doc:
        cartan = cartan.with_ordering([int(x) for x in doc["ordering"]])
    q = _parse_scalar(doc["q"], "q")
    zetas = TwistZ(tuple(_parse_scalar(z, "zetas") for z in doc["zetas"]))
    lambdas = tuple(_parse_poly(l, f"lambdas[{k}]")
                    for k, l in enumerate(doc["lambdas"]))
    degrees = tuple(int(m) for m in doc["degrees"])

    tols = doc.get("tolerances", {})
    if set(tols) - _TOL_KEYS:
        raise InputError(f"unknown tolerance keys: {sorted(set(tols) - _TOL_KEYS)}")
    tau = float(tols.get("tau", 1e-10))
    bethe_tol = float(tols.get("bethe_tol", 1e-10))
    K = int(tols["K"]) if "K" in tols else None

    inst = QQInstance(cartan, q, zetas, lambdas, degrees, tau)

    solution = None
    if "solution" in doc:
        sdoc = doc["solution"]
        if set(sdoc) - _SOLUTION_KEYS:
            raise InputError(
                f"unknown solution keys: {sorted(set(sdoc) - _SOLUTION_KEYS)}")
        qplus = tuple(Poly([_parse_scalar(c, "solution.qplus") for c in p])
                      for p in sdoc["qplus"])
        qminus = tuple(Poly([_parse_scalar(c, "solution.qminus") for c in p])
                       for p in sdoc["qminus"])
        solution = QQSolution(qplus, qminus)

    extras = {"bethe_tol": bethe_tol, "K": K, "seed": int(doc.get("seed", 0))}
    return inst, solution, extras


def echo_instance(inst: QQInstance, extras: dict, solution=None) -> dict:
    doc = {
        "version": SCHEMA_VERSION,
        "lie_type": inst.cartan.lie_type,
        "rank": inst.cartan.rank,
        "ordering": list(inst.cartan.ordering),
        "q": _emit_scalar(complex(inst.q)),
        "zetas": [_emit_scalar(complex(z)) for z in inst.twist.zetas],
        "lambdas": [{"coeffs": [_emit_scalar(complex(c)) for c in l.coeffs]}
                    for l in inst.lambdas],
        "degrees": list(inst.degrees),
        "tolerances": {"tau": inst.tau, "bethe_tol": extras["bethe_tol"],
                       **({"K": extras["K"]} if extras["K"] else {})},
        "seed": extras["seed"],
    }
    if solution is not None:
        doc["solution"] = {
            "qplus": [[_emit_scalar(complex(c)) for c in p.coeffs]
                      for p in solution.qplus],
            "qminus": [[_emit_scalar(complex(c)) for c in p.coeffs]
                       for p in solution.qminus],
        }
    return doc


# -- report assembly ----------------------------------------------------

class Report:
    def __init__(self, command: str, instance_echo: dict):
        self.doc = {"version": SCHEMA_VERSION, "command": command,
                    "instance": instance_echo, "checks": [],
                    "solutions": [], "full_qq": None}
        self.t0 = time.time()
        self.failed = False

    def check(self, name, sup_residual, ok, k_or_word="", i="", witnesses=None):
        val = float(sup_residual)
        if val != val or val in (float("inf"), float("-inf")):
            val = 1e300  # keep every numeric field finite and JSON-portable
        self.doc["checks"].append({
            "check": name, "k_or_word": str(k_or_word), "i": str(i),
            "sup_residual": val, "pass": bool(ok),
            "witnesses": witnesses or []})
        if not ok:
            self.failed = True

    def skip(self, name, reason):
        self.doc["checks"].append({
            "check": name, "k_or_word": "", "i": "", "sup_residual": 0.0,
            "pass": True, "witnesses": [f"skipped: {reason}"]})

    def finish(self) -> dict:
        body = dict(self.doc)
        digest = hashlib.sha256(
            json.dumps(body, sort_keys=True).encode()).hexdigest()
        body["digest"] = digest
        body["timings"] = {"seconds": round(time.time() - self.t0, 6)}
        return body


def _emit(report_doc: dict, fmt: str, out):
    if fmt == "json":
        out.write(json.dumps(report_doc, sort_keys=True, indent=1) + "\n")
    else:
        out.write("check,k_or_word,i,sup_residual,pass\n")
        for c in report_doc["checks"]:
            out.write(f"{c['check']},{c['k_or_word']},{c['i']},"
                      f"{c['sup_residual']:.3e},{int(c['pass'])}\n")


def _solution_entry(inst, sol, bethe_tol):
    resid = qq_residual(inst, sol)
    qqres = max(r.norm() for r in resid)
    try:
        br = bethe_residual(inst, sol.qplus)
        bres = max((abs(b[2]) for b in br), default=0.0)
        roots = [_emit_scalar(b[1]) for b in br]
    except DegenerateInstance as exc:
        bres = float("inf")
        roots = [str(exc)]
    nd = nondegenerate(inst, sol)
    return {
        "qplus": [[_emit_scalar(complex(c)) for c in p.coeffs] for p in sol.qplus],
        "qminus": [[_emit_scalar(complex(c)) for c in p.coeffs] for p in sol.qminus],
        "bethe_roots": roots,
        "max_qq_residual": float(qqres),
        "max_bethe_residual": float(bres),
        "nondegenerate": nd.passed,
    }, qqres, bres


def run_solve(inst, extras, args, rep: Report):
    res = resonance_check(inst, extras["K"])
    rep.check("resonance", 0.0, res.passed,
              witnesses=[it["label"] for it in res.items if not it["pass"]])
    sols = solve_bethe(inst, seeds=args.seeds, tol=args.tol, seed=args.seed)
    scale = 1 + max(l.norm() for l in inst.lambdas)
    for sol in sols:
        entry, qqres, bres = _solution_entry(inst, sol, args.tol)
        rep.doc["solutions"].append(entry)
        rep.check("qq-residual", qqres, qqres <= 10 * args.tol * scale)
        rep.check("bethe-residual", bres, bres <= args.tol * 10)
    if not sols:
        rep.check("solver", 0.0, True,
                  witnesses=["no seed converged; empty solution set"])


def run_verify(inst, sol, extras, args, rep: Report):
    if sol is None:
        raise InputError("verify requires a solution block in the instance file")
    entry, qqres, bres = _solution_entry(inst, sol, args.tol)
    rep.doc["solutions"].append(entry)
    scale = 1 + max(l.norm() for l in inst.lambdas)
    rep.check("qq-residual", qqres, qqres <= 1e-8 * scale)
    rep.check("bethe-residual", bres, bres <= 1e-8 * scale)
    nd = nondegenerate(inst, sol, extras["K"])
    rep.check("nondegenerate", 0.0, nd.passed,
              witnesses=[it["label"] for it in nd.items if not it["pass"]])
    fq = full_qq_system(inst, sol)
    rep.doc["full_qq"] = {"size": len(fq.table), "generic": fq.generic,
                          "refusals": [str(r) for r in fq.refusals]}
    if not inst.cartan.is_type_a:
        rep.skip("wronskian-suite", "type A only")
        return
    run_wronskian_suite(inst, sol, rep)


def run_wronskian_suite(inst, sol, rep: Report):
    try:
        W = build_wronskian(inst, sol)
    except DegenerateInstance as exc:
        rep.check("wronskian-build", float("inf"), False, witnesses=[str(exc)])
        return
    panel = 1.13 * np.exp(2j * np.pi * np.linspace(0.05, 0.95, 20))
    dres = max(abs(np.linalg.det(W.eval(x)) - 1.0) for x in panel)
    rep.check("wronskian-det", dres, dres <= 1e-8)
    weq = check_wronskian_equations(W, inst)
    for it in weq.items:
        k, i = it["label"].split()
        rep.check("wronskian-equation", it["value"], it["pass"],
                  k_or_word=k.split("=")[1], i=i.split("=")[1])
    for i in range(1, inst.rank + 1):
        for w in enumerate_weyl(inst.cartan):
            r = check_shifted_minor_relation(W, inst, w, i)
            rep.check("shifted-minor", r, r <= 1e-8,
                      k_or_word=".".join(map(str, w.letters)) or "e", i=i)
    wid = WeylWord.identity()
    for i in range(1, inst.rank + 1):
        try:
            resid = check_fundamental_relation(W, wid, wid, i, inst.cartan)
            val = max(abs(complex(resid(x))) for x in panel[:5])
            rep.check("fundamental-relation", val, val <= 1e-8, i=i)
        except ValueError as exc:
            rep.skip(f"fundamental-relation i={i}", str(exc))
    try:
        A, mrep = miura_from_wronskian(W, inst, sol)
        for it in mrep.items:
            rep.check(f"miura: {it['label']}", it["value"] or 0.0, it["pass"])
        v = miura_trivializer(inst, sol)
        for i in range(1, inst.rank + 1):
            pb = miura_plucker_blocks(A, v, inst, i)
            rep.check("miura-plucker-block", pb.items[0]["value"],
                      pb.passed, i=i)
    except DegenerateInstance as exc:
        rep.check("miura-reconstruction", float("inf"), False,
                  witnesses=[str(exc)])


def run_backlund(inst, sol, extras, args, rep: Report):
    if sol is None:
        raise InputError("backlund requires a solution block in the instance file")
    letters = [int(x) for x in args.word.split(",") if x.strip()]
    for l in letters:
        if not 1 <= l <= inst.rank:
            raise InputError(f"word letter {l} out of range 1..{inst.rank}")
    word = WeylWord(tuple(letters))
    cur_inst, cur_sol = inst, sol
    for step_no, letter in enumerate(reversed(word.letters)):
        try:
            cur_inst, cur_sol, rec = backlund_step(cur_inst, cur_sol, letter)
        except DegenerateInstance as exc:
            rep.check("backlund-step", float("inf"), False,
                      k_or_word=str(letter), witnesses=[str(exc)])
            return
        resid = max(r.norm() for r in qq_residual(cur_inst, cur_sol))
        rep.check("backlund-step", resid, resid <= 1e-8,
                  k_or_word=str(letter))
        rep.doc["solutions"].append({
            "step": step_no + 1, "node": letter,
            "zetas": [_emit_scalar(complex(z)) for z in cur_inst.twist.zetas],
            "qplus": [[_emit_scalar(complex(c)) for c in p.coeffs]
                      for p in cur_sol.qplus],
            "qminus": [[_emit_scalar(complex(c)) for c in p.coeffs]
                       for p in cur_sol.qminus]})
    # involution verdict when the word is its own inverse
    if letters and letters == letters[::-1] and len(letters) % 2 == 0:
        dz = max(abs(complex(a) - complex(b))
                 for a, b in zip(cur_inst.twist.zetas, inst.twist.zetas))
        dq = 0.0
        for p1, p2 in zip(cur_sol.qplus, sol.qplus):
            dq = max(dq, max(abs(complex(a) - complex(b))
                             for a, b in zip(p1.coeffs, p2.coeffs)))
        rep.check("involution", max(dz, dq), max(dz, dq) <= 1e-9,
                  k_or_word=args.word.replace(",", "."))
    if args.full_table:
        fq = full_qq_system(inst, sol)
        rep.doc["full_qq"] = {"size": len(fq.table), "generic": fq.generic,
                              "refusals": [str(r) for r in fq.refusals]}
        rep.check("full-qq-generic", 0.0, fq.generic)


def run_identities(args, rep: Report):
    """Universal determinant identity battery on random matrices."""
    rng = np.random.default_rng(args.seed)
    worst_lc = 0.0
    exact_ok = True
    for trial in range(args.trials):
        n = 4
        if args.exact:
            M = RatMatrix([[RatFun(Poly([int(rng.integers(-5, 6))
                                         for _ in range(3)]))
                            for _ in range(n)] for _ in range(n)])
        else:
            M = RatMatrix([[RatFun(Poly(rng.standard_normal(3)
                                        + 1j * rng.standard_normal(3)))
                            for _ in range(n)] for _ in range(n)])
        for i in range(2, n + 1):
            resid = check_lewis_carroll(M, i)
            if args.exact:
                exact_ok = exact_ok and resid.num.is_zero()
            else:
                val = max(abs(complex(resid(x)))
                          for x in (0.37 + 0.21j, -1.3 + 0.7j))
                worst_lc = max(worst_lc, val)
    if args.exact:
        rep.check("lewis-carroll (exact)", 0.0, exact_ok)
    else:
        rep.check("lewis-carroll", worst_lc, worst_lc <= 1e-10)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qoper", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_instance=True):
        if needs_instance:
            p.add_argument("--instance", required=True)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--seeds", type=int, default=40)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--exact", action="store_true",
                       help="exact-rational mode (identity batteries)")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")

    common(sub.add_parser("solve", help="find Bethe/QQ solutions"))
    common(sub.add_parser("verify", help="verify a provided solution"))
    pb = sub.add_parser("backlund", help="apply Backlund steps along a word")
    common(pb)
    pb.add_argument("--word", required=True)
    pb.add_argument("--full-table", action="store_true")
    common(sub.add_parser("wronskian", help="build the Wronskian and run checks"))
    pi = sub.add_parser("identities", help="determinant identity battery")
    common(pi, needs_instance=False)
    pi.add_argument("--trials", type=int, default=20)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "identities":
            if args.seed is None:
                args.seed = 0
            rep = Report("identities", {})
            run_identities(args, rep)
        else:
            with open(args.instance) as fh:
                try:
                    doc = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise InputError(f"malformed JSON: {exc}")
            inst, sol, extras = parse_instance(doc)
            if args.seed is None:
                args.seed = extras["seed"]
            rep = Report(args.command, echo_instance(inst, extras, sol))
            if args.command == "solve":
                run_solve(inst, extras, args, rep)
            elif args.command == "verify":
                run_verify(inst, sol, extras, args, rep)
            elif args.command == "backlund":
                run_backlund(inst, sol, extras, args, rep)
            elif args.command == "wronskian":
                if sol is None:
                    raise InputError(
                        "wronskian requires a solution block in the instance file")
                if not inst.cartan.is_type_a:
                    raise InputError("wronskian requires a type A instance")
                run_wronskian_suite(inst, sol, rep)
    except (InputError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return 3

    body = rep.finish()
    if args.out:
        with open(args.out, "w") as fh:
            _emit(body, args.format, fh)
    else:
        _emit(body, args.format, sys.stdout)
    return 1 if rep.failed else 0


if __name__ == "__main__":
    sys.exit(main())
