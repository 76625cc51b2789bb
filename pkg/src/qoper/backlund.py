"""Backlund transformations and the full QQ-system over the Weyl group.

A single step at node i swaps Q+_i with (the monic rescaling of) Q-_i,
reflects the twist by s_i, recomputes Q-_i for the new system, and leaves
every other Q+_j untouched.  Iterating steps along reduced words populates
the table {Q+^{w,i}} indexed by Weyl group elements; two reduced words of
the same element must produce the same table entry, which is the
computable face of the consistency of the full system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .cartan import (CartanData, TwistZ, WeylWord, canonical_form,
                     enumerate_weyl, reflect_twist)
from .polynomials import TAU, Poly, q_distinct
from .qq import (CheckReport, DegenerateInstance, FullQQSystem, QQInstance,
                 QQSolution, resonance_check, solve_q_minus)


@dataclass
class BacklundStepRecord:
    node: int
    twist_before: TwistZ
    twist_after: TwistZ
    swapped_in: Poly
    qminus_new: Poly
    nondeg: CheckReport


def mu_gauge(sol: QQSolution, cartan: CartanData, i: int, z: complex,
             tol: float = TAU) -> complex:
    """Gauge parameter mu_i(z) = prod_{j!=i} Q+_j(z)^{-a_ji} / (Q+_i Q-_i)(z)."""
    qp = sol.qplus[i - 1]
    qm = sol.qminus[i - 1]
    vp, vm = complex(qp(z)), complex(qm(z))
    if abs(vp) <= tol * (1 + qp.norm()):
        raise ZeroDivisionError(f"Q+_{i} vanishes at z = {z}")
    if abs(vm) <= tol * (1 + qm.norm()):
        raise ZeroDivisionError(f"Q-_{i} vanishes at z = {z}")
    num = 1.0 + 0.0j
    for j in range(1, len(sol.qplus) + 1):
        if j == i:
            continue
        e = -cartan.a(j, i)
        if e:
            num *= complex(sol.qplus[j - 1](z)) ** e
    return num / (vp * vm)


def _step_nondegeneracy(inst: QQInstance, sol: QQSolution, i: int,
                        K: Optional[int] = None) -> CheckReport:
    """Preconditions for swapping at node i.

    The roots of Q-_i must be q-distinct from those of Lambda_k whenever
    a_ik != 0 and from those of Q+_j for adjacent j != i, and the reflected
    twist must remain non-resonant so the new Q- solve stays unique.
    """
    if K is None:
        K = inst.default_window()
    rep = CheckReport(f"backlund-step node {i}", True)
    qm = sol.qminus[i - 1]
    if qm.is_zero():
        rep.add("Q- nonzero", False)
        return rep
    a = inst.cartan.a
    for k in range(1, inst.rank + 1):
        if a(i, k) == 0:
            continue
        lam = inst.lambdas[k - 1]
        if qm.degree >= 1 and lam.degree >= 1:
            ok, w = q_distinct(qm.to_float(), lam.to_float(), inst.q, K, inst.tau)
            rep.add(f"Q-_{i} vs Lambda_{k}", ok, witness=w)
    for j in range(1, inst.rank + 1):
        if j == i or a(j, i) == 0:
            continue
        qp = sol.qplus[j - 1]
        if qm.degree >= 1 and qp.degree >= 1:
            ok, w = q_distinct(qm.to_float(), qp.to_float(), inst.q, K, inst.tau)
            rep.add(f"Q-_{i} vs Q+_{j}", ok, witness=w)
    reflected = inst.with_twist(reflect_twist(inst.twist, i, inst.cartan))
    res = resonance_check(reflected, K)
    rep.add("reflected twist non-resonant", res.passed,
            witness=[it for it in res.items if not it["pass"]])
    return rep


def backlund_step(inst: QQInstance, sol: QQSolution, i: int,
                  K: Optional[int] = None):
    """One Backlund transformation at node i.

    Returns (new_instance, new_solution, record).  Refuses (raises
    DegenerateInstance) when the step's nondegeneracy conditions fail;
    the record carries the failed report in that case via the exception.
    """
    rep = _step_nondegeneracy(inst, sol, i, K)
    if not rep.passed:
        exc = DegenerateInstance(f"backlund step at node {i} refused")
        exc.report = rep
        raise exc
    new_twist = reflect_twist(inst.twist, i, inst.cartan)
    new_inst = inst.with_twist(new_twist)
    qplus = list(sol.qplus)
    swapped = sol.qminus[i - 1].monic()
    qplus[i - 1] = swapped
    new_degrees = tuple(p.degree for p in qplus)
    work_inst = QQInstance(new_inst.cartan, new_inst.q, new_inst.twist,
                           new_inst.lambdas, new_degrees, new_inst.tau)
    qminus = list(sol.qminus)
    for j in range(1, inst.rank + 1):
        # the twist changed, so every Q- is re-solved against the new system
        qminus[j - 1] = solve_q_minus(work_inst, qplus, j)
    new_sol = QQSolution(tuple(qplus), tuple(qminus))
    record = BacklundStepRecord(i, inst.twist, new_twist, swapped,
                                qminus[i - 1], rep)
    return work_inst, new_sol, record


def apply_word(inst: QQInstance, sol: QQSolution, word: WeylWord,
               K: Optional[int] = None):
    """Iterate backlund_step along a word, rightmost letter first.

    The result corresponds to the element the word spells; records of the
    individual steps are returned in application order.
    """
    records = []
    cur_inst, cur_sol = inst, sol
    for letter in reversed(word.letters):
        cur_inst, cur_sol, rec = backlund_step(cur_inst, cur_sol, letter, K)
        records.append(rec)
    return cur_inst, cur_sol, records


def full_qq_system(inst: QQInstance, sol: QQSolution,
                   max_order: int = 10_080,
                   K: Optional[int] = None) -> FullQQSystem:
    """Breadth-first exploration of the Weyl group by Backlund steps.

    Every element gets its (monic) Q+ family and twist; a refusal on an
    edge is recorded and the affected element is skipped, leaving a partial
    table with ``generic = False`` instead of raising.
    """
    cartan = inst.cartan
    words = enumerate_weyl(cartan, max_order)
    out = FullQQSystem(base=sol)
    id_key = canonical_form(WeylWord.identity(), cartan)
    out.table[id_key] = tuple(sol.qplus)
    out.twists[id_key] = inst.twist
    out.words[id_key] = WeylWord.identity()
    state = {id_key: (inst, sol)}

    for word in sorted(words, key=lambda w: (len(w), w.letters)):
        if len(word) == 0:
            continue
        key = canonical_form(word, cartan)
        if key in out.table:
            continue
        # walk up from the element obtained by dropping the leftmost letter
        parent = WeylWord(word.letters[1:])
        pkey = canonical_form(parent, cartan)
        if pkey not in state:
            out.refusals.append({"word": word.letters, "reason": "parent missing"})
            out.generic = False
            continue
        pinst, psol = state[pkey]
        letter = word.letters[0]
        try:
            ninst, nsol, _ = backlund_step(pinst, psol, letter, K)
        except DegenerateInstance as exc:
            out.refusals.append({"word": word.letters, "node": letter,
                                 "reason": str(exc)})
            out.generic = False
            continue
        state[key] = (ninst, nsol)
        out.table[key] = tuple(nsol.qplus)
        out.twists[key] = ninst.twist
        out.words[key] = word
    return out
