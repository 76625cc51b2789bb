import numpy as np
import pytest

from qoper import (DegenerateInstance, MinorSpec, QQInstance, QQSolution,
                   RatMatrix, TwistZ, WeylWord, build_miura_A,
                   build_wronskian, cartan_matrix,
                   check_fundamental_relation, check_lewis_carroll,
                   check_shifted_minor_relation, check_wronskian_equations,
                   d_exponents, enumerate_weyl, full_qq_system,
                   fundamental_relation_residual, gauss_decompose,
                   generalized_minor, miura_from_wronskian,
                   miura_plucker_blocks, miura_trivializer, s_lambda_inverse,
                   solve_bethe, weyl_twist)
from qoper.polynomials import Poly, RatFun

PANEL = [0.77 + 0.31j, -1.1 + 0.6j, 2.2 - 0.3j, 0.4 + 1.3j, -0.6 - 0.9j]


def a1_solved(q=1.0 / 3.0, zeta=2.0):
    cd = cartan_matrix("A", 1)
    inst = QQInstance(cd, q, TwistZ((zeta,)), (Poly([-1.0, 1.0]),), (1,))
    sol = solve_bethe(inst, seeds=10, seed=1)[0]
    return inst, sol


def a2_solved(q=0.2, zetas=(2.0, 3.0)):
    cd = cartan_matrix("A", 2)
    inst = QQInstance(cd, q, TwistZ(zetas),
                      (Poly([-1.0, 1.0]), Poly([-2.0, 1.0])), (1, 1))
    sol = solve_bethe(inst, seeds=40, tol=1e-11, seed=3)[0]
    return inst, sol


def random_unimodular(n, rng, exact=False):
    """Product of unit-triangular polynomial matrices: det = 1."""
    def poly():
        if exact:
            return RatFun(Poly([int(rng.integers(-3, 4)) for _ in range(2)]))
        return RatFun(Poly(rng.standard_normal(2) + 1j * rng.standard_normal(2)))

    def unit(lowside):
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                if i == j:
                    row.append(RatFun.one())
                elif (i > j) == lowside and abs(i - j) == 1:
                    row.append(poly())
                else:
                    row.append(RatFun.zero())
            rows.append(row)
        return RatMatrix(rows)

    return unit(True) @ unit(False) @ unit(True)


class TestLiftExponents:
    def test_diagonal_ones(self):
        for t, r in (("A", 3), ("B", 3), ("G", 2)):
            exps = d_exponents(cartan_matrix(t, r))
            assert all(exps.d[l][l] == 1 for l in range(r))

    def test_a3_standard_mirror(self):
        # ascending composition: position l carries sum_{j >= l} coroots
        exps = d_exponents(cartan_matrix("A", 3))
        want = ((1, 1, 1), (0, 1, 1), (0, 0, 1))
        assert exps.d == want

    def test_a2_reversed_matches_paper_table(self):
        # reading the ordering backwards produces the lower-triangular
        # all-ones table quoted for the standard reading elsewhere
        cd = cartan_matrix("A", 2).with_ordering((2, 1))
        exps = d_exponents(cd)
        # position 0 = node 2: d = coroot_2 + coroot_1; position 1 = node 1
        assert exps.d == ((1, 1), (0, 1))


class TestSLambdaInverse:
    def test_sl2_matrix(self):
        inst, _ = a1_solved()
        R = s_lambda_inverse(inst)
        lam = inst.lambdas[0]
        for x in PANEL:
            m = R.eval(x)
            want = np.array([[0, 1 / complex(lam(x))],
                             [-complex(lam(x)), 0]])
            assert np.abs(m - want).max() < 1e-12 * (1 + np.abs(want).max())

    def test_sl3_unit_lambda_cyclic(self):
        # Lambda == 1 is outside the instance contract, so emulate by
        # evaluating at a root-free point and checking the cyclic pattern
        inst, _ = a2_solved()
        R = s_lambda_inverse(inst)
        m = R.eval(0.77 + 0.31j)
        # single nonzero entry per column, cycling 1 -> 2 -> 3 -> 1
        for j, want_i in ((0, 1), (1, 2), (2, 0)):
            col = m[:, j]
            nz = np.nonzero(np.abs(col) > 1e-12)[0]
            assert list(nz) == [want_i]

    def test_internal_consistency_runs(self):
        # the (a) == (b) assertion is built in; reversed ordering too
        inst, sol = a2_solved()
        s_lambda_inverse(inst)
        flipped = QQInstance(inst.cartan.with_ordering((2, 1)), inst.q,
                             inst.twist, inst.lambdas, inst.degrees)
        s_lambda_inverse(flipped)


class TestBuildWronskian:
    def test_sl2_matrix_entries(self):
        # [[Q+, -zeta Lam^-1 Q+(qz)], [Q-, -zeta^-1 Lam^-1 Q-(qz)]]:
        # the displayed classical matrix up to the documented sign and
        # twist-inversion conventions
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        z, q = 2.0, complex(inst.q)
        lam, qp, qm = inst.lambdas[0], sol.qplus[0], sol.qminus[0]
        for x in PANEL:
            lv = complex(lam(x))
            want = np.array([
                [complex(qp(x)), -z * complex(qp(q * x)) / lv],
                [complex(qm(x)), -(1 / z) * complex(qm(q * x)) / lv]])
            assert np.abs(W.eval(x) - want).max() < 1e-9 * (1 + np.abs(want).max())

    def test_sl2_nonsolution_det(self):
        # Q+ = Q- = 1 is not a solution: det = Lam^-1 (zeta - zeta^-1)
        cd = cartan_matrix("A", 1)
        inst = QQInstance(cd, 1.0 / 3.0, TwistZ((2.0,)), (Poly([-1.0, 1.0]),), (0,))
        sol = QQSolution((Poly.one(),), (Poly.one(),))
        W = build_wronskian(inst, sol)
        for x in PANEL:
            want = (2.0 - 0.5) / complex(inst.lambdas[0](x))
            assert abs(np.linalg.det(W.eval(x)) - want) < 1e-10 * (1 + abs(want))

    def test_sl2_solved_det_is_one(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        for x in PANEL:
            assert abs(np.linalg.det(W.eval(x)) - 1.0) <= 1e-9

    def test_sl3_solved_det_is_one(self):
        inst, sol = a2_solved()
        W = build_wronskian(inst, sol)
        for x in PANEL:
            assert abs(np.linalg.det(W.eval(x)) - 1.0) <= 1e-9

    def test_accepts_full_qq_table(self):
        inst, sol = a2_solved()
        fq = full_qq_system(inst, sol)
        W = build_wronskian(inst, fq)
        assert abs(np.linalg.det(W.eval(0.3 + 0.2j)) - 1.0) <= 1e-9


class TestGeneralizedMinor:
    def test_identity_matrix(self):
        cd = cartan_matrix("A", 2)
        M = RatMatrix.identity(3)
        e = WeylWord.identity()
        for i in (1, 2):
            assert abs(complex(generalized_minor(M, MinorSpec(e, e, i), cd)(0.5)) - 1) < 1e-14

    def test_sl2_wronskian_entries(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        e = WeylWord.identity()
        s1 = WeylWord((1,))
        top = generalized_minor(W, MinorSpec(e, e, 1), inst.cartan)
        bot = generalized_minor(W, MinorSpec(s1, e, 1), inst.cartan)
        for x in PANEL:
            assert abs(complex(top(x)) - complex(sol.qplus[0](x))) < 1e-9
            assert abs(complex(bot(x)) - complex(sol.qminus[0](x))) < 1e-9

    def test_minor_dictionary_shifted(self):
        # Delta_{u om_i, om_i}(W(z)) with u = w^{-1} is proportional to the
        # Backlund table entry for w evaluated at q^{i-1} z (the minor-side
        # action is inverse to the word composition of the steps); for
        # i = 1 the proportionality constant is 1 on minimal-length rows
        from qoper.cartan import word_inverse
        inst, sol = a2_solved()
        fq = full_qq_system(inst, sol)
        W = build_wronskian(inst, sol)
        qc = complex(inst.q)
        e = WeylWord.identity()
        for w in enumerate_weyl(inst.cartan):
            for i in (1, 2):
                entry = fq.entry(w, inst.cartan)
                assert entry is not None
                table_poly = entry[i - 1]
                minor = generalized_minor(
                    W, MinorSpec(word_inverse(w), e, i), inst.cartan)
                vals = []
                for x in PANEL:
                    tv = complex(table_poly(qc ** (i - 1) * x))
                    mv = complex(minor(x))
                    vals.append(mv / tv)
                spread = max(abs(v - vals[0]) for v in vals)
                assert spread <= 1e-7 * (1 + abs(vals[0])), (w.letters, i)
                if i == 1 and len(w) == 0:
                    assert abs(vals[0] - 1.0) < 1e-9


class TestWronskianEquations:
    def test_sl2(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        rep = check_wronskian_equations(W, inst)
        assert rep.passed
        labels = [it["label"] for it in rep.items]
        assert "k=0 i=1" in labels and "k=1 i=1" in labels

    def test_sl3_all_windowed(self):
        inst, sol = a2_solved()
        W = build_wronskian(inst, sol)
        rep = check_wronskian_equations(W, inst)
        assert rep.passed
        ks = {it["label"].split()[0] for it in rep.items}
        assert ks == {"k=0", "k=1", "k=2"}
        assert all(it["value"] <= 1e-8 for it in rep.items)

    def test_negative_control(self):
        inst, sol = a2_solved()
        rng = np.random.default_rng(8)
        M = RatMatrix([[RatFun(Poly(rng.standard_normal(2)))
                        for _ in range(3)] for _ in range(3)])
        rep = check_wronskian_equations(M, inst)
        assert not rep.passed


class TestShiftedMinorRelation:
    def test_sl2_both_rows(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        for w in enumerate_weyl(inst.cartan):
            assert check_shifted_minor_relation(W, inst, w, 1) <= 1e-9

    def test_sl3_full_orbit(self):
        inst, sol = a2_solved()
        W = build_wronskian(inst, sol)
        for w in enumerate_weyl(inst.cartan):
            for i in (1, 2):
                assert check_shifted_minor_relation(W, inst, w, i) <= 1e-8


class TestFundamentalRelation:
    def test_identity_matrix(self):
        cd = cartan_matrix("A", 2)
        M = RatMatrix.identity(3)
        e = WeylWord.identity()
        for i in (1, 2):
            resid = check_fundamental_relation(M, e, e, i, cd)
            assert all(abs(complex(resid(x))) < 1e-12 for x in PANEL[:3])

    def test_random_unimodular(self):
        rng = np.random.default_rng(5)
        for n in (3, 4):
            cd = cartan_matrix("A", n - 1)
            M = random_unimodular(n, rng)
            words = enumerate_weyl(cd)
            for i in range(1, n):
                si = WeylWord((i,))
                from qoper.cartan import word_length
                ok_words = [w for w in words
                            if word_length(w * si, cd) == word_length(w, cd) + 1]
                for u in ok_words[:3]:
                    for v in ok_words[:3]:
                        r = fundamental_relation_residual(M, u, v, i, cd, PANEL[:3])
                        assert r <= 1e-9, (n, i, u.letters, v.letters)

    def test_solved_wronskian_is_qq(self):
        inst, sol = a2_solved()
        W = build_wronskian(inst, sol)
        e = WeylWord.identity()
        for i in (1, 2):
            r = fundamental_relation_residual(W, e, e, i, inst.cartan, PANEL)
            assert r <= 1e-9

    def test_length_precondition(self):
        cd = cartan_matrix("A", 2)
        M = RatMatrix.identity(3)
        s1 = WeylWord((1,))
        with pytest.raises(ValueError, match="length condition"):
            check_fundamental_relation(M, s1, s1, 1, cd)


class TestLewisCarroll:
    def test_identity_3x3(self):
        M = RatMatrix.identity(3)
        resid = check_lewis_carroll(M, 2)
        assert resid.num.is_zero()

    def test_random_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            M = RatMatrix([[RatFun(Poly([int(rng.integers(-4, 5))
                                         for _ in range(3)]))
                            for _ in range(4)] for _ in range(4)])
            for i in (2, 3, 4):
                assert check_lewis_carroll(M, i).num.is_zero()

    def test_random_float(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            M = RatMatrix([[RatFun(Poly(rng.standard_normal(3)
                                        + 1j * rng.standard_normal(3)))
                            for _ in range(4)] for _ in range(4)])
            for i in (2, 3, 4):
                resid = check_lewis_carroll(M, i)
                assert all(abs(complex(resid(x))) < 1e-9 for x in PANEL[:2])

    def test_sl3_wronskian(self):
        # rational entries inflate symbolic coefficients, so the identity
        # on the Wronskian is certified by sampling
        from qoper.wronskian import lewis_carroll_residual
        inst, sol = a2_solved()
        W = build_wronskian(inst, sol)
        assert lewis_carroll_residual(W, 2, PANEL) < 1e-10

    def test_size_guard(self):
        with pytest.raises(ValueError):
            check_lewis_carroll(RatMatrix.identity(2), 2)


class TestGaussDecompose:
    def test_identity(self):
        L, D, U = gauss_decompose(RatMatrix.identity(3))
        for M in (L, D, U):
            for i in range(3):
                for j in range(3):
                    want = 1.0 if i == j else 0.0
                    assert abs(complex(M[i, j](0.3)) - want) < 1e-14

    def test_antidiagonal_fails(self):
        M = RatMatrix([[RatFun.zero(), RatFun.one()],
                       [RatFun.one(), RatFun.zero()]])
        with pytest.raises(DegenerateInstance, match="principal minor 1"):
            gauss_decompose(M)

    def test_exact_reconstruction(self):
        rng = np.random.default_rng(6)
        M = RatMatrix([[RatFun(Poly([int(rng.integers(1, 5)),
                                     int(rng.integers(-3, 4))]))
                        for _ in range(3)] for _ in range(3)])
        try:
            L, D, U = gauss_decompose(M)
        except DegenerateInstance:
            pytest.skip("random matrix hit a vanishing minor")
        R = L @ D @ U
        for i in range(3):
            for j in range(3):
                diff = R[i, j] - M[i, j]
                assert diff.num.is_zero()

    def test_sl2_wronskian_h11(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        _, D, _ = gauss_decompose(W)
        for x in PANEL:
            assert abs(complex(D[0, 0](x)) - complex(sol.qplus[0](x))) < 1e-9

    def test_big_cell_membership(self):
        # nonvanishing minors put the solved Wronskian in the big double
        # cell: decomposition succeeds on W and on its w0 flip
        from qoper import longest_element
        inst, sol = a2_solved()
        W = build_wronskian(inst, sol)
        gauss_decompose(W)
        W0, _ = weyl_twist(W, longest_element(inst.cartan), inst)
        gauss_decompose(W0)


class TestMiura:
    def test_build_miura_a_sl2(self):
        # Q+ = 1, Lambda = z: A = [[1/zeta, 0], [z, zeta]]
        cd = cartan_matrix("A", 1)
        inst = QQInstance(cd, 0.25, TwistZ((2.0,)), (Poly([0.0, 1.0]),), (0,))
        sol = QQSolution((Poly.one(),), (Poly.one(),))
        A = build_miura_A(inst, sol)
        for x in PANEL:
            want = np.array([[0.5, 0.0], [x, 2.0]])
            assert np.abs(A.eval(x) - want).max() < 1e-12 * (1 + abs(x))

    def test_reconstruction_sl2(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        A, rep = miura_from_wronskian(W, inst, sol)
        assert rep.passed

    def test_reconstruction_sl3(self):
        inst, sol = a2_solved()
        W = build_wronskian(inst, sol)
        A, rep = miura_from_wronskian(W, inst, sol)
        assert rep.passed
        for it in rep.items:
            assert it["value"] is None or it["value"] <= 1e-8

    def test_trivial_instance_diagonal(self):
        # m = 0 everywhere: Cartan part is constant (1/zeta, zeta)
        cd = cartan_matrix("A", 1)
        inst = QQInstance(cd, 0.25, TwistZ((3.0,)), (Poly([1.0, 1.0]),), (0,))
        sol = QQSolution((Poly.one(),), (Poly([-1.0 / (3 - 0.25 / 3)]),))
        A = build_miura_A(inst, sol)
        for x in PANEL[:2]:
            m = A.eval(x)
            assert abs(m[0, 0] - 1 / 3.0) < 1e-12
            assert abs(m[1, 1] - 3.0) < 1e-12


class TestPluckerBlocks:
    def test_sl2_defining(self):
        inst, sol = a1_solved()
        v = miura_trivializer(inst, sol)
        A = build_miura_A(inst, sol)
        rep = miura_plucker_blocks(A, v, inst, 1)
        assert rep.passed

    def test_sl3_both(self):
        inst, sol = a2_solved()
        v = miura_trivializer(inst, sol)
        A = build_miura_A(inst, sol)
        for i in (1, 2):
            assert miura_plucker_blocks(A, v, inst, i).passed

    def test_negative_control(self):
        inst, sol = a2_solved()
        v = miura_trivializer(inst, sol)
        rng = np.random.default_rng(12)
        bad = RatMatrix([[RatFun(Poly(rng.standard_normal(2)))
                          if i >= j else RatFun.zero()
                          for j in range(3)] for i in range(3)])
        rep = miura_plucker_blocks(bad, v, inst, 1)
        assert not rep.passed
        assert rep.items[0]["value"] > 1e-3


class TestWeylTwist:
    def test_identity(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        W2, tw = weyl_twist(W, WeylWord.identity(), inst)
        for x in PANEL[:2]:
            assert np.abs(W2.eval(x) - W.eval(x)).max() < 1e-12
        assert tw.zetas == inst.twist.zetas

    def test_sl2_row_swap_passes_checks(self):
        inst, sol = a1_solved(q=0.2)
        W = build_wronskian(inst, sol)
        W2, tw = weyl_twist(W, WeylWord((1,)), inst)
        # rows swapped with the lift sign: new row 1 = -old row 2
        for x in PANEL[:3]:
            m, m2 = W.eval(x), W2.eval(x)
            assert np.abs(m2[0] + m[1]).max() < 1e-10
            assert np.abs(m2[1] - m[0]).max() < 1e-10
        rep = check_wronskian_equations(W2, inst.with_twist(tw))
        assert rep.passed

    def test_double_twist_sign(self):
        inst, sol = a1_solved()
        W = build_wronskian(inst, sol)
        W2, tw = weyl_twist(W, WeylWord((1, 1)), inst)
        # the lift squares to -1
        for x in PANEL[:2]:
            assert np.abs(W2.eval(x) + W.eval(x)).max() < 1e-10
        assert all(abs(complex(a) - complex(b)) < 1e-12
                   for a, b in zip(tw.zetas, inst.twist.zetas))
