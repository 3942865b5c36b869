import numpy as np
import pytest

import osbk
from osbk.integrability import poisson_bracket

from .conftest import random_symplectic
from .oracles import fd_gradient


def valid_graph_pair(graph, q, w):
    """A correspondence pair for any generating graph: midpoint embed(q),
    chord (w, H(q) w), which is omega-orthogonal to every tangent vector."""
    delta = osbk.interleave(w, graph.hess(q) @ w)
    return graph.embed(q) - 0.5 * delta, graph.embed(q) + 0.5 * delta


class TestIntegralsFor:
    def test_ellipsoid_pair_energies(self, ell2):
        ints = osbk.integrals_for(osbk.spec_for(ell2))
        assert ints.kind == "ellipsoid"
        assert len(ints.evaluators) == 2
        z = np.array([1.0, 0.0, 2.0, 0.0])
        assert np.allclose(ints.values(z), [1.0, 4.0])

    def test_cubic_graph_momenta(self, ft_spec):
        ints = osbk.integrals_for(ft_spec)
        assert ints.kind == "cubic-graph"
        assert len(ints.evaluators) == 2
        # z = (q1, p1, q2, p2) = (1, 0, 0, 0): grad F = (2q1q2+q2^2, q1^2+2q1q2) = (0, 1)
        z = np.array([1.0, 0.0, 0.0, 0.0])
        assert np.allclose(ints.values(z), [0.0, -1.0])

    def test_values_vanish_on_graph(self, ft_graph, ft_spec):
        ints = osbk.integrals_for(ft_spec)
        rng = np.random.default_rng(0)
        for _ in range(5):
            z = ft_graph.embed(rng.uniform(-2, 2, size=2))
            assert np.max(np.abs(ints.values(z))) < 1e-12

    def test_trig_tables_unsupported(self, circle_spec):
        with pytest.raises(osbk.DomainError, match="no known integrals"):
            osbk.integrals_for(circle_spec)

    def test_transformed_tables_unsupported(self, ell2):
        T = random_symplectic(2, np.random.default_rng(1))
        with pytest.raises(osbk.DomainError, match="transformed"):
            osbk.integrals_for(osbk.spec_for(ell2, transform=T))

    def test_non_cubic_graph_unsupported(self):
        quartic = osbk.GeneratingGraph(osbk.Poly(2, {(4, 0): 1.0}))
        with pytest.raises(osbk.DomainError):
            osbk.integrals_for(osbk.spec_for(quartic))


class TestEvaluators:
    def test_gradients_match_fd(self, ft_spec):
        ints = osbk.integrals_for(ft_spec)
        rng = np.random.default_rng(5)
        for ev in ints.evaluators:
            z = rng.uniform(-2, 2, size=4)
            assert np.allclose(ev.grad(z), fd_gradient(ev.value, z), atol=1e-6)

    def test_ellipsoid_gradients_match_fd(self, ell2):
        ints = osbk.integrals_for(osbk.spec_for(ell2))
        z = np.array([0.3, -1.2, 0.8, 0.4])
        for ev in ints.evaluators:
            assert np.allclose(ev.grad(z), fd_gradient(ev.value, z), atol=1e-6)


class TestPoissonBracket:
    def test_canonical_pairs(self):
        x1 = osbk.PolyIntegral(osbk.Poly(4, {(1, 0, 0, 0): 1.0}))
        y1 = osbk.PolyIntegral(osbk.Poly(4, {(0, 1, 0, 0): 1.0}))
        y2 = osbk.PolyIntegral(osbk.Poly(4, {(0, 0, 0, 1): 1.0}))
        z = np.random.default_rng(2).normal(size=4)
        assert poisson_bracket(x1, y1, z) == pytest.approx(1.0)
        assert poisson_bracket(y1, x1, z) == pytest.approx(-1.0)
        assert poisson_bracket(x1, y2, z) == pytest.approx(0.0)

    def test_ellipsoid_integrals_commute_exactly(self):
        ints = osbk.integrals_for(osbk.spec_for(osbk.SymplecticEllipsoid((0.7, 1.9, 3.0))))
        rng = np.random.default_rng(3)
        for _ in range(20):
            z = rng.uniform(-2, 2, size=6)
            for i in range(3):
                for j in range(i + 1, 3):
                    b = poisson_bracket(ints.evaluators[i], ints.evaluators[j], z)
                    assert abs(b) < 1e-12

    def test_cubic_graph_integrals_commute(self, ft_spec):
        ints = osbk.integrals_for(ft_spec)
        rng = np.random.default_rng(4)
        for _ in range(50):
            z = rng.uniform(-3, 3, size=4)
            b = poisson_bracket(ints.evaluators[0], ints.evaluators[1], z)
            assert abs(b) < 1e-12 * max(1.0, np.max(np.abs(z)) ** 4)


class TestAuditInvariance:
    def test_ellipsoid_orbit_drift(self, ell2):
        spec = osbk.spec_for(ell2)
        ints = osbk.integrals_for(spec)
        z0 = np.array([2.0, 0.1, -1.0, 2.2])
        orbit = osbk.iterate_ellipsoid(ell2, z0, steps=1000)
        rep = osbk.audit_invariance(spec, ints, orbit)
        assert rep.steps == 1000
        scale = max(1.0, float(np.max(np.abs(ints.values(z0)))))
        assert rep.worst_drift < 1e-10 * scale
        assert rep.worst_step is not None

    def test_cubic_pair_sign_convention(self, ft_graph, ft_spec):
        # the endpoint values equal -(1/2) third F(q)[v, v] with v the
        # half-chord; the audit reports that as matched sign "-"
        ints = osbk.integrals_for(ft_spec)
        q = np.array([1.0, 0.0])
        w = np.array([1.0, 0.0])
        z, zp = valid_graph_pair(ft_graph, q, w)
        rep = osbk.audit_invariance(ft_spec, ints, [z, zp])
        assert rep.matched_sign == "-"
        assert rep.mismatch_minus < 1e-12
        assert rep.mismatch_plus > 0.1

    def test_cubic_pair_values_conserved(self, ft_graph, ft_spec):
        ints = osbk.integrals_for(ft_spec)
        rng = np.random.default_rng(8)
        for _ in range(10):
            q = rng.uniform(-2, 2, size=2)
            w = rng.uniform(-2, 2, size=2)
            z, zp = valid_graph_pair(ft_graph, q, w)
            # both endpoints carry the same values: -(1/8) third F(q)[w, w]
            # for the full chord w (Taylor of grad F around the midpoint)
            eighth = 0.125 * np.einsum("ijk,j,k->i", ft_graph.third(q), w, w)
            va = ints.values(z)
            vb = ints.values(zp)
            assert np.allclose(va, -eighth, atol=1e-9)
            assert np.allclose(vb, -eighth, atol=1e-9)
            assert np.allclose(va, vb, atol=1e-12)

    def test_audit_accepts_step_candidates(self, ell2):
        spec = osbk.spec_for(ell2)
        ints = osbk.integrals_for(spec)
        z = np.array([2.0, 0.1, -1.0, 2.2])
        cands = [osbk.step_ellipsoid(ell2, z, branch=+1)]
        rep = osbk.audit_invariance(spec, ints, cands)
        assert rep.steps == 1
        assert rep.worst_drift < 1e-10

    def test_zero_chord_skipped(self, ft_graph, ft_spec):
        ints = osbk.integrals_for(ft_spec)
        z = ft_graph.embed(np.array([0.5, -0.5]))
        rep = osbk.audit_invariance(ft_spec, ints, [z, z.copy()])
        assert rep.worst_drift == 0.0

    def test_as_dict_shape(self, ell2):
        spec = osbk.spec_for(ell2)
        ints = osbk.integrals_for(spec)
        orbit = osbk.iterate_ellipsoid(ell2, np.array([2.0, 0.0, 0.0, 1.8]), steps=3)
        d = osbk.audit_invariance(spec, ints, orbit).as_dict()
        assert set(d) >= {"max_drift", "worst_step", "steps"}
        assert d["worst_step"] is None or "index" in d["worst_step"]
