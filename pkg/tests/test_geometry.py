import math

import numpy as np
import pytest

from thermalent import core, entangle as en, geometry as geo, majorization as mj
from tests.conftest import random_states


def ctx2q(beta):
    return core.two_qubit_context(beta)


class TestSampling:
    def test_deterministic_per_seed(self):
        a = geo.sample_simplex_array(4, 80_000, 99)
        b = geo.sample_simplex_array(4, 80_000, 99)
        assert np.array_equal(a, b)
        c = geo.sample_simplex_array(4, 80_000, 100)
        assert not np.array_equal(a, c)

    def test_prefix_stability(self):
        # a shorter run is a prefix of a longer one with the same seed
        long = geo.sample_simplex_array(4, 70_000, 5)
        short = geo.sample_simplex_array(4, 1_000, 5)
        assert np.array_equal(long[:1_000], short)

    def test_stream_matches_array(self):
        arr = geo.sample_simplex_array(3, 50, 7)
        stream = list(geo.sample_simplex(3, 50, 7))
        assert all(np.array_equal(s.probs, row) for s, row in zip(stream, arr))

    def test_d2_mean_first_coordinate(self):
        n = 200_000
        s = geo.sample_simplex_array(2, n, 11)
        mean = s[:, 0].mean()
        sigma = s[:, 0].std() / math.sqrt(n)
        assert abs(mean - 0.5) <= 3 * sigma

    def test_nearest_vertex_symmetry(self):
        # each vertex is nearest for a quarter of uniform samples
        n = 1_000_000
        s = geo.sample_simplex_array(4, n, 13)
        frac = np.bincount(np.argmax(s, axis=1), minlength=4) / n
        sigma = math.sqrt(0.25 * 0.75 / n)
        assert np.all(np.abs(frac - 0.25) <= 3.5 * sigma)

    def test_validation(self):
        with pytest.raises(ValueError):
            geo.sample_simplex_array(1, 10, 0)


class TestVolumes:
    def test_subspace_entanglable_matches_exact_third(self):
        # exact value: 6 * int int (1-x-y-2 sqrt(xy))+ dx dy = 1/3
        est = geo.volume_of("E", ctx2q(0.0), None, 300_000, seed=21)
        assert abs(est.fraction - 1.0 / 3.0) <= 4 * est.std_error

    def test_std_error_formula(self):
        est = geo.volume_of("E", ctx2q(0.0), None, 10_000, seed=3)
        expect = math.sqrt(est.fraction * (1 - est.fraction) / est.n_samples)
        assert est.std_error == pytest.approx(expect, rel=1e-12)

    def test_ne_complements_e(self):
        ve = geo.volume_of("E", ctx2q(1.0), None, 50_000, seed=4)
        vne = geo.volume_of("NE", ctx2q(1.0), None, 50_000, seed=4)
        assert ve.fraction + vne.fraction == pytest.approx(1.0, abs=1e-12)

    def test_tne_beta_zero_about_a_third(self):
        est = geo.volume_of("TNE", ctx2q(0.0), None, 200_000, seed=5)
        assert 0.31 <= est.fraction <= 0.36

    def test_ent_cone_of_top_vertex_equals_e_exactly(self):
        # the top vertex reaches everything, so the predicates coincide
        for beta in (0.0, 1.0):
            a = geo.volume_of("E", ctx2q(beta), None, 60_000, seed=8)
            b = geo.volume_of("ENT_CONE", ctx2q(beta), core.PopVector([0, 0, 0, 1]),
                              60_000, seed=8)
            assert a.fraction == b.fraction

    def test_thread_count_invariance(self):
        a = geo.volume_of("TNE", ctx2q(0.5), None, 150_000, seed=6, threads=1)
        b = geo.volume_of("TNE", ctx2q(0.5), None, 150_000, seed=6, threads=4)
        assert a.fraction == b.fraction

    def test_volume_monotone_under_cone_order(self, rng):
        # reachable states have no larger entanglement cone volume
        ctx = ctx2q(1.0)
        p = core.PopVector([0.1, 0.1, 0.2, 0.6])
        V = mj.future_cone(p, ctx).points
        q = core.PopVector(V.T @ rng.dirichlet(np.ones(V.shape[0])))
        vp = geo.volume_of("ENT_CONE", ctx, p, 120_000, seed=9)
        vq = geo.volume_of("ENT_CONE", ctx, q, 120_000, seed=10)
        joint = math.hypot(vp.std_error, vq.std_error)
        assert vq.fraction <= vp.fraction + 2 * joint

    def test_tne_volume_nonincreasing_in_beta(self):
        # colder environments leave fewer non-entanglable states
        fractions = []
        for i, beta in enumerate((0.0, 0.5, 1.0, 2.0, 3.0, 5.0)):
            est = geo.volume_of("TNE", ctx2q(beta), None, 120_000, seed=40 + i)
            fractions.append((est.fraction, est.std_error))
        for (fa, sa), (fb, sb) in zip(fractions, fractions[1:]):
            assert fb <= fa + 2 * math.hypot(sa, sb)

    def test_validation(self):
        with pytest.raises(ValueError):
            geo.volume_of("BOGUS", ctx2q(0.0), None, 10, seed=0)
        with pytest.raises(ValueError):
            geo.volume_of("ENT_CONE", ctx2q(0.0), None, 10, seed=0)
        with pytest.raises(ValueError):
            geo.volume_of("E", ctx2q(0.0), None, 0, seed=0)

    def test_infinite_beta_tne_is_negligible(self):
        est = geo.volume_of("TNE", ctx2q(math.inf), None, 2_000, seed=2)
        assert est.fraction == 0.0


class TestBoundary:
    def test_bracket_width_bound(self):
        ctx = ctx2q(0.7)
        cloud = geo.tne_boundary(ctx, grid=8, iters=30)
        gaps0 = np.linalg.norm(cloud.outer_points - cloud.inner_points, axis=1)
        assert np.all(gaps0 <= 2.0**-30 * 2.0 + 1e-12)

    def test_beta_zero_endpoints_straddle_bruteforce(self):
        # the independent permutation oracle must separate the brackets
        ctx = ctx2q(0.0)
        cloud = geo.tne_boundary(ctx, grid=6, iters=25)
        for inner, outer in zip(cloud.inner_points, cloud.outer_points):
            assert en.tne_bruteforce(core.PopVector(inner), ctx)
            assert not en.tne_bruteforce(core.PopVector(outer), ctx)

    def test_beta_zero_cloud_sits_on_permutation_zero_set(self):
        import itertools

        ctx = ctx2q(0.0)
        cloud = geo.tne_boundary(ctx, grid=8, iters=30)
        worst = np.full(cloud.points.shape[0], np.inf)
        for perm in itertools.permutations(range(4)):
            worst = np.minimum(worst, en.witness_batch(cloud.points[:, perm]))
        assert np.abs(worst).max() <= 1e-8

    def test_vertex_ray_matches_segment_scan(self):
        # 1-D oracle along the segment from the pure ground state to gamma
        ctx = ctx2q(0.0)
        gamma = ctx.gamma
        p_o = np.array([1.0, 0.0, 0.0, 0.0])

        def in_tne(t):
            # t = 0 at p_o (entanglable), t = 1 at gamma (non-entanglable)
            return en.tne_bruteforce(core.PopVector((1 - t) * p_o + t * gamma), ctx)

        ts = np.linspace(0, 1, 4001)
        flips = [t for a, b, t in zip(ts, ts[1:], ts[1:]) if in_tne(b) != in_tne(a)]
        assert len(flips) == 1
        cloud = geo.tne_boundary(ctx, grid=1, iters=30)
        idx = np.argmin(np.abs(cloud.outer_points - p_o).sum(axis=1))
        # recover t from the first coordinate: point = (1-t) e1 + t gamma
        t_cloud = (1.0 - cloud.points[idx][0]) / (1.0 - gamma[0])
        assert abs(t_cloud - flips[0]) <= 1e-3

    def test_grid_point_count(self):
        pts = geo.simplex_facet_grid(6)
        # 4 facets of C(8,2)=28 points; edge points shared by 2 facets,
        # vertices by 3: 4*28 - 6*(6-1) - 2*4 = 74 distinct points
        assert pts.shape == (74, 4)

    def test_infinite_beta_single_point(self):
        cloud = geo.tne_boundary(ctx2q(math.inf), grid=10, iters=5)
        assert cloud.points.shape == (1, 4)
        assert np.array_equal(cloud.points[0], [1, 0, 0, 0])

    def test_validation(self):
        with pytest.raises(ValueError):
            geo.tne_boundary(ctx2q(0.5), grid=4, iters=0)


class TestNeBoundary:
    def test_degenerate_line(self):
        lo, hi = geo.ne_boundary_p3(0.0, 0.3)
        assert lo == pytest.approx(0.3) and hi == pytest.approx(0.3)

    def test_quarter_example(self):
        lo, hi = geo.ne_boundary_p3(0.25, 0.0)
        assert (lo, hi) == (pytest.approx(-1.5), pytest.approx(0.5))
        assert en.witness_f([0.25, 0.0, 0.5, 0.25]) == pytest.approx(0.0, abs=1e-15)

    def test_roots_sit_on_witness_zero(self, rng):
        for _ in range(300):
            p1 = float(rng.uniform(0, 0.6))
            p2 = float(rng.uniform(0, 0.5))
            for r in geo.ne_boundary_p3(p1, p2):
                assert abs(en.witness_f([p1, p2, r, 1 - p1 - p2 - r])) <= 1e-12

    def test_domain_error(self):
        with pytest.raises(ValueError):
            geo.ne_boundary_p3(0.2, 0.8)


class TestHull:
    def test_tetrahedron(self):
        pts = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], float)
        mesh = geo.convex_hull_export(pts)
        assert mesh.faces.shape == (4, 3)
        assert mesh.volume_fraction == pytest.approx(1.0, rel=1e-12)

    def test_vertices_subset_of_inputs(self, rng):
        pts = random_states(rng, 60)
        mesh = geo.convex_hull_export(pts)
        for v in mesh.vertices:
            assert min(np.abs(pts - v).max(axis=1)) < 1e-14

    def test_beta_zero_hull_matches_mc(self):
        ctx = ctx2q(0.0)
        cloud = geo.tne_boundary(ctx, grid=24, iters=30)
        mesh = geo.convex_hull_export(cloud)
        mc = geo.volume_of("TNE", ctx, None, 400_000, seed=31)
        assert abs(mesh.volume_fraction - mc.fraction) <= 0.01

    def test_embedding_is_isometric(self, rng):
        pts = random_states(rng, 20)
        emb = geo.embed_simplex(pts)
        d4 = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        d3 = np.linalg.norm(emb[:, None, :] - emb[None, :, :], axis=-1)
        assert np.allclose(d4, d3, atol=1e-12)

    def test_obj_export(self):
        pts = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], float)
        obj = geo.convex_hull_export(pts).to_obj()
        lines = obj.strip().split("\n")
        assert sum(1 for l in lines if l.startswith("v ")) == 4
        assert sum(1 for l in lines if l.startswith("f ")) == 4

    def test_degenerate_cloud_errors(self):
        flat = np.tile([0.25, 0.25, 0.25, 0.25], (10, 1))
        with pytest.raises(ValueError):
            geo.convex_hull_export(flat)
        with pytest.raises(ValueError):
            geo.convex_hull_export(np.array([[1, 0, 0, 0], [0, 1, 0, 0]], float))


class TestWitnessGeometry:
    def test_witness_is_not_globally_concave(self):
        # the witness itself has a saddle in (q1, q4); only its superlevel
        # set is convex.  Pin the counterexample so nobody "fixes" this.
        x = np.array([0.35, 0.15, 0.15, 0.35])
        y = np.array([0.15, 0.35, 0.35, 0.15])
        mid = 0.5 * (x + y)
        assert en.witness_f(mid) < 0.5 * (en.witness_f(x) + en.witness_f(y)) - 1e-3

    def test_min_ppt_eigenvalue_is_concave(self, rng):
        # the underlying measure (smallest PT eigenvalue at the optimal
        # rotation) is linear minus a norm, hence concave
        X = random_states(rng, 50_000)
        Y = random_states(rng, 50_000)
        lam = rng.uniform(size=(50_000, 1))
        mix = lam * X + (1 - lam) * Y

        def lam_minus(Q):
            return 0.5 * (Q[:, 0] + Q[:, 3]
                          - np.hypot(Q[:, 1] - Q[:, 2], Q[:, 0] - Q[:, 3]))

        lhs = lam_minus(mix)
        rhs = lam[:, 0] * lam_minus(X) + (1 - lam[:, 0]) * lam_minus(Y)
        assert np.min(lhs - rhs) >= -1e-12

    def test_boundary_pair_mixtures_stay_nonnegative(self, rng):
        # mixtures of witness-zero states never turn the witness negative
        count = 0
        while count < 5_000:
            p1, p2 = float(rng.uniform(0, 1)), float(rng.uniform(0, 0.5))
            try:
                roots = geo.ne_boundary_p3(p1, p2)
            except ValueError:
                continue
            pts = [np.array([p1, p2, r, 1 - p1 - p2 - r])
                   for r in roots if r >= 0 and 1 - p1 - p2 - r >= 0]
            if not pts:
                continue
            lam = rng.uniform()
            mix = lam * pts[0] + (1 - lam) * pts[-1]
            assert en.witness_f(mix) >= -1e-12
            count += 1

    def test_ne_set_convex(self, rng):
        # random mixtures of non-entanglable states stay non-entanglable
        P = random_states(rng, 40_000)
        ne = P[en.witness_batch(P) >= 0]
        half = len(ne) // 2
        lam = rng.uniform(size=(half, 1))
        mix = lam * ne[:half] + (1 - lam) * ne[half:2 * half]
        assert np.all(en.witness_batch(mix) >= -1e-12)
