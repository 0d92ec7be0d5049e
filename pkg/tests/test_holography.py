import numpy as np
import pytest

from adsholo import ads_model as am
from adsholo import holography as hg
from adsholo import phase_core as pc


@pytest.fixture(scope="module")
def small_plan():
    return hg.ExperimentPlan(K=12, N=256, ladder=(10, 20, 40, 80),
                             n_bulk=4)


@pytest.fixture(scope="module")
def small_model(small_plan):
    return hg.build_plan_model(small_plan, validate=False)


class TestRegionSpec:
    def test_rejects_unknown_kind(self):
        with pytest.raises(pc.ShapeError):
            hg.RegionSpec("edge")

    def test_rejects_overlapping_intervals(self):
        with pytest.raises(pc.ShapeError):
            hg.boundary_region([("-", 0.0, 2.0), ("-", 1.0, 3.0)])

    def test_allows_same_window_on_both_components(self):
        r = hg.boundary_region([("-", 0.0, 2.0), ("+", 0.0, 2.0)])
        assert not r.empty

    def test_rejects_overlapping_rectangles(self):
        with pytest.raises(pc.ShapeError):
            hg.bulk_region([(0, 1, 0, 1), (0.5, 2, 0.5, 2)])

    def test_allows_disjoint_rectangles(self):
        r = hg.bulk_region([(0, 1, -0.5, 0.5), (2, 3, -0.5, 0.5)])
        assert len(r.rectangles) == 2

    def test_empty_flags(self):
        assert hg.boundary_region([]).empty
        assert hg.bulk_region([]).empty


class TestBoundaryDictionary:
    def test_single_bump(self, small_model):
        o = hg.boundary_region([("-", -1.0, 1.0)])
        fam = hg.boundary_dictionary(small_model, o, 1)
        assert len(fam) == 1
        assert fam[0].component == "-"
        assert fam[0].support[0][0] >= -1.0 and fam[0].support[0][1] <= 1.0

    def test_empty_region(self, small_model):
        assert hg.boundary_dictionary(small_model,
                                      hg.boundary_region([]), 5) == []

    def test_prefix_property(self, small_model):
        o = hg.boundary_region([("-", -2.0, 2.0), ("+", -2.0, 2.0)])
        fam_small = hg.boundary_dictionary(small_model, o, 7)
        fam_big = hg.boundary_dictionary(small_model, o, 23)
        for a, b in zip(fam_small, fam_big):
            assert a.component == b.component
            assert np.array_equal(a.samples, b.samples)

    def test_supports_inside_region(self, small_model):
        o = hg.boundary_region([("-", 0.5, 1.5)])
        for f in hg.boundary_dictionary(small_model, o, 30):
            (t0, t1), = f.support
            assert t0 >= 0.5 - 1e-12 and t1 <= 1.5 + 1e-12

    def test_gram_rank_nondecreasing(self, small_model):
        o = hg.boundary_region([("-", -2.0, 2.0), ("+", -2.0, 2.0)])
        ranks = []
        for size in (4, 8, 16, 32):
            fam = hg.boundary_dictionary(small_model, o, size)
            vecs = np.array([am.embed_one_particle(
                am.dual_boundary_map(small_model, f)) for f in fam])
            s = np.linalg.svd(vecs, compute_uv=False)
            ranks.append(int(np.sum(s > 1e-10 * s[0])))
        assert all(a <= b for a, b in zip(ranks, ranks[1:]))
        assert ranks[-1] > ranks[0]


class TestBulkGenerators:
    def test_deterministic_under_seed(self, small_model):
        v = hg.bulk_region([(-0.5, 0.5, -0.6, 0.6)])
        g1 = hg.bulk_generators(small_model, v, 3, seed=11)
        g2 = hg.bulk_generators(small_model, v, 3, seed=11)
        for a, b in zip(g1, g2):
            assert np.array_equal(a.values, b.values)

    def test_seed_changes_family(self, small_model):
        v = hg.bulk_region([(-0.5, 0.5, -0.6, 0.6)])
        g1 = hg.bulk_generators(small_model, v, 3, seed=1)
        g2 = hg.bulk_generators(small_model, v, 3, seed=2)
        assert not np.array_equal(g1[0].values, g2[0].values)

    def test_supports_inside_region(self, small_model):
        v = hg.bulk_region([(-0.5, 0.5, -0.6, 0.6)])
        for g in hg.bulk_generators(small_model, v, 6, seed=3):
            assert g.support_t[0] >= -0.5 and g.support_t[1] <= 0.5
            assert g.support_x[0] >= -0.6 and g.support_x[1] <= 0.6

    def test_empty_region(self, small_model):
        assert hg.bulk_generators(small_model, hg.bulk_region([]), 4) == []


class TestRunInclusion:
    def test_empty_bulk_region_vacuous(self, small_plan, small_model):
        import dataclasses
        plan = dataclasses.replace(small_plan, v_region=hg.bulk_region([]))
        table = hg.run_inclusion(plan, model=small_model)
        assert all(r.max_residual == 0.0 for r in table.rungs)
        assert all(r.witness_ok for r in table.rungs)

    def test_residuals_monotone_and_witnessed(self, small_plan, small_model):
        table = hg.run_inclusion(small_plan, model=small_model)
        res = [r.max_residual for r in table.rungs]
        assert all(b <= a + 1e-12 for a, b in zip(res, res[1:]))
        assert all(r.witness_ok for r in table.rungs)
        assert table.plateau < table.initial_residual

    def test_isotony_of_boundary_spans(self, small_model):
        # every O1-dictionary vector lies in the O2 >= O1 span built from
        # the same stream at larger size
        o1 = hg.boundary_region([("-", -1.0, 1.0)])
        fam1 = hg.boundary_dictionary(small_model, o1, 6)
        fam2 = hg.boundary_dictionary(small_model, o1, 24)
        ps = hg.canonical_phase_space(small_model)
        gens2 = pc.SubspaceGenerators(tuple(
            am.embed_one_particle(am.dual_boundary_map(small_model, f))
            for f in fam2))
        p2 = pc.eta_projector(gens2, ps)
        for f in fam1:
            w = am.embed_one_particle(am.dual_boundary_map(small_model, f))
            assert pc.eta_norm(ps, w - p2 @ w) <= 1e-9 * pc.eta_norm(ps, w)

    def test_time_translation_covariance(self, small_model, small_plan):
        import dataclasses
        delta = 0.37
        plan0 = small_plan
        plan1 = dataclasses.replace(
            small_plan,
            o_region=hg.boundary_region(
                [(c, a + delta, b + delta)
                 for c, a, b in small_plan.o_region.intervals]),
            v_region=hg.bulk_region(
                [(t0 + delta, t1 + delta, x0, x1)
                 for t0, t1, x0, x1 in small_plan.v_region.rectangles]))
        t0 = hg.run_inclusion(plan0, model=small_model)
        t1 = hg.run_inclusion(plan1, model=small_model)
        for r0, r1 in zip(t0.rungs, t1.rungs):
            assert r1.max_residual == pytest.approx(r0.max_residual,
                                                    abs=1e-9)


class TestWeylConvergence:
    def test_report_structure_and_decay(self, small_plan, small_model):
        rep = hg.run_weyl_convergence(small_plan, model=small_model,
                                      n_max=24)
        assert len(rep.errors) == len(small_plan.ladder)
        assert all(b <= a + 1e-3 for a, b in zip(rep.errors, rep.errors[1:]))
        assert rep.errors[-1] < rep.errors[0]
        assert all(cd <= d + 1e-12 for cd, d in
                   zip(rep.compressed_distances, rep.distances))

    def test_fit_is_positive_slope(self, small_plan, small_model):
        rep = hg.run_weyl_convergence(small_plan, model=small_model,
                                      n_max=24)
        assert rep.lipschitz > 0.0
        assert 0.0 <= rep.r_squared <= 1.0


class TestLadderValidation:
    def test_rejects_nonincreasing_ladder(self):
        with pytest.raises(pc.ShapeError):
            hg.ExperimentPlan(ladder=(10, 10, 20))

    def test_rejects_swapped_regions(self):
        with pytest.raises(pc.ShapeError):
            hg.ExperimentPlan(o_region=hg.bulk_region([(0, 1, 0, 0.5)]),
                              v_region=hg.bulk_region([(0, 1, 0, 0.5)]))
