"""End-to-end inclusion and Weyl-convergence experiments.

Given a boundary region O and a bulk region V, the experiments embed a
growing dictionary of boundary smearings and a fixed family of bulk test
functions into the 2K-dimensional mode-coefficient phase space of the ground
state, and measure how well the eta-closure of the boundary span captures the
bulk vectors.  The dictionary is a deterministic prefix stream, so ladders of
increasing size give nested spans and exactly monotone residuals.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import ads_model as am
from . import ccr_fock as cf
from . import phase_core as pc


class CompressionRankError(ValueError):
    """The Weyl experiment's two-dimensional compression is rank deficient."""


@dataclass(frozen=True)
class RegionSpec:
    """A boundary region (component + time intervals) or a bulk region
    (union of (t, x) rectangles)."""

    kind: str
    intervals: tuple = ()      # boundary: ((component, t0, t1), ...)
    rectangles: tuple = ()     # bulk: ((t0, t1, x0, x1), ...)

    def __post_init__(self):
        if self.kind not in ("boundary", "bulk"):
            raise pc.ShapeError(f"unknown region kind {self.kind!r}")
        if self.kind == "boundary":
            per_comp = {}
            for comp, t0, t1 in self.intervals:
                if comp not in ("+", "-") or not t0 < t1:
                    raise pc.ShapeError(f"bad interval ({comp}, {t0}, {t1})")
                per_comp.setdefault(comp, []).append((t0, t1))
            for ivs in per_comp.values():
                for (a0, a1), (b0, b1) in zip(ivs, ivs[1:]):
                    if not a1 <= b0:
                        raise pc.ShapeError(
                            "boundary intervals must be ordered and disjoint")
        else:
            rects = self.rectangles
            for t0, t1, x0, x1 in rects:
                if not (t0 < t1 and x0 < x1):
                    raise pc.ShapeError(f"bad rectangle ({t0},{t1},{x0},{x1})")
            for i, a in enumerate(rects):
                for b in rects[i + 1:]:
                    if a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]:
                        raise pc.ShapeError("bulk rectangles must be disjoint")

    @property
    def empty(self):
        return not (self.intervals if self.kind == "boundary"
                    else self.rectangles)


def boundary_region(intervals):
    return RegionSpec("boundary", intervals=tuple(
        (c, float(a), float(b)) for c, a, b in intervals))


def bulk_region(rectangles):
    return RegionSpec("bulk", rectangles=tuple(
        tuple(float(v) for v in r) for r in rectangles))


DEFAULT_LADDER = (25, 50, 100, 200, 400)


@dataclass(frozen=True)
class ExperimentPlan:
    nu: float = 0.7
    K: int = 30
    N: int = 512
    o_region: RegionSpec = field(default_factory=lambda: boundary_region(
        [("-", -3.3, 3.3), ("+", -3.3, 3.3)]))
    v_region: RegionSpec = field(default_factory=lambda: bulk_region(
        [(-0.5, 0.5, -0.8, 0.8)]))
    ladder: tuple = DEFAULT_LADDER
    n_bulk: int = 10
    seed: int = 0
    monotonicity_slack: float = 1e-3
    perturbation: object = None

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.ladder, self.ladder[1:])):
            raise pc.ShapeError("ladder must be strictly increasing")
        if self.o_region.kind != "boundary" or self.v_region.kind != "bulk":
            raise pc.ShapeError("o_region must be boundary, v_region bulk")


def build_plan_model(plan, validate=True):
    return am.build_model(plan.nu, plan.K, plan.N,
                          perturbation=plan.perturbation, validate=validate)


def boundary_dictionary(model, o_region, size, seed=0):
    """First `size` elements of a deterministic dyadic stream of bumps in O.

    Level l places 2^l mollifier bumps per interval, each optionally
    modulated at l+1 equispaced frequencies up to the top model frequency,
    in cosine and sine phase.  Because dictionaries of different sizes are
    prefixes of one stream, their spans are nested.
    """
    if size < 1:
        raise pc.ShapeError("size must be >= 1")
    if o_region.empty:
        return []
    om_max = model.max_omega()
    out = []
    level = 0
    while len(out) < size:
        for comp, t0, t1 in o_region.intervals:
            length = t1 - t0
            n_c = 2 ** level
            width = 0.95 * length / (2 * n_c)
            for i in range(n_c):
                center = t0 + (i + 0.5) * length / n_c
                for m in range(level + 1):
                    mu = m * om_max / max(level, 1)
                    for ph in (("cos",) if m == 0 else ("cos", "sin")):
                        out.append(am.boundary_bump(
                            model, comp, center, width,
                            modulation=mu, phase=ph))
                        if len(out) == size:
                            return out
        level += 1
    return out


def bulk_generators(model, v_region, count, seed=0):
    """Seeded smooth bumps with random centers/widths inside V."""
    if count < 1:
        raise pc.ShapeError("count must be >= 1")
    if v_region.empty:
        return []
    rng = np.random.default_rng(seed)
    rects = v_region.rectangles
    om_max = model.max_omega()
    out = []
    for i in range(count):
        t0, t1, x0, x1 = rects[i % len(rects)]
        t_half = 0.5 * (t1 - t0)
        x_half = 0.5 * (x1 - x0)
        u_t = rng.uniform(0.3, 0.7)
        u_x = rng.uniform(0.3, 0.7)
        tc = 0.5 * (t0 + t1) + rng.uniform(-1, 1) * (1 - u_t) * t_half
        xc = 0.5 * (x0 + x1) + rng.uniform(-1, 1) * (1 - u_x) * x_half
        out.append(am.bulk_bump(
            model, tc, xc, u_t * t_half / 8.5, u_x * x_half / 8.5,
            amplitude=rng.uniform(0.5, 1.5),
            t_modulation=rng.uniform(0.0, om_max / 4.0)))
    return out


def canonical_phase_space(model):
    """Ground-state forms on the real 2K mode-coefficient space."""
    k = model.K
    eye = np.eye(k)
    zero = np.zeros((k, k))
    omega_block = np.block([[zero, eye], [-eye, zero]])
    return pc.PhaseSpace(2 * k, np.eye(2 * k), 2.0 * omega_block)


def _uc_reference(model, o_region):
    """sigma_min of the trace-sampling map over O, at the full cutoff."""
    lat_step = min(0.01, 0.15 / model.max_omega())
    t_lo = min(t0 for _, t0, _ in o_region.intervals)
    t_hi = max(t1 for _, _, t1 in o_region.intervals)
    n = int(np.ceil((t_hi - t_lo) / lat_step)) + 1
    lattice = t_lo + np.arange(n) * lat_step
    try:
        return am.uc_scan(model, list(o_region.intervals), model.K,
                          lattice).sigma_min
    except am.UnderdeterminedError:
        return float("nan")


@dataclass(frozen=True)
class InclusionRung:
    dict_size: int
    max_residual: float
    mean_residual: float
    witness_ok: bool


@dataclass(frozen=True)
class InclusionTable:
    rungs: tuple
    sigma_min_ref: float
    bulk_norms: tuple

    @property
    def initial_residual(self):
        return self.rungs[0].max_residual

    @property
    def plateau(self):
        return self.rungs[-1].max_residual


def run_inclusion(plan, model=None, bulk=None):
    """Residual ladder of the bulk generators against growing boundary spans.

    The witness tolerance at each rung is widened to the rung's own residual
    level: exact eta-orthogonality of the complement to the bulk vectors only
    holds in the infinite-dictionary limit, so at a rung with residual r the
    witness pairings are expected up to r.
    """
    if model is None:
        model = build_plan_model(plan)
    ps = canonical_phase_space(model)

    if bulk is None:
        bulk = bulk_generators(model, plan.v_region, plan.n_bulk,
                               seed=plan.seed)
    bulk_vecs = [am.embed_one_particle(am.one_particle_map(model, v))
                 for v in bulk]
    bulk_gens = pc.SubspaceGenerators(tuple(bulk_vecs), label="bulk")

    if plan.o_region.empty or not bulk_vecs:
        rungs = tuple(InclusionRung(s, 0.0, 0.0, True) for s in plan.ladder)
        return InclusionTable(rungs, 0.0,
                              tuple(pc.eta_norm(ps, v) for v in bulk_vecs))

    rungs = []
    for size in plan.ladder:
        fam = boundary_dictionary(model, plan.o_region, size, seed=plan.seed)
        bd_vecs = [am.embed_one_particle(am.dual_boundary_map(model, f))
                   for f in fam]
        bd_gens = pc.SubspaceGenerators(tuple(bd_vecs), label="boundary")
        probe = pc.inclusion_check(bd_gens, bulk_gens, ps, seed=plan.seed,
                                   witness_tolerance=np.inf)
        wtol = max(pc.DEFAULT_TOL.witness_tolerance,
                   2.0 * probe.max_residual)
        rep = pc.inclusion_check(bd_gens, bulk_gens, ps, seed=plan.seed,
                                 witness_tolerance=wtol)
        rungs.append(InclusionRung(size, rep.max_residual,
                                   float(np.mean(rep.per_generator)),
                                   rep.witness_ok))

    return InclusionTable(tuple(rungs), _uc_reference(model, plan.o_region),
                          tuple(pc.eta_norm(ps, v) for v in bulk_vecs))


@dataclass(frozen=True)
class WeylReport:
    dict_sizes: tuple
    distances: tuple            # ||approximant - target||_eta, full space
    compressed_distances: tuple
    errors: tuple               # max Weyl-operator error over the state set
    lipschitz: float
    r_squared: float


def _compress_directions(c_target, c_approx):
    """Orthonormal pair (u1, u2) in C^K: the target direction and the
    dominant direction of the approximation residuals."""
    n1 = np.linalg.norm(c_target)
    if n1 == 0.0:
        raise CompressionRankError("target vector vanishes")
    u1 = c_target / n1
    res = []
    for c in c_approx:
        r = c - u1 * np.vdot(u1, c)
        nr = np.linalg.norm(r)
        if nr > 1e-14 * n1:
            res.append(r / nr)
    if not res:
        raise CompressionRankError(
            "all approximants lie on the target line; nothing to compress")
    u, s, _ = np.linalg.svd(np.column_stack(res), full_matrices=False)
    u2 = u[:, 0]
    u2 = u2 - u1 * np.vdot(u1, u2)
    n2 = np.linalg.norm(u2)
    if n2 < 1e-10:
        raise CompressionRankError("residual direction degenerate with target")
    return u1, u2 / n2


def _fit_through_data(x, y):
    """Least-squares slope of y on x with intercept, plus R^2."""
    x = np.asarray(x)
    y = np.asarray(y)
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    pred = a @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), r2


def run_weyl_convergence(plan, bulk_index=0, model=None, n_max=40,
                         target_eta_norm=0.5):
    """Weyl-operator convergence along the boundary approximant ladder.

    The target bulk vector (rescaled to eta-norm target_eta_norm) and its
    eta-orthogonal boundary approximants are compressed to the complex plane
    spanned by the target and the dominant residual direction; the compressed
    pure-state Weyl operators are compared on the vacuum and a one-particle
    vector.
    """
    if model is None:
        model = build_plan_model(plan)
    ps = canonical_phase_space(model)
    bulk = bulk_generators(model, plan.v_region, plan.n_bulk, seed=plan.seed)
    c_target = am.one_particle_map(model, bulk[bulk_index]).coeffs
    w = am.embed_one_particle(c_target)
    scale = target_eta_norm / pc.eta_norm(ps, w)
    w = scale * w
    c_target = scale * c_target

    approx = []
    for size in plan.ladder:
        fam = boundary_dictionary(model, plan.o_region, size, seed=plan.seed)
        bd_vecs = [am.embed_one_particle(am.dual_boundary_map(model, f))
                   for f in fam]
        gens = pc.SubspaceGenerators(tuple(bd_vecs), label="boundary")
        p = pc.eta_projector(gens, ps)
        approx.append(p @ w)

    distances = [pc.eta_norm(ps, a - w) for a in approx]
    if distances[-1] > 0.1 * pc.eta_norm(ps, w):
        raise CompressionRankError(
            f"top-rung residual {distances[-1]:.3e} too large for the "
            "convergence experiment")

    c_approx = [am.extract_one_particle(a) for a in approx]
    u1, u2 = _compress_directions(c_target, c_approx)

    def compress(c):
        z = np.array([np.vdot(u1, c), np.vdot(u2, c)])
        return np.concatenate([z.real, z.imag])

    eye2 = np.eye(2)
    zero2 = np.zeros((2, 2))
    ps2 = pc.PhaseSpace(4, np.eye(4),
                        2.0 * np.block([[zero2, eye2], [-eye2, zero2]]))
    kd2 = pc.kahler_from_covariance(ps2)
    rep = cf.fock_rep(cf.kw_one_particle_dim(kd2), n_max)

    vac = np.zeros(rep.dim)
    vac[rep.vacuum_index] = 1.0
    one = np.zeros(rep.dim)
    one[rep.index[(1, 0)]] = 1.0

    v_lim = compress(c_target)
    v_seq = [compress(c) for c in c_approx]
    comp_dist = [pc.eta_norm(ps2, v - v_lim) for v in v_seq]
    errors = cf.strong_convergence_test(rep, kd2, ps2, v_seq, v_lim,
                                        [vac, one])

    lip, r2 = _fit_through_data(distances, errors)
    return WeylReport(tuple(plan.ladder), tuple(distances), tuple(comp_dist),
                      tuple(errors), lip, r2)


def nested_uc_family(model, t_halves, component_pairs=True, lat_step=0.01,
                     k_eff=4):
    """sigma_min of uc_scan over a nested family of boundary regions."""
    t_max = max(t_halves)
    n = int(np.ceil(2 * t_max / lat_step)) + 1
    lattice = -t_max + np.arange(n) * lat_step
    out = []
    for th in t_halves:
        ivs = [("-", -th, th)]
        if component_pairs:
            ivs.append(("+", -th, th))
        out.append(am.uc_scan(model, ivs, k_eff, lattice).sigma_min)
    return out
