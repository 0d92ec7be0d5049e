"""Classical Klein-Gordon field theory on the AdS2 strip.

The strip is x in (-pi/2, pi/2) with metric (dt^2 - dx^2)/cos^2 x and
boundary-defining function z = cos x.  Separation of variables reduces the
field equation to the singular Sturm-Liouville problem

    A phi = -phi'' + (nu^2 - 1/4) sec^2(x) phi + W(x) phi = omega^2 phi

with the Dirichlet branch phi ~ beta cos^{nu_+}(x) at both walls,
nu_+ = 1/2 + nu.  Without perturbation the eigenpairs are Gegenbauer:
omega_k = nu_+ + k, phi_k = N_k cos^{nu_+}(x) C_k^{(nu_+)}(sin x); modes are
sign-fixed so that the boundary amplitude at x = -pi/2 is positive.

All L^2(M, g) pairings carry the measure cos^{-2}(x) dt dx; test functions
are densitized (multiplied by sec^2 x) once at ingestion.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_gegenbauer, gammaln, roots_jacobi

from .phase_core import ShapeError


class BFBoundError(ValueError):
    """nu <= 0 violates the Breitenlohner-Freedman bound."""


class InvalidPerturbationError(ValueError):
    """Perturbation support touches the boundary margin."""


class MarginError(ValueError):
    """Bulk test function support violates the interior margin."""


class UnderdeterminedError(ValueError):
    """Fewer boundary samples than truncated solution dimensions."""


@dataclass(frozen=True)
class ModelTolerances:
    quad_tolerance: float = 1e-8
    eig_tolerance: float = 1e-6
    pde_tolerance: float = 1e-5
    quotient_tolerance: float = 1e-6
    dual_tolerance: float = 1e-7
    trace_tolerance: float = 1e-5
    support_margin: int = 3        # grid cells kept clear of x = +-pi/2


DEFAULT_MODEL_TOL = ModelTolerances()


@dataclass(frozen=True)
class Mode:
    k: int
    omega: float
    values: np.ndarray
    beta_plus: float
    beta_minus: float


@dataclass(frozen=True)
class AdsStripModel:
    nu: float
    nu_plus: float
    mass: float
    K: int
    x: np.ndarray                 # interior quadrature nodes
    wq: np.ndarray                # weights for plain dx integration
    perturbation: np.ndarray | None
    modes: tuple
    tol: ModelTolerances
    # unperturbed normalization data and, for perturbed models, the
    # coefficient matrix expanding eigenmodes in the unperturbed basis
    _n_basis: int = field(repr=False, default=0)
    _coeff: np.ndarray | None = field(repr=False, default=None)

    @property
    def omegas(self):
        return np.array([m.omega for m in self.modes])

    @property
    def beta_minus(self):
        return np.array([m.beta_minus for m in self.modes])

    @property
    def beta_plus(self):
        return np.array([m.beta_plus for m in self.modes])

    @property
    def mode_values(self):
        return np.vstack([m.values for m in self.modes])

    def betas(self, component):
        if component == "-":
            return self.beta_minus
        if component == "+":
            return self.beta_plus
        raise ShapeError(f"unknown boundary component {component!r}")

    def eval_modes(self, x):
        """Mode values phi_k(x) at arbitrary interior points, shape (K, len(x))."""
        x = np.asarray(x, dtype=float)
        if self._coeff is None:
            return _gegenbauer_modes(self.nu_plus, self.K, x)
        basis = _gegenbauer_modes(self.nu_plus, self._n_basis, x)
        return self._coeff.T @ basis

    def max_omega(self):
        return float(self.modes[-1].omega)

    def default_t_step(self):
        # uniform time quadrature resolving the highest retained frequency
        return 0.2 / self.max_omega()


def _gegenbauer_norm_consts(lam, K):
    """1/sqrt of the Gegenbauer weighted L^2 norms, via log-gamma."""
    k = np.arange(K)
    log_h = (np.log(np.pi) + (1.0 - 2.0 * lam) * np.log(2.0)
             + gammaln(k + 2.0 * lam) - np.log(k + lam)
             - 2.0 * gammaln(lam) - gammaln(k + 1.0))
    return np.exp(-0.5 * log_h)


def _gegenbauer_modes(lam, K, x):
    """Orthonormal eigenfunctions of the unperturbed operator, (K, len(x)).

    Sign convention: positive boundary amplitude at x = -pi/2.
    """
    s = np.sin(x)
    weight = np.cos(x) ** lam
    nk = _gegenbauer_norm_consts(lam, K)
    out = np.empty((K, x.size))
    for k in range(K):
        out[k] = ((-1.0) ** k) * nk[k] * weight * eval_gegenbauer(k, lam, s)
    return out


def _boundary_amplitudes(lam, K):
    """beta_k^- (positive) and beta_k^+ = (-1)^k beta_k^-."""
    k = np.arange(K)
    log_c1 = gammaln(k + 2.0 * lam) - gammaln(2.0 * lam) - gammaln(k + 1.0)
    beta_minus = _gegenbauer_norm_consts(lam, K) * np.exp(log_c1)
    beta_plus = ((-1.0) ** k) * beta_minus
    return beta_minus, beta_plus


def _jacobi_grid(nu_plus, N):
    """Interior nodes clustered at the walls, with weights for plain dx
    integration that integrate cos^{2 nu_+}(x) * polynomial(sin x) exactly."""
    a = nu_plus - 0.5
    s, wj = roots_jacobi(N, a, a)
    x = np.arcsin(s)
    wq = wj * (1.0 - s * s) ** (-nu_plus)
    return x, wq


def fd_mode_frequencies(nu, K, N=2000, perturbation=None):
    """Finite-difference oracle for the first K frequencies.

    Conservative cell-centered scheme for the weighted form
    -(w psi')' + (nu_+^2 + W) w psi = omega^2 w psi, w = cos^{2 nu_+},
    with zero-flux walls (w vanishes there exactly).  Three dyadic grids
    eliminate the h^2 and h^{2+2nu} boundary-layer error terms.
    """
    if nu <= 0.0:
        raise BFBoundError(f"nu = {nu} violates the bound nu > 0")
    nup = 0.5 + nu

    def raw(n):
        h = np.pi / n
        x = -np.pi / 2 + (np.arange(n) + 0.5) * h
        xm = -np.pi / 2 + np.arange(n + 1) * h
        w = np.cos(x) ** (2 * nup)
        wm = np.cos(xm) ** (2 * nup)
        wm[0] = 0.0
        wm[-1] = 0.0
        pot = nup ** 2
        if perturbation is not None:
            pot = pot + perturbation(x)
        diag = (wm[:-1] + wm[1:]) / (h * h * w) + pot
        off = -wm[1:-1] / (h * h * np.sqrt(w[:-1] * w[1:]))
        vals = eigh_tridiagonal(diag, off, select="i",
                                select_range=(0, K - 1))[0]
        return np.sqrt(vals)

    ns = np.array([N // 4, N // 2, N])
    h = np.pi / ns
    p = 2.0 + 2.0 * nu
    a = np.vstack([np.ones(3), h ** 2, h ** p]).T
    vals = np.vstack([raw(n) for n in ns])
    out = np.empty(K)
    for k in range(K):
        coef, *_ = np.linalg.lstsq(a, vals[:, k], rcond=None)
        out[k] = coef[0]
    return out


def build_model(nu, K, N=512, perturbation=None, n_basis=None,
                validate=True, tol=DEFAULT_MODEL_TOL):
    """Assemble the mode basis of the strip model.

    perturbation, if given, is a smooth callable W(x) supported away from the
    walls; the perturbed eigenproblem is solved by Galerkin projection on
    n_basis unperturbed modes (default max(2K, K + 16)).
    """
    if nu <= 0.0:
        raise BFBoundError(f"nu = {nu} violates the bound nu > 0")
    if K < 1:
        raise ShapeError("K must be >= 1")
    if N < 4 * K:
        raise ShapeError(f"need N >= 4K (N = {N}, K = {K})")

    nu_plus = 0.5 + nu
    mass = nu * nu - 0.25
    x, wq = _jacobi_grid(nu_plus, N)

    pert_samples = None
    coeff = None
    nb = 0

    if perturbation is None:
        vals = _gegenbauer_modes(nu_plus, K, x)
        omegas = nu_plus + np.arange(K)
        bm, bp = _boundary_amplitudes(nu_plus, K)
    else:
        wvals = np.asarray(perturbation(x), dtype=float)
        m = tol.support_margin
        if np.any(wvals[:m] != 0.0) or np.any(wvals[-m:] != 0.0):
            raise InvalidPerturbationError(
                "perturbation support touches the boundary margin")
        pert_samples = wvals
        nb = n_basis if n_basis is not None else max(2 * K, K + 16)
        if N < 4 * nb:
            raise ShapeError(f"need N >= 4 n_basis (N = {N}, n_basis = {nb})")
        basis = _gegenbauer_modes(nu_plus, nb, x)
        om0 = nu_plus + np.arange(nb)
        pot = (basis * (wq * wvals)) @ basis.T
        a = np.diag(om0 ** 2) + 0.5 * (pot + pot.T)
        evals, evecs = np.linalg.eigh(a)
        coeff = evecs[:, :K]
        omegas = np.sqrt(evals[:K])
        bm0, bp0 = _boundary_amplitudes(nu_plus, nb)
        bm = coeff.T @ bm0
        bp = coeff.T @ bp0
        # fix the per-mode sign so the amplitude at x = -pi/2 is positive
        sign = np.where(np.abs(bm) > 1e-12, np.sign(bm),
                        np.sign(coeff[np.argmax(np.abs(coeff), axis=0),
                                      np.arange(K)]))
        coeff = coeff * sign
        bm = bm * sign
        bp = bp * sign
        vals = coeff.T @ basis

    # normalize by quadrature (a no-op up to roundoff for the closed form)
    norms = np.sqrt(np.einsum("kn,n,kn->k", vals, wq, vals))
    vals = vals / norms[:, None]
    bm = bm / norms
    bp = bp / norms
    if coeff is not None:
        coeff = coeff / norms[None, :]

    gram = (vals * wq) @ vals.T
    ortho_err = float(np.abs(gram - np.eye(K)).max())
    if ortho_err > tol.quad_tolerance:
        raise ShapeError(f"mode orthonormality residual {ortho_err:.3e} "
                         f"exceeds {tol.quad_tolerance:.1e}")

    if validate:
        k_check = min(K, 30)
        fd = fd_mode_frequencies(nu, k_check, 2000, perturbation=perturbation)
        err = float(np.abs(fd - omegas[:k_check]).max())
        if err > tol.eig_tolerance:
            raise ShapeError(
                f"finite-difference cross-validation failed: {err:.3e}")

    modes = tuple(Mode(k, float(omegas[k]), vals[k], float(bp[k]), float(bm[k]))
                  for k in range(K))
    return AdsStripModel(nu, nu_plus, mass, K, x, wq, pert_samples, modes, tol,
                         _n_basis=nb, _coeff=coeff)


# ----------------------------------------------------------------------
# test functions

@dataclass(frozen=True)
class BulkTestFunction:
    """Samples of an interior test function on a (t, x) product grid."""

    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray            # shape (nt, nx)
    densitized: bool
    x_weights: np.ndarray
    support_t: tuple
    support_x: tuple

    @property
    def t_step(self):
        return float(self.t_grid[1] - self.t_grid[0])


@dataclass(frozen=True)
class BoundaryTestFunction:
    """Samples f(t_j) of a compactly supported profile on one boundary
    component."""

    component: str
    t_grid: np.ndarray
    samples: np.ndarray
    support: tuple                # union of (t0, t1) intervals

    @property
    def t_step(self):
        return float(self.t_grid[1] - self.t_grid[0])


@dataclass(frozen=True)
class OneParticleVector:
    coeffs: np.ndarray
    origin: str = "manual"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ShapeError("coefficients must be a finite complex vector")
        object.__setattr__(self, "coeffs", c)


def _check_margin(model, x_lo, x_hi):
    m = model.tol.support_margin
    if x_lo < model.x[m] or x_hi > model.x[-(m + 1)]:
        raise MarginError(
            f"support [{x_lo:.4f}, {x_hi:.4f}] closer than {m} grid cells "
            "to the boundary")


def _trapezoid_weights(grid):
    w = np.full(grid.size, grid[1] - grid[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def mollifier(u):
    """Standard C-infinity bump: exp(1 - 1/(1-u^2)) on |u| < 1, else 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
    return out


def bulk_bump(model, t_center, x_center, t_width, x_width, t_step=None,
              amplitude=1.0, t_modulation=0.0, n_sigma=8.5):
    """Densitized Gaussian bump source truncated at n_sigma widths.

    The truncation at n_sigma = 8.5 leaves a relative tail below 1e-15, so
    the sample array is smooth to double precision.
    """
    t0 = t_center - n_sigma * t_width
    t1 = t_center + n_sigma * t_width
    x0 = x_center - n_sigma * x_width
    x1 = x_center + n_sigma * x_width
    _check_margin(model, x0, x1)
    if t_step is None:
        t_step = min(model.default_t_step(), t_width / 6.0)
    nt = int(np.ceil((t1 - t0) / t_step)) + 1
    t = t0 + np.arange(nt) * t_step
    xg = model.x
    prof_t = np.exp(-0.5 * ((t - t_center) / t_width) ** 2)
    if t_modulation:
        prof_t = prof_t * np.cos(t_modulation * (t - t_center))
    prof_x = np.exp(-0.5 * ((xg - x_center) / x_width) ** 2)
    prof_x[np.abs(xg - x_center) > n_sigma * x_width] = 0.0
    prof_t[np.abs(t - t_center) > n_sigma * t_width] = 0.0
    values = amplitude * np.outer(prof_t, prof_x) / np.cos(xg) ** 2
    return BulkTestFunction(t, xg, values, True, model.wq,
                            (float(t0), float(t1)), (float(x0), float(x1)))


def bulk_from_samples(model, t_grid, values, x_grid=None, densitized=True,
                      support_x=None):
    """Wrap raw samples; x defaults to the model grid (and its weights)."""
    t_grid = np.asarray(t_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if x_grid is None:
        x_grid = model.x
        xw = model.wq
    else:
        x_grid = np.asarray(x_grid, dtype=float)
        xw = _trapezoid_weights(x_grid)
    if values.shape != (t_grid.size, x_grid.size):
        raise ShapeError("values must have shape (nt, nx)")
    if support_x is None:
        support_x = (float(x_grid[0]), float(x_grid[-1]))
    _check_margin(model, *support_x)
    return BulkTestFunction(t_grid, x_grid, values, densitized, xw,
                            (float(t_grid[0]), float(t_grid[-1])),
                            tuple(support_x))


def boundary_bump(model, component, t_center, width, t_step=None,
                  modulation=0.0, phase="cos", amplitude=1.0):
    """Compactly supported mollifier profile on a boundary component,
    optionally cosine/sine modulated."""
    if component not in ("+", "-"):
        raise ShapeError(f"unknown boundary component {component!r}")
    if t_step is None:
        t_step = min(0.15 / model.max_omega(), width / 40.0)
    t0 = t_center - width
    t1 = t_center + width
    nt = int(np.ceil((t1 - t0) / t_step)) + 1
    t = t0 + np.arange(nt) * t_step
    f = amplitude * mollifier((t - t_center) / width)
    if modulation:
        carrier = np.cos if phase == "cos" else np.sin
        f = f * carrier(modulation * (t - t_center))
    return BoundaryTestFunction(component, t, f,
                                ((float(t0), float(t1)),))


# ----------------------------------------------------------------------
# operations

def _densitized(v):
    if v.densitized:
        return v.values
    return v.values / np.cos(v.x_grid) ** 2


def _mode_time_series(model, v):
    """vtilde_k(t_j) = integral phi_k(x) vtilde(t_j, x) dx, shape (nt, K)."""
    if v.x_grid is model.x or (v.x_grid.shape == model.x.shape
                               and np.array_equal(v.x_grid, model.x)):
        m = model.mode_values
    else:
        m = model.eval_modes(v.x_grid)
    return (_densitized(v) * v.x_weights) @ m.T


def one_particle_map(model, v):
    """Mode coefficients (2 omega_k)^{-1/2} iint phi_k e^{-i omega_k t} vtilde."""
    vt = _mode_time_series(model, v)                       # (nt, K)
    om = model.omegas
    wt = _trapezoid_weights(v.t_grid)
    phases = np.exp(-1j * np.outer(v.t_grid, om))          # (nt, K)
    coeffs = (phases * vt * wt[:, None]).sum(axis=0) / np.sqrt(2.0 * om)
    return OneParticleVector(coeffs, origin="bulk")


def ground_state_forms(model, test_set):
    """Covariance and symplectic form of the ground state on the real
    2K-dimensional mode-coefficient space.

    In the canonical real basis (Re c, Im c) the covariance is the identity
    and the symplectic form is 2 Omega; the Gram of the supplied test set is
    checked for degeneracy and a warning issued if it is rank deficient.
    """
    import warnings

    from .phase_core import PhaseSpace, DEFAULT_TOL

    if not test_set:
        raise ShapeError("test_set must be non-empty")
    coeffs = [one_particle_map(model, v).coeffs for v in test_set]
    gram = np.array([[np.vdot(a, b) for b in coeffs] for a in coeffs])
    sv = np.linalg.svd(gram, compute_uv=False)
    if sv[-1] <= DEFAULT_TOL.rank_tolerance * max(sv[0], 1e-300):
        warnings.warn("test-set Gram is numerically rank deficient",
                      stacklevel=2)
    k = model.K
    eye = np.eye(k)
    zero = np.zeros((k, k))
    omega_block = np.block([[zero, eye], [-eye, zero]])
    return PhaseSpace(2 * k, np.eye(2 * k), 2.0 * omega_block)


def embed_one_particle(c):
    """Real 2K-vector (Re c, Im c) of a mode-coefficient vector."""
    c = np.asarray(c.coeffs if isinstance(c, OneParticleVector) else c,
                   dtype=complex)
    return np.concatenate([c.real, c.imag])


def extract_one_particle(v):
    """Inverse of embed_one_particle."""
    v = np.asarray(v, dtype=float)
    k = v.size // 2
    return v[:k] + 1j * v[k:]


@dataclass(frozen=True)
class GridFunction:
    t: np.ndarray
    x: np.ndarray
    values: np.ndarray


def _aligned_indices(v, t_out):
    dt = v.t_step
    idx = np.round((t_out - v.t_grid[0]) / dt)
    if np.abs(t_out - (v.t_grid[0] + idx * dt)).max() > 1e-9 * dt:
        raise ShapeError("output times must lie on the source time lattice")
    return idx.astype(int)


def propagator_apply(model, v, which, t_out=None, x_out=None):
    """Retarded or advanced Dirichlet solution of P u = v, mode by mode.

    Output times must lie on the (extension of the) source time lattice;
    they default to the source grid itself.  Values are returned on the
    model x grid unless x_out is given.
    """
    if which not in ("retarded", "advanced"):
        raise ShapeError(f"unknown propagator kind {which!r}")
    _check_margin(model, *v.support_x)
    if t_out is None:
        t_out = v.t_grid
    t_out = np.asarray(t_out, dtype=float)
    idx = _aligned_indices(v, t_out)

    om = model.omegas
    vt = _mode_time_series(model, v)                       # (nt, K)
    t_src = v.t_grid
    cos_s = np.cos(np.outer(t_src, om)) * vt
    sin_s = np.sin(np.outer(t_src, om)) * vt
    c_cum = cumulative_simpson(cos_s, dx=v.t_step, axis=0, initial=0.0)
    s_cum = cumulative_simpson(sin_s, dx=v.t_step, axis=0, initial=0.0)
    c_full = c_cum[-1]
    s_full = s_cum[-1]

    nt_src = t_src.size
    u_modes = np.empty((t_out.size, model.K))
    for j, (t, n) in enumerate(zip(t_out, idx)):
        if which == "retarded":
            if n <= 0:
                c, s = 0.0, 0.0
            elif n >= nt_src - 1:
                c, s = c_full, s_full
            else:
                c, s = c_cum[n], s_cum[n]
            u_modes[j] = (np.sin(om * t) * c - np.cos(om * t) * s) / om
        else:
            if n <= 0:
                c, s = c_full, s_full
            elif n >= nt_src - 1:
                c, s = 0.0, 0.0
            else:
                c, s = c_full - c_cum[n], s_full - s_cum[n]
            u_modes[j] = (np.cos(om * t) * s - np.sin(om * t) * c) / om

    if x_out is None:
        return GridFunction(t_out, model.x, u_modes @ model.mode_values)
    x_out = np.asarray(x_out, dtype=float)
    return GridFunction(t_out, x_out, u_modes @ model.eval_modes(x_out))


def pauli_jordan_apply(model, v, t_out, x=None):
    """G v = (retarded - advanced) v, evaluated in closed form from the full
    time integrals (valid at arbitrary output points)."""
    om = model.omegas
    vt = _mode_time_series(model, v)
    wt = _trapezoid_weights(v.t_grid)
    c_full = (np.cos(np.outer(v.t_grid, om)) * vt * wt[:, None]).sum(axis=0)
    s_full = (np.sin(np.outer(v.t_grid, om)) * vt * wt[:, None]).sum(axis=0)
    t_out = np.asarray(t_out, dtype=float)
    u_modes = (np.sin(np.outer(t_out, om)) * c_full
               - np.cos(np.outer(t_out, om)) * s_full) / om
    xg = model.x if x is None else np.asarray(x, dtype=float)
    return GridFunction(t_out, xg, u_modes @ model.eval_modes(xg))


def symplectic_form(model, v1, v2):
    """(v1 | G v2)_{L^2(M, g)} by double quadrature on v1's grid."""
    _check_margin(model, *v1.support_x)
    _check_margin(model, *v2.support_x)
    gv2 = pauli_jordan_apply(model, v2, v1.t_grid, x=v1.x_grid)
    wt = _trapezoid_weights(v1.t_grid)
    inner_x = (_densitized(v1) * gv2.values * v1.x_weights).sum(axis=1)
    return float((inner_x * wt).sum())


def boundary_trace(model, coeffs, component, t_grid):
    """Rescaled boundary values of the solution representative of coeffs."""
    c = coeffs.coeffs if isinstance(coeffs, OneParticleVector) else \
        np.asarray(coeffs, dtype=complex)
    if c.shape != (model.K,):
        raise ShapeError(f"expected {model.K} coefficients, got {c.shape}")
    om = model.omegas
    amp = model.betas(component) / np.sqrt(2.0 * om) * c
    t_grid = np.asarray(t_grid, dtype=float)
    return np.real(np.exp(-1j * np.outer(t_grid, om)) @ amp)


def solution_representative(model, coeffs, t_grid, x=None):
    """Re sum_k (2 omega_k)^{-1/2} phi_k(x) e^{-i omega_k t} c_k."""
    c = coeffs.coeffs if isinstance(coeffs, OneParticleVector) else \
        np.asarray(coeffs, dtype=complex)
    om = model.omegas
    xg = model.x if x is None else np.asarray(x, dtype=float)
    m = model.eval_modes(xg)
    t_grid = np.asarray(t_grid, dtype=float)
    amp = np.exp(-1j * np.outer(t_grid, om)) * (c / np.sqrt(2.0 * om))
    return np.real(amp @ m)


def dual_boundary_map(model, f):
    """Mode coefficients of the boundary smearing f.

    Uses the same e^{-i omega t} frequency convention as one_particle_map,
    so these are the limits of bulk coefficients for sources concentrating
    at the boundary; the smeared trace of a solution representative is
    recovered through the real bilinear pairing Re sum_k d_k c_k."""
    om = model.omegas
    if f.samples.size == 0 or not np.any(f.samples):
        return OneParticleVector(np.zeros(model.K, dtype=complex),
                                 origin="boundary")
    wt = _trapezoid_weights(f.t_grid)
    fhat = (np.exp(-1j * np.outer(om, f.t_grid)) * (f.samples * wt)).sum(axis=1)
    coeffs = model.betas(f.component) / np.sqrt(2.0 * om) * fhat
    return OneParticleVector(coeffs, origin="boundary")


@dataclass(frozen=True)
class UcScanReport:
    sigma_min: float
    singular_values: tuple


def uc_scan(model, o_intervals, k_eff, t_lattice):
    """Singular values of the truncated solution -> boundary-sample map.

    o_intervals is a list of (component, t0, t1); samples are the lattice
    times falling inside the intervals, weighted by sqrt of the lattice
    step so nested regions give nested row sets.
    """
    if k_eff < 1 or k_eff > model.K:
        raise ShapeError(f"need 1 <= k_eff <= K, got {k_eff}")
    t_lattice = np.asarray(t_lattice, dtype=float)
    om = model.omegas[:k_eff]
    scale = 1.0 / np.sqrt(2.0 * om)
    dt = float(t_lattice[1] - t_lattice[0]) if t_lattice.size > 1 else 1.0

    rows = []
    for component, t0, t1 in o_intervals:
        beta = model.betas(component)[:k_eff]
        mask = (t_lattice >= t0) & (t_lattice <= t1)
        ts = t_lattice[mask]
        if ts.size == 0:
            continue
        phase = np.outer(ts, om)
        block = np.hstack([np.cos(phase) * (beta * scale),
                           np.sin(phase) * (beta * scale)])
        rows.append(np.sqrt(dt) * block)

    if not rows:
        return UcScanReport(0.0, ())
    a = np.vstack(rows)
    if a.shape[0] < 2 * k_eff:
        raise UnderdeterminedError(
            f"{a.shape[0]} samples for {2 * k_eff} solution dimensions")
    sv = np.linalg.svd(a, compute_uv=False)
    return UcScanReport(float(sv[-1]), tuple(float(s) for s in sv))


def export_mode_table(model):
    """Rows (k, omega, beta_minus, beta_plus) for CSV export."""
    return [(m.k, m.omega, m.beta_minus, m.beta_plus) for m in model.modes]
