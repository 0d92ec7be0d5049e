"""Covariance/symplectic linear algebra on a finite-dimensional real phase space.

A phase space carries a strictly positive symmetric form ``eta`` (the state
covariance) and an antisymmetric form ``sigma``.  From the pair one builds the
operator ``b = eta^{-1} sigma / 2``, its polar parts in the eta-geometry, and a
compatible complex structure ``j``.  Subspace geometry (projectors, inclusion
residuals) is always measured in the Hilbert norm induced by eta.
"""

from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Inputs have inconsistent dimensions or broken (anti)symmetry."""


class DegenerateCovarianceError(ValueError):
    """eta has an eigenvalue at or below the relative rank cutoff."""


class KernelParityError(ValueError):
    """ker(b) is odd-dimensional, so no anti-involution exists on it."""


class PositivityViolationError(ValueError):
    """sigma is not dominated by the covariance at the requested factor."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances for double-precision Gram computations."""

    rank_tolerance: float = 1e-10      # relative singular value cutoff
    num_tolerance: float = 1e-9        # residuals of exact matrix identities
    spectral_tolerance: float = 1e-8   # eigenvalue-of-|b| equality with 1
    witness_tolerance: float = 1e-7    # orthocomplement witness pairing
    n_witness: int = 32


DEFAULT_TOL = Tolerances()


def _as_matrix(a, d=None):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if d is not None and a.shape[0] != d:
        raise ShapeError(f"expected a {d}x{d} matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ShapeError("matrix has non-finite entries")
    return a


@dataclass(frozen=True)
class PhaseSpace:
    """Real phase space with covariance eta and (pre-)symplectic form sigma."""

    dim: int
    eta: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ShapeError("dim must be positive")
        eta = _as_matrix(self.eta, self.dim)
        sigma = _as_matrix(self.sigma, self.dim)
        scale = max(np.abs(eta).max(), 1.0)
        if np.abs(eta - eta.T).max() > DEFAULT_TOL.num_tolerance * scale:
            raise ShapeError("eta is not symmetric")
        sscale = max(np.abs(sigma).max(), 1.0)
        if np.abs(sigma + sigma.T).max() > DEFAULT_TOL.num_tolerance * sscale:
            raise ShapeError("sigma is not antisymmetric")
        object.__setattr__(self, "eta", 0.5 * (eta + eta.T))
        object.__setattr__(self, "sigma", 0.5 * (sigma - sigma.T))


@dataclass(frozen=True)
class KahlerData:
    """Polar data of b = eta^{-1} sigma / 2 and the compatible complex structure.

    The pair arrays live in eta-orthonormal coordinates: column k of
    ``pair_p``/``pair_q`` spans a j-invariant plane on which |b| acts with
    eigenvalue ``pair_lambda[k]``.  ``doubling`` flags the planes whose
    eigenvalue differs from 1 (the non-pure part).
    """

    b: np.ndarray
    b_modulus: np.ndarray
    j: np.ndarray
    pure: bool
    doubled_dim: int
    pair_p: np.ndarray = field(repr=False)
    pair_q: np.ndarray = field(repr=False)
    pair_lambda: np.ndarray = field(repr=False)
    doubling: np.ndarray = field(repr=False)
    eta_sqrt: np.ndarray = field(repr=False)
    eta_sqrt_inv: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SubspaceGenerators:
    """A finite generating family for a subspace of the phase space."""

    generators: tuple
    label: str = ""

    def __post_init__(self):
        gens = tuple(np.asarray(g, dtype=float) for g in self.generators)
        for g in gens:
            if g.ndim != 1 or not np.all(np.isfinite(g)):
                raise ShapeError("generators must be finite vectors")
        object.__setattr__(self, "generators", gens)

    def matrix(self, dim):
        """Generators as columns of a dim x n matrix."""
        if not self.generators:
            return np.zeros((dim, 0))
        m = np.column_stack(self.generators)
        if m.shape[0] != dim:
            raise ShapeError(
                f"generators of dim {m.shape[0]} in a space of dim {dim}")
        return m


@dataclass(frozen=True)
class PositivityReport:
    holds: bool
    domination_norm: float


@dataclass(frozen=True)
class InclusionReport:
    max_residual: float
    per_generator: tuple
    witness_ok: bool


def _eta_eig(ps, tol):
    w, v = np.linalg.eigh(ps.eta)
    if w[-1] <= 0.0 or w[0] <= tol.rank_tolerance * w[-1]:
        raise DegenerateCovarianceError(
            f"eta eigenvalue {w[0]:.3e} below rank cutoff "
            f"{tol.rank_tolerance * w[-1]:.3e}")
    return w, v


def _eta_sqrts(ps, tol):
    w, v = _eta_eig(ps, tol)
    s = np.sqrt(w)
    return (v * s) @ v.T, (v / s) @ v.T


def check_positivity(ps, c, tol=DEFAULT_TOL):
    """Check that sigma is dominated by c times the covariance norm.

    domination_norm is the spectral norm of eta^{-1/2} sigma eta^{-1/2};
    c = 1 corresponds to the literal Cauchy-Schwarz domination, c = 2 to
    sigma = 2 eta b with ||b|| <= 1.
    """
    _, eta_isqrt = _eta_sqrts(ps, tol)
    m = eta_isqrt @ ps.sigma @ eta_isqrt
    norm = float(np.linalg.norm(m, ord=2))
    return PositivityReport(holds=norm <= c + tol.num_tolerance,
                            domination_norm=norm)


def kahler_from_covariance(ps, tol=DEFAULT_TOL):
    """Build b, |b| and the complex structure j from (eta, sigma).

    On the eta-orthogonal complement of ker b, j is the polar isometry part
    of b.  On ker b, j pairs consecutive vectors of an eta-orthonormalized
    kernel basis (index order), which fixes an otherwise arbitrary choice.
    """
    rep = check_positivity(ps, 2.0, tol)
    if not rep.holds:
        raise PositivityViolationError(
            f"domination norm {rep.domination_norm:.6f} exceeds 2")
    d = ps.dim
    eta_sqrt, eta_isqrt = _eta_sqrts(ps, tol)
    bt = 0.5 * (eta_isqrt @ ps.sigma @ eta_isqrt)
    bt = 0.5 * (bt - bt.T)

    mu, u = np.linalg.eigh(-bt @ bt)   # symmetric PSD, ascending
    lam = np.sqrt(np.clip(mu, 0.0, None))
    lam_max = lam[-1] if d else 0.0
    kernel_cut = tol.rank_tolerance * max(lam_max, 1.0)
    in_kernel = lam <= kernel_cut

    n_kernel = int(np.sum(in_kernel))
    if n_kernel % 2 == 1:
        raise KernelParityError(f"ker b has odd dimension {n_kernel}")

    ps_cols, qs_cols, lams = [], [], []

    # kernel planes: pair consecutive kernel basis vectors, q = u_{2i}, p = u_{2i+1}
    # so that the block of j in that basis is [[0, 1], [-1, 0]]
    ker_basis = u[:, in_kernel]
    for i in range(0, n_kernel, 2):
        ps_cols.append(ker_basis[:, i + 1])
        qs_cols.append(ker_basis[:, i])
        lams.append(0.0)

    # nonzero planes: greedy pairing inside eigenspaces of |b|, descending
    nz_idx = np.nonzero(~in_kernel)[0][::-1]
    taken = np.zeros((d, 0))
    for i in nz_idx:
        cand = u[:, i]
        if taken.shape[1]:
            cand = cand - taken @ (taken.T @ cand)
        nrm = np.linalg.norm(cand)
        if nrm < 0.5:
            continue   # already covered by the partner of a previous p
        p = cand / nrm
        bp = bt @ p
        lam_i = np.linalg.norm(bp)
        q = bp / lam_i
        ps_cols.append(p)
        qs_cols.append(q)
        lams.append(float(lam_i))
        taken = np.column_stack([taken, p, q])

    pair_p = np.column_stack(ps_cols) if ps_cols else np.zeros((d, 0))
    pair_q = np.column_stack(qs_cols) if qs_cols else np.zeros((d, 0))
    pair_lambda = np.array(lams)

    jt = pair_q @ pair_p.T - pair_p @ pair_q.T
    bmod_t = (pair_p * pair_lambda) @ pair_p.T + (pair_q * pair_lambda) @ pair_q.T

    doubling = np.abs(pair_lambda - 1.0) > tol.spectral_tolerance
    doubled_dim = 2 * int(np.sum(doubling))

    return KahlerData(
        b=eta_isqrt @ bt @ eta_sqrt,
        b_modulus=eta_isqrt @ bmod_t @ eta_sqrt,
        j=eta_isqrt @ jt @ eta_sqrt,
        pure=doubled_dim == 0,
        doubled_dim=doubled_dim,
        pair_p=pair_p,
        pair_q=pair_q,
        pair_lambda=pair_lambda,
        doubling=doubling,
        eta_sqrt=eta_sqrt,
        eta_sqrt_inv=eta_isqrt,
    )


def kw_inner_product(kd, ps, v, w):
    """Hermitian inner product eta(v, w) - i eta(v, j w) on the phase space."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != (ps.dim,) or w.shape != (ps.dim,):
        raise ShapeError("vectors must match the phase space dimension")
    ew = ps.eta @ w
    return complex(v @ ew - 1j * (v @ (ps.eta @ (kd.j @ w))))


def eta_projector(gens, ps, tol=DEFAULT_TOL):
    """eta-orthogonal projector onto the span of the generators.

    Built from an SVD in eta-orthonormal coordinates; singular values below
    rank_tolerance times the largest are discarded.  Empty generator lists
    give the zero projector.
    """
    g = gens.matrix(ps.dim)
    if g.shape[1] == 0:
        return np.zeros((ps.dim, ps.dim))
    eta_sqrt, eta_isqrt = _eta_sqrts(ps, tol)
    u, s, _ = np.linalg.svd(eta_sqrt @ g, full_matrices=False)
    keep = s > tol.rank_tolerance * s[0]
    ur = u[:, keep]
    q = eta_isqrt @ ur
    return q @ (ur.T @ eta_sqrt)


def eta_norm(ps, v):
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(max(v @ (ps.eta @ v), 0.0)))


def inclusion_check(bd_gens, bulk_gens, ps, tol=DEFAULT_TOL, seed=0,
                    witness_tolerance=None):
    """Residuals of bulk generators against the eta-closure of the boundary span.

    per_generator[i] is the relative eta-norm of (1 - P_bd) applied to bulk
    generator i.  The witness check samples seeded vectors eta-orthogonal to
    the boundary span and verifies that their eta-pairing with every bulk
    generator stays below the witness tolerance.
    """
    wtol = tol.witness_tolerance if witness_tolerance is None else witness_tolerance
    p_bd = eta_projector(bd_gens, ps, tol)
    bulk = bulk_gens.matrix(ps.dim)
    if bulk.shape[1] == 0:
        return InclusionReport(0.0, (), True)

    residuals = []
    for i in range(bulk.shape[1]):
        w = bulk[:, i]
        nw = eta_norm(ps, w)
        if nw == 0.0:
            residuals.append(0.0)
            continue
        r = w - p_bd @ w
        residuals.append(eta_norm(ps, r) / nw)

    rng = np.random.default_rng(seed)
    witness_ok = True
    bulk_norms = [eta_norm(ps, bulk[:, i]) for i in range(bulk.shape[1])]
    for _ in range(tol.n_witness):
        r = rng.standard_normal(ps.dim)
        u = r - p_bd @ r
        nu = eta_norm(ps, u)
        if nu <= tol.rank_tolerance:
            continue
        pairings = np.abs(u @ (ps.eta @ bulk))
        bound = wtol * nu * np.array(bulk_norms)
        if np.any(pairings > bound + tol.rank_tolerance):
            witness_ok = False
            break

    return InclusionReport(float(max(residuals)), tuple(residuals), witness_ok)
