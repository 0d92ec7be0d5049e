"""Truncated bosonic Fock representation.

The one-particle space is C^m; the Fock space is truncated at total
occupation n_max, so CCR identities hold exactly only on states whose total
occupation stays below the cutoff.  Weyl operators are dense matrix
exponentials of Segal field operators.
"""

from dataclasses import dataclass, field
from itertools import product
from math import comb

import numpy as np
from scipy.linalg import expm

from .phase_core import ShapeError

WEYL_NORM_CAP = 2.0     # coherent displacement the default cutoff can support
EXP_TOLERANCE = 1e-10


class CutoffUnreliableError(ValueError):
    """The requested displacement exceeds what the occupation cutoff supports."""


@dataclass(frozen=True)
class FockRep:
    """Occupation-number basis with total occupation <= n_max."""

    one_particle_dim: int
    n_max: int
    basis: tuple
    index: dict = field(repr=False)

    @property
    def dim(self):
        return len(self.basis)

    @property
    def vacuum_index(self):
        return self.index[(0,) * self.one_particle_dim]


def fock_rep(m, n_max):
    if m < 1 or n_max < 1:
        raise ShapeError("need one_particle_dim >= 1 and n_max >= 1")
    basis = tuple(n for n in product(range(n_max + 1), repeat=m)
                  if sum(n) <= n_max)
    assert len(basis) == comb(m + n_max, m)
    index = {n: i for i, n in enumerate(basis)}
    return FockRep(m, n_max, basis, index)


@dataclass(frozen=True)
class FockOperator:
    rep: FockRep
    entries: np.ndarray

    def adjoint(self):
        return FockOperator(self.rep, self.entries.conj().T)

    def apply(self, psi):
        return self.entries @ np.asarray(psi, dtype=complex)


def _check_vector(rep, h):
    h = np.asarray(h, dtype=complex)
    if h.shape != (rep.one_particle_dim,):
        raise ShapeError(
            f"expected a vector of length {rep.one_particle_dim}, got {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ShapeError("vector has non-finite entries")
    return h


def annihilation(rep, h):
    """a(h) = sum_i conj(h_i) a_i, lowering total occupation by one."""
    h = _check_vector(rep, h)
    a = np.zeros((rep.dim, rep.dim), dtype=complex)
    for col, occ in enumerate(rep.basis):
        for i, n_i in enumerate(occ):
            if n_i == 0 or h[i] == 0:
                continue
            lowered = occ[:i] + (n_i - 1,) + occ[i + 1:]
            a[rep.index[lowered], col] += np.sqrt(n_i) * np.conj(h[i])
    return FockOperator(rep, a)


def creation(rep, h):
    return annihilation(rep, h).adjoint()


def segal_field(rep, h):
    """phi(h) = (a*(h) + a(h)) / sqrt(2), self-adjoint on the truncation."""
    a = annihilation(rep, h).entries
    return FockOperator(rep, (a + a.conj().T) / np.sqrt(2.0))


def weyl_operator(rep, h, norm_cap=WEYL_NORM_CAP):
    """W(h) = exp(i phi(h)) by dense matrix exponential."""
    h = _check_vector(rep, h)
    nrm = float(np.linalg.norm(h))
    if nrm > norm_cap:
        raise CutoffUnreliableError(
            f"||h|| = {nrm:.3f} exceeds the displacement cap {norm_cap}")
    return FockOperator(rep, expm(1j * segal_field(rep, h).entries))


def kw_one_particle_dim(kd):
    """Complex dimension of the doubled one-particle space for kw_field."""
    return kd.pair_p.shape[1] + int(np.sum(kd.doubling))


def kw_embedding(kd, v):
    """Complex one-particle vector representing the real phase-space vector v.

    The first block carries sqrt(1+|b|) on the j-holomorphic coordinates; the
    second block doubles the spectral planes of |b| with eigenvalue != 1,
    weighted by sqrt(1-|b|).
    """
    v = np.asarray(v, dtype=float)
    vt = kd.eta_sqrt @ v
    z = kd.pair_p.T @ vt + 1j * (kd.pair_q.T @ vt)
    lam = kd.pair_lambda
    main = np.sqrt(1.0 + lam) * np.conj(z)
    extra = np.sqrt(np.clip(1.0 - lam[kd.doubling], 0.0, None)) * z[kd.doubling]
    return np.concatenate([main, extra])


def kw_field(rep, kd, ps, v):
    """Field operator of the quasi-free state with covariance eta.

    Satisfies [kw_field(v), kw_field(w)] = i (v . sigma w) on occupation
    levels below the cutoff.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (ps.dim,):
        raise ShapeError("vector must match the phase space dimension")
    m = kw_one_particle_dim(kd)
    if rep.one_particle_dim != m:
        raise ShapeError(
            f"rep has one-particle dim {rep.one_particle_dim}, need {m}")
    return segal_field(rep, kw_embedding(kd, v))


@dataclass(frozen=True)
class ExpectationReport:
    lhs: complex
    rhs: float
    abs_error: float


def quasifree_expectation_check(rep, kd, ps, v, norm_cap=WEYL_NORM_CAP):
    """Compare the truncated vacuum expectation of exp(i phi(v)) with the
    closed Gaussian form exp(-eta(v, v) / 2)."""
    h = kw_embedding(kd, np.asarray(v, dtype=float))
    w = weyl_operator(rep, h, norm_cap=norm_cap)
    i0 = rep.vacuum_index
    lhs = complex(w.entries[i0, i0])
    rhs = float(np.exp(-0.5 * (np.asarray(v) @ (ps.eta @ np.asarray(v)))))
    return ExpectationReport(lhs, rhs, abs(lhs - rhs))


def strong_convergence_test(rep, kd, ps, v_seq, v_lim, psi_set,
                            norm_cap=WEYL_NORM_CAP):
    """Vector-norm errors of exp(i phi(v_n)) against exp(i phi(v_lim)).

    Returns one error per sequence element: the maximum over the supplied
    Fock vectors of the norm difference of the two Weyl operators applied to
    the vector.
    """
    w_lim = weyl_operator(rep, kw_embedding(kd, v_lim), norm_cap=norm_cap)
    psis = [np.asarray(p, dtype=complex) for p in psi_set]
    for p in psis:
        if p.shape != (rep.dim,):
            raise ShapeError("Fock vectors must match the representation dim")
    errors = []
    for v in v_seq:
        w_n = weyl_operator(rep, kw_embedding(kd, v), norm_cap=norm_cap)
        diff = w_n.entries - w_lim.entries
        errors.append(max(float(np.linalg.norm(diff @ p)) for p in psis))
    return errors
