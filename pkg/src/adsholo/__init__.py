"""Numerical laboratory for boundary/bulk observable inclusion on the AdS2 strip.

Subpackages:
    phase_core  -- covariance/symplectic linear algebra and subspace inclusion
    ccr_fock    -- truncated bosonic Fock representation and Weyl operators
    ads_model   -- mode basis, propagators and boundary maps on the strip
    holography  -- end-to-end inclusion and Weyl convergence experiments
    cli         -- batch front end
"""

__version__ = "0.1.0"
