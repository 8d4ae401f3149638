"""Central numerical tolerances.

Functions that enforce one of these accept an explicit ``tol`` argument so
callers can tighten or relax a check locally; the module constants are the
package-wide defaults.
"""

# Relative symmetry defect allowed when validating structured matrices.
HERMITIAN_SYM = 1e-12
SKEW_SYM = 1e-12
TRACELESS = 1e-12

# ||U^H U - I||_F allowed for matrices claimed unitary.
UNITARY = 1e-10

# Relative reconstruction residual of the Hermitian eigensolver.
EIG_RESIDUAL = 1e-10

# Tangency defect allowed for tangent vectors (relative).
TANGENT = 1e-10

# Unit-norm defect for sampled directions.
UNIT_NORM = 1e-12

# Idempotence defect of tangent projections.
IDEMPOTENT = 1e-12

# ||[A, W]||_F <= CRITICAL_COMMUTATOR_REL * ||A||_F counts as a critical point.
CRITICAL_COMMUTATOR_REL = 1e-8

# Additive slack on the per-step descent certificate.
DESCENT_CERT_SLACK = 1e-10

# Relative slack on cost monotonicity along a trajectory.
MONOTONE_SLACK = 1e-12
