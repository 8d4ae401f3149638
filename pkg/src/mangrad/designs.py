"""Finite unitary sets and unitary t-design verification.

Builds the single-qubit Clifford group (24 phase classes, determinant
normalized to 1) and checks the t-design conditions: the t-th moment
operator against the Haar moment, commutant dimensions of the tensor-square
and conjugation representations, and the remove-one-conjugate span property
of seed-operator orbits. For t = 2 the Haar moment operator is the exact
orthogonal projector onto the span of identity and swap, so no Monte-Carlo
integration enters the verdicts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, UsageError
from .linalg import (
    SIGMA_X,
    SIGMA_Z,
    check_hermitian,
    check_unitary,
    frobenius_norm,
    traceless_hermitian_basis,
)

_RANK_REL_TOL = 1e-6
_MOMENT_SIZE_CAP = 4096


@dataclass(frozen=True)
class FiniteUnitarySet:
    """A finite list of n x n unitaries, each validated on construction."""

    n: int
    elements: tuple
    name: str = ""

    def __post_init__(self):
        if len(self.elements) == 0:
            raise UsageError("a unitary set must be nonempty")
        for u in self.elements:
            m = check_unitary(u)
            if m.shape != (self.n, self.n):
                raise UsageError(f"element shape {m.shape} does not match n={self.n}")

    def __len__(self) -> int:
        return len(self.elements)

    def closed_under_multiplication(self, tol: float = 1e-9) -> bool:
        """True when products stay in the set up to global phase."""
        keys = {_phase_canonical_key(u, self.n) for u in self.elements}
        for a in self.elements:
            for b in self.elements:
                if _phase_canonical_key(a @ b, self.n) not in keys:
                    return False
        return True


def _phase_canonical_key(u: np.ndarray, n: int, decimals: int = 9) -> tuple:
    """Hashable key identifying u modulo a global phase.

    The phase is fixed against the first entry whose magnitude exceeds half
    the maximum; picking the plain argmax would flip between equal-magnitude
    entries under rounding noise.
    """
    flat = u.reshape(-1)
    mags = np.abs(flat)
    idx = int(np.argmax(mags > 0.5 * mags.max()))
    pivot = flat[idx]
    canon = flat * (pivot.conjugate() / abs(pivot))
    return tuple(np.round(canon.real, decimals)) + tuple(np.round(canon.imag, decimals))


def _det_normalized(u: np.ndarray, n: int) -> np.ndarray:
    """Scale by a global phase so the determinant becomes exactly 1 numerically."""
    d = complex(np.linalg.det(u))
    return u * complex(np.exp(-1j * np.angle(d) / n))


def clifford_1q() -> FiniteUnitarySet:
    """The 24 single-qubit Clifford classes as determinant-1 representatives.

    Generated by closing {H, S} under multiplication modulo global phase;
    every element permutes the signed Pauli operators under conjugation.
    """
    h = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
    s = np.array([[1.0, 0.0], [0.0, 1.0j]], dtype=complex)
    gens = [np.eye(2, dtype=complex), h, s]
    classes: dict[tuple, np.ndarray] = {}
    frontier = []
    for g in gens:
        key = _phase_canonical_key(g, 2)
        if key not in classes:
            classes[key] = g
            frontier.append(g)
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens[1:]:
                for prod in (u @ g, g @ u):
                    key = _phase_canonical_key(prod, 2)
                    if key not in classes:
                        classes[key] = prod
                        nxt.append(prod)
        frontier = nxt
    reps = [_det_normalized(classes[k], 2) for k in sorted(classes.keys())]
    return FiniteUnitarySet(n=2, elements=tuple(reps), name="clifford_1q")


def moment_operator(uset: FiniteUnitarySet, t: int) -> np.ndarray:
    """Average of U^{(x) t} tensor conj(U)^{(x) t} over the set."""
    if t not in (1, 2):
        raise UsageError("moment operator supports t in {1, 2}")
    size = uset.n ** (2 * t)
    if size > _MOMENT_SIZE_CAP:
        raise CapabilityError(f"moment operator size {size} exceeds the cap {_MOMENT_SIZE_CAP}")
    acc = np.zeros((size, size), dtype=complex)
    for u in uset.elements:
        m = np.asarray(u, dtype=complex)
        ut = m
        for _ in range(t - 1):
            ut = np.kron(ut, m)
        acc += np.kron(ut, ut.conj())
    return acc / len(uset)


def _swap_matrix(n: int) -> np.ndarray:
    sw = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            sw[i * n + j, j * n + i] = 1.0
    return sw


def haar_moment_operator(n: int, t: int = 2) -> np.ndarray:
    """Haar t-th moment operator, exactly.

    For t = 2 this is the orthogonal projector (on vectorized n^2 x n^2
    matrices) onto the invariant span of identity and swap, obtained by
    orthonormalizing {I, SWAP} under the Frobenius inner product; for t = 1
    it projects onto the span of the identity.
    """
    if t == 1:
        v = np.eye(n, dtype=complex).reshape(-1) / math.sqrt(n)
        return np.outer(v, v.conj())
    if t != 2:
        raise UsageError("haar moment operator supports t in {1, 2}")
    size = n * n
    ident = np.eye(size, dtype=complex)
    swap = _swap_matrix(n)
    b1 = ident / math.sqrt(size)
    resid = swap - (np.trace(swap) / size) * ident
    b2 = resid / frobenius_norm(resid)
    v1 = b1.reshape(-1)
    v2 = b2.reshape(-1)
    return np.outer(v1, v1.conj()) + np.outer(v2, v2.conj())


def commutant_dimension(uset: FiniteUnitarySet, rep: str) -> int:
    """Dimension of {Z : R_g Z = Z R_g for all g} for a matrix representation.

    ``rep`` is "tensor_square" (R = U (x) U) or "conjugation"
    (R = U (x) conj(U), the matrix of X -> U X U^H on vectorized X).
    Computed as the nullity of the stacked commutator system.
    """
    if rep == "tensor_square":
        mats = [np.kron(u, u) for u in uset.elements]
    elif rep == "conjugation":
        mats = [np.kron(u, np.conj(u)) for u in uset.elements]
    else:
        raise UsageError(f"unknown representation {rep!r}")
    d = mats[0].shape[0]
    if d * d > _MOMENT_SIZE_CAP * _MOMENT_SIZE_CAP:
        raise CapabilityError("commutant system too large")
    eye = np.eye(d)
    blocks = [np.kron(r, eye) - np.kron(eye, r.T) for r in mats]
    stacked = np.concatenate(blocks, axis=0)
    svals = np.linalg.svd(stacked, compute_uv=False)
    cutoff = _RANK_REL_TOL * svals[0] if svals[0] > 0 else 0.0
    rank = int(np.sum(svals > cutoff))
    return d * d - rank


def leave_one_out_span(uset: FiniteUnitarySet, seed_h) -> tuple[int, float]:
    """Span ranks of the conjugate orbit of a seed with one element removed.

    Returns (minimum rank over removals, ||sum of conjugates||_F). For a
    2-design the removal-stable rank is the full n^2 - 1 and the sum
    vanishes.
    """
    seed_h = check_hermitian(seed_h, tol=1e-10)
    if frobenius_norm(seed_h) == 0.0:
        raise UsageError("seed matrix must be nonzero")
    if abs(np.trace(seed_h)) > 1e-10 * frobenius_norm(seed_h):
        raise UsageError("seed matrix must be traceless")
    n = uset.n
    basis = traceless_hermitian_basis(n)
    conjugates = [u @ seed_h @ np.asarray(u).conj().T for u in uset.elements]
    coords = np.array([[np.real(np.sum(np.conj(b) * c)) for b in basis] for c in conjugates])
    total = np.sum(conjugates, axis=0)
    min_rank = None
    for g0 in range(len(uset)):
        sub = np.delete(coords, g0, axis=0)
        if sub.shape[0] == 0:
            rank = 0
        else:
            svals = np.linalg.svd(sub, compute_uv=False)
            cutoff = _RANK_REL_TOL * svals[0] if svals[0] > 0 else 0.0
            rank = int(np.sum(svals > cutoff))
        min_rank = rank if min_rank is None else min(min_rank, rank)
    return int(min_rank), float(frobenius_norm(total))


@dataclass(frozen=True)
class DesignReport:
    """Verification outcome for one finite unitary set."""

    name: str
    n: int
    size: int
    t: int
    moment_deviation: float
    commutant_dim: int
    conj_commutant_dim: int
    leave_one_out_min_rank: int
    sum_conjugates_norm: float
    passes: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "size": self.size,
            "t": self.t,
            "moment_deviation": self.moment_deviation,
            "commutant_dim": self.commutant_dim,
            "conj_commutant_dim": self.conj_commutant_dim,
            "leave_one_out_min_rank": self.leave_one_out_min_rank,
            "sum_conjugates_norm": self.sum_conjugates_norm,
            "passes": self.passes,
        }


def default_seed_h(n: int) -> np.ndarray:
    """diag(1, -1, 0, ...): a simple traceless Hermitian seed."""
    d = np.zeros(n)
    d[0] = 1.0
    d[1] = -1.0
    return np.diag(d).astype(complex)


def verify_design(uset: FiniteUnitarySet, t: int = 2, seed_h=None) -> DesignReport:
    """Full t-design verification; passes iff the moment operator matches Haar
    to 1e-10 and (for t = 2) the tensor-square commutant is 2-dimensional."""
    if seed_h is None:
        seed_h = default_seed_h(uset.n)
    deviation = float(frobenius_norm(moment_operator(uset, t) - haar_moment_operator(uset.n, t)))
    comm = commutant_dimension(uset, "tensor_square")
    conj_comm = commutant_dimension(uset, "conjugation")
    min_rank, sum_norm = leave_one_out_span(uset, seed_h)
    passes = deviation <= 1e-10 and (t != 2 or comm == 2)
    return DesignReport(
        name=uset.name,
        n=uset.n,
        size=len(uset),
        t=t,
        moment_deviation=deviation,
        commutant_dim=comm,
        conj_commutant_dim=conj_comm,
        leave_one_out_min_rank=min_rank,
        sum_conjugates_norm=sum_norm,
        passes=passes,
    )


def unitary_set_to_dict(uset: FiniteUnitarySet) -> dict:
    return {
        "n": uset.n,
        "elements": [
            [[[float(e.real), float(e.imag)] for e in row] for row in np.asarray(u)]
            for u in uset.elements
        ],
    }


def unitary_set_from_dict(data: dict, name: str = "") -> FiniteUnitarySet:
    try:
        n = int(data["n"])
        raw = data["elements"]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed unitary-set payload: {exc}") from exc
    elements = []
    for mat in raw:
        m = np.array([[complex(e[0], e[1]) for e in row] for row in mat])
        elements.append(m)
    return FiniteUnitarySet(n=n, elements=tuple(elements), name=name)


def load_unitary_set(path) -> FiniteUnitarySet:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return unitary_set_from_dict(data, name=str(path))


def save_unitary_set(uset: FiniteUnitarySet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(unitary_set_to_dict(uset), fh, indent=2)
        fh.write("\n")


def pauli_1q() -> FiniteUnitarySet:
    """The 1-qubit Pauli classes {I, iX, iY, iZ}: a 1-design that is not a 2-design."""
    i2 = np.eye(2, dtype=complex)
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
    elements = (i2, 1j * SIGMA_X, 1j * sy, 1j * SIGMA_Z)
    return FiniteUnitarySet(n=2, elements=elements, name="pauli_1q")
