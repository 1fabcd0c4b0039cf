"""Closed-form two-qubit map families, kappa bounds, and kappa maximization.

Two families are provided.  The interaction family uses the commuting
generator (1/2) sum_j gamma_j s_j (x) x_j, giving a diagonal Bloch
contraction with factors (cos g2 cos g3, cos g3 cos g1, cos g1 cos g2) and
an inhomogeneous vector built from environment and cross-correlation mean
values.  The two-momentum rotation family conditions one of two spin
rotations on the x_1 eigenvalue of the second qubit, with
G(0) = (D1 + D2)/2 and G(1) = (D1 - D2)/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .basis import JointStateCoeffs, expand_state, product_basis, reconstruct_state
from .linalg import DEFAULT_TOL, dagger, kron, random_density, random_unitary
from .maps import AffineMap, BMatrix, apply_L, extract_K

I2 = np.eye(2, dtype=complex)
SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
PAULIS = np.concatenate([I2[None], SIGMA])

GOLDEN_KAPPA_BOUND = (1 + np.sqrt(5)) / 2


@dataclass(frozen=True)
class IntHamParams:
    """Three interaction angles, radians; the map is 2pi-periodic in each."""

    gamma: tuple[float, float, float]


@dataclass(frozen=True)
class Rotation:
    """Axis-angle rotation; zero axis with zero angle denotes the identity."""

    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > 1e-12 and not (norm == 0.0 and self.angle == 0.0):
            raise ValueError(f"rotation axis must be unit length, got |axis| = {norm}")

    @property
    def matrix(self) -> np.ndarray:
        """3x3 rotation matrix (Rodrigues form)."""
        n = np.asarray(self.axis, dtype=float)
        if np.linalg.norm(n) == 0.0:
            return np.eye(3)
        c, s = np.cos(self.angle), np.sin(self.angle)
        cross = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
        return c * np.eye(3) + s * cross + (1 - c) * np.outer(n, n)


@dataclass(frozen=True)
class LorentzParams:
    r1: Rotation
    r2: Rotation


def kappa_vector(k_mat: np.ndarray) -> np.ndarray:
    """Bloch components kappa_j = Tr[s_j K] of a qubit inhomogeneous part."""
    return np.einsum("jab,ba->j", SIGMA, k_mat).real


def bloch_action(amap: AffineMap) -> tuple[np.ndarray, np.ndarray]:
    """Affine action on Bloch vectors, a -> T a + kappa, for a qubit map."""
    if amap.n != 2:
        raise ValueError("Bloch action requires a qubit map")
    t_mat = np.array(
        [
            [0.5 * np.trace(SIGMA[j] @ apply_L(amap, SIGMA[k])).real for k in range(3)]
            for j in range(3)
        ]
    )
    return t_mat, kappa_vector(amap.k_mat)


def k_from_kappa(kappa) -> np.ndarray:
    """K = (1/2) sum_j kappa_j s_j."""
    return 0.5 * np.einsum("j,jab->ab", np.asarray(kappa, dtype=float), SIGMA)


def int_ham_unitary(p: IntHamParams) -> np.ndarray:
    """exp(-i/2 sum_j gamma_j s_j (x) x_j).

    The three generators commute, so the exponential is the product of the
    factor exponentials cos(g/2) - i sin(g/2) s_j (x) x_j.
    """
    u = np.eye(4, dtype=complex)
    for j, g in enumerate(p.gamma):
        u = u @ (np.cos(g / 2) * np.eye(4) - 1j * np.sin(g / 2) * kron(SIGMA[j], SIGMA[j]))
    return u


def int_ham_kappa(p: IntHamParams, corr: JointStateCoeffs) -> np.ndarray:
    """Inhomogeneous Bloch vector from the interaction angles and mean values.

    kappa_1 = <x1> sin g2 sin g3 - <s2 x3> cos g2 sin g3 + <s3 x2> sin g2 cos g3
    and cyclic; only <x_k> and the off-diagonal <s_j x_k> enter.
    """
    c = corr.coeff
    s = np.sin(p.gamma)
    co = np.cos(p.gamma)
    return np.array(
        [
            c[0, 1] * s[1] * s[2] - c[2, 3] * co[1] * s[2] + c[3, 2] * s[1] * co[2],
            c[0, 2] * s[2] * s[0] - c[3, 1] * co[2] * s[0] + c[1, 3] * s[2] * co[0],
            c[0, 3] * s[0] * s[1] - c[1, 2] * co[0] * s[1] + c[2, 1] * s[0] * co[1],
        ]
    )


def int_ham_g_ops(p: IntHamParams) -> np.ndarray:
    """Multiplication operators of the interaction unitary over the Pauli basis."""
    c = np.cos(np.asarray(p.gamma) / 2)
    s = np.sin(np.asarray(p.gamma) / 2)
    return np.array(
        [
            (c[0] * c[1] * c[2] - 1j * s[0] * s[1] * s[2]) * I2,
            (c[0] * s[1] * s[2] - 1j * s[0] * c[1] * c[2]) * SIGMA[0],
            (s[0] * c[1] * s[2] - 1j * c[0] * s[1] * c[2]) * SIGMA[1],
            (s[0] * s[1] * c[2] - 1j * c[0] * c[1] * s[2]) * SIGMA[2],
        ]
    )


def int_ham_map(p: IntHamParams, corr: JointStateCoeffs) -> AffineMap:
    """Closed-form affine map of the interaction family.

    ``corr`` supplies <x_k> and the off-diagonal <s_j x_k>; diagonal
    correlations and subsystem mean values do not affect the map and are
    ignored.
    """
    return AffineMap(
        n=2, m=2, g_ops=int_ham_g_ops(p), k_mat=k_from_kappa(int_ham_kappa(p, corr))
    )


def int_ham_b_matrix(p: IntHamParams, kappa) -> BMatrix:
    """Closed-form 4x4 B array of the interaction family.

    Rows and columns are composite (r, j) indices in the order 11, 12, 21,
    22; C_i is cos gamma_i.
    """
    c1, c2, c3 = np.cos(p.gamma)
    k1, k2, k3 = np.asarray(kappa, dtype=float)
    b = 0.5 * np.array(
        [
            [1 + k3 + c1 * c2, 0, k1 - 1j * k2, c2 * c3 + c3 * c1],
            [0, 1 + k3 - c1 * c2, c2 * c3 - c3 * c1, k1 - 1j * k2],
            [k1 + 1j * k2, c2 * c3 - c3 * c1, 1 - k3 - c1 * c2, 0],
            [c2 * c3 + c3 * c1, k1 + 1j * k2, 0, 1 - k3 + c1 * c2],
        ],
        dtype=complex,
    )
    return BMatrix(n=2, b=b)


def su2_from_rotation(axis, angle: float) -> np.ndarray:
    """2x2 unitary D = cos(a/2) 1 - i sin(a/2) axis . sigma.

    Satisfies D^dag s_j D = sum_k R_{jk} s_k with R the axis-angle rotation
    matrix; products compose as D1 D2 -> R1 @ R2.
    """
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0 and angle == 0.0:
        return I2.copy()
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"rotation axis must be unit length, got |axis| = {norm}")
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * np.einsum("j,jab->ab", n, SIGMA)


def lorentz_unitary(p: LorentzParams) -> np.ndarray:
    """U = D1 (x) (1 + x1)/2 + D2 (x) (1 - x1)/2."""
    d1 = su2_from_rotation(p.r1.axis, p.r1.angle)
    d2 = su2_from_rotation(p.r2.axis, p.r2.angle)
    plus = 0.5 * (I2 + SIGMA[0])
    minus = 0.5 * (I2 - SIGMA[0])
    return kron(d1, plus) + kron(d2, minus)


def lorentz_map(p: LorentzParams, corr: JointStateCoeffs) -> AffineMap:
    """Closed-form map of the two-momentum rotation family.

    L(Q) = (D1 Q D1^dag + D2 Q D2^dag)/2 and kappa = (R1 v - R2 v)/2 with
    v = <sigma x1>; only the three <s_j x1> mean values enter K.
    """
    d1 = su2_from_rotation(p.r1.axis, p.r1.angle)
    d2 = su2_from_rotation(p.r2.axis, p.r2.angle)
    zero = np.zeros((2, 2), dtype=complex)
    g_ops = np.array([0.5 * (d1 + d2), 0.5 * (d1 - d2), zero, zero])
    v = corr.coeff[1:, 1]
    kappa = 0.5 * (p.r1.matrix @ v - p.r2.matrix @ v)
    return AffineMap(n=2, m=2, g_ops=g_ops, k_mat=k_from_kappa(kappa))


class KappaBounds(NamedTuple):
    kappa_norm: float
    bound_a: float
    bound_b: float
    ok: bool


def kappa_bounds_check(
    u: np.ndarray, coeffs: JointStateCoeffs, tol: float = DEFAULT_TOL
) -> KappaBounds:
    """Check |kappa| <= sqrt(3 - |<sigma>|^2) and |kappa| <= 1 + |<sigma>|.

    Both bounds hold for any unitary and any two-qubit density matrix; they
    meet at |<sigma>| = (sqrt(5) - 1)/2, where each equals (1 + sqrt(5))/2.
    """
    pb = product_basis(2, 2)
    pi = reconstruct_state(coeffs, pb)
    k = extract_K(u, pi, pb, tol)
    kappa_norm = float(np.linalg.norm(kappa_vector(k)))
    a_norm = float(np.linalg.norm(coeffs.coeff[1:, 0]))
    bound_a = float(np.sqrt(max(3.0 - a_norm**2, 0.0)))
    bound_b = 1.0 + a_norm
    return KappaBounds(
        kappa_norm=kappa_norm,
        bound_a=bound_a,
        bound_b=bound_b,
        ok=kappa_norm <= min(bound_a, bound_b) + tol,
    )


class KappaSearchResult(NamedTuple):
    best_kappa_norm: float
    witness: dict


def _kappa_component_ops_int_ham(gamma: np.ndarray) -> np.ndarray:
    """Joint-space operators W_j with kappa_j = Tr[Pi W_j] for the interaction family."""
    s, c = np.sin(gamma), np.cos(gamma)
    sx = [kron(SIGMA[j], SIGMA[k]) for j in range(3) for k in range(3)]
    xi = [kron(I2, SIGMA[k]) for k in range(3)]

    def sk(j, k):
        return sx[j * 3 + k]

    return np.array(
        [
            s[1] * s[2] * xi[0] - c[1] * s[2] * sk(1, 2) + s[1] * c[2] * sk(2, 1),
            s[2] * s[0] * xi[1] - c[2] * s[0] * sk(2, 0) + s[2] * c[0] * sk(0, 2),
            s[0] * s[1] * xi[2] - c[0] * s[1] * sk(0, 1) + s[0] * c[1] * sk(1, 0),
        ]
    )


def _kappa_component_ops_lorentz(r1: Rotation, r2: Rotation) -> np.ndarray:
    diff = r1.matrix - r2.matrix
    base = np.array([kron(SIGMA[k], SIGMA[0]) for k in range(3)])
    return 0.5 * np.einsum("jk,kab->jab", diff, base)


def _kappa_component_ops_unitary(u: np.ndarray) -> np.ndarray:
    """W_j = U^dag (s_j (x) 1) U - (Tr_R[...]/2) (x) 1, so kappa_j = Tr[Pi W_j]."""
    ops = []
    for j in range(3):
        y = dagger(u) @ kron(SIGMA[j], I2) @ u
        y_s = 0.5 * y.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
        ops.append(y - kron(y_s, I2))
    return np.array(ops)


def _best_state_kappa(w_ops: np.ndarray, iters: int = 8) -> tuple[float, np.ndarray, np.ndarray]:
    """Maximize |kappa| over states for fixed component operators.

    Alternates between the best pure state for a direction u (top
    eigenvector of sum u_j W_j) and realigning u with the achieved kappa.
    Returns (|kappa|, kappa, state).
    """
    weights = np.linalg.norm(w_ops.reshape(3, -1), axis=1)
    if weights.max() < 1e-15:
        return 0.0, np.zeros(3), np.eye(4, dtype=complex) / 4
    u_dir = weights / np.linalg.norm(weights)
    best = (0.0, np.zeros(3), np.eye(4, dtype=complex) / 4)
    for _ in range(iters):
        w = np.einsum("j,jab->ab", u_dir, w_ops)
        _, vecs = np.linalg.eigh(w)
        psi = vecs[:, -1]
        pi = np.outer(psi, psi.conj())
        kappa = np.einsum("jab,ba->j", w_ops, pi).real
        norm = float(np.linalg.norm(kappa))
        if norm > best[0]:
            best = (norm, kappa, pi)
        if norm < 1e-14:
            break
        u_dir = kappa / norm
    return best


def _golden_refine(f, lo: float, hi: float, iters: int = 40) -> tuple[float, float]:
    """Golden-section maximization of a scalar function on [lo, hi]."""
    phi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def _cplx_coeffs(pi: np.ndarray) -> np.ndarray:
    """Full (4, 4) mean-value array of a two-qubit state."""
    pb = product_basis(2, 2)
    return np.einsum("abij,ji->ab", pb.mats, pi).real


def kappa_search(
    family: str, trials: int, seed: int = 0, state_iters: int = 8
) -> KappaSearchResult:
    """Randomized search with local refinement for the largest |kappa|.

    For each parameter draw the best state is found exactly (top
    eigenvector of the kappa component operators along a direction,
    alternated to convergence); for the closed-form families the best
    parameters are then refined by coordinate golden-section search.
    Deterministic for a given seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    best_norm = -1.0
    witness: dict = {}

    if family == "int_ham":
        best_gamma = None
        for _ in range(trials):
            gamma = rng.uniform(0, 2 * np.pi, size=3)
            norm, kappa, pi = _best_state_kappa(_kappa_component_ops_int_ham(gamma), state_iters)
            if norm > best_norm:
                best_norm, best_gamma = norm, gamma
                witness = {"gamma": gamma.tolist(), "kappa": kappa.tolist(), "coeff": _cplx_coeffs(pi).tolist()}
        gamma = np.array(best_gamma)
        for axis in range(3):
            def eval_axis(x, axis=axis):
                g = gamma.copy()
                g[axis] = x
                return _best_state_kappa(_kappa_component_ops_int_ham(g), state_iters)[0]

            x, val = _golden_refine(eval_axis, gamma[axis] - 0.5, gamma[axis] + 0.5)
            if val > best_norm:
                gamma[axis] = x
                best_norm = val
        norm, kappa, pi = _best_state_kappa(_kappa_component_ops_int_ham(gamma), state_iters)
        witness = {"gamma": gamma.tolist(), "kappa": kappa.tolist(), "coeff": _cplx_coeffs(pi).tolist()}
        best_norm = norm

    elif family == "lorentz":
        best_pair = None
        for _ in range(trials):
            r1 = _random_rotation(rng)
            r2 = _random_rotation(rng)
            norm, kappa, pi = _best_state_kappa(_kappa_component_ops_lorentz(r1, r2), state_iters)
            if norm > best_norm:
                best_norm, best_pair = norm, (r1, r2)
                witness = _lorentz_witness(r1, r2, kappa, pi)
        r1, r2 = best_pair

        def eval_angle(t):
            r2t = Rotation(axis=r2.axis, angle=t)
            return _best_state_kappa(_kappa_component_ops_lorentz(r1, r2t), state_iters)[0]

        t, val = _golden_refine(eval_angle, 0.0, 2 * np.pi)
        if val > best_norm:
            r2 = Rotation(axis=r2.axis, angle=float(t))
            best_norm, kappa, pi = _best_state_kappa(
                _kappa_component_ops_lorentz(r1, r2), state_iters
            )
            witness = _lorentz_witness(r1, r2, kappa, pi)

    elif family == "random_unitary":
        for _ in range(trials):
            u = random_unitary(4, rng)
            norm, kappa, pi = _best_state_kappa(_kappa_component_ops_unitary(u), state_iters)
            if norm > best_norm:
                best_norm = norm
                witness = {
                    "unitary": np.stack([u.real, u.imag], axis=-1).tolist(),
                    "kappa": kappa.tolist(),
                    "coeff": _cplx_coeffs(pi).tolist(),
                }
    else:
        raise ValueError(f"unknown family {family!r}")

    return KappaSearchResult(best_kappa_norm=float(best_norm), witness=witness)


def _random_rotation(rng: np.random.Generator) -> Rotation:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return Rotation(axis=tuple(axis), angle=float(rng.uniform(0, 2 * np.pi)))


def _lorentz_witness(r1: Rotation, r2: Rotation, kappa: np.ndarray, pi: np.ndarray) -> dict:
    return {
        "r1": {"axis": list(r1.axis), "angle": r1.angle},
        "r2": {"axis": list(r2.axis), "angle": r2.angle},
        "kappa": kappa.tolist(),
        "coeff": _cplx_coeffs(pi).tolist(),
    }


def random_valid_pair(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random (unitary, two-qubit density matrix) pair for bound sweeps."""
    return random_unitary(4, rng), random_density(4, rng)


class BoundsSweep(NamedTuple):
    checked: int
    ok: int
    max_kappa_norm: float
    min_margin: float


def bounds_sweep(family: str, trials: int, seed: int = 0, tol: float = DEFAULT_TOL) -> BoundsSweep:
    """Check the two kappa bounds over random family draws and random states."""
    rng = np.random.default_rng(seed)
    pb = product_basis(2, 2)
    ok = 0
    max_norm = 0.0
    min_margin = np.inf
    for _ in range(trials):
        if family == "int_ham":
            u = int_ham_unitary(IntHamParams(gamma=tuple(rng.uniform(0, 2 * np.pi, 3))))
        elif family == "lorentz":
            u = lorentz_unitary(LorentzParams(r1=_random_rotation(rng), r2=_random_rotation(rng)))
        elif family == "random_unitary":
            u = random_unitary(4, rng)
        else:
            raise ValueError(f"unknown family {family!r}")
        coeffs = expand_state(random_density(4, rng), pb)
        res = kappa_bounds_check(u, coeffs, tol)
        ok += int(res.ok)
        max_norm = max(max_norm, res.kappa_norm)
        min_margin = min(min_margin, min(res.bound_a, res.bound_b) - res.kappa_norm)
    return BoundsSweep(checked=trials, ok=ok, max_kappa_norm=max_norm, min_margin=float(min_margin))
