"""Compatibility and positivity domain membership, feasibility, and sampling.

The compatibility domain of a map is the set of subsystem Bloch-type
vectors that extend to a positive joint state with the map's fixed
environment/correlation coefficients.  When some coefficients are left
free, membership becomes a convex feasibility problem between the affine
set of coefficient-constrained Hermitian matrices and the PSD cone, solved
here by alternating projections.  The positivity domain is the set of
subsystem states whose image under the affine map is positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .basis import JointStateCoeffs, ProductBasis, build_basis, product_basis, reconstruct_state
from .linalg import DEFAULT_TOL, is_psd
from .maps import AffineMap, apply_L
from .qubit2 import bloch_action

STALL_ITERS = 200
STALL_REL = 1e-6
DEFAULT_MAX_ITER = 10_000


class InfeasibleError(Exception):
    """A required domain membership could not be satisfied."""


@dataclass
class DomainQuery:
    """A membership question: fixed spec coefficients plus a probe vector."""

    spec: JointStateCoeffs
    probe: np.ndarray
    amap: AffineMap | None = None


def _basis_for(spec: JointStateCoeffs) -> ProductBasis:
    return product_basis(spec.n, spec.m)


def is_compatible_full(q: DomainQuery, tol: float = DEFAULT_TOL) -> bool:
    """PSD test of the fully specified joint state after probe substitution."""
    spec = q.spec.with_probe(q.probe)
    if not spec.fully_fixed:
        raise ValueError("spec has free coefficients; use is_compatible_partial")
    pi = reconstruct_state(spec, _basis_for(spec))
    return is_psd(pi, tol)


def _fixed_norm_exceeds(spec: JointStateCoeffs, tol: float) -> bool:
    """Necessary purity bound: sum of fixed squared coefficients <= NM - 1."""
    fixed = ~spec.free
    fixed[0, 0] = False
    total = float((spec.coeff[fixed] ** 2).sum())
    if total > spec.n * spec.m - 1 + 10 * tol:
        return True
    marg = ~spec.free[1:, 0]
    if float((spec.coeff[1:, 0][marg] ** 2).sum()) > spec.n - 1 + 10 * tol:
        return True
    env = ~spec.free[0, 1:]
    return float((spec.coeff[0, 1:][env] ** 2).sum()) > spec.m - 1 + 10 * tol


def _alternating_projections(
    start_coeffs: np.ndarray,
    free: np.ndarray,
    pb: ProductBasis,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched alternating projections between the coefficient-affine set
    and the PSD cone.

    ``start_coeffs`` (batch, n^2, m^2) must lie on the affine set (fixed
    entries at their values, free entries at a starting guess).  Returns
    (status, witness) where status is +1 feasible, -1 infeasible (distance
    stalled above 10 tol for 200 consecutive iterations), 0 unknown, and
    witness holds the PSD iterate for feasible entries.
    """
    batch = start_coeffs.shape[0]
    d = pb.dim
    coeffs = start_coeffs.copy()
    status = np.zeros(batch, dtype=int)
    decided_at_psd = np.zeros((batch, d, d), dtype=complex)
    prev_dist = np.full(batch, np.inf)
    stall = np.zeros(batch, dtype=int)
    flat = pb.mats.reshape(-1, d, d)

    for _ in range(max_iter):
        active = status == 0
        if not active.any():
            break
        idx = np.where(active)[0]
        mats = np.einsum("bx,xij->bij", coeffs[idx].reshape(len(idx), -1), flat) / d
        w, v = np.linalg.eigh(mats)
        dist = np.sqrt((np.minimum(w, 0.0) ** 2).sum(axis=-1))
        psd = np.einsum("bik,bk,bjk->bij", v, np.clip(w, 0.0, None), v.conj())

        feas = dist <= tol
        decrease = prev_dist[idx] - dist
        stalled = (decrease < STALL_REL * np.maximum(dist, tol)) & (dist > 10 * tol)
        stall[idx] = np.where(stalled, stall[idx] + 1, 0)
        prev_dist[idx] = dist
        infeas = (stall[idx] >= STALL_ITERS) & ~feas

        if feas.any():
            hit = idx[feas]
            status[hit] = 1
            decided_at_psd[hit] = psd[feas]
        if infeas.any():
            status[idx[infeas]] = -1

        cont = ~feas & ~infeas
        if cont.any():
            sub = idx[cont]
            raw = np.einsum("xji,bij->bx", flat, psd[cont]).real.reshape(
                len(sub), pb.n**2, pb.m**2
            )
            coeffs[sub] = np.where(free, raw, coeffs[sub])
    return status, decided_at_psd


def partial_feasibility(
    spec: JointStateCoeffs,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[str, np.ndarray | None]:
    """Feasibility of a partially specified joint state, with witness.

    Free coefficients start at zero; returns ("feasible", Pi) with a PSD
    completion, ("infeasible", None) when the projection distance stalls,
    or ("unknown", None) at iteration exhaustion.
    """
    if _fixed_norm_exceeds(spec, tol):
        return "infeasible", None
    pb = _basis_for(spec)
    start = spec.coeff.copy()
    start[spec.free] = 0.0
    status, witness = _alternating_projections(
        start[None], spec.free, pb, tol, max_iter
    )
    if status[0] == 1:
        return "feasible", witness[0]
    return ("infeasible", None) if status[0] == -1 else ("unknown", None)


def is_compatible_partial(
    q: DomainQuery, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> str:
    """Tri-state compatibility for specs with free coefficients.

    Degenerates to the full test when the spec is fully fixed after probe
    substitution.
    """
    spec = q.spec.with_probe(q.probe)
    if spec.fully_fixed:
        return "feasible" if is_compatible_full(q, tol) else "infeasible"
    status, _ = partial_feasibility(spec, tol, max_iter)
    return status


def probe_state(probe: np.ndarray, n: int) -> np.ndarray:
    """Subsystem state (1/N)(1 + sum probe_alpha F_alpha) for a probe vector."""
    basis = build_basis(n)
    probe = np.asarray(probe, dtype=float)
    if probe.shape != (n**2 - 1,):
        raise ValueError(f"probe must have length {n**2 - 1}")
    return (np.eye(n, dtype=complex) + np.einsum("a,aij->ij", probe, basis.mats[1:])) / n


def is_in_positivity_domain(
    amap: AffineMap, probe: np.ndarray, tol: float = DEFAULT_TOL
) -> bool:
    """True iff the map sends the probe's state to a positive matrix.

    The probe must itself define a PSD state; boundary cases within tol are
    counted as inside (domains are closed).
    """
    rho = probe_state(probe, amap.n)
    if not is_psd(rho, tol):
        raise ValueError("probe does not define a positive state")
    return is_psd(apply_L(amap, rho) + amap.k_mat, tol)


SECTION_AXES = {"p1p2": (0, 1), "p1p3": (0, 2), "p2p3": (1, 2)}


def _section_grid(section: str, resolution: int) -> np.ndarray:
    axes = SECTION_AXES.get(section)
    if axes is None:
        raise ValueError(f"unknown section {section!r}; expected one of {sorted(SECTION_AXES)}")
    line = np.linspace(-1.0, 1.0, resolution)
    probes = []
    for x in line:
        for y in line:
            p = np.zeros(3)
            p[axes[0]], p[axes[1]] = x, y
            if x * x + y * y <= 1.0 + 1e-12:
                probes.append(p)
    return np.array(probes)


def _fibonacci_shells(resolution: int) -> np.ndarray:
    """Deterministic ball grid: Fibonacci spirals on concentric shells."""
    shells = max(1, resolution // 4)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    pts = [np.zeros(3)]
    for s in range(1, shells + 1):
        r = s / shells
        count = resolution
        i = np.arange(count)
        z = 1.0 - 2.0 * (i + 0.5) / count
        radial = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        theta = golden * i
        pts.append(np.column_stack([r * radial * np.cos(theta), r * radial * np.sin(theta), r * z]).reshape(-1, 3))
    return np.vstack([np.atleast_2d(p) for p in pts])


def _random_ball(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < count:
        cand = rng.uniform(-1.0, 1.0, size=(count, 3))
        pts.extend(cand[(cand**2).sum(axis=1) <= 1.0])
    return np.array(pts[:count])


@dataclass
class DomainSample:
    """Labeled probe cloud: compat in {1, 0, -1} (in/out/unknown), pos in {1, 0}."""

    probes: np.ndarray
    compat: np.ndarray
    pos: np.ndarray
    section: str | None
    region: str
    resolution: int
    seed: int
    meta: dict = field(default_factory=dict)

    def write_csv(self, path) -> None:
        k = self.probes.shape[1]
        header = ",".join(f"a{i + 1}" for i in range(k)) + ",compat,pos"
        lines = [header]
        for p, c, s in zip(self.probes, self.compat, self.pos):
            coords = ",".join(f"{x:.9g}" for x in p)
            lines.append(f"{coords},{int(c)},{int(s)}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def sidecar_dict(self, spec: JointStateCoeffs, map_ref: str | None = None) -> dict:
        return {
            "spec": spec.to_json_dict(),
            "map": map_ref,
            "seed": self.seed,
            "resolution": self.resolution,
            "section": self.section,
            "region": self.region,
            **self.meta,
        }

    def write_sidecar(self, path, spec: JointStateCoeffs, map_ref: str | None = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.sidecar_dict(spec, map_ref), fh, indent=1)
            fh.write("\n")


def sample_domain(
    spec: JointStateCoeffs,
    amap: AffineMap | None = None,
    region: str = "grid",
    section: str | None = None,
    resolution: int = 101,
    count: int | None = None,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> DomainSample:
    """Label probes in the unit ball with compatibility and positivity flags.

    Grid sections are uniform in the chosen coordinate plane; volume grids
    use Fibonacci-spiral shells; random mode draws uniformly from the ball
    with the given seed.  Fully fixed specs use the direct PSD test; specs
    with free coefficients run the alternating-projection solver (compat
    -1 marks an undecided probe).  Without a map the pos column is 1.
    """
    if spec.n != 2:
        raise ValueError("domain sampling is implemented for qubit subsystems")
    if region == "grid":
        probes = _section_grid(section, resolution) if section else _fibonacci_shells(resolution)
    elif region == "random":
        n_pts = count if count is not None else resolution**2
        if n_pts <= 0:
            raise ValueError("count must be positive")
        probes = _random_ball(n_pts, seed)
    else:
        raise ValueError(f"region must be 'grid' or 'random', got {region!r}")
    if probes.size == 0:
        raise ValueError("no probes generated")

    pb = _basis_for(spec)
    batch = probes.shape[0]
    coeff = np.broadcast_to(spec.coeff, (batch,) + spec.coeff.shape).copy()
    coeff[:, 1:, 0] = probes
    free = spec.free.copy()
    free[1:, 0] = False

    if not free.any():
        d = pb.dim
        mats = np.einsum("bx,xij->bij", coeff.reshape(batch, -1), pb.mats.reshape(-1, d, d)) / d
        wmin = np.linalg.eigvalsh(mats)[:, 0]
        compat = (wmin >= -tol).astype(int)
    else:
        start = coeff.copy()
        start[:, free] = 0.0
        status, _ = _alternating_projections(start, free, pb, tol, max_iter)
        compat = np.where(status == 1, 1, np.where(status == -1, 0, -1))

    if amap is not None:
        rhos = np.array([probe_state(p, 2) for p in probes])
        outs = np.einsum("nij,bjk,nlk->bil", amap.g_ops, rhos, amap.g_ops.conj()) + amap.k_mat
        pos = (np.linalg.eigvalsh(outs)[:, 0] >= -tol).astype(int)
    else:
        pos = np.ones(batch, dtype=int)

    return DomainSample(
        probes=probes,
        compat=compat,
        pos=pos,
        section=section,
        region=region,
        resolution=resolution,
        seed=seed,
    )


def image_of_ball(
    amap: AffineMap, section: str, resolution: int = 256
) -> tuple[np.ndarray, np.ndarray]:
    """Image of the unit circle of a section plane under the Bloch action.

    Returns (inputs, outputs), each (resolution, 3); qubit maps only.
    """
    if amap.n != 2:
        raise ValueError("image_of_ball requires a qubit map")
    axes = SECTION_AXES.get(section)
    if axes is None:
        raise ValueError(f"unknown section {section!r}; expected one of {sorted(SECTION_AXES)}")
    t_mat, kappa = bloch_action(amap)
    theta = 2 * np.pi * np.arange(resolution) / resolution
    inputs = np.zeros((resolution, 3))
    inputs[:, axes[0]] = np.cos(theta)
    inputs[:, axes[1]] = np.sin(theta)
    outputs = inputs @ t_mat.T + kappa
    return inputs, outputs
