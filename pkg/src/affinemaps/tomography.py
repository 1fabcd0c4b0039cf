"""Reconstruction of the affine map from input/output state pairs.

Because the map is affine in the state, finite differences between probe
states that differ along a single basis axis recover the homogeneous
images F'_alpha exactly at any step size, and the image of the identity
follows from any single output.  Probe states are restricted to the
compatibility domain of the declared coefficient spec.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import JointStateCoeffs, build_basis
from .domains import (
    DomainQuery,
    InfeasibleError,
    is_compatible_full,
    partial_feasibility,
    probe_state,
)
from .linalg import DEFAULT_TOL
from .maps import AffineMap, apply_affine


@dataclass
class ProbeSet:
    """Designed probe states and (once evaluated) their evolved outputs.

    ``probes`` holds the base Bloch-type vector first, then one singly
    perturbed vector per axis; ``deltas`` records the signed step actually
    used along each axis.
    """

    spec: JointStateCoeffs
    base: np.ndarray
    deltas: np.ndarray
    probes: np.ndarray
    pairs: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.spec.n


def _admissible(spec: JointStateCoeffs, probe: np.ndarray, tol: float) -> bool:
    q = DomainQuery(spec=spec, probe=probe)
    test = spec.with_probe(probe)
    if test.fully_fixed:
        return is_compatible_full(q, tol)
    status, _ = partial_feasibility(test, tol)
    return status == "feasible"


def design_probes(
    spec: JointStateCoeffs,
    base: np.ndarray,
    eps: float = 0.05,
    tol: float = DEFAULT_TOL,
    max_halvings: int = 20,
) -> ProbeSet:
    """Base state plus one single-axis perturbation per coefficient axis.

    Each perturbation tries base + eps e_alpha, then base - eps e_alpha,
    halving eps up to ``max_halvings`` times until the probe lies in the
    compatibility domain.  Raises InfeasibleError if the base is outside
    the domain or some axis admits no feasible step (empty interior along
    that axis).
    """
    base = np.asarray(base, dtype=float)
    n_axes = spec.n**2 - 1
    if base.shape != (n_axes,):
        raise ValueError(f"base must have length {n_axes}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not _admissible(spec, base, tol):
        raise InfeasibleError(f"base probe {base.tolist()} is outside the compatibility domain")
    probes = [base]
    deltas = np.zeros(n_axes)
    for alpha in range(n_axes):
        step = eps
        found = False
        for _ in range(max_halvings + 1):
            for sign in (+1.0, -1.0):
                cand = base.copy()
                cand[alpha] += sign * step
                if _admissible(spec, cand, tol):
                    probes.append(cand)
                    deltas[alpha] = sign * step
                    found = True
                    break
            if found:
                break
            step /= 2.0
        if not found:
            raise InfeasibleError(
                f"no feasible perturbation along axis {alpha + 1} at minimum step {step:.3e}"
            )
    return ProbeSet(spec=spec, base=base, deltas=deltas, probes=np.array(probes))


def evaluate_probes(probes: ProbeSet, evolve: Callable[[np.ndarray], np.ndarray]) -> ProbeSet:
    """Fill in output states by calling the evolution oracle on each probe."""
    probes.pairs = [(p.copy(), np.asarray(evolve(p), dtype=complex)) for p in probes.probes]
    return probes


def map_oracle(amap: AffineMap) -> Callable[[np.ndarray], np.ndarray]:
    """Evolution oracle backed by a known affine map."""

    def evolve(probe: np.ndarray) -> np.ndarray:
        return apply_affine(amap, probe_state(probe, amap.n))

    return evolve


@dataclass
class MapReconstruction:
    """Affine map recovered from pairs: image of identity and basis images."""

    n: int
    one_prime: np.ndarray
    f_primes: np.ndarray
    residual: float

    @property
    def k_mat(self) -> np.ndarray:
        return (self.one_prime - np.eye(self.n)) / self.n

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Evolved state from the recovered basis images."""
        basis = build_basis(self.n)
        coeffs = np.einsum("aij,ji->a", basis.mats[1:], rho).real
        out = self.one_prime * np.trace(rho) / self.n
        out = out + np.einsum("a,aij->ij", coeffs, self.f_primes) / self.n
        return out


def reconstruct_map(probes: ProbeSet, fit_tol: float = 1e-8) -> MapReconstruction:
    """Solve the affine relation N rho_out = 1' + sum_alpha c_alpha F'_alpha.

    Uses the exact triangular structure for designed probes and a
    least-squares fit for arbitrary (over-determined) pair lists; raises if
    the residual exceeds ``fit_tol`` (the pairs are then not consistent
    with a single affine map).
    """
    if not probes.pairs:
        raise ValueError("probe set has no evaluated pairs; call evaluate_probes first")
    n = probes.n
    n_axes = n**2 - 1
    if len(probes.pairs) < n_axes + 1:
        raise ValueError(f"need at least {n_axes + 1} pairs, got {len(probes.pairs)}")
    design = np.array([np.concatenate([[1.0], c]) for c, _ in probes.pairs])
    targets = np.array([n * out.reshape(-1) for _, out in probes.pairs])
    sol, *_ = np.linalg.lstsq(design, targets, rcond=None)
    residual = float(np.abs(design @ sol - targets).max())
    if residual > fit_tol:
        raise ValueError(
            f"pairs are inconsistent with one affine map (residual {residual:.3e})"
        )
    mats = sol.reshape(n_axes + 1, n, n)
    return MapReconstruction(n=n, one_prime=mats[0], f_primes=mats[1:], residual=residual)


@dataclass
class ValidationReport:
    max_dev_one_prime: float
    max_dev_f_primes: float
    max_dev_k: float
    tol: float

    @property
    def max_dev(self) -> float:
        return max(self.max_dev_one_prime, self.max_dev_f_primes, self.max_dev_k)

    @property
    def passed(self) -> bool:
        return self.max_dev <= self.tol

    def to_dict(self) -> dict:
        return {
            "max_dev_one_prime": self.max_dev_one_prime,
            "max_dev_f_primes": self.max_dev_f_primes,
            "max_dev_k": self.max_dev_k,
            "max_dev": self.max_dev,
            "tol": self.tol,
            "passed": self.passed,
        }


def validate_reconstruction(
    recon: MapReconstruction, truth: AffineMap, tol: float = DEFAULT_TOL
) -> ValidationReport:
    """Entrywise deviations of a reconstruction from a ground-truth map."""
    if recon.n != truth.n:
        raise ValueError("dimension mismatch between reconstruction and truth")
    return ValidationReport(
        max_dev_one_prime=float(np.abs(recon.one_prime - truth.one_prime).max()),
        max_dev_f_primes=float(np.abs(recon.f_primes - truth.f_primes).max()),
        max_dev_k=float(np.abs(recon.k_mat - truth.k_mat).max()),
        tol=tol,
    )


def pairs_to_json(pairs: list[tuple[np.ndarray, np.ndarray]]) -> str:
    """JSON exchange format: [{"rho_in_coeffs": [...], "rho_out": [[[re, im], ...]]}]."""
    items = []
    for coeffs, out in pairs:
        items.append(
            {
                "rho_in_coeffs": np.asarray(coeffs, dtype=float).tolist(),
                "rho_out": np.stack([out.real, out.imag], axis=-1).tolist(),
            }
        )
    return json.dumps(items)


def pairs_from_json(text: str) -> list[tuple[np.ndarray, np.ndarray]]:
    items = json.loads(text)
    pairs = []
    for item in items:
        arr = np.asarray(item["rho_out"], dtype=float)
        pairs.append(
            (np.asarray(item["rho_in_coeffs"], dtype=float), arr[..., 0] + 1j * arr[..., 1])
        )
    return pairs


def probe_set_from_pairs(n: int, pairs: list[tuple[np.ndarray, np.ndarray]]) -> ProbeSet:
    """Wrap externally produced pairs for reconstruction (no admissibility check)."""
    spec = JointStateCoeffs.blank(n, 2)
    base = pairs[0][0] if pairs else np.zeros(n**2 - 1)
    return ProbeSet(
        spec=spec,
        base=np.asarray(base, dtype=float),
        deltas=np.zeros(n**2 - 1),
        probes=np.array([c for c, _ in pairs]),
        pairs=[(np.asarray(c, dtype=float), o) for c, o in pairs],
    )
