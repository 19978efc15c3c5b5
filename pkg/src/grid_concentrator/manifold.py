"""Power-flow manifold map, tangent-step residuals, and distance bounds.

The AC power-flow manifold in complex coordinates is the graph of the
quadratic map psi(u) = diag(u) * conj(Y u) from voltages to injections. A
tangent step h from a base point (u, psi(u)) lands at

    (u + h, psi(u) + Dpsi(u)[h]),

and because psi is exactly quadratic the off-manifold residual is the closed
form diag(h) * conj(Y h). Three times its norm certifies the Euclidean
distance to the manifold, which chains into the expectation bounds on ||Y||:

    E[dist] <= 3 ||h||_inf ||h||_2 E[||Y||] <= 3 ||h||_2^2 E[||Y||].

True projection onto the manifold is nonconvex and not attempted; the
certificate plus the same-voltage projection proxy sandwich the distance.
Complex vectors are identified with stacked real/imaginary parts, so the
complex 2-norm is the ambient Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admittance import AdmittanceMatrix
from .bounds import BoundReport

__all__ = [
    "ManifoldPoint",
    "TangentStep",
    "manifold_point",
    "tangent_step",
    "power_flow_map",
    "power_flow_derivative",
    "tangent_residual",
    "projection_distance",
    "distance_bound",
    "expected_distance_bound",
]

_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class ManifoldPoint:
    """A feasible (voltage, injection) pair with injection = psi(voltage)."""

    voltage: np.ndarray
    power: np.ndarray


@dataclass(frozen=True)
class TangentStep:
    """A complex voltage step taken from a feasible base point."""

    base: ManifoldPoint
    step: np.ndarray


def _as_complex_vector(v, n: int | None = None, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=complex).ravel()
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    if n is not None and a.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {a.shape}")
    return a


def _matrix_of(y) -> np.ndarray:
    return y.matrix if isinstance(y, AdmittanceMatrix) else np.asarray(y, dtype=complex)


def power_flow_map(y, u) -> np.ndarray:
    """Injections s = diag(u) * conj(Y u)."""
    ym = _matrix_of(y)
    uv = _as_complex_vector(u, ym.shape[0], "voltage")
    return uv * np.conj(ym @ uv)


def power_flow_derivative(y, u, h) -> np.ndarray:
    """Frechet derivative Dpsi(u)[h] = diag(h) conj(Y u) + diag(u) conj(Y h)."""
    ym = _matrix_of(y)
    uv = _as_complex_vector(u, ym.shape[0], "voltage")
    hv = _as_complex_vector(h, ym.shape[0], "step")
    return hv * np.conj(ym @ uv) + uv * np.conj(ym @ hv)


def manifold_point(y, u) -> ManifoldPoint:
    """Feasible point (u, psi(u)) on the manifold of ``y``."""
    uv = _as_complex_vector(u, _matrix_of(y).shape[0], "voltage")
    return ManifoldPoint(voltage=uv, power=power_flow_map(y, uv))


def tangent_step(y, u, h) -> TangentStep:
    """Tangent step ``h`` from the feasible point at voltage ``u``."""
    base = manifold_point(y, u)
    return TangentStep(base=base, step=_as_complex_vector(h, base.voltage.shape[0], "step"))


def tangent_residual(y, step: TangentStep) -> np.ndarray:
    """Second-order remainder psi(u+h) - psi(u) - Dpsi(u)[h].

    Computed by the closed form diag(h) * conj(Y h) and cross-checked
    against the direct Taylor subtraction (the map is exactly quadratic, so
    the two must agree to 1e-12).
    """
    ym = _matrix_of(y)
    u, h = step.base.voltage, step.step
    if h.shape != u.shape:
        raise ValueError("step/base dimension mismatch")
    closed = h * np.conj(ym @ h)
    direct = (power_flow_map(ym, u + h) - step.base.power
              - power_flow_derivative(ym, u, h))
    scale = max(1.0, float(np.max(np.abs(closed), initial=0.0)))
    if float(np.max(np.abs(closed - direct), initial=0.0)) > _RESIDUAL_TOL * scale:
        raise ArithmeticError("quadratic-map identity violated beyond 1e-12")
    return closed


def projection_distance(y, step: TangentStep) -> float:
    """Distance from the tangent point to the manifold point sharing its voltage.

    An upper proxy for the true manifold distance: only the injection part
    differs, so it equals the 2-norm of the tangent residual.
    """
    return float(np.linalg.norm(tangent_residual(y, step)))


def distance_bound(h, y_norm: float, mode: str = "holder") -> float:
    """Distance certificate from the residual norm chain.

    ``holder``: 3 ||h||_inf ||h||_2 ||Y||; ``crude``: 3 ||h||_2^2 ||Y||.
    Holder never exceeds crude.
    """
    if y_norm < 0:
        raise ValueError("operator norm must be >= 0")
    hv = _as_complex_vector(h, name="step")
    h2 = float(np.linalg.norm(hv))
    if mode == "holder":
        hinf = float(np.max(np.abs(hv), initial=0.0))
        return 3.0 * hinf * h2 * y_norm
    if mode == "crude":
        return 3.0 * h2 * h2 * y_norm
    raise ValueError(f"unknown distance bound mode {mode!r}")


def expected_distance_bound(h, bound_source: BoundReport) -> BoundReport:
    """Expected manifold distance 3 ||h||_inf ||h||_2 * (bound on E||Y||).

    ``bound_source`` must be an expectation bound on the operator norm
    (either the bounded-admittance or the contingency form; the lossless
    special case feeds the contingency form of ||B|| since ||Y|| = ||B||
    there).
    """
    if bound_source.kind not in ("thm1_expectation", "thm2_expectation"):
        raise ValueError(f"incompatible bound kind {bound_source.kind!r}: "
                         "need an expectation bound on the operator norm")
    hv = _as_complex_vector(h, name="step")
    h2 = float(np.linalg.norm(hv))
    hinf = float(np.max(np.abs(hv), initial=0.0))
    value = 3.0 * hinf * h2 * bound_source.value
    return BoundReport(
        kind="manifold_distance",
        inputs={"h_inf": hinf, "h_2": h2, "source_kind": bound_source.kind,
                "source_value": bound_source.value,
                "source_inputs": dict(bound_source.inputs)},
        value=value,
        valid=bound_source.valid,
        notes=f"3 * ||h||_inf * ||h||_2 * source; source notes: {bound_source.notes}",
    )
