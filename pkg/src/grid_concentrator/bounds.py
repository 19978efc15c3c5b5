"""Closed-form concentration bounds for random admittance matrices.

Every evaluator returns a :class:`BoundReport` carrying the raw bound value
(tail probabilities are NOT clamped to 1; use ``report.clamped`` for
presentation), a validity flag for any hypothesis window, and notes on
unpinned constants. Natural logarithms throughout.

The bounds implemented:

* bounded-admittance expectation bound
      E||Y|| <= sqrt(4 * Delta * log(4n)) + (2/3) * log(4n)
  for any per-line law with |w| <= 1, where Delta is the max node degree;
  plus the cruder deterministic envelope ||Y|| <= 2 * Delta.

* Bernoulli line-switching (contingency) bounds, driven by the per-line
  contingency factors c_l = 2 p_l (1 - p_l) |y_l|^2, the nodal criticality
  degrees d_i = sum over incident lines of c_l, their max Delta_c, and the
  normalized total criticality D_bar = sum_i d_i / Delta_c:
      Pr(||Y - EY|| >= t) <= 8 * D_bar * exp(-t^2 / (4 (Delta_c + t/3)))
  valid for t >= sqrt(2 Delta_c) + 2/3, and the expectation bound in either
  the fully explicit chain form or the single-constant form
      E||Y - EY|| <= C (sqrt(2 Delta_c log(1 + 2 D_bar)) + 2 log(1 + 2 D_bar)).

* the generic matrix Bernstein tail 2 n exp(-t^2 / (2 R t + 4 nu)) for sums
  of independent symmetric zero-mean matrices with uniform norm bound R and
  variance statistic nu.

* flat-start-Jacobian (linear coupled power flow) spectral-error bounds for
  bounded parameter noise |Dg|, |Db| <= delta:
      Pr(||F - EF|| >= t) ~< n exp(-t^2 / (4 (delta^2 n + delta t / 3)))
      E||F - EF||        <= 2 delta sqrt(2) (sqrt(n log 4n) + (1/3) log 4n)
  together with the PSD variance envelopes on E[F F*]: (2/n) I_2 (x) A^T A
  for the sphere-uniform line law and 4 delta^2 I_2 (x) A^T A for the
  bounded law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import Topology, incidence_matrix, unweighted_laplacian
from .spectra import kron, operator_norm

__all__ = [
    "BOUND_KINDS",
    "ContingencyModel",
    "CriticalityProfile",
    "BoundReport",
    "thm1_expectation_bound",
    "deterministic_norm_bound",
    "contingency_factors",
    "variance_laplacian",
    "thm2_tail_bound",
    "thm2_expectation_bound",
    "bernstein_tail",
    "lcpf_variance_envelope",
    "lcpf_tail_bound",
    "lcpf_expectation_bound",
]

BOUND_KINDS = frozenset({
    "thm1_expectation",
    "thm2_tail",
    "thm2_expectation",
    "bernstein_tail",
    "lcpf_tail",
    "lcpf_expectation",
    "manifold_distance",
})

# The admittance-bound hypothesis |y| <= 1 per-unit, with float slack.
_UNIT_SLACK = 1.0 + 1e-12


@dataclass(frozen=True)
class ContingencyModel:
    """Per-line Bernoulli switching model over a fixed topology.

    ``probs[l]`` is the probability line l is switched closed, and
    ``admittances[l]`` its admittance when closed, with |y_l| <= 1 per-unit.
    """

    topology: Topology
    probs: np.ndarray
    admittances: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.probs, dtype=float))
        y = np.atleast_1d(np.asarray(self.admittances, dtype=complex))
        m = self.topology.n_edges
        if p.shape != (m,) or y.shape != (m,):
            raise ValueError(f"need {m} probabilities and admittances, got "
                             f"{p.shape} and {y.shape}")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("switch probabilities must lie in [0, 1]")
        if np.any(np.abs(y) > _UNIT_SLACK):
            raise ValueError("line admittances must satisfy |y| <= 1 per-unit")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "admittances", y)


@dataclass(frozen=True)
class CriticalityProfile:
    """Contingency factors, nodal criticality degrees, and their summaries.

    ``total_degree`` (D_bar) is NaN when every line is deterministic
    (``max_criticality`` == 0); the ``degenerate`` flag marks that case.
    """

    factors: np.ndarray        # c_l per line
    node_degrees: np.ndarray   # d_i per node
    max_criticality: float     # Delta_c
    total_degree: float        # D_bar, NaN if degenerate

    @property
    def degenerate(self) -> bool:
        return self.max_criticality == 0.0


@dataclass(frozen=True)
class BoundReport:
    """An evaluated analytical bound with its inputs and validity window."""

    kind: str
    inputs: dict
    value: float
    valid: bool = True
    notes: str = ""

    def __post_init__(self):
        if self.kind not in BOUND_KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if not (self.value >= 0.0):
            raise ValueError(f"bound value must be >= 0, got {self.value}")

    @property
    def clamped(self) -> float:
        """min(1, value): tail probabilities for presentation."""
        return min(1.0, self.value)

    def to_json(self) -> dict:
        return {"kind": self.kind, "inputs": dict(self.inputs),
                "value": self.value, "valid": self.valid, "notes": self.notes}


def thm1_expectation_bound(n: int, delta: float) -> BoundReport:
    """E||Y|| bound for |w| <= 1 laws on a fixed topology with max degree delta."""
    if n < 1:
        raise ValueError("need at least one node")
    if delta < 0:
        raise ValueError("max degree must be >= 0")
    log4n = math.log(4.0 * n)
    value = math.sqrt(4.0 * delta * log4n) + (2.0 / 3.0) * log4n
    return BoundReport(kind="thm1_expectation", inputs={"n": n, "delta": delta},
                       value=value)


def deterministic_norm_bound(delta: float, w_max: float = 1.0) -> float:
    """Always-valid envelope ||Y|| <= 2 * Delta * max|w| (Laplacian degree bound)."""
    if delta < 0 or w_max < 0:
        raise ValueError("degree and weight bound must be >= 0")
    return 2.0 * delta * w_max


def contingency_factors(model: ContingencyModel) -> CriticalityProfile:
    """Contingency factors c_l = 2 p_l (1-p_l) |y_l|^2 and nodal criticality."""
    c = 2.0 * model.probs * (1.0 - model.probs) * np.abs(model.admittances) ** 2
    d = np.zeros(model.topology.n_nodes)
    for l, (i, j) in enumerate(model.topology.edges):
        d[i] += c[l]
        d[j] += c[l]
    delta_c = float(d.max(initial=0.0))
    d_bar = float(d.sum() / delta_c) if delta_c > 0.0 else math.nan
    return CriticalityProfile(factors=c, node_degrees=d,
                              max_criticality=delta_c, total_degree=d_bar)


def variance_laplacian(model: ContingencyModel) -> np.ndarray:
    """Matrix-valued variance E[(Y-EY)(Y-EY)*] = A^T diag(c) A.

    A graph Laplacian on the same topology with the contingency factors as
    line weights.
    """
    c = contingency_factors(model).factors
    a = incidence_matrix(model.topology)
    return a.T @ (c[:, None] * a)


def _degenerate_report(kind: str, t: float | None, inputs: dict) -> BoundReport:
    # All lines deterministic: the centered matrix is identically zero.
    value = 0.0 if (t is None or t > 0.0) else 1.0
    return BoundReport(kind=kind, inputs=inputs, value=value, valid=True,
                       notes="degenerate: all contingency factors are zero")


def thm2_tail_bound(t: float, profile: CriticalityProfile) -> BoundReport:
    """Tail bound 8 D_bar exp(-t^2 / (4 (Delta_c + t/3))) for ||Y - EY||.

    The ``valid`` flag reports whether t clears the hypothesis window
    t >= sqrt(2 Delta_c) + 2/3; the value is computed either way.
    """
    if t < 0:
        raise ValueError("threshold t must be >= 0")
    inputs = {"t": t, "delta_c": profile.max_criticality,
              "d_bar": profile.total_degree}
    if profile.degenerate:
        return _degenerate_report("thm2_tail", t, inputs)
    dc = profile.max_criticality
    value = 8.0 * profile.total_degree * math.exp(-t * t / (4.0 * (dc + t / 3.0)))
    threshold = math.sqrt(2.0 * dc) + 2.0 / 3.0
    notes = (f"hypothesis window t >= {threshold:.6g}; dilation factor "
             f"d = 2*intdim(V) <= 2*D_bar = {2.0 * profile.total_degree:.6g}")
    return BoundReport(kind="thm2_tail", inputs=inputs, value=value,
                       valid=t >= threshold, notes=notes)


def thm2_expectation_bound(profile: CriticalityProfile,
                           constant: float | None = None) -> BoundReport:
    """E||Y - EY|| bound under Bernoulli switching.

    With ``constant=None`` returns the fully explicit chain
        sqrt(2 nu log(1+d)) + (2/3) L log(1+d) + 4 sqrt(nu) + (8/3) L
    with nu = 2 Delta_c, L = 2, d = 2 D_bar. With ``constant=C`` returns
        C (sqrt(2 Delta_c log(1 + 2 D_bar)) + 2 log(1 + 2 D_bar)).
    """
    if constant is not None and constant <= 0.0:
        raise ValueError("constant must be > 0")
    inputs = {"delta_c": profile.max_criticality,
              "d_bar": profile.total_degree,
              "constant": constant}
    if profile.degenerate:
        return _degenerate_report("thm2_expectation", None, inputs)
    dc = profile.max_criticality
    d = 2.0 * profile.total_degree
    if constant is None:
        nu, big_l = 2.0 * dc, 2.0
        log1d = math.log1p(d)
        value = (math.sqrt(2.0 * nu * log1d) + (2.0 / 3.0) * big_l * log1d
                 + 4.0 * math.sqrt(nu) + (8.0 / 3.0) * big_l)
        notes = "explicit chain with nu = 2*Delta_c, L = 2, d = 2*D_bar"
    else:
        log1d = math.log1p(d)
        value = constant * (math.sqrt(2.0 * dc * log1d) + 2.0 * log1d)
        notes = f"single-constant form with C = {constant}"
    return BoundReport(kind="thm2_expectation", inputs=inputs, value=value,
                       valid=True, notes=notes)


def bernstein_tail(t: float, dim: int, big_r: float, nu: float) -> BoundReport:
    """Matrix Bernstein tail 2 n exp(-t^2 / (2 R t + 4 nu)).

    For a sum of independent, symmetric, zero-mean random dim x dim matrices
    with uniform norm bound R and variance statistic nu.
    """
    if t < 0:
        raise ValueError("threshold t must be >= 0")
    if big_r <= 0:
        raise ValueError("uniform norm bound R must be > 0")
    if nu < 0:
        raise ValueError("variance statistic must be >= 0")
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    value = 2.0 * dim if t == 0.0 else \
        2.0 * dim * math.exp(-t * t / (2.0 * big_r * t + 4.0 * nu))
    return BoundReport(kind="bernstein_tail",
                       inputs={"t": t, "dim": dim, "R": big_r, "nu": nu},
                       value=value)


def lcpf_variance_envelope(topology: Topology, mode: str = "sphere",
                           delta: float | None = None) -> tuple[np.ndarray, float]:
    """PSD envelope V >= E[F F*] for the flat-start Jacobian, and nu = ||V||.

    ``mode="sphere"``: sphere-uniform line law, V = (2/n) I_2 (x) A^T A with
    nu = (2/n) ||A^T A|| <= 2. ``mode="bounded"``: |Dg|, |Db| <= delta, V =
    4 delta^2 I_2 (x) A^T A with nu <= 4 delta^2 n.
    """
    laplacian = unweighted_laplacian(topology)
    if mode == "sphere":
        scale = 2.0 / topology.n_nodes
    elif mode == "bounded":
        if delta is None or delta < 0:
            raise ValueError("bounded mode needs delta >= 0")
        scale = 4.0 * delta * delta
    else:
        raise ValueError(f"unknown envelope mode {mode!r}")
    envelope = scale * kron(np.eye(2), laplacian)
    nu = scale * operator_norm(laplacian) if scale > 0.0 else 0.0
    return envelope, float(nu)


def lcpf_tail_bound(t: float, n: int, delta: float) -> BoundReport:
    """Tail bound n exp(-t^2 / (4 (delta^2 n + delta t / 3))) for ||F - EF||.

    The prefactor n implements the stated up-to-constants form literally; a
    rigorous alternative is the Bernstein 2*(2n) prefactor (dominance checks
    use a slack factor of 4).
    """
    if t < 0:
        raise ValueError("threshold t must be >= 0")
    if n < 1:
        raise ValueError("need at least one node")
    if delta < 0:
        raise ValueError("perturbation bound must be >= 0")
    inputs = {"t": t, "n": n, "delta": delta}
    notes = ("up-to-constants prefactor implemented as n; "
             "Bernstein 2*(2n) is the rigorous alternative")
    if t == 0.0:
        value = float(n)
    elif delta == 0.0:
        value = 0.0
    else:
        value = n * math.exp(-t * t / (4.0 * (delta * delta * n + delta * t / 3.0)))
    return BoundReport(kind="lcpf_tail", inputs=inputs, value=value, notes=notes)


def lcpf_expectation_bound(n: int, delta: float) -> BoundReport:
    """E||F - EF|| <= 2 delta sqrt(2) (sqrt(n log 4n) + (1/3) log 4n)."""
    if n < 1:
        raise ValueError("need at least one node")
    if delta < 0:
        raise ValueError("perturbation bound must be >= 0")
    log4n = math.log(4.0 * n)
    value = 2.0 * delta * math.sqrt(2.0) * (math.sqrt(n * log4n) + log4n / 3.0)
    return BoundReport(kind="lcpf_expectation", inputs={"n": n, "delta": delta},
                       value=value)
