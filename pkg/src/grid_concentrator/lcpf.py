"""Flat-start Jacobian assembly and its closed-form inverse on trees.

The linear coupled power flow model relates injections to voltage deviations
at the flat start (unit magnitudes, zero angles, no shunts):

    [p; q] = [[G, -B], [-B, -G]] [eps; theta],   eps := v - 1,

with G = A^T diag(g) A and B = A^T diag(b) A. On a tree with a reference
node removed, the reduced incidence A is square and invertible and the block
matrix inverts in closed form to [[R, X], [X, -R]], where

    R = A^{-1} diag(g / (g^2 + b^2)) A^{-T},
    X = A^{-1} diag(-b / (g^2 + b^2)) A^{-T}

are the resistance and reactance matrices. The same blocks fall out of the
Schur complement of the block matrix in -G: R = (G + B G^{-1} B)^{-1} and
X = -R B G^{-1}. Both derivations are computed and cross-checked here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_core import Topology, incidence_matrix, is_tree

__all__ = [
    "FlatStartJacobian",
    "ImpedanceBlocks",
    "line_parameters",
    "flat_start_jacobian",
    "invert_tree_lcpf",
    "lcpf_solve",
]

# Agreement tolerance between the Schur and line-space inverses, and for the
# residual of linear solves (relative to the right-hand side).
_AGREE_TOL = 1e-9
_MAX_CONDITION = 1e12


@dataclass(frozen=True)
class FlatStartJacobian:
    """Block operator [[G, -B], [-B, -G]] with its Laplacian blocks."""

    g_matrix: np.ndarray
    b_matrix: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g_matrix, dtype=float)
        b = np.asarray(self.b_matrix, dtype=float)
        if g.shape != b.shape or g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"G and B must be square and same shape, got "
                             f"{g.shape} and {b.shape}")
        object.__setattr__(self, "g_matrix", g)
        object.__setattr__(self, "b_matrix", b)

    @property
    def size(self) -> int:
        return self.g_matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        g, b = self.g_matrix, self.b_matrix
        return np.block([[g, -b], [-b, -g]])


@dataclass(frozen=True)
class ImpedanceBlocks:
    """Resistance/reactance blocks of the inverse operator [[R, X], [X, -R]]."""

    r_matrix: np.ndarray
    x_matrix: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        r, x = self.r_matrix, self.x_matrix
        return np.block([[r, x], [x, -r]])


def line_parameters(lines) -> tuple[np.ndarray, np.ndarray]:
    """Split a list of (g, b) pairs (or objects with .g/.b) into arrays."""
    gs, bs = [], []
    for line in lines:
        if hasattr(line, "g") and hasattr(line, "b"):
            gs.append(float(line.g))
            bs.append(float(line.b))
        else:
            g, b = line
            gs.append(float(g))
            bs.append(float(b))
    return np.array(gs), np.array(bs)


def flat_start_jacobian(topology: Topology, lines,
                        reduced: bool = False) -> FlatStartJacobian:
    """Assemble [[G, -B], [-B, -G]] from per-line conductance/susceptance.

    ``lines`` is one (g, b) pair per edge, in edge order. With ``reduced``
    the reference node's incidence column is dropped first (blocks become
    (n-1) x (n-1)), which is the invertible form used on trees.
    """
    g, b = line_parameters(lines)
    if g.shape[0] != topology.n_edges:
        raise ValueError(f"{g.shape[0]} line parameters for "
                         f"{topology.n_edges} lines")
    a = incidence_matrix(topology, reduced=reduced)
    return FlatStartJacobian(g_matrix=a.T @ (g[:, None] * a),
                             b_matrix=a.T @ (b[:, None] * a))


def _check_numerical_agreement(lhs: np.ndarray, rhs: np.ndarray, what: str):
    scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    err = float(np.max(np.abs(lhs - rhs)))
    if err > _AGREE_TOL * scale:
        raise ArithmeticError(f"{what} disagree: max deviation {err:.3e} "
                              f"(tolerance {_AGREE_TOL:.0e} at scale {scale:.3e})")


def invert_tree_lcpf(jacobian: FlatStartJacobian, topology: Topology,
                     lines) -> ImpedanceBlocks:
    """Closed-form inverse blocks R, X of the reduced flat-start operator.

    Requires a tree with a reference node, all conductances strictly
    positive, and the jacobian built reduced. R and X are computed twice --
    through the Schur complement chain and through the line-space closed
    form -- and the two must agree to 1e-9; the Schur result is returned.
    """
    if not is_tree(topology):
        raise ValueError("closed-form inverse requires a tree topology")
    if topology.reference_node is None:
        raise ValueError("tree inverse requires a reference node (reduced incidence)")
    g, b = line_parameters(lines)
    if g.shape[0] != topology.n_edges:
        raise ValueError(f"{g.shape[0]} line parameters for "
                         f"{topology.n_edges} lines")
    if np.any(g <= 0.0):
        raise ValueError("all line conductances must be > 0 (G would be singular)")
    n_red = topology.n_nodes - 1
    if jacobian.size != n_red:
        raise ValueError(f"jacobian blocks are {jacobian.size} x {jacobian.size}; "
                         f"expected the reduced size {n_red}")

    # Schur path: R = (G + B G^{-1} B)^{-1}, X = -R B G^{-1}.
    gm, bm = jacobian.g_matrix, jacobian.b_matrix
    g_inv_b = np.linalg.solve(gm, bm)
    r_schur = np.linalg.inv(gm + bm @ g_inv_b)
    x_schur = -r_schur @ g_inv_b.T

    # Line-space path: R = A^{-1} diag(r) A^{-T}, per-line r = g/(g^2+b^2),
    # x = -b/(g^2+b^2).
    a = incidence_matrix(topology, reduced=True)
    denom = g * g + b * b
    r_line = _congruence_by_inverse(a, g / denom)
    x_line = _congruence_by_inverse(a, -b / denom)

    _check_numerical_agreement(r_schur, r_line, "Schur and line-space resistance matrices")
    _check_numerical_agreement(x_schur, x_line, "Schur and line-space reactance matrices")
    return ImpedanceBlocks(r_matrix=r_schur, x_matrix=x_schur)


def _congruence_by_inverse(a: np.ndarray, diag: np.ndarray) -> np.ndarray:
    # A^{-1} diag(d) A^{-T} without forming the inverse explicitly.
    z = np.linalg.solve(a, np.diag(diag))
    return np.linalg.solve(a, z.T).T


def lcpf_solve(jacobian: FlatStartJacobian, p, q,
               blocks: ImpedanceBlocks | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Solve [p; q] = [[G, -B], [-B, -G]] [eps; theta] for (eps, theta).

    With precomputed tree ``blocks`` this is eps = R p + X q,
    theta = X p - R q; otherwise a dense solve with a condition-number guard
    (meshed networks are fine as long as the operator is nonsingular). The
    solution's residual is verified to 1e-9 relative to ||[p; q]||.
    """
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    n = jacobian.size
    if p.shape != (n,) or q.shape != (n,):
        raise ValueError(f"p and q must have length {n}")
    m = jacobian.matrix
    if blocks is not None:
        eps = blocks.r_matrix @ p + blocks.x_matrix @ q
        theta = blocks.x_matrix @ p - blocks.r_matrix @ q
    else:
        cond = np.linalg.cond(m)
        if not np.isfinite(cond) or cond > _MAX_CONDITION:
            raise np.linalg.LinAlgError(
                f"flat-start operator is numerically singular (cond = {cond:.3e})")
        sol = np.linalg.solve(m, np.concatenate([p, q]))
        eps, theta = sol[:n], sol[n:]
    rhs = np.concatenate([p, q])
    residual = float(np.linalg.norm(m @ np.concatenate([eps, theta]) - rhs))
    if residual > _AGREE_TOL * max(1.0, float(np.linalg.norm(rhs))):
        raise ArithmeticError(f"solve residual {residual:.3e} exceeds tolerance")
    return eps, theta
