"""Backward-map derivatives from forward-flow derivatives.

The forward flow gives, per grid point, the Jacobian J, the Hessian tensor H
and the third-order tensor T of the map (x0, p0) -> (x, p).  The PDE
coefficients need derivatives of the *inverse* map with respect to its
momentum argument, evaluated along the forward trajectory.  Those follow
from J having unit determinant (closed-form 2x2 inverse) and from the
inverse-function relations

    He^i_jk  = - H^n_lm Ja^i_n Ja^l_j Ja^m_k
    Te^i_jka = - T^n_lmb Ja^i_n Ja^l_j Ja^m_k Ja^b_a
               - H^n_lm Ja^i_n (He^l_jk Ja^m_a + He^l_ja Ja^m_k + He^l_ka Ja^m_j)

All functions are batched: leading axis runs over grid points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SymplecticityError
from .flow import FlowField

DET_TOLERANCE = 1.0e-6


@dataclass
class InverseDerivs:
    """Backward-map momentum derivatives per grid point (arrays of length n).

    x1 = d x_back / dp, p1 = d p_back / dp, and the second and third
    derivatives x2, p2, x3, p3, all evaluated at the forward image of the
    grid point.  At tau = 0 these are (0, 1, 0, 0, 0, 0).
    """

    x1: np.ndarray
    p1: np.ndarray
    x2: np.ndarray
    p2: np.ndarray
    x3: np.ndarray
    p3: np.ndarray


def flow_tensors(flow: FlowField):
    """Assemble (J, H, T) batched tensors from a flow field.

    H and T are stored with their lower-index symmetry made explicit, so
    permutation invariance is exact by construction.
    """
    xb, pb = flow.xb, flow.pb
    n = xb.shape[1]

    jac = np.empty((n, 2, 2))
    jac[:, 0, 0] = xb[1]
    jac[:, 0, 1] = xb[2]
    jac[:, 1, 0] = pb[1]
    jac[:, 1, 1] = pb[2]

    hess = np.empty((n, 2, 2, 2))
    for i, blk in enumerate((xb, pb)):
        hess[:, i, 0, 0] = blk[3]
        hess[:, i, 0, 1] = blk[4]
        hess[:, i, 1, 0] = blk[4]
        hess[:, i, 1, 1] = blk[5]

    third = np.empty((n, 2, 2, 2, 2))
    for i, blk in enumerate((xb, pb)):
        third[:, i, 0, 0, 0] = blk[6]
        for idx in ((0, 0, 1), (0, 1, 0), (1, 0, 0)):
            third[:, i, idx[0], idx[1], idx[2]] = blk[7]
        for idx in ((0, 1, 1), (1, 0, 1), (1, 1, 0)):
            third[:, i, idx[0], idx[1], idx[2]] = blk[8]
        third[:, i, 1, 1, 1] = blk[9]

    return jac, hess, third


def invert_jacobian(jac: np.ndarray) -> np.ndarray:
    """Closed-form inverse of unit-determinant 2x2 Jacobians.

    Raises SymplecticityError if any determinant strays from one by more
    than DET_TOLERANCE.
    """
    jac = np.asarray(jac)
    squeeze = jac.ndim == 2
    if squeeze:
        jac = jac[None]
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    worst = float(np.max(np.abs(det - 1.0)))
    if worst > DET_TOLERANCE:
        k = int(np.argmax(np.abs(det - 1.0)))
        raise SymplecticityError(
            f"|det J - 1| = {worst:.3e} at point {k} exceeds {DET_TOLERANCE:.1e}")
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1]
    inv[:, 0, 1] = -jac[:, 0, 1]
    inv[:, 1, 0] = -jac[:, 1, 0]
    inv[:, 1, 1] = jac[:, 0, 0]
    return inv[0] if squeeze else inv


def inverse_hessian(hess: np.ndarray, ja: np.ndarray) -> np.ndarray:
    """He^i_jk = -sum H^n_lm Ja^i_n Ja^l_j Ja^m_k (batched)."""
    return -np.einsum("znlm,zin,zlj,zmk->zijk", hess, ja, ja, ja)


def inverse_third(third: np.ndarray, hess: np.ndarray, he: np.ndarray,
                  ja: np.ndarray) -> np.ndarray:
    """Third-order inverse-map tensor, fully symmetric in its lower indices."""
    t_part = np.einsum("znlmb,zin,zlj,zmk,zbc->zijkc", third, ja, ja, ja, ja)
    h_mix = np.einsum("znlm,zin,zljk,zmc->zijkc", hess, ja, he, ja)
    h_mix += np.einsum("znlm,zin,zljc,zmk->zijkc", hess, ja, he, ja)
    h_mix += np.einsum("znlm,zin,zlkc,zmj->zijkc", hess, ja, he, ja)
    return -(t_part + h_mix)


def extract_p_derivs(ja: np.ndarray, he: np.ndarray, te: np.ndarray) -> InverseDerivs:
    """Pick the all-momentum components used by the PDE coefficients."""
    return InverseDerivs(
        x1=ja[:, 0, 1].copy(),
        p1=ja[:, 1, 1].copy(),
        x2=he[:, 0, 1, 1].copy(),
        p2=he[:, 1, 1, 1].copy(),
        x3=te[:, 0, 1, 1, 1].copy(),
        p3=te[:, 1, 1, 1, 1].copy(),
    )


def inverse_derivs(flow: FlowField) -> InverseDerivs:
    """Full pipeline: flow tensors -> inverted map derivatives."""
    jac, hess, third = flow_tensors(flow)
    ja = invert_jacobian(jac)
    he = inverse_hessian(hess, ja)
    te = inverse_third(third, hess, he, ja)
    return extract_p_derivs(ja, he, te)
