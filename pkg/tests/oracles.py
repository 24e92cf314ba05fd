"""Reference implementations written independently of the package.

Nothing here imports ``twotime``.  Each function recomputes a quantity by a
different route from the one the package uses.
"""
import math

import numpy as np
from scipy.integrate import quad

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def expm_taylor(m, terms=30):
    """Matrix exponential by scaling and squaring a truncated Taylor series."""
    m = np.asarray(m, dtype=complex)
    nrm = np.abs(m).sum(axis=1).max()
    s = max(0, int(math.ceil(math.log2(nrm))) + 1) if nrm > 0 else 0
    a = m / 2 ** s
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def premeasured(a, b, g, t):
    """``exp(i g t sigma_z sigma_y)`` on ``(a|u> + b|d>)|R>`` written out with cos and sin.

    ``|R> = (|U> + |D>)/sqrt 2``.  On the ``u`` branch the pointer turns by
    ``+g t`` and on the ``d`` branch by ``-g t``.
    """
    c, s = math.cos(g * t), math.sin(g * t)
    r = 1 / math.sqrt(2)
    up = np.array([c + s, c - s]) * r
    down = np.array([c - s, c + s]) * r
    return np.concatenate([a * up, b * down])


def eps_states(couplings, alphas, betas, t):
    """Environment branches ``eps_U(t)``, ``eps_D(t)`` as explicit Kronecker products."""
    eu = np.ones(1, dtype=complex)
    ed = np.ones(1, dtype=complex)
    for g, al, be in zip(couplings, alphas, betas):
        ph = np.exp(1j * g * t)
        eu = np.kron(eu, [al * ph, be / ph])
        ed = np.kron(ed, [al / ph, be * ph])
    return eu, ed


def z_closed(couplings, alphas, betas, t):
    out = 1.0 + 0j
    for g, al, be in zip(couplings, alphas, betas):
        p = abs(al) ** 2 - abs(be) ** 2
        out *= math.cos(2 * g * t) + 1j * p * math.sin(2 * g * t)
    return out


def time_average_closed(alphas, betas):
    out = 1.0
    for al, be in zip(alphas, betas):
        p = abs(al) ** 2 - abs(be) ** 2
        out *= (1 + p * p) / 2
    return out


def gaussian(q, mu, sigma):
    return (2 * math.pi * sigma ** 2) ** -0.25 * math.exp(-(q - mu) ** 2 / (4 * sigma ** 2))


def post_selected_mean_quad(weights, centers, sigma):
    """``<q>`` of ``sum_j w_j G(q - mu_j)`` by adaptive quadrature."""
    def psi2(q):
        v = sum(w * gaussian(q, mu, sigma) for w, mu in zip(weights, centers))
        return abs(v) ** 2

    lo = min(centers) - 12 * sigma
    hi = max(centers) + 12 * sigma
    pts = sorted(centers)
    norm = quad(psi2, lo, hi, points=pts, limit=200)[0]
    first = quad(lambda q: q * psi2(q), lo, hi, points=pts, limit=200)[0]
    return first / norm


def abl_direct(psi_i, psi_f, projectors):
    w = np.array([abs(np.vdot(psi_f, P @ psi_i)) ** 2 for P in projectors])
    return w / w.sum()
