"""Boundary-projection primitives: nearest contrastive class, the projection
vector, domain projection and the masked iterative generator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Normalization, project_to_domains
from .exceptions import ConfigError, DegenerateStepError, NoContrastiveClassError

DEGENERATE_NORM = 1e-12
MIN_STEP = 1e-4


def contrastive_class(net, x, *, space="proba"):
    """Class across the nearest linearized decision boundary from ``x``.

    Minimizes |f_c(x) - f_C(x)| / ||grad f_c(x) - grad f_C(x)|| over c != C.
    Classes with a vanishing gradient difference are skipped; ties go to the
    smaller class index.
    """
    if net.n_classes < 2:
        raise ConfigError("need at least two classes")
    s = net.scores(x, space)
    jac = net.score_jacobian(x, space)
    C = int(np.argmax(s))
    best, best_dist = None, np.inf
    for c in range(net.n_classes):
        if c == C:
            continue
        norm = np.linalg.norm(jac[c] - jac[C])
        if norm < DEGENERATE_NORM:
            continue
        dist = abs(s[c] - s[C]) / norm
        if dist < best_dist:
            best, best_dist = c, dist
    if best is None:
        raise NoContrastiveClassError("no class has a usable gradient difference")
    return best


def projection_step(net, x_prev, x_orig, v, C, *, overshoot=1.0, anchor="original",
                    space="proba", eps=0.0):
    """Projection vector pushing ``x_prev`` toward the class-``v`` side of the boundary.

    With ``anchor="original"`` the class-C score and gradient are taken at
    ``x_orig``; ``"current"`` evaluates both classes at ``x_prev``. ``eps`` adds
    a fixed distance along the step direction so that a point sitting exactly
    on the boundary still moves.
    """
    if v == C:
        raise ConfigError("contrastive class equals the current class")
    if anchor not in ("original", "current"):
        raise ConfigError(f"unknown anchor {anchor!r}")
    ref = x_orig if anchor == "original" else x_prev
    s_prev, s_ref = net.scores(x_prev, space), net.scores(ref, space)
    w = net.score_jacobian(x_prev, space)[v] - net.score_jacobian(ref, space)[C]
    norm = float(np.linalg.norm(w))
    if norm < DEGENERATE_NORM:
        raise DegenerateStepError("gradient difference vanished")
    return overshoot * (abs(s_prev[v] - s_ref[C]) / norm + eps) * (w / norm)


def project_domain(x, domains):
    """Clamp into each feature's [min, max]; integers rounded half away from zero."""
    return project_to_domains(x, domains)


@dataclass
class Candidate:
    x_tilde: np.ndarray
    success: bool
    iterations: int
    error: str | None = None


def generate_contrastive(net, x, S, domains, *, steps=200, overshoot=1.02,
                         anchor="original", normalization: Normalization | None = None,
                         v=None, space="proba", eps=MIN_STEP):
    """Iteratively move the features in ``S`` of the raw sample ``x`` across the boundary.

    ``net`` consumes normalized inputs; ``normalization`` maps raw values to
    that space (identity when omitted) and ``domains`` are raw-space bounds.
    Features outside ``S`` are never written, so they stay bit-identical to
    ``x``. The iterate keeps unrounded (clamped) S-coordinates and every step is
    evaluated there; only the emitted sample is rounded to integer domains, so
    steps shorter than half an integer unit still make progress.
    """
    S = [int(j) for j in S]
    if not S:
        raise ConfigError("S must be non-empty")
    x = np.asarray(x, dtype=np.float64)
    if normalization is None:
        normalization = Normalization.identity(len(x))
    z_orig = normalization.transform(x)
    C = int(np.argmax(net.forward(z_orig)))
    if v is None:
        v = contrastive_class(net, z_orig, space=space)

    lo = normalization.transform(np.array([d.min for d in domains]))
    hi = normalization.transform(np.array([d.max for d in domains]))
    sub_domains = [domains[j] for j in S]

    x_tilde = x.copy()
    # the iterate: z_orig with the S-coordinates replaced by the unrounded shadow
    z = z_orig.copy()
    for i in range(1, steps + 1):
        try:
            r = projection_step(net, z, z_orig, v, C, overshoot=overshoot, anchor=anchor,
                                space=space, eps=eps)
        except DegenerateStepError as exc:
            return Candidate(x_tilde, False, i - 1, str(exc))
        z[S] = np.clip(z[S] + r[S], lo[S], hi[S])
        x_tilde[S] = project_domain(normalization.inverse(z)[S], sub_domains)
        if int(np.argmax(net.forward(normalization.transform(x_tilde)))) != C:
            return Candidate(x_tilde, True, i)
    return Candidate(x_tilde, False, steps)
