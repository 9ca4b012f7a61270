"""Embedded symmetric triangle quadrature data.

Degrees 1-6 are the classic positive-weight symmetric rules, stored as orbit
generators in barycentric form.  Degrees 7-12 are built from embedded 1D
Gauss-Jacobi/Gauss-Legendre tables via the conical product on the reference
triangle, then symmetrized over the 6 affine symmetries; this keeps every
weight positive and every point strictly interior at any degree.  ``quad``
verifies every table against the monomial-moment oracle the first time a
rule is requested; a transcription error raises instead of shipping a wrong
weight.

Points are (s, t) on {0 <= s <= 1, 0 <= t <= 1 - s}; weights sum to 1/2.
"""

from __future__ import annotations

import numpy as np


def _centroid(w):
    return [(1.0 / 3.0, 1.0 / 3.0, w)]


def _s21(a, w):
    # barycentric (1-2a, a, a) orbit; (s, t) = (lambda3, lambda2)
    b = 1.0 - 2.0 * a
    return [(a, a, w), (b, a, w), (a, b, w)]


def _s111(b, c, w):
    # full 6-orbit of barycentric (1-b-c, b, c)
    a = 1.0 - b - c
    return [(c, b, w), (b, c, w), (c, a, w), (a, c, w), (b, a, w), (a, b, w)]


# classic symmetric rules; weights given on the unit-area triangle are halved
# so the reference triangle of area 1/2 integrates exactly
_CLASSIC = {
    1: _centroid(0.5),
    2: _s21(1.0 / 6.0, 1.0 / 6.0),
    3: _s111(0.231933368553031, 0.109039009072877, 1.0 / 12.0),
    4: (_s21(0.091576213509771, 0.109951743655322 / 2.0)
        + _s21(0.445948490915965, 0.223381589678011 / 2.0)),
    5: (_centroid(0.225 / 2.0)
        + _s21(0.101286507323456, 0.125939180544827 / 2.0)
        + _s21(0.470142064105115, 0.132394152788506 / 2.0)),
    6: (_s21(0.063089014491502, 0.050844906370207 / 2.0)
        + _s21(0.249286745170910, 0.116786275726379 / 2.0)
        + _s111(0.310352451033785, 0.053145049844816, 0.082851075618374 / 2.0)),
}

# 1D Gauss data on [0, 1], keyed by point count m:
# (jacobi nodes, jacobi weights for weight function (1-u), legendre nodes,
#  legendre weights).  m points are exact to polynomial degree 2m-1.
_GAUSS_1D = {
    4: (
        (0.057104196114517725, 0.2768430136381238, 0.5835904323689168, 0.8602401356562195),
        (0.13550691343148852, 0.2034645680102711, 0.12984754760823233, 0.031180970950008085),
        (0.06943184420297371, 0.33000947820757187, 0.6699905217924281, 0.9305681557970262),
        (0.1739274225687269, 0.3260725774312731, 0.3260725774312731, 0.1739274225687269),
    ),
    5: (
        (0.03980985705146872, 0.1980134178736082, 0.43797481024738616, 0.6954642733536361, 0.9014649142011736),
        (0.09678159022665148, 0.1671746380943697, 0.14638698708466985, 0.07390887007261668, 0.0157479145216923),
        (0.04691007703066802, 0.23076534494715845, 0.5, 0.7692346550528415, 0.9530899229693319),
        (0.11846344252809449, 0.23931433524968326, 0.2844444444444445, 0.23931433524968326, 0.11846344252809449),
    ),
    6: (
        (0.02931642715978494, 0.1480785996684843, 0.3369846902811543, 0.5586715187715502, 0.7692338620300545, 0.926945671319741),
        (0.0723103307255089, 0.13554249723151868, 0.14079255378819883, 0.0986611508906552, 0.04395516555050896, 0.008738301813609529),
        (0.033765242898423975, 0.16939530676686776, 0.3806904069584015, 0.6193095930415985, 0.8306046932331322, 0.966234757101576),
        (0.08566224618958508, 0.18038078652406928, 0.2339569672863456, 0.2339569672863456, 0.18038078652406928, 0.08566224618958508),
    ),
    7: (
        (0.0224793864387125, 0.11467905316090415, 0.2657898227845895, 0.45284637366944464, 0.6473752828868303, 0.8197593082631076, 0.9437374394630779),
        (0.055967363423490867, 0.1105092581908744, 0.12739089729958852, 0.10712506569587381, 0.06638469646549157, 0.027408356721873486, 0.005214362202807391),
        (0.025446043828620812, 0.12923440720030277, 0.2970774243113014, 0.5, 0.7029225756886985, 0.8707655927996972, 0.9745539561713792),
        (0.06474248308443496, 0.1398526957446383, 0.19091502525255938, 0.20897959183673456, 0.19091502525255938, 0.1398526957446383, 0.06474248308443496),
    ),
}

# degree -> 1D point count for the conical construction (2m-1 >= degree+1)
_CONICAL_M = {7: 4, 8: 5, 9: 5, 10: 6, 11: 6, 12: 7}


def _conical_symmetric(degree: int):
    """Conical-product rule symmetrized over the triangle's symmetry group."""
    uj, wj, ul, wl = (np.asarray(v, dtype=float) for v in _GAUSS_1D[_CONICAL_M[degree]])
    s = np.repeat(uj, len(ul))
    t = np.tile(ul, len(uj)) * (1.0 - s)
    w = np.repeat(wj, len(ul)) * np.tile(wl, len(uj))

    lam = np.column_stack([1.0 - s - t, t, s])
    pts, wts = [], []
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        p = lam[:, perm]
        pts.append(np.column_stack([p[:, 2], p[:, 1]]))
        wts.append(w / 6.0)
    return np.concatenate(pts), np.concatenate(wts)


def rule_table(degree: int):
    """(points (n,2), weights (n,)) for an embedded rule of the given degree."""
    if degree in _CLASSIC:
        rows = _CLASSIC[degree]
        pts = np.array([(s, t) for s, t, _ in rows])
        wts = np.array([w for _, _, w in rows])
        return pts, wts
    if degree in _CONICAL_M:
        return _conical_symmetric(degree)
    raise KeyError(degree)


SUPPORTED_DEGREES = tuple(sorted(set(_CLASSIC) | set(_CONICAL_M)))
