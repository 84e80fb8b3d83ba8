"""Classify the relation between computed spectra.

Relations: ``susy_shift`` (``E+_n = E-_{n+1}``, ``E-_0 = 0``),
``iso_spectral`` (``E+_n = E-_n``), ``twins``, ``quadruplet`` and ``none``.
All comparisons use the complex modulus of the difference.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InsufficientConverged
from .spectra import Spectrum

# Differences are compared as d <= tol * (1 + REL_SLACK).  Decimal table
# values such as 4.0070227 - 4.0060227 land a few ulps above 1e-3 in binary.
REL_SLACK = 1e-9
DEFAULT_DEPTH = 5


def within(d, tol):
    return bool(np.all(np.asarray(d) <= tol * (1 + REL_SLACK)))


@dataclass
class PairingReport:
    relation: str
    pairs: list
    ground_energy: Optional[complex]
    tolerance: float
    depth: int
    flags: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def max_deviation(self):
        return max((p[2] for p in self.pairs), default=0.0)

    def to_dict(self):
        d = asdict(self)
        g = self.ground_energy
        d["ground_energy"] = None if g is None else [float(np.real(g)), float(np.imag(g))]
        d["pairs"] = [[int(a), int(b), float(c)] for a, b, c in self.pairs]
        d["max_deviation"] = float(self.max_deviation)
        return d

    def to_json(self, **kw):
        kw.setdefault("indent", 2)
        kw.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kw)


def _values(s):
    if isinstance(s, Spectrum):
        return s.converged_values()
    return np.asarray(s, dtype=complex)


def _require(vals, n, what):
    for v in vals:
        if len(v) < n:
            raise InsufficientConverged(f"{what} needs at least {n} converged values, got {len(v)}")


def _shift_test(up, down, k, tol):
    """``|down_0| <= tol`` and ``|up_n - down_{n+1}| <= tol`` for ``n < k-1``."""
    m = min(k - 1, len(up), len(down) - 1)
    if m < 1:
        return False, []
    d = np.abs(up[:m] - down[1:m + 1])
    ok = within(abs(down[0]), tol) and within(d, tol)
    return ok, [(n, n + 1, float(d[n])) for n in range(m)]


def match_spectra(s_plus, s_minus, tol: float, k: Optional[int] = None) -> PairingReport:
    """Compare a partner pair.

    Both orientations of the SUSY shift are tested: the zero mode normally
    sits in ``H-``; if it sits in ``H+`` the relation is still
    ``susy_shift`` and ``verdicts["orientation"]`` is ``"reversed"``.
    When the shift and iso-spectral tests both pass the relation is
    ``iso_spectral`` and both flags are set.
    """
    p, m = _values(s_plus), _values(s_minus)
    _require((p, m), 2, "match_spectra")
    k = k or min(len(p), len(m), DEFAULT_DEPTH)
    k = min(k, len(p), len(m))

    iso_d = np.abs(p[:k] - m[:k])
    iso = within(iso_d, tol)
    fwd, fwd_pairs = _shift_test(p, m, k, tol)
    rev, rev_pairs = _shift_test(m, p, k, tol)
    susy = fwd or rev

    if iso:
        relation = "iso_spectral"
        pairs = [(n, n, float(iso_d[n])) for n in range(k)]
    elif susy:
        relation = "susy_shift"
        pairs = fwd_pairs if fwd else [(b, a, d) for a, b, d in rev_pairs]
    else:
        relation = "none"
        pairs = []

    if fwd or (not rev and abs(m[0]) <= abs(p[0])):
        ground = m[0]
    else:
        ground = p[0]
    verdicts = {
        "ground_zero": within(abs(ground), tol),
        "orientation": "normal" if fwd else ("reversed" if rev else None),
    }
    return PairingReport(
        relation=relation, pairs=pairs, ground_energy=complex(ground), tolerance=tol, depth=k,
        flags={"susy_shift": bool(susy), "iso_spectral": bool(iso)}, verdicts=verdicts,
    )


def _agree(a, b, k, tol):
    d = np.abs(a[:k] - b[:k])
    return within(d, tol), d


def twins_check(h1p, h1m, h2p, h2m, tol: float, k: Optional[int] = None) -> PairingReport:
    """Two partner pairs whose plus members and minus members coincide.

    Each pair must itself be related (SUSY shift, or iso-spectral in the
    degenerate case of identical spectra).
    """
    vals = [_values(s) for s in (h1p, h1m, h2p, h2m)]
    _require(vals, 4, "twins_check")
    k = min(k or min(map(len, vals)), *map(len, vals))
    a, b, c, d = vals
    plus_ok, dp = _agree(a, c, k, tol)
    minus_ok, dm = _agree(b, d, k, tol)
    inner = match_spectra(a, b, tol, k)
    twins = plus_ok and minus_ok and inner.relation != "none"
    quad = all(_agree(a, v, k, tol)[0] for v in (b, c, d))
    pairs = [(n, n, float(max(dp[n], dm[n]))) for n in range(k)]
    return PairingReport(
        relation="twins" if twins else "none", pairs=pairs if twins else [],
        ground_energy=inner.ground_energy, tolerance=tol, depth=k,
        flags={"twins": twins, "quadruplet": quad, "plus_match": plus_ok, "minus_match": minus_ok,
               "pair_relation": inner.relation},
        verdicts=dict(inner.verdicts),
    )


def quadruplet_check(s1, s2, s3, s4, tol: float, k: Optional[int] = None) -> PairingReport:
    """Four spectra that agree elementwise (against the first)."""
    vals = [_values(s) for s in (s1, s2, s3, s4)]
    _require(vals, 4, "quadruplet_check")
    k = min(k or min(map(len, vals)), *map(len, vals))
    dev = np.max([np.abs(vals[0][:k] - v[:k]) for v in vals[1:]], axis=0)
    quad = within(dev, tol)
    return PairingReport(
        relation="quadruplet" if quad else "none",
        pairs=[(n, n, float(dev[n])) for n in range(k)] if quad else [],
        ground_energy=complex(vals[0][0]), tolerance=tol, depth=k,
        flags={"quadruplet": quad},
        verdicts={"max_deviation": float(dev.max())},
    )
