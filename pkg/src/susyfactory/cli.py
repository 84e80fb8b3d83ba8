"""Command-line front end.

Exit codes: 0 success or expected relation found, 1 relation mismatch,
2 invalid input, 3 not converged.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

from . import expr as ex
from .discretize import FiniteDifference, OscillatorBasis
from .errors import ConfigError, InsufficientConverged, NoConvergence, SusyError
from .coeff import format_coeff, lower
from .operator import build_pair, symmetry_flags, to_p_text
from .presets import EXPECTED_RELATION, PRESETS, preset_pairs, run_preset
from .spectra import converge
from .verify import match_spectra, quadruplet_check, twins_check

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2, 3
EXPECT_CHOICES = ("susy", "iso", "twins", "quadruplet", "any")
EXPECT_FLAG = {"susy": "susy_shift", "iso": "iso_spectral", "twins": "twins", "quadruplet": "quadruplet"}


@dataclass
class RunConfig:
    w: Optional[str] = None
    w1: Optional[str] = None
    w2: Optional[str] = None
    params: dict = field(default_factory=dict)
    convention: Optional[str] = None
    scale: Optional[float] = None
    method: str = "ho"
    n_keep: int = 100
    n_build: Optional[int] = None
    omega: float = 1.0
    grid: tuple = (-10.0, 10.0, 1000)
    theta: float = 0.0
    domain: str = "full"
    contour: str = "rotated"
    tol: Optional[float] = None
    depth: int = 5
    expect: Optional[str] = None
    out: Optional[str] = None
    format: str = "csv"
    preset: Optional[str] = None

    def validate(self):
        if self.preset is not None:
            if self.preset not in PRESETS:
                raise ConfigError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        else:
            conv = self.convention or ("type2" if (self.w1 or self.w2) else "type1")
            self.convention = conv
            if conv not in ("type1", "type2", "type3"):
                raise ConfigError(f"convention must be type1, type2 or type3, got {conv!r}")
            if conv == "type2":
                if not (self.w1 and self.w2) or self.w:
                    raise ConfigError("type2 needs --w1 and --w2 (and no --w)")
            elif not self.w or self.w1 or self.w2:
                raise ConfigError(f"{conv} needs exactly one superpotential via --w")
        if self.expect is not None and self.expect not in EXPECT_CHOICES:
            raise ConfigError(f"expect must be one of {', '.join(EXPECT_CHOICES)}")
        if self.method not in ("ho", "fd"):
            raise ConfigError("method must be ho or fd")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.depth < 1:
            raise ConfigError("depth must be positive")
        if self.scale is not None and self.scale == 0:
            raise ConfigError("scale must be nonzero")
        for k, v in self.params.items():
            if not math.isfinite(v):
                raise ConfigError(f"parameter {k} must be finite")
        return self


_KEYS = {f.name for f in fields(RunConfig)}


def _parse_grid(text):
    try:
        lo, hi, pts = str(text).split(":")
        return float(lo), float(hi), int(pts)
    except ValueError:
        raise ConfigError(f"grid must be MIN:MAX:PTS, got {text!r}") from None


def _parse_param(text):
    if "=" not in text:
        raise ConfigError(f"--param expects name=value, got {text!r}")
    name, val = text.split("=", 1)
    try:
        return name.strip(), float(val)
    except ValueError:
        raise ConfigError(f"parameter {name!r} needs a real value, got {val!r}") from None


def load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None
    out = {}
    for key, val in raw.items():
        k = key.replace("-", "_")
        if k in ("param", "params"):
            if not isinstance(val, dict):
                raise ConfigError("param must be a table of name = value")
            out["params"] = {n: float(v) for n, v in val.items()}
        elif k == "grid":
            out["grid"] = _parse_grid(val) if isinstance(val, str) else tuple(val)
        elif k in _KEYS:
            out[k] = val
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return out


def build_parser():
    ap = argparse.ArgumentParser(prog="susyfactory", description="SUSY partner Hamiltonians and their spectra")
    ap.add_argument("command", choices=("factor", "spectrum", "verify", "classify", "table"))
    ap.add_argument("name", nargs="?", help="preset name (table command)")
    S = argparse.SUPPRESS
    ap.add_argument("--config", default=S)
    ap.add_argument("--preset", default=S, choices=PRESETS)
    ap.add_argument("--w", default=S)
    ap.add_argument("--w1", default=S)
    ap.add_argument("--w2", default=S)
    ap.add_argument("--param", action="append", default=S, metavar="NAME=VALUE")
    ap.add_argument("--convention", default=S, choices=("type1", "type2", "type3"))
    ap.add_argument("--method", default=S, choices=("ho", "fd"))
    ap.add_argument("--n-keep", dest="n_keep", type=int, default=S)
    ap.add_argument("--n-build", dest="n_build", type=int, default=S)
    ap.add_argument("--omega", type=float, default=S)
    ap.add_argument("--grid", default=S, metavar="MIN:MAX:PTS")
    ap.add_argument("--theta", type=float, default=S)
    ap.add_argument("--domain", default=S, choices=("full", "half"))
    ap.add_argument("--contour", default=S, choices=("rotated", "pt"))
    ap.add_argument("--scale", type=float, default=S)
    ap.add_argument("--tol", type=float, default=S)
    ap.add_argument("--depth", type=int, default=S)
    ap.add_argument("--expect", default=S, choices=EXPECT_CHOICES)
    ap.add_argument("--out", default=S)
    ap.add_argument("--format", default=S, choices=("csv", "json"))
    return ap


def resolve_config(ns) -> RunConfig:
    vals = {}
    if "config" in ns:
        vals.update(load_config_file(ns.config))
    for k, v in vars(ns).items():
        if k in ("command", "name", "config"):
            continue
        if k == "param":
            params = dict(vals.get("params", {}))
            params.update(dict(_parse_param(p) for p in v))
            vals["params"] = params
        elif k == "grid":
            vals["grid"] = _parse_grid(v)
        else:
            vals[k] = v
    if ns.command == "table":
        if ns.name is None:
            raise ConfigError("table needs a preset name")
        vals["preset"] = ns.name
    try:
        return RunConfig(**vals).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# helpers


def _pairs(cfg) -> list:
    """``[(suffix, HamiltonianPair)]`` for the run."""
    if cfg.preset:
        pairs = preset_pairs(cfg.preset, cfg.params)
        if len(pairs) == 1:
            return [("", pairs[0])]
        first = 1 if cfg.preset == "table3" else 3
        return [(str(first + i), p) for i, p in enumerate(pairs)]
    if cfg.convention == "type2":
        pair = build_pair("type2", cfg.w1, cfg.w2, cfg.params, cfg.scale)
    else:
        pair = build_pair(cfg.convention, cfg.w, None, cfg.params, cfg.scale)
    return [("", pair)]


def _schemes(cfg):
    if cfg.method == "ho":
        out = []
        for s in (0.6, 0.8, 1.0):
            n = max(8, int(round(cfg.n_keep * s)))
            nb = max(2 * n, int(round(cfg.n_build * s))) if cfg.n_build else None
            out.append(OscillatorBasis(n, nb, cfg.omega))
        return out
    lo, hi, pts = cfg.grid
    return [FiniteDifference(lo, hi, max(3, p), cfg.theta, cfg.domain, cfg.contour)
            for p in (pts // 2, pts)]


def _members(cfg):
    """``[(label, Spectrum)]`` plus the preset result when applicable."""
    if cfg.preset:
        kw = {}
        if cfg.preset == "table1":
            kw = {k: cfg.params[k] for k in ("k", "g") if k in cfg.params}
        res = run_preset(cfg.preset, **kw)
        return [(m.label, m.spectrum) for m in res.members], res
    tol = cfg.tol if cfg.tol is not None else 1e-6
    out = []
    for _, pair in _pairs(cfg):
        for label, h in (("E+", pair.h_plus), ("E-", pair.h_minus)):
            out.append((label, converge(h, _schemes(cfg), tol=tol / 10, k=cfg.depth)))
    return out, None


def _g(v):
    v = float(v)
    return "0" if v == 0 else f"{v:.9g}"


def _emit(cfg, text):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _digits(s):
    return None if math.isinf(s.stability_digits) else round(float(s.stability_digits), 3)


# ---------------------------------------------------------------------------
# commands


def cmd_factor(cfg):
    rows = []
    for suffix, pair in _pairs(cfg):
        rows.append({
            "pair": suffix,
            "H+": to_p_text(pair.h_plus), "H-": to_p_text(pair.h_minus),
            "symmetry+": pair.symmetry_plus, "symmetry-": pair.symmetry_minus,
            "trivial": pair.trivial,
        })
    if cfg.format == "json":
        _emit(cfg, _json(rows))
    else:
        lines = []
        for r in rows:
            s = r["pair"]
            lines.append(f"H{s}+ = {r['H+']} ; H{s}- = {r['H-']}")
            lines.append(f"symmetry: H{s}+ {r['symmetry+']} ; H{s}- {r['symmetry-']}"
                         + (" ; trivial pair" if r["trivial"] else ""))
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def _spectrum_table(cfg, members, depth):
    if cfg.format == "json":
        return _json({
            "members": [{
                "label": lab,
                "eigenvalues": [[float(_g(z.real)), float(_g(z.imag))] for z in s.eigenvalues[:depth]],
                "converged": [bool(c) for c in s.converged[:depth]],
                "stability_digits": _digits(s),
                "scheme": s.scheme,
            } for lab, s in members],
        })
    head = ["n"]
    for lab, _ in members:
        head += [f"re({lab})", f"im({lab})"]
    head += [f"conv({lab})" for lab, _ in members]
    lines = [",".join(head)]
    for n in range(depth):
        row = [str(n)]
        for _, s in members:
            if n < len(s):
                row += [_g(s[n].real), _g(s[n].imag)]
            else:
                row += ["", ""]
        row += [str(int(n < len(s) and bool(s.converged[n]))) for _, s in members]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _depth(cfg, res):
    return res.report.depth if res is not None else cfg.depth


def cmd_spectrum(cfg):
    members, res = _members(cfg)
    depth = _depth(cfg, res)
    _emit(cfg, _spectrum_table(cfg, members, depth))
    if any(s.converged_count < min(depth, len(s)) for _, s in members):
        print("warning: not all requested levels converged", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _classify(cfg, members, res):
    spectra = [s for _, s in members]
    if res is not None:
        tol = cfg.tol if cfg.tol is not None else res.report.tolerance
        depth = res.report.depth
    else:
        tol = cfg.tol if cfg.tol is not None else 1e-6
        depth = cfg.depth
    if len(spectra) == 4:
        if cfg.preset == "table4" or cfg.expect == "quadruplet":
            return quadruplet_check(*spectra, tol=tol, k=depth)
        return twins_check(*spectra, tol=tol, k=depth)
    if cfg.expect in ("twins", "quadruplet"):
        raise ConfigError(f"expect={cfg.expect} needs two partner pairs (use a preset)")
    return match_spectra(spectra[0], spectra[1], tol, k=depth)


def cmd_verify(cfg):
    members, res = _members(cfg)
    depth = _depth(cfg, res)
    short = [lab for lab, s in members if s.converged_count < min(depth, len(s))]
    if short:
        print(f"not converged: {', '.join(short)}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    expect = cfg.expect or (EXPECTED_RELATION[cfg.preset] if cfg.preset else "any")
    rep = _classify(cfg, members, res)
    flag = EXPECT_FLAG.get(expect)
    ok = True if flag is None else bool(rep.flags.get(flag, rep.relation == flag))
    out = rep.to_dict()
    out["expected"] = expect
    out["match"] = ok
    if res is not None:
        dev = res.max_deviation()
        out["published_deviation"] = dev
        out["published_tolerance"] = res.published_tol
        if dev > res.published_tol:
            out["notes"] = list(out["notes"]) + ["paper-discrepancy"]
    _emit(cfg, _json(out))
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_classify(cfg):
    result = {"superpotentials": [], "hamiltonians": []}
    if cfg.preset:
        ws = []
    elif cfg.convention == "type2":
        ws = [cfg.w1, cfg.w2]
    else:
        ws = [cfg.w]
    for w in ws:
        e = ex.parse(w)
        result["superpotentials"].append({
            "w": w, "conj_reflect": format_coeff(lower(ex.conj_reflect(e), cfg.params)),
            "pt_invariant": ex.is_pt_invariant(e, cfg.params),
        })
    for suffix, pair in _pairs(cfg):
        for sign, h in (("+", pair.h_plus), ("-", pair.h_minus)):
            herm, pt = symmetry_flags(h)
            result["hamiltonians"].append({
                "label": f"H{suffix}{sign}", "operator": to_p_text(h),
                "hermitian": herm, "pt_symmetric": pt,
                "tag": "hermitian" if herm else ("pt_symmetric" if pt else "neither"),
            })
    if cfg.format == "json":
        _emit(cfg, _json(result))
        return EXIT_OK
    yn = {True: "yes", False: "no"}
    lines = [f"W = {s['w']} : PT-invariant: {yn[s['pt_invariant']]} (W*(-x) = {s['conj_reflect']})"
             for s in result["superpotentials"]]
    lines += [f"{h['label']} = {h['operator']} : {h['tag']} "
              f"(hermitian: {yn[h['hermitian']]}, pt_symmetric: {yn[h['pt_symmetric']]})"
              for h in result["hamiltonians"]]
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_table(cfg):
    members, res = _members(cfg)
    rep = _classify(cfg, members, res)
    expect = cfg.expect or EXPECTED_RELATION[cfg.preset]
    flag = EXPECT_FLAG.get(expect)
    ok = True if flag is None else bool(rep.flags.get(flag, False))
    rows = []
    for m in res.members:
        pub = res.published.get(m.label, [])
        for n in range(rep.depth):
            z = m.spectrum[n]
            p = pub[n] if n < len(pub) else None
            rows.append({"n": n, "member": m.label, "re": float(_g(z.real)), "im": float(_g(z.imag)),
                         "published": p, "deviation": None if p is None else float(_g(abs(z - p)))})
    if cfg.format == "json":
        _emit(cfg, _json({"table": cfg.preset, "rows": rows, "report": rep.to_dict(),
                          "published_deviation": res.max_deviation(), "published_tolerance": res.published_tol}))
    else:
        lines = ["n,member,re,im,published,deviation"]
        for r in rows:
            pub = "" if r["published"] is None else _g(r["published"])
            dev = "" if r["deviation"] is None else _g(r["deviation"])
            lines.append(f"{r['n']},{r['member']},{_g(r['re'])},{_g(r['im'])},{pub},{dev}")
        _emit(cfg, "\n".join(lines) + "\n")
    dev = res.max_deviation()
    flag = "ok" if dev <= res.published_tol else "paper-discrepancy"
    print(f"{cfg.preset}: relation={rep.relation} expected={expect} "
          f"published_deviation={dev:.3g} (tol {res.published_tol:g}, {flag})", file=sys.stderr)
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {"factor": cmd_factor, "spectrum": cmd_spectrum, "verify": cmd_verify,
            "classify": cmd_classify, "table": cmd_table}


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        return COMMANDS[ns.command](cfg)
    except (NoConvergence, InsufficientConverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (SusyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
