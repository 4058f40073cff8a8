"""Manifold configuration files (YAML; JSON also parses).

Schema::

    preset: flat | newtonian | sampled

    # newtonian only
    potential:                    # Phi = sum coefficient * t^a x^b y^c z^d
      - {coefficient: 0.5, exponents: [0, 1, 0, 0]}
    metric: comoving              # optional; or "static"

    # sampled only
    grid:
      shape: [nt, nx, ny, nz]
      spacing: [dt, dx, dy, dz]
      origin: [t0, x0, y0, z0]    # optional, defaults to zeros
    samples:                      # flattened in C order, grid index first
      g: [...]                    # nt*nx*ny*nz*16 numbers
      tau: [...]                  # ... *4
      V: [...]                    # ... *4
      Gamma: [...]                # ... *64, Gamma[k, l, m] = Gamma^k_{l m}

Every validation error names the offending field path and its source line.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .newton_cartan import FlatField, NCField, NewtonianField, SampledField

PRESETS = ("flat", "newtonian", "sampled")
SAMPLE_SIZES = {"g": 16, "tau": 4, "V": 4, "Gamma": 64}


class _Doc:
    """Parsed data plus the node tree used to recover line numbers."""

    def __init__(self, text: str):
        try:
            self.data = yaml.safe_load(text)
            self.root = yaml.compose(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ConfigError(f"not valid YAML: {getattr(exc, 'problem', exc)}", "<document>",
                              mark.line + 1 if mark else None) from exc

    def line(self, path: tuple):
        node = self.root
        best = node.start_mark.line + 1 if node is not None else None
        for key in path:
            if isinstance(node, yaml.MappingNode):
                nxt = None
                for k, v in node.value:
                    if k.value == key:
                        nxt = v
                        best = k.start_mark.line + 1
                        break
                node = nxt
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
                best = node.start_mark.line + 1
            else:
                break
            if node is None:
                break
        return best

    def error(self, msg: str, path: tuple):
        return ConfigError(msg, _fmt(path), self.line(path))


def _fmt(path: tuple) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _number(doc: _Doc, value, path) -> float:
    if isinstance(value, bool):
        raise doc.error("expected a number, got a boolean", path)
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise doc.error(f"expected a number, got {value!r}", path) from None
    if not np.isfinite(out):
        raise doc.error("number must be finite", path)
    return out


def _numbers(doc: _Doc, value, path, length=None) -> np.ndarray:
    if not isinstance(value, list):
        raise doc.error(f"expected a list, got {type(value).__name__}", path)
    if length is not None and len(value) != length:
        raise doc.error(f"expected {length} entries, got {len(value)}", path)
    return np.array([_number(doc, v, path + (i,)) for i, v in enumerate(value)])


def _mapping(doc: _Doc, value, path) -> dict:
    if not isinstance(value, dict):
        raise doc.error(f"expected a mapping, got {type(value).__name__}", path)
    return value


def _require(doc: _Doc, mapping: dict, key: str, path):
    if key not in mapping:
        raise doc.error(f"missing required field '{key}'", path)
    return mapping[key]


def _unknown(doc: _Doc, mapping: dict, allowed, path):
    for key in mapping:
        if key not in allowed:
            raise doc.error(f"unknown field '{key}'", path + (key,))


def parse_config(text: str) -> NCField:
    doc = _Doc(text)
    top = _mapping(doc, doc.data, ())
    preset = _require(doc, top, "preset", ())
    if preset not in PRESETS:
        raise doc.error(f"preset must be one of {', '.join(PRESETS)}; got {preset!r}", ("preset",))

    if preset == "flat":
        _unknown(doc, top, ("preset",), ())
        return FlatField()

    if preset == "newtonian":
        _unknown(doc, top, ("preset", "potential", "metric"), ())
        pot = _require(doc, top, "potential", ())
        if not isinstance(pot, list) or not pot:
            raise doc.error("expected a non-empty list of monomials", ("potential",))
        terms = []
        for i, term in enumerate(pot):
            p = ("potential", i)
            term = _mapping(doc, term, p)
            _unknown(doc, term, ("coefficient", "exponents"), p)
            coeff = _number(doc, _require(doc, term, "coefficient", p), p + ("coefficient",))
            exps = _numbers(doc, _require(doc, term, "exponents", p), p + ("exponents",), 4)
            if np.any(exps < 0) or np.any(exps != np.round(exps)):
                raise doc.error("exponents must be non-negative integers", p + ("exponents",))
            terms.append((coeff, tuple(int(e) for e in exps)))
        metric = top.get("metric", "comoving")
        if metric not in ("comoving", "static"):
            raise doc.error(f"metric must be 'comoving' or 'static'; got {metric!r}", ("metric",))
        return NewtonianField(terms, metric)

    _unknown(doc, top, ("preset", "grid", "samples"), ())
    grid = _mapping(doc, _require(doc, top, "grid", ()), ("grid",))
    _unknown(doc, grid, ("shape", "spacing", "origin"), ("grid",))
    shape = _numbers(doc, _require(doc, grid, "shape", ("grid",)), ("grid", "shape"), 4)
    if np.any(shape < 1) or np.any(shape != np.round(shape)):
        raise doc.error("shape entries must be positive integers", ("grid", "shape"))
    shape = tuple(int(n) for n in shape)
    spacing = _numbers(doc, _require(doc, grid, "spacing", ("grid",)), ("grid", "spacing"), 4)
    if np.any(spacing <= 0):
        raise doc.error("spacings must be positive", ("grid", "spacing"))
    origin = _numbers(doc, grid.get("origin", [0, 0, 0, 0]), ("grid", "origin"), 4)
    samples = _mapping(doc, _require(doc, top, "samples", ()), ("samples",))
    _unknown(doc, samples, tuple(SAMPLE_SIZES), ("samples",))
    nodes = int(np.prod(shape))
    arrays = {}
    for key, size in SAMPLE_SIZES.items():
        arrays[key] = _numbers(doc, _require(doc, samples, key, ("samples",)), ("samples", key), nodes * size)
    return SampledField(shape, spacing, origin, arrays["g"], arrays["tau"], arrays["V"], arrays["Gamma"])


def load_config(path) -> NCField:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    return parse_config(text)


def sampled_to_config(field: SampledField) -> dict:
    return {
        "preset": "sampled",
        "grid": {
            "shape": list(field.shape),
            "spacing": field.spacing.tolist(),
            "origin": field.origin.tolist(),
        },
        "samples": {
            "g": field.g.ravel().tolist(),
            "tau": field.tau.ravel().tolist(),
            "V": field.V.ravel().tolist(),
            "Gamma": field.Gamma.ravel().tolist(),
        },
    }
