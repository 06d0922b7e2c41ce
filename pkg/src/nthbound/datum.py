"""Curve datum files.

One datum per file, in TOML::

    label = "196098.a.196098.1"
    genus = 2
    field_degree = 1
    rank = 2
    torsion_order = 4
    group_order = 4
    gram = [[2.116, -0.913], [-0.913, 3.324]]
    generator_heights = [2.117, 3.324]      # optional

    [[automorphisms]]
    name = "sigma"
    matrix = [[1, 0], [0, 1]]
    # identity = true marks the identity element of the group

    [mx]                                     # optional table
    value = 123.4                            # and/or:
    [mx.components]
    delta_sum = 5.0
    bad_primes = [{phi = 0.5, log_norm = 0.6931471805599453}]

Floats are read as decimals and converted to binary floating point once.
"""

from __future__ import annotations

import io
import math
import sys
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from .bounds import MXComponents, compute_mx
from .errors import DimensionError, InvalidComponent, ParseError, SchemaError

MX_AGREEMENT = 1e-6

_TOP_KEYS = {
    "label", "genus", "field_degree", "rank", "torsion_order", "group_order",
    "gram", "generator_heights", "automorphisms", "mx",
}


@dataclass(frozen=True)
class Automorphism:
    name: str
    matrix: tuple
    identity: bool = False


@dataclass(frozen=True)
class CurveDatum:
    label: str
    genus: int
    field_degree: int
    rank: int
    gram: tuple
    automorphisms: tuple
    group_order: int
    torsion_order: int = 1
    mx_value: Optional[float] = None
    mx_components: Optional[MXComponents] = None
    generator_heights: tuple = ()

    @property
    def mx(self) -> Optional[float]:
        """Gap-principle defect: the supplied value, else computed from components."""
        if self.mx_value is not None:
            return self.mx_value
        if self.mx_components is not None:
            return compute_mx(self.mx_components)
        return None


class _Checker:
    def __init__(self):
        self.errors = []
        self.dimension = False

    def fail(self, path, msg, dimension=False):
        self.errors.append((path, msg))
        self.dimension = self.dimension or dimension

    def integer(self, data, key, path, minimum=None, required=True, default=None):
        if key not in data:
            if required:
                self.fail(path, "missing required field")
            return default
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(path, f"expected an integer, got {type(v).__name__}")
            return default
        if minimum is not None and v < minimum:
            self.fail(path, f"must be >= {minimum}, got {v}")
            return default
        return v

    def number(self, v, path):
        if isinstance(v, bool) or not isinstance(v, (int, Decimal)):
            self.fail(path, f"expected a number, got {type(v).__name__}")
            return None
        x = float(v)
        if not math.isfinite(x):
            self.fail(path, "must be finite")
            return None
        return x

    def matrix(self, v, path, integer=False):
        if not isinstance(v, list) or not v or not all(isinstance(row, list) for row in v):
            self.fail(path, "expected a nonempty array of arrays")
            return None
        n = len(v)
        rows = []
        for i, row in enumerate(v):
            if len(row) != n:
                self.fail(f"{path}[{i}]", f"expected {n} entries (square matrix), got {len(row)}", dimension=True)
                return None
            out = []
            for j, x in enumerate(row):
                p = f"{path}[{i}][{j}]"
                if integer:
                    if isinstance(x, bool) or not isinstance(x, int):
                        self.fail(p, "expected an integer")
                        return None
                    out.append(x)
                else:
                    y = self.number(x, p)
                    if y is None:
                        return None
                    out.append(y)
            rows.append(tuple(out))
        return tuple(rows)


def _components(ck, data, genus, field_degree):
    if not isinstance(data, dict):
        ck.fail("mx.components", "expected a table")
        return None
    for k in data:
        if k not in ("delta_sum", "bad_primes"):
            ck.fail(f"mx.components.{k}", "unknown field")
    delta = 0.0
    if "delta_sum" in data:
        delta = ck.number(data["delta_sum"], "mx.components.delta_sum")
    else:
        ck.fail("mx.components.delta_sum", "missing required field")
    primes = []
    raw = data.get("bad_primes", [])
    if not isinstance(raw, list):
        ck.fail("mx.components.bad_primes", "expected an array of tables")
        raw = []
    for i, bp in enumerate(raw):
        p = f"mx.components.bad_primes[{i}]"
        if not isinstance(bp, dict) or set(bp) != {"phi", "log_norm"}:
            ck.fail(p, "expected a table with exactly the keys phi and log_norm")
            continue
        phi = ck.number(bp["phi"], p + ".phi")
        ln = ck.number(bp["log_norm"], p + ".log_norm")
        if phi is not None and ln is not None:
            primes.append((phi, ln))
    if delta is None or genus is None or field_degree is None:
        return None
    comp = MXComponents(genus, field_degree, delta, tuple(primes))
    try:
        compute_mx(comp)
    except InvalidComponent as exc:
        ck.fail("mx.components", str(exc))
        return None
    return comp


def datum_from_dict(data: dict) -> CurveDatum:
    """Validate a decoded document (floats as ``Decimal``) into a datum."""
    ck = _Checker()
    for k in data:
        if k not in _TOP_KEYS:
            ck.fail(k, "unknown field")

    label = data.get("label")
    if not isinstance(label, str) or not label:
        ck.fail("label", "expected a nonempty string")
    genus = ck.integer(data, "genus", "genus", minimum=2)
    field_degree = ck.integer(data, "field_degree", "field_degree", minimum=1)
    rank = ck.integer(data, "rank", "rank", minimum=1)
    torsion = ck.integer(data, "torsion_order", "torsion_order", minimum=1, required=False, default=1)
    group_order = ck.integer(data, "group_order", "group_order", minimum=1)

    gram = None
    if "gram" in data:
        gram = ck.matrix(data["gram"], "gram")
        if gram is not None and rank is not None and len(gram) != rank:
            ck.fail("gram", f"is {len(gram)}x{len(gram)} but rank is {rank}", dimension=True)
    else:
        ck.fail("gram", "missing required field")

    heights = ()
    if "generator_heights" in data:
        raw = data["generator_heights"]
        if not isinstance(raw, list):
            ck.fail("generator_heights", "expected an array")
        else:
            hs = [ck.number(x, f"generator_heights[{i}]") for i, x in enumerate(raw)]
            heights = tuple(h for h in hs if h is not None)
            if rank is not None and len(raw) != rank:
                ck.fail("generator_heights", f"has {len(raw)} entries but rank is {rank}", dimension=True)

    autos = []
    raw_autos = data.get("automorphisms", [])
    if not isinstance(raw_autos, list):
        ck.fail("automorphisms", "expected an array of tables")
        raw_autos = []
    names = set()
    for i, a in enumerate(raw_autos):
        p = f"automorphisms[{i}]"
        if not isinstance(a, dict):
            ck.fail(p, "expected a table")
            continue
        for k in a:
            if k not in ("name", "matrix", "identity"):
                ck.fail(f"{p}.{k}", "unknown field")
        name = a.get("name")
        if not isinstance(name, str) or not name:
            ck.fail(f"{p}.name", "expected a nonempty string")
            continue
        if name in names:
            ck.fail(f"{p}.name", f"duplicate automorphism name {name!r}")
        names.add(name)
        ident = a.get("identity", False)
        if not isinstance(ident, bool):
            ck.fail(f"{p}.identity", "expected a boolean")
            ident = False
        if "matrix" not in a:
            ck.fail(f"{p}.matrix", "missing required field")
            continue
        m = ck.matrix(a["matrix"], f"{p}.matrix", integer=True)
        if m is None:
            continue
        if rank is not None and len(m) != rank:
            ck.fail(f"{p}.matrix", f"is {len(m)}x{len(m)} but rank is {rank}", dimension=True)
        autos.append(Automorphism(name, m, ident))

    mx_value = mx_comp = None
    if "mx" in data:
        mx = data["mx"]
        if not isinstance(mx, dict) or not mx:
            ck.fail("mx", "expected a table with value and/or components")
        else:
            for k in mx:
                if k not in ("value", "components"):
                    ck.fail(f"mx.{k}", "unknown field")
            if "value" in mx:
                mx_value = ck.number(mx["value"], "mx.value")
                if mx_value is not None and mx_value <= 0:
                    ck.fail("mx.value", "must be positive")
                    mx_value = None
            if "components" in mx:
                mx_comp = _components(ck, mx["components"], genus, field_degree)
            if mx_value is not None and mx_comp is not None:
                computed = compute_mx(mx_comp)
                if abs(computed - mx_value) > MX_AGREEMENT * abs(mx_value):
                    ck.fail("mx", f"value {mx_value!r} disagrees with components ({computed!r}) beyond 1e-6 relative")

    if ck.errors:
        raise (DimensionError if ck.dimension else SchemaError)(ck.errors)
    return CurveDatum(
        label=label, genus=genus, field_degree=field_degree, rank=rank, gram=gram,
        automorphisms=tuple(autos), group_order=group_order, torsion_order=torsion,
        mx_value=mx_value, mx_components=mx_comp, generator_heights=heights,
    )


def loads(text: str) -> CurveDatum:
    if not text.strip():
        raise ParseError("empty input", line=1, column=1)
    try:
        data = tomllib.loads(text, parse_float=Decimal)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc), getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None
    return datum_from_dict(data)


def parse_datum(source) -> CurveDatum:
    """Read a datum from a path or a text stream."""
    if isinstance(source, (str, Path)):
        raw = Path(source).read_bytes()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    elif isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError(f"cannot read a datum from {type(source).__name__}")
    return loads(text)


def to_dict(d: CurveDatum) -> dict:
    out = {
        "label": d.label,
        "genus": d.genus,
        "field_degree": d.field_degree,
        "rank": d.rank,
        "torsion_order": d.torsion_order,
        "group_order": d.group_order,
        "gram": [list(row) for row in d.gram],
    }
    if d.generator_heights:
        out["generator_heights"] = list(d.generator_heights)
    if d.automorphisms:
        autos = []
        for a in d.automorphisms:
            t = {"name": a.name, "matrix": [list(row) for row in a.matrix]}
            if a.identity:
                t["identity"] = True
            autos.append(t)
        out["automorphisms"] = autos
    if d.mx_value is not None or d.mx_components is not None:
        mx = {}
        if d.mx_value is not None:
            mx["value"] = d.mx_value
        if d.mx_components is not None:
            c = d.mx_components
            mx["components"] = {
                "delta_sum": c.delta_sum,
                "bad_primes": [{"phi": phi, "log_norm": ln} for phi, ln in c.bad_primes],
            }
        out["mx"] = mx
    return out


def dumps(d: CurveDatum) -> str:
    return tomli_w.dumps(to_dict(d))
