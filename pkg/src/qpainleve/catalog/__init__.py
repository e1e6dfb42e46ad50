"""Machine-readable data for the five quantum Painlevé systems.

One data file per system (``data/*.cat``), structured text with a versioned
header: the Hamiltonian, its time weight and parameter constraint, every
canonical chart with its golden chart Hamiltonian, the alpha-form
(symmetrized) Hamiltonian with its parameter dictionary, and the Bäcklund
generator table with straightening charts for inverted affine elements.

Expressions are stored in the canonical grammar and re-parsed on load; each
loaded expression is checked to round-trip through the printer.  The data
directory can be overridden with the ``QPAINLEVE_CATALOG_DIR`` environment
variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from ..coeff import ParamPoly, ParamRat, QQ
from ..grammar import parse, evaluate, parse_scalar, ParseError, EvalError
from ..weyl import Algebra, WeylExpr

__all__ = [
    "SYSTEM_LABELS",
    "CatalogError",
    "PainleveSystem",
    "CanonicalChart",
    "NagoyaSystem",
    "StraighteningChart",
    "SymmetryGenerator",
    "get_system",
    "get_charts",
    "get_chart",
    "get_golden",
    "get_nagoya",
    "get_symmetries",
    "get_symmetry",
    "load_bundle",
]

SYSTEM_LABELS = ("II", "III", "IV", "V", "VI")

CATALOG_DIR_ENV = "QPAINLEVE_CATALOG_DIR"


class CatalogError(ValueError):
    pass


@dataclass
class PainleveSystem:
    label: str
    algebra: Algebra
    hamiltonian: WeylExpr
    weight: ParamPoly                  # g(t)
    params: tuple[str, ...]
    constraint_sym: str                # symbol eliminated by the constraint
    constraint_value: ParamPoly        # its replacement
    constraint_kind: str               # "normalization" | "definition"

    @property
    def H(self) -> WeylExpr:
        return self.hamiltonian

    def constraint_binding(self) -> dict[str, ParamPoly]:
        return {self.constraint_sym: self.constraint_value}


@dataclass
class CanonicalChart:
    system: str
    index: int
    base: "CanonicalChart | None"
    laurent_side: str                   # "first" | "second"
    algebra: Algebra                    # the chart's own (x, y) algebra
    source_algebra: Algebra             # frame the backward maps live in
    forward: tuple[WeylExpr, WeylExpr]  # source pair expressed in chart vars
    backward: tuple[WeylExpr, WeylExpr]  # chart vars expressed in source frame
    golden: WeylExpr | None
    drift: bool = True                  # include g(t) dX/dt of the transition
    variant: bool = False               # characterization twin, not a catalog chart

    @property
    def name(self) -> str:
        return f"{self.system}:{self.index}" + ("v" if self.variant else "")


@dataclass
class StraighteningChart:
    backward: tuple[WeylExpr, WeylExpr]   # (U, V) as expressions in (q, p, t)
    forward: tuple[WeylExpr, WeylExpr]    # (q, p) as expressions in (U, V, t)
    laurent_side: str                     # "first" (U inverted) | "second" (V)
    algebra: Algebra                      # the (U, V) algebra


@dataclass
class NagoyaSystem:
    label: str
    raw_text: str
    hamiltonian: WeylExpr                # normal-ordered on load
    alpha_constraint: ParamPoly          # zero form
    param_maps: list[dict[str, ParamRat]]
    subs: dict[str, ParamRat] = field(default_factory=dict)
    weighted: bool = False


@dataclass
class SymmetryGenerator:
    system: str
    name: str
    alpha_map: dict[str, ParamPoly]
    q_text: str
    p_text: str
    t_map: ParamPoly
    laurent_var: str | None              # "q" | "p" | None
    straighten: StraighteningChart | None

    @property
    def task(self) -> str:
        return f"{self.system}:{self.name}"


# ---------------------------------------------------------------------------
# file parsing
# ---------------------------------------------------------------------------

def _data_text(label: str) -> str:
    override = os.environ.get(CATALOG_DIR_ENV)
    if override:
        path = os.path.join(override, f"{label}.cat")
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    return resources.files(__package__).joinpath(f"data/{label}.cat").read_text("utf-8")


def _roundtrip_weyl(e: WeylExpr) -> WeylExpr:
    from ..grammar import parse as gparse, evaluate as gevaluate
    text = e.text()
    env = dict(e.algebra.env())
    back = gevaluate(gparse(text), env)
    if not isinstance(back, WeylExpr):
        back = e.algebra.scalar(back)
    if back != e:
        raise CatalogError(f"printer round-trip failed for {text!r}")
    return e


def _eval_weyl(text: str, algebra: Algebra, names=None) -> WeylExpr:
    env = {}
    vnames = names if names is not None else algebra.names
    env[vnames[0]] = algebra.var(0)
    env[vnames[1]] = algebra.var(1)
    try:
        val = evaluate(parse(text), env)
    except (ParseError, EvalError) as exc:
        raise CatalogError(f"bad catalog expression {text!r}: {exc}") from exc
    if not isinstance(val, WeylExpr):
        val = algebra.scalar(val)
    return _roundtrip_weyl(val)


def _eval_poly(text: str) -> ParamPoly:
    val = parse_scalar(text)
    if not val.is_poly():
        raise CatalogError(f"expected a polynomial: {text!r}")
    return val.num


class _Block:
    def __init__(self, kind: str, arg: str):
        self.kind = kind
        self.arg = arg
        self.entries: list[tuple[str, str]] = []


def _split_blocks(text: str):
    header: list[tuple[str, str]] = []
    blocks: list[_Block] = []
    current: _Block | None = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key in ("chart", "chartvariant", "nagoya", "symmetry"):
            current = _Block(key, rest)
            blocks.append(current)
            continue
        if current is None:
            header.append((key, rest))
        else:
            current.entries.append((key, rest))
    return header, blocks


def _entry_map(entries, key):
    return [rest for k, rest in entries if k == key]


def _parse_assign(rest: str) -> tuple[str, str]:
    lhs, eq, rhs = rest.partition("=")
    if not eq:
        raise CatalogError(f"expected an assignment: {rest!r}")
    return lhs.strip(), rhs.strip()


@dataclass
class CatalogBundle:
    system: PainleveSystem
    charts: list[CanonicalChart]
    nagoya: NagoyaSystem
    symmetries: list[SymmetryGenerator]
    chart_variants: list[CanonicalChart] = field(default_factory=list)

    def characterization_charts(self) -> list[CanonicalChart]:
        """Charts used by the residue-condition assembly: catalog charts,
        with any chartvariant twin replacing its same-index original."""
        by_index = {ch.index: ch for ch in self.charts}
        by_index.update({ch.index: ch for ch in self.chart_variants})
        return [by_index[ch.index] for ch in self.charts]


@lru_cache(maxsize=None)
def load_bundle(label: str) -> CatalogBundle:
    if label not in SYSTEM_LABELS:
        raise CatalogError(f"unknown system label {label!r}")
    header, blocks = _split_blocks(_data_text(label))
    head = dict(header)
    if head.get("version") != "1":
        raise CatalogError(f"unsupported catalog version {head.get('version')!r}")
    if head.get("label") != label:
        raise CatalogError("catalog label does not match file name")

    qp = Algebra(("q", "p"))
    hamiltonian = _eval_weyl(head["hamiltonian"], qp)
    weight = _eval_poly(head["g"])
    params = tuple(head["params"].split())
    ckind, crest = head["constraint"].split(None, 1)
    csym, cval = _parse_assign(crest)
    system = PainleveSystem(
        label=label,
        algebra=qp,
        hamiltonian=hamiltonian,
        weight=weight,
        params=params,
        constraint_sym=csym,
        constraint_value=_eval_poly(cval),
        constraint_kind=ckind,
    )

    charts: list[CanonicalChart] = []
    variants: list[CanonicalChart] = []
    nagoya: NagoyaSystem | None = None
    symmetries: list[SymmetryGenerator] = []

    for block in blocks:
        if block.kind == "chart":
            charts.append(_load_chart(label, block, charts))
        elif block.kind == "chartvariant":
            variants.append(_load_chart(label, block, charts, variant=True))
        elif block.kind == "nagoya":
            nagoya = _load_nagoya(label, block)
        else:
            symmetries.append(_load_symmetry(label, block))

    if nagoya is None:
        raise CatalogError(f"catalog for {label} lacks the alpha-form block")
    return CatalogBundle(system, charts, nagoya, symmetries, variants)


def _load_chart(label: str, block: _Block, earlier: list[CanonicalChart],
                variant: bool = False) -> CanonicalChart:
    entries = dict()
    for k, rest in block.entries:
        if k in ("q", "p", "x", "y"):
            lhs, rhs = k, rest.lstrip("= ").strip()
            entries[lhs] = rhs
        else:
            entries[k] = rest
    index = int(block.arg)
    base = None
    if "base" in entries:
        base_idx = int(entries["base"])
        base = next(ch for ch in earlier if ch.index == base_idx)
    side = {"x": "first", "y": "second"}[entries["laurent"]]
    own = Algebra(("x", "y"), laurent=side)
    if base is None:
        source = Algebra(("q", "p"), laurent=side)
        src_names = ("q", "p")
    else:
        source = Algebra(("x", "y"), laurent=side)
        src_names = ("q", "p")  # file-local aliases for the base pair
    forward = (
        _eval_weyl(entries["q"], own),
        _eval_weyl(entries["p"], own),
    )
    backward = (
        _eval_weyl(entries["x"], source, names=src_names),
        _eval_weyl(entries["y"], source, names=src_names),
    )
    golden = None
    if "golden" in entries:
        golden = _eval_weyl(entries["golden"], own)
        # the printed lists carry no constant term; normal-ordering the
        # written products may produce a spurious central constant
        golden = golden - golden.algebra.scalar(golden.constant_part())
    return CanonicalChart(
        system=label,
        index=index,
        base=base,
        laurent_side=side,
        algebra=own,
        source_algebra=source,
        forward=forward,
        backward=backward,
        golden=golden,
        drift=entries.get("drift", "") != "none",
        variant=variant,
    )


def _load_nagoya(label: str, block: _Block) -> NagoyaSystem:
    qp = Algebra(("q", "p"))
    constraint = None
    raw = None
    weighted = False
    maps: dict[str, ParamRat] = {}
    altmaps: dict[str, ParamRat] = {}
    subs: dict[str, ParamRat] = {}
    for k, rest in block.entries:
        if k == "constraint":
            lhs, rhs = _parse_assign(rest)
            constraint = parse_scalar(lhs) - parse_scalar(rhs)
        elif k == "hamiltonian":
            raw = rest
        elif k == "weighted":
            weighted = True
        elif k == "map":
            name, rhs = _parse_assign(rest)
            maps[name] = parse_scalar(rhs)
        elif k == "altmap":
            name, rhs = _parse_assign(rest)
            altmaps[name] = parse_scalar(rhs)
        elif k == "subs":
            name, rhs = _parse_assign(rest)
            subs[name] = parse_scalar(rhs)
        else:
            raise CatalogError(f"unknown alpha-form entry {k!r}")
    if raw is None or constraint is None:
        raise CatalogError("alpha-form block needs a hamiltonian and a constraint")
    if not constraint.is_poly():
        raise CatalogError("alpha constraint must be polynomial")
    ham = _eval_weyl(raw, qp)
    param_maps = [maps]
    if altmaps:
        param_maps.append(altmaps)
    return NagoyaSystem(
        label=label,
        raw_text=raw,
        hamiltonian=ham,
        alpha_constraint=constraint.num,
        param_maps=param_maps,
        subs=subs,
        weighted=weighted,
    )


def _load_symmetry(label: str, block: _Block) -> SymmetryGenerator:
    alpha_map: dict[str, ParamPoly] = {}
    q_text = p_text = None
    t_map = ParamPoly.sym("t")
    laurent_var = None
    st: dict[str, str] = {}
    for k, rest in block.entries:
        if k == "alpha":
            name, rhs = _parse_assign(rest)
            alpha_map[name] = _eval_poly(rhs)
        elif k == "q":
            q_text = rest.lstrip("= ").strip()
        elif k == "p":
            p_text = rest.lstrip("= ").strip()
        elif k == "tmap":
            t_map = _eval_poly(rest)
        elif k == "laurent":
            laurent_var = rest
        elif k == "straighten":
            words = rest.split()
            if words and words[0] == "laurent":
                # written as: straighten laurent U
                st["laurent"] = words[1]
            else:
                key, _, rhs = rest.partition("=")
                st[key.strip()] = rhs.strip()
    if q_text is None or p_text is None:
        raise CatalogError(f"symmetry {block.arg} needs q and p maps")
    straighten = None
    if st:
        side = {"U": "first", "V": "second"}[st["laurent"]]
        uv = Algebra(("U", "V"), laurent=side)
        qp = Algebra(("q", "p"))
        straighten = StraighteningChart(
            backward=(
                _eval_weyl(st["U"], qp),
                _eval_weyl(st["V"], qp),
            ),
            forward=(
                _eval_weyl(st["q"], uv),
                _eval_weyl(st["p"], uv),
            ),
            laurent_side=side,
            algebra=uv,
        )
    return SymmetryGenerator(
        system=label,
        name=block.arg,
        alpha_map=alpha_map,
        q_text=q_text,
        p_text=p_text,
        t_map=t_map,
        laurent_var=laurent_var,
        straighten=straighten,
    )


# ---------------------------------------------------------------------------
# public accessors
# ---------------------------------------------------------------------------

def get_system(label: str) -> PainleveSystem:
    return load_bundle(label).system


def get_charts(label: str) -> list[CanonicalChart]:
    return load_bundle(label).charts


def get_chart(label: str, index: int) -> CanonicalChart:
    for ch in load_bundle(label).charts:
        if ch.index == index:
            return ch
    raise CatalogError(f"system {label} has no chart {index}")


def get_golden(label: str, index: int) -> WeylExpr:
    golden = get_chart(label, index).golden
    if golden is None:
        raise CatalogError(f"no golden chart Hamiltonian for {label}:{index}")
    return golden


def get_nagoya(label: str) -> NagoyaSystem:
    return load_bundle(label).nagoya


def get_symmetries(label: str) -> list[SymmetryGenerator]:
    return load_bundle(label).symmetries


def get_symmetry(label: str, name: str) -> SymmetryGenerator:
    for gen in load_bundle(label).symmetries:
        if gen.name == name:
            return gen
    raise CatalogError(f"system {label} has no generator {name!r}")
