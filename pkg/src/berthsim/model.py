"""Declarative model structures: the process graph, scenarios, and validation.

A :class:`ModelDef` is pure data (safe to pickle across workers).  Static
validation promises that a clean model never raises structural faults at
runtime: dangling links, unsatisfiable captures, unknown valves or states.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import UnknownResourceError
from .expr import Formula, Predicate, PredicateEvalError
from .stochastics import Distribution, constant

__all__ = [
    "ELEMENT_KINDS",
    "ElementDef",
    "LinkDef",
    "ResourceDecl",
    "StateDecl",
    "FileDecl",
    "DisruptionSpec",
    "ModelDef",
    "ScenarioOverlay",
    "Diagnostic",
    "validate",
    "apply_overlay",
]

ELEMENT_KINDS = frozenset({
    "create", "task", "capture", "release", "preempt", "batch", "unbatch",
    "generate", "consolidate", "conditional_branch", "probabilistic_branch",
    "valve", "activator", "execute", "counter", "destroy",
})

# outgoing-link arity: (min, max) per kind; branch ports are named
_OUT_ARITY = {
    "create": (1, 1), "task": (1, 1), "capture": (1, 1), "release": (1, 1),
    "preempt": (1, 1), "batch": (1, 1), "unbatch": (1, 1), "generate": (2, 2),
    "consolidate": (1, 1), "conditional_branch": (2, 2),
    "probabilistic_branch": (2, None), "valve": (0, 1), "activator": (1, 1),
    "execute": (1, 1), "counter": (1, 1), "destroy": (0, 0),
}


@dataclass(frozen=True)
class ResourceDecl:
    name: str
    servers: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class StateDecl:
    name: str
    initial: float
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FileDecl:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LinkDef:
    src: str
    port: str  # "out" unless the source kind has named ports
    dst: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ElementDef:
    id: str
    kind: str
    params: dict
    line: int = field(default=0, compare=False)

    def __hash__(self):
        return hash(self.id)


@dataclass(frozen=True)
class DisruptionSpec:
    """One sub-model block: weather outages or an equipment breakdown."""

    name: str
    kind: str  # "weather" | "breakdown"
    params: dict
    active: bool = True
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ModelDef:
    name: str
    berth_length: float
    resources: tuple[ResourceDecl, ...] = ()
    states: tuple[StateDecl, ...] = ()
    files: tuple[FileDecl, ...] = ()
    elements: tuple[ElementDef, ...] = ()
    links: tuple[LinkDef, ...] = ()
    submodels: tuple[DisruptionSpec, ...] = ()

    def resource(self, name: str) -> ResourceDecl:
        for r in self.resources:
            if r.name == name:
                return r
        raise UnknownResourceError(f"resource {name!r} is not declared")

    def element(self, eid: str) -> ElementDef | None:
        for e in self.elements:
            if e.id == eid:
                return e
        return None

    def submodel(self, name: str) -> DisruptionSpec | None:
        for s in self.submodels:
            if s.name == name:
                return s
        return None


@dataclass(frozen=True)
class ScenarioOverlay:
    """What-if configuration applied on top of a base model."""

    name: str
    resource_overrides: dict = field(default_factory=dict)
    submodel_toggles: dict = field(default_factory=dict)
    duration_noise: str = "off"  # off | triangular10
    replications: int = 100
    master_seed: int = 42
    comment: str = ""
    line: int = field(default=0, compare=False)


@dataclass
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int = 0
    col: int = 0
    file: str = "<model>"
    element_id: str = ""

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.message}"


def _err(diags, message, line=0, element_id=""):
    diags.append(Diagnostic("error", message, line=line, element_id=element_id))


def validate(model: ModelDef) -> list[Diagnostic]:
    """Static checks; an empty list means every ModelDef invariant holds."""
    diags: list[Diagnostic] = []

    seen = set()
    for decl in (*model.resources, *model.states, *model.files):
        if decl.name in seen:
            _err(diags, f"duplicate declaration {decl.name!r}", decl.line)
        seen.add(decl.name)
    resources = {r.name: r for r in model.resources}
    for r in model.resources:
        if r.servers < 1:
            _err(diags, f"resource {r.name!r} needs at least one server", r.line)
    states = {s.name for s in model.states}
    files = {f.name for f in model.files}

    ids = {}
    for el in model.elements:
        if el.id in ids:
            _err(diags, f"duplicate element id {el.id!r}", el.line, el.id)
        ids[el.id] = el
        if el.kind not in ELEMENT_KINDS:
            _err(diags, f"unknown element kind {el.kind!r}", el.line, el.id)
    valves = {el.id for el in model.elements if el.kind == "valve"}

    out_links: dict[str, list[LinkDef]] = {el: [] for el in ids}
    for link in model.links:
        if link.src not in ids:
            _err(diags, f"dangling link: source {link.src!r} not declared", link.line)
            continue
        if link.dst not in ids:
            _err(diags, f"dangling link: target {link.dst!r} not declared", link.line)
            continue
        out_links[link.src].append(link)

    for el in model.elements:
        if el.kind not in ELEMENT_KINDS:
            continue
        outs = out_links.get(el.id, [])
        lo, hi = _OUT_ARITY[el.kind]
        if len(outs) < lo or (hi is not None and len(outs) > hi):
            bound = f"exactly {lo}" if lo == hi else f"between {lo} and {hi or 'n'}"
            _err(diags, f"{el.kind} {el.id!r} needs {bound} outgoing links, has {len(outs)}",
                 el.line, el.id)
        _check_params(el, outs, resources, states, valves, files, diags)

    if not any(el.kind == "create" for el in model.elements):
        _err(diags, "model needs at least one create element")
    if not any(el.kind == "destroy" for el in model.elements):
        _err(diags, "model needs at least one destroy element")

    # reachability from creates; standalone valves (pure gates) are exempt
    reach = {el.id for el in model.elements if el.kind == "create"}
    frontier = list(reach)
    while frontier:
        src = frontier.pop()
        for link in out_links.get(src, ()):
            if link.dst not in reach:
                reach.add(link.dst)
                frontier.append(link.dst)
    in_degree = {eid: 0 for eid in ids}
    for link in model.links:
        if link.dst in in_degree:
            in_degree[link.dst] += 1
    for el in model.elements:
        standalone_gate = el.kind == "valve" and in_degree[el.id] == 0 and not out_links[el.id]
        if el.id not in reach and not standalone_gate:
            _err(diags, f"element {el.id!r} unreachable from any create", el.line, el.id)

    for sub in model.submodels:
        if sub.kind == "weather":
            valve = sub.params.get("valve")
            if valve is not None and valve not in valves:
                _err(diags, f"weather sub-model {sub.name!r} references undeclared valve "
                     f"{valve!r}", sub.line)
        elif sub.kind == "breakdown":
            res = sub.params.get("resource")
            if res not in resources:
                _err(diags, f"breakdown sub-model {sub.name!r} references undeclared "
                     f"resource {res!r}", sub.line)
        else:
            _err(diags, f"sub-model {sub.name!r} has unknown type {sub.kind!r}", sub.line)

    return diags


def _check_params(el, outs, resources, states, valves, files, diags):
    p = el.params
    kind = el.kind

    def need(key, typ, cond=None, why=""):
        value = p.get(key)
        if value is None or (typ is not None and not isinstance(value, typ)):
            _err(diags, f"{kind} {el.id!r} needs parameter {key!r}", el.line, el.id)
            return None
        if cond is not None and not cond(value):
            _err(diags, f"{kind} {el.id!r}: {key}={value!r} {why}", el.line, el.id)
        return value

    if kind == "create":
        need("count", int, lambda v: v >= 1, "must be >= 1")
        inter = p.get("interarrival")
        if inter is not None and not isinstance(inter, Distribution):
            _err(diags, f"create {el.id!r}: interarrival must be a distribution", el.line, el.id)
    elif kind == "task":
        need("dur", Distribution)
        gate = p.get("gated_by")
        if gate is not None and gate not in valves:
            _err(diags, f"task {el.id!r} gated by undeclared valve {gate!r}", el.line, el.id)
    elif kind in ("capture", "release"):
        key = "requests" if kind == "capture" else "releases"
        pairs = p.get(key)
        if not pairs:
            _err(diags, f"{kind} {el.id!r} needs parameter {key!r}", el.line, el.id)
            return
        for res, n in pairs:
            if res not in resources:
                _err(diags, f"{kind} {el.id!r} references undeclared resource {res!r}",
                     el.line, el.id)
            elif n < 1:
                _err(diags, f"{kind} {el.id!r}: server count for {res} must be >= 1",
                     el.line, el.id)
            elif kind == "capture" and n > resources[res].servers:
                _err(diags, f"capture {el.id!r}: unsatisfiable request {res}:{n} "
                     f"(only {resources[res].servers} servers declared)", el.line, el.id)
        wait = p.get("file")
        if wait is not None and wait not in files:
            _err(diags, f"capture {el.id!r} references undeclared file {wait!r}", el.line, el.id)
    elif kind == "preempt":
        res = p.get("resource")
        if res not in resources:
            _err(diags, f"preempt {el.id!r} references undeclared resource {res!r}",
                 el.line, el.id)
        if p.get("mode", "take") not in ("take", "return"):
            _err(diags, f"preempt {el.id!r}: mode must be take or return", el.line, el.id)
    elif kind in ("batch", "consolidate"):
        need("size", int, lambda v: v >= 1, "must be >= 1")
    elif kind == "generate":
        need("count", int, lambda v: v >= 1, "must be >= 1")
        ports = {link.port for link in outs}
        if outs and ports != {"main", "clone"}:
            _err(diags, f"generate {el.id!r} needs one 'main' and one 'clone' link",
                 el.line, el.id)
    elif kind == "conditional_branch":
        when = p.get("when")
        if when is None:
            _err(diags, f"conditional_branch {el.id!r} needs parameter 'when'", el.line, el.id)
        else:
            try:
                Predicate(when)
            except PredicateEvalError as exc:
                _err(diags, f"conditional_branch {el.id!r}: {exc}", el.line, el.id)
        ports = {link.port for link in outs}
        if outs and ports != {"true", "false"}:
            _err(diags, f"conditional_branch {el.id!r} needs 'true' and 'false' links",
                 el.line, el.id)
    elif kind == "probabilistic_branch":
        probs = p.get("probs")
        if not probs:
            _err(diags, f"probabilistic_branch {el.id!r} needs parameter 'probs'",
                 el.line, el.id)
            return
        if any(not (0.0 <= q <= 1.0) for q in probs) or abs(sum(probs) - 1.0) > 1e-9:
            _err(diags, f"probabilistic_branch {el.id!r}: probabilities {probs} "
                 f"must lie in [0,1] and sum to 1", el.line, el.id)
        if outs and len(outs) != len(probs):
            _err(diags, f"probabilistic_branch {el.id!r}: {len(probs)} probabilities but "
                 f"{len(outs)} outgoing links", el.line, el.id)
    elif kind == "valve":
        if p.get("initially", "open") not in ("open", "closed"):
            _err(diags, f"valve {el.id!r}: initially must be open or closed", el.line, el.id)
    elif kind == "activator":
        valve = p.get("valve")
        if valve not in valves:
            _err(diags, f"activator {el.id!r} references undeclared valve {valve!r}",
                 el.line, el.id)
        if p.get("set") not in ("open", "closed"):
            _err(diags, f"activator {el.id!r}: set must be open or closed", el.line, el.id)
    elif kind == "execute":
        formula = p.get("formula")
        if formula is None:
            _err(diags, f"execute {el.id!r} needs parameter 'formula'", el.line, el.id)
        else:
            try:
                Formula(formula)
            except PredicateEvalError as exc:
                _err(diags, f"execute {el.id!r}: {exc}", el.line, el.id)
    elif kind == "counter":
        stop = p.get("stop_at")
        if stop is not None and (not isinstance(stop, int) or stop < 1):
            _err(diags, f"counter {el.id!r}: stop_at must be a positive integer",
                 el.line, el.id)


def apply_overlay(model: ModelDef, overlay: ScenarioOverlay) -> ModelDef:
    """Model with the overlay's resource counts and sub-model toggles applied."""
    for name in overlay.resource_overrides:
        model.resource(name)  # raises UnknownResourceError
    resources = tuple(
        replace(r, servers=int(overlay.resource_overrides.get(r.name, r.servers)))
        for r in model.resources
    )
    known = {s.name for s in model.submodels}
    for name in overlay.submodel_toggles:
        if name not in known:
            raise UnknownResourceError(f"scenario {overlay.name!r} toggles undeclared "
                                       f"sub-model {name!r}")
    submodels = tuple(
        replace(s, active=bool(overlay.submodel_toggles.get(s.name, s.active)))
        for s in model.submodels
    )
    return replace(model, resources=resources, submodels=submodels)


def with_duration_noise(model: ModelDef, mode: str) -> ModelDef:
    """Wrap constant task durations as triangular(0.9d, d, 1.1d) when asked."""
    if mode == "off":
        return model
    if mode != "triangular10":
        raise ValueError(f"unknown duration_noise mode {mode!r}")
    elements = []
    for el in model.elements:
        if el.kind == "task":
            dur = el.params.get("dur")
            if isinstance(dur, Distribution) and dur.kind == "constant" and dur.params[0] > 0:
                d = dur.params[0]
                params = dict(el.params)
                params["dur"] = Distribution("triangular", (0.9 * d, d, 1.1 * d))
                el = replace(el, params=params)
        elements.append(el)
    return replace(model, elements=tuple(elements))
