"""Load system definitions from YAML documents.

Example (the Chaplygin sleigh)::

    format_version: 1
    name: sleigh
    coordinates: [x, y, theta]
    parameters: {m: 2.0, I: 1.5}
    metric:
      diagonal: [m, m, I]
    constraints:
      - [sin(theta), -cos(theta), 0]
    inputs:
      - [sin(theta), -cos(theta), 0]
    defaults:
      dt: 0.01
      t_final: 50
      gain: 1.0
      q0: [1, 1, pi]
      v0: [0.5, 8, 0.1]

``metric`` accepts ``diagonal`` (n expressions), ``matrix`` (n rows of n
expressions) or ``entries`` (a mapping ``"coord coord": expression``,
symmetric, unlisted entries zero). Optional keys: ``potential`` (an
expression in the coordinates) and ``external_force`` (n covector
components, which may also use the velocity symbols ``d<coord>``).
Every expression may use the coordinates and the named parameters.
"""
from __future__ import annotations

import keyword
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import yaml

from . import expr
from .dynamics import RhsKind
from .errors import ConfigError, VncError
from .geometry import MetricField, OneFormField
from .model import ChartSystem, ConstraintSet, InputSet, State
from .simulation import SimConfig

FORMAT_VERSION = 1
_RESERVED = set(expr.FUNCTIONS) | set(expr.CONSTANTS) | {"_div", "_pow"}


@dataclass(frozen=True)
class SystemDefinition:
    name: str
    system: ChartSystem
    constraints: ConstraintSet
    inputs: InputSet
    config: SimConfig

    @property
    def problem(self):
        return self.system, self.constraints, self.inputs


class _Doc:
    """A YAML value together with the 1-based position of its node."""

    def __init__(self, node: yaml.Node):
        self.node = node
        self.line = node.start_mark.line + 1
        self.column = node.start_mark.column + 1

    def error(self, msg) -> ConfigError:
        return ConfigError(msg, self.line, self.column)

    @property
    def is_map(self):
        return isinstance(self.node, yaml.MappingNode)

    @property
    def is_seq(self):
        return isinstance(self.node, yaml.SequenceNode)

    def items(self) -> list[tuple[str, "_Doc"]]:
        if not self.is_map:
            raise self.error("expected a mapping")
        out = []
        for k, v in self.node.value:
            if not isinstance(k, yaml.ScalarNode):
                raise _Doc(k).error("mapping keys must be plain strings")
            out.append((k.value, _Doc(v)))
        return out

    def get(self, key, required=True) -> Optional["_Doc"]:
        for k, v in self.items():
            if k == key:
                return v
        if required:
            raise self.error(f"missing required key {key!r}")
        return None

    def seq(self, length=None) -> list["_Doc"]:
        if not self.is_seq:
            raise self.error("expected a list")
        items = [_Doc(n) for n in self.node.value]
        if length is not None and len(items) != length:
            raise self.error(f"expected {length} entries, got {len(items)}")
        return items

    def scalar(self) -> Any:
        if not isinstance(self.node, yaml.ScalarNode):
            raise self.error("expected a scalar")
        return yaml.constructor.SafeConstructor().construct_object(self.node)

    def expression(self, symbols) -> expr.Node:
        value = self.scalar()
        # quoted scalars start one column after the mark
        col = self.column + (1 if self.node.style in ("'", '"') else 0)
        return expr.parse(value, symbols, self.line, col)

    def number(self, symbols=()) -> float:
        node = self.expression(symbols)
        if expr.free_symbols(node):
            raise self.error("expected a constant expression")
        return float(expr.evaluate(node, {}))


def load_system(source: Union[str, Path], is_text: bool = False) -> SystemDefinition:
    """Parse a system definition from a file path (or from text with ``is_text``)."""
    text = source if is_text else Path(source).read_text()
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as err:
        mark = err.problem_mark or err.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ConfigError(f"YAML syntax error: {err.problem or err}", line, col) from None
    if root is None:
        raise ConfigError("empty system definition")
    doc = _Doc(root)
    try:
        return _build(doc)
    except ConfigError:
        raise
    except (VncError, ValueError) as err:
        raise ConfigError(str(err)) from None


def _build(doc: _Doc) -> SystemDefinition:
    version_doc = doc.get("format_version")
    version = version_doc.scalar()
    if version != FORMAT_VERSION:
        raise version_doc.error(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    known = {"format_version", "name", "coordinates", "parameters", "metric", "potential",
             "constraints", "inputs", "external_force", "defaults"}
    for key, value in doc.items():
        if key not in known:
            raise value.error(f"unknown key {key!r}")

    name_doc = doc.get("name", required=False)
    name = str(name_doc.scalar()) if name_doc else "custom"

    coord_docs = doc.get("coordinates").seq()
    coords = []
    for c in coord_docs:
        label = c.scalar()
        if not isinstance(label, str) or not label.isidentifier() or keyword.iskeyword(label) \
                or label in _RESERVED:
            raise c.error(f"invalid coordinate name {label!r}")
        if label in coords:
            raise c.error(f"duplicate coordinate {label!r}")
        coords.append(label)
    n = len(coords)
    if n == 0:
        raise doc.get("coordinates").error("no coordinates")
    velocities = ["d" + c for c in coords]

    params: dict[str, float] = {}
    params_doc = doc.get("parameters", required=False)
    if params_doc is not None:
        for key, value in params_doc.items():
            if not key.isidentifier() or keyword.iskeyword(key) or key in _RESERVED \
                    or key in coords or key in velocities:
                raise value.error(f"invalid parameter name {key!r}")
            params[key] = float(expr.evaluate(value.expression(list(params)), params))

    def field_expr(d: _Doc, symbols) -> expr.Node:
        node = d.expression(list(symbols) + list(params))
        return _substitute(node, params)

    metric = _metric(doc.get("metric"), coords, field_expr)

    potential_doc = doc.get("potential", required=False)
    potential = gradient = None
    if potential_doc is not None:
        pnode = field_expr(potential_doc, coords)
        pfun = expr.compile_vector([pnode], coords)
        gfun = expr.compile_vector([expr.derivative(pnode, c) for c in coords], coords)
        potential = lambda q, f=pfun: f(*q)[0]
        gradient = lambda q, f=gfun: np.array(f(*q))

    force_doc = doc.get("external_force", required=False)
    external_force = None
    if force_doc is not None:
        nodes = [field_expr(d, coords + velocities) for d in force_doc.seq(n)]
        ffun = expr.compile_vector(nodes, coords + velocities)
        external_force = lambda q, v, f=ffun: np.array(f(*q, *v))

    kwargs = {}
    if potential is not None:
        kwargs.update(potential=potential, potential_gradient=gradient)
    system = ChartSystem(n, tuple(coords), metric, external_force=external_force, name=name, **kwargs)

    constraint_forms = [_one_form(d, coords, field_expr) for d in doc.get("constraints").seq()]
    input_docs = doc.get("inputs").seq()
    input_forms = [_one_form(d, coords, field_expr) for d in input_docs]
    if not constraint_forms:
        raise doc.get("constraints").error("at least one constraint is required")
    if len(constraint_forms) >= n:
        raise doc.get("constraints").error("need fewer constraints than coordinates")
    if len(input_forms) != len(constraint_forms):
        raise doc.get("inputs").error(
            f"{len(input_forms)} inputs for {len(constraint_forms)} constraints; they must match")
    constraints = ConstraintSet(tuple(constraint_forms))
    inputs = InputSet.from_forms(metric, input_forms)

    config = _defaults(doc.get("defaults", required=False), n)
    return SystemDefinition(name, system, constraints, inputs, config)


def _substitute(node: expr.Node, params: dict) -> expr.Node:
    if isinstance(node, expr.Sym) and node.name in params:
        return expr.Num(params[node.name])
    if isinstance(node, expr.Neg):
        return expr.simplify(expr.Neg(_substitute(node.arg, params)))
    if isinstance(node, expr.Call):
        return expr.Call(node.func, _substitute(node.arg, params))
    if isinstance(node, expr.BinOp):
        return expr.simplify(expr.BinOp(node.op, _substitute(node.left, params),
                                        _substitute(node.right, params)))
    return node


def _metric(d: _Doc, coords, field_expr) -> MetricField:
    n = len(coords)
    zero = expr.ZERO
    grid = [[zero] * n for _ in range(n)]
    keys = [k for k, _ in d.items()]
    if len(keys) != 1 or keys[0] not in ("diagonal", "matrix", "entries"):
        raise d.error("metric needs exactly one of 'diagonal', 'matrix' or 'entries'")
    kind, body = d.items()[0]
    if kind == "diagonal":
        for i, item in enumerate(body.seq(n)):
            grid[i][i] = field_expr(item, coords)
    elif kind == "matrix":
        for i, row in enumerate(body.seq(n)):
            for j, item in enumerate(row.seq(n)):
                grid[i][j] = field_expr(item, coords)
        for i in range(n):
            for j in range(i):
                if grid[i][j] != grid[j][i]:
                    raise body.error(f"metric matrix is not symmetric at ({i + 1}, {j + 1})")
    else:
        for key, item in body.items():
            parts = key.replace(",", " ").split()
            if len(parts) != 2 or any(p not in coords for p in parts):
                raise item.error(f"metric entry key {key!r} must name two coordinates")
            i, j = coords.index(parts[0]), coords.index(parts[1])
            grid[i][j] = grid[j][i] = field_expr(item, coords)

    flat_nodes = [grid[i][j] for i in range(n) for j in range(n)]
    gfun = expr.compile_vector(flat_nodes, coords, shape=(n, n))
    if not any(expr.free_symbols(node) for node in flat_nodes):
        G = np.array(gfun(*([0.0] * n)))
        zeros = np.zeros((n, n, n))
        return MetricField(n, lambda q: G, lambda q: zeros, constant=True)
    # partials[i][j][k] = dG_ij/dq^k
    dnodes = [expr.derivative(grid[i][j], c) for i in range(n) for j in range(n) for c in coords]
    dfun = expr.compile_vector(dnodes, coords)
    return MetricField(n, lambda q: np.array(gfun(*q)),
                       lambda q: np.array(dfun(*q)).reshape(n, n, n))


def _one_form(d: _Doc, coords, field_expr) -> OneFormField:
    n = len(coords)
    nodes = [field_expr(item, coords) for item in d.seq(n)]
    fun = expr.compile_vector(nodes, coords)
    jnodes = [expr.derivative(node, c) for node in nodes for c in coords]
    jfun = expr.compile_vector(jnodes, coords, shape=(n, n))
    return OneFormField(n, lambda q: np.array(fun(*q)), lambda q: np.array(jfun(*q)))


def _defaults(d: Optional[_Doc], n: int) -> SimConfig:
    values = {"dt": 0.01, "t_final": 10.0, "gain": 1.0}
    q0 = [0.0] * n
    v0 = [0.0] * n
    if d is not None:
        for key, item in d.items():
            if key in values:
                values[key] = item.number()
            elif key == "q0":
                q0 = [x.number() for x in item.seq(n)]
            elif key == "v0":
                v0 = [x.number() for x in item.seq(n)]
            else:
                raise item.error(f"unknown defaults key {key!r}")
    try:
        return SimConfig(values["dt"], values["t_final"], State(q0, v0),
                         RhsKind.stabilizing(values["gain"]))
    except (ConfigError, ValueError) as err:
        raise (d.error(str(err)) if d is not None else ConfigError(str(err))) from None
