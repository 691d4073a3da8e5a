"""Text formats: the canonical mesh file, the PolyMesher export, solution CSV.

Canonical mesh file (UTF-8, '#' starts a comment)::

    veamy-mesh 1
    nodes <n>
    <x> <y>                       # n lines
    elements <m>
    <k> <i0> ... <i(k-1)>         # m lines, 0-based
    essential <p>                 # optional
    node <idx> <x|y|b> <value>
    natural <q>                   # optional
    segment <i0> <i1> <tx> <ty>

PolyMesher export::

    <NNodes> <NElems>
    <x> <y>                       # NNodes lines
    <k> <v1> ... <vk>             # NElems lines, 1-based
    supp <ns>
    <node> <fx_flag> <fy_flag>    # 1-based node, flags in {0, 1}
    load <nl>
    <node> <Fx> <Fy>              # 1-based node
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import geometry
from .errors import DegenerateElement, MeshFormatError, MeshIndexError
from .mesh import Mesh
from .model import ESSENTIAL, NATURAL, Constraint, ProblemConditions

MAGIC = "veamy-mesh"
VERSION = "1"
AXES = {"x": "x", "y": "y", "b": "both"}


def fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class MeshFile:
    mesh: Mesh
    essential: list = field(default_factory=list)  # (node, axis, value)
    natural: list = field(default_factory=list)  # (i0, i1, tx, ty)

    def constraints(self) -> list:
        out = []
        for node, axis, value in self.essential:
            out.append(Constraint.point(self.mesh.nodes[node], kind=ESSENTIAL,
                                        direction=AXES[axis], value=value))
        for i0, i1, tx, ty in self.natural:
            out.append(Constraint.segment(self.mesh.nodes[i0], self.mesh.nodes[i1], kind=NATURAL,
                                          direction="both", value=(tx, ty)))
        return out


def render_mesh(mesh: Mesh, essential=(), natural=()) -> str:
    lines = [f"{MAGIC} {VERSION}", f"nodes {mesh.n_nodes}"]
    lines += [f"{fmt(x)} {fmt(y)}" for x, y in mesh.nodes]
    lines.append(f"elements {mesh.n_elements}")
    lines += [" ".join(str(i) for i in (len(e), *e)) for e in mesh.elements]
    if essential:
        lines.append(f"essential {len(essential)}")
        lines += [f"node {n} {axis} {fmt(v)}" for n, axis, v in essential]
    if natural:
        lines.append(f"natural {len(natural)}")
        lines += [f"segment {a} {b} {fmt(tx)} {fmt(ty)}" for a, b, tx, ty in natural]
    return "\n".join(lines) + "\n"


class _Lines:
    """Iterator over meaningful lines, remembering 1-based line numbers."""

    def __init__(self, text: str):
        self._items = []
        for no, raw in enumerate(text.splitlines(), start=1):
            content = raw.split("#", 1)[0].strip()
            if content:
                self._items.append((no, content.split()))
        self._pos = 0

    def next(self, what: str):
        if self._pos >= len(self._items):
            last = self._items[-1][0] if self._items else 0
            raise MeshFormatError(f"unexpected end of file, expected {what}", last + 1)
        item = self._items[self._pos]
        self._pos += 1
        return item

    def peek(self):
        return self._items[self._pos] if self._pos < len(self._items) else None

    @property
    def done(self) -> bool:
        return self._pos >= len(self._items)


def _int(tok: str, line: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MeshFormatError(f"expected an integer, got {tok!r}", line) from None


def _float(tok: str, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise MeshFormatError(f"expected a number, got {tok!r}", line) from None
    if not np.isfinite(v):
        raise MeshFormatError(f"non-finite value {tok!r}", line)
    return v


def _header(lines: _Lines, keyword: str) -> int:
    no, toks = lines.next(f"'{keyword} <count>'")
    if len(toks) != 2 or toks[0] != keyword:
        raise MeshFormatError(f"expected '{keyword} <count>', got {' '.join(toks)!r}", no)
    n = _int(toks[1], no)
    if n < 0:
        raise MeshFormatError("negative count", no)
    return n


def _read_nodes(lines: _Lines, n: int) -> np.ndarray:
    nodes = np.empty((n, 2))
    for i in range(n):
        no, toks = lines.next("node coordinates")
        if len(toks) != 2:
            raise MeshFormatError(f"node line needs 2 values, got {len(toks)}", no)
        nodes[i] = (_float(toks[0], no), _float(toks[1], no))
    return nodes


def _read_elements(lines: _Lines, m: int, n_nodes: int, base: int) -> list:
    elements = []
    for _ in range(m):
        no, toks = lines.next("element connectivity")
        k = _int(toks[0], no)
        if k < 3 or len(toks) != k + 1:
            raise MeshFormatError("element line must be '<k> <k indices>' with k >= 3", no)
        idx = [_int(t, no) - base for t in toks[1:]]
        for i in idx:
            if not 0 <= i < n_nodes:
                raise MeshIndexError(f"node index {i + base} out of range (have {n_nodes} nodes)", no)
        if len(set(idx)) != k:
            raise MeshFormatError("element repeats a node", no)
        elements.append((no, idx))
    return elements


def _finish_mesh(nodes: np.ndarray, raw_elements: list, metadata=None) -> Mesh:
    if len(nodes):
        tree_tol = 1e-10 * float(np.hypot(*(nodes.max(axis=0) - nodes.min(axis=0))))
        pairs = cKDTree(nodes).query_pairs(tree_tol) if tree_tol > 0 else set()
        if pairs:
            i, j = min(pairs)
            raise MeshFormatError(f"nodes {i} and {j} coincide")
    elements = []
    for no, idx in raw_elements:
        xy = nodes[idx]
        try:
            area = geometry.signed_area(None, xy)
        except DegenerateElement as exc:
            raise MeshFormatError(str(exc), no) from None
        if not geometry.is_simple(xy):
            raise MeshFormatError("element is not a simple polygon", no)
        elements.append(tuple(idx) if area > 0 else tuple(reversed(idx)))
    return Mesh(nodes=nodes, elements=elements, metadata=dict(metadata or {}))


def parse_mesh(text: str) -> MeshFile:
    lines = _Lines(text)
    no, toks = lines.next("header")
    if toks != [MAGIC, VERSION]:
        raise MeshFormatError(f"expected header '{MAGIC} {VERSION}'", no)
    nodes = _read_nodes(lines, _header(lines, "nodes"))
    raw = _read_elements(lines, _header(lines, "elements"), len(nodes), base=0)
    mesh = _finish_mesh(nodes, raw)

    essential, natural = [], []
    while not lines.done:
        no, toks = lines.peek()
        if toks[0] == "essential":
            count = _header(lines, "essential")
            for _ in range(count):
                no, toks = lines.next("essential entry")
                if len(toks) != 4 or toks[0] != "node" or toks[2] not in AXES:
                    raise MeshFormatError("essential entry must be 'node <idx> <x|y|b> <value>'", no)
                idx = _int(toks[1], no)
                if not 0 <= idx < mesh.n_nodes:
                    raise MeshIndexError(f"node index {idx} out of range", no)
                essential.append((idx, toks[2], _float(toks[3], no)))
        elif toks[0] == "natural":
            count = _header(lines, "natural")
            for _ in range(count):
                no, toks = lines.next("natural entry")
                if len(toks) != 5 or toks[0] != "segment":
                    raise MeshFormatError("natural entry must be 'segment <i0> <i1> <tx> <ty>'", no)
                i0, i1 = _int(toks[1], no), _int(toks[2], no)
                for i in (i0, i1):
                    if not 0 <= i < mesh.n_nodes:
                        raise MeshIndexError(f"node index {i} out of range", no)
                natural.append((i0, i1, _float(toks[3], no), _float(toks[4], no)))
        else:
            raise MeshFormatError(f"unknown section {toks[0]!r}", no)
    return MeshFile(mesh=mesh, essential=essential, natural=natural)


def parse_polymesher(text: str):
    """Read a PolyMesher export; returns ``(mesh, conditions)`` without a material."""
    lines = _Lines(text)
    no, toks = lines.next("'<NNodes> <NElems>'")
    if len(toks) != 2:
        raise MeshFormatError("header must be '<NNodes> <NElems>'", no)
    n_nodes, n_elems = _int(toks[0], no), _int(toks[1], no)
    nodes = _read_nodes(lines, n_nodes)
    raw = _read_elements(lines, n_elems, n_nodes, base=1)
    mesh = _finish_mesh(nodes, raw, metadata={"source": "polymesher"})

    constraints = []
    count = _header(lines, "supp")
    for _ in range(count):
        no, toks = lines.next("support row")
        if len(toks) != 3:
            raise MeshFormatError("support row must be '<node> <fx_flag> <fy_flag>'", no)
        node = _int(toks[0], no) - 1
        if not 0 <= node < n_nodes:
            raise MeshIndexError(f"node index {node + 1} out of range", no)
        flags = [_int(t, no) for t in toks[1:]]
        if any(f not in (0, 1) for f in flags):
            raise MeshFormatError("support flags must be 0 or 1", no)
        for axis, flag in zip(("x", "y"), flags):
            if flag:
                constraints.append(Constraint.point(nodes[node], kind=ESSENTIAL, direction=axis, value=0.0))
    count = _header(lines, "load")
    for _ in range(count):
        no, toks = lines.next("load row")
        if len(toks) != 3:
            raise MeshFormatError("load row must be '<node> <Fx> <Fy>'", no)
        node = _int(toks[0], no) - 1
        if not 0 <= node < n_nodes:
            raise MeshIndexError(f"node index {node + 1} out of range", no)
        fx, fy = _float(toks[1], no), _float(toks[2], no)
        constraints.append(Constraint.point(nodes[node], kind=NATURAL, direction="both", value=(fx, fy)))
    if not lines.done:
        raise MeshFormatError("trailing content after load section", lines.peek()[0])
    return mesh, ProblemConditions(constraints=constraints)


def render_polymesher(mesh: Mesh, supports=(), loads=()) -> str:
    """Inverse of ``parse_polymesher``; ``supports``/``loads`` use 0-based node ids."""
    lines = [f"{mesh.n_nodes} {mesh.n_elements}"]
    lines += [f"{fmt(x)} {fmt(y)}" for x, y in mesh.nodes]
    lines += [" ".join(str(v) for v in (len(e), *(i + 1 for i in e))) for e in mesh.elements]
    lines.append(f"supp {len(supports)}")
    lines += [f"{n + 1} {int(fx)} {int(fy)}" for n, fx, fy in supports]
    lines.append(f"load {len(loads)}")
    lines += [f"{n + 1} {fmt(fx)} {fmt(fy)}" for n, fx, fy in loads]
    return "\n".join(lines) + "\n"


def render_solution_csv(solution) -> str:
    nc = solution.n_components
    header = "node,x,y,u1" + (",u2" if nc == 2 else "")
    rows = [header]
    for i, ((x, y), u) in enumerate(zip(solution.mesh.nodes, solution.values)):
        rows.append(",".join([str(i), fmt(x), fmt(y), *(fmt(v) for v in u)]))
    return "\n".join(rows) + "\n"


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
