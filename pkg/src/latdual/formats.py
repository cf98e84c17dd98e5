"""Structured-text file formats: graphs, networks, weight tables,
correlator specs, task files, and reports.

All files are line oriented: ``key value...`` tokens separated by
whitespace, ``#`` starts a comment, blank lines ignored.  Writers emit a
single canonical serialization (fixed key order, fixed float format) so
reports can be compared byte for byte.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .groups import FiniteAbelianGroup, WeightFunction
from .planar_map import SPHERE, TORUS, CombinatorialMap, HomologyBasis

FLOAT_FMT = "%.17e"


def _fmt(x):
    return FLOAT_FMT % float(x)


def _lines(text):
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line.split()


# ---------------------------------------------------------------------------
# graphs and networks


def write_graph(m, homology=None, conductances=None):
    """Canonical graph (or network) file text."""
    out = ["latdual-graph 1", f"surface {m.surface}", f"darts {m.n_darts}"]
    for d in sorted(int(x) for x in m.edge_dart):
        out.append(f"alpha {d} {int(m.alpha[d])}")
    for orb in m.vertices:
        out.append("vertex " + " ".join(str(int(d)) for d in orb))
    if homology is not None:
        out.append("homology-a " + " ".join(map(str, homology.cycle_a)))
        out.append("homology-b " + " ".join(map(str, homology.cycle_b)))
    if conductances is not None:
        for e, c in enumerate(conductances):
            out.append(f"conductance {e} {_fmt(c)}")
    return "\n".join(out) + "\n"


def read_graph(text):
    """Parse a graph file; returns (map, homology or None, conductances
    or None)."""
    surface = None
    n_darts = None
    alpha_pairs = []
    rotations = []
    hom_a = hom_b = None
    conduct = {}
    header = False
    for ln, toks in _lines(text):
        key = toks[0]
        try:
            if key == "latdual-graph":
                header = True
            elif key == "surface":
                if toks[1] not in (SPHERE, TORUS):
                    raise ParseError(f"line {ln}: unknown surface {toks[1]}")
                surface = toks[1]
            elif key == "darts":
                n_darts = int(toks[1])
            elif key == "alpha":
                alpha_pairs.append((int(toks[1]), int(toks[2])))
            elif key == "vertex":
                rotations.append([int(t) for t in toks[1:]])
            elif key == "homology-a":
                hom_a = [int(t) for t in toks[1:]]
            elif key == "homology-b":
                hom_b = [int(t) for t in toks[1:]]
            elif key == "conductance":
                conduct[int(toks[1])] = float(toks[2])
            else:
                raise ParseError(f"line {ln}: unknown key {key!r}")
        except (IndexError, ValueError) as exc:
            raise ParseError(f"line {ln}: {exc}") from None
    if not header:
        raise ParseError("missing latdual-graph header")
    if surface is None or not rotations or not alpha_pairs:
        raise ParseError("incomplete graph file")
    from .planar_map import build_map
    m = build_map(rotations, alpha_pairs, surface)
    if n_darts is not None and n_darts != m.n_darts:
        raise ParseError("declared dart count does not match rotations")
    homology = None
    if hom_a is not None and hom_b is not None:
        homology = HomologyBasis(hom_a, hom_b)
        m._homology = homology
    cond = None
    if conduct:
        cond = np.array([conduct[e] for e in range(m.n_edges)])
    return m, homology, cond


# ---------------------------------------------------------------------------
# weight tables


def write_weight_table(w):
    out = ["latdual-weights 1",
           "group " + " ".join(str(q) for q in w.group.factors)]
    for g in range(w.group.order):
        v = w.values[g]
        out.append(f"w {g} {_fmt(v.real)} {_fmt(v.imag)}")
    return "\n".join(out) + "\n"


def read_weight_table(text):
    factors = None
    vals = {}
    for ln, toks in _lines(text):
        if toks[0] == "latdual-weights":
            continue
        if toks[0] == "group":
            factors = tuple(int(t) for t in toks[1:])
        elif toks[0] == "w":
            vals[int(toks[1])] = complex(float(toks[2]), float(toks[3]))
        else:
            raise ParseError(f"line {ln}: unknown key {toks[0]!r}")
    if factors is None:
        raise ParseError("missing group line")
    grp = FiniteAbelianGroup(*factors)
    try:
        values = [vals[g] for g in range(grp.order)]
    except KeyError as exc:
        raise ParseError(f"missing weight for element {exc}") from None
    return WeightFunction(grp, values)


# ---------------------------------------------------------------------------
# correlator specs


def write_correlator_spec(spec):
    out = ["latdual-correlator 1"]
    for v, c in spec.orders:
        out.append(f"order {v} {c}")
    for g, path in spec.defect_lines:
        out.append(f"defect {g} " + " ".join(map(str, path)))
    for path in spec.order_paths:
        out.append("orderpath " + " ".join(map(str, path)))
    return "\n".join(out) + "\n"


def read_correlator_spec(text):
    from .spin import CorrelatorSpec
    orders = []
    lines = []
    paths = []
    for ln, toks in _lines(text):
        if toks[0] == "latdual-correlator":
            continue
        if toks[0] == "order":
            orders.append((int(toks[1]), int(toks[2])))
        elif toks[0] == "defect":
            lines.append((int(toks[1]), [int(t) for t in toks[2:]]))
        elif toks[0] == "orderpath":
            paths.append([int(t) for t in toks[1:]])
        else:
            raise ParseError(f"line {ln}: unknown key {toks[0]!r}")
    return CorrelatorSpec(orders, lines, paths)


# ---------------------------------------------------------------------------
# tasks and reports


TASK_KINDS = ("partition", "correlator", "duality-check", "sample",
              "observable", "invariant-suite")


class TaskSpec:
    """Parsed task file: kind, model path, parameters, seed, output."""

    __slots__ = ("kind", "model", "params", "seed", "out")

    def __init__(self, kind, model=None, params=None, seed=0, out=None):
        if kind not in TASK_KINDS:
            raise ParseError(f"unknown task kind {kind!r}")
        self.kind = kind
        self.model = model
        self.params = dict(params or {})
        self.seed = int(seed)
        self.out = out


def read_task(text):
    kind = None
    model = None
    seed = 0
    out = None
    params = {}
    for ln, toks in _lines(text):
        if toks[0] == "latdual-task":
            continue
        if toks[0] == "kind":
            kind = toks[1]
        elif toks[0] == "model":
            model = " ".join(toks[1:])
        elif toks[0] == "seed":
            seed = int(toks[1])
        elif toks[0] == "out":
            out = " ".join(toks[1:])
        elif toks[0] == "param":
            if len(toks) < 3:
                raise ParseError(f"line {ln}: param needs a key and value")
            params[toks[1]] = " ".join(toks[2:])
        else:
            raise ParseError(f"line {ln}: unknown key {toks[0]!r}")
    if kind is None:
        raise ParseError("task file missing kind")
    return TaskSpec(kind, model, params, seed, out)


class Report:
    """Deterministic result report.

    Every numeric result carries a provenance label: ``exact``,
    ``truncated <tail bound>`` or ``sampled <n> <stderr>``.  The
    serialization is canonical (sorted result keys, fixed float format);
    wall time is deliberately excluded and logged to stderr instead, so
    identical (task, seed, version) runs produce identical bytes.
    """

    def __init__(self, task_kind, seed, version):
        self.task_kind = task_kind
        self.seed = seed
        self.version = version
        self.results = {}
        self.status = "PASS"

    def add_exact(self, name, value):
        self.results[name] = ("exact", complex(value), None, None)

    def add_truncated(self, name, value, tail_bound):
        self.results[name] = ("truncated", complex(value),
                              float(tail_bound), None)

    def add_sampled(self, name, value, n, stderr):
        self.results[name] = ("sampled", complex(value), float(n),
                              float(stderr))

    def fail(self):
        self.status = "FAIL"

    def render(self):
        out = ["latdual-report 1",
               f"task {self.task_kind}",
               f"seed {self.seed}",
               f"version {self.version}"]
        for name in sorted(self.results):
            kind, value, a, b = self.results[name]
            line = f"result {name} {kind} {_fmt(value.real)} {_fmt(value.imag)}"
            if kind == "truncated":
                line += f" tail {_fmt(a)}"
            elif kind == "sampled":
                line += f" n {int(a)} stderr {_fmt(b)}"
            out.append(line)
        out.append(f"status {self.status}")
        return "\n".join(out) + "\n"
