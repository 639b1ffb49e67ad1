"""sepprof-graph v1 text format.

Header: `#sepprof-graph 1 <vertex_count> <max_degree> <label>`
Body:   one `I <id>` line per interior vertex (ascending),
        one `E <u> <v>` line per edge with u < v (sorted).

The writer emits the canonical serialization used for content hashing, so
gen -> file -> load round-trips to a hash-equal graph.
"""

import hashlib

import numpy as np

from .errors import GraphFormatError
from .graph import Graph

FORMAT_NAME = "#sepprof-graph"
FORMAT_VERSION = 1


def _sanitize_label(label):
    label = str(label).strip() or "graph"
    return "".join(c if not c.isspace() else "-" for c in label)


def canonical_bytes(G):
    lines = [
        f"{FORMAT_NAME} {FORMAT_VERSION} {G.n} {G.max_degree} {_sanitize_label(G.label)}"
    ]
    for v in np.nonzero(G.interior)[0]:
        lines.append(f"I {v}")
    for u, v in G.edges():
        lines.append(f"E {u} {v}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def graph_digest(G):
    return hashlib.sha256(canonical_bytes(G)).hexdigest()


def write_graph(G, path):
    data = canonical_bytes(G)
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


def parse_graph(text):
    lines = [ln.rstrip("\n") for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GraphFormatError("empty graph file")
    head = lines[0].split()
    if len(head) < 5 or head[0] != FORMAT_NAME or head[1] != str(FORMAT_VERSION):
        raise GraphFormatError("bad header; expected '#sepprof-graph 1 ...'")
    try:
        n = int(head[2])
        max_degree = int(head[3])
    except ValueError as exc:
        raise GraphFormatError("non-integer vertex count or degree bound") from exc
    label = " ".join(head[4:])
    interior = np.zeros(n, dtype=bool)
    edges = []
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "I" and len(parts) == 2:
            v = int(parts[1])
            if not 0 <= v < n:
                raise GraphFormatError(f"interior id {v} out of range")
            interior[v] = True
        elif parts[0] == "E" and len(parts) == 3:
            u, v = int(parts[1]), int(parts[2])
            if not (0 <= u < v < n):
                raise GraphFormatError(f"edge ({u},{v}) must satisfy 0 <= u < v < n")
            if (u, v) in seen:
                raise GraphFormatError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            edges.append((u, v))
        else:
            raise GraphFormatError(f"unrecognized line: {ln!r}")
    return Graph(
        n,
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        interior,
        max_degree,
        label=label,
    )


def read_graph(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())
