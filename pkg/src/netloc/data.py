"""Dataset construction: synthetic model families, TU text ingestion, splits,
and a reproducible on-disk layout (manifest.json + graphs/*.edges + targets.csv).

Targets are always the IPR of the adjacency principal eigenvector computed by
the spectral oracle; node features are always recomputed structurally from the
graph, never read from files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import build_feature_matrix
from .graphs import (
    Graph,
    is_connected,
    make_cycle,
    make_er,
    make_path,
    make_scale_free,
    make_star,
    make_wheel,
    read_edgelist,
    write_edgelist,
)
from .spectral import power_iteration, ipr

__all__ = [
    "FAMILIES",
    "LabeledGraph",
    "DatasetSpec",
    "ParseError",
    "DatasetFormatError",
    "build_synthetic",
    "ingest_tu_dataset",
    "preprocess",
    "split",
    "save_dataset",
    "load_dataset",
]

DATASET_FORMAT = "netloc-dataset"
DATASET_VERSION = 1

FAMILIES = ("cycle", "path", "star", "wheel", "er", "scale_free")

_MIN_NODES = {"cycle": 3, "path": 2, "star": 2, "wheel": 4, "er": 2, "scale_free": 2}


class ParseError(ValueError):
    """Malformed input file; the message carries file and line number."""


class DatasetFormatError(ValueError):
    """On-disk dataset is missing, corrupt, or has an unsupported version."""


@dataclass(frozen=True)
class LabeledGraph:
    """A graph together with its feature matrix and spectral target."""

    graph: Graph
    features: np.ndarray
    target: float
    family: str
    seed: int | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.graph == other.graph
            and np.array_equal(self.features, other.features)
            and self.target == other.target
            and self.family == other.family
            and self.seed == other.seed
        )


@dataclass(frozen=True)
class DatasetSpec:
    """Recipe for a synthetic train/test pair.

    Items cycle round-robin through ``families``; sizes are drawn uniformly
    from the inclusive ranges. ER graphs use edge probability
    ``er_mean_degree / n`` and are resampled until connected.
    """

    families: tuple[str, ...] = ("cycle", "star")
    train_count: int = 1000
    test_count: int = 500
    train_size_range: tuple[int, int] = (200, 300)
    test_size_range: tuple[int, int] = (400, 500)
    seed: int = 0
    er_mean_degree: float = 8.0
    sf_m: int = 2
    label_tol: float = 1e-10
    label_max_iter: int = 100000

    def __post_init__(self) -> None:
        if not self.families:
            raise ValueError("need at least one graph family")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown family {fam!r}; choose from {FAMILIES}")
        if self.train_count < 0 or self.test_count < 0:
            raise ValueError("counts must be nonnegative")
        if self.sf_m < 1:
            raise ValueError(f"scale_free attachment count must be >= 1, got {self.sf_m}")
        if self.er_mean_degree <= 0.0:
            raise ValueError(f"er_mean_degree must be positive, got {self.er_mean_degree}")
        for lo, hi in (self.train_size_range, self.test_size_range):
            if lo > hi:
                raise ValueError(f"size range ({lo}, {hi}) has lo > hi")
            needed = max(
                _MIN_NODES[f] if f != "scale_free" else self.sf_m + 1 for f in self.families
            )
            if lo < needed:
                raise ValueError(f"size range starts at {lo}, but these families need n >= {needed}")

    def to_dict(self) -> dict:
        return {
            "families": list(self.families),
            "train_count": self.train_count,
            "test_count": self.test_count,
            "train_size_range": list(self.train_size_range),
            "test_size_range": list(self.test_size_range),
            "seed": self.seed,
            "er_mean_degree": self.er_mean_degree,
            "sf_m": self.sf_m,
            "label_tol": self.label_tol,
            "label_max_iter": self.label_max_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSpec":
        d = dict(d)
        for key in ("families",):
            if key in d:
                d[key] = tuple(d[key])
        for key in ("train_size_range", "test_size_range"):
            if key in d:
                d[key] = (int(d[key][0]), int(d[key][1]))
        return cls(**d)


def _build_instance(family: str, n: int, spec: DatasetSpec, rng: np.random.Generator) -> tuple[Graph, int | None]:
    if family == "cycle":
        return make_cycle(n), None
    if family == "path":
        return make_path(n), None
    if family == "star":
        return make_star(n), None
    if family == "wheel":
        return make_wheel(n), None
    if family == "scale_free":
        seed = int(rng.integers(2**63))
        return make_scale_free(n, spec.sf_m, seed), seed
    if family == "er":
        p = spec.er_mean_degree / n
        if p > 1.0:
            raise ValueError(f"er_mean_degree {spec.er_mean_degree} exceeds n={n}")
        for _ in range(1000):
            seed = int(rng.integers(2**63))
            g = make_er(n, p, seed)
            if is_connected(g):
                return g, seed
        raise RuntimeError(f"no connected G({n}, {p:.4f}) instance in 1000 attempts")
    raise ValueError(f"unknown family {family!r}")


def _label(g: Graph, spec: DatasetSpec) -> float:
    res = power_iteration(g, tol=spec.label_tol, max_iter=spec.label_max_iter)
    return ipr(res.pev)


def _build_split(spec: DatasetSpec, count: int, size_range: tuple[int, int], split_tag: int) -> list[LabeledGraph]:
    rng = np.random.default_rng([spec.seed, split_tag])
    lo, hi = size_range
    items: list[LabeledGraph] = []
    for idx in range(count):
        family = spec.families[idx % len(spec.families)]
        n = int(rng.integers(lo, hi + 1))
        g, inst_seed = _build_instance(family, n, spec, rng)
        items.append(
            LabeledGraph(
                graph=g,
                features=build_feature_matrix(g),
                target=_label(g, spec),
                family=family,
                seed=inst_seed,
            )
        )
    return items


def build_synthetic(spec: DatasetSpec) -> tuple[list[LabeledGraph], list[LabeledGraph]]:
    """Deterministic (train, test) lists for a synthetic recipe."""
    train = _build_split(spec, spec.train_count, spec.train_size_range, 0)
    test = _build_split(spec, spec.test_count, spec.test_size_range, 1)
    return train, test


def _read_pair_file(path: Path) -> list[tuple[int, int, int]]:
    """(value..., line_no) rows of a comma- or whitespace-separated pair file."""
    rows = []
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ParseError(f"{path}:{line_no}: expected two integers, got {raw.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ParseError(f"{path}:{line_no}: expected two integers, got {raw.strip()!r}") from exc
            rows.append((u, v, line_no))
    return rows


def ingest_tu_dataset(directory: str | Path, name: str | None = None) -> list[Graph]:
    """Parse a TU-format graph collection (DS_A.txt + DS_graph_indicator.txt).

    Node ids and graph ids in the files are 1-indexed; each graph comes back
    as a simple undirected 0-indexed :class:`Graph` (duplicate directions are
    merged, self loops dropped). Raw graphs may be disconnected; run
    :func:`preprocess` to filter and label them.
    """
    directory = Path(directory)
    if name is None:
        candidates = sorted(directory.glob("*_A.txt"))
        if len(candidates) != 1:
            raise ParseError(
                f"{directory}: expected exactly one *_A.txt file, found {len(candidates)}"
            )
        name = candidates[0].name[: -len("_A.txt")]
    a_path = directory / f"{name}_A.txt"
    ind_path = directory / f"{name}_graph_indicator.txt"
    for p in (a_path, ind_path):
        if not p.is_file():
            raise ParseError(f"{p}: file not found")

    node_graph: dict[int, int] = {}
    with ind_path.open(encoding="utf-8") as fh:
        node_id = 0
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            node_id += 1
            try:
                gid = int(line)
            except ValueError as exc:
                raise ParseError(f"{ind_path}:{line_no}: expected a graph id, got {raw.strip()!r}") from exc
            if gid < 1:
                raise ParseError(f"{ind_path}:{line_no}: graph ids are 1-indexed, got {gid}")
            node_graph[node_id] = gid
    if not node_graph:
        raise ParseError(f"{ind_path}: no nodes listed")

    n_graphs = max(node_graph.values())
    members: list[list[int]] = [[] for _ in range(n_graphs)]
    for node in sorted(node_graph):
        members[node_graph[node] - 1].append(node)
    local_index = {}
    for gid0, nodes in enumerate(members):
        for k, node in enumerate(nodes):
            local_index[node] = k

    edge_sets: list[set[tuple[int, int]]] = [set() for _ in range(n_graphs)]
    for u, v, line_no in _read_pair_file(a_path):
        for x in (u, v):
            if x not in node_graph:
                raise ParseError(f"{a_path}:{line_no}: node id {x} not in graph indicator")
        if node_graph[u] != node_graph[v]:
            raise ParseError(
                f"{a_path}:{line_no}: edge ({u},{v}) spans graphs "
                f"{node_graph[u]} and {node_graph[v]}"
            )
        if u == v:
            continue
        i, j = local_index[u], local_index[v]
        edge_sets[node_graph[u] - 1].add((min(i, j), max(i, j)))

    return [Graph(len(members[k]), tuple(sorted(edge_sets[k]))) for k in range(n_graphs)]


def preprocess(
    graphs,
    name: str = "tu",
    min_nodes: int = 10,
    label_tol: float = 1e-10,
    label_max_iter: int = 100000,
) -> list[LabeledGraph]:
    """Keep connected graphs with at least ``min_nodes`` nodes, then feature and label them.

    Accepts raw graphs or already-labeled items (labels are recomputed), so
    the operation is idempotent.
    """
    kept: list[LabeledGraph] = []
    for item in graphs:
        g = item.graph if isinstance(item, LabeledGraph) else item
        family = item.family if isinstance(item, LabeledGraph) else name
        seed = item.seed if isinstance(item, LabeledGraph) else None
        if g.n < min_nodes or not is_connected(g):
            continue
        res = power_iteration(g, tol=label_tol, max_iter=label_max_iter)
        kept.append(
            LabeledGraph(
                graph=g,
                features=build_feature_matrix(g),
                target=ipr(res.pev),
                family=family,
                seed=seed,
            )
        )
    return kept


def split(items: list[LabeledGraph], fraction: float = 0.8, seed: int = 0) -> tuple[list[LabeledGraph], list[LabeledGraph]]:
    """Seeded shuffle, then cut at floor(len * fraction)."""
    if not items:
        raise ValueError("cannot split an empty dataset")
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"fraction must lie in (0,1), got {fraction}")
    perm = np.random.default_rng(seed).permutation(len(items))
    k = int(len(items) * fraction + 1e-9)
    train = [items[i] for i in perm[:k]]
    test = [items[i] for i in perm[k:]]
    return train, test


def save_dataset(
    items: list[LabeledGraph],
    directory: str | Path,
    spec: DatasetSpec | None = None,
    name: str | None = None,
) -> None:
    """Write the native layout; output bytes depend only on the items."""
    directory = Path(directory)
    (directory / "graphs").mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "count": len(items),
        "name": name,
        "spec": spec.to_dict() if spec is not None else None,
        "seeds": {str(i): it.seed for i, it in enumerate(items)},
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    rows = ["id,target,family,n"]
    for i, it in enumerate(items):
        write_edgelist(it.graph, directory / "graphs" / f"{i:06d}.edges")
        rows.append(f"{i},{it.target!r},{it.family},{it.graph.n}")
    (directory / "targets.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_dataset(directory: str | Path, verify: bool = True) -> tuple[list[LabeledGraph], dict]:
    """Read the native layout back; features are recomputed from the graphs.

    With ``verify`` on, every 20th stored target is re-derived from the
    spectral oracle and must agree to 1e-9.
    """
    directory = Path(directory)
    man_path = directory / "manifest.json"
    if not man_path.is_file():
        raise DatasetFormatError(f"{directory}: no manifest.json")
    try:
        manifest = json.loads(man_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{man_path}: not valid JSON ({exc})") from exc
    if manifest.get("format") != DATASET_FORMAT:
        raise DatasetFormatError(f"{man_path}: format is {manifest.get('format')!r}, expected {DATASET_FORMAT!r}")
    if manifest.get("version") != DATASET_VERSION:
        raise DatasetFormatError(
            f"{man_path}: version {manifest.get('version')!r} unsupported (expected {DATASET_VERSION})"
        )
    seeds = manifest.get("seeds", {})
    rows = (directory / "targets.csv").read_text(encoding="utf-8").splitlines()
    if not rows or rows[0] != "id,target,family,n":
        raise DatasetFormatError(f"{directory}/targets.csv: bad or missing header")
    items: list[LabeledGraph] = []
    for line_no, row in enumerate(rows[1:], start=2):
        parts = row.split(",")
        if len(parts) != 4:
            raise DatasetFormatError(f"{directory}/targets.csv:{line_no}: expected 4 columns")
        ident, target, family, n = int(parts[0]), float(parts[1]), parts[2], int(parts[3])
        g = read_edgelist(directory / "graphs" / f"{ident:06d}.edges")
        if g.n != n:
            raise DatasetFormatError(
                f"{directory}/targets.csv:{line_no}: node count {n} disagrees with edge file ({g.n})"
            )
        seed = seeds.get(str(ident))
        items.append(
            LabeledGraph(
                graph=g,
                features=build_feature_matrix(g),
                target=target,
                family=family,
                seed=int(seed) if seed is not None else None,
            )
        )
    if len(items) != manifest.get("count"):
        raise DatasetFormatError(
            f"{directory}: manifest says {manifest.get('count')} items, found {len(items)}"
        )
    if verify:
        for i in range(0, len(items), 20):
            it = items[i]
            fresh = ipr(power_iteration(it.graph).pev)
            if not math.isclose(fresh, it.target, rel_tol=0.0, abs_tol=1e-9):
                raise DatasetFormatError(
                    f"{directory}: stored target for item {i} ({it.target}) "
                    f"disagrees with the spectral oracle ({fresh})"
                )
    return items, manifest
