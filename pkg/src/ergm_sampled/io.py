"""Dataset loading and result serialization.

Networks arrive either as dense 0/1 adjacency matrices in CSV (first row =
node labels) or as whitespace-separated edge lists with 1-based labels.
Node attributes arrive as a CSV with header ``node,seniority,practice,
gender,office``.  Parse failures raise :class:`DataFormatError` carrying the
offending line number.

Results serialize to JSON (full structure) or CSV (tabular views); the JSON
files round-trip through :func:`read_results`.
"""

from __future__ import annotations

import csv
import importlib.metadata
import importlib.resources
import json
from dataclasses import is_dataclass, fields
from typing import Any

import numpy as np

from .graphs import Network, NodeAttributes, make_network
from .likelihood import FitResult, KlEstimate, MeanValue
from .study import StudyRecord, StudySummary


def _version() -> str:
    try:
        return importlib.metadata.version("ergm-sampled")
    except importlib.metadata.PackageNotFoundError:  # not installed
        return "0+unknown"

__all__ = [
    "DataFormatError",
    "load_dataset",
    "load_lazega",
    "write_results",
    "read_results",
    "result_to_jsonable",
]

ATTRIBUTE_COLUMNS = ("node", "seniority", "practice", "gender", "office")


class DataFormatError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, path: str | None = None,
                 line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: " if line is None else f"{path}:{line}: "
        super().__init__(where + message)


def _parse_binary(token: str, path: str, line: int) -> int:
    token = token.strip()
    if token == "0":
        return 0
    if token == "1":
        return 1
    raise DataFormatError(f"expected 0 or 1, found {token!r}", path, line)


def _load_matrix(path: str, directed: bool) -> Network:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataFormatError("empty adjacency file", path)
    labels = [cell.strip() for cell in rows[0]]
    n = len(labels)
    if len(rows) != n + 1:
        raise DataFormatError(
            f"header names {n} nodes but {len(rows) - 1} data rows follow",
            path, len(rows))
    adj = np.zeros((n, n), dtype=np.uint8)
    for i, row in enumerate(rows[1:]):
        lineno = i + 2
        if len(row) != n:
            raise DataFormatError(
                f"row has {len(row)} entries, expected {n}", path, lineno)
        for j, cell in enumerate(row):
            adj[i, j] = _parse_binary(cell, path, lineno)
    if np.any(np.diag(adj)):
        bad = int(np.flatnonzero(np.diag(adj))[0])
        raise DataFormatError(f"self-loop on node {labels[bad]!r}", path, bad + 2)
    if not directed and not np.array_equal(adj, adj.T):
        i, j = np.argwhere(adj != adj.T)[0]
        raise DataFormatError(
            f"matrix is not symmetric at ({labels[i]}, {labels[j]}) but the "
            "network is undirected", path, int(i) + 2)
    return Network(adj, directed=directed)


def _load_edgelist(path: str, directed: bool, n: int | None) -> Network:
    edges = []
    max_label = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataFormatError(
                    f"expected two node labels, found {len(parts)} fields",
                    path, lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataFormatError(
                    f"non-integer node label in {line!r}", path, lineno) from None
            if i < 1 or j < 1:
                raise DataFormatError("node labels are 1-based", path, lineno)
            if i == j:
                raise DataFormatError(f"self-loop on node {i}", path, lineno)
            max_label = max(max_label, i, j)
            edges.append((i - 1, j - 1))
    size = n if n is not None else max_label
    if size < max_label:
        raise DataFormatError(
            f"edge list references node {max_label} but n={size}", path)
    if size == 0:
        raise DataFormatError("empty edge list and no node count given", path)
    return make_network(size, directed=directed, edges=edges)


def _load_attributes(path: str, n: int) -> NodeAttributes:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataFormatError("empty attribute file", path)
    header = [cell.strip().lower() for cell in rows[0]]
    if sorted(header) != sorted(ATTRIBUTE_COLUMNS):
        raise DataFormatError(
            "attribute header must contain exactly the columns "
            f"{', '.join(ATTRIBUTE_COLUMNS)}; found {', '.join(header)}",
            path, 1)
    col = {name: header.index(name) for name in ATTRIBUTE_COLUMNS}
    if len(rows) != n + 1:
        raise DataFormatError(
            f"expected {n} attribute rows, found {len(rows) - 1}", path,
            len(rows))
    values = {name: np.zeros(n) for name in ATTRIBUTE_COLUMNS[1:]}
    seen = set()
    for k, row in enumerate(rows[1:]):
        lineno = k + 2
        if len(row) != len(header):
            raise DataFormatError(
                f"row has {len(row)} fields, expected {len(header)}",
                path, lineno)
        try:
            node = int(row[col["node"]])
        except ValueError:
            raise DataFormatError(
                f"non-integer node label {row[col['node']]!r}", path,
                lineno) from None
        if not 1 <= node <= n:
            raise DataFormatError(
                f"node label {node} outside 1..{n}", path, lineno)
        if node in seen:
            raise DataFormatError(f"duplicate node label {node}", path, lineno)
        seen.add(node)
        for name in ATTRIBUTE_COLUMNS[1:]:
            try:
                values[name][node - 1] = float(row[col[name]])
            except ValueError:
                raise DataFormatError(
                    f"non-numeric {name} value {row[col[name]]!r}", path,
                    lineno) from None
    return NodeAttributes(values)


def load_dataset(adjacency: str, attributes: str | None = None, *,
                 format: str = "matrix", directed: bool = False,
                 n: int | None = None) -> tuple[Network, NodeAttributes | None]:
    """Load a network (and optional node attributes) from disk.

    ``format`` is ``"matrix"`` (dense CSV, header row of node labels) or
    ``"edgelist"`` (two 1-based labels per line; node count from ``n``, the
    attribute file, or the largest label).
    """
    if format not in ("matrix", "edgelist"):
        raise ValueError(f"unknown input format {format!r}")
    if format == "matrix":
        network = _load_matrix(adjacency, directed)
    else:
        if n is None and attributes is not None:
            # peek at the attribute file for the node count
            with open(attributes, newline="") as fh:
                n = sum(1 for row in csv.reader(fh)
                        if any(c.strip() for c in row)) - 1
        network = _load_edgelist(adjacency, directed, n)
    attrs = None
    if attributes is not None:
        attrs = _load_attributes(attributes, network.n)
    return network, attrs


def load_lazega() -> tuple[Network, NodeAttributes]:
    """The bundled 36-partner law-firm collaboration network."""
    root = importlib.resources.files("ergm_sampled.data")
    with importlib.resources.as_file(root / "collaboration.csv") as adj_path, \
            importlib.resources.as_file(root / "attributes.csv") as attr_path:
        return load_dataset(str(adj_path), str(attr_path))  # type: ignore[return-value]


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if is_dataclass(value) and not isinstance(value, type):
        return result_to_jsonable(value)
    return value


def result_to_jsonable(result: Any) -> dict:
    """Dataclass result -> plain dict (numpy arrays become lists)."""
    if isinstance(result, StudySummary):
        body = {f.name: _jsonable(getattr(result, f.name))
                for f in fields(result)}
        body["rows"] = [
            {"parameter": p, "complete_value": v, "bias_pct": b,
             "rmse_pct": r, "eff_loss_pct": e}
            for p, v, b, r, e in result.table_rows()]
        return {"kind": "study_summary", **body}
    kinds = {FitResult: "fit", KlEstimate: "kl", MeanValue: "mean_value",
             StudyRecord: "study_record"}
    if is_dataclass(result) and not isinstance(result, type):
        kind = kinds.get(type(result), type(result).__name__.lower())
        return {"kind": kind,
                **{f.name: _jsonable(getattr(result, f.name))
                   for f in fields(result)}}
    if isinstance(result, dict):
        return _jsonable(result)
    raise TypeError(f"cannot serialize {type(result).__name__}")


def _csv_rows(result: Any) -> tuple[list[str], list[list]]:
    if isinstance(result, StudySummary):
        header = ["parameter", "complete_value", "bias_pct", "rmse_pct",
                  "eff_loss_pct"]
        rows = [[p, v, b, r, "" if e is None else e]
                for p, v, b, r, e in result.table_rows()]
        return header, rows
    if isinstance(result, FitResult):
        header = ["parameter", "eta_hat", "mean_value", "mean_value_se",
                  "std_error"]
        eta = result.eta_hat
        rows = []
        for k, label in enumerate(result.labels):
            rows.append([
                label,
                "" if eta is None else float(eta[k]),
                "" if result.mean_value is None else float(result.mean_value[k]),
                "" if result.mean_value_se is None else float(result.mean_value_se[k]),
                "" if result.std_errors is None else float(result.std_errors[k]),
            ])
        return header, rows
    if isinstance(result, list) and result and isinstance(result[0], dict):
        header = list(result[0].keys())
        return header, [[row.get(k, "") for k in header] for row in result]
    raise TypeError(f"no CSV representation for {type(result).__name__}")


def write_results(result: Any, path: str, format: str = "json",
                  extra: dict | None = None) -> None:
    """Write a result object to ``path`` as JSON or CSV.

    JSON output embeds the package version plus any ``extra`` metadata
    (e.g. the RNG seed) and reloads with :func:`read_results`.
    """
    if format == "json":
        body = result_to_jsonable(result) if not isinstance(result, list) \
            else {"kind": "rows", "rows": _jsonable(result)}
        body["version"] = _version()
        if extra:
            body.update(_jsonable(extra))
        with open(path, "w") as fh:
            json.dump(body, fh, indent=2)
            fh.write("\n")
    elif format == "csv":
        header, rows = _csv_rows(result)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        raise ValueError(f"unknown output format {format!r}")


def read_results(path: str) -> dict:
    """Reload a JSON result written by :func:`write_results`."""
    with open(path) as fh:
        return json.load(fh)
