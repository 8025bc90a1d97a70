"""File formats: data CSV + schema, edge lists, DOT, metric tables, traces.

Data CSV: header row, UTF-8, empty cell or `NA` = missing.
Schema: one line per column, `name,kind[,level1|level2|...]`; levels are
required for ordinal and binary columns and forbidden otherwise.
Numeric outputs are written with 6 significant digits.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bdmcmc import ChainTrace
from .graphs import Graph, graph_from_edges
from .latent import MixedDataset, VARIABLE_KINDS

MISSING_TOKENS = ("", "NA")


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in VARIABLE_KINDS:
            raise ValueError(f"unknown kind {self.kind!r} for column {self.name!r}")
        needs_levels = self.kind in ("ordinal", "binary")
        if needs_levels and not self.levels:
            raise ValueError(f"column {self.name!r} ({self.kind}) needs a level list")
        if not needs_levels and self.levels:
            raise ValueError(f"column {self.name!r} ({self.kind}) must not list levels")
        if self.kind == "binary" and len(self.levels) > 2:
            raise ValueError(f"binary column {self.name!r} lists >2 levels")
        if self.levels and len(set(self.levels)) != len(self.levels):
            raise ValueError(f"duplicate levels in column {self.name!r}")


def read_schema(path: str | Path) -> list[ColumnSchema]:
    cols = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) < 2:
            raise ValueError(f"{path}:{lineno}: expected `name,kind[,levels]`")
        name, kind = parts[0].strip(), parts[1].strip()
        levels = tuple(s.strip() for s in parts[2].split("|")) if len(parts) > 2 else None
        cols.append(ColumnSchema(name, kind, levels))
    names = [c.name for c in cols]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate column names in {path}")
    if not cols:
        raise ValueError(f"empty schema file {path}")
    return cols


def write_schema(cols: list[ColumnSchema], path: str | Path) -> None:
    lines = []
    for c in cols:
        if c.levels:
            lines.append(f"{c.name},{c.kind},{'|'.join(c.levels)}")
        else:
            lines.append(f"{c.name},{c.kind}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_cell(token: str, col: ColumnSchema, row: int, name: str) -> float:
    if col.levels is not None:
        try:
            return float(col.levels.index(token))
        except ValueError:
            raise ValueError(
                f"row {row}, column {name!r}: level {token!r} not in schema") from None
    try:
        value = float(token)
    except ValueError:
        raise ValueError(
            f"row {row}, column {name!r}: cannot parse {token!r}") from None
    if col.kind == "count" and (value < 0 or value != round(value)):
        raise ValueError(
            f"row {row}, column {name!r}: count cells must be nonnegative integers")
    return value


def ingest_csv(data_path: str | Path, schema_path: str | Path) -> MixedDataset:
    """Parse a data CSV against its schema into a MixedDataset."""
    schema = read_schema(schema_path)
    by_name = {c.name: c for c in schema}
    with open(data_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{data_path}: empty file") from None
        header = [h.strip() for h in header]
        unknown = [h for h in header if h not in by_name]
        if unknown:
            raise ValueError(f"{data_path}: unknown column(s) {unknown}")
        if set(header) != set(by_name):
            missing = sorted(set(by_name) - set(header))
            raise ValueError(f"{data_path}: columns missing from header: {missing}")
        cols = [by_name[h] for h in header]
        rows = []
        mask_rows = []
        for rownum, rec in enumerate(reader, start=1):
            if len(rec) != len(header):
                raise ValueError(f"{data_path}: row {rownum} has {len(rec)} cells, "
                                 f"expected {len(header)}")
            vals = np.empty(len(header))
            miss = np.zeros(len(header), dtype=bool)
            for k, token in enumerate(rec):
                token = token.strip()
                if token in MISSING_TOKENS:
                    vals[k] = np.nan
                    miss[k] = True
                else:
                    vals[k] = _parse_cell(token, cols[k], rownum, header[k])
            rows.append(vals)
            mask_rows.append(miss)
    values = np.array(rows)
    missing = np.array(mask_rows)
    # reorder columns to schema order
    order = [header.index(c.name) for c in schema]
    values = values[:, order]
    missing = missing[:, order]
    dead = np.flatnonzero(missing.all(axis=0))
    if dead.size:
        names = [schema[j].name for j in dead]
        raise ValueError(f"{data_path}: all-missing column(s) {names}")
    return MixedDataset(values, tuple(c.kind for c in schema), missing)


def _format_cell(value: float, missing: bool, col: ColumnSchema) -> str:
    if missing:
        return "NA"
    if col.levels is not None:
        return col.levels[int(round(value))]
    if col.kind == "count":
        return str(int(round(value)))
    return f"{value:.6g}"


def export_csv(data: MixedDataset, schema: list[ColumnSchema],
               path: str | Path) -> None:
    if len(schema) != data.p:
        raise ValueError("schema length does not match the dataset")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([c.name for c in schema])
    for r in range(data.n):
        writer.writerow([_format_cell(data.values[r, j], data.missing[r, j], schema[j])
                         for j in range(data.p)])
    Path(path).write_text(buf.getvalue())


def default_schema(data: MixedDataset, names: list[str] | None = None) -> list[ColumnSchema]:
    """Schema for a generated dataset: level lists enumerated from the data."""
    cols = []
    for j in range(data.p):
        name = names[j] if names else f"v{j}"
        kind = data.kinds[j]
        if kind in ("ordinal", "binary"):
            obs = np.unique(data.values[~data.missing[:, j], j])
            levels = tuple(str(int(v)) for v in obs)
            if len(levels) < 2:
                levels = tuple(str(int(obs[0]) + k) for k in range(2)) if obs.size \
                    else ("0", "1")
            cols.append(ColumnSchema(name, kind, levels))
        else:
            cols.append(ColumnSchema(name, kind))
    return cols


def write_matrix_csv(m: np.ndarray, path: str | Path,
                     header: list[str] | None = None) -> None:
    lines = []
    if header is not None:
        lines.append(",".join(header))
    for row in np.atleast_2d(m):
        lines.append(",".join(f"{v:.6g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path: str | Path, has_header: bool = True) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if has_header:
        lines = lines[1:]
    return np.array([[float(v) for v in ln.split(",")] for ln in lines])


def write_edgelist(g: Graph, path: str | Path) -> None:
    from .graphs import to_edgelist_text
    Path(path).write_text(to_edgelist_text(g))


def read_edgelist(path: str | Path, p: int) -> Graph:
    edges = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            a, b = line.split()[:2]
            edges.append((int(a), int(b)))
    return graph_from_edges(p, edges)


def save_trace(trace: ChainTrace, path: str | Path) -> None:
    """Persist the Rao-Blackwell accumulators and the thinned state sample."""
    np.savez_compressed(
        path,
        p=trace.p,
        iterations=trace.iterations,
        burn_in=trace.burn_in,
        edge_weight_acc=trace.edge_weight_acc,
        k_weight_acc=trace.k_weight_acc,
        total_weight=trace.total_weight,
        size_trace=trace.size_trace,
        thinned_adj=trace.thinned_adj,
        thinned_k=trace.thinned_k,
        thinned_w=trace.thinned_w,
    )


def load_trace(path: str | Path) -> ChainTrace:
    with np.load(path) as z:
        trace = ChainTrace(p=int(z["p"]), iterations=int(z["iterations"]),
                           burn_in=int(z["burn_in"]))
        trace.edge_weight_acc = z["edge_weight_acc"]
        trace.k_weight_acc = z["k_weight_acc"]
        trace.total_weight = float(z["total_weight"])
        trace.size_trace = z["size_trace"]
        trace.thinned_adj = z["thinned_adj"]
        trace.thinned_k = z["thinned_k"]
        trace.thinned_w = z["thinned_w"]
    return trace
