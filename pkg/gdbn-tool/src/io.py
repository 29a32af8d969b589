"""
File formats. Structures and CPDAGs are plain-text edge lists with 1-based node indices:

    n=3
    S 1 2 0.75     static edge X1 -> X2, optional coefficient
    D 2 1 -1.2     dynamic edge X2(t-1) => X1(t), optional coefficient
    U 2 3          undirected (reversible) static edge, CPDAG files only

Blank lines and lines starting with `#` are ignored.
"""

import hashlib
import json
import os
from typing import Any, Iterable, Optional, Sequence

import attr
import pandas as pd

from src.constants import EdgeKinds
from src.exc import DataFormatException, ValidationException
from src.graphs import Cpdag, DynamicGraph, Edge, StaticDag
from src.utils import bold

# region plain files


def ensure_directory(directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return directory


def sha256_digest(file_path: str) -> str:
    digest = hashlib.sha256()
    with open(file_path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_text(file_path: str, text: str) -> None:
    with open(file_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def write_json(file_path: str, document: dict[str, Any]) -> None:
    """
    Keys are sorted so equal documents serialise to equal bytes.
    """

    write_text(file_path, json.dumps(document, indent=2, sort_keys=True) + "\n")


def read_json(file_path: str) -> dict[str, Any]:
    try:
        with open(file_path, encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise DataFormatException(f"invalid JSON ({e.msg})", line=e.lineno, path=file_path) from None
    if not isinstance(document, dict):
        raise DataFormatException("the top level must be a JSON object", path=file_path)
    return document


def write_rows(file_path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    frame = pd.DataFrame(list(rows), columns=list(header))
    frame.to_csv(file_path, index=False, lineterminator="\n", float_format=lambda v: repr(float(v)))


# endregion

# region edge lists


@attr.s(frozen=True, eq=False)
class StructureFile:
    """
    A parsed structure file. Coefficient maps are empty unless every edge of that kind carries a coefficient.
    """

    g: StaticDag = attr.ib()
    gd: DynamicGraph = attr.ib()
    beta_s: dict[Edge, float] = attr.ib(factory=dict)
    beta_d: dict[Edge, float] = attr.ib(factory=dict)

    @property
    def n(self) -> int:
        return self.g.n


def _node(token: str, n: int, line: int, path: Optional[str]) -> int:
    try:
        node = int(token)
    except ValueError:
        raise DataFormatException(f"node index {bold(token)} is not an integer", line=line, path=path) from None
    if not 1 <= node <= n:
        raise DataFormatException(f"node index {bold(node)} lies outside of 1..{n}", line=line, path=path)
    return node - 1


def _lines(text: str) -> list[tuple[int, list[str]]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((number, stripped.split()))
    return lines


def _header(lines: list[tuple[int, list[str]]], path: Optional[str]) -> int:
    if not lines or not lines[0][1][0].startswith("n="):
        raise DataFormatException("the first entry must declare the node count as `n=<count>`", line=1, path=path)
    number, tokens = lines[0]
    try:
        n = int(tokens[0][2:])
    except ValueError:
        raise DataFormatException(f"bad node count {bold(tokens[0])}", line=number, path=path) from None
    if n < 1 or len(tokens) != 1:
        raise DataFormatException(f"bad node count declaration {bold(' '.join(tokens))}", line=number, path=path)
    return n


def parse_structure(text: str, path: Optional[str] = None) -> StructureFile:
    lines = _lines(text)
    n = _header(lines, path)
    edges: dict[str, list[Edge]] = {EdgeKinds.static.value: [], EdgeKinds.dynamic.value: []}
    betas: dict[str, dict[Edge, float]] = {EdgeKinds.static.value: {}, EdgeKinds.dynamic.value: {}}
    for number, tokens in lines[1:]:
        kind = tokens[0]
        if kind not in edges or len(tokens) not in (3, 4):
            raise DataFormatException(
                f"expected `S j i [beta]` or `D j i [beta]`, got {bold(' '.join(tokens))}", line=number, path=path
            )
        edge = (_node(tokens[1], n, number, path), _node(tokens[2], n, number, path))
        if edge in edges[kind]:
            raise DataFormatException(f"duplicate edge {bold(' '.join(tokens[:3]))}", line=number, path=path)
        edges[kind].append(edge)
        if len(tokens) == 4:
            try:
                betas[kind][edge] = float(tokens[3])
            except ValueError:
                raise DataFormatException(
                    f"coefficient {bold(tokens[3])} is not a number", line=number, path=path
                ) from None

    try:
        g = StaticDag(n=n, edges=edges[EdgeKinds.static.value])
        gd = DynamicGraph(n=n, edges=edges[EdgeKinds.dynamic.value])
    except ValidationException as e:
        raise DataFormatException(str(e), path=path) from None
    complete = {kind: betas[kind] if len(betas[kind]) == len(edges[kind]) else {} for kind in betas}
    return StructureFile(
        g=g, gd=gd, beta_s=complete[EdgeKinds.static.value], beta_d=complete[EdgeKinds.dynamic.value]
    )


def read_structure(file_path: str) -> StructureFile:
    if not os.path.isfile(file_path):
        raise DataFormatException("file does not exist", path=file_path)
    with open(file_path, encoding="utf-8") as f:
        return parse_structure(f.read(), path=file_path)


def format_structure(
    g: StaticDag,
    gd: DynamicGraph,
    beta_s: Optional[dict[Edge, float]] = None,
    beta_d: Optional[dict[Edge, float]] = None,
) -> str:
    def line(kind: EdgeKinds, edge: Edge, betas: Optional[dict[Edge, float]]) -> str:
        text = f"{kind.value} {edge[0] + 1} {edge[1] + 1}"
        return f"{text} {betas[edge]!r}" if betas else text

    lines = [f"n={g.n}"]
    lines += [line(EdgeKinds.static, edge, beta_s) for edge in sorted(g.edges)]
    lines += [line(EdgeKinds.dynamic, edge, beta_d) for edge in sorted(gd.edges)]
    return "\n".join(lines) + "\n"


def format_cpdag(cpdag: Cpdag, n: int) -> str:
    """
    `cpdag` lives over n static nodes or over the 2n augmented nodes; lagged nodes (index >= n) map back to D lines.
    """

    if cpdag.n not in (n, 2 * n):
        raise ValidationException(f"A CPDAG over {bold(cpdag.n)} nodes does not describe {bold(n)} variables.")
    lines = [f"n={n}"]
    for a, b in sorted(cpdag.directed):
        kind = EdgeKinds.static if a < n else EdgeKinds.dynamic
        lines.append(f"{kind.value} {a % n + 1} {b + 1}")
    for a, b in sorted(cpdag.undirected):
        if b >= n:
            raise ValidationException(f"The undirected pair {bold((a, b))} touches a lagged node.")
        lines.append(f"{EdgeKinds.undirected.value} {a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


def cpdag_key(cpdag: Cpdag, n: int) -> str:
    """
    One-line form of `format_cpdag` used to tally distinct CPDAGs, e.g. `S1>2;D2>1;U2-3`.
    """

    return ";".join(
        f"{line[0]}{line.split()[1]}{'-' if line[0] == EdgeKinds.undirected.value else '>'}{line.split()[2]}"
        for line in format_cpdag(cpdag, n).splitlines()[1:]
    )


# endregion
