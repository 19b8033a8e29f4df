"""
Text mesh format.

    SPACEFORM <kind> <kappa> <n>
    BASE <coords>
    V <count>
    <coords>            one line per vertex, 17 significant digits
    T <count> | TET <count>
    <indices>           0-based

A volume file carries its tetrahedra first and the boundary triangles as a
trailing T block.
"""
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from staticineq.config import MESH_FLOAT_FORMAT, MODEL_TOL
from staticineq.errors import DomainError, MeshParseError, MeshQualityError, ReportIOError
from staticineq.geometry import spaceform as sfm
from staticineq.geometry.mesh import SurfaceMesh, VolumeMesh, validate_surface, validate_volume
from staticineq.geometry.spaceform import SpaceForm

Mesh = Union[SurfaceMesh, VolumeMesh]


def _fmt(values) -> str:
    return " ".join(MESH_FLOAT_FORMAT % float(v) for v in values)


def dumps(mesh: Mesh) -> str:
    sf = mesh.space_form
    lines = [f"SPACEFORM {sf.kind.value} {MESH_FLOAT_FORMAT % sf.kappa} {sf.n}",
             f"BASE {_fmt(sf.base_point)}",
             f"V {mesh.vertices.shape[0]}"]
    lines += [_fmt(v) for v in mesh.vertices]
    if isinstance(mesh, VolumeMesh):
        lines.append(f"TET {mesh.n_tets}")
        lines += [" ".join(str(int(i)) for i in t) for t in mesh.tets]
        tris = mesh.boundary_triangles
    else:
        tris = mesh.triangles
    lines.append(f"T {len(tris)}")
    lines += [" ".join(str(int(i)) for i in t) for t in tris]
    return "\n".join(lines) + "\n"


def save(mesh: Mesh, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(mesh))
    except OSError as e:
        raise ReportIOError(f"cannot write mesh file {path}: {e}")
    return path


class _Reader:
    def __init__(self, text: str):
        self.lines: List[Tuple[int, List[str]]] = [
            (i + 1, ln.split()) for i, ln in enumerate(text.splitlines()) if ln.strip() and not ln.startswith("#")
        ]
        self.pos = 0

    def next(self, what: str) -> Tuple[int, List[str]]:
        if self.pos >= len(self.lines):
            last = self.lines[-1][0] if self.lines else 0
            raise MeshParseError(f"unexpected end of file, expected {what}", last + 1)
        item = self.lines[self.pos]
        self.pos += 1
        return item

    def peek_tag(self):
        return self.lines[self.pos][1][0] if self.pos < len(self.lines) else None

    def block(self, tag: str, width: int, cast) -> Tuple[int, np.ndarray, List[int]]:
        lineno, tokens = self.next(f"'{tag} <count>'")
        if tokens[0] != tag or len(tokens) != 2:
            raise MeshParseError(f"expected '{tag} <count>', got '{' '.join(tokens)}'", lineno)
        try:
            count = int(tokens[1])
        except ValueError:
            raise MeshParseError(f"bad {tag} count '{tokens[1]}'", lineno)
        rows, where = [], []
        for _ in range(count):
            ln, toks = self.next(f"{tag} entry")
            if len(toks) != width:
                raise MeshParseError(f"{tag} entry needs {width} values, got {len(toks)}", ln)
            try:
                rows.append([cast(t) for t in toks])
            except ValueError:
                raise MeshParseError(f"malformed {tag} entry '{' '.join(toks)}'", ln)
            where.append(ln)
        return lineno, np.array(rows, dtype=float if cast is float else np.int64).reshape(count, width), where


def loads(text: str) -> Mesh:
    reader = _Reader(text)
    lineno, tokens = reader.next("SPACEFORM header")
    if tokens[0] != "SPACEFORM" or len(tokens) != 4:
        raise MeshParseError("expected 'SPACEFORM <kind> <kappa> <n>'", lineno)
    try:
        kind = sfm.Kind.parse(tokens[1])
        kappa, n = float(tokens[2]), int(tokens[3])
    except (DomainError, ValueError) as e:
        raise MeshParseError(f"bad space form header: {e}", lineno)

    lineno, tokens = reader.next("BASE line")
    if tokens[0] != "BASE":
        raise MeshParseError("expected 'BASE <coords>'", lineno)
    try:
        sf = SpaceForm(kind, kappa, n, np.array([float(t) for t in tokens[1:]]))
    except (DomainError, ValueError) as e:
        raise MeshParseError(f"bad base point: {e}", lineno)

    _, vertices, vlines = reader.block("V", sf.dim, float)
    ok = sfm.on_model(sf, vertices, tol=MODEL_TOL) if len(vertices) else np.ones(0, dtype=bool)
    if not np.all(ok):
        i = int(np.flatnonzero(~ok)[0])
        raise MeshParseError(f"vertex {i} is not on the {kind.value} model", vlines[i])

    tets = None
    if reader.peek_tag() == "TET":
        tet_line, tets, _ = reader.block("TET", 4, int)
    tri_line, triangles, _ = reader.block("T", 3, int)
    if len(triangles) == 0:
        raise MeshParseError("not a closed surface", tri_line)
    for arr, line in ((triangles, tri_line), (tets, tri_line if tets is None else tet_line)):
        if arr is not None and arr.size and (arr.min() < 0 or arr.max() >= len(vertices)):
            raise MeshParseError("vertex index out of range", line)
    if reader.pos != len(reader.lines):
        raise MeshParseError("trailing content after triangle block", reader.lines[reader.pos][0])

    try:
        if tets is None:
            mesh = SurfaceMesh(sf, vertices, triangles)
            validate_surface(mesh)
            return mesh
        ids, local = np.unique(triangles, return_inverse=True)
        surface = SurfaceMesh(sf, vertices[ids], local.reshape(triangles.shape))
        radius = float(np.linalg.norm(vertices[ids], axis=1).max())
        vol = VolumeMesh(vertices, tets, surface, ids, radius, None, sf)
        validate_volume(vol)
        return vol
    except MeshQualityError as e:
        raise MeshParseError(str(e), tri_line)


def load(path: Union[str, Path]) -> Mesh:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ReportIOError(f"cannot read mesh file {path}: {e}")
    return loads(text)
