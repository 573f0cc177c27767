"""Point-cloud file I/O: PLY (ASCII and binary little-endian) and XYZ.

The reader accepts any vertex property layout that includes x/y/z; nx/ny/nz,
red/green/blue, and an integer "class" property are picked up when present
and everything else is skipped. The writer emits double-precision
coordinates so a binary round trip reproduces positions bit for bit.
Writes go through a temporary file plus rename, so a crashed run never
leaves a half-written cloud behind.
"""

import os
import tempfile

import numpy as np

from .cloud import PointCloud
from .errors import CloudParseError, EmptyCloudError, ResampleError

_PLY_DTYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}

SUPPORTED = "supported formats: .ply (ascii / binary_little_endian), .xyz"


def _parse_ply_header(fh, path):
    line = fh.readline()
    if line.strip() != b"ply":
        raise CloudParseError("not a PLY file (missing magic)", path=path, line=1)
    fmt = None
    elements = []  # (name, count, [(prop_name, dtype_code)])
    lineno = 1
    while True:
        raw = fh.readline()
        lineno += 1
        if not raw:
            raise CloudParseError("unexpected end of header", path=path, line=lineno)
        tokens = raw.decode("ascii", errors="replace").strip().split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] not in ("ascii", "binary_little_endian"):
                raise CloudParseError(
                    f"unsupported PLY format {' '.join(tokens[1:])!r}; {SUPPORTED}",
                    path=path, line=lineno,
                )
            fmt = tokens[1]
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise CloudParseError("malformed element line", path=path, line=lineno)
            try:
                count = int(tokens[2])
            except ValueError:
                raise CloudParseError("malformed element count", path=path, line=lineno)
            elements.append((tokens[1], count, []))
        elif tokens[0] == "property":
            if not elements:
                raise CloudParseError("property before any element", path=path, line=lineno)
            if tokens[1] == "list":
                elements[-1][2].append((tokens[-1], "list", tokens[2], tokens[3]))
            else:
                if len(tokens) != 3 or tokens[1] not in _PLY_DTYPES:
                    raise CloudParseError(
                        f"unsupported property type {tokens[1]!r}", path=path, line=lineno
                    )
                elements[-1][2].append((tokens[2], _PLY_DTYPES[tokens[1]]))
        elif tokens[0] == "end_header":
            break
        elif tokens[0] == "obj_info":
            continue
        else:
            raise CloudParseError(
                f"unrecognized header line {tokens[0]!r}", path=path, line=lineno
            )
    if fmt is None:
        raise CloudParseError("header missing format line", path=path, line=lineno)
    return fmt, elements, lineno


def _cloud_from_record(rec, names, path):
    for c in ("x", "y", "z"):
        if c not in names:
            raise CloudParseError(f"vertex element lacks property {c!r}", path=path)
    pts = np.column_stack(
        [rec["x"].astype(np.float64), rec["y"].astype(np.float64), rec["z"].astype(np.float64)]
    )
    normals = None
    if all(c in names for c in ("nx", "ny", "nz")):
        normals = np.column_stack(
            [rec["nx"], rec["ny"], rec["nz"]]
        ).astype(np.float64)
    colors = None
    if all(c in names for c in ("red", "green", "blue")):
        colors = np.column_stack([rec["red"], rec["green"], rec["blue"]]).astype(np.uint8)
    classes = None
    if "class" in names:
        classes = rec["class"].astype(np.uint8)
    return PointCloud(points=pts, normals=normals, colors=colors, classes=classes)


def _read_ply(path):
    with open(path, "rb") as fh:
        fmt, elements, header_lines = _parse_ply_header(fh, path)
        vertex = next((e for e in elements if e[0] == "vertex"), None)
        if vertex is None:
            raise CloudParseError("no vertex element", path=path)
        if elements and elements[0][0] != "vertex":
            raise CloudParseError(
                "elements before vertex are not supported", path=path
            )
        _, count, props = vertex
        if count < 1:
            raise EmptyCloudError("empty input")
        if any(p[1] == "list" for p in props):
            raise CloudParseError("list properties on vertices are not supported", path=path)
        names = [p[0] for p in props]
        dtype = np.dtype([(p[0], "<" + p[1]) for p in props])

        if fmt == "binary_little_endian":
            want = dtype.itemsize * count
            buf = fh.read(want)
            if len(buf) != want:
                raise CloudParseError(
                    f"vertex data truncated: expected {count} vertices "
                    f"({want} bytes), found {len(buf) // dtype.itemsize}",
                    path=path, byte=fh.tell(),
                )
            rec = np.frombuffer(buf, dtype=dtype)
        else:
            rows = []
            for i in range(count):
                raw = fh.readline()
                lineno = header_lines + 1 + i
                if not raw:
                    raise CloudParseError(
                        f"vertex data truncated: expected {count} vertices, found {i}",
                        path=path, line=lineno,
                    )
                fields = raw.split()
                if len(fields) != len(props):
                    raise CloudParseError(
                        f"expected {len(props)} values, found {len(fields)}",
                        path=path, line=lineno,
                    )
                try:
                    rows.append(tuple(float(f) for f in fields))
                except ValueError:
                    raise CloudParseError("malformed vertex row", path=path, line=lineno)
            rec = np.array(rows, dtype=np.float64)
            rec = np.rec.fromarrays(
                [rec[:, i].astype(dtype[i]) for i in range(len(props))], dtype=dtype
            )
        return _cloud_from_record(rec, names, path)


def _read_xyz(path):
    pts, normals = [], []
    ncols = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if ncols is None:
                if len(fields) not in (3, 6):
                    raise CloudParseError(
                        f"expected 3 or 6 columns, found {len(fields)}",
                        path=path, line=lineno,
                    )
                ncols = len(fields)
            if len(fields) != ncols:
                raise CloudParseError(
                    f"expected {ncols} columns, found {len(fields)}",
                    path=path, line=lineno,
                )
            try:
                vals = [float(f) for f in fields]
            except ValueError:
                raise CloudParseError("malformed number", path=path, line=lineno)
            pts.append(vals[:3])
            if ncols == 6:
                normals.append(vals[3:])
    if not pts:
        raise EmptyCloudError("empty input")
    return PointCloud(
        points=np.asarray(pts), normals=np.asarray(normals) if normals else None
    )


def read_cloud(path):
    """Read a .ply or .xyz point cloud, preserving file point order."""
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ply":
        return _read_ply(path)
    if ext == ".xyz":
        return _read_xyz(path)
    raise ResampleError(f"unsupported format {ext!r}; {SUPPORTED}")


def _format_float(v):
    return repr(float(v))


def _ply_payload(cloud, binary):
    n = len(cloud)
    header = ["ply"]
    header.append(
        "format binary_little_endian 1.0" if binary else "format ascii 1.0"
    )
    header.append(f"element vertex {n}")
    fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
    header += ["property double x", "property double y", "property double z"]
    if cloud.normals is not None:
        fields += [("nx", "<f8"), ("ny", "<f8"), ("nz", "<f8")]
        header += ["property double nx", "property double ny", "property double nz"]
    if cloud.colors is not None:
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    if cloud.classes is not None:
        fields += [("class", "u1")]
        header.append("property uchar class")
    header.append("end_header")

    rec = np.empty(n, dtype=np.dtype(fields))
    rec["x"], rec["y"], rec["z"] = cloud.points.T
    if cloud.normals is not None:
        rec["nx"], rec["ny"], rec["nz"] = cloud.normals.T
    if cloud.colors is not None:
        rec["red"], rec["green"], rec["blue"] = cloud.colors.T
    if cloud.classes is not None:
        rec["class"] = cloud.classes

    head = ("\n".join(header) + "\n").encode("ascii")
    if binary:
        return head + rec.tobytes()
    lines = []
    for row in rec:
        parts = []
        for name, _ in fields:
            v = row[name]
            parts.append(_format_float(v) if np.issubdtype(type(v), np.floating) else str(int(v)))
        lines.append(" ".join(parts))
    return head + ("\n".join(lines) + "\n").encode("ascii")


def _xyz_payload(cloud):
    lines = []
    for i in range(len(cloud)):
        parts = [_format_float(v) for v in cloud.points[i]]
        if cloud.normals is not None:
            parts += [_format_float(v) for v in cloud.normals[i]]
        lines.append(" ".join(parts))
    return ("\n".join(lines) + "\n").encode("ascii")


def write_cloud(cloud, path, format=None):
    """Write a cloud atomically; ``format`` is ply, ply-ascii, or xyz.

    Defaults from the extension (.ply means binary). Binary PLY stores
    float64 coordinates, so reading the file back reproduces them exactly;
    ASCII formats use shortest round-trip decimal, which also survives a
    round trip through the bundled reader.
    """
    if not isinstance(cloud, PointCloud):
        arr = np.asarray(cloud, dtype=np.float64)
        if arr.size == 0:
            raise EmptyCloudError("refusing to write empty cloud")
        cloud = PointCloud(points=arr)
    path = os.fspath(path)
    if format is None:
        ext = os.path.splitext(path)[1].lower()
        format = {".ply": "ply", ".xyz": "xyz"}.get(ext)
        if format is None:
            raise ResampleError(f"cannot infer format for {path!r}; {SUPPORTED}")
    if format == "ply":
        payload = _ply_payload(cloud, binary=True)
    elif format in ("ply-ascii", "ply_ascii"):
        payload = _ply_payload(cloud, binary=False)
    elif format == "xyz":
        payload = _xyz_payload(cloud)
    else:
        raise ResampleError(f"unknown format {format!r}; {SUPPORTED}")

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pcresample-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_labels(classification, path):
    """Write a 0/1-per-line label file (atomic, like write_cloud)."""
    payload = ("\n".join(str(int(c)) for c in classification.classes) + "\n").encode()
    directory = os.path.dirname(os.path.abspath(os.fspath(path)))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pcresample-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, os.fspath(path))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
