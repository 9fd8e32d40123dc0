"""Text formats for clouds and poses: XYZ, ASCII PLY, labelled pose files.

Floats are written with ``repr`` (shortest round-tripping form), so every
write/read pair is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCloudError, ParseError, UnsupportedFormatError
from .geometry import PointCloud, RigidParams

POSE_FIELDS = ("x", "y", "z", "roll", "pitch", "yaw")


def _parse_float(token: str, line_no: int) -> float:
    # float() ignores the locale, unlike some C parsers
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", line=line_no) from None


def read_xyz(path) -> PointCloud:
    """One ``x y z`` point per line; blank lines and ``#`` comments skipped."""
    points = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            tokens = text.split()
            if len(tokens) != 3:
                raise ParseError(f"expected 3 values, got {len(tokens)}", line=line_no)
            points.append([_parse_float(t, line_no) for t in tokens])
    if not points:
        raise EmptyCloudError(f"{path}: no points")
    return PointCloud(np.array(points))


def write_xyz(path, cloud: PointCloud, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for x, y, z in cloud.points.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")


_PLY_FLOAT_TYPES = {"float", "float32", "double", "float64"}


def read_ply_ascii(path) -> PointCloud:
    """Read the x/y/z properties of the ``vertex`` element of an ASCII PLY file.

    Other vertex properties and other elements are skipped. Binary PLY is
    rejected.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError:
        text = None
    if text is None or not text.startswith("ply"):
        if raw.startswith(b"ply") and b"binary" in raw[:200]:
            raise UnsupportedFormatError(f"{path}: binary PLY is not supported")
        raise ParseError(f"{path}: not a PLY file", line=1)
    lines = text.splitlines()

    elements = []  # [name, count, [(prop_name, is_list)]]
    body_start = None
    for i, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise UnsupportedFormatError(f"{path}: only ASCII PLY is supported, got {' '.join(tokens[1:])}")
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError("malformed element line", line=i)
            try:
                count = int(tokens[2])
            except ValueError:
                raise ParseError(f"bad element count {tokens[2]!r}", line=i) from None
            elements.append([tokens[1], count, []])
        elif tokens[0] == "property":
            if not elements:
                raise ParseError("property before any element", line=i)
            is_list = len(tokens) > 1 and tokens[1] == "list"
            if is_list and len(tokens) != 5 or not is_list and len(tokens) != 3:
                raise ParseError("malformed property line", line=i)
            elements[-1][2].append((tokens[-1], tokens[-2] if not is_list else None, is_list))
        elif tokens[0] == "end_header":
            body_start = i
            break
        else:
            raise ParseError(f"unexpected header keyword {tokens[0]!r}", line=i)
    if body_start is None:
        raise ParseError(f"{path}: missing end_header")

    points = None
    line_no = body_start
    body = lines[body_start:]
    pos = 0
    for name, count, props in elements:
        if name == "vertex":
            names = [p[0] for p in props]
            for axis in ("x", "y", "z"):
                if axis not in names:
                    raise ParseError(f"vertex element has no {axis!r} property")
                if props[names.index(axis)][1] not in _PLY_FLOAT_TYPES:
                    raise ParseError(f"vertex property {axis!r} must be float or double")
            if any(p[2] for p in props):
                raise UnsupportedFormatError("list properties on vertices are not supported")
            cols = [names.index(a) for a in ("x", "y", "z")]
            pts = np.empty((count, 3))
        for k in range(count):
            while pos < len(body) and not body[pos].strip():
                pos += 1
            if pos >= len(body):
                raise ParseError(f"element {name!r}: header declares {count} rows, file has {k}")
            line_no = body_start + pos + 1
            if name == "vertex":
                tokens = body[pos].split()
                if len(tokens) != len(props):
                    raise ParseError(f"expected {len(props)} values, got {len(tokens)}", line=line_no)
                pts[k] = [_parse_float(tokens[c], line_no) for c in cols]
            pos += 1
        if name == "vertex":
            points = pts
    if any(line.strip() for line in body[pos:]):
        raise ParseError("more data rows than declared in the header", line=body_start + pos + 1)
    if points is None:
        raise ParseError(f"{path}: no vertex element")
    if points.shape[0] == 0:
        raise EmptyCloudError(f"{path}: no points")
    return PointCloud(points)


def write_ply_ascii(path, cloud: PointCloud) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(cloud)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\nend_header\n")
        for x, y, z in cloud.points.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")


def read_cloud(path) -> PointCloud:
    """Dispatch on extension: ``.ply`` is PLY, anything else XYZ."""
    if Path(path).suffix.lower() == ".ply":
        return read_ply_ascii(path)
    return read_xyz(path)


def write_cloud(path, cloud: PointCloud) -> None:
    if Path(path).suffix.lower() == ".ply":
        write_ply_ascii(path, cloud)
    else:
        write_xyz(path, cloud)


@dataclass
class PoseRecord:
    theta: RigidParams = field(default_factory=RigidParams)
    source_frame: str = ""
    reference_frame: str = ""
    comment: str = ""

    @property
    def matrix(self) -> np.ndarray:
        return self.theta.matrix()


def write_pose(path, record: PoseRecord) -> None:
    """Six ``name value`` lines in fixed order, preceded by ``#`` metadata lines.

    The 4x4 matrix is written as comments for humans; it is not read back.
    """
    lines = []
    for line in record.comment.splitlines():
        lines.append(f"# {line}")
    if record.source_frame:
        lines.append(f"#! source_frame {record.source_frame}")
    if record.reference_frame:
        lines.append(f"#! reference_frame {record.reference_frame}")
    for name, value in zip(POSE_FIELDS, record.theta.as_array().tolist()):
        lines.append(f"{name} {value!r}")
    for row in record.matrix.tolist():
        lines.append("# matrix " + " ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pose(path) -> PoseRecord:
    values = []
    comments = []
    frames = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#!"):
                key, _, val = text[2:].strip().partition(" ")
                frames[key] = val.strip()
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if not body.startswith("matrix"):
                    comments.append(body)
                continue
            tokens = text.split()
            expected = POSE_FIELDS[len(values)] if len(values) < 6 else None
            if expected is None:
                raise ParseError(f"unexpected extra field {tokens[0]!r}", line=line_no)
            if len(tokens) != 2 or tokens[0] != expected:
                raise ParseError(f"expected field {expected!r}, got {text!r}", line=line_no)
            values.append(_parse_float(tokens[1], line_no))
    if len(values) < 6:
        raise ParseError(f"{path}: missing field {POSE_FIELDS[len(values)]!r}")
    return PoseRecord(
        theta=RigidParams(*values),
        source_frame=frames.get("source_frame", ""),
        reference_frame=frames.get("reference_frame", ""),
        comment="\n".join(comments),
    )
