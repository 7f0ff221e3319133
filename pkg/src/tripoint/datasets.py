"""Problem-file ingestion: the native track format and measurement matrices.

Native format (line oriented, UTF-8, '#' starts a comment, LF or CRLF):

    camera <label>
    <p11> <p12> <p13> <p14>
    <p21> <p22> <p23> <p24>
    <p31> <p32> <p33> <p34>
    track <id>
    <camera label> <u> <v>
    ...

Cameras may appear in any order before the tracks that reference them; each
track needs at least two observation lines. Every number is parsed as a
decimal double.

`parse_vgg_dataset` reads the measurement-matrix layout instead: one
whitespace-separated 3x4 matrix per camera file plus a points file with one
row per track holding two columns (u, v) per camera, in camera-file order.
A coordinate equal to the sentinel (-1 by default) marks the view as
missing; tracks with fewer than two surviving views are skipped and
counted, never errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CameraMatrix, ImageObservation, TriangulationProblem

_SINGULARITY_FLOOR = 1e-14


class ParseError(ValueError):
    """Malformed problem file; carries the 1-based line and column."""

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line else ""
        super().__init__(f"{message}{where}")


class InvalidCamera(ValueError):
    """Camera failed the invertibility check at load time."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class DimensionMismatch(ValueError):
    """Measurement columns do not line up with the camera count."""


@dataclass(eq=False)
class Track:
    """One scene point's identifier and its (camera index, u, v) observations."""

    identifier: str
    observations: list

    @property
    def n_views(self) -> int:
        return len(self.observations)


@dataclass(eq=False)
class Dataset:
    """Cameras plus sparse tracks; occluded views are simply absent."""

    cameras: list
    tracks: list
    skipped_tracks: int = 0

    def problem_for(self, track: Track) -> TriangulationProblem:
        cameras = tuple(self.cameras[i] for i, _, _ in track.observations)
        observations = tuple(
            ImageObservation(u, v, self.cameras[i].label)
            for i, u, v in track.observations
        )
        return TriangulationProblem(cameras, observations)


def _check_invertible(matrix, index, label):
    m = matrix[:, :3]
    det = np.linalg.det(m)
    if abs(det) <= _SINGULARITY_FLOOR * np.linalg.norm(m) ** 3:
        raise InvalidCamera(
            f"camera {index} ({label!r}): left 3x3 block is singular "
            f"(determinant {det:.3e})",
            index=index,
        )


def _parse_float(token, line_no, column):
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"expected a number, got {token!r}", line_no, column) from None


def parse_native_problem(text: str) -> Dataset:
    """Parse the native line-oriented problem format into a Dataset."""
    lines = text.splitlines()
    cameras = []
    camera_index = {}
    tracks = []
    current_track = None

    def finish_track(line_no):
        if current_track is None:
            return
        if current_track.n_views < 2:
            raise ParseError(
                f"track {current_track.identifier!r} requires at least 2 views",
                line_no, 1,
            )
        tracks.append(current_track)

    i = 0
    while i < len(lines):
        line_no = i + 1
        tokens = lines[i].split("#", 1)[0].split()
        i += 1
        if not tokens:
            continue
        keyword = tokens[0]
        if keyword == "camera":
            finish_track(line_no)
            current_track = None
            if len(tokens) != 2:
                raise ParseError("camera directive needs exactly one label", line_no, 1)
            label = tokens[1]
            if label in camera_index:
                raise ParseError(f"duplicate camera label {label!r}", line_no, 8)
            rows = []
            for r in range(3):
                if i >= len(lines):
                    raise ParseError(f"camera {label!r}: missing matrix row {r + 1}",
                                     line_no, 1)
                row_no = i + 1
                row_tokens = lines[i].split("#", 1)[0].split()
                i += 1
                if len(row_tokens) != 4:
                    raise ParseError(
                        f"camera {label!r}: matrix row needs 4 numbers, got "
                        f"{len(row_tokens)}", row_no, 1,
                    )
                rows.append([_parse_float(t, row_no, c + 1)
                             for c, t in enumerate(row_tokens)])
            matrix = np.array(rows)
            _check_invertible(matrix, len(cameras), label)
            camera_index[label] = len(cameras)
            cameras.append(CameraMatrix(matrix, label))
        elif keyword == "track":
            finish_track(line_no)
            if len(tokens) != 2:
                raise ParseError("track directive needs exactly one identifier",
                                 line_no, 1)
            current_track = Track(tokens[1], [])
        else:
            if current_track is None:
                raise ParseError(f"unexpected directive {keyword!r}", line_no, 1)
            if len(tokens) != 3:
                raise ParseError(
                    "observation line needs '<camera label> <u> <v>'", line_no, 1
                )
            if keyword not in camera_index:
                raise ParseError(f"unknown camera label {keyword!r}", line_no, 1)
            u = _parse_float(tokens[1], line_no, 2)
            v = _parse_float(tokens[2], line_no, 3)
            current_track.observations.append((camera_index[keyword], u, v))
    finish_track(len(lines) + 1)
    if not tracks:
        raise ParseError("no tracks", len(lines) + 1, 1)
    return Dataset(cameras, tracks)


def load_problem_file(path) -> Dataset:
    """Read and parse a native problem file."""
    return parse_native_problem(Path(path).read_text(encoding="utf-8"))


def parse_vgg_dataset(camera_files, points_file, sentinel=-1.0) -> Dataset:
    """Load a measurement-matrix dataset from camera files and a points file.

    `camera_files` is an ordered sequence of paths, each holding one
    whitespace-separated 3x4 projection matrix; the order defines camera
    indices. `points_file` holds one row per track with 2 * n_cameras
    columns (u, v pairs in camera order); coordinates equal to `sentinel`
    mark missing views. Tracks with fewer than two surviving views are
    skipped and counted in Dataset.skipped_tracks.
    """
    cameras = []
    for index, path in enumerate(camera_files):
        path = Path(path)
        values = path.read_text(encoding="utf-8").split()
        if len(values) != 12:
            raise ParseError(
                f"camera file {path.name}: expected 12 numbers, got {len(values)}"
            )
        try:
            matrix = np.array([float(v) for v in values]).reshape(3, 4)
        except ValueError:
            raise ParseError(f"camera file {path.name}: non-numeric entry") from None
        _check_invertible(matrix, index, path.name)
        cameras.append(CameraMatrix(matrix, path.stem))
    if not cameras:
        raise ParseError("no camera files given")

    n_cameras = len(cameras)
    tracks = []
    skipped = 0
    row_count = 0
    points_path = Path(points_file)
    for row_index, raw in enumerate(points_path.read_text(encoding="utf-8").splitlines()):
        line_no = row_index + 1
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if len(tokens) != 2 * n_cameras:
            raise DimensionMismatch(
                f"{points_path.name} line {line_no}: expected {2 * n_cameras} "
                f"columns for {n_cameras} cameras, got {len(tokens)}"
            )
        values = [_parse_float(t, line_no, c + 1) for c, t in enumerate(tokens)]
        track_id = str(row_count)
        row_count += 1
        observations = []
        for cam in range(n_cameras):
            u, v = values[2 * cam], values[2 * cam + 1]
            if u == sentinel or v == sentinel:
                continue
            observations.append((cam, u, v))
        if len(observations) < 2:
            skipped += 1
            continue
        tracks.append(Track(track_id, observations))
    return Dataset(cameras, tracks, skipped_tracks=skipped)
