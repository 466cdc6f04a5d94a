"""Distortion curves over a bitrate or decimation grid, written as CSV."""

from __future__ import annotations

import csv
import enum
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from walkrd.errors import DomainError
from walkrd.schemes import SchemeConfig, ce_ec_gap, distortion_ce, distortion_ec, drf_source
from walkrd.spectra import mmse_interpolation

SCHEMES = ("source_drf", "ec", "ce", "mmse", "gap")
HEADER = "scheme,M,R,theta,mmse_term,coding_term,cross_term,total"


class CurveMode(enum.Enum):
    VS_RATE = "vs-rate"
    VS_M = "vs-m"


@dataclass(frozen=True)
class CurveRequest:
    """A sweep over ``R`` at fixed ``M`` (``VS_RATE``) or over ``M`` at fixed ``R``."""

    mode: CurveMode
    fixed: float
    grid_min: float
    grid_max: float
    steps: int
    spacing: str = "log"
    schemes: tuple[str, ...] = ("ec", "ce", "gap")
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", CurveMode(self.mode))
        if not self.grid_min < self.grid_max:
            raise DomainError(f"grid min {self.grid_min} must be below max {self.grid_max}")
        if self.steps < 2:
            raise DomainError("a curve needs at least two steps")
        if self.spacing not in ("linear", "log"):
            raise DomainError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.grid_min <= 0:
            raise DomainError("log spacing needs a positive grid minimum")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise DomainError(f"schemes must be a nonempty subset of {SCHEMES}, got {self.schemes}")
        if self.mode is CurveMode.VS_RATE:
            if int(self.fixed) != self.fixed or self.fixed < 1:
                raise DomainError(f"fixed M must be a positive integer, got {self.fixed!r}")
            if self.grid_min <= 0:
                raise DomainError("rates must be positive")
        elif not self.fixed > 0:
            raise DomainError(f"fixed R must be positive, got {self.fixed!r}")

    def grid(self) -> list[float] | list[int]:
        if self.spacing == "log":
            values = np.geomspace(self.grid_min, self.grid_max, self.steps)
        else:
            values = np.linspace(self.grid_min, self.grid_max, self.steps)
        if self.mode is CurveMode.VS_RATE:
            return [float(v) for v in values]
        return sorted({max(1, int(round(v))) for v in values})

    def points(self) -> list[tuple[str, int, float]]:
        """``(scheme, M, R)`` triples in output order."""
        out = []
        for g in self.grid():
            M, R = (int(self.fixed), g) if self.mode is CurveMode.VS_RATE else (g, float(self.fixed))
            out.extend((s, M, R) for s in sorted(self.schemes))
        return out


@dataclass(frozen=True)
class CurveRow:
    scheme: str
    M: int
    R: float
    theta: float
    mmse_term: float
    coding_term: float
    cross_term: float
    total: float

    def format(self) -> str:
        values = [f"{v:.12g}" if isinstance(v, float) else str(v) for v in astuple(self)]
        return ",".join(values)


def evaluate_row(scheme: str, M: int, R: float) -> CurveRow:
    cfg = SchemeConfig(M, R)
    if scheme == "source_drf":
        b = drf_source(R)
    elif scheme == "ec":
        b = distortion_ec(cfg)
    elif scheme == "ce":
        b = distortion_ce(cfg)
    elif scheme == "mmse":
        m = mmse_interpolation(M)
        return CurveRow(scheme, M, R, 0.0, m, 0.0, 0.0, m)
    elif scheme == "gap":
        g = ce_ec_gap(cfg)
        return CurveRow(scheme, M, R, 0.0, 0.0, g, 0.0, g)
    else:
        raise DomainError(f"unknown scheme {scheme!r}")
    return CurveRow(scheme, M, float(R), float(b.theta), float(b.mmse_term),
                    float(b.coding_term), float(b.cross_term), float(b.total))


def _evaluate(point):
    scheme, M, R = point
    try:
        return evaluate_row(scheme, M, R)
    except Exception as exc:
        raise RuntimeError(f"evaluation failed at scheme={scheme}, M={M}, R={R!r}: {exc}") from exc


def build_curve(req: CurveRequest, jobs: int = 1) -> list[CurveRow]:
    points = req.points()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map preserves input order, so completion order cannot leak out
            return list(pool.map(_evaluate, points, chunksize=4))
    return [_evaluate(p) for p in points]


def render_csv(rows: list[CurveRow]) -> str:
    return "\n".join([HEADER, *(r.format() for r in rows)]) + "\n"


def write_curve(req: CurveRequest, jobs: int = 1) -> list[CurveRow]:
    if req.output_path is None:
        raise DomainError("curve request has no output path")
    rows = build_curve(req, jobs)
    Path(req.output_path).write_text(render_csv(rows), encoding="utf-8")
    return rows


def read_curve(text: str) -> list[CurveRow]:
    reader = csv.DictReader(io.StringIO(text))
    if ",".join(reader.fieldnames or ()) != HEADER:
        raise DomainError(f"unexpected CSV header {reader.fieldnames}")
    types = {f.name: f.type for f in fields(CurveRow)}
    rows = []
    for rec in reader:
        rows.append(CurveRow(**{k: (rec[k] if types[k] == "str" else
                                    int(rec[k]) if types[k] == "int" else float(rec[k]))
                                for k in types}))
    return rows
