"""Grid scans over an interval, gap merging, prefix-shape checks and the 2D locus grid."""
from __future__ import annotations

import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .certificates import dump_document, input_digest
from .prune import DEFAULT_MAX_NODES, ExclusionQuery, PruneAborted, point_search, prune
from .series import B1, B2, CoefficientSet, format_coeffs, get_coefficient_set

log = logging.getLogger(__name__)

CHECKPOINT_EVERY = 10_000


@dataclass(frozen=True)
class CellResult:
    lo: float
    hi: float
    depth: int
    excluded: bool
    depth_used: int
    nodes: int
    witness: Optional[str] = None

    def row(self) -> list:
        return [self.lo, self.hi, self.depth, "x" if self.excluded else "s", self.depth_used, self.nodes,
                self.witness]

    @classmethod
    def from_row(cls, row) -> "CellResult":
        lo, hi, depth, flag, used, nodes, witness = row
        return cls(lo, hi, depth, flag == "x", used, nodes, witness)


@dataclass
class ScanConfig:
    lo: float
    hi: float
    grid: int
    depth: int = 40
    mult: int = 2
    coeff_set: str = "b1"
    fp_model: str = "horner"
    constants: str = "conservative"
    refine: int = 0
    max_depth: Optional[int] = None
    depth_step: int = 5
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self):
        if not 0.0 < self.lo < self.hi < 1.0:
            raise ValueError(f"scan range must satisfy 0 < lo < hi < 1, got ({self.lo}, {self.hi})")
        if self.grid < 1:
            raise ValueError("grid must be >= 1")
        if self.max_depth is None:
            self.max_depth = self.depth
        get_coefficient_set(self.coeff_set)

    def as_dict(self) -> dict:
        return {
            "range": [self.lo, self.hi],
            "grid": self.grid,
            "depth": self.depth,
            "max_depth": self.max_depth,
            "depth_step": self.depth_step,
            "refine": self.refine,
            "mult": self.mult,
            "coeff_set": self.coeff_set,
            "allowed": list(get_coefficient_set(self.coeff_set).allowed),
            "fp_model": self.fp_model,
            "constants": self.constants,
            "max_nodes": self.max_nodes,
        }

    def cell(self, i: int) -> tuple[float, float]:
        w = (self.hi - self.lo) / self.grid
        lo = self.lo + i * w
        hi = self.hi if i == self.grid - 1 else self.lo + (i + 1) * w
        return lo, hi


@dataclass
class GapCertificate:
    config: ScanConfig
    cells: list[CellResult]

    @property
    def gaps(self) -> list[tuple[float, float]]:
        return [(g["lo"], g["hi"]) for g in self._merged()]

    @property
    def survivors(self) -> list[CellResult]:
        return [c for c in self.cells if not c.excluded]

    @property
    def fully_excluded(self) -> bool:
        return bool(self.cells) and all(c.excluded for c in self.cells)

    def _merged(self) -> list[dict]:
        gaps: list[dict] = []
        for c in self.cells:
            if c.excluded and gaps and gaps[-1]["hi"] == c.lo and gaps[-1]["open"]:
                g = gaps[-1]
                g["hi"] = c.hi
                g["cells"] += 1
                g["max_depth_used"] = max(g["max_depth_used"], c.depth_used)
            elif c.excluded:
                gaps.append({"lo": c.lo, "hi": c.hi, "cells": 1, "max_depth_used": c.depth_used, "open": True})
            elif gaps:
                gaps[-1]["open"] = False
        for g in gaps:
            del g["open"]
        return gaps

    def as_dict(self, include_cells: Optional[bool] = None) -> dict:
        cfg = self.config.as_dict()
        if include_cells is None:
            include_cells = len(self.cells) <= 100_000
        doc = {
            "kind": "gap-certificate",
            "config": cfg,
            "input_digest": input_digest(cfg),
            "summary": {
                "cells": len(self.cells),
                "excluded": sum(c.excluded for c in self.cells),
                "survivors": sum(not c.excluded for c in self.cells),
                "gaps": len(self._merged()),
                "nodes": sum(c.nodes for c in self.cells),
                "max_depth_used": max((c.depth_used for c in self.cells), default=0),
                "fully_excluded": self.fully_excluded,
            },
            "gaps": self._merged(),
            "survivors": [{"lo": c.lo, "hi": c.hi, "depth": c.depth, "witness": c.witness}
                          for c in self.survivors],
        }
        if include_cells:
            doc["cells"] = [c.row() for c in self.cells]
        return doc


def _run_cell(args) -> list[CellResult]:
    cfg, index, lo, hi = args
    cs = get_coefficient_set(cfg.coeff_set)
    out: list[CellResult] = []

    def visit(a, b, depth, level):
        q = ExclusionQuery(a, b, cfg.mult, cs, depth, cfg.fp_model, cfg.constants)
        try:
            res = prune(q, max_nodes=cfg.max_nodes)
        except PruneAborted as exc:
            exc.cell_index = index
            raise
        mid = 0.5 * (a + b)
        if res.excluded or level >= cfg.refine or not a < mid < b:
            out.append(CellResult(a, b, depth, res.excluded, res.depth_used, res.nodes,
                                  None if res.witness is None else format_coeffs(res.witness)))
            return
        nxt = min(depth + cfg.depth_step, cfg.max_depth)
        visit(a, mid, nxt, level + 1)
        visit(mid, b, nxt, level + 1)

    visit(lo, hi, cfg.depth, 0)
    return out


def _load_checkpoint(path: Path, digest: str) -> list[list[CellResult]]:
    if not path.exists():
        return []
    data = json.loads(path.read_text())
    if data.get("input_digest") != digest:
        raise ValueError(f"checkpoint {path} belongs to a different scan configuration")
    return [[CellResult.from_row(r) for r in rows] for rows in data["cells"]]


def _save_checkpoint(path: Path, digest: str, done: list[list[CellResult]]):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps({"input_digest": digest, "done": len(done),
                               "cells": [[c.row() for c in rows] for rows in done]}))
    os.replace(tmp, path)


def scan(lo: float, hi: float, grid: int, depth: int = 40, mult: int = 2,
         coeff_set: CoefficientSet | str = "b1", fp_model: str = "horner",
         constants: str = "conservative", refine: int = 0, max_depth: Optional[int] = None,
         depth_step: int = 5, max_nodes: int = DEFAULT_MAX_NODES, jobs: int = 1,
         checkpoint: Optional[str | Path] = None, checkpoint_every: int = CHECKPOINT_EVERY) -> GapCertificate:
    """Run the exclusion search on ``grid`` equal cells of ``(lo, hi)`` and merge the results.

    Surviving cells are halved up to ``refine`` times, each time with
    ``depth_step`` more depth (capped at ``max_depth``).  Output does not depend
    on ``jobs``; cells are folded in index order.
    """
    cs_name = coeff_set.name if isinstance(coeff_set, CoefficientSet) else str(coeff_set)
    cfg = ScanConfig(lo, hi, grid, depth, mult, cs_name, fp_model, constants, refine, max_depth,
                     depth_step, max_nodes)
    digest = input_digest(cfg.as_dict())
    ckpt = Path(checkpoint) if checkpoint else None
    done = _load_checkpoint(ckpt, digest) if ckpt else []
    tasks = [(cfg, i) + cfg.cell(i) for i in range(len(done), grid)]
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for start in range(0, len(tasks), checkpoint_every):
            batch = tasks[start:start + checkpoint_every]
            if pool is not None:
                results = list(pool.map(_run_cell, batch, chunksize=max(1, len(batch) // (8 * jobs))))
            else:
                results = [_run_cell(t) for t in batch]
            done.extend(results)
            if ckpt is not None:
                _save_checkpoint(ckpt, digest, done)
            log.info("scanned %d/%d cells", len(done), grid)
    finally:
        if pool is not None:
            pool.shutdown()
    return GapCertificate(cfg, [c for rows in done for c in rows])


# -- prefix shape of survivors --------------------------------------------------------

@dataclass
class PrefixShapeReport:
    lo: float
    hi: float
    grid: int
    depth: int
    required: tuple[int, ...]
    violations: list[tuple[float, float, str]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"kind": "prefix-shape", "range": [self.lo, self.hi], "grid": self.grid, "depth": self.depth,
                "required": list(self.required), "holds": self.holds,
                "violations": [list(v) for v in self.violations]}


def survivor_prefix_property(lo: float = 0.5, hi: float = 0.51, depth: int = 20, grid: int = 100,
                             coeff_set: CoefficientSet | str = B2, mult: int = 2,
                             required: Sequence[int] = (1, -2, -2)) -> PrefixShapeReport:
    """Check that every surviving prefix of degree ``>= len(required) - 1`` starts with ``required``.

    Each other prefix of that length is pruned on every cell with the remaining
    depth and must come back excluded.
    """
    cs = get_coefficient_set(coeff_set)
    required = tuple(required)
    k = len(required) - 1
    report = PrefixShapeReport(lo, hi, grid, depth, required)
    if depth < k:
        return report
    cfg = ScanConfig(lo, hi, grid, depth, mult, cs.name)
    for i in range(grid):
        a, b = cfg.cell(i)
        for tail in itertools.product(cs.allowed, repeat=k):
            prefix = (1,) + tail
            if prefix == required:
                continue
            res = prune(ExclusionQuery(a, b, mult, cs, depth - k), prefix)
            if not res.excluded:
                report.violations.append((a, b, format_coeffs(res.witness)))
    return report


# -- 2D locus grid ------------------------------------------------------------------------

LOCUS_LABELS = {0: "excluded", 1: "unknown", 2: "trivial"}
_GRAY = {0: 255, 1: 128, 2: 0}


@dataclass
class LocusGrid:
    gammas: np.ndarray
    lambdas: np.ndarray
    labels: np.ndarray  # shape (len(lambdas), len(gammas)); 0 excluded, 1 unknown, 2 trivial
    depth: int

    def label(self, i: int, j: int) -> str:
        return LOCUS_LABELS[int(self.labels[i, j])]

    def to_pgm(self) -> str:
        """Plain (P2) graymap: white = certified outside, black = trivially inside, gray = unknown.

        Rows run from the largest lambda (top) to the smallest.
        """
        h, w = self.labels.shape
        lines = ["P2", f"# locus grid depth={self.depth}", f"{w} {h}", "255"]
        for i in range(h - 1, -1, -1):
            lines.append(" ".join(str(_GRAY[int(v)]) for v in self.labels[i]))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["gamma,lambda,label"]
        for i, lam in enumerate(self.lambdas):
            for j, gam in enumerate(self.gammas):
                rows.append(f"{gam!r},{lam!r},{self.label(i, j)}")
        return "\n".join(rows) + "\n"


def classify_locus_point(gam: float, lam: float, depth: int, coeff_set: CoefficientSet | str = B1,
                         fp_model: str = "horner") -> str:
    """Label one parameter pair: ``trivial`` (``gam * lam >= 1/2``), ``excluded`` or ``unknown``."""
    if Fraction(gam) * Fraction(lam) >= Fraction(1, 2):
        return "trivial"
    res = point_search([gam, lam] if gam != lam else [gam], depth, coeff_set, fp_model)
    return "excluded" if res.excluded else "unknown"


def render_locus_2d(region: Sequence[float] = (0.5, 1.0, 0.5, 1.0), resolution: int | Sequence[int] = 64,
                    depth: int = 16, coeff_set: CoefficientSet | str = B1, fp_model: str = "horner") -> LocusGrid:
    """Classify pixel centres of ``region = (gamma_lo, gamma_hi, lambda_lo, lambda_hi)``."""
    g0, g1, l0, l1 = region
    if not (0 < g0 < g1 <= 1 and 0 < l0 < l1 <= 1):
        raise ValueError("region must lie in (0, 1)^2")
    nx, ny = (resolution, resolution) if isinstance(resolution, int) else resolution
    gammas = g0 + (np.arange(nx) + 0.5) * (g1 - g0) / nx
    lambdas = l0 + (np.arange(ny) + 0.5) * (l1 - l0) / ny
    code = {v: k for k, v in LOCUS_LABELS.items()}
    labels = np.zeros((ny, nx), dtype=np.int8)
    for i, lam in enumerate(lambdas):
        for j, gam in enumerate(gammas):
            labels[i, j] = code[classify_locus_point(float(gam), float(lam), depth, coeff_set, fp_model)]
    return LocusGrid(gammas, lambdas, labels, depth)
