"""Choosing the number of groups by minimum description length."""
from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .em import DegenerateParametersError, FitConfig, FitResult, Mode, fit
from .graph import SignedGraph

log = logging.getLogger(__name__)

#: parameter entries below this are structural zeros and cost nothing
ZERO_TOL = 1e-8


def _code_length(arr: np.ndarray) -> float:
    kept = arr[arr >= ZERO_TOL]
    return float(-np.sum(np.log(kept)))


def description_length(g: SignedGraph, result: FitResult, mode: Mode | None = None) -> tuple[float, float]:
    """``(data_length, param_length)`` for a fit.

    The data term is ``-L`` (directed) or ``-L/2`` (undirected, where L
    counts each edge in both orientations).  The parameter term is
    ``-sum ln(x)`` over both block matrices and theta, plus phi when
    directed.  Entries below ``ZERO_TOL`` are treated as exact zeros,
    which EM fits approach geometrically; a vanished parameter is not
    coded, so it adds nothing (the 0 ln 0 = 0 convention).
    """
    if mode is None:
        mode = result.mode
    ll = result.log_likelihood
    if not np.isfinite(ll):
        raise ValueError("log-likelihood is not finite")
    p = result.params
    data = -ll if mode == "directed" else -ll / 2
    param = _code_length(p.omega_pos) + _code_length(p.omega_neg) + _code_length(p.theta)
    if mode == "directed":
        param += _code_length(p.phi)
    return data, param


@dataclass(frozen=True)
class MdlRow:
    c: int
    data_length: float
    param_length: float
    fit: FitResult | None = field(default=None, repr=False, compare=False)
    error: str | None = None

    @property
    def total_length(self) -> float:
        return self.data_length + self.param_length


@dataclass(frozen=True)
class MdlReport:
    per_c: list[MdlRow]
    best_c: int
    zero_tol: float = ZERO_TOL

    @property
    def best(self) -> MdlRow:
        return next(r for r in self.per_c if r.c == self.best_c)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["c", "data_length", "param_length", "total_length", "log_likelihood",
                    "iterations", "converged", "error"])
        for r in self.per_c:
            if r.error is not None:
                w.writerow([r.c, "", "", "", "", "", "", r.error])
                continue
            w.writerow([r.c, repr(r.data_length), repr(r.param_length), repr(r.total_length),
                        repr(r.fit.log_likelihood), r.fit.iterations, r.fit.converged, ""])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"best_c": self.best_c, "zero_tol": self.zero_tol,
                "rows": [{"c": r.c, "data_length": r.data_length, "param_length": r.param_length,
                          "total_length": r.total_length, "error": r.error} for r in self.per_c]}


def select_groups(g: SignedGraph, c_min: int, c_max: int, cfg: FitConfig | None = None) -> MdlReport:
    """Fit every c in ``[c_min, c_max]`` and keep the shortest description.

    Ties go to the smaller c.  A c whose fit fails is recorded with its
    error and skipped.

    Raises:
        ValueError: bad range, or every c failed.
    """
    cfg = cfg or FitConfig()
    if not 1 <= c_min <= c_max <= g.n:
        raise ValueError(f"need 1 <= c_min <= c_max <= n, got {c_min}, {c_max}, n={g.n}")
    mode = cfg.resolved_mode(g)

    def one(c: int) -> MdlRow:
        try:
            res = fit(g, c, replace(cfg, threads=1) if cfg.threads > 1 else cfg)
        except DegenerateParametersError as exc:
            log.warning("c=%d failed: %s", c, exc)
            return MdlRow(c, np.nan, np.nan, None, str(exc))
        data, param = description_length(g, res, mode)
        return MdlRow(c, data, param, res)

    cs = range(c_min, c_max + 1)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            rows = list(pool.map(one, cs))
    else:
        rows = [one(c) for c in cs]
    ok = [r for r in rows if r.error is None]
    if not ok:
        raise ValueError("every group count failed to fit")
    best = min(ok, key=lambda r: (r.total_length, r.c))
    return MdlReport(rows, best.c)
