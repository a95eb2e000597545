"""Synthetic signed networks with planted groups, and NMI scoring."""
from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .em import FitConfig, fit
from .graph import Partition, SignedGraph
from .membership import hard_partition, soft_membership

log = logging.getLogger(__name__)

GenMode = Literal["community", "disassortative"]

#: Mixed-structure network: (tail block, head block, sign, link probability).
MIXED_BLOCKS = (
    (0, 0, +1, 0.5),                                      # positive-only community
    (1, 1, +1, 0.5), (1, 2, -1, 0.15), (1, 3, -1, 0.15),  # signed community
    (2, 2, -1, 0.5), (2, 0, +1, 0.15), (2, 1, +1, 0.15),  # signed disassortative
    (3, 3, -1, 0.5), (3, 1, -1, 0.15),                    # negative-only
)


@dataclass(frozen=True)
class GeneratorConfig:
    """Signed planted-partition benchmark.

    ``p_in`` is the expected share of a vertex's edges that stay inside
    its group.  In community mode edges are positive inside and negative
    across groups; ``p_plus`` turns a between-group edge positive and
    ``p_minus`` turns a within-group edge negative.  Disassortative mode
    swaps the base signs; there ``p_plus`` makes a within-group edge
    positive and ``p_minus`` makes a between-group edge negative.
    """

    n: int = 128
    groups: int = 4
    avg_degree: float = 16.0
    p_in: float = 0.8
    p_plus: float = 0.0
    p_minus: float = 0.0
    mode: GenMode = "community"
    seed: int = 0

    def __post_init__(self):
        for name in ("p_in", "p_plus", "p_minus"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if self.mode not in ("community", "disassortative"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.groups < 1 or self.n < 2 or self.n % self.groups:
            raise ValueError(f"{self.groups} groups must evenly divide n={self.n}")
        if not 0 <= self.avg_degree < self.n:
            raise ValueError("avg_degree must lie in [0, n)")

    def pair_probabilities(self) -> tuple[float, float]:
        """Link probability for a within-group and a between-group pair."""
        size = self.n // self.groups
        p_w = self.avg_degree * self.p_in / (size - 1) if size > 1 else 0.0
        p_b = (self.avg_degree * (1 - self.p_in) / (self.n - size)) if self.groups > 1 else 0.0
        if self.groups == 1 and self.p_in < 1:
            raise ValueError("a single group cannot host between-group edges")
        if size == 1 and self.p_in > 0:
            raise ValueError("singleton groups cannot host within-group edges")
        if p_w > 1 or p_b > 1:
            raise ValueError(f"degree target infeasible (pair probabilities {p_w:.3f}, {p_b:.3f})")
        return p_w, p_b


@dataclass(frozen=True, eq=False)
class LabeledNetwork:
    graph: SignedGraph
    truth: Partition
    metadata: dict = field(default_factory=dict)


def generate(cfg: GeneratorConfig) -> LabeledNetwork:
    """Undirected signed network with ``cfg.groups`` equal planted groups.

    Every vertex pair is linked independently, with the within- or
    between-group probability chosen so that the expected degree is
    ``avg_degree`` and a share ``p_in`` of it falls inside the group.
    """
    p_w, p_b = cfg.pair_probabilities()
    rng = np.random.default_rng(cfg.seed)
    labels = np.repeat(np.arange(cfg.groups), cfg.n // cfg.groups)
    iu, ju = np.triu_indices(cfg.n, k=1)
    within = labels[iu] == labels[ju]
    keep = rng.random(iu.size) < np.where(within, p_w, p_b)
    i, j, within = iu[keep], ju[keep], within[keep]
    flip = rng.random(i.size)
    if cfg.mode == "community":
        sign = np.where(within, np.where(flip < cfg.p_minus, -1.0, 1.0),
                        np.where(flip < cfg.p_plus, 1.0, -1.0))
    else:
        sign = np.where(within, np.where(flip < cfg.p_plus, 1.0, -1.0),
                        np.where(flip < cfg.p_minus, -1.0, 1.0))
    g = SignedGraph.from_edges(cfg.n, zip(i, j, sign), directed=False)
    return LabeledNetwork(g, Partition(labels, cfg.groups), {"generator": asdict(cfg)})


def generate_mixed_blocks(seed: int = 0, block_size: int = 32) -> LabeledNetwork:
    """Directed 4-block network mixing structure types (see ``MIXED_BLOCKS``).

    From the outgoing side: block 0 is a positive-only community, block 1
    a signed community, block 2 signed disassortative and block 3 sends
    negative edges only.
    """
    rng = np.random.default_rng(seed)
    n = 4 * block_size
    labels = np.repeat(np.arange(4), block_size)
    edges = []
    for r, s, sign, prob in MIXED_BLOCKS:
        src = np.arange(r * block_size, (r + 1) * block_size)
        dst = np.arange(s * block_size, (s + 1) * block_size)
        hit = rng.random((block_size, block_size)) < prob
        if r == s:
            np.fill_diagonal(hit, False)
        a, b = np.nonzero(hit)
        edges.extend(zip(src[a], dst[b], itertools.repeat(float(sign))))
    g = SignedGraph.from_edges(n, edges, directed=True)
    meta = {"generator": "mixed_blocks", "seed": seed, "block_size": block_size,
            "blocks": [list(b) for b in MIXED_BLOCKS]}
    return LabeledNetwork(g, Partition(labels, 4), meta)


def _labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else np.asarray(p)


def nmi(c1, c2) -> float:
    """Normalized mutual information with geometric-mean normalization.

    Accepts Partitions or label arrays.  Two single-group partitions give
    1.0.

    Raises:
        ValueError: sizes differ, or exactly one partition has one group.
    """
    a, b = _labels(c1), _labels(c2)
    if a.shape != b.shape:
        raise ValueError("partitions cover different vertex counts")
    n = a.size
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    ka, kb = ia.max() + 1, ib.max() + 1
    if ka == 1 and kb == 1:
        return 1.0
    if ka == 1 or kb == 1:
        raise ValueError("NMI undefined: one partition has a single group")
    counts = np.zeros((ka, kb))
    np.add.at(counts, (ia, ib), 1)
    na, nb = counts.sum(axis=1), counts.sum(axis=0)
    nz = counts > 0
    # fsum is correctly rounded, so swapping or relabeling the partitions,
    # which only reorders the terms, gives a bit-identical result
    num = math.fsum(counts[nz] * np.log(counts[nz] * n / np.outer(na, nb)[nz]))
    den = math.sqrt(math.fsum(na * np.log(na / n)) * math.fsum(nb * np.log(nb / n)))
    return float(min(max(num / den, 0.0), 1.0))


def recovery_nmi(net: LabeledNetwork, fit_cfg: FitConfig, c: int | None = None,
                 side: str = "outgoing") -> float:
    """Fit the network and score its hard partition against the truth.

    A fit that collapses to a single group scores 0.
    """
    res = fit(net.graph, c or net.truth.c, fit_cfg)
    pred = hard_partition(soft_membership(res.params), side)
    try:
        return nmi(net.truth, pred)
    except ValueError:
        return 0.0


def parse_grid(spec: str) -> list[tuple[float, float, float]]:
    """Parse ``"p_in=0.9,0.5;p_plus=0;p_minus=0,0.25"`` into grid cells.

    Keys missing from the string default to 0 for the noise parameters;
    ``p_in`` is required.  Cells come out in row-major order.
    """
    values = {"p_plus": [0.0], "p_minus": [0.0]}
    seen = set()
    for part in filter(None, (s.strip() for s in spec.split(";"))):
        key, sep, rhs = part.partition("=")
        key = key.strip()
        if not sep or key not in ("p_in", "p_plus", "p_minus") or key in seen:
            raise ValueError(f"bad grid term {part!r}")
        seen.add(key)
        try:
            vals = [float(x) for x in rhs.split(",") if x.strip()]
        except ValueError:
            raise ValueError(f"bad number in grid term {part!r}") from None
        if not vals or any(not 0 <= v <= 1 for v in vals):
            raise ValueError(f"grid term {part!r} needs probabilities in [0, 1]")
        values[key] = vals
    if "p_in" not in seen:
        raise ValueError("grid must set p_in")
    return list(itertools.product(values["p_in"], values["p_plus"], values["p_minus"]))


def sweep(cells: Sequence[tuple[float, float, float]], realizations: int = 10,
          base: GeneratorConfig | None = None, fit_cfg: FitConfig | None = None,
          seed: int = 0) -> list[dict]:
    """Mean NMI per (p_in, p_plus, p_minus) cell.

    Realization k of every cell uses generator seed ``seed + k`` and fit
    seed ``seed + k``, so a 1x1 grid with one realization is exactly one
    generate, fit and score run.
    """
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    base = base or GeneratorConfig()
    fit_cfg = fit_cfg or FitConfig()
    rows = []
    for p_in, p_plus, p_minus in cells:
        scores = []
        for k in range(realizations):
            gcfg = replace(base, p_in=p_in, p_plus=p_plus, p_minus=p_minus, seed=seed + k)
            scores.append(recovery_nmi(generate(gcfg), replace(fit_cfg, seed=seed + k)))
        rows.append({"mode": base.mode, "p_in": p_in, "p_plus": p_plus, "p_minus": p_minus,
                     "realizations": realizations, "mean_nmi": float(np.mean(scores)),
                     "std_nmi": float(np.std(scores)), "min_nmi": float(np.min(scores))})
        log.info("cell %s: mean NMI %.4f", (p_in, p_plus, p_minus), rows[-1]["mean_nmi"])
    return rows


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = ["mode", "p_in", "p_plus", "p_minus", "realizations", "mean_nmi", "std_nmi", "min_nmi"]
    w = csv.DictWriter(buf, cols, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
