"""Soft memberships, hard partitions and overlap scores from fitted parameters."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .em import SsbmParams
from .graph import Partition

Side = Literal["outgoing", "incoming"]

#: diagonal share of a block-matrix row above which a group counts as "like"
DIAG_THRESHOLD = 0.5
#: row mass below which a sign is considered absent for that group
EMPTY_ROW_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SoftMembership:
    """Per-vertex group probabilities from the tail (alpha) and head (beta) side.

    Rows for vertices without edges on a side are all-zero and marked
    False in ``alpha_defined`` / ``beta_defined``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    alpha_defined: np.ndarray
    beta_defined: np.ndarray

    @property
    def c(self) -> int:
        return self.alpha.shape[1]

    def side(self, side: Side) -> tuple[np.ndarray, np.ndarray]:
        if side == "outgoing":
            return self.alpha, self.alpha_defined
        if side == "incoming":
            return self.beta, self.beta_defined
        raise ValueError(f"unknown side {side!r}")


def _membership(weights: np.ndarray, cent: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    raw = (weights[:, None] * cent).T  # (n, c)
    tot = raw.sum(axis=1, keepdims=True)
    defined = tot[:, 0] > 0
    rows = np.divide(raw, tot, out=np.zeros_like(raw), where=tot > 0)
    return rows, defined


def soft_membership(p: SsbmParams) -> SoftMembership:
    """Membership probabilities ``alpha[i, r]`` and ``beta[j, s]``.

    ``alpha[i, r]`` is proportional to ``theta[r, i]`` times the total
    outgoing block mass of group r (both signs); ``beta`` uses ``phi``
    and incoming block mass.
    """
    both = p.omega_pos + p.omega_neg
    alpha, a_ok = _membership(both.sum(axis=1), p.theta)
    beta, b_ok = _membership(both.sum(axis=0), p.phi)
    return SoftMembership(alpha, beta, a_ok, b_ok)


def hard_partition(m: SoftMembership, side: Side = "outgoing") -> Partition:
    """Most likely group per vertex; ties go to the lowest index.

    Vertices with undefined rows get group 0 and are flagged.
    """
    rows, defined = m.side(side)
    return Partition(np.argmax(rows, axis=1), m.c, flagged=~defined)


def _rows(m: SoftMembership | np.ndarray, side: Side) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(m, SoftMembership):
        return m.side(side)
    rows = np.atleast_2d(np.asarray(m, dtype=float))
    return rows, np.ones(rows.shape[0], dtype=bool)


def bridgeness(m: SoftMembership | np.ndarray, side: Side = "outgoing") -> np.ndarray:
    """``1 - sqrt(c/(c-1) * sum_r (a_r - 1/c)^2)`` per vertex.

    0 for a point mass, 1 for a uniform row.  Accepts a SoftMembership or
    a raw ``(n, c)`` array of membership rows.  Undefined rows give NaN.
    """
    rows, defined = _rows(m, side)
    c = rows.shape[1]
    if c < 2:
        raise ValueError("bridgeness needs at least two groups")
    spread = np.sqrt(c / (c - 1) * np.sum((rows - 1.0 / c) ** 2, axis=1))
    out = np.clip(1.0 - spread, 0.0, 1.0)
    out[~defined] = np.nan
    return out


def group_entropy(m: SoftMembership | np.ndarray, side: Side = "outgoing") -> np.ndarray:
    """Entropy of each membership row in base c (0 log 0 = 0)."""
    rows, defined = _rows(m, side)
    c = rows.shape[1]
    if c < 2:
        raise ValueError("group entropy needs at least two groups")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(rows > 0, rows * np.log(rows), 0.0)
    out = np.clip(-terms.sum(axis=1) / np.log(c), 0.0, 1.0)
    out[~defined] = np.nan
    return out


def _classify(pos: np.ndarray, neg: np.ndarray, k: int) -> str:
    def diag_share(row):
        tot = row.sum()
        return None if tot < EMPTY_ROW_TOL else row[k] / tot

    sp, sn = diag_share(pos), diag_share(neg)
    if sp is None and sn is None:
        return "mixed"
    # a sign absent from the row does not vote
    pos_in = sp is None or sp > DIAG_THRESHOLD
    pos_out = sp is None or sp < DIAG_THRESHOLD
    neg_in = sn is None or sn > DIAG_THRESHOLD
    neg_out = sn is None or sn < DIAG_THRESHOLD
    if pos_in and neg_out:
        return "community-like"
    if neg_in and pos_out:
        return "disassortative-like"
    return "mixed"


def block_image(p: SsbmParams) -> dict:
    """Block matrices plus a per-group structure label for each side.

    For the outgoing side group r is read from row r of each block
    matrix, for the incoming side from column r.  A group is
    "community-like" when most of its positive mass stays on the diagonal
    and most of its negative mass leaves it, "disassortative-like" for the
    mirror image, and "mixed" otherwise.  A sign with no mass in the row
    does not vote.  The labels are a heuristic reading aid.
    """
    out = {"omega_pos": p.omega_pos.tolist(), "omega_neg": p.omega_neg.tolist(),
           "threshold": DIAG_THRESHOLD, "advisory": True}
    for side, wp, wn in (("outgoing", p.omega_pos, p.omega_neg),
                         ("incoming", p.omega_pos.T, p.omega_neg.T)):
        out[side] = [_classify(wp[k], wn[k], k) for k in range(p.c)]
    return out


def membership_table(p: SsbmParams, names: Sequence[str]) -> str:
    """CSV report, one row per vertex.

    Columns: name, label_out, label_in, alpha_*, beta_*, bridgeness_out,
    entropy_out, bridgeness_in, entropy_in, theta (centrality in the
    outgoing group), phi (centrality in the incoming group).  Undefined
    values are left empty.
    """
    m = soft_membership(p)
    out_lab = hard_partition(m, "outgoing")
    in_lab = hard_partition(m, "incoming")
    c = p.c
    if c >= 2:
        scores = [bridgeness(m, "outgoing"), group_entropy(m, "outgoing"),
                  bridgeness(m, "incoming"), group_entropy(m, "incoming")]
    else:
        scores = [np.where(d, 0.0, np.nan) for d in
                  (m.alpha_defined, m.alpha_defined, m.beta_defined, m.beta_defined)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "label_out", "label_in"] + [f"alpha_{r}" for r in range(c)]
               + [f"beta_{r}" for r in range(c)]
               + ["bridgeness_out", "entropy_out", "bridgeness_in", "entropy_in", "theta", "phi"])

    def fmt(x):
        return "" if np.isnan(x) else repr(float(x))

    for i, name in enumerate(names):
        a = m.alpha[i] if m.alpha_defined[i] else [np.nan] * c
        b = m.beta[i] if m.beta_defined[i] else [np.nan] * c
        row = [name,
               "" if out_lab.flagged[i] else int(out_lab.labels[i]),
               "" if in_lab.flagged[i] else int(in_lab.labels[i])]
        row += [fmt(x) for x in a] + [fmt(x) for x in b] + [fmt(s[i]) for s in scores]
        row += [fmt(p.theta[out_lab.labels[i], i]), fmt(p.phi[in_lab.labels[i], i])]
        w.writerow(row)
    return buf.getvalue()
