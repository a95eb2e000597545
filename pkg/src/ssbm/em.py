"""Signed stochastic block model fitted by expectation-maximization.

An edge from i to j of a given sign picks a (tail group r, head group s)
pair with probability ``omega[r, s]`` (one block matrix per sign), then a
tail vertex with probability ``theta[r, i]`` and a head vertex with
probability ``phi[s, j]``.  The undirected model ties ``phi`` to
``theta``.

All per-edge work is vectorized over an ``(m, c, c)`` responsibility
array, so one iteration costs O(m c^2).
"""
from __future__ import annotations

import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp
from scipy.cluster.vq import kmeans2
from scipy.sparse.linalg import svds

from .graph import Edges, SignedGraph

log = logging.getLogger(__name__)

Mode = Literal["directed", "undirected"]
InitMethod = Literal["spectral", "random"]
SpectralView = Literal["profile", "signed"]
SPECTRAL_VIEWS: tuple[SpectralView, ...] = ("profile", "signed")

INIT_EPS = 1e-3
#: weight of the random background added to the one-hot spectral start
SPECTRAL_SMOOTHING = 0.1


class DegenerateParametersError(RuntimeError):
    """Some observed edge has zero probability under the parameters."""


@dataclass(frozen=True, eq=False)
class SsbmParams:
    """Model parameters.

    Attributes:
        omega_pos: ``(c, c)`` block matrix for positive edges, sums to 1.
        omega_neg: ``(c, c)`` block matrix for negative edges, sums to 1.
        theta: ``(c, n)`` tail centralities, each row sums to 1.
        phi: ``(c, n)`` head centralities, each row sums to 1.
    """

    omega_pos: np.ndarray
    omega_neg: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    @property
    def c(self) -> int:
        return self.omega_pos.shape[0]

    @property
    def n(self) -> int:
        return self.theta.shape[1]

    def check(self, tol: float = 1e-9) -> None:
        """Raise ``ValueError`` unless shapes and normalizations hold."""
        c, n = self.c, self.n
        for name, arr, shape in (("omega_pos", self.omega_pos, (c, c)),
                                 ("omega_neg", self.omega_neg, (c, c)),
                                 ("theta", self.theta, (c, n)),
                                 ("phi", self.phi, (c, n))):
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"{name} must be finite and non-negative")
        for name in ("omega_pos", "omega_neg"):
            if abs(getattr(self, name).sum() - 1.0) > tol:
                raise ValueError(f"{name} does not sum to 1")
        for name in ("theta", "phi"):
            if np.any(np.abs(getattr(self, name).sum(axis=1) - 1.0) > tol):
                raise ValueError(f"rows of {name} do not sum to 1")

    def permuted(self, perm) -> "SsbmParams":
        """Relabel groups: new group k is old group ``perm[k]``."""
        perm = np.asarray(perm)
        return SsbmParams(self.omega_pos[np.ix_(perm, perm)], self.omega_neg[np.ix_(perm, perm)],
                          self.theta[perm], self.phi[perm])

    def to_dict(self) -> dict:
        return {"c": self.c, "omega_pos": self.omega_pos.tolist(),
                "omega_neg": self.omega_neg.tolist(), "theta": self.theta.tolist(),
                "phi": self.phi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SsbmParams":
        return cls(*(np.asarray(d[k], dtype=float)
                     for k in ("omega_pos", "omega_neg", "theta", "phi")))


@dataclass(frozen=True, eq=False)
class EdgeResponsibilities:
    """Posterior group-pair tables, ``(m, c, c)`` per sign.

    Rows follow ``g.oriented`` edge order (both orientations for
    undirected graphs).
    """

    q_pos: np.ndarray
    q_neg: np.ndarray


@dataclass(frozen=True)
class FitConfig:
    restarts: int = 10
    max_iters: int = 500
    rel_tol: float = 1e-8
    seed: int = 0
    mode: Mode | None = None  # None: follow the graph
    threads: int = 1
    init: InitMethod = "spectral"

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.mode not in (None, "directed", "undirected"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.init not in ("spectral", "random"):
            raise ValueError(f"unknown init {self.init!r}")

    def resolved_mode(self, g: SignedGraph) -> Mode:
        if self.mode is not None:
            return self.mode
        return "directed" if g.directed else "undirected"


@dataclass(frozen=True, eq=False)
class FitResult:
    params: SsbmParams
    log_likelihood: float
    iterations: int
    converged: bool
    restart_index: int
    mode: Mode = "directed"
    seed: int = 0
    history: tuple = field(default=(), repr=False)

    @property
    def c(self) -> int:
        return self.params.c

    def to_dict(self) -> dict:
        d = self.params.to_dict()
        d.update(log_likelihood=self.log_likelihood, iterations=self.iterations,
                 converged=self.converged, restart_index=self.restart_index,
                 mode=self.mode, seed=self.seed)
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(SsbmParams.from_dict(d), float(d["log_likelihood"]), int(d["iterations"]),
                   bool(d["converged"]), int(d["restart_index"]), d.get("mode", "directed"),
                   int(d.get("seed", 0)))


def _joint(e: Edges, omega: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # (m, c, c): omega[r, s] * theta[r, i] * phi[s, j]
    return theta[:, e.src].T[:, :, None] * omega[None, :, :] * phi[:, e.dst].T[:, None, :]


def _estep(g: SignedGraph, p: SsbmParams) -> tuple[EdgeResponsibilities, float]:
    if p.n != g.n:
        raise ValueError(f"parameters are for n={p.n}, graph has n={g.n}")
    tables = []
    total = 0.0
    for e, omega, sign in zip(g.oriented, (p.omega_pos, p.omega_neg), "+-"):
        if len(e) == 0:
            tables.append(np.zeros((0, p.c, p.c)))
            continue
        joint = _joint(e, omega, p.theta, p.phi)
        prob = joint.sum(axis=(1, 2))
        if np.any(prob <= 0):
            k = int(np.argmin(prob))
            raise DegenerateParametersError(
                f"{sign} edge ({e.src[k]}, {e.dst[k]}) has zero probability")
        tables.append(joint / prob[:, None, None])
        total += float(e.weight @ np.log(prob))
    return EdgeResponsibilities(tables[0], tables[1]), total


def log_likelihood(g: SignedGraph, p: SsbmParams) -> float:
    """Log-likelihood of the observed signed edges.

    A sign class with no edges contributes nothing.

    Raises:
        DegenerateParametersError: an edge has zero mixture probability.
    """
    return _estep(g, p)[1]


def e_step(g: SignedGraph, p: SsbmParams) -> EdgeResponsibilities:
    """Posterior probability of each (tail group, head group) per edge."""
    return _estep(g, p)[0]


def expected_log_likelihood(g: SignedGraph, q: EdgeResponsibilities, p: SsbmParams) -> float:
    """Complete-data log-likelihood averaged over ``q``.

    Terms with zero responsibility are dropped, so zero parameters are
    fine wherever ``q`` puts no mass.
    """
    total = 0.0
    for e, qq, omega in zip(g.oriented, (q.q_pos, q.q_neg), (p.omega_pos, p.omega_neg)):
        if len(e) == 0:
            continue
        with np.errstate(divide="ignore"):
            logs = (np.log(omega)[None, :, :] + np.log(p.theta[:, e.src]).T[:, :, None]
                    + np.log(p.phi[:, e.dst]).T[:, None, :])
        wq = e.weight[:, None, None] * qq
        total += float(np.sum(np.where(wq > 0, wq * logs, 0.0)))
    return total


def _normalize_rows(acc: np.ndarray) -> np.ndarray:
    tot = acc.sum(axis=1, keepdims=True)
    out = np.divide(acc, tot, out=np.zeros_like(acc), where=tot > 0)
    # a group that lost all its edges keeps a valid (uniform) distribution
    dead = tot[:, 0] <= 0
    out[dead] = 1.0 / acc.shape[1]
    return out


def m_step(g: SignedGraph, q: EdgeResponsibilities, mode: Mode | None = None) -> SsbmParams:
    """Closed-form maximizer of the expected log-likelihood given ``q``.

    A sign class with no edges gets the uniform block matrix.  Vertices
    with no edges on a side get zero centrality there.  In undirected
    mode the tail and head accumulators are merged so ``theta is phi``
    up to equality of values.
    """
    if mode is None:
        mode = "directed" if g.directed else "undirected"
    c = q.q_pos.shape[1] if q.q_pos.size else q.q_neg.shape[1]
    tail = np.zeros((g.n, c))
    head = np.zeros((g.n, c))
    omegas = []
    for e, qq, (tail_op, head_op) in zip(g.oriented, (q.q_pos, q.q_neg), g.incidence):
        if len(e) == 0:
            omegas.append(np.full((c, c), 1.0 / c**2))
            continue
        acc = (e.weight @ qq.reshape(len(e), c * c)).reshape(c, c)
        omegas.append(acc / acc.sum())
        tail += tail_op @ (e.weight[:, None] * qq.sum(axis=2))
        head += head_op @ (e.weight[:, None] * qq.sum(axis=1))
    return _finish(omegas, tail, head, mode)


def _finish(omegas, tail, head, mode) -> SsbmParams:
    if mode == "undirected":
        theta = _normalize_rows((tail + head).T)
        phi = theta.copy()
    else:
        theta = _normalize_rows(tail.T)
        phi = _normalize_rows(head.T)
    return SsbmParams(omegas[0], omegas[1], theta, phi)


def em_update(g: SignedGraph, p: SsbmParams, mode: Mode | None = None) -> tuple[SsbmParams, float]:
    """One EM iteration without materializing the responsibilities.

    Returns the updated parameters and the log-likelihood of ``p``.  The
    result equals ``m_step(g, e_step(g, p), mode)``: every accumulator of
    the M-step is a sum of ``w / prob`` times products of theta, omega
    and phi, which reduce to ``(m, c)`` matrix products.  Cost per call is
    still O(m c^2), but with no ``(m, c, c)`` temporaries.
    """
    if mode is None:
        mode = "directed" if g.directed else "undirected"
    if p.n != g.n:
        raise ValueError(f"parameters are for n={p.n}, graph has n={g.n}")
    c = p.c
    tail = np.zeros((g.n, c))
    head = np.zeros((g.n, c))
    omegas = []
    total = 0.0
    for e, omega, (tail_op, head_op), sign in zip(g.oriented, (p.omega_pos, p.omega_neg),
                                                   g.incidence, "+-"):
        if len(e) == 0:
            omegas.append(np.full((c, c), 1.0 / c**2))
            continue
        x = p.theta.T[e.src]            # (m, c)
        y = p.phi.T[e.dst]              # (m, c)
        xo = x @ omega                  # sum_r theta_ri omega_rs
        prob = np.einsum("ms,ms->m", xo, y)
        if np.any(prob <= 0):
            k = int(np.argmin(prob))
            raise DegenerateParametersError(
                f"{sign} edge ({e.src[k]}, {e.dst[k]}) has zero probability")
        total += float(e.weight @ np.log(prob))
        u = e.weight / prob
        uy = u[:, None] * y
        acc = omega * (x.T @ uy)
        omegas.append(acc / acc.sum())
        tail += tail_op @ (uy @ omega.T)
        head += head_op @ (u[:, None] * xo)
    # the sums above still lack the vertex's own centrality factor
    return _finish(omegas, tail * p.theta.T, head * p.phi.T, mode), total


def spectral_labels(g: SignedGraph, c: int, seed=None, view: SpectralView = "profile") -> np.ndarray:
    """Cluster vertices on the leading singular vectors of their edge profiles.

    With ``view="profile"`` each vertex is described by its rows of A+ and
    A- side by side; with ``view="signed"`` by its row of A = A+ - A-.
    Directed graphs append the matching columns.  Under the block model
    these profiles depend only on the vertex's group, so their expected
    matrix has rank at most c and its top-c left singular subspace
    separates the groups.  The signed view is sharper when signs follow
    the groups; the profile view survives sign noise that cancels in A.
    k-means is seeded from ``seed``.
    """
    rng = np.random.default_rng(seed)
    if c == 1:
        return np.zeros(g.n, dtype=np.int64)
    parts = [sp.csr_matrix((e.weight, (e.src, e.dst)), shape=(g.n, g.n)) for e in g.oriented]
    if view == "signed":
        parts = [parts[0] - parts[1]]
    elif view != "profile":
        raise ValueError(f"unknown spectral view {view!r}")
    blocks = []
    for a in parts:
        if a.nnz == 0:
            continue
        blocks.append(a)
        if g.directed:
            blocks.append(a.T.tocsr())
    if not blocks:
        return rng.integers(0, c, g.n)
    profile = sp.hstack(blocks).tocsr()
    k = min(c, min(profile.shape) - 1)
    if k < 1:
        return rng.integers(0, c, g.n)
    if g.n <= 300:
        u, s, _ = np.linalg.svd(profile.toarray(), full_matrices=False)
        u, s = u[:, :k], s[:k]
    else:
        u, s, _ = svds(profile, k=k, v0=rng.uniform(-1, 1, min(profile.shape)))
    emb = u * s
    if not np.any(emb):
        return rng.integers(0, c, g.n)
    with warnings.catch_warnings():
        # an empty cluster just leaves a group to the random background
        warnings.simplefilter("ignore", UserWarning)
        _, labels = kmeans2(emb, c, minit="++", seed=rng)
    return labels.astype(np.int64)


def init_params(g: SignedGraph, c: int, seed=None, mode: Mode | None = None,
                method: InitMethod = "random", view: SpectralView = "profile") -> SsbmParams:
    """Random strictly positive parameters satisfying all normalizations.

    Block matrices are drawn from U(INIT_EPS, 1) and normalized.  With
    ``method="random"`` the centralities are drawn the same way; with
    ``"spectral"`` each vertex starts concentrated on its
    :func:`spectral_labels` group (using ``view``), over a random
    background of relative weight ``SPECTRAL_SMOOTHING``.  With ``c == 1`` the centralities are
    uniform since there is no symmetry to break.  ``seed`` may be an int,
    a ``SeedSequence`` or a ``Generator``.
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    if mode is None:
        mode = "directed" if g.directed else "undirected"
    rng = np.random.default_rng(seed)
    omegas = []
    for _ in range(2):
        w = rng.uniform(INIT_EPS, 1.0, size=(c, c))
        if mode == "undirected":
            w = (w + w.T) / 2
        omegas.append(w / w.sum())
    if c == 1:
        theta = np.full((1, g.n), 1.0 / g.n)
        phi = theta.copy()
        return SsbmParams(omegas[0], omegas[1], theta, phi)

    def draw():
        x = rng.uniform(INIT_EPS, 1.0, size=(c, g.n))
        if method == "spectral":
            x *= SPECTRAL_SMOOTHING
            x[labels, np.arange(g.n)] += 1.0
        return x / x.sum(axis=1, keepdims=True)

    if method == "spectral":
        labels = spectral_labels(g, c, rng, view)
    elif method != "random":
        raise ValueError(f"unknown init method {method!r}")
    theta = draw()
    phi = theta.copy() if mode == "undirected" else draw()
    return SsbmParams(omegas[0], omegas[1], theta, phi)


def run_em(g: SignedGraph, params: SsbmParams, max_iters: int = 500, rel_tol: float = 1e-8,
           mode: Mode | None = None) -> tuple[SsbmParams, float, int, bool, list[float]]:
    """Iterate EM from ``params``.

    Stops once ``|dL| / (|L| + 1) < rel_tol`` or after ``max_iters``
    updates.  Returns ``(params, L, iterations, converged, history)``
    where ``history[k]`` is the log-likelihood after ``k`` updates.
    """
    new, ll = em_update(g, params, mode)
    history = [ll]
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        params = new
        new, cur = em_update(g, params, mode)
        history.append(cur)
        delta = abs(cur - ll) / (abs(ll) + 1.0)
        ll = cur
        if delta < rel_tol:
            converged = True
            break
    return params, ll, it, converged, history


def fit(g: SignedGraph, c: int, cfg: FitConfig | None = None) -> FitResult:
    """Best-of-``cfg.restarts`` EM fit with ``c`` groups.

    Each restart draws its own initialization (``cfg.init``) from a child
    of ``SeedSequence(cfg.seed)``; spectral restarts alternate between the
    profile and signed views; the highest log-likelihood wins, ties going
    to the earliest restart.  Restarts hitting degenerate parameters are
    dropped.

    Raises:
        ValueError: empty graph or bad ``c``.
        DegenerateParametersError: every restart failed.
    """
    cfg = cfg or FitConfig()
    if c < 1:
        raise ValueError("c must be >= 1")
    if g.m == 0:
        raise ValueError("cannot fit a graph without edges")
    mode = cfg.resolved_mode(g)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)

    def one(k: int):
        try:
            p0 = init_params(g, c, children[k], mode, cfg.init,
                             SPECTRAL_VIEWS[k % len(SPECTRAL_VIEWS)])
            return run_em(g, p0, cfg.max_iters, cfg.rel_tol, mode)
        except DegenerateParametersError as exc:
            log.warning("restart %d failed: %s", k, exc)
            return None

    if cfg.threads > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            runs = list(pool.map(one, range(cfg.restarts)))
    else:
        runs = [one(k) for k in range(cfg.restarts)]

    best = None
    for k, run in enumerate(runs):
        if run is not None and (best is None or run[1] > runs[best][1]):
            best = k
    if best is None:
        raise DegenerateParametersError(f"all {cfg.restarts} restarts hit degenerate parameters")
    params, ll, it, conv, hist = runs[best]
    return FitResult(params, ll, it, conv, best, mode, cfg.seed, tuple(hist))
