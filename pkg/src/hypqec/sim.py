"""Monte Carlo estimates of logical failure rates.

One trial of the single-shot protocol runs ``T`` rounds.  In round ``t`` fresh
qubit noise is added to the residual error, its syndrome is measured (with
syndrome bits flipped at rate ``q`` except in the last round), the decoder's
correction is applied, and the residual carries over.  The trial succeeds when
the final residual has zero syndrome and is a stabilizer.  ``T = 1`` is the
perfect-measurement experiment.

Every trial draws from its own stream seeded by ``(seed, trial, round, side)``,
so results do not depend on how trials are split across threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .css import CssCode
from .decode import TannerGraph, bp_decode, ca_decode
from .gf2 import RowSpace

CSV_HEADER = ["code", "n", "k", "decoder", "T", "p", "q", "trials", "failures", "rate",
              "ci_lo", "ci_hi", "mean_rounds", "seed", "descriptor", "version"]
_SIDES = {"Z": 0, "X": 1}


@dataclass(frozen=True)
class NoiseConfig:
    p: float
    q: float | None = None  # syndrome flip rate; defaults to p

    def __post_init__(self):
        if self.q is None:
            object.__setattr__(self, "q", self.p)
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5:
                raise ValueError(f"{name} = {v} outside [0, 1/2]")


@dataclass(frozen=True)
class ProtocolConfig:
    T: int = 1
    trials: int = 1000
    seed: int = 0
    decoder: str = "bp"
    side: str = "Z"
    max_rounds: int = 100  # BP rounds or CA sweeps per decode
    bp_prior: float | None = None  # None: the channel p
    threads: int = 1

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.decoder not in ("bp", "ca"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.side not in ("X", "Z", "both"):
            raise ValueError(f"side must be X, Z or both, not {self.side!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass
class SweepPoint:
    p: float
    q: float
    trials: int
    failures: int
    rate: float
    ci_lo: float
    ci_hi: float
    mean_rounds: float
    unencoded: float  # 1 - (1 - p)^k
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class SweepResult:
    code_name: str
    n: int
    k: int
    config: ProtocolConfig
    points: list[SweepPoint]
    descriptor: str = ""


def wald_ci(failures: int, trials: int) -> tuple[float, float]:
    """``p_hat -/+ 1.96 sqrt(p_hat (1 - p_hat) / trials)`` clipped to [0, 1]."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    ph = failures / trials
    half = 1.96 * math.sqrt(ph * (1.0 - ph) / trials)
    return max(0.0, ph - half), min(1.0, ph + half)


class _Side:
    """Everything one error type needs: checks, decoder graph, stabilizers."""

    def __init__(self, code: CssCode, side: str):
        self.graph = TannerGraph(code.checks(side))
        self.space = RowSpace(code.stabilizers(side))
        self.index = _SIDES[side]


def _trial(sides: list[_Side], n: int, cfg: ProtocolConfig, noise: NoiseConfig,
           trial: int) -> tuple[bool, int]:
    prior = cfg.bp_prior if cfg.bp_prior is not None else noise.p
    ok_all, rounds = True, 0
    for sd in sides:
        g = sd.graph
        residual = np.zeros(n, dtype=np.uint8)
        for t in range(1, cfg.T + 1):
            rng = np.random.default_rng([cfg.seed, trial, t, sd.index])
            residual ^= (rng.random(n) < noise.p).astype(np.uint8)
            s = g.syndrome(residual)
            if t < cfg.T and noise.q > 0:
                s ^= (rng.random(g.m) < noise.q).astype(np.uint8)
            if not s.any():
                continue
            if cfg.decoder == "ca":
                out = ca_decode(g, s, cfg.max_rounds)
            else:
                out = bp_decode(g, s, prior, cfg.max_rounds)
            residual ^= out.correction
            rounds += out.rounds
        # independent re-check, not the decoder's own verdict
        ok = not g.syndrome(residual).any() and residual in sd.space
        ok_all &= ok
    return ok_all, rounds


def run_single_shot(code: CssCode, cfg: ProtocolConfig, noise: NoiseConfig,
                    sides: list[_Side] | None = None) -> SweepPoint:
    if sides is None:
        sides = _make_sides(code, cfg.side)
    if cfg.decoder == "bp" and noise.p > 0 and not 0 < (cfg.bp_prior or noise.p) < 0.5:
        raise ValueError("BP needs a prior strictly between 0 and 1/2")
    start = time.perf_counter()

    def run(block):
        f = r = 0
        for trial in block:
            ok, rounds = _trial(sides, code.n, cfg, noise, trial)
            f += not ok
            r += rounds
        return f, r

    blocks = np.array_split(np.arange(cfg.trials), max(1, cfg.threads))
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    failures = sum(p[0] for p in parts)
    rounds = sum(p[1] for p in parts)
    lo, hi = wald_ci(failures, cfg.trials)
    return SweepPoint(
        p=noise.p, q=noise.q if cfg.T > 1 else 0.0, trials=cfg.trials, failures=failures,
        rate=failures / cfg.trials, ci_lo=lo, ci_hi=hi, mean_rounds=rounds / cfg.trials,
        unencoded=1.0 - (1.0 - noise.p) ** code.k, wall_time=time.perf_counter() - start,
    )


def _make_sides(code: CssCode, side: str) -> list[_Side]:
    return [_Side(code, s) for s in (("Z", "X") if side == "both" else (side,))]


def sweep(code: CssCode, p_grid, cfg: ProtocolConfig, q: float | None = None,
          code_name: str = "", descriptor: str = "") -> SweepResult:
    """One point per ``p``; ``q`` defaults to ``p`` at each point."""
    sides = _make_sides(code, cfg.side)
    points = [run_single_shot(code, cfg, NoiseConfig(float(p), q), sides) for p in p_grid]
    return SweepResult(code_name or code.meta.get("construction", ""), code.n, code.k, cfg,
                       points, descriptor or code.meta.get("construction", ""))


# ---------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return repr(float(x))


def to_csv(res: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for pt in res.points:
        w.writerow([res.code_name, res.n, res.k, res.config.decoder, res.config.T, _fmt(pt.p),
                    _fmt(pt.q), pt.trials, pt.failures, _fmt(pt.rate), _fmt(pt.ci_lo),
                    _fmt(pt.ci_hi), _fmt(pt.mean_rounds), res.config.seed, res.descriptor,
                    __version__])
    return buf.getvalue()


def to_json(res: SweepResult) -> str:
    """CSV content plus the configuration echo; wall times are left out so
    reruns are byte-identical."""
    points = []
    for pt in res.points:
        d = asdict(pt)
        d.pop("wall_time")
        points.append(d)
    doc = {
        "version": __version__,
        "descriptor": res.descriptor,
        "code": res.code_name,
        "n": res.n,
        "k": res.k,
        "config": asdict(res.config),
        "points": points,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
