"""Distortion profiles over group balls, compression-exponent fits and
certificate checks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import CAPS, TOL
from .embeddings import DistortionCertificate, Embedding, VectorEmbedding
from .errors import BallTooLarge, PreconditionError


@dataclass
class Record:
    d: int
    min: float
    max: float
    count: int
    min_pair: tuple = ()
    max_pair: tuple = ()


@dataclass
class DistortionProfile:
    records: list
    radius: int
    mode: str
    seed: int | None = None
    pairs: int = 0

    def by_distance(self) -> dict:
        return {r.d: r for r in self.records}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "min", "max", "count"])
        for r in self.records:
            w.writerow([r.d, repr(float(r.min)), repr(float(r.max)), r.count])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "mode": self.mode,
            "seed": self.seed,
            "pairs": self.pairs,
            "records": [
                {"d": r.d, "min": float(r.min), "max": float(r.max), "count": r.count,
                 "min_pair": list(r.min_pair), "max_pair": list(r.max_pair)}
                for r in self.records
            ],
        }


def _dense(f: VectorEmbedding, ball: Sequence) -> np.ndarray | None:
    vecs = [f.vector(x) for x in ball]
    keys: dict = {}
    for v in vecs:
        for k, _ in v.items():
            keys.setdefault(k, len(keys))
    if len(keys) * len(ball) > 50_000_000:
        return None
    M = np.zeros((len(ball), max(len(keys), 1)))
    for i, v in enumerate(vecs):
        for k, val in v.items():
            M[i, keys[k]] = float(val)
    return M


def distortion_profile(
    f: Embedding,
    ball: Sequence,
    radius: int | None = None,
    mode: str = "exhaustive",
    sample_size: int = 200_000,
    seed: int = 0,
) -> DistortionProfile:
    """Per-distance min/max of ||f(x) - f(y)|| over unordered pairs of the ball."""
    G = f.group
    ball = list(ball)
    n = len(ball)
    fmt = G.format
    acc: dict = {0: [0.0, 0.0, n, (fmt(ball[0]),) * 2 if n else (), (fmt(ball[0]),) * 2 if n else ()]}

    def add(d, val, i, j):
        rec = acc.get(d)
        if rec is None:
            acc[d] = [val, val, 1, (i, j), (i, j)]
            return
        if val < rec[0]:
            rec[0], rec[3] = val, (i, j)
        if val > rec[1]:
            rec[1], rec[4] = val, (i, j)
        rec[2] += 1

    if mode == "exhaustive":
        total = n * (n - 1) // 2
        if total > CAPS.exhaustive_pairs:
            raise BallTooLarge(f"{total} pairs exceed the exhaustive cap; use sample mode")
        M = _dense(f, ball) if isinstance(f, VectorEmbedding) else None
        if M is not None:
            sq = (M * M).sum(axis=1)
        invs = [G.inv(x) for x in ball]
        for i in range(n):
            ds = np.fromiter((G.length(G.mul(invs[i], ball[j])) for j in range(i + 1, n)), dtype=np.int64, count=n - i - 1)
            if M is not None:
                e2 = sq[i] + sq[i + 1 :] - 2.0 * (M[i + 1 :] @ M[i])
                emb = np.sqrt(np.clip(e2, 0.0, None))
            else:
                emb = np.array([f.distance(ball[i], ball[j]) for j in range(i + 1, n)])
            if len(ds) == 0:
                continue
            order = np.argsort(ds, kind="stable")
            ds_s, emb_s = ds[order], emb[order]
            cuts = np.flatnonzero(np.diff(ds_s)) + 1
            starts = np.concatenate(([0], cuts))
            ends = np.concatenate((cuts, [len(ds_s)]))
            for a, b in zip(starts, ends):
                seg = emb_s[a:b]
                lo, hi = int(np.argmin(seg)), int(np.argmax(seg))
                d = int(ds_s[a])
                jlo, jhi = i + 1 + int(order[a + lo]), i + 1 + int(order[a + hi])
                rec = acc.get(d)
                if rec is None:
                    acc[d] = [float(seg[lo]), float(seg[hi]), int(b - a), (i, jlo), (i, jhi)]
                else:
                    if seg[lo] < rec[0]:
                        rec[0], rec[3] = float(seg[lo]), (i, jlo)
                    if seg[hi] > rec[1]:
                        rec[1], rec[4] = float(seg[hi]), (i, jhi)
                    rec[2] += int(b - a)
        pairs = total
    elif mode == "sample":
        if n < 2:
            raise PreconditionError("sampling needs at least two points")
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, n, size=sample_size)
        jj = rng.integers(0, n - 1, size=sample_size)
        jj = jj + (jj >= ii)
        for i, j in zip(ii.tolist(), jj.tolist()):
            if i > j:
                i, j = j, i
            add(G.distance(ball[i], ball[j]), f.distance(ball[i], ball[j]), i, j)
        pairs = sample_size
    else:
        raise PreconditionError(f"unknown mode {mode!r}")

    records = []
    for d in sorted(acc):
        lo, hi, cnt, plo, phi = acc[d]
        wl = tuple(fmt(ball[k]) for k in plo) if d else ()
        wh = tuple(fmt(ball[k]) for k in phi) if d else ()
        records.append(Record(d, lo, hi, cnt, wl, wh))
    return DistortionProfile(records, radius if radius is not None else max(G.length(x) for x in ball), mode,
                             seed if mode == "sample" else None, pairs)


@dataclass
class FitResult:
    curve: list
    regression: float | None
    headline: float
    degenerate: bool


def fit_compression(profile: DistortionProfile, C_grid: Sequence[float] = (1.0,)) -> FitResult:
    """eps_hat(C) = min over d >= 2 of ln(C min_d) / ln d; headline is the grid max clamped to [0, 1]."""
    recs = [r for r in profile.records if r.d >= 2]
    if not recs:
        raise PreconditionError("profile too small: no records with d >= 2")
    degenerate = any(r.min <= 0 for r in recs)
    curve = []
    for C in sorted(C_grid):
        vals = [math.log(C * r.min) / math.log(r.d) if r.min > 0 else -math.inf for r in recs]
        curve.append((C, min(vals)))
    pos = [(math.log(r.d), math.log(r.min)) for r in recs if r.min > 0]
    reg = float(np.polyfit(*zip(*pos), 1)[0]) if len(pos) >= 2 else None
    best = max(v for _, v in curve)
    headline = 0.0 if degenerate else min(1.0, max(0.0, best))
    return FitResult(curve, reg, headline, degenerate)


@dataclass
class CertificateResult:
    passed: bool
    worst_side: str | None = None
    worst_d: int | None = None
    worst_value: float | None = None
    worst_bound: float | None = None
    witness: tuple = ()


def verify_certificate(profile: DistortionProfile, cert: DistortionCertificate, tol: float = TOL.certificate) -> CertificateResult:
    """Both sandwich sides on every record within the certificate radius."""
    worst = None
    for r in profile.records:
        if r.d == 0 or r.d > cert.radius:
            continue
        lo_gap = r.min - cert.lower(r.d)
        hi_gap = cert.upper(r.d) - r.max
        for side, gap, val, bound, wit in (
            ("lower", lo_gap, r.min, cert.lower(r.d), r.min_pair),
            ("upper", hi_gap, r.max, cert.upper(r.d), r.max_pair),
        ):
            if gap < -tol and (worst is None or gap < worst[0]):
                worst = (gap, side, r.d, val, bound, wit)
    if worst is None:
        return CertificateResult(True)
    _, side, d, val, bound, wit = worst
    return CertificateResult(False, side, d, val, bound, tuple(wit))
