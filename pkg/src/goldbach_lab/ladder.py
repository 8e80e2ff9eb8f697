"""Ternary Goldbach verification at desk scale through a prime ladder.

A ladder is an increasing list of certified primes starting at 3 whose
consecutive gaps lie in [4, G]. Any odd n in range is then n = p + m with p
a rung and 4 <= m <= G + 2 even, and m splits into two primes by a lookup
in a sieve-backed table.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import arith
from .config import check_budget
from .errors import DomainError, VerificationFailure

BINARY_LIMIT = 10**10
LADDER_LIMIT = 10**10
DEFAULT_MAX_GAP = 10**6
MIN_GAP = 4
PROTH_WITNESSES = tuple(int(p) for p in arith.primes_upto(600)[1:])  # 3, 5, 7, ...
PROTH_POLICY = "a = 3, 5, 7, 11, ... (odd primes < 600), skipping a with Jacobi (a/N) = +1"
LARGE_BINARY_INSTANCE = (4 * 10**18 + 2, 2000000000000001301, 1999999999999998701)
CHUNK = 1 << 20
_FILE_MAGIC = b"GOLDBACH-LADDER 1\n"


# ---------------------------------------------------------------------------
# binary Goldbach


@lru_cache(maxsize=4)
def _small_prime_flags(n: int) -> np.ndarray:
    flags = np.zeros(n + 1, dtype=bool)
    flags[arith.primes_upto(n)] = True
    flags.flags.writeable = False
    return flags


@lru_cache(maxsize=4)
def binary_table(M: int) -> np.ndarray:
    """For every even 4 <= m <= M, the smallest prime p with m - p prime (0 elsewhere)."""
    check_budget(16 * (M + 1), "binary split table")
    prime = _small_prime_flags(M)
    out = np.zeros(M + 1, dtype=np.int64)
    todo = np.arange(4, M + 1, 2, dtype=np.int64)
    for p in arith.primes_upto(M):
        if todo.size == 0:
            break
        p = int(p)
        todo = todo[todo - p >= 2]  # anything with m - p < 2 can no longer split with p1 >= p
        hit = prime[todo - p]
        out[todo[hit]] = p
        todo = todo[~hit]
    missing = [m for m in range(4, M + 1, 2) if out[m] == 0]
    if missing:
        raise VerificationFailure(f"binary Goldbach fails at {missing[0]}", {"missing": missing[:10], "M": M})
    out.flags.writeable = False
    return out


def binary_check(n: int, limit: int = BINARY_LIMIT) -> tuple[int, int]:
    """Smallest prime p1 with n - p1 prime; both certified by deterministic Miller-Rabin."""
    if n % 2:
        raise DomainError("binary_check needs an even n")
    if n < 4 or n > limit:
        raise DomainError(f"binary_check range is 4 <= n <= {limit}")
    if n <= 1 << 20:
        p1 = int(binary_table(1 << 20)[n])
        return p1, n - p1
    for p in arith.primes_upto(min(n // 2, 1 << 20)):
        p = int(p)
        if arith.is_prime(n - p):
            return p, n - p
    p = (1 << 20) + 1
    while p <= n // 2:
        if arith.is_prime(p) and arith.is_prime(n - p):
            return p, n - p
        p += 2
    raise VerificationFailure(f"no binary split found for {n}", {"n": n, "scanned_to": p})


def certify_pair(n: int, p1: int, p2: int) -> bool:
    """Check a single given decomposition n = p1 + p2 with both primes certified."""
    return p1 + p2 == n and arith.is_prime(p1) and arith.is_prime(p2)


# ---------------------------------------------------------------------------
# Proth numbers


@dataclass(frozen=True)
class ProthResult:
    N: int
    k: int
    m: int
    status: str  # "prime", "composite" or "inconclusive"
    witness: int | None
    method: str
    policy: str = PROTH_POLICY

    @property
    def is_prime(self) -> bool:
        return self.status == "prime"


def proth_test(k: int, m: int) -> ProthResult:
    """Decide N = k 2^m + 1 (k odd, k < 2^m) by Proth's theorem.

    A witness a with a^((N-1)/2) = -1 mod N proves N prime. A base with
    Jacobi (a/N) = -1 whose power is not -1 proves N composite (Euler's
    criterion fails), as does a base sharing a factor with N.
    """
    if k < 1 or m < 1 or k % 2 == 0:
        raise DomainError("proth_test needs odd k >= 1 and m >= 1")
    if k >= 1 << m:
        raise DomainError("Proth's theorem needs k < 2^m")
    N = k * (1 << m) + 1
    root = math.isqrt(N)
    if root * root == N:
        # every Jacobi symbol is +1 for a square, so no base could ever decide it
        return ProthResult(N, k, m, "composite", root, "perfect square")
    half = (N - 1) // 2
    for a in PROTH_WITNESSES:
        if a == N:
            continue
        j = arith.jacobi(a, N)
        if j == 0:
            return ProthResult(N, k, m, "composite", a, "common factor")
        if j == 1:
            continue
        if pow(a, half, N) == N - 1:
            return ProthResult(N, k, m, "prime", a, "proth")
        return ProthResult(N, k, m, "composite", a, "euler criterion")
    return ProthResult(N, k, m, "inconclusive", None, "witnesses exhausted")


def proth_numbers(lo: int, hi: int) -> list[tuple[int, int, int]]:
    """All (N, k, m) with lo <= N = k 2^m + 1 <= hi, k odd, k < 2^m, sorted by N."""
    out = []
    m = 1
    while (1 << m) + 1 <= hi:
        step = 1 << m
        k_lo = max(1, -(-(lo - 1) // step))
        k_hi = min((hi - 1) // step, step - 1)
        if k_lo % 2 == 0:
            k_lo += 1
        for k in range(k_lo, k_hi + 1, 2):
            out.append((k * step + 1, k, m))
        m += 1
    out.sort()
    return out


def is_proth(N: int) -> bool:
    if N < 3 or N % 2 == 0:
        return False
    n1 = N - 1
    m = (n1 & -n1).bit_length() - 1
    return (n1 >> m) < (1 << m)


# ---------------------------------------------------------------------------
# ladder


@dataclass
class Ladder:
    primes: np.ndarray
    max_gap: int
    limit: int
    min_gap: int = MIN_GAP
    proth_rungs: int = 0

    def __len__(self) -> int:
        return int(self.primes.size)

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps([self.limit, self.max_gap, self.min_gap]).encode())
        h.update(np.ascontiguousarray(self.primes, dtype="<i8").tobytes())
        return h.hexdigest()

    def check(self, certify: bool = True) -> None:
        """Assert the ladder invariants; with ``certify`` every rung is re-proved prime."""
        p = self.primes
        state = {"limit": self.limit, "max_gap": self.max_gap, "size": len(self)}
        if p.size == 0 or int(p[0]) != 3:
            raise VerificationFailure("ladder must start at 3", state)
        if int(p[-1]) < self.limit:
            raise VerificationFailure("ladder stops short of its limit", dict(state, last=int(p[-1])))
        gaps = np.diff(p)
        bad = np.nonzero((gaps < self.min_gap) | (gaps > self.max_gap))[0]
        if bad.size:
            i = int(bad[0])
            raise VerificationFailure(f"gap {int(gaps[i])} after rung {int(p[i])}", dict(state, index=i))
        if certify:
            for q in p.tolist():
                if not arith.is_prime(q):
                    raise VerificationFailure(f"rung {q} is not prime", state)

    def save(self, path) -> None:
        header = {"limit": self.limit, "max_gap": self.max_gap, "min_gap": self.min_gap, "size": len(self),
                  "proth_rungs": self.proth_rungs, "sha256": self.digest}
        with open(path, "wb") as fh:
            fh.write(_FILE_MAGIC)
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(np.ascontiguousarray(self.primes, dtype="<i8").tobytes())

    @classmethod
    def load(cls, path, certify: bool = False) -> "Ladder":
        with open(path, "rb") as fh:
            if fh.readline() != _FILE_MAGIC:
                raise DomainError(f"{path} is not a ladder file")
            header = json.loads(fh.readline())
            primes = np.frombuffer(fh.read(), dtype="<i8").astype(np.int64)
        lad = cls(primes, header["max_gap"], header["limit"], header["min_gap"], header.get("proth_rungs", 0))
        if lad.digest != header["sha256"]:
            raise VerificationFailure("ladder file hash mismatch", {"path": str(path)})
        lad.check(certify=certify)
        return lad


def _best_proth_prime(lo: int, hi: int) -> int | None:
    for N, k, m in reversed(proth_numbers(lo, hi)):
        if proth_test(k, m).is_prime:
            return N
    return None


def _best_general_prime(lo: int, hi: int) -> int | None:
    n = hi if hi % 2 else hi - 1
    while n >= lo:
        if arith.is_prime(n):
            return n
        n -= 2
    return None


def build_ladder(limit: int, max_gap: int = DEFAULT_MAX_GAP) -> Ladder:
    """Rungs from 3 past ``limit``; each next rung is the largest certified Proth
    prime in (p + 3, p + max_gap], else the largest prime there."""
    if limit < 7:
        raise DomainError("limit must be >= 7")
    if max_gap < 8:
        # with gaps forced into [4, max_gap] a window this narrow can be prime-free
        raise DomainError("max_gap must be >= 8")
    if limit > LADDER_LIMIT:
        raise DomainError(f"desk ladder limit is {LADDER_LIMIT}")
    check_budget(8 * (limit // max(max_gap // 4, 1) + 16), "ladder")
    rungs = [3]
    proth = 0
    while rungs[-1] < limit:
        p = rungs[-1]
        lo, hi = p + MIN_GAP, p + max_gap
        nxt = _best_proth_prime(lo, hi)
        if nxt is not None:
            proth += 1
        else:
            nxt = _best_general_prime(lo, hi)
        if nxt is None:
            raise VerificationFailure(f"no prime in ({p + 3}, {hi}]", {"rung": p, "max_gap": max_gap})
        rungs.append(nxt)
    lad = Ladder(np.array(rungs, dtype=np.int64), int(max_gap), int(limit), MIN_GAP, proth)
    lad.check(certify=False)
    return lad


# ---------------------------------------------------------------------------
# ternary witnesses


@dataclass(frozen=True)
class TernaryWitness:
    n: int
    p: int
    p1: int
    p2: int

    def validate(self) -> bool:
        return (self.p + self.p1 + self.p2 == self.n
                and arith.is_prime(self.p) and arith.is_prime(self.p1) and arith.is_prime(self.p2))


def _rung_below(n: int, ladder: Ladder) -> int:
    i = int(np.searchsorted(ladder.primes, n, side="left")) - 1
    if i < 0:
        raise DomainError(f"{n} is below the ladder")
    if n - int(ladder.primes[i]) == 2:
        i -= 1
    if i < 0:
        raise DomainError(f"{n} cannot be reduced on this ladder")
    return int(ladder.primes[i])


def ternary_verify(n: int, ladder: Ladder) -> TernaryWitness:
    """n = p + p1 + p2 with p the largest rung below n (one rung lower if n - p = 2)."""
    if n % 2 == 0 or n < 7:
        raise DomainError("ternary_verify needs odd n >= 7")
    if n > ladder.limit:
        raise DomainError(f"{n} exceeds the ladder limit {ladder.limit}")
    p = _rung_below(n, ladder)
    p1, p2 = binary_check(n - p)
    w = TernaryWitness(n, p, p1, p2)
    if not (4 <= n - p <= ladder.max_gap + 2):
        raise VerificationFailure("reduction left the binary range", asdict(w))
    return w


@dataclass
class ChunkResult:
    lo: int
    hi: int
    count: int
    max_reduction: int
    sum_p: int
    sum_p1: int


def _verify_chunk(lo: int, hi: int, primes: np.ndarray, max_gap: int) -> ChunkResult:
    table = binary_table(max_gap + 2)
    flags = _small_prime_flags(max_gap + 2)
    n = np.arange(lo, hi + 1, 2, dtype=np.int64)
    idx = np.searchsorted(primes, n, side="left") - 1
    step = (n - primes[idx]) == 2
    idx = idx - step
    if idx.size and idx.min() < 0:
        raise VerificationFailure("n below the ladder", {"lo": lo})
    p = primes[idx]
    d = n - p
    bad = (d < 4) | (d > max_gap + 2)
    if bad.any():
        i = int(np.argmax(bad))
        raise VerificationFailure(f"no admissible rung for {int(n[i])}", {"n": int(n[i]), "p": int(p[i])})
    p1 = table[d]
    p2 = d - p1
    ok = (p + p1 + p2 == n) & flags[p1] & flags[p2] & (p1 > 0)
    if not ok.all():
        i = int(np.argmin(ok))
        raise VerificationFailure(f"witness check failed at {int(n[i])}",
                                  {"n": int(n[i]), "p": int(p[i]), "p1": int(p1[i]), "p2": int(p2[i])})
    return ChunkResult(lo, hi, int(n.size), int(d.max()) if d.size else 0, int(p.sum(dtype=object)),
                       int(p1.sum(dtype=object)))


def _chunk_job(args):
    lo, hi, primes, max_gap = args
    return _verify_chunk(lo, hi, primes, max_gap)


@dataclass
class RangeSummary:
    lo: int
    hi: int
    verified: int
    max_reduction: int
    sum_p: int
    sum_p1: int
    ladder_sha256: str
    spot_checks: int = 0
    seconds: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("seconds")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @property
    def throughput(self) -> float:
        return self.verified / self.seconds if self.seconds else math.nan


def _chunks(lo: int, hi: int, size: int):
    a = lo
    while a <= hi:
        b = min(hi, a + 2 * (size - 1))
        yield a, b
        a = b + 2


def verify_range(lo: int, hi: int, ladder: Ladder, checkpoint=None, chunk: int = CHUNK, workers: int = 1,
                 spot_check: int = 100, seed: int = 0, stop_after: int | None = None) -> RangeSummary:
    """Witness every odd n in [lo, hi]; resumable through a JSON checkpoint.

    ``stop_after`` ends the run after that many chunks (leaving the
    checkpoint behind), which is how interrupted runs are simulated.
    """
    if lo % 2 == 0 or hi % 2 == 0 or lo < 7 or hi < lo:
        raise DomainError("verify_range needs odd 7 <= lo <= hi")
    if hi > ladder.limit:
        raise DomainError(f"{hi} exceeds the ladder limit {ladder.limit}")
    if ladder.max_gap + 2 > 1 << 27:
        raise DomainError("ladder gaps too wide for the binary table")
    start = time.perf_counter()
    state = {"lo": lo, "hi": hi, "next": lo, "verified": 0, "max_reduction": 0, "sum_p": 0, "sum_p1": 0,
             "ladder_sha256": ladder.digest}
    ck = Path(checkpoint) if checkpoint else None
    if ck and ck.exists():
        saved = json.loads(ck.read_text())
        if (saved["lo"], saved["hi"], saved["ladder_sha256"]) == (lo, hi, ladder.digest):
            state = saved
    pieces = list(_chunks(state["next"], hi, chunk))
    if stop_after is not None:
        pieces = pieces[:stop_after]
    jobs = [(a, b, ladder.primes, ladder.max_gap) for a, b in pieces]

    def absorb(res: ChunkResult):
        state["verified"] += res.count
        state["max_reduction"] = max(state["max_reduction"], res.max_reduction)
        state["sum_p"] += res.sum_p
        state["sum_p1"] += res.sum_p1
        state["next"] = res.hi + 2
        if ck:
            tmp = ck.with_suffix(ck.suffix + ".tmp")
            tmp.write_text(json.dumps(state, sort_keys=True))
            os.replace(tmp, ck)

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            for res in pool.map(_chunk_job, jobs):
                absorb(res)
    else:
        for job in jobs:
            absorb(_chunk_job(job))
    checks = 0
    if state["next"] > hi:
        rng = np.random.default_rng(seed)
        for n in rng.integers(0, (hi - lo) // 2 + 1, size=min(spot_check, (hi - lo) // 2 + 1)):
            w = ternary_verify(lo + 2 * int(n), ladder)
            if not w.validate():
                raise VerificationFailure(f"spot check failed at {w.n}", asdict(w))
            checks += 1
    return RangeSummary(lo, hi, state["verified"], state["max_reduction"], state["sum_p"], state["sum_p1"],
                        ladder.digest, checks, time.perf_counter() - start)


def write_witnesses_csv(lo: int, hi: int, ladder: Ladder, path) -> int:
    """Stream (n, p, p1, p2) for every odd n in [lo, hi]."""
    count = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "p", "p1", "p2"])
        for n in range(lo, hi + 1, 2):
            t = ternary_verify(n, ladder)
            w.writerow([t.n, t.p, t.p1, t.p2])
            count += 1
    return count
