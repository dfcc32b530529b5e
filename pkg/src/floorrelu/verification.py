"""Measurement harnesses and independent oracles for built networks."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .bitextract import (
    build_bit_locator,
    build_block_extractor,
    build_point_fitter,
    oracle_extract,
)
from .certified import sqrt_upper
from .constructor import Certificate, TargetFunction
from .dyadic import BitString, Dyadic, round_down_dyadic, round_nearest_dyadic, round_up_dyadic
from .network import Network, audit, eval_exact, trace_exact, trace_float

__all__ = [
    "ErrorReport",
    "BitCheckSummary",
    "MemorizationReport",
    "Divergence",
    "DivergenceReport",
    "grid_points",
    "random_points",
    "cell_points",
    "measure_sup_error",
    "check_certificate",
    "merge_reports",
    "exhaustive_bit_check",
    "memorization_demo",
    "float_divergence_probe",
]

POINT_BITS = 64
DEFAULT_REPORT_BITS = 64


@dataclass(frozen=True)
class ErrorReport:
    sample_count: int
    max_abs_error: Dyadic
    argmax: tuple[Dyadic, ...]
    bound: Optional[Dyadic] = None
    seed: Optional[int] = None
    residual: Optional[Dyadic] = None
    rows: tuple = field(default=(), compare=False)

    @property
    def passed(self) -> Optional[bool]:
        return None if self.bound is None else self.max_abs_error <= self.bound

    def with_bound(self, bound: Dyadic) -> "ErrorReport":
        return ErrorReport(self.sample_count, self.max_abs_error, self.argmax, bound, self.seed,
                           self.residual, self.rows)


# -- sample sets -------------------------------------------------------


def grid_points(d: int, m: int) -> list[tuple[Dyadic, ...]]:
    """``m`` points per axis at ``j / (m - 1)``, rounded to 64-bit dyadics."""
    if m < 1:
        raise ValueError("grid size must be positive")
    axis = [Dyadic(0)] if m == 1 else [round_nearest_dyadic(Fraction(j, m - 1), POINT_BITS) for j in range(m)]
    return list(itertools.product(axis, repeat=d))


def random_points(d: int, count: int, seed: int) -> list[tuple[Dyadic, ...]]:
    rng = random.Random(seed)
    return [tuple(Dyadic(rng.getrandbits(POINT_BITS), -POINT_BITS) for _ in range(d)) for _ in range(count)]


def cell_points(K: int, d: int, max_points: int = 50_000) -> list[tuple[Dyadic, ...]]:
    """Corners, centers and far corners of the ``K^d`` cells.

    Per axis and cell ``[k/K, (k+1)/K)``: the smallest dyadic at or above
    ``k/K``, the center, and the largest dyadic below ``(k+1)/K`` (1 for the
    last cell).  Their product is used when it has at most ``max_points``
    entries, otherwise only corners and centers per cell.
    """
    lows, mids, highs = [], [], []
    step = Fraction(1, 1 << POINT_BITS)
    for k in range(K):
        lows.append(round_up_dyadic(Fraction(k, K), POINT_BITS))
        mids.append(round_nearest_dyadic(Fraction(2 * k + 1, 2 * K), POINT_BITS))
        top = Fraction(k + 1, K)
        highs.append(Dyadic(1) if k == K - 1 else round_down_dyadic(top - step, POINT_BITS))
    axis = sorted(set(lows + mids + highs))
    if len(axis) ** d <= max_points:
        return list(itertools.product(axis, repeat=d))
    pts = []
    for beta in itertools.product(range(K), repeat=d):
        pts.append(tuple(lows[b] for b in beta))
        pts.append(tuple(mids[b] for b in beta))
    return pts


# -- sup-error measurement ---------------------------------------------


def _point_error(net: Network, f: TargetFunction, x: Sequence[Dyadic], prec: int,
                 pre_map=None) -> tuple[Fraction, Dyadic, Fraction]:
    phi = eval_exact(net, x)[0]
    y = tuple(v.to_fraction() for v in x)
    if pre_map is not None:
        y = pre_map(y)
    lo, hi = f.enclose(y, prec)
    p = phi.to_fraction()
    return max(abs(p - lo), abs(p - hi)), phi, (lo + hi) / 2


def measure_sup_error(net: Network, f: TargetFunction, *, grid: Optional[int] = None,
                      samples: int = 0, seed: int = 0,
                      points: Iterable[Sequence[Dyadic]] = (),
                      bound: Optional[Dyadic] = None,
                      report_bits: int = DEFAULT_REPORT_BITS,
                      keep_rows: bool = False, target_map=None) -> ErrorReport:
    """Certified upper bound on ``max |net(x) - f(x)|`` over the sample set.

    The set is the union of ``points``, an ``m``-per-axis grid and
    ``samples`` seeded random points.  ``f`` is queried to ``2 * report_bits``
    bits and the maximum is rounded up to ``report_bits`` bits.
    ``target_map`` converts a network input into the point where ``f`` is
    queried (used for domain-wrapped networks).
    """
    pts = list(points)
    if grid is not None:
        pts += grid_points(net.input_dim, grid)
    if samples:
        pts += random_points(net.input_dim, samples, seed)
    if not pts:
        raise ValueError("empty sample set")
    best, arg, rows = Fraction(-1), pts[0], []
    for x in pts:
        err, phi, fx = _point_error(net, f, x, 2 * report_bits, target_map)
        if err > best:
            best, arg = err, tuple(x)
        if keep_rows:
            rows.append((tuple(x), fx, phi, err))
    return ErrorReport(len(pts), round_up_dyadic(best, report_bits), arg, bound,
                       seed if samples else None, None, tuple(rows))


def merge_reports(*reports: ErrorReport) -> ErrorReport:
    """Report for the union of the sample sets (bounds must agree)."""
    if not reports:
        raise ValueError("nothing to merge")
    top = max(reports, key=lambda r: r.max_abs_error)
    bounds = {r.bound for r in reports}
    if len(bounds) > 1:
        raise ValueError("reports carry different bounds")
    rows = tuple(itertools.chain.from_iterable(r.rows for r in reports))
    return ErrorReport(sum(r.sample_count for r in reports), top.max_abs_error, top.argmax,
                       reports[0].bound, reports[0].seed, reports[0].residual, rows)


def within_cell_residual(cert: Certificate, report_bits: int = DEFAULT_REPORT_BITS) -> Dyadic:
    """Upper bound of ``omega(sqrt(d) / K)``: how far f may move inside a cell."""
    if cert.modulus is None:
        raise ValueError("certificate carries no modulus")
    prec = report_bits + 16
    radius = sqrt_upper(cert.d, prec) / cert.K
    if cert.domain_M is not None:
        # the modulus is stated on [-M, M]^d, where cells are 2M times larger
        radius *= 2 * cert.domain_M.to_fraction()
    return round_up_dyadic(cert.modulus.upper(radius, prec), report_bits)


def check_certificate(net: Network, f: TargetFunction, cert: Certificate, *,
                      samples: int = 1000, seed: int = 0, grid: Optional[int] = None,
                      report_bits: int = DEFAULT_REPORT_BITS,
                      keep_rows: bool = False) -> ErrorReport:
    """Measure on cell corners, centers and seeded random points; compare with the bound."""
    rep = audit(net)
    if (rep.width, rep.depth) != (cert.width, cert.depth):
        raise ValueError(f"network is {rep.width}x{rep.depth} but certificate says "
                         f"{cert.width}x{cert.depth}")
    pts = cell_points(cert.K, cert.d)
    if cert.domain_M is not None:
        # network inputs live on [-M, M]^d
        M = cert.domain_M
        pts = [tuple(M.shift(1) * v - M for v in x) for x in pts]
        rnd = [tuple(M.shift(1) * v - M for v in x) for x in random_points(cert.d, samples, seed)]
        report = measure_sup_error(net, f, points=pts + rnd, grid=None, bound=cert.error_bound,
                                   report_bits=report_bits, keep_rows=keep_rows)
        report = ErrorReport(report.sample_count, report.max_abs_error, report.argmax,
                             report.bound, seed, None, report.rows)
    else:
        report = measure_sup_error(net, f, points=pts, grid=grid, samples=samples, seed=seed,
                                   bound=cert.error_bound, report_bits=report_bits,
                                   keep_rows=keep_rows)
    residual = within_cell_residual(cert, report_bits) if cert.modulus is not None else None
    return ErrorReport(report.sample_count, report.max_abs_error, report.argmax, report.bound,
                       report.seed, residual, report.rows)


# -- bit-extraction checks ---------------------------------------------


@dataclass(frozen=True)
class BitCheckSummary:
    level: str
    N: int
    param: int
    exhaustive: bool
    patterns: int
    evaluations: int
    failures: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.failures


def _patterns(length: int, cap: int, random_count: int, seed: int) -> tuple[bool, Iterable[BitString]]:
    if (1 << length) <= cap:
        return True, (BitString.from_int(v, length) for v in range(1 << length))
    rng = random.Random(seed)
    return False, (BitString.from_int(rng.getrandbits(length), length) for _ in range(random_count))


def exhaustive_bit_check(level: str, N: int, param: int, cap: int = 1 << 16,
                         random_count: int = 1000, seed: int = 0,
                         max_failures: int = 10) -> BitCheckSummary:
    """Compare a gadget against plain bit slicing on every (or random) pattern.

    ``level`` is ``block`` (``param`` = J), ``locator`` or ``fitter``
    (``param`` = L).  The reference side only slices bit strings.
    """
    if level == "block":
        length = N * param
        net = build_block_extractor(N, param)
    elif level in ("locator", "fitter"):
        length = N ** param
        net = build_bit_locator(N, param) if level == "locator" else None
    else:
        raise ValueError(f"unknown level {level!r}")
    exhaustive, pats = _patterns(length, cap, random_count, seed)
    failures, count, evals = [], 0, 0
    for bits in pats:
        count += 1
        if level == "block":
            cases = [((bits.value(), Dyadic(n)), oracle_extract(bits, (n - 1) * param + 1, n * param).value())
                     for n in range(1, N + 1)]
            runner = net
        elif level == "locator":
            cases = [((bits.value(), Dyadic(m)), oracle_extract(bits, m, m).value())
                     for m in range(1, length + 1)]
            runner = net
        else:
            runner = build_point_fitter(N, param, bits)
            cases = [((Dyadic(m),), Dyadic(oracle_extract(bits, m, m).bits[0]))
                     for m in range(1, length + 1)]
        for x, want in cases:
            evals += 1
            got = eval_exact(runner, x)[0]
            if got != want and len(failures) < max_failures:
                failures.append((str(bits), [str(v) for v in x], str(got), str(want)))
    return BitCheckSummary(level, N, param, exhaustive, count, evals, tuple(failures))


@dataclass(frozen=True)
class MemorizationReport:
    N: int
    L: int
    seed: int
    points: int
    width: int
    depth: int
    constant_frac_bits: int
    all_exact: bool


def memorization_demo(N: int, L: int, seed: int = 0) -> MemorizationReport:
    """Memorize ``N^L`` random bits with one point fitter and check every one."""
    rng = random.Random(seed)
    count = N ** L
    bits = BitString.from_int(rng.getrandbits(count), count)
    net = build_point_fitter(N, L, bits)
    ok = all(eval_exact(net, (Dyadic(m),))[0] == bits.bits[m - 1] for m in range(1, count + 1))
    rep = audit(net)
    return MemorizationReport(N, L, seed, count, rep.width, rep.depth, bits.value().frac_bits, ok)


# -- float vs exact ----------------------------------------------------


@dataclass(frozen=True)
class Divergence:
    point: tuple[Dyadic, ...]
    exact: tuple[Dyadic, ...]
    approx: tuple[float, ...]
    first_layer: int


@dataclass(frozen=True)
class DivergenceReport:
    checked: int
    tol: Fraction
    divergences: tuple[Divergence, ...]

    @property
    def diverged(self) -> bool:
        return bool(self.divergences)


def _far(a: Sequence[Dyadic], b: Sequence[float], tol: Fraction) -> bool:
    for u, v in zip(a, b):
        if v != v or v in (float("inf"), float("-inf")):
            return True
        if abs(u.to_fraction() - Fraction(v)) > tol:
            return True
    return False


def float_divergence_probe(net: Network, points: Iterable[Sequence], tol=Fraction(1, 1 << 40)) -> DivergenceReport:
    """Points where the float backend differs from the exact one by more than ``tol``.

    ``first_layer`` is the 1-based index of the first hidden layer whose
    activations differ (``depth + 1`` means only the output map does).
    """
    tol = Fraction(tol)
    found, n = [], 0
    for x in points:
        n += 1
        xd = tuple(v if isinstance(v, Dyadic) else Dyadic.from_fraction(Fraction(v)) for v in x)
        ex = trace_exact(net, xd)
        fl = trace_float(net, [float(v) for v in xd])
        if not _far(ex[-1], fl[-1], tol):
            continue
        first = next(i for i, (a, b) in enumerate(zip(ex, fl), 1) if _far(a, b, tol))
        found.append(Divergence(xd, tuple(ex[-1]), tuple(fl[-1]), first))
    return DivergenceReport(n, tol, tuple(found))
