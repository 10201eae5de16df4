"""Kozyrev wavelets on admissible discs and their exact inner products.

A wavelet is a normalised character bump on a disc B: constant in absolute
value on B, constant on each child sub-disc, mean zero against any density
that is constant on B.  Two normalisations are available: ``haar`` divides
by the square root of the Haar mass of B, ``omega`` by the square root of
the |omega|-mass, which makes the admissible family orthonormal.

Inner products and means are computed in exact cyclotomic arithmetic
(:class:`~mumford_heat.exactnum.PhaseSum`), so orthogonality statements are
decided, not approximated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .exactnum import ExactComplex, PhaseSum
from .padic import Disc, Rational, character_phase, discs_disjoint, haar_measure
from .measure import MeasureProfile, UnalignedDisc
from .schottky import FundamentalDomain, SchottkyGroup, reduce_to_domain


class NotAdmissible(ValueError):
    """The wavelet support meets a zero core or straddles density pieces."""


@dataclass(frozen=True)
class Wavelet:
    """psi_{B,j}: support disc B and residue index j in {1, ..., p-1}.

    The radius exponent of B is the scale parameter d (radius p^d), and the
    value on B is norm_factor * chi(p^(d-1) * j * x).
    """

    support: Disc
    j: int
    p: int

    def __post_init__(self):
        if not 1 <= self.j <= self.p - 1:
            raise ValueError(f"j must lie in 1..{self.p - 1}")
        if self.support.complement:
            raise ValueError("wavelet support must be a plain disc")

    @property
    def scale(self) -> int:
        return self.support.radius_exp

    def phase_at(self, x: Rational) -> Fraction:
        d = self.scale
        return character_phase(Fraction(self.p) ** (d - 1) * self.j * Fraction(x),
                               self.p)

    def norm_magnitude(self, profile: MeasureProfile | None = None,
                       normalization: str = "haar") -> ExactComplex:
        """The constant magnitude on the support, as an exact value."""
        d = self.scale
        if normalization == "haar":
            return ExactComplex(Fraction(1), Fraction(1), self.p, Fraction(0),
                                Fraction(-d, 2))
        if normalization == "omega":
            if profile is None:
                raise ValueError("omega normalisation needs a profile")
            dens = profile.density_on(self.support)
            return ExactComplex(Fraction(1), 1 / dens, self.p, Fraction(0),
                                Fraction(-d, 2))
        raise ValueError(f"unknown normalization {normalization!r}")


def wavelet_eval(w: Wavelet, x: Rational, profile: MeasureProfile | None = None,
                 normalization: str = "haar") -> ExactComplex:
    """Exact wavelet value at a point: zero off-support, magnitude*phase on it."""
    if not w.support.contains_point(x, w.p):
        return ExactComplex.zero(w.p)
    mag = w.norm_magnitude(profile, normalization)
    return ExactComplex(mag.coeff, mag.radicand, w.p, w.phase_at(x), mag.p_exp)


@dataclass(frozen=True)
class InvariantWavelet:
    """Extension of a wavelet constant along group orbits."""

    base: Wavelet
    group: SchottkyGroup


def invariant_eval(w: InvariantWavelet, z: Rational,
                   profile: MeasureProfile | None = None,
                   normalization: str = "haar") -> ExactComplex:
    """Value at any regular point: evaluate the base wavelet at the
    fundamental-domain representative."""
    x, _ = reduce_to_domain(w.group, z)
    return wavelet_eval(w.base, x, profile, normalization)


def _support_check(w: Wavelet, profile: MeasureProfile) -> None:
    if not profile.admissible(w.support):
        raise NotAdmissible(f"support {w.support} is not admissible")


def wavelet_mean(w: Wavelet, profile: MeasureProfile,
                 normalization: str = "haar") -> ExactComplex:
    """Integral of the wavelet against the profile; exactly zero when admissible."""
    _support_check(w, profile)
    dens = profile.density_on(w.support)
    phases = PhaseSum(w.p)
    for child in w.support.children(w.p):
        phases.add(w.phase_at(child.center), dens * haar_measure(child, w.p))
    return _collapse(phases, w.norm_magnitude(profile, normalization))


def inner_product(w1: Wavelet, w2: Wavelet, profile: MeasureProfile,
                  normalization: str = "omega") -> ExactComplex:
    """<psi_1, psi_2> against |omega|, in exact cyclotomic arithmetic.

    The integrand is constant on the children of the smaller support, so the
    integral is a finite character sum; after cyclotomic reduction it always
    collapses to zero or to a single exact term.
    """
    if w1.p != w2.p:
        raise ValueError("mismatched primes")
    p = w1.p
    _support_check(w1, profile)
    _support_check(w2, profile)
    if discs_disjoint(w1.support, w2.support, p):
        return ExactComplex.zero(p)
    small = w1 if w1.scale <= w2.scale else w2
    dens = profile.density_on(small.support)
    phases = PhaseSum(p)
    for child in small.support.children(p):
        c = child.center
        phases.add(w1.phase_at(c) - w2.phase_at(c),
                   dens * haar_measure(child, p))
    mag = (w1.norm_magnitude(profile, normalization)
           * w2.norm_magnitude(profile, normalization))
    return _collapse(phases, mag)


def _collapse(phases: PhaseSum, magnitude: ExactComplex) -> ExactComplex:
    if phases.is_zero():
        return ExactComplex.zero(magnitude.p)
    mono = phases.monomial()
    if mono is None:
        value = phases.to_fraction()  # raises if genuinely non-monomial
        return ExactComplex.from_rational(magnitude.p, value) * magnitude
    coeff, phase = mono
    return ExactComplex.from_rational(magnitude.p, coeff) * magnitude \
        * ExactComplex(Fraction(1), Fraction(1), magnitude.p, phase)


# ---------------------------------------------------------------------------
# Level functions and the analysis/synthesis pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelFunction:
    """Locally constant function at a fixed level: one value per state disc."""

    level: int
    values: tuple[tuple[Disc, complex], ...]

    @classmethod
    def from_mapping(cls, level: int, mapping: Mapping[Disc, complex]) -> "LevelFunction":
        ordered = tuple(sorted(mapping.items(), key=lambda it: it[0].center))
        return cls(level, ordered)

    @classmethod
    def from_wavelet(cls, w: Wavelet, level: int, states: Iterable[Disc],
                     profile: MeasureProfile | None = None,
                     normalization: str = "haar") -> "LevelFunction":
        vals = {}
        for disc in states:
            vals[disc] = complex(wavelet_eval(w, disc.center, profile, normalization))
        return cls.from_mapping(level, vals)

    @classmethod
    def constant(cls, level: int, states: Iterable[Disc], value: complex = 1.0) -> "LevelFunction":
        return cls.from_mapping(level, {d: value for d in states})

    def as_dict(self) -> dict[Disc, complex]:
        return dict(self.values)

    def value_at(self, x: Rational, p: int) -> complex:
        for disc, val in self.values:
            if disc.contains_point(x, p):
                return val
        raise UnalignedDisc(f"{x} is not in any state disc")

    def sup_norm(self) -> float:
        return max((abs(v) for _, v in self.values), default=0.0)


def state_discs(domain: FundamentalDomain, profile: MeasureProfile,
                level: int) -> list[Disc]:
    """Level-``level`` discs of F clear of every zero core, ordered by center."""
    return [d for d in domain.level_discs(level)
            if all(discs_disjoint(d, core, profile.p)
                   for core in profile.zero_cores)]


def admissible_supports(profile: MeasureProfile, max_level: int) -> list[Disc]:
    """All admissible wavelet supports whose children live at level <= max_level."""
    out = []
    min_exp = 1 - max_level
    for piece, _ in profile.pieces:
        stack = [piece]
        while stack:
            d = stack.pop()
            if d.radius_exp < min_exp:
                continue
            out.append(d)
            stack.extend(d.children(profile.p))
    out.sort(key=lambda d: (-d.radius_exp, d.center))
    return out


def admissible_wavelets(profile: MeasureProfile, max_level: int) -> list[Wavelet]:
    return [Wavelet(d, j, profile.p)
            for d in admissible_supports(profile, max_level)
            for j in range(1, profile.p)]


@dataclass(frozen=True)
class Analysis:
    """u = constant + sum of wavelet coefficients + residual, at one level."""

    constant: complex
    coefficients: tuple[tuple[Wavelet, complex], ...]
    residual: LevelFunction

    def coefficient_map(self) -> dict[Wavelet, complex]:
        return dict(self.coefficients)


def analyze(u: LevelFunction, profile: MeasureProfile,
            wavelets: list[Wavelet] | None = None) -> Analysis:
    """Expand a level function over constants and omega-normalised wavelets.

    The residual is stored explicitly (it spans the completeness gap of the
    wavelet family on a holed domain), so synthesis reconstructs u exactly.
    """
    p = profile.p
    if wavelets is None:
        wavelets = admissible_wavelets(profile, u.level)
    masses = {d: profile.density_at(d.center) * haar_measure(d, p)
              for d, _ in u.values}
    total = sum(masses.values())
    mean = sum(masses[d] * v for d, v in u.values) / total
    coeffs = []
    recon = {d: complex(mean) for d, _ in u.values}
    for w in wavelets:
        c = 0j
        for d, v in u.values:
            val = wavelet_eval(w, d.center, profile, "omega")
            if not val.is_zero():
                c += float(masses[d]) * v * complex(val.conjugate())
        coeffs.append((w, c))
        if c:
            for d, _ in u.values:
                val = wavelet_eval(w, d.center, profile, "omega")
                recon[d] += c * complex(val)
    residual = LevelFunction.from_mapping(
        u.level, {d: v - recon[d] for d, v in u.values})
    return Analysis(complex(mean), tuple(coeffs), residual)


def synthesize(analysis: Analysis, profile: MeasureProfile) -> LevelFunction:
    """Rebuild the level function: constant + wavelet part + stored residual."""
    out = {}
    for d, r in analysis.residual.values:
        val = analysis.constant + r
        for w, c in analysis.coefficients:
            if c:
                wval = wavelet_eval(w, d.center, profile, "omega")
                if not wval.is_zero():
                    val += c * complex(wval)
        out[d] = val
    return LevelFunction.from_mapping(analysis.residual.level, out)


@dataclass(frozen=True)
class CensusRow:
    level: int
    n_discs: int
    n_wavelets: int
    gap: int


@dataclass(frozen=True)
class Census:
    rows: tuple[CensusRow, ...]
    maximal_admissible: tuple[Disc, ...]

    def at_level(self, m: int) -> CensusRow:
        for row in self.rows:
            if row.level == m:
                return row
        raise KeyError(m)


def completeness_census(domain: FundamentalDomain, profile: MeasureProfile,
                        max_level: int) -> Census:
    """Dimension bookkeeping per level: states vs constants + wavelets.

    The gap (states - 1 - wavelets) measures how far the wavelet family is
    from spanning the level functions; on a holed domain with k maximal
    admissible discs the gap is k - 1.
    """
    rows = []
    for m in range(max_level + 1):
        discs = state_discs(domain, profile, m)
        n_wav = len(admissible_wavelets(profile, m))
        rows.append(CensusRow(m, len(discs), n_wav,
                              len(discs) - 1 - n_wav if discs else 0))
    maximal = tuple(piece for piece, _ in profile.pieces)
    return Census(tuple(rows), maximal)
