"""The jump kernel, its exact truncated group sums, and the spectrum.

The operator acts on functions of the orbit space through the kernel

    H(beta x, gamma y) = mu(F)^-1 * p^(-alpha_g * l(beta^-1 gamma)) * |beta x - gamma y|^(-alpha)

integrated over the fundamental domain against the density profile.  For a
wavelet the whole truncated sum collapses, by ultrametric constancy and
exact character cancellation, to a rational (or exact p-power) multiple of
the wavelet value; that multiple is the first-principles eigenvalue oracle.
The closed-form eigenvalue series attached to a wavelet's support disc is
computed separately, with an exact geometric closed form in genus one and a
certified truncation interval otherwise.  Both readings of translated
quantities are supported: ``ambient`` recomputes distances and densities in
the field, ``transport`` defines gamma-translated data to equal its
representative on F; the beta = 1 spectral computation is the same in both
modes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .exactnum import ExactComplex, PowerSum, p_power_bounds
from .padic import Disc, Rational, abs_p, haar_measure, valuation
from .measure import MeasureProfile, RationalFunctionDatum, local_abs
from .schottky import (DomainInvalid, FundamentalDomain, GroupWord, MoebiusMap,
                       SchottkyGroup, region_image, words_with_maps)
from .wavelets import (LevelFunction, NotAdmissible, Wavelet,
                       admissible_supports, state_discs, wavelet_eval)

Scalar = Union[Fraction, PowerSum]


class CoincidentPoints(ZeroDivisionError):
    """The kernel is singular on the diagonal."""


class RatioNotConstant(ArithmeticError):
    """The operator value failed to be a fixed multiple of the wavelet."""


class NotLocallyConstant(ValueError):
    """apply_operator needs a locally constant input at a declared level."""


@dataclass(frozen=True)
class OperatorConfig:
    """Everything the operator needs: group, domain, measure and exponents.

    Construction enforces the growth condition p^(f*alpha_g) > 2g, without
    which the group sums diverge.  ``cutoff_len`` wins over ``cutoff_tol``;
    a tolerance is converted to the smallest length whose certified tail
    bound (for a unit-size function) is below it.
    """

    group: SchottkyGroup
    profile: MeasureProfile
    alpha: Fraction = Fraction(1)
    alpha_g: Fraction = Fraction(1)
    mode: str = "ambient"
    cutoff_len: int | None = None
    cutoff_tol: Fraction | None = None
    #: set only on transformed charts F -> phi(F)
    domain_override: FundamentalDomain | None = None
    escape_override: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "alpha_g", Fraction(self.alpha_g))
        if self.alpha <= 0 or self.alpha_g <= 0:
            raise ValueError("alpha and alpha_g must be positive")
        if self.mode not in ("ambient", "transport"):
            raise ValueError(f"unknown mode {self.mode!r}")
        g = self.group.genus
        a, b = self.alpha_g.numerator, self.alpha_g.denominator
        if not self.group.p ** a > (2 * g) ** b:
            raise DomainInvalid(
                f"growth condition fails: {self.group.p}^{self.alpha_g} <= {2 * g}")

    @property
    def p(self) -> int:
        return self.group.p

    @property
    def domain(self) -> FundamentalDomain:
        if self.domain_override is not None:
            return self.domain_override
        return self.group.fundamental_domain()

    def mu_inverse(self) -> Fraction:
        return 1 / self.domain.measure()

    def cutoff(self) -> int:
        if self.cutoff_len is not None:
            return self.cutoff_len
        tol = self.cutoff_tol if self.cutoff_tol is not None else Fraction(1, 10 ** 12)
        if self.group.genus == 0:
            return 1
        length = 1
        while tail_bound(self, length) > tol:
            length += 1
            if length > 10_000:
                raise RuntimeError("cutoff search did not converge")
        return length

    def word_weight(self, length: int) -> PowerSum:
        """p^(-alpha_g * length) as an exact scalar."""
        return PowerSum(self.p).add_term(Fraction(1), -self.alpha_g * length)

    def distance_power_exp(self, dist: Fraction) -> Fraction:
        """Exponent e with dist^(-alpha) = p^e, for dist an exact power of p."""
        return -Fraction(valuation(dist, self.p)) * self.alpha


def simplify(value: Scalar) -> Scalar:
    if isinstance(value, PowerSum) and value.is_rational():
        return value.to_fraction()
    return value


def as_power_sum(p: int, value: Scalar) -> PowerSum:
    if isinstance(value, PowerSum):
        return value
    return PowerSum.from_rational(p, value)


# ---------------------------------------------------------------------------
# Kernel and tail bounds
# ---------------------------------------------------------------------------

def kernel(cfg: OperatorConfig, beta_spec: tuple[GroupWord, Rational],
           gamma_spec: tuple[GroupWord, Rational]) -> Scalar:
    """Exact kernel value H(beta x, gamma y) for x, y in F.

    In transport mode the pair (beta, gamma) is first shifted to
    (1, beta^-1 gamma), which is the reading under which the kernel does not
    depend on the chart.
    """
    beta, x = beta_spec
    gamma, y = gamma_spec
    if cfg.mode == "transport":
        beta, gamma = GroupWord.identity(), beta.inverse().compose(gamma)
    bx = cfg.group.word_map(beta).apply(x)
    gy = cfg.group.word_map(gamma).apply(y)
    if bx == gy:
        raise CoincidentPoints(f"kernel singular at {bx}")
    length = len(beta.inverse().compose(gamma))
    value = cfg.word_weight(length).mul_power(cfg.mu_inverse(), 0)
    dist = abs_p(bx - gy, cfg.p)
    return simplify(value.mul_power(Fraction(1), cfg.distance_power_exp(dist)))


def minimal_escape_distance(cfg: OperatorConfig) -> Fraction:
    """Certified lower bound for |x - gamma y| over x, y in F, l(gamma) >= 1.

    gamma y lies in the hole of gamma's first letter while x does not, so
    the distance exceeds that hole's radius, hence is at least p times it.
    Transformed charts carry their own bound (set by the chart builder).
    """
    if cfg.escape_override is not None:
        return cfg.escape_override
    radii = [h.radius(cfg.p) for h in cfg.group.holes]
    if not radii:
        raise ValueError("no holes: the group is trivial")
    return cfg.p * min(radii)


def _geometric_word_tail(cfg: OperatorConfig, length: int) -> Fraction:
    """Certified upper bound for sum_{l > length} 2g(2g-1)^(l-1) p^(-alpha_g l)."""
    g = cfg.group.genus
    if g == 0:
        return Fraction(0)
    _, q_hi = p_power_bounds(cfg.p, -cfg.alpha_g, digits=30)
    ratio = (2 * g - 1) * q_hi
    if ratio >= 1:
        raise ArithmeticError("tail ratio not contractive at this precision")
    first = 2 * g * (2 * g - 1) ** length * q_hi ** (length + 1)
    return first / (1 - ratio)


def _power_upper(cfg: OperatorConfig, base: Fraction, exponent: Fraction) -> Fraction:
    """Certified upper bound for base**exponent, base an exact power of p."""
    k = valuation(base, cfg.p)  # base = p^k exactly
    _, hi = p_power_bounds(cfg.p, Fraction(k) * exponent, digits=30)
    return hi


def tail_bound(cfg: OperatorConfig, length: int, sup_norm: Rational = 1) -> Fraction:
    """Certified bound for the discarded l > length part of an operator sum.

    2 ||u||_inf * mu(F)^-1 * total_mass * d_min^(-alpha) * (geometric word tail);
    exact rational, monotone decreasing in the cutoff length.
    """
    if cfg.group.genus == 0:
        return Fraction(0)
    d_min = minimal_escape_distance(cfg)
    dist_factor = _power_upper(cfg, d_min, -cfg.alpha)
    return (2 * Fraction(sup_norm) * cfg.mu_inverse() * cfg.profile.total_mass
            * dist_factor * _geometric_word_tail(cfg, length))


# ---------------------------------------------------------------------------
# Quadrature cells
# ---------------------------------------------------------------------------

def _complement_within(parent: Disc, sub: Disc, p: int) -> list[Disc]:
    """Discs tiling parent minus sub (sub contained in parent)."""
    tiles = []
    current = parent
    while current.radius_exp > sub.radius_exp:
        keeper = None
        for child in current.children(p):
            if child.contains(sub, p):
                keeper = child
            else:
                tiles.append(child)
        if keeper is None:
            raise ValueError(f"{sub} escaped {parent} during tiling")
        current = keeper
    return tiles


def _wavelet_cells(cfg: OperatorConfig, support: Disc) -> list[tuple[Disc, Fraction]]:
    """Constant-distance cells for quadrature against a wavelet on ``support``:
    the support as one cell, the tiling of its piece around it, and every
    other piece whole."""
    cells = []
    host = None
    for piece, dens in cfg.profile.pieces:
        if piece.contains(support, cfg.p):
            host = (piece, dens)
            continue
        cells.append((piece, dens))
    if host is None:
        raise NotAdmissible(f"{support} is not inside a single piece")
    piece, dens = host
    cells.append((support, dens))
    for tile in _complement_within(piece, support, cfg.p):
        cells.append((tile, dens))
    return cells


# ---------------------------------------------------------------------------
# Operator application
# ---------------------------------------------------------------------------

def wavelet_multiplier(cfg: OperatorConfig, support: Disc, x: Rational,
                       length: int | None = None,
                       chart: GroupWord | None = None) -> tuple[Scalar, Fraction]:
    """Exact scalar M with (H psi)(beta x) = M * psi(x), truncated at the cutoff.

    x must lie in the support.  The cell of gamma = beta over the support
    contributes the exact local integral -C_B * p^(d(1-alpha)) (times the
    |beta'|^(-alpha) factor off the base chart); every other (gamma, cell)
    pair sees a constant distance, so its wavelet part cancels exactly and
    only the -psi(x) part survives.  Returns (M, certified tail bound).
    """
    p = cfg.p
    x = Fraction(x)
    if not support.contains_point(x, p):
        raise ValueError(f"{x} is not in the support {support}")
    length = cfg.cutoff() if length is None else length
    beta = GroupWord.identity() if (chart is None or cfg.mode == "transport") else chart
    beta_map = cfg.group.word_map(beta)
    bx = beta_map.apply(x)
    cells = _wavelet_cells(cfg, support)
    dens_b = cfg.profile.density_on(support)
    d = support.radius_exp

    total = PowerSum(p)
    local_exp = Fraction(d) * (1 - cfg.alpha)
    if not beta.is_identity():
        # |beta x - beta y| = |beta'|_B * |x - y| on the support, so the
        # local integral picks up the factor |beta'|_B^(-alpha)
        deriv = beta_map.derivative_abs(support.center, p)
        local_exp += cfg.distance_power_exp(deriv)
    total.add_term(-dens_b, local_exp)
    for word, mat in words_with_maps(cfg.group, length):
        composed = beta_map.compose(mat)
        weight_exp = -cfg.alpha_g * len(word)
        for cell, dens in cells:
            if word.is_identity() and cell == support:
                continue  # replaced by the exact local term
            target = composed.apply(cell.center)
            dist = abs_p(bx - target, p)
            if dist == 0:
                raise CoincidentPoints(f"cell {cell} hit the base point")
            total.add_term(-dens * haar_measure(cell, p),
                           weight_exp + cfg.distance_power_exp(dist))
    total = total.mul_power(cfg.mu_inverse(), 0)
    return simplify(total), tail_bound(cfg, length)


def scalar_times_value(p: int, scalar: Scalar, base: ExactComplex) -> ExactComplex:
    """Exact product of a (possibly p-power) scalar with an exact value."""
    ps = as_power_sum(p, scalar)
    terms = ps.terms()
    if not terms:
        return ExactComplex.zero(p)
    if len(terms) == 1:
        (exp, coeff), = terms.items()
        return base.scaled(coeff) * ExactComplex(
            Fraction(1), Fraction(1), p, Fraction(0), exp)
    raise ArithmeticError("scalar did not collapse to a single p-power term")


def apply_operator(cfg: OperatorConfig, u, x: Rational,
                   beta: GroupWord | None = None,
                   length: int | None = None):
    """Apply the truncated operator at a point of F (or its beta-translate).

    For a wavelet the result is exact: (ExactComplex value, Fraction tail).
    For a level function the generic quadrature runs in complex floats and
    returns (complex value, float tail).  Constant functions map to zero
    identically.
    """
    if isinstance(u, Wavelet):
        if not u.support.contains_point(x, cfg.p):
            # every group term vanishes identically off the support: the
            # wavelet part integrates to zero over the support cell (full
            # character sum) and u(x) = 0 kills the rest, so no tail at all
            return ExactComplex.zero(cfg.p), Fraction(0)
        mult, tail = wavelet_multiplier(cfg, u.support, x, length, beta)
        base = wavelet_eval(u, x, cfg.profile, "haar")
        return scalar_times_value(cfg.p, mult, base), tail
    if isinstance(u, LevelFunction):
        return _apply_to_level_function(cfg, u, Fraction(x), beta, length)
    raise NotLocallyConstant(f"cannot apply the operator to {type(u)!r}")


def _apply_to_level_function(cfg: OperatorConfig, u: LevelFunction, x: Fraction,
                             beta: GroupWord | None, length: int | None):
    p = cfg.p
    length = cfg.cutoff() if length is None else length
    beta = GroupWord.identity() if (beta is None or cfg.mode == "transport") else beta
    beta_map = cfg.group.word_map(beta)
    bx = beta_map.apply(x)
    ux = u.value_at(x, p)
    cells = [(d, cfg.profile.density_at(d.center), v) for d, v in u.values]
    total = 0j
    sup = u.sup_norm()
    for word, mat in words_with_maps(cfg.group, length):
        composed = beta_map.compose(mat)
        weight = float(p) ** -float(cfg.alpha_g * len(word))
        for cell, dens, val in cells:
            if word.is_identity() and cell.contains_point(x, p):
                continue  # the integrand vanishes on the cell of x
            target = composed.apply(cell.center)
            dist = abs_p(bx - target, p)
            if dist == 0:
                raise CoincidentPoints(f"cell {cell} hit the base point")
            total += (weight * float(dens * haar_measure(cell, p))
                      * float(dist) ** -float(cfg.alpha) * (val - ux))
    total *= float(cfg.mu_inverse())
    return total, float(tail_bound(cfg, length, Fraction(1))) * sup


# ---------------------------------------------------------------------------
# Eigenvalue series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesValue:
    """A group-sum value with certified enclosure.

    ``value`` is the exact total when ``is_exact`` (closed form), otherwise
    the truncated partial sum; [lo, hi] always encloses the true value.
    """

    value: Scalar
    lo: Fraction
    hi: Fraction
    is_exact: bool
    cutoff: int | None = None

    def midpoint(self) -> float:
        return (float(self.lo) + float(self.hi)) / 2


def _scalar_bounds(p: int, value: Scalar) -> tuple[Fraction, Fraction]:
    if isinstance(value, Fraction):
        return value, value
    return value.bounds()


class ChartNotSupported(ValueError):
    """The requested chart transform leaves the exact toolkit's reach."""


def _branch_closed_form(cfg: OperatorConfig, support: Disc,
                        letter: int, probe: int = 12) -> PowerSum | None:
    """Exact sum over n >= 1 of p^(-alpha_g n) * dist(support, s^n support)^(-alpha)
    for the single-letter branch s, when a certificate applies; None otherwise.

    Two certificates cover the hyperbolic one-generator branches:

    * constant distance: a disc W with s(W) inside W, s^n0(support) inside W
      and the base center outside W makes every later distance equal
      |center - c_W|;
    * exact geometric growth: an affine letter with expanding rational fixed
      point t makes |s^n(center) - t| grow by the exact factor |s'|^-1 once
      it exceeds |center - t|.

    Closed forms require integral exponents (the geometric ratio is otherwise
    not a finite p-power expression).
    """
    p = cfg.p
    if cfg.alpha.denominator != 1 or cfg.alpha_g.denominator != 1:
        return None
    smat = cfg.group.letter_map(letter)
    target = cfg.group.target_hole(letter)
    c0 = support.center

    # exact distances for the first `probe` steps
    dists: list[Fraction] = []
    image = support
    images = []
    for _ in range(probe):
        image = region_image(smat, image, p)
        images.append(image)
        if image.complement:
            return None
        dists.append(abs_p(c0 - image.center, p))

    def tail_from(n0: int, ratio_exp: Fraction, first_exp: Fraction) -> PowerSum:
        # sum_{n > n0} coeff * p^(first_exp + (n - n0 - 1) * ratio_exp)
        # with ratio p^(ratio_exp) < 1 and integral exponents: exact rational.
        r = Fraction(p) ** ratio_exp
        first = Fraction(p) ** first_exp
        return PowerSum.from_rational(p, first / (1 - r))

    head = PowerSum(p)

    # certificate 1: constant distance beyond some n0, via a trapping disc
    trap = target
    for _ in range(64):
        if trap.complement or trap.contains_point(c0, p):
            nxt = region_image(smat, trap, p)
            if nxt.complement or nxt == trap:
                trap = None
                break
            trap = nxt
            continue
        break
    if trap is not None and not trap.complement:
        shrunk = region_image(smat, trap, p)
        trapped_at = None
        for n, image_n in enumerate(images, start=1):
            if trap.contains(image_n, p):
                trapped_at = n
                break
        if (trapped_at is not None and trap.contains(shrunk, p)
                and not trap.contains_point(c0, p)):
            dist_const = abs_p(c0 - trap.center, p)
            for n in range(1, trapped_at):
                head.add_term(Fraction(1),
                              -cfg.alpha_g * n + cfg.distance_power_exp(dists[n - 1]))
            ratio_exp = -cfg.alpha_g
            first_exp = (-cfg.alpha_g * trapped_at
                         + cfg.distance_power_exp(dist_const))
            return head + tail_from(trapped_at, ratio_exp, first_exp)

    # certificate 2: exact geometric growth for an expanding affine letter
    if smat.c == 0 and smat.a != smat.d:
        q = Fraction(smat.a, smat.d)
        if abs_p(q, p) > 1:
            t = Fraction(smat.b, smat.d - smat.a)
            base_gap = abs_p(c0 - t, p)
            z = c0
            for n0 in range(1, probe):
                z = smat.apply(z)
                if abs_p(z - t, p) > base_gap:
                    rho_exp = Fraction(-valuation(q, p))  # |q| = p^rho_exp
                    for n in range(1, n0):
                        head.add_term(Fraction(1),
                                      -cfg.alpha_g * n + cfg.distance_power_exp(dists[n - 1]))
                    gap0 = abs_p(z - t, p)
                    # dist_n = gap0 * |q|^(n - n0) for n >= n0
                    ratio_exp = -cfg.alpha_g - rho_exp * cfg.alpha
                    first_exp = (-cfg.alpha_g * n0 + cfg.distance_power_exp(gap0))
                    return head + tail_from(n0, ratio_exp, first_exp)
    return None


def delta_series(cfg: OperatorConfig, support: Disc) -> SeriesValue:
    """sum over the group of p^(-alpha_g l(gamma)) * delta(support, gamma support)^(-alpha).

    Genus one evaluates in exact closed form branch by branch; otherwise the
    sum is truncated at the cutoff with a certified geometric tail.
    """
    p = cfg.p
    g = cfg.group.genus
    if g == 0:
        one = Fraction(1)
        return SeriesValue(one, one, one, True, None)
    if g == 1:
        closed = [_branch_closed_form(cfg, support, s) for s in (1, -1)]
        if all(c is not None for c in closed):
            total = closed[0] + closed[1] + Fraction(1)
            lo, hi = _scalar_bounds(p, total)
            return SeriesValue(simplify(total), lo, hi, True, None)
    length = cfg.cutoff()
    total = PowerSum(p).add_term(Fraction(1), Fraction(0))  # identity term
    for word, mat in words_with_maps(cfg.group, length):
        if word.is_identity():
            continue
        image = region_image(mat, support, p)
        if image.complement:
            raise ChartNotSupported(f"image of {support} under {word} wraps infinity")
        dist = abs_p(support.center - image.center, p)
        total.add_term(Fraction(1),
                       -cfg.alpha_g * len(word) + cfg.distance_power_exp(dist))
    d_min = minimal_escape_distance(cfg)
    tail = _power_upper(cfg, d_min, -cfg.alpha) * _geometric_word_tail(cfg, length)
    lo, hi = _scalar_bounds(p, total)
    return SeriesValue(simplify(total), lo, hi + tail, False, length)


def lambda_formula(cfg: OperatorConfig, support: Disc) -> SeriesValue:
    """The closed-form eigenvalue attached to a support disc:

        C_B * mu(F)^-1 * p^(f*d) * sum_gamma p^(-alpha_g l) * delta(B, gamma B)^(-alpha)

    Exact in genus <= 1 (and whenever every branch certificate applies);
    otherwise a certified enclosure around the truncated sum.
    """
    if not cfg.profile.admissible(support):
        raise NotAdmissible(f"{support} is not admissible")
    dens = cfg.profile.density_on(support)
    series = delta_series(cfg, support)
    pref_exp = Fraction(support.radius_exp)  # |pi|^(-d) = p^(f d), f = 1
    pref = dens * cfg.mu_inverse()
    value = as_power_sum(cfg.p, series.value).mul_power(pref, pref_exp)
    scale_lo, scale_hi = p_power_bounds(cfg.p, pref_exp, digits=30)
    return SeriesValue(simplify(value),
                       pref * scale_lo * series.lo,
                       pref * scale_hi * series.hi,
                       series.is_exact, series.cutoff)


@dataclass(frozen=True)
class LambdaExact:
    """First-principles eigenvalue: the constant ratio -(H psi)(x) / psi(x).

    ``value`` is the truncated exact ratio, certified to within ``tail``;
    ``samples`` lists the child-center evaluation points over which exact
    constancy was verified.
    """

    value: Scalar
    tail: Fraction
    samples: tuple[Fraction, ...]
    cutoff: int

    @property
    def lo(self) -> Fraction:
        lo, _ = (self.value, self.value) if isinstance(self.value, Fraction) \
            else self.value.bounds()
        return lo - self.tail

    @property
    def hi(self) -> Fraction:
        _, hi = (self.value, self.value) if isinstance(self.value, Fraction) \
            else self.value.bounds()
        return hi + self.tail


def lambda_exact(cfg: OperatorConfig, support: Disc,
                 length: int | None = None) -> LambdaExact:
    """Evaluate the eigenvalue oracle on every child of the support.

    The truncated multiplier must be exactly identical across the child
    sample points (RatioNotConstant otherwise, which would falsify the
    eigen-relation), and the eigenvalue is its negative.
    """
    if not cfg.profile.admissible(support):
        raise NotAdmissible(f"{support} is not admissible")
    length = cfg.cutoff() if length is None else length
    samples = tuple(child.center for child in support.children(cfg.p))
    values = []
    for x in samples:
        mult, tail = wavelet_multiplier(cfg, support, x, length)
        values.append((simplify(as_power_sum(cfg.p, mult).scaled(-1)), tail))
    first = values[0][0]
    for val, _ in values[1:]:
        if val != first:
            raise RatioNotConstant(
                f"operator ratio varies over {support}: {values}")
    return LambdaExact(first, values[0][1], samples, length)


# ---------------------------------------------------------------------------
# Spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumEntry:
    radius_exp: int
    density: Fraction
    lam_formula: SeriesValue
    lam_exact: LambdaExact
    multiplicity: int
    witnesses: tuple[Disc, ...]


@dataclass(frozen=True)
class SpectrumResult:
    entries: tuple[SpectrumEntry, ...]
    level: int
    mode: str
    cutoff: int
    word_counts: tuple[tuple[int, int], ...]  # (length, number of words)
    chart: GroupWord | None = None


def word_census(g: int, max_len: int = 8) -> tuple[tuple[int, int], ...]:
    """Exact reduced-word counts per length: 1 and then 2g(2g-1)^(l-1)."""
    rows = [(0, 1)]
    for length in range(1, max_len + 1):
        rows.append((length, 2 * g * (2 * g - 1) ** (length - 1) if g else 0))
    return tuple(rows)


def spectrum(cfg: OperatorConfig, level: int,
             chart: GroupWord | None = None,
             datum: RationalFunctionDatum | None = None) -> SpectrumResult:
    """All eigenvalue classes visible at the given level.

    Entries are grouped by (radius exponent, density); each class carries the
    closed-form value, the oracle value with certified interval, and the
    multiplicity (number of same-class discs in F) * (p - 1).  With a chart
    word, ambient mode recomputes everything on phi(F) (which needs the
    measure datum); transport mode returns the base spectrum unchanged.
    """
    work = cfg
    supports = admissible_supports(cfg.profile, level)
    if chart is not None and not chart.is_identity() and cfg.mode == "ambient":
        if datum is None:
            raise ChartNotSupported("ambient chart shift needs the measure datum")
        phi = cfg.group.word_map(chart)
        work = transformed_config(cfg, datum, phi)
        supports = [region_image(phi, s, cfg.p) for s in supports]
    classes: dict[tuple[int, Fraction], list[Disc]] = {}
    for s in supports:
        key = (s.radius_exp, work.profile.density_on(s))
        classes.setdefault(key, []).append(s)
    entries = []
    for (rexp, dens), discs in sorted(classes.items()):
        witness = discs[0]
        entries.append(SpectrumEntry(
            rexp, dens,
            lambda_formula(work, witness),
            lambda_exact(work, witness),
            len(discs) * (work.p - 1),
            tuple(discs)))
    return SpectrumResult(tuple(entries), level, cfg.mode, work.cutoff(),
                          word_census(cfg.group.genus), chart)


def transformed_config(cfg: OperatorConfig, datum: RationalFunctionDatum,
                       phi: MoebiusMap) -> OperatorConfig:
    """The ambient operator data on the chart phi(F): image domain, image
    pieces with recomputed densities, and a certified escape bound."""
    p = cfg.p
    outer = region_image(phi, cfg.domain.outer, p)
    if outer.complement:
        raise ChartNotSupported("chart outer disc wraps infinity")
    holes = tuple(region_image(phi, h, p) for h in cfg.domain.holes)
    domain = FundamentalDomain(outer, holes, p)
    pieces = []
    for piece, _ in cfg.profile.pieces:
        image = region_image(phi, piece, p)
        if image.complement:
            raise ChartNotSupported("chart piece wraps infinity")
        pieces.append((image, local_abs(datum, image, p)))
    pieces.sort(key=lambda it: (it[0].center, it[0].radius_exp))
    cores = tuple(region_image(phi, core, p) for core in cfg.profile.zero_cores)
    profile = MeasureProfile(tuple(pieces), cores, p)
    escape = _chart_escape_distance(cfg, phi)
    return dataclasses.replace(cfg, profile=profile, domain_override=domain,
                               escape_override=escape)


def _chart_escape_distance(cfg: OperatorConfig, phi: MoebiusMap) -> Fraction:
    """Lower bound |phi(u) - phi(v)| >= min|phi'| * |u - v| over the outer disc."""
    p = cfg.p
    base = minimal_escape_distance(dataclasses.replace(cfg, escape_override=None))
    if phi.c == 0:
        return abs_p(Fraction(phi.a, phi.d), p) * base
    outer = cfg.group.fundamental_domain().outer
    denom_max = max(abs_p(phi.c, p) * outer.radius(p),
                    abs_p(phi.c * outer.center + phi.d, p))
    deriv_min = abs_p(phi.det, p) / denom_max ** 2
    return deriv_min * base


def lambda_transform(cfg: OperatorConfig, phi: MoebiusMap, support: Disc,
                     datum: RationalFunctionDatum) -> SeriesValue:
    """The transformation-formula value for the eigenvalue on the chart phi(F):

        C_B * |f(phi(y))| * |phi'(y)| * mu(phi F)^-1 * p^(f*dtilde)
            * sum_gamma p^(-alpha_g l) * delta(phi B, gamma phi B)^(-alpha)

    with both constants evaluated on the support (they are constant there).
    phi must be bianalytic on F: its pole stays outside the outer disc.
    """
    p = cfg.p
    pole = phi.pole()
    if pole is not None and cfg.domain.outer.contains_point(pole, p):
        raise ChartNotSupported(f"pole {pole} of the chart map lies in the domain")
    if not cfg.profile.admissible(support):
        raise NotAdmissible(f"{support} is not admissible")
    if phi.is_identity():
        return lambda_formula(cfg, support)
    dens = cfg.profile.density_on(support)
    c_phi = datum.abs_at(phi.apply(support.center), p)
    c_phi_prime = phi.derivative_abs(support.center, p)
    image = region_image(phi, support, p)
    if image.complement:
        raise ChartNotSupported("support image wraps infinity")
    work = transformed_config(cfg, datum, phi)
    series = delta_series(work, image)
    pref = dens * c_phi * c_phi_prime / work.domain.measure()
    pref_exp = Fraction(image.radius_exp)
    value = as_power_sum(p, series.value).mul_power(pref, pref_exp)
    scale_lo, scale_hi = p_power_bounds(p, pref_exp, digits=30)
    return SeriesValue(simplify(value),
                       pref * scale_lo * series.lo,
                       pref * scale_hi * series.hi,
                       series.is_exact, series.cutoff)


# ---------------------------------------------------------------------------
# Local integral oracle
# ---------------------------------------------------------------------------

def vladimirov_local_integral(support: Disc, j: int, alpha: Fraction, x: Rational,
                              p: int) -> ExactComplex:
    """Exact value of the local integral of |x-y|^(-alpha) (psi(y) - psi(x))
    over the support, by sphere decomposition: -p^(d(1-alpha)) * psi(x).

    The character cancellation over the children is evaluated in exact
    cyclotomic arithmetic rather than assumed.
    """
    from .exactnum import PhaseSum

    alpha = Fraction(alpha)
    w = Wavelet(support, j, p)
    x = Fraction(x)
    if not support.contains_point(x, p):
        raise ValueError(f"{x} is outside the support")
    d = support.radius_exp
    child_x = next(ch for ch in support.children(p) if ch.contains_point(x, p))
    rel = PhaseSum(p)
    for ch in support.children(p):
        if ch == child_x:
            continue
        rel.add(w.phase_at(ch.center) - w.phase_at(x), Fraction(1))
    char_sum = rel.to_fraction()  # = -1 by the full character sum
    haar_child = Fraction(p) ** (d - 1)
    mu_b = Fraction(p) ** d
    coeff = haar_child * char_sum - (mu_b - haar_child)
    mult = PowerSum(p).add_term(coeff, -Fraction(d) * alpha)
    return scalar_times_value(p, simplify(mult), wavelet_eval(w, x))


def vladimirov_alpha_free_value(support: Disc, j: int, x: Rational, p: int) -> ExactComplex:
    """The stated right-hand side -p^(f*d) * psi(x) (no alpha dependence)."""
    w = Wavelet(support, j, p)
    return scalar_times_value(p, -(Fraction(p) ** support.radius_exp),
                              wavelet_eval(w, Fraction(x)))


# ---------------------------------------------------------------------------
# Finite generator matrix and Dirichlet form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorMatrix:
    """Exact level-m restriction of the operator: the Markov jump generator.

    Off-diagonal entries are nonnegative jump rates; the diagonal is the
    negative row sum, so rows sum to zero exactly.  ``entry_tail`` bounds the
    truncation error of any single off-diagonal entry.
    """

    level: int
    states: tuple[Disc, ...]
    rows: tuple[tuple[Scalar, ...], ...]
    entry_tail: Fraction
    cutoff: int

    @property
    def size(self) -> int:
        return len(self.states)

    def as_floats(self) -> list[list[float]]:
        return [[float(v) for v in row] for row in self.rows]

    def state_index(self, disc: Disc) -> int:
        return self.states.index(disc)


def generator_matrix(cfg: OperatorConfig, level: int,
                     length: int | None = None) -> GeneratorMatrix:
    """Assemble the exact jump-rate matrix on the level-m discs of F.

    Q[D, D'] = mu(F)^-1 * mass(D') * sum_gamma p^(-alpha_g l) |c_D - gamma c_D'|^(-alpha)
    for D != D'; the diagonal is defined as the negative row sum (jumps
    within a state cancel in the operator and carry no rate).
    """
    p = cfg.p
    length = cfg.cutoff() if length is None else length
    states = state_discs(cfg.domain, cfg.profile, level)
    if not states:
        raise ValueError(f"no states at level {level}")
    masses = [cfg.profile.density_at(d.center) * haar_measure(d, p) for d in states]
    n = len(states)
    sums = [[PowerSum(p) for _ in range(n)] for _ in range(n)]
    for word, mat in words_with_maps(cfg.group, length):
        identity = word.is_identity()
        weight_exp = -cfg.alpha_g * len(word)
        targets = [mat.apply(d.center) for d in states]
        for i, di in enumerate(states):
            ci = di.center
            for k in range(n):
                if identity and k == i:
                    continue
                dist = abs_p(ci - targets[k], p)
                if dist == 0:
                    raise CoincidentPoints(f"states {i} and {k} collide")
                sums[i][k].add_term(Fraction(1),
                                    weight_exp + cfg.distance_power_exp(dist))
    mu_inv = cfg.mu_inverse()
    rows = []
    for i in range(n):
        row = []
        diag = PowerSum(p)
        for k in range(n):
            if k == i:
                row.append(None)
                continue
            entry = sums[i][k].mul_power(mu_inv * masses[k], 0)
            row.append(simplify(entry))
            diag = diag + entry
        row[i] = simplify(diag.scaled(-1))
        rows.append(tuple(row))
    d_min = minimal_escape_distance(cfg) if cfg.group.genus else None
    if cfg.group.genus:
        tail = (mu_inv * max(masses) * _power_upper(cfg, d_min, -cfg.alpha)
                * _geometric_word_tail(cfg, length))
    else:
        tail = Fraction(0)
    return GeneratorMatrix(level, tuple(states), tuple(rows), tail, length)


def apply_generator(gen: GeneratorMatrix, values: Sequence) -> list:
    """Q @ v with exact entries (works for Fractions and complexes alike)."""
    out = []
    for row in gen.rows:
        acc = None
        for entry, v in zip(row, values):
            term = entry * v if isinstance(entry, Fraction) else float(entry) * v
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def dirichlet_form(cfg: OperatorConfig, u: LevelFunction, v: LevelFunction,
                   gen: GeneratorMatrix | None = None):
    """The quadratic form <H u, H v> against |omega| on F.

    Exact (rational or complex-rational) when the inputs are; conjugate
    symmetric; zero on constants; nonnegative on the diagonal.  Returns
    (value, certified truncation bound).
    """
    if u.level != v.level:
        raise NotLocallyConstant("level mismatch")
    if gen is None:
        gen = generator_matrix(cfg, u.level)
    p = cfg.p
    udict, vdict = u.as_dict(), v.as_dict()
    try:
        uvec = [udict[d] for d in gen.states]
        vvec = [vdict[d] for d in gen.states]
    except KeyError as exc:
        raise NotLocallyConstant(f"missing state {exc}") from exc
    masses = [cfg.profile.density_at(d.center) * haar_measure(d, p)
              for d in gen.states]
    qu = apply_generator(gen, uvec)
    qv = apply_generator(gen, vvec)
    total = 0
    for m, a, b in zip(masses, qu, qv):
        conj_b = b.conjugate() if isinstance(b, complex) else b
        total = total + m * a * conj_b
    # coarse certified bound: first-order in the per-entry tail
    n = gen.size
    err = float(gen.entry_tail) * n
    sup_u, sup_v = u.sup_norm(), v.sup_norm()
    sup_qu = max(abs(complex(q)) for q in qu)
    sup_qv = max(abs(complex(q)) for q in qv)
    mass_total = float(sum(masses))
    bound = mass_total * (err * 2 * sup_u * sup_qv + err * 2 * sup_v * sup_qu
                          + (err * 2) ** 2 * sup_u * sup_v)
    return total, bound
