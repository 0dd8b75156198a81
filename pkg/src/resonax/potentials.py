"""Closed-form potential algebra.

A potential is a finite sum of terms, each with an analytic evaluation
path at complex argument.  Supported term kinds:

* ``monomial``      c * x**p
* ``gaussian``      c * exp(-beta * x**2)
* ``exp_poly``      c * x**p * exp(-a * x)
* ``centrifugal``   c / x**2

Coefficients are stored complex so the rotated-grid oracle can evaluate
V(x * exp(i*theta)) without fuss; physical inputs are real.  Domains are
``full_line`` or ``half_line``; problems on the half line come from the
radial reduction below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FULL_LINE = "full_line"
HALF_LINE = "half_line"

MONOMIAL = "monomial"
GAUSSIAN = "gaussian"
EXP_POLY = "exp_poly"
CENTRIFUGAL = "centrifugal"

_KINDS = (MONOMIAL, GAUSSIAN, EXP_POLY, CENTRIFUGAL)


@dataclass(frozen=True)
class PotentialTerm:
    """One closed-form term of a potential."""

    kind: str
    coefficient: complex
    power: int = 0
    decay: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind == MONOMIAL and self.power < 1:
            raise ValueError("monomial needs power >= 1")
        if self.kind == GAUSSIAN and self.decay <= 0:
            raise ValueError("gaussian needs positive decay")
        if self.kind == EXP_POLY:
            if self.power < 0 or self.decay <= 0:
                raise ValueError("exp_poly needs power >= 0 and positive decay")
        if self.kind == CENTRIFUGAL and (self.power or self.decay):
            raise ValueError("centrifugal takes only a strength coefficient")

    def evaluate(self, z):
        c = self.coefficient
        if self.kind == MONOMIAL:
            return c * z**self.power
        if self.kind == GAUSSIAN:
            return c * np.exp(-self.decay * z * z)
        if self.kind == EXP_POLY:
            return c * z**self.power * np.exp(-self.decay * z)
        # centrifugal
        return c / (z * z)

    def reflection_even(self) -> bool:
        if self.kind == MONOMIAL:
            return self.power % 2 == 0
        if self.kind == EXP_POLY:
            return False
        return True


@dataclass(frozen=True)
class PotentialSpec:
    """Sum of terms plus domain and detected reflection symmetry."""

    terms: tuple[PotentialTerm, ...]
    domain: str = FULL_LINE
    symmetry: str = "none"

    def __post_init__(self):
        if self.domain not in (FULL_LINE, HALF_LINE):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.symmetry not in ("even", "none", "radial"):
            raise ValueError(f"unknown symmetry {self.symmetry!r}")
        if (self.domain == HALF_LINE) != (self.symmetry == "radial"):
            raise ValueError("half-line potentials are exactly the radial ones")
        if self.symmetry == "even":
            for t in self.terms:
                if not t.reflection_even():
                    raise ValueError("symmetry=even requires every term reflection-even")
        if self.domain == FULL_LINE:
            for t in self.terms:
                if t.kind == CENTRIFUGAL:
                    raise ValueError("centrifugal terms live on the half line")

    def max_monomial_power(self) -> int:
        return max((t.power for t in self.terms if t.kind == MONOMIAL), default=0)

    def centrifugal_strength(self) -> complex:
        return sum((t.coefficient for t in self.terms if t.kind == CENTRIFUGAL), 0j)

    def without_centrifugal(self) -> "PotentialSpec":
        kept = tuple(t for t in self.terms if t.kind != CENTRIFUGAL)
        return PotentialSpec(kept, self.domain, self.symmetry)


def detect_symmetry(terms, domain: str) -> str:
    if domain == HALF_LINE:
        return "radial"
    return "even" if all(t.reflection_even() for t in terms) else "none"


def make_potential(terms, domain: str = FULL_LINE) -> PotentialSpec:
    terms = tuple(terms)
    return PotentialSpec(terms, domain, detect_symmetry(terms, domain))


def eval_potential(potential: PotentialSpec, z):
    """Pointwise value of V at a (possibly complex, possibly array) argument."""
    if potential.centrifugal_strength() != 0:
        if np.any(np.asarray(z) == 0):
            raise ZeroDivisionError("potential is singular at the origin")
    total = 0j
    for term in potential.terms:
        total = total + term.evaluate(z)
    return total


@dataclass(frozen=True)
class AngularSector:
    """Angular momentum l in D spatial dimensions, reduced to the half line.

    Substituting R(r) = r**((1-D)/2) * u(r) into the D-dimensional radial
    equation leaves -u''/2 + lam*(lam+1)/(2 r**2) + V(r) acting on u with
    lam = l + D/2 - 3/2 and a Dirichlet condition at the origin.
    """

    l: int
    D: int

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("need l >= 0")
        if self.D < 2:
            raise ValueError("need D >= 2")

    @property
    def lam(self) -> float:
        return self.l + self.D / 2.0 - 1.5

    @property
    def centrifugal_strength(self) -> float:
        return self.lam * (self.lam + 1.0) / 2.0


def reduce_radial(l: int, D: int) -> AngularSector:
    return AngularSector(l, D)


# Named model potentials (hbar = m = 1 throughout).

def pure_ho_potential() -> PotentialSpec:
    return make_potential([PotentialTerm(MONOMIAL, 0.5, power=2)])


def quartic_potential(lam: float) -> PotentialSpec:
    """x**2/2 - (lam/2) x**4: metastable well, barrier from the quartic tail."""
    return make_potential([
        PotentialTerm(MONOMIAL, 0.5, power=2),
        PotentialTerm(MONOMIAL, -lam / 2.0, power=4),
    ])


def sextic_potential(g: float) -> PotentialSpec:
    """x**2/2 - g^2 x**4 + (g^4/2) x**6: triple well, all states metastable in the middle."""
    return make_potential([
        PotentialTerm(MONOMIAL, 0.5, power=2),
        PotentialTerm(MONOMIAL, -(g**2), power=4),
        PotentialTerm(MONOMIAL, g**4 / 2.0, power=6),
    ])


def cubic_potential(gamma: float) -> PotentialSpec:
    """x**2/2 + gamma x**3: no reflection symmetry, decays to -inf on one side."""
    return make_potential([
        PotentialTerm(MONOMIAL, 0.5, power=2),
        PotentialTerm(MONOMIAL, gamma, power=3),
    ])


def gaussian_quartic_potential(lam: float, depth: float = 5.0, beta: float = 0.1) -> PotentialSpec:
    """-depth * exp(-beta x**2) - (lam/2) x**4: finite well opened up by a quartic hill."""
    return make_potential([
        PotentialTerm(GAUSSIAN, -depth, decay=beta),
        PotentialTerm(MONOMIAL, -lam / 2.0, power=4),
    ])


def mexican_hat_potential(g: float, l: int, D: int = 2) -> PotentialSpec:
    """r**2/2 - (g/2) r**4 on the half line, centrifugal term fixed by (l, D)."""
    sector = reduce_radial(l, D)
    terms = [
        PotentialTerm(MONOMIAL, 0.5, power=2),
        PotentialTerm(MONOMIAL, -g / 2.0, power=4),
    ]
    if sector.centrifugal_strength != 0.0:
        terms.append(PotentialTerm(CENTRIFUGAL, sector.centrifugal_strength))
    return make_potential(terms, domain=HALF_LINE)


def bardsley_potential(v0: float) -> PotentialSpec:
    """v0 * r**2 * exp(-r): short-range barrier supporting broad and narrow resonances."""
    return make_potential([PotentialTerm(EXP_POLY, v0, power=2, decay=1.0)],
                          domain=HALF_LINE)
