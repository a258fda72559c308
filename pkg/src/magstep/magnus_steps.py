"""Step propagators that keep the exponent inside a single matrix exponential.

Each scheme combines Hamiltonian samples at fixed fractions of the step into
an anti-Hermitian exponent Theta and returns ``U = exp(Theta)``.  Truncating
inside the exponent is what preserves unitarity at every order; the schemes
differ in quadrature nodes and in how many nested commutators they keep.

``exponent`` broadcasts: samples may be single ``(d, d)`` matrices or stacks
``(n, d, d)`` sharing one scalar ``dt``, which is how the evolution driver
assembles a whole trajectory worth of exponents in one call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .linalg import (
    Array,
    PreconditionError,
    as_complex_square,
    commutator,
    expm_antihermitian,
    frobenius_norm,
    hermiticity_defect,
)

__all__ = [
    "MethodId",
    "ALL_METHODS",
    "StepContext",
    "MissingNodeError",
    "NonHermitianSampleError",
    "sample_nodes",
    "exponent",
    "step",
    "GAUSS2_LO",
    "GAUSS2_HI",
    "GAUSS3_LO",
    "GAUSS3_HI",
    "QUAD_COMMUTATOR_ROOT",
]

# Quadrature nodes as fractions of the step, at full double precision.
GAUSS2_LO = 0.5 - math.sqrt(3.0) / 6.0
GAUSS2_HI = 0.5 + math.sqrt(3.0) / 6.0
GAUSS3_LO = 0.5 - math.sqrt(15.0) / 10.0
GAUSS3_HI = 0.5 + math.sqrt(15.0) / 10.0
_THIRD = 1.0 / 3.0
_TWO_THIRDS = 2.0 / 3.0

# Root of the quadratic that collapses the quadruple integral of the linear
# interpolant into a single triple-commutator tower; the conjugate root
# -(5 + sqrt(21))/2 yields the same matrix.
QUAD_COMMUTATOR_ROOT = -(5.0 - math.sqrt(21.0)) / 2.0


class MethodId(enum.Enum):
    """The nine step schemes, by their CLI names."""

    ME2 = "me2"
    ME3 = "me3"
    ME4_FULL = "me4-full"
    ME4_NC = "me4-nc"
    ME6 = "me6"
    BLANES4 = "blanes4"
    BLANES4_GAUSS = "blanes4-gauss"
    ISERLES4_GAUSS = "iserles4-gauss"
    BLANES6_GAUSS = "blanes6-gauss"

    @classmethod
    def from_name(cls, name: str) -> "MethodId":
        key = str(name).strip().lower()
        for method in cls:
            if method.value == key:
                return method
        valid = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown method {name!r}; valid methods: {valid}")


# Documented fixed order used by "--methods all" and the reports.
ALL_METHODS: tuple[MethodId, ...] = (
    MethodId.ME2,
    MethodId.ME3,
    MethodId.ME4_FULL,
    MethodId.ME4_NC,
    MethodId.ME6,
    MethodId.BLANES4,
    MethodId.BLANES4_GAUSS,
    MethodId.ISERLES4_GAUSS,
    MethodId.BLANES6_GAUSS,
)


@dataclass(frozen=True)
class StepContext:
    """Per-step numerical context: hbar and the exponent symmetry tolerance."""

    hbar: float = 1.0
    expm_tolerance: float = 1e-10

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")


DEFAULT_CONTEXT = StepContext()


class MissingNodeError(ValueError):
    """A required Hamiltonian sample node was not supplied."""


class NonHermitianSampleError(PreconditionError):
    """A Hamiltonian sample fails the Hermiticity test."""

    def __init__(self, node: float, defect: float, tol: float):
        self.node = node
        self.defect = float(defect)
        super().__init__(
            f"Hamiltonian sample at node {node} is not Hermitian: "
            f"defect {self.defect:.3e} exceeds tolerance {tol:.3e}"
        )


_NODES: dict[MethodId, tuple[float, ...]] = {
    MethodId.ME2: (0.0, 1.0),
    MethodId.ME3: (0.0, 0.5, 1.0),
    MethodId.ME4_FULL: (0.0, 0.5, 1.0),
    MethodId.ME4_NC: (0.0, 0.5, 1.0),
    MethodId.ME6: (0.0, 0.25, _THIRD, 0.5, _TWO_THIRDS, 0.75, 1.0),
    MethodId.BLANES4: (0.0, 0.5, 1.0),
    MethodId.BLANES4_GAUSS: (GAUSS2_LO, GAUSS2_HI),
    MethodId.ISERLES4_GAUSS: (GAUSS2_LO, GAUSS2_HI),
    MethodId.BLANES6_GAUSS: (GAUSS3_LO, 0.5, GAUSS3_HI),
}


def sample_nodes(method: MethodId) -> tuple[float, ...]:
    """Fractions of the step at which the scheme samples the Hamiltonian."""
    return _NODES[method]


def _checked_samples(method: MethodId, samples: Mapping[float, Array], tol: float) -> dict[float, Array]:
    out: dict[float, Array] = {}
    for node in sample_nodes(method):
        if node not in samples:
            raise MissingNodeError(f"missing Hamiltonian sample at node {node!r} for {method.value}")
        h = as_complex_square(samples[node])
        defect = np.asarray(hermiticity_defect(h))
        scale = np.maximum(1.0, np.asarray(frobenius_norm(h)))
        if np.any(defect > tol * scale):
            raise NonHermitianSampleError(node, float(np.max(defect)), tol)
        out[node] = h
    return out


def exponent(method: MethodId, samples: Mapping[float, Array], dt, ctx: StepContext = DEFAULT_CONTEXT) -> Array:
    """Anti-Hermitian exponent Theta with ``U = exp(Theta)`` for one step.

    ``samples`` maps node fractions (from :func:`sample_nodes`) to Hermitian
    matrices; values may be stacked as ``(n, d, d)``.
    """
    h = _checked_samples(method, samples, ctx.expm_tolerance)
    dt = float(dt)
    hbar = ctx.hbar
    return _EXPONENT_BUILDERS[method](h, dt, hbar)


def _exponent_me2(h, dt, hbar):
    return (-0.5j * dt / hbar) * (h[0.0] + h[1.0])


def _simpson_m1(h, dt):
    return (dt / 6.0) * (h[0.0] + 4.0 * h[0.5] + h[1.0])


def _exponent_me3(h, dt, hbar):
    m1 = _simpson_m1(h, dt)
    m2 = (dt**2 / 6.0) * commutator(h[1.0], h[0.0])
    return (-1j / hbar) * m1 - m2 / (2.0 * hbar**2)


def _exponent_me4(h, dt, hbar, with_triple: bool):
    m1 = _simpson_m1(h, dt)
    m2 = (dt**2 / 30.0) * commutator(h[0.0] + 4.0 * h[0.5], h[0.0] - h[1.0])
    theta = (-1j / hbar) * m1 - m2 / (2.0 * hbar**2)
    if with_triple:
        m3 = (dt**3 / 40.0) * commutator(h[1.0] - h[0.0], commutator(h[1.0], h[0.0]))
        theta = theta + (1j / (6.0 * hbar**3)) * m3
    return theta


def _exponent_me6(h, dt, hbar):
    h0, hq1, ht1, hh, ht2, hq3, h1 = (
        h[0.0], h[0.25], h[_THIRD], h[0.5], h[_TWO_THIRDS], h[0.75], h[1.0],
    )
    m1 = (dt / 90.0) * (7.0 * h0 + 32.0 * hq1 + 12.0 * hh + 32.0 * hq3 + 7.0 * h1)
    m2 = (dt**2 / 3360.0) * (
        117.0 * (commutator(ht1, h0) + commutator(h1, ht2))
        + 47.0 * commutator(h1, h0)
        + 144.0 * (commutator(h1, ht1) + commutator(ht2, h0))
        + 729.0 * commutator(ht2, ht1)
    )
    m3 = (dt**3 / 2520.0) * (
        64.0 * commutator(hh + h1, commutator(hh, h0))
        + 64.0 * commutator(hh + h0, commutator(hh, h1))
        + 44.0 * (commutator(h0, commutator(h0, hh)) + commutator(h1, commutator(h1, hh)))
        + 9.0 * commutator(h1 - h0, commutator(h1, h0))
    )
    c = QUAD_COMMUTATOR_ROOT
    m4 = (dt**4 / 210.0) * commutator(
        (1.0 / c) * h0 - h1, commutator(h1 - c * h0, commutator(h1, h0))
    )
    return (
        (-1j / hbar) * m1
        - m2 / (2.0 * hbar**2)
        + (1j / (6.0 * hbar**3)) * m3
        + m4 / (24.0 * hbar**4)
    )


def _exponent_blanes4(h, dt, hbar):
    s = _simpson_m1(h, dt)
    k = (dt**2 / 72.0) * commutator(h[1.0] - h[0.0], h[0.0] + 4.0 * h[0.5] + h[1.0])
    return (-1j / hbar) * s - k / hbar**2


def _exponent_blanes4_gauss(h, dt, hbar):
    g1, g2 = h[GAUSS2_LO], h[GAUSS2_HI]
    s = (dt / 2.0) * (g1 + g2)
    k = (math.sqrt(3.0) / 12.0) * dt**2 * commutator(g2, g1)
    return (-1j / hbar) * s - k / hbar**2


def _exponent_iserles4_gauss(h, dt, hbar):
    g1, g2 = h[GAUSS2_LO], h[GAUSS2_HI]
    theta = _exponent_blanes4_gauss(h, dt, hbar)
    triple = (dt**3 / 80.0) * commutator(g2 - g1, commutator(g2, g1))
    return theta + (1j / hbar**3) * triple


def _exponent_blanes6_gauss(h, dt, hbar):
    # Built from the rescaled generator A = -i H / hbar so that the term mixing
    # 3- and 4-fold commutators carries the right power of hbar in each part.
    a1 = (-1j / hbar) * h[GAUSS3_LO]
    a2 = (-1j / hbar) * h[0.5]
    a3 = (-1j / hbar) * h[GAUSS3_HI]
    b0 = (5.0 / 18.0) * (a1 + a3) + (4.0 / 9.0) * a2
    b1 = (math.sqrt(15.0) / 36.0) * (a3 - a1)
    b2 = (1.0 / 24.0) * (a1 + a3)
    m1 = dt * b0
    m2 = dt**2 * commutator(b1, 3.0 * b0 - 12.0 * b2)
    m34 = (3.0 / 10.0) * dt * commutator(b1, m2) + dt**2 * commutator(
        b0, commutator(b0, (dt / 2.0) * b2 - m2 / 120.0)
    )
    return m1 + 0.5 * m2 + m34


_EXPONENT_BUILDERS: dict[MethodId, Callable] = {
    MethodId.ME2: _exponent_me2,
    MethodId.ME3: _exponent_me3,
    MethodId.ME4_FULL: lambda h, dt, hbar: _exponent_me4(h, dt, hbar, with_triple=True),
    MethodId.ME4_NC: lambda h, dt, hbar: _exponent_me4(h, dt, hbar, with_triple=False),
    MethodId.ME6: _exponent_me6,
    MethodId.BLANES4: _exponent_blanes4,
    MethodId.BLANES4_GAUSS: _exponent_blanes4_gauss,
    MethodId.ISERLES4_GAUSS: _exponent_iserles4_gauss,
    MethodId.BLANES6_GAUSS: _exponent_blanes6_gauss,
}


def step(
    method: MethodId,
    sampler: Callable[[float], Array],
    t_k: float,
    dt: float,
    ctx: StepContext = DEFAULT_CONTEXT,
) -> Array:
    """Unitary propagator over ``[t_k, t_k + dt]``; negative ``dt`` steps backward."""
    if dt == 0.0:
        raise PreconditionError("step size dt must be nonzero")
    samples = {node: sampler(t_k + node * dt) for node in sample_nodes(method)}
    theta = exponent(method, samples, dt, ctx)
    return expm_antihermitian(theta, ctx.expm_tolerance)
