"""Lossy dimerized lattice with nonlinear hopping terms.

The lattice is a chain of unit cells m in [-N, N], each holding a lossy
site A (amplitude a_m, loss rate gamma_a) and a neutral site B (amplitude
b_m).  Couplings are parameterized by the imbalance delta_g: the intracell
coupling is mu = 0.5 - delta_g and the intercell coupling nu = 0.5 + delta_g
(both sign-flipped when ``negate_linear`` is set).  Six model kinds share
this skeleton and differ only in the Kerr-type shift (strength U) that is
subtracted from one family of couplings:

    Linear   da_m/dt = -gamma_a a_m + i mu b_m + i nu b_{m-1}
             db_m/dt = i mu a_m + i nu a_{m+1}
    A        intercell shift xi_m   = U (|a_m|^2 + |b_{m-1}|^2)
    B        intracell shift zeta_m = U (|a_m|^2 + |b_m|^2)
    C        intercell shift chi_m  = U |a_m|^2
    D        intracell shift chi_m  = U |a_m|^2
    E        intercell shift eta_m  = U |b_m|^2   (on the bond b_m <-> a_{m+1})

Every shift multiplies both directions of its bond identically, so the norm
obeys d<psi|psi>/dt = -sum_m 2 gamma_a |a_m|^2 for all six kinds, and the
accumulated per-cell decay integrals form an exit-probability distribution
over cells.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

__all__ = [
    "ModelKind",
    "ModelParams",
    "LatticeState",
    "SingleSite",
    "CustomState",
    "ParameterError",
    "LatticeIndexError",
    "make_params",
    "build_state",
    "nonlinear_shift",
    "shift_profile",
    "rhs",
    "effective_contrast",
    "contrast_profile",
    "winding_number",
]


class ParameterError(ValueError):
    """A model or simulation parameter is outside its allowed domain."""


class LatticeIndexError(IndexError):
    """A cell index falls outside the lattice range [-N, N]."""


class ModelKind(str, enum.Enum):
    LINEAR = "Linear"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"

    @classmethod
    def parse(cls, name: str) -> "ModelKind":
        key = name.strip().lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ParameterError(f"unknown model kind {name!r}; expected one of "
                             f"{', '.join(k.value for k in cls)}")


# integer codes used by the jitted kernels
_KIND_CODE = {
    ModelKind.LINEAR: 0,
    ModelKind.A: 1,
    ModelKind.B: 2,
    ModelKind.C: 3,
    ModelKind.D: 4,
    ModelKind.E: 5,
}


@dataclass(frozen=True)
class ModelParams:
    """Couplings and nonlinearity of one lattice model.

    mu and nu are derived from delta_g; construct through :func:`make_params`
    so the relation stays exact.
    """

    kind: ModelKind
    delta_g: float
    mu: float
    nu: float
    gamma_a: float
    U: float
    negate_linear: bool = False

    def __post_init__(self):
        if abs(self.delta_g) > 0.5:
            raise ParameterError(f"delta_g={self.delta_g} outside [-0.5, 0.5]")
        if self.gamma_a < 0:
            raise ParameterError(f"gamma_a={self.gamma_a} must be >= 0")
        if self.U < 0:
            raise ParameterError(f"U={self.U} must be >= 0")
        sign = -1.0 if self.negate_linear else 1.0
        if self.mu != sign * (0.5 - self.delta_g) or self.nu != sign * (0.5 + self.delta_g):
            raise ParameterError("mu, nu inconsistent with delta_g; use make_params()")

    @property
    def code(self) -> int:
        return _KIND_CODE[self.kind]


def make_params(kind: ModelKind | str, delta_g: float, gamma_a: float,
                U: float = 0.0, negate_linear: bool = False) -> ModelParams:
    """Build model parameters from the coupling imbalance delta_g.

    mu = 0.5 - delta_g and nu = 0.5 + delta_g (negated when negate_linear).
    The Linear kind has no nonlinear term; any U it carries is inert.
    """
    if isinstance(kind, str):
        kind = ModelKind.parse(kind)
    if abs(delta_g) > 0.5:
        raise ParameterError(f"delta_g={delta_g} outside [-0.5, 0.5]")
    if gamma_a < 0:
        raise ParameterError(f"gamma_a={gamma_a} must be >= 0")
    if U < 0:
        raise ParameterError(f"U={U} must be >= 0")
    sign = -1.0 if negate_linear else 1.0
    return ModelParams(kind=kind, delta_g=float(delta_g),
                       mu=sign * (0.5 - float(delta_g)),
                       nu=sign * (0.5 + float(delta_g)),
                       gamma_a=float(gamma_a), U=float(U),
                       negate_linear=bool(negate_linear))


@dataclass
class LatticeState:
    """Complex amplitudes and accumulated decay over cells m in [-N, N].

    decay[m] holds the integral of 2 gamma_a |a_m|^2 from 0 to t, i.e. the
    probability that the excitation has exited through cell m so far.
    """

    half_width: int
    a: np.ndarray
    b: np.ndarray
    decay: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        n = 2 * self.half_width + 1
        self.a = np.ascontiguousarray(self.a, dtype=np.complex128)
        self.b = np.ascontiguousarray(self.b, dtype=np.complex128)
        self.decay = np.ascontiguousarray(self.decay, dtype=np.float64)
        if self.a.shape != (n,) or self.b.shape != (n,) or self.decay.shape != (n,):
            raise ParameterError(f"state arrays must have shape ({n},) for half_width "
                                 f"{self.half_width}")

    @property
    def cells(self) -> np.ndarray:
        """Cell indices m = -N .. N."""
        return np.arange(-self.half_width, self.half_width + 1)

    def index(self, m: int) -> int:
        if m < -self.half_width or m > self.half_width:
            raise LatticeIndexError(f"cell {m} outside [-{self.half_width}, {self.half_width}]")
        return m + self.half_width

    def norm(self) -> float:
        """Total occupation sum |a|^2 + |b|^2."""
        return float(np.sum(self.a.real**2 + self.a.imag**2
                            + self.b.real**2 + self.b.imag**2))

    def total_decay(self) -> float:
        return float(self.decay.sum())

    def copy(self) -> "LatticeState":
        return LatticeState(self.half_width, self.a.copy(), self.b.copy(),
                            self.decay.copy(), self.t)


@dataclass(frozen=True)
class SingleSite:
    """Unit excitation on one site: sublattice 'a' (lossy) or 'b' (neutral)."""

    cell: int = 0
    sublattice: str = "b"

    def __post_init__(self):
        if self.sublattice not in ("a", "b"):
            raise ParameterError(f"sublattice must be 'a' or 'b', got {self.sublattice!r}")


@dataclass(frozen=True)
class CustomState:
    """Arbitrary superposition given as (cell, sublattice, amplitude) entries.

    Amplitudes are normalized to unit total occupation when the state is built.
    """

    entries: tuple[tuple[int, str, complex], ...]

    def __post_init__(self):
        if not self.entries:
            raise ParameterError("custom initial state needs at least one entry")
        for (_, sub, _) in self.entries:
            if sub not in ("a", "b"):
                raise ParameterError(f"sublattice must be 'a' or 'b', got {sub!r}")
        if all(amp == 0 for (_, _, amp) in self.entries):
            raise ParameterError("custom initial state has zero norm")


InitialStateSpec = SingleSite | CustomState


def build_state(spec: InitialStateSpec, half_width: int) -> LatticeState:
    """Materialize an initial-state spec on a lattice of the given half width."""
    n = 2 * half_width + 1
    a = np.zeros(n, dtype=np.complex128)
    b = np.zeros(n, dtype=np.complex128)
    state = LatticeState(half_width, a, b, np.zeros(n))
    if isinstance(spec, SingleSite):
        i = state.index(spec.cell)
        (a if spec.sublattice == "a" else b)[i] = 1.0
    else:
        for (cell, sub, amp) in spec.entries:
            i = state.index(cell)
            (a if sub == "a" else b)[i] += complex(amp)
        nrm = np.sqrt(np.sum(np.abs(a) ** 2 + np.abs(b) ** 2))
        if nrm == 0:
            raise ParameterError("custom initial state has zero norm")
        a /= nrm
        b /= nrm
    return state


@numba.njit(cache=True)
def _abs2(z):
    return z.real * z.real + z.imag * z.imag


@numba.njit(cache=True)
def rhs_kernel(code, mu, nu, gamma_a, U, a, b, da, db, ddecay):
    """Write the equations of motion for (a, b, decay) into da, db, ddecay.

    Open boundaries: neighbors beyond the array contribute zero.  Every
    branch routes through the same combining expressions so that U = 0
    reproduces the Linear kind bit for bit.
    """
    n = a.shape[0]
    for i in range(n):
        b_left = b[i - 1] if i > 0 else 0.0j    # b_{m-1}
        a_right = a[i + 1] if i < n - 1 else 0.0j  # a_{m+1}
        if code == 0:    # Linear
            c_in = mu
            c_left = nu
            c_right = nu
        elif code == 1:  # A: intercell, both bond endpoints
            c_in = mu
            c_left = nu - U * (_abs2(a[i]) + _abs2(b_left))
            c_right = nu - U * (_abs2(a_right) + _abs2(b[i]))
        elif code == 2:  # B: intracell, both bond endpoints
            c_in = mu - U * (_abs2(a[i]) + _abs2(b[i]))
            c_left = nu
            c_right = nu
        elif code == 3:  # C: intercell, lossy endpoint only
            c_in = mu
            c_left = nu - U * _abs2(a[i])
            c_right = nu - U * _abs2(a_right)
        elif code == 4:  # D: intracell, lossy endpoint only
            c_in = mu - U * _abs2(a[i])
            c_left = nu
            c_right = nu
        else:            # E: intercell, neutral endpoint only
            c_in = mu
            c_left = nu - U * _abs2(b_left)
            c_right = nu - U * _abs2(b[i])
        da[i] = -gamma_a * a[i] + 1j * (c_in * b[i] + c_left * b_left)
        db[i] = 1j * (c_in * a[i] + c_right * a_right)
        ddecay[i] = 2.0 * gamma_a * _abs2(a[i])


def rhs(params: ModelParams, state: LatticeState):
    """Time derivatives (da/dt, db/dt, d(decay)/dt) for the given model."""
    da = np.empty_like(state.a)
    db = np.empty_like(state.b)
    ddecay = np.empty_like(state.decay)
    rhs_kernel(params.code, params.mu, params.nu, params.gamma_a, params.U,
               state.a, state.b, da, db, ddecay)
    return da, db, ddecay


def nonlinear_shift(params: ModelParams, state: LatticeState, m: int) -> float:
    """Kerr shift attached to cell m: xi_m, zeta_m, chi_m or eta_m by kind.

    For the intercell kinds the shift belongs to a bond: xi_m/chi_m sit on
    the bond b_{m-1} <-> a_m, eta_m on the bond b_m <-> a_{m+1}.
    """
    i = state.index(m)
    kind = params.kind
    if kind is ModelKind.LINEAR:
        return 0.0
    aa = abs(state.a[i]) ** 2
    bb = abs(state.b[i]) ** 2
    if kind is ModelKind.A:
        bb_left = abs(state.b[i - 1]) ** 2 if i > 0 else 0.0
        return params.U * (aa + bb_left)
    if kind is ModelKind.B:
        return params.U * (aa + bb)
    if kind in (ModelKind.C, ModelKind.D):
        return params.U * aa
    return params.U * bb  # E


def shift_profile(params: ModelParams, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vector of nonlinear shifts over all cells, from raw amplitude arrays."""
    aa = a.real**2 + a.imag**2
    bb = b.real**2 + b.imag**2
    kind = params.kind
    if kind is ModelKind.LINEAR:
        return np.zeros_like(aa)
    if kind is ModelKind.A:
        bb_left = np.zeros_like(bb)
        bb_left[1:] = bb[:-1]
        return params.U * (aa + bb_left)
    if kind is ModelKind.B:
        return params.U * (aa + bb)
    if kind in (ModelKind.C, ModelKind.D):
        return params.U * aa
    return params.U * bb  # E


def contrast_profile(params: ModelParams, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Effective coupling contrast Z_m over all cells.

    For the intercell kinds (Linear, A, C, E) this is |nu_eff,m| - |mu| with
    nu_eff,m the effective coupling on the bond entering cell m from the
    left; for the intracell kinds (B, D) the analogue |nu| - |mu_eff,m|.
    Positive Z_m predicts hopping into the next cell to the right.
    """
    shifts = shift_profile(params, a, b)
    kind = params.kind
    if kind in (ModelKind.LINEAR, ModelKind.A, ModelKind.C):
        return np.abs(params.nu - shifts) - abs(params.mu)
    if kind is ModelKind.E:
        # eta_{m-1} acts on the bond between cells m-1 and m
        into = np.zeros_like(shifts)
        into[1:] = shifts[:-1]
        return np.abs(params.nu - into) - abs(params.mu)
    return abs(params.nu) - np.abs(params.mu - shifts)  # B, D


def effective_contrast(params: ModelParams, state: LatticeState, m: int) -> float:
    """Contrast Z_m at a single cell; see :func:`contrast_profile`."""
    i = state.index(m)
    return float(contrast_profile(params, state.a, state.b)[i])


def winding_number(mu: float, nu: float) -> int:
    """Winding of h(k) = mu + nu e^{ik} around the origin for k in [0, 2pi).

    Computed by accumulating the phase of h along a k grid, refining the grid
    until every increment is unambiguous.  Degenerate couplings |mu| = |nu|
    close the gap (h passes through the origin) and are rejected.
    """
    if mu == 0.0 and nu == 0.0:
        raise ParameterError("winding undefined for mu = nu = 0")
    if abs(mu) == abs(nu):
        raise ParameterError(f"gap closes at |mu| = |nu| = {abs(mu)}; winding undefined")
    k_count = 1024
    while k_count <= 2**22:
        k = np.linspace(0.0, 2.0 * np.pi, k_count + 1)
        h = mu + nu * np.exp(1j * k)
        increments = np.angle(h[1:] / h[:-1])
        if np.max(np.abs(increments)) < 1.5:
            return int(round(increments.sum() / (2.0 * np.pi)))
        k_count *= 2
    raise ParameterError("k-grid refinement exhausted; couplings too close to degeneracy")
