"""
Shared domain types and small dense-matrix helpers.

Units used throughout the package: time in ns, angular frequency in rad/ns,
decay widths in 1/ns. Qubit matrices are always written in the ordered
basis (|+1>, |-1>), so entry [0, 1] is the coherence <+1|rho|-1>.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-12
TRACE_TOL = 1e-12
UNITARITY_TOL = 1e-9
NARROW_WIDTH_RATIO = 0.05


class ParameterError(ValueError):
    """Raised when a physical parameter is out of its admissible range.

    The offending field name is kept on ``.field``.
    """

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class UnequalWidthsError(ValueError):
    """Raised by closed forms that only exist for gamma_plus == gamma_minus."""


class Polarization(enum.Enum):
    """Linear polarization selected by the detector filter."""

    H = "H"
    V = "V"

    @property
    def sign_minus(self) -> int:
        # sign carried by the |+1> branch; the |-1> branch is +1 for both filters
        return 1 if self is Polarization.H else -1

    @property
    def sign_plus(self) -> int:
        return 1

    @classmethod
    def parse(cls, value: "Polarization | str") -> "Polarization":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ParameterError("filter", f"expected H or V, got {value!r}") from None


class Channel(enum.Enum):
    """Decay channel of the excited level.

    PLUS is |A> -> |+1> (sigma- photon), MINUS is |A> -> |-1> (sigma+ photon).
    """

    PLUS = "plus"
    MINUS = "minus"

    def frequency(self, p: "SystemParams") -> float:
        return p.omega_plus if self is Channel.PLUS else p.omega_minus

    def width(self, p: "SystemParams") -> float:
        return p.gamma_plus if self is Channel.PLUS else p.gamma_minus

    def filter_sign(self, pol: Polarization) -> int:
        """Sign picked up by this channel's detector amplitude behind `pol`."""
        return pol.sign_minus if self is Channel.PLUS else pol.sign_plus

    @property
    def index(self) -> int:
        return 0 if self is Channel.PLUS else 1


CHANNELS = (Channel.PLUS, Channel.MINUS)


def _check_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(name, f"not a real number: {value!r}") from None
    if not math.isfinite(value):
        raise ParameterError(name, f"must be finite, got {value}")
    return value


@dataclass(frozen=True)
class SystemParams:
    """Emitter configuration: mean optical frequency, Zeeman splitting, partial widths.

    Parameters
    ----------
    omega : float
        Mean transition frequency, rad/ns. The channel frequencies are
        ``omega +/- delta_omega / 2``.
    delta_omega : float
        Splitting between the two channel frequencies, rad/ns.
    gamma_plus, gamma_minus : float
        Partial widths of the decays into |+1> and |-1>, 1/ns.
    """

    omega: float
    delta_omega: float
    gamma_plus: float
    gamma_minus: float

    def __post_init__(self):
        for name in ("omega", "delta_omega", "gamma_plus", "gamma_minus"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))
        if self.omega <= 0:
            raise ParameterError("omega", f"must be > 0, got {self.omega}")
        if self.delta_omega < 0:
            raise ParameterError("delta_omega", f"must be >= 0, got {self.delta_omega}")
        if self.gamma_plus <= 0:
            raise ParameterError("gamma_plus", f"must be > 0, got {self.gamma_plus}")
        if self.gamma_minus <= 0:
            raise ParameterError("gamma_minus", f"must be > 0, got {self.gamma_minus}")

    @classmethod
    def symmetric(cls, omega: float, delta_omega: float, gamma: float) -> "SystemParams":
        """Equal partial widths gamma/2 each."""
        return cls(omega, delta_omega, gamma / 2, gamma / 2)

    @classmethod
    def from_lab_units(
        cls,
        gamma_inv_ns: float = 12.0,
        delta_omega_mhz: float = 122.0,
        omega: float = 2 * math.pi * 471e3,
        branching_plus: float = 0.5,
    ) -> "SystemParams":
        """Build from lifetime (ns) and a splitting quoted in MHz (times 2 pi)."""
        gamma_inv_ns = _check_finite("gamma_inv_ns", gamma_inv_ns)
        if gamma_inv_ns <= 0:
            raise ParameterError("gamma_inv_ns", f"must be > 0, got {gamma_inv_ns}")
        if not 0 < branching_plus < 1:
            raise ParameterError("branching_plus", f"must lie in (0, 1), got {branching_plus}")
        gamma = 1.0 / gamma_inv_ns
        # MHz -> rad/ns: 2 pi * f[MHz] * 1e-3
        dw = 2 * math.pi * delta_omega_mhz * 1e-3
        return cls(omega, dw, gamma * branching_plus, gamma * (1 - branching_plus))

    @property
    def gamma(self) -> float:
        return self.gamma_plus + self.gamma_minus

    @property
    def omega_plus(self) -> float:
        return self.omega + self.delta_omega / 2

    @property
    def omega_minus(self) -> float:
        return self.omega - self.delta_omega / 2

    @property
    def splitting_ratio(self) -> float:
        """delta_omega / gamma."""
        return self.delta_omega / self.gamma

    @property
    def equal_widths(self) -> bool:
        return math.isclose(self.gamma_plus, self.gamma_minus, rel_tol=1e-12, abs_tol=0.0)

    @property
    def narrow_width(self) -> bool:
        """True in the regime where the mode-lattice oracle is meaningful."""
        return (self.gamma / self.omega < NARROW_WIDTH_RATIO
                and self.delta_omega / self.omega < NARROW_WIDTH_RATIO)

    def require_equal_widths(self, what: str) -> None:
        if not self.equal_widths:
            raise UnequalWidthsError(
                f"{what} is only defined for equal partial widths "
                f"(gamma_plus={self.gamma_plus}, gamma_minus={self.gamma_minus})")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        return cls(**{k: d[k] for k in ("omega", "delta_omega", "gamma_plus", "gamma_minus")})


def validate_params(p: SystemParams) -> SystemParams:
    """Re-check every invariant of `p` and return it unchanged."""
    if not isinstance(p, SystemParams):
        raise TypeError(f"expected SystemParams, got {type(p).__name__}")
    # __post_init__ already enforced these; repeated for instances built by
    # object.__setattr__ tricks or unpickling of foreign data
    SystemParams(p.omega, p.delta_omega, p.gamma_plus, p.gamma_minus)
    return p


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, QubitDensityMatrix):
        return m.elements
    a = np.asarray(m, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    return a


def hermitian_2x2_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a 2x2 Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray, shape (2,)
        Real, sorted in descending order.
    eigenvectors : ndarray, shape (2, 2)
        Column ``i`` is the unit eigenvector of ``eigenvalues[i]``.
    """
    a = _as_matrix(m)
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian within tolerance")
    d0 = a[0, 0].real
    d1 = a[1, 1].real
    b = 0.5 * (a[0, 1] + np.conj(a[1, 0]))
    mean = 0.5 * (d0 + d1)
    radius = math.hypot(0.5 * (d0 - d1), abs(b))
    lam = np.array([mean + radius, mean - radius])

    # pick the better conditioned of the two null-vector formulas
    if d0 >= d1:
        v = np.array([lam[0] - d1, np.conj(b)], dtype=complex)
    else:
        v = np.array([b, lam[0] - d0], dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        v = np.array([1.0, 0.0], dtype=complex)
    else:
        v = v / nv
    w = np.array([-np.conj(v[1]), np.conj(v[0])])
    return lam, np.column_stack([v, w])


@dataclass(frozen=True)
class QubitDensityMatrix:
    """Possibly sub-normalized 2x2 density matrix over (|+1>, |-1>).

    Trace below one is legal: it is the emitted or detected population.
    """

    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.elements, dtype=complex)
        if a.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("density matrix has non-finite entries")
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        lam, _ = hermitian_2x2_eigen(a)
        if lam[1] < -PSD_TOL:
            raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {lam[1]:.3e})")
        tr = a[0, 0].real + a[1, 1].real
        if not -TRACE_TOL <= tr <= 1 + TRACE_TOL:
            raise ValueError(f"trace {tr} outside [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "elements", a)

    @classmethod
    def from_entries(cls, rho_pp: float, rho_mm: float, coherence: complex) -> "QubitDensityMatrix":
        """Build from the two populations and the [0, 1] coherence."""
        c = complex(coherence)
        return cls(np.array([[rho_pp, c], [c.conjugate(), rho_mm]], dtype=complex))

    @classmethod
    def zero(cls) -> "QubitDensityMatrix":
        return cls(np.zeros((2, 2), dtype=complex))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.elements, dtype=dtype)

    @property
    def trace(self) -> float:
        return float(self.elements[0, 0].real + self.elements[1, 1].real)

    @property
    def coherence(self) -> complex:
        return complex(self.elements[0, 1])

    @property
    def populations(self) -> tuple[float, float]:
        return float(self.elements[0, 0].real), float(self.elements[1, 1].real)

    def eigen(self):
        return hermitian_2x2_eigen(self.elements)

    def eigenvalues(self) -> np.ndarray:
        return self.eigen()[0]

    def normalized(self) -> "QubitDensityMatrix":
        tr = self.trace
        if tr <= 0:
            raise ValueError("cannot normalize a matrix with zero trace")
        return QubitDensityMatrix(self.elements / tr)

    def purity(self) -> float:
        """Tr(rho~^2) of the trace-normalized matrix."""
        tr = self.trace
        if tr <= 0:
            raise ValueError("purity undefined for zero trace")
        a = self.elements / tr
        return float(np.real(np.trace(a @ a)))

    def normalized_coherence_magnitude(self) -> float:
        """|rho_01| / sqrt(rho_00 rho_11); 1 for a pure equal-weight state."""
        p0, p1 = self.populations
        if p0 <= 0 or p1 <= 0:
            return 0.0
        return abs(self.coherence) / math.sqrt(p0 * p1)

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.elements - _as_matrix(other))) <= atol)


@dataclass(frozen=True)
class ThreeLevelState:
    """Emitter density matrix after tracing out the field: excited weight plus qubit block."""

    excited_population: float
    qubit_block: QubitDensityMatrix

    def __post_init__(self):
        pe = float(self.excited_population)
        if not -TRACE_TOL <= pe <= 1 + TRACE_TOL:
            raise ValueError(f"excited population {pe} outside [0, 1]")
        total = pe + self.qubit_block.trace
        if abs(total - 1.0) > UNITARITY_TOL:
            raise ValueError(f"total trace {total} differs from 1")
        object.__setattr__(self, "excited_population", pe)

    @property
    def total_trace(self) -> float:
        return self.excited_population + self.qubit_block.trace

    def spectrum(self) -> np.ndarray:
        """The three eigenvalues: excited weight followed by the qubit block's."""
        return np.concatenate([[self.excited_population], self.qubit_block.eigenvalues()])
