"""Fourier analysis on the Boolean hypercube."""
import math

import numpy as np

from entlab.core.config import settings
from entlab.core.exceptions import BudgetExceededError, InvalidStateError
from entlab.core.logger import get_logger
from entlab.services.qcore_service import qcore
from entlab.models.schemas import AuditResult
from entlab.models.spectra import (
    BooleanFunctionTable,
    FourierSpectrum,
    MatrixSpectrum,
    MatrixValuedFunction,
    popcounts,
)

logger = get_logger(__name__)

MAX_SCALAR_VARIABLES = 24
MAX_MATRIX_VARIABLES = 12
MAX_MATRIX_QUBITS = 4


def butterfly(values: np.ndarray) -> np.ndarray:
    """
    Unnormalized Walsh-Hadamard transform along axis 0.

    Computes sum_x (-1)^{|S & x|} v[x] for every mask S with n stages of
    in-place sums and differences.
    """
    data = np.array(values, copy=True)
    size = data.shape[0]
    if size & (size - 1):
        raise InvalidStateError(f"Transform length {size} is not a power of two")
    h = 1
    while h < size:
        view = data.reshape((size // (2 * h), 2, h) + data.shape[1:])
        low = view[:, 0].copy()
        view[:, 0] += view[:, 1]
        view[:, 1] = low - view[:, 1]
        h *= 2
    return data


class FourierService:
    """Scalar and matrix-valued Fourier transforms and level-k audits."""

    @property
    def tolerance(self) -> float:
        return settings.completeness_atol

    def fourier(self, f: BooleanFunctionTable) -> FourierSpectrum:
        """
        Fourier coefficients f_hat(S) = E_x[f(x) chi_S(x)].

        Args:
            f: Function table on n <= 24 variables

        Returns:
            Spectrum indexed by subset bitmask
        """
        if f.n > MAX_SCALAR_VARIABLES:
            raise BudgetExceededError(f"Fourier transform limited to n <= {MAX_SCALAR_VARIABLES}")
        return FourierSpectrum(f.n, butterfly(f.values) / (1 << f.n))

    def inverse(self, spectrum: FourierSpectrum) -> BooleanFunctionTable:
        """f(x) = sum_S f_hat(S) chi_S(x)."""
        return BooleanFunctionTable(spectrum.n, butterfly(spectrum.coefficients))

    def level_mass(self, spectrum: FourierSpectrum, ell: int) -> float:
        """L_{1,ell}: sum of |f_hat(S)| over |S| = ell."""
        if not 0 <= ell <= spectrum.n:
            raise InvalidStateError(f"Level {ell} outside [0, {spectrum.n}]")
        return float(np.sum(np.abs(spectrum.level(ell))))

    def level_weight(self, spectrum: FourierSpectrum, ell: int) -> float:
        """Sum of f_hat(S)^2 over |S| = ell."""
        return float(np.sum(spectrum.level(ell) ** 2))

    def level_k_audit(self, f: BooleanFunctionTable, ell: int) -> AuditResult:
        """
        Level-ell weight against 4 a^2 (2e ln(e / a^{1/ell}))^ell with a = E|f|.

        Args:
            f: Bounded function table
            ell: Level, at least 1

        Returns:
            Audit with lhs, rhs and whether lhs <= rhs + tolerance
        """
        if not f.bounded:
            raise InvalidStateError("Level-k audit needs a table flagged bounded")
        if not 1 <= ell <= f.n:
            raise InvalidStateError(f"Level {ell} outside [1, {f.n}]")
        lhs = self.level_weight(self.fourier(f), ell)
        alpha = f.l1_mean()
        if alpha == 0.0:
            rhs = 0.0
        else:
            rhs = 4 * alpha**2 * (2 * math.e * (1.0 - math.log(alpha) / ell)) ** ell
        return AuditResult(
            check="scalar_level_k",
            lhs=lhs,
            rhs=rhs,
            holds=lhs <= rhs + self.tolerance,
            details={"n": f.n, "ell": ell, "alpha": alpha},
        )

    def matrix_fourier(self, F: MatrixValuedFunction) -> MatrixSpectrum:
        """Entrywise transform rho_hat(S) = E_x[F(x) chi_S(x)]."""
        if F.n > MAX_MATRIX_VARIABLES or F.c > MAX_MATRIX_QUBITS:
            raise BudgetExceededError(
                f"Matrix transform limited to n <= {MAX_MATRIX_VARIABLES}, c <= {MAX_MATRIX_QUBITS}"
            )
        return MatrixSpectrum(F.n, butterfly(F.values) / (1 << F.n))

    def matrix_inverse(self, spectrum: MatrixSpectrum) -> np.ndarray:
        return butterfly(spectrum.coefficients)

    def hermitian_trace_norms(self, stack: np.ndarray) -> np.ndarray:
        """Tr|A| for each Hermitian matrix in a stack."""
        if stack.shape[0] == 0:
            return np.zeros(0)
        hermitian = (stack + np.conj(np.swapaxes(stack, -1, -2))) / 2
        return np.sum(np.abs(np.linalg.eigvalsh(hermitian)), axis=-1)

    def padded_dimension(self, c: int, ell: int) -> int:
        """c itself when ell <= 2 ln2 c, else c + ceil(ell / (2 ln 2))."""
        if ell <= 2 * math.log(2) * c:
            return c
        return c + math.ceil(ell / (2 * math.log(2)))

    def matrix_level_k_audit(self, F: MatrixValuedFunction, ell: int) -> AuditResult:
        """
        Sum over |S| = ell of Tr(|rho_hat_S|)^2 against ((2e ln2) c'' / ell)^ell.

        Args:
            F: Density-matrix valued function on c qubits
            ell: Level, at least 1

        Returns:
            Audit result; c'' is padded when ell exceeds 2 ln2 c
        """
        if not 1 <= ell <= F.n:
            raise InvalidStateError(f"Level {ell} outside [1, {F.n}]")
        spectrum = self.matrix_fourier(F)
        lhs = float(np.sum(self.hermitian_trace_norms(spectrum.level(ell)) ** 2))
        c_eff = self.padded_dimension(F.c, ell)
        rhs = (2 * math.e * math.log(2) * c_eff / ell) ** ell
        return AuditResult(
            check="matrix_level_k",
            lhs=lhs,
            rhs=rhs,
            holds=lhs <= rhs + self.tolerance,
            details={"n": F.n, "c": F.c, "ell": ell, "c_effective": c_eff},
        )

    def level_trace_norm_sums(self, spectrum: MatrixSpectrum) -> np.ndarray:
        """Per-subset Tr|rho_hat_S| as a flat array indexed by mask."""
        return self.hermitian_trace_norms(spectrum.coefficients)

    def random_matrix_function(self, n: int, c: int, rng: np.random.Generator) -> MatrixValuedFunction:
        values = [qcore.random_density_matrix(c, rng, rank=int(rng.integers(1, (1 << c) + 1))) for _ in range(1 << n)]
        return MatrixValuedFunction(n, values)

    def level_masks(self, n: int, ell: int) -> np.ndarray:
        return np.flatnonzero(popcounts(n) == ell)


# Global instance
fourier_service = FourierService()
