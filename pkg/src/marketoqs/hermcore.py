"""Dense Hermitian matrix helpers: validation, eigensolvers, arithmetic.

Matrices are plain ``numpy`` arrays (complex128 by default, float64 accepted
wherever the content is real).  Tolerances used across the package live in a
single :class:`Tolerances` record so tests can tighten or relax them in one
place.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

__all__ = [
    "Tolerances",
    "TOL",
    "NumericalFailure",
    "ValidationReport",
    "as_matrix",
    "hermitian_residual",
    "validate_density",
    "eig_hermitian",
    "householder_tridiagonal",
    "tridiagonal_ql",
    "add_scaled",
]


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    trace: float = 1e-9
    psd: float = 1e-9
    eig_reconstruction: float = 1e-10  # multiplied by dim
    band_sum: float = 1e-12
    drift: float = 1e-12
    entropy_clamp: float = 1e-14
    expectation_imag: float = 1e-10
    prob_sum: float = 1e-12
    run_trace: float = 1e-6
    run_psd: float = 1e-6
    ql_iterations_per_dim: int = 50


TOL = Tolerances()


class NumericalFailure(RuntimeError):
    """Raised when an iteration fails to converge or a run leaves the set of
    density matrices (trace or positivity breach)."""


@dataclass
class ValidationReport:
    hermitian: bool
    hermitian_residual: float
    trace_error: float
    min_eig: float
    failures: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.valid


def as_matrix(m) -> np.ndarray:
    """Return the underlying square array of ``m`` (array or ``MarketState``)."""
    a = getattr(m, "matrix", m)
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_residual(m) -> float:
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def validate_density(m, tol: Tolerances = TOL) -> ValidationReport:
    """Check the density-matrix conditions without modifying ``m``.

    The eigenvalue check runs on the Hermitian part, so a non-Hermitian input
    still gets a meaningful ``min_eig``.
    """
    a = as_matrix(m)
    res = hermitian_residual(a)
    herm = res <= tol.hermitian
    trace_error = float(abs(np.trace(a) - 1.0))
    sym = 0.5 * (a + a.conj().T)
    min_eig = float(np.linalg.eigvalsh(sym)[0]) if a.size else 0.0

    failures = []
    if not herm:
        failures.append(f"not Hermitian (residual {res:.3e})")
    if trace_error > tol.trace:
        failures.append(f"trace error {trace_error:.3e}")
    if min_eig < -tol.psd:
        failures.append(f"negative eigenvalue {min_eig:.3e}")
    return ValidationReport(herm, res, trace_error, min_eig, failures)


def householder_tridiagonal(m, vectors: bool = True):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns ``(d, e, q)`` with ``m = q @ T @ q.conj().T`` where ``T`` has
    diagonal ``d`` and off-diagonal ``e`` (both real, ``e >= 0``).  ``q`` is
    ``None`` when ``vectors`` is false.
    """
    a = np.array(as_matrix(m), dtype=complex)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    q = np.eye(n, dtype=complex) if vectors else None

    for k in range(n - 2):
        x = a[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        # unit phase of x[0]; angle() stays finite for subnormal entries
        phase = np.exp(1j * np.angle(x[0])) if x[0] != 0 else 1.0
        # build v from x / |x| so its squares cannot underflow
        v = x / xnorm
        v[0] += phase
        v /= np.linalg.norm(v)

        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - np.vdot(v, p).real * v
        sub -= 2.0 * (np.outer(v, w.conj()) + np.outer(w, v.conj()))
        # column k below the diagonal collapses to -phase*|x| e_1
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = -phase * xnorm
        a[k, k + 1] = np.conj(a[k + 1, k])
        if vectors:
            qs = q[:, k + 1:]
            qs -= 2.0 * np.outer(qs @ v, v.conj())

    d = a.diagonal().real.copy()
    off = a.diagonal(-1).copy()
    e = np.abs(off)
    if vectors:
        # diagonal unitary making the off-diagonal real and non-negative
        phases = np.ones(n, dtype=complex)
        for k in range(n - 1):
            if e[k] > 0:
                phases[k + 1] = phases[k] * off[k] / e[k]
            else:
                phases[k + 1] = phases[k]
        q = q * phases[np.newaxis, :]
    return d, e, q


@numba.njit(cache=True)
def _tql_kernel(d, e, z, want_vectors, max_iter, floor):
    # implicit QL with Wilkinson shift; e[i] couples d[i] and d[i+1], e[n-1] is scratch.
    # Couplings below eps*|d| + floor count as zero (floor = eps*||T|| keeps
    # blocks of near-zero eigenvalues from stalling the shift).
    n = d.shape[0]
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd + floor:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > max_iter:
                return False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    for k in range(z.shape[0]):
                        f = z[k, i + 1]
                        z[k, i + 1] = s * z[k, i] + c * f
                        z[k, i] = c * z[k, i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return True


def tridiagonal_ql(d, e, z=None, max_iter: int | None = None):
    """Eigen-decompose a real symmetric tridiagonal matrix by implicit QL.

    ``d`` is the diagonal, ``e`` the off-diagonal (length ``n-1``).  When ``z``
    is given its columns are rotated along (pass the Householder ``q`` to get
    eigenvectors of the original matrix).  Results are sorted ascending.
    """
    d = np.array(d, dtype=float)
    n = d.shape[0]
    ework = np.zeros(n)
    ework[: n - 1] = e
    if max_iter is None:
        max_iter = TOL.ql_iterations_per_dim * max(n, 1)
    want = z is not None
    zwork = np.array(z, dtype=complex) if want else np.zeros((1, 1), dtype=complex)
    if want:
        # numba kernel works on real arrays; rotate real and imaginary parts alike
        zr = np.ascontiguousarray(np.concatenate([zwork.real, zwork.imag], axis=0))
    else:
        zr = np.zeros((1, 1))
    tnorm = float(np.abs(d).max() + 2.0 * np.abs(ework).max()) if n else 0.0
    ok = _tql_kernel(d, ework, zr, want, max_iter, np.finfo(float).eps * tnorm)
    if not ok:
        raise NumericalFailure(f"QL iteration did not converge within {max_iter} sweeps")
    order = np.argsort(d, kind="stable")
    d = d[order]
    if not want:
        return d, None
    rows = zwork.shape[0]
    zc = zr[:rows] + 1j * zr[rows:]
    return d, zc[:, order]


def eig_hermitian(m, vectors: bool = False, method: str = "lapack"):
    """Eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix.

    ``method="lapack"`` calls ``numpy.linalg.eigh``; ``method="householder"``
    uses the in-house Householder + implicit QL path.  Both return
    ``(w, v)`` when ``vectors`` is true, else ``w``.
    """
    a = as_matrix(m)
    if method == "lapack":
        try:
            if vectors:
                return np.linalg.eigh(a)
            return np.linalg.eigvalsh(a)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(str(exc)) from exc
    if method != "householder":
        raise ValueError(f"unknown eigensolver method {method!r}")
    if a.shape[0] == 0:
        return (np.zeros(0), np.zeros((0, 0), dtype=complex)) if vectors else np.zeros(0)
    d, e, q = householder_tridiagonal(a, vectors=vectors)
    w, v = tridiagonal_ql(d, e, q if vectors else None)
    return (w, v) if vectors else w


def add_scaled(dst, src, c: float) -> np.ndarray:
    """Return ``dst + c * src``.  Neither input is modified."""
    a = as_matrix(dst)
    b = as_matrix(src)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a + c * b
