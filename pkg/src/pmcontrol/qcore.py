"""Exact two-level quantum primitives.

Basis convention: ``sigma_z = diag(1, -1)``, ``|up> = (1, 0)``, ``|down> = (0, 1)``.
Fidelities below depend only on populations/overlaps, so the choice does not
affect any reported number.

States, density matrices and unitaries are plain ``numpy`` arrays of shape
``(2,)`` and ``(2, 2)``; nothing here mutates its inputs.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)

GATES = {
    "identity": I2,
    "pauli_x": SX,
    "pauli_y": SY,
    "pauli_z": SZ,
    "hadamard": HADAMARD,
}


class ContractViolation(ValueError):
    """An input broke a documented precondition (e.g. a non-Hermitian generator)."""


def is_hermitian(H, tol=HERMITIAN_TOL):
    H = np.asarray(H)
    return np.max(np.abs(H - H.conj().T)) <= tol * max(1.0, np.max(np.abs(H)))


def is_unitary(U, tol=UNITARY_TOL):
    U = np.asarray(U)
    return np.max(np.abs(U.conj().T @ U - I2)) <= tol


def normalize(psi):
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ContractViolation("cannot normalize the zero vector")
    return psi / norm


def density(psi):
    """Projector |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def bloch_vector(rho):
    """(x, y, z) with rho = (I + r.sigma)/2."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.real(np.trace(rho @ P)) for P in PAULIS])


def from_bloch(r):
    x, y, z = r
    return 0.5 * (I2 + x * SX + y * SY + z * SZ)


def pauli_components(H):
    """Return (h0, hx, hy, hz) with H = h0*I + hx*sx + hy*sy + hz*sz."""
    H = np.asarray(H, dtype=complex)
    return tuple(0.5 * np.real(np.trace(H @ P)) for P in (I2, SX, SY, SZ))


def expm_step(H, dt):
    """Exact ``exp(-i H dt)`` for a 2x2 Hermitian generator.

    Uses the Pauli decomposition ``H = h0 I + h.sigma`` so that
    ``exp(-i H dt) = e^{-i h0 dt} [cos(|h| dt) I - i sin(|h| dt) h.sigma/|h|]``.
    """
    if dt < 0:
        raise ContractViolation(f"dt must be non-negative, got {dt}")
    H = np.asarray(H, dtype=complex)
    if H.shape != (2, 2) or not is_hermitian(H):
        raise ContractViolation("expm_step requires a 2x2 Hermitian generator")
    h0, hx, hy, hz = pauli_components(H)
    norm = np.sqrt(hx * hx + hy * hy + hz * hz)
    theta = norm * dt
    # sin(theta)/norm written via sinc so that norm == 0 is regular
    s = dt * np.sinc(theta / np.pi)
    U = np.cos(theta) * I2 - 1j * s * (hx * SX + hy * SY + hz * SZ)
    return np.exp(-1j * h0 * dt) * U


def rotation(axis, angle):
    """exp(-i angle sigma_axis / 2) for axis in {'x', 'y', 'z'}."""
    P = {"x": SX, "y": SY, "z": SZ}[axis]
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * P


def state_fidelity(a, b):
    """|<a|b>|^2 for normalized pure states."""
    return float(np.clip(np.abs(np.vdot(a, b)) ** 2, 0.0, 1.0))


def mixed_fidelity(rho, psi):
    """<psi|rho|psi> for a density matrix and a pure target."""
    psi = np.asarray(psi, dtype=complex)
    value = np.real(np.vdot(psi, np.asarray(rho) @ psi))
    return float(np.clip(value, 0.0, 1.0))


def gate_fidelity(U, V):
    r"""Average gate fidelity of ``V`` with respect to the target ``U``.

    .. math::
        f_g = \frac12 + \frac13 \sum_{\kappa} \mathrm{Tr}\left(
              U \frac{\sigma_\kappa}{2} U^\dagger V \frac{\sigma_\kappa}{2} V^\dagger\right)

    Insensitive to a global phase on either argument.
    """
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    total = 0.0
    for P in PAULIS:
        A = U @ (0.5 * P) @ U.conj().T
        B = V @ (0.5 * P) @ V.conj().T
        total += np.real(np.trace(A @ B))
    return float(np.clip(0.5 + total / 3.0, 0.0, 1.0))


def gate_fidelity_from_overlap(overlap):
    """Same quantity via ``(2 + |Tr(U^dag V)|^2) / 6``; accepts arrays."""
    return (2.0 + np.abs(overlap) ** 2) / 6.0


def su2_matrix(a, b):
    """Build [[a, -b*], [b, a*]] from the two Cayley-Klein parameters."""
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=complex)
