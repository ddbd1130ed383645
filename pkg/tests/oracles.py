"""Independent reference computations used as test oracles.

Nothing here calls into leo_adiabatic: eigenvalues come from the cubic
formula, exponentials from Taylor series with scaling and squaring or from
the Pauli closed form, and time evolution from classical RK4.
"""
import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def expm_taylor(A, order=12):
    """exp(A) by scaling and squaring with a truncated Taylor series."""
    A = np.asarray(A, dtype=complex)
    norm = np.abs(A).sum(axis=0).max()
    k = max(0, int(np.ceil(np.log2(norm / 0.1))) if norm > 0 else 0)
    B = A / 2.0**k
    term = np.eye(A.shape[0], dtype=complex)
    out = term.copy()
    for n in range(1, order + 1):
        term = term @ B / n
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


def cubic_hermitian_eigvals(H):
    """Ascending eigenvalues of a 3x3 Hermitian matrix via the trigonometric cubic solution."""
    H = np.asarray(H, dtype=complex)
    q = np.trace(H).real / 3
    B = H - q * np.eye(3)
    p = np.sqrt(np.sum(np.abs(B) ** 2).real / 6)
    if p == 0:
        return np.array([q, q, q])
    C = B / p
    det = (C[0, 0] * (C[1, 1] * C[2, 2] - C[1, 2] * C[2, 1])
           - C[0, 1] * (C[1, 0] * C[2, 2] - C[1, 2] * C[2, 0])
           + C[0, 2] * (C[1, 0] * C[2, 1] - C[1, 1] * C[2, 0]))
    r = np.clip(det.real / 2, -1.0, 1.0)
    phi = np.arccos(r) / 3
    e1 = q + 2 * p * np.cos(phi)
    e3 = q + 2 * p * np.cos(phi + 2 * np.pi / 3)
    return np.sort([e1, 3 * q - e1 - e3, e3])


def pauli_exp(a0, a, t):
    """exp(-i (a0 + a . sigma) t) for a real 3-vector a."""
    a = np.asarray(a, dtype=float)
    n = np.linalg.norm(a)
    M = np.eye(2, dtype=complex) * np.cos(n * t)
    if n > 0:
        M = M - 1j * np.sin(n * t) * (a[0] * SX + a[1] * SY + a[2] * SZ) / n
    return np.exp(-1j * a0 * t) * M


def two_level_adiabatic_pauli(omega1, omega, f):
    """Pauli coefficients of [[-omega1/2 + f, -i omega/2], [i omega/2, omega1/2]]."""
    return f / 2, (0.0, omega / 2, f / 2 - omega1 / 2)


def constant_drive_fidelity(omega1, omega, f, t):
    """|<0|exp(-i H t)|0>| for the constant two-level adiabatic generator (Rabi formula)."""
    det = omega1 - f
    gen = np.sqrt(det**2 + omega**2)
    leak = omega**2 / gen**2 * np.sin(gen * np.asarray(t) / 2) ** 2
    return np.sqrt(1 - leak)


def rk4_evolve(H_of_t, psi0, T, n):
    """Classical RK4 for i dpsi/dt = H(t) psi with n uniform steps; returns states at every step."""
    dt = T / n
    psi = np.asarray(psi0, dtype=complex)
    out = [psi]
    rhs = lambda t, y: -1j * (H_of_t(t) @ y)
    for k in range(n):
        t = k * dt
        k1 = rhs(t, psi)
        k2 = rhs(t + dt / 2, psi + dt / 2 * k1)
        k3 = rhs(t + dt / 2, psi + dt / 2 * k2)
        k4 = rhs(t + dt, psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(psi)
    return np.array(out)


def two_level_lab(omega1, omega, t):
    """(omega1/2)(cos wt sigma_z + sin wt sigma_x) written out independently."""
    return 0.5 * omega1 * (np.cos(omega * t) * SZ + np.sin(omega * t) * SX)


def two_level_ground(omega, t):
    """Instantaneous ground state of two_level_lab, up to phase."""
    th = omega * t / 2
    return np.array([-np.sin(th), np.cos(th)], dtype=complex)


def simpson(y, x):
    """Composite Simpson rule on an odd number of equally spaced samples."""
    h = x[1] - x[0]
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
