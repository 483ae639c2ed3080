"""Independent reference implementations used only by the tests.

They are deliberately naive (explicit loops, exhaustive enumeration, classic
algorithms) so they share no code path with the package.
"""

import itertools
import math

import numpy as np


def jacobi_eigenvalues(A, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi rotations for a symmetric matrix; returns eigenvalues and eigenvectors."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(A[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                R = np.eye(n)
                R[p, p] = R[q, q] = c
                R[p, q] = s
                R[q, p] = -s
                A = R.T @ A @ R
                V = V @ R
    return np.diag(A).copy(), V


def kendall_tau_b_naive(u, v):
    """O(n²) concordant/discordant pair count with τ-b tie correction."""
    n = len(u)
    conc = disc = tie_u = tie_v = 0
    for i in range(n):
        for j in range(i + 1, n):
            du = np.sign(u[i] - u[j])
            dv = np.sign(v[i] - v[j])
            if du == 0 and dv == 0:
                continue
            if du == 0:
                tie_u += 1
            elif dv == 0:
                tie_v += 1
            elif du == dv:
                conc += 1
            else:
                disc += 1
    return (conc - disc) / math.sqrt((conc + disc + tie_u) * (conc + disc + tie_v))


def max_corner_quadratic(P, eps):
    """max over δ ∈ {-ε, ε}^d of √(δᵀPδ), by enumeration."""
    d = P.shape[0]
    best = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=d):
        s = np.array(signs)
        best = max(best, float(s @ P @ s))
    return eps * math.sqrt(best)


def euclid_loop(u, v):
    total = 0.0
    for a, b in zip(u, v):
        total += (a - b) * (a - b)
    return math.sqrt(total)


def softplus_scalar(z, beta):
    return math.log1p(math.exp(beta * z)) / beta if beta * z < 30 else z + math.log1p(math.exp(-beta * z)) / beta


def mlp_scalar(weights, biases, beta, x):
    """Forward pass with explicit loops."""
    a = list(x)
    L = len(weights)
    for l, (W, b) in enumerate(zip(weights, biases)):
        z = [sum(W[i][j] * a[j] for j in range(len(a))) + b[i] for i in range(len(W))]
        a = z if l == L - 1 else [softplus_scalar(zi, beta) for zi in z]
    return a


def fd_gradient(f, x, h=1e-4):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_jacobian(F, x, h=1e-4):
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * h))
    return np.stack(cols, axis=1)


def random_psd(rng, d, rank=None):
    rank = d if rank is None else rank
    A = rng.standard_normal((d, rank))
    return A @ A.T
