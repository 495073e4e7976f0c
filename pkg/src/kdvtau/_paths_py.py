"""NumPy implementation of the path kernels.

Vectorized over paths, sequential over time steps.  The operation order
per path matches ``_paths.pyx`` exactly, so both backends return
bit-identical arrays for the same normals.
"""

import numpy as np


def ou_quadratic_integral(z, decay, scale, c, dt):
    """Trapezoid integral of ``<c, xi(y)>^2`` along exactly simulated OU paths.

    ``z`` has shape ``(paths, steps, N)``; ``xi_{k+1} = decay * xi_k + scale * z_k``
    componentwise, starting from ``xi_0 = 0``.  Returns the integral and the
    endpoints ``xi(x)``.
    """
    z = np.asarray(z, dtype=float)
    paths, steps, n = z.shape
    decay = np.asarray(decay, dtype=float)
    scale = np.asarray(scale, dtype=float)
    c = np.asarray(c, dtype=float)
    xi = np.zeros((paths, n))
    prev = np.zeros(paths)
    acc = np.zeros(paths)
    for k in range(steps):
        xi = decay * xi + scale * z[:, k, :]
        x = c[0] * xi[:, 0]
        for i in range(1, n):
            x = x + c[i] * xi[:, i]
        cur = x * x
        acc = acc + 0.5 * (prev + cur) * dt
        prev = cur
    return acc, xi


def levy_area(z, dt):
    """Left-point stochastic areas of planar Brownian motions on ``[0, steps*dt]``.

    ``z`` has shape ``(paths, steps, n, 2)``.  Returns ``S`` of shape
    ``(paths, n)`` with ``S = sum W2 dW1 - W1 dW2`` and the endpoints
    ``W`` of shape ``(paths, n, 2)``.
    """
    z = np.asarray(z, dtype=float)
    paths, steps, n, _ = z.shape
    sq = np.sqrt(dt)
    w1 = np.zeros((paths, n))
    w2 = np.zeros((paths, n))
    s = np.zeros((paths, n))
    for k in range(steps):
        d1 = sq * z[:, k, :, 0]
        d2 = sq * z[:, k, :, 1]
        s = s + (w2 * d1 - w1 * d2)
        w1 = w1 + d1
        w2 = w2 + d2
    return s, np.stack([w1, w2], axis=-1)
