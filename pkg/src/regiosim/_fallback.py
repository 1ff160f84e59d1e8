"""Pure numpy RK4 integrator, used when the compiled extension is unavailable.

Mirrors ``_kernels.integrate`` operation for operation.
"""

import numpy as np

BACKEND = "python"


def _deriv(a, k, l, W, mu, cK, ln_cA, alpha, beta, gamma, theta):
    gA = np.exp(ln_cA + beta * k + gamma * l + (theta - 1.0) * a + mu * (W @ a))
    gK = cK * np.exp((1.0 - alpha) * (a + l - k))
    ok = bool(np.all(np.isfinite(gA)) and np.all(np.isfinite(gK)))
    return gA, gK, ok


def integrate(lnA0, lnK0, lnL0, W, mu, n, cK, ln_cA, alpha, beta, gamma, theta, dt, n_steps, tol,
              record_every=1):
    a = np.array(lnA0, dtype=float)
    k = np.array(lnK0, dtype=float)
    l = np.array(lnL0, dtype=float)
    W = np.ascontiguousarray(W, dtype=float)
    mu = np.asarray(mu, dtype=float)
    nv = np.asarray(n, dtype=float)
    cK = np.asarray(cK, dtype=float)
    record_every = max(1, int(record_every))
    args = (W, mu, cK, ln_cA, alpha, beta, gamma, theta)
    h2, h6 = 0.5 * dt, dt / 6.0

    gA, gK, ok = _deriv(a, k, l, *args)
    status = 0 if ok else 2
    steps, rows = [0], [(a.copy(), k.copy(), l.copy(), gA, gK)]
    step = 0
    while status == 0 and step < n_steps:
        tl = l + h2 * nv
        k2a, k2k, ok = _deriv(a + h2 * gA, k + h2 * gK, tl, *args)
        if not ok:
            status = 2
            break
        k3a, k3k, ok = _deriv(a + h2 * k2a, k + h2 * k2k, tl, *args)
        if not ok:
            status = 2
            break
        k4a, k4k, ok = _deriv(a + dt * k3a, k + dt * k3k, l + dt * nv, *args)
        if not ok:
            status = 2
            break
        a = a + h6 * (gA + 2.0 * k2a + 2.0 * k3a + k4a)
        k = k + h6 * (gK + 2.0 * k2k + 2.0 * k3k + k4k)
        l = l + dt * nv
        step += 1
        gA_prev = gA
        gA, gK, ok = _deriv(a, k, l, *args)
        if not ok:
            status = 2
            break
        if np.max(np.abs(gA - gA_prev)) < tol:
            status = 1
        if status == 1 or step == n_steps or step % record_every == 0:
            steps.append(step)
            rows.append((a.copy(), k.copy(), l.copy(), gA, gK))
    cols = [np.array([r[j] for r in rows]) for j in range(5)]
    return (np.array(steps, dtype=np.int64), *cols, status)
