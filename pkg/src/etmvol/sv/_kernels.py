"""Numba kernels for the stochastic-volatility samplers.

Everything latent-state related runs through one device: the conditional
posterior of the log-volatility path h given parameters (and any mixing
variables) has a banded negative Hessian, so a Newton-Raphson search from a
fixed starting point yields a Gaussian proposal N(h_mode, K^-1) whose banded
Cholesky factor makes drawing and density evaluation O(T).  A
Metropolis-Hastings accept/reject step against the exact conditional makes
the draw exact regardless of how good the Gaussian approximation is.  The
same machinery doubles as the latent-path proposal for the
importance-sampling marginal-likelihood estimators.

Parameter blocks use conjugate draws where the conditional is Gaussian or
inverse-gamma, regression-based Metropolis proposals for the autoregressive
coefficients, and adaptive random walks (tuned during burn-in only) for the
blocks the leverage and t variants make non-conjugate.

All kernels seed numba's internal RNG on entry, so a (seed, data, settings)
triple reproduces every draw bit for bit.
"""

import math

import numpy as np
from numba import njit

LOG2PI = math.log(2.0 * math.pi)

# Prior hyperparameter vector layout (shared by all variants; unused slots
# are simply ignored by variants without the block):
#  0 mu_mean      1 mu_var
#  2 phi0_mean    3 phi0_var
#  4 phi1_beta_a  5 phi1_beta_b      (on (phi1+1)/2; SV2 ignores: uniform triangle)
#  6 om2_shape    7 om2_scale        (inverse gamma)
#  8 nu_lo        9 nu_hi            (uniform, t variant)
# 10 kappa_a     11 kappa_b          (beta, jump variant)
# 12 muk_mean    13 muk_var
# 14 sigk2_shape 15 sigk2_scale
N_PRIOR = 16


# ---------------------------------------------------------------------------
# Banded symmetric positive definite algebra (lower storage, bandwidth bw)
# band[0, :] is the main diagonal, band[k, t] the entry (t+k, t).
# ---------------------------------------------------------------------------

@njit(cache=True)
def _chol_band(band):
    """In-place Cholesky of a banded SPD matrix; returns False on failure."""
    bw = band.shape[0] - 1
    T = band.shape[1]
    for t in range(T):
        acc = band[0, t]
        kmax = min(bw, t)
        for k in range(1, kmax + 1):
            acc -= band[k, t - k] ** 2
        if acc <= 0.0 or not np.isfinite(acc):
            return False
        band[0, t] = math.sqrt(acc)
        jmax = min(bw, T - 1 - t)
        for j in range(1, jmax + 1):
            s = band[j, t]
            kmax2 = min(bw - j, t)
            for k in range(1, kmax2 + 1):
                s -= band[k + j, t - k] * band[k, t - k]
            band[j, t] = s / band[0, t]
    return True


@njit(cache=True)
def _solve_band_lower(L, b):
    """Solve L y = b with banded lower-triangular Cholesky factor L."""
    bw = L.shape[0] - 1
    T = L.shape[1]
    y = np.empty(T)
    for t in range(T):
        s = b[t]
        kmax = min(bw, t)
        for k in range(1, kmax + 1):
            s -= L[k, t - k] * y[t - k]
        y[t] = s / L[0, t]
    return y


@njit(cache=True)
def _solve_band_upper(L, b):
    """Solve L' x = b with the same banded factor."""
    bw = L.shape[0] - 1
    T = L.shape[1]
    x = np.empty(T)
    for t in range(T - 1, -1, -1):
        s = b[t]
        kmax = min(bw, T - 1 - t)
        for k in range(1, kmax + 1):
            s -= L[k, t] * x[t + k]
        x[t] = s / L[0, t]
    return x


@njit(cache=True)
def _logdet_chol(L):
    T = L.shape[1]
    acc = 0.0
    for t in range(T):
        acc += math.log(L[0, t])
    return 2.0 * acc


# ---------------------------------------------------------------------------
# Log-volatility priors (autoregressive, mean-reverting around phi0)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ar1_prior_bands(phi1, om2, T, out):
    """Precision bands of the stationary AR(1) prior on (h - phi0)."""
    for t in range(T):
        out[0, t] = (1.0 + phi1 * phi1) / om2
        if t + 1 < T:
            out[1, t] = -phi1 / om2
    out[0, 0] = 1.0 / om2
    out[0, T - 1] = 1.0 / om2
    out[1, T - 1] = 0.0


@njit(cache=True)
def _ar1_logprior_h(h, phi0, phi1, om2):
    """Full log density of the stationary AR(1) path, constants included."""
    T = h.shape[0]
    v1 = om2 / (1.0 - phi1 * phi1)
    x0 = h[0] - phi0
    acc = -0.5 * (LOG2PI + math.log(v1)) - 0.5 * x0 * x0 / v1
    for t in range(1, T):
        e = (h[t] - phi0) - phi1 * (h[t - 1] - phi0)
        acc += -0.5 * (LOG2PI + math.log(om2)) - 0.5 * e * e / om2
    return acc


@njit(cache=True)
def _ar2_stationary(phi1, phi2):
    """Stationary variance/lag-1 covariance of a unit-innovation AR(2)."""
    denom = (1.0 + phi2) * ((1.0 - phi2) ** 2 - phi1 * phi1)
    m0 = (1.0 - phi2) / denom
    m1 = phi1 * m0 / (1.0 - phi2)
    return m0, m1


@njit(cache=True)
def _ar2_stationary_ok(phi1, phi2):
    return (phi1 + phi2 < 1.0 - 1e-10) and (phi2 - phi1 < 1.0 - 1e-10) and (abs(phi2) < 1.0 - 1e-10)


@njit(cache=True)
def _ar2_prior_bands(phi1, phi2, om2, T, out):
    """Precision bands (bandwidth 2) of the stationary AR(2) prior on (h - phi0)."""
    for k in range(3):
        for t in range(T):
            out[k, t] = 0.0
    m0, m1 = _ar2_stationary(phi1, phi2)
    det = m0 * m0 - m1 * m1
    out[0, 0] += m0 / (det * om2)
    out[0, 1] += m0 / (det * om2)
    out[1, 0] += -m1 / (det * om2)
    for t in range(2, T):
        out[0, t] += 1.0 / om2
        out[0, t - 1] += phi1 * phi1 / om2
        out[0, t - 2] += phi2 * phi2 / om2
        out[1, t - 1] += -phi1 / om2
        out[2, t - 2] += -phi2 / om2
        out[1, t - 2] += phi1 * phi2 / om2


@njit(cache=True)
def _ar2_logprior_h(h, phi0, phi1, phi2, om2):
    T = h.shape[0]
    m0, m1 = _ar2_stationary(phi1, phi2)
    g0 = om2 * m0
    g1 = om2 * m1
    det = g0 * g0 - g1 * g1
    x0 = h[0] - phi0
    x1 = h[1] - phi0
    quad = (g0 * x0 * x0 - 2.0 * g1 * x0 * x1 + g0 * x1 * x1) / det
    acc = -LOG2PI - 0.5 * math.log(det) - 0.5 * quad
    for t in range(2, T):
        e = (h[t] - phi0) - phi1 * (h[t - 1] - phi0) - phi2 * (h[t - 2] - phi0)
        acc += -0.5 * (LOG2PI + math.log(om2)) - 0.5 * e * e / om2
    return acc


@njit(cache=True)
def _band_quadform(band, x):
    """x' B x for banded symmetric B."""
    bw = band.shape[0] - 1
    T = band.shape[1]
    acc = 0.0
    for t in range(T):
        acc += band[0, t] * x[t] * x[t]
        kmax = min(bw, T - 1 - t)
        for k in range(1, kmax + 1):
            acc += 2.0 * band[k, t] * x[t] * x[t + k]
    return acc


@njit(cache=True)
def _band_matvec(band, x, out):
    bw = band.shape[0] - 1
    T = band.shape[1]
    for t in range(T):
        s = band[0, t] * x[t]
        for k in range(1, bw + 1):
            if t + k < T:
                s += band[k, t] * x[t + k]
            if t - k >= 0:
                s += band[k, t - k] * x[t - k]
        out[t] = s
    return out


# ---------------------------------------------------------------------------
# Latent path draws
#
# The weighted-normal observation form log p(obs_t | h_t) = -0.5*h_t
# - 0.5*c_t*exp(-h_t) + const covers SV(1), SV(2), and the t/jump variants
# conditional on their mixing variables.  Paths are updated in contiguous
# blocks (random offset each sweep): within a block the conditional target
# given the boundary states stays close to its Laplace approximation no
# matter how long the series is, which keeps acceptance rates high.
# ---------------------------------------------------------------------------

H_BLOCK = 64


@njit(cache=True)
def _obs_loglik_weighted(h, c):
    acc = 0.0
    for t in range(h.shape[0]):
        acc += -0.5 * h[t] - 0.5 * c[t] * math.exp(-min(h[t], 700.0))
        if h[t] < -600.0:
            return -np.inf
    return acc


@njit(cache=True)
def _prior_logdens_h(h, phi0, ar2, phi1, phi2, om2):
    if ar2:
        return _ar2_logprior_h(h, phi0, phi1, phi2, om2)
    return _ar1_logprior_h(h, phi0, phi1, om2)


@njit(cache=True)
def _prior_matvec_rows(prior_band, x, s, e, out):
    """Rows s..e-1 of (P x) for banded symmetric P."""
    bw = prior_band.shape[0] - 1
    T = prior_band.shape[1]
    for i in range(s, e):
        acc = prior_band[0, i] * x[i]
        for k in range(1, bw + 1):
            if i + k < T:
                acc += prior_band[k, i] * x[i + k]
            if i - k >= 0:
                acc += prior_band[k, i - k] * x[i - k]
        out[i - s] = acc
    return out


@njit(cache=True)
def _draw_h_weighted(h_cur, c, prior_band, phi0, ar2, phi1, phi2, om2):
    """Exact MH block update of the whole path; returns (h_new, acc_fraction).

    Each block's proposal is the Laplace approximation of its conditional
    posterior given the neighboring states, built by Newton-Raphson from a
    state-independent start, and corrected by accept/reject against the
    exact conditional.
    """
    T = h_cur.shape[0]
    bw = prior_band.shape[0] - 1
    h = h_cur.copy()
    offset = int(np.random.random() * H_BLOCK)
    if offset >= T:
        offset = 0
    n_acc = 0.0
    n_blk = 0.0
    x = np.empty(T)
    s = 0
    while s < T:
        e = min(s + H_BLOCK, T)
        if s == 0 and offset > 0:
            e = min(offset, T)
        B = e - s
        Kb = np.empty((bw + 1, B))
        grad = np.empty(B)
        pxv = np.empty(B)
        # state-independent start: flat at the block's average log residual
        cbar = 0.0
        for t in range(s, e):
            cbar += c[t]
        start = math.log(cbar / B + 1e-12)
        mode = np.full(B, start)
        for _ in range(50):
            for t in range(T):
                x[t] = h[t] - phi0
            for j in range(B):
                x[s + j] = mode[j] - phi0
            _prior_matvec_rows(prior_band, x, s, e, pxv)
            for k in range(bw + 1):
                for j in range(B):
                    Kb[k, j] = prior_band[k, s + j] if j + k < B else 0.0
            for j in range(B):
                w = 0.5 * c[s + j] * math.exp(-min(mode[j], 700.0))
                grad[j] = -0.5 + w - pxv[j]
                Kb[0, j] += w
            if not _chol_band(Kb):
                break
            step = _solve_band_upper(Kb, _solve_band_lower(Kb, grad))
            delta = 0.0
            for j in range(B):
                if step[j] > 50.0:
                    step[j] = 50.0
                elif step[j] < -50.0:
                    step[j] = -50.0
                mode[j] += step[j]
                if abs(step[j]) > delta:
                    delta = abs(step[j])
            if delta < 1e-9:
                break
        # final curvature and factor at the mode
        for k in range(bw + 1):
            for j in range(B):
                Kb[k, j] = prior_band[k, s + j] if j + k < B else 0.0
        for j in range(B):
            Kb[0, j] += 0.5 * c[s + j] * math.exp(-min(mode[j], 700.0))
        if not _chol_band(Kb):
            s = e
            continue
        logdet = _logdet_chol(Kb)
        z = np.random.standard_normal(B)
        prop_blk = mode + _solve_band_upper(Kb, z)
        h_prop = h.copy()
        for j in range(B):
            h_prop[s + j] = prop_blk[j]
        f_prop = _obs_loglik_weighted(h_prop, c) + _prior_logdens_h(h_prop, phi0, ar2, phi1, phi2, om2)
        f_cur = _obs_loglik_weighted(h, c) + _prior_logdens_h(h, phi0, ar2, phi1, phi2, om2)
        zz = 0.0
        for j in range(B):
            zz += z[j] * z[j]
        lq_prop = 0.5 * logdet - 0.5 * zz
        # current block density under the same proposal
        y = np.empty(B)
        for j in range(B - 1, -1, -1):
            d = h[s + j] - mode[j]
            acc2 = Kb[0, j] * d
            kmax = min(bw, B - 1 - j)
            for k in range(1, kmax + 1):
                acc2 += Kb[k, j] * (h[s + j + k] - mode[j + k])
            y[j] = acc2
        quad = 0.0
        for j in range(B):
            quad += y[j] * y[j]
        lq_cur = 0.5 * logdet - 0.5 * quad
        log_alpha = (f_prop - lq_prop) - (f_cur - lq_cur)
        n_blk += 1.0
        if np.isfinite(log_alpha) and math.log(np.random.random()) < log_alpha:
            for j in range(B):
                h[s + j] = prop_blk[j]
            n_acc += 1.0
        s = e
    return h, n_acc / n_blk if n_blk > 0 else 0.0


# ---------------------------------------------------------------------------
# Latent path draw for the leverage variant
# ---------------------------------------------------------------------------

@njit(cache=True)
def _leverage_logjoint_h(h, delta, phi0, phi1, om2, rho):
    """All h-dependent terms of log p(r, h | theta) for the leverage model."""
    T = h.shape[0]
    om = math.sqrt(om2)
    tau2 = om2 * (1.0 - rho * rho)
    v1 = om2 / (1.0 - phi1 * phi1)
    x0 = h[0] - phi0
    acc = -0.5 * (LOG2PI + math.log(v1)) - 0.5 * x0 * x0 / v1
    for t in range(T):
        if h[t] < -600.0:
            return -np.inf
        acc += -0.5 * (LOG2PI + h[t]) - 0.5 * delta[t] * delta[t] * math.exp(-min(h[t], 700.0))
    for t in range(T - 1):
        g = (h[t + 1] - phi0) - phi1 * (h[t] - phi0) - rho * om * math.exp(-min(h[t], 700.0) / 2.0) * delta[t]
        acc += -0.5 * (LOG2PI + math.log(tau2)) - 0.5 * g * g / tau2
    return acc


@njit(cache=True)
def _leverage_block_terms(mode, h, delta, s, e, phi0, phi1, om2, rho, grad, Kb):
    """Gradient and Gauss-Newton curvature of the block conditional target."""
    T = h.shape[0]
    B = e - s
    om = math.sqrt(om2)
    tau2 = om2 * (1.0 - rho * rho)
    v1 = om2 / (1.0 - phi1 * phi1)
    for j in range(B):
        w = 0.5 * delta[s + j] * delta[s + j] * math.exp(-min(mode[j], 700.0))
        grad[j] = -0.5 + w
        Kb[0, j] = w + 1e-10
        Kb[1, j] = 0.0
    if s == 0:
        grad[0] += -(mode[0] - phi0) / v1
        Kb[0, 0] += 1.0 / v1
    t0 = s - 1 if s > 0 else 0
    for t in range(t0, min(e, T - 1)):
        ht = mode[t - s] if t >= s else h[t]
        htp = mode[t + 1 - s] if t + 1 < e else h[t + 1]
        ez = math.exp(-min(ht, 700.0) / 2.0) * delta[t]
        g = (htp - phi0) - phi1 * (ht - phi0) - rho * om * ez
        dg_dt = -phi1 + 0.5 * rho * om * ez
        if t >= s:
            grad[t - s] += -g * dg_dt / tau2
            curv = (dg_dt * dg_dt - g * 0.25 * rho * om * ez) / tau2
            if curv < 1e-12:
                curv = 1e-12
            Kb[0, t - s] += curv
        if t + 1 < e:
            grad[t + 1 - s] += -g / tau2
            Kb[0, t + 1 - s] += 1.0 / tau2
        if t >= s and t + 1 < e:
            Kb[1, t - s] += dg_dt / tau2


@njit(cache=True)
def _draw_h_leverage(h_cur, delta, phi0, phi1, om2, rho):
    """Exact MH block update of h for the leverage model; returns (h, acc_frac)."""
    T = h_cur.shape[0]
    h = h_cur.copy()
    offset = int(np.random.random() * H_BLOCK)
    if offset >= T:
        offset = 0
    n_acc = 0.0
    n_blk = 0.0
    s = 0
    while s < T:
        e = min(s + H_BLOCK, T)
        if s == 0 and offset > 0:
            e = min(offset, T)
        B = e - s
        Kb = np.empty((2, B))
        grad = np.empty(B)
        c2 = 0.0
        for t in range(s, e):
            c2 += delta[t] * delta[t]
        mode = np.full(B, math.log(c2 / B + 1e-12))
        ok = True
        for _ in range(50):
            _leverage_block_terms(mode, h, delta, s, e, phi0, phi1, om2, rho, grad, Kb)
            if not _chol_band(Kb):
                ok = False
                break
            step = _solve_band_upper(Kb, _solve_band_lower(Kb, grad))
            dmax = 0.0
            for j in range(B):
                if step[j] > 50.0:
                    step[j] = 50.0
                elif step[j] < -50.0:
                    step[j] = -50.0
                mode[j] += step[j]
                if abs(step[j]) > dmax:
                    dmax = abs(step[j])
            if dmax < 1e-9:
                break
        if not ok:
            s = e
            continue
        _leverage_block_terms(mode, h, delta, s, e, phi0, phi1, om2, rho, grad, Kb)
        if not _chol_band(Kb):
            s = e
            continue
        logdet = _logdet_chol(Kb)
        z = np.random.standard_normal(B)
        prop_blk = mode + _solve_band_upper(Kb, z)
        h_prop = h.copy()
        for j in range(B):
            h_prop[s + j] = prop_blk[j]
        f_prop = _leverage_logjoint_h(h_prop, delta, phi0, phi1, om2, rho)
        f_cur = _leverage_logjoint_h(h, delta, phi0, phi1, om2, rho)
        zz = 0.0
        for j in range(B):
            zz += z[j] * z[j]
        lq_prop = 0.5 * logdet - 0.5 * zz
        y = np.empty(B)
        for j in range(B - 1, -1, -1):
            d = h[s + j] - mode[j]
            acc2 = Kb[0, j] * d
            if j + 1 < B:
                acc2 += Kb[1, j] * (h[s + j + 1] - mode[j + 1])
            y[j] = acc2
        quad = 0.0
        for j in range(B):
            quad += y[j] * y[j]
        lq_cur = 0.5 * logdet - 0.5 * quad
        log_alpha = (f_prop - lq_prop) - (f_cur - lq_cur)
        n_blk += 1.0
        if np.isfinite(log_alpha) and math.log(np.random.random()) < log_alpha:
            for j in range(B):
                h[s + j] = prop_blk[j]
            n_acc += 1.0
        s = e
    return h, n_acc / n_blk if n_blk > 0 else 0.0


# ---------------------------------------------------------------------------
# Scalar conditional draws shared across variants
# ---------------------------------------------------------------------------

@njit(cache=True)
def _draw_invgamma(shape, scale):
    return scale / np.random.gamma(shape, 1.0)


@njit(cache=True)
def _draw_mu_weighted(r, adj, h, w, mu_mean, mu_var):
    """Conjugate mean draw with per-period variance w_t * exp(h_t)."""
    prec = 1.0 / mu_var
    num = mu_mean / mu_var
    for t in range(r.shape[0]):
        p = math.exp(-min(h[t], 700.0)) / w[t]
        prec += p
        num += (r[t] - adj[t]) * p
    return num / prec + np.random.standard_normal() / math.sqrt(prec)


@njit(cache=True)
def _draw_phi0_ar1(h, phi1, om2, p0_mean, p0_var):
    T = h.shape[0]
    p1 = (1.0 - phi1 * phi1) / om2
    prec = 1.0 / p0_var + p1 + (T - 1) * (1.0 - phi1) ** 2 / om2
    num = p0_mean / p0_var + p1 * h[0]
    for t in range(1, T):
        num += (1.0 - phi1) * (h[t] - phi1 * h[t - 1]) / om2
    return num / prec + np.random.standard_normal() / math.sqrt(prec)


@njit(cache=True)
def _log_beta_prior_phi1(phi1, a, b):
    return (a - 1.0) * math.log((1.0 + phi1) / 2.0) + (b - 1.0) * math.log((1.0 - phi1) / 2.0)


@njit(cache=True)
def _draw_phi1_ar1(h, phi0, phi1, om2, beta_a, beta_b):
    """Regression-proposal MH draw for the AR(1) coefficient."""
    T = h.shape[0]
    sxx = 0.0
    sxy = 0.0
    for t in range(1, T):
        x = h[t - 1] - phi0
        y = h[t] - phi0
        sxx += x * x
        sxy += x * y
    if sxx <= 0.0:
        return phi1, 0
    mean_r = sxy / sxx
    sd_r = math.sqrt(om2 / sxx)
    prop = mean_r + sd_r * np.random.standard_normal()
    if abs(prop) >= 1.0 - 1e-10:
        return phi1, 0
    x0 = h[0] - phi0
    lcur = _log_beta_prior_phi1(phi1, beta_a, beta_b) + 0.5 * math.log(1.0 - phi1 * phi1) - 0.5 * x0 * x0 * (1.0 - phi1 * phi1) / om2
    lprop = _log_beta_prior_phi1(prop, beta_a, beta_b) + 0.5 * math.log(1.0 - prop * prop) - 0.5 * x0 * x0 * (1.0 - prop * prop) / om2
    if math.log(np.random.random()) < lprop - lcur:
        return prop, 1
    return phi1, 0


@njit(cache=True)
def _draw_om2_ar1(h, phi0, phi1, om_shape, om_scale):
    T = h.shape[0]
    x0 = h[0] - phi0
    ssq = x0 * x0 * (1.0 - phi1 * phi1)
    for t in range(1, T):
        e = (h[t] - phi0) - phi1 * (h[t - 1] - phi0)
        ssq += e * e
    return _draw_invgamma(om_shape + 0.5 * T, om_scale + 0.5 * ssq)


# ---------------------------------------------------------------------------
# SV(1)
# ---------------------------------------------------------------------------

@njit(cache=True)
def run_sv1(r, prior, burn, keep, thin, seed, init_p, init_h):
    np.random.seed(seed)
    T = r.shape[0]
    mu = 0.0
    for t in range(T):
        mu += r[t]
    mu /= T
    var = 0.0
    for t in range(T):
        var += (r[t] - mu) ** 2
    var /= T
    phi0 = math.log(var + 1e-12)
    phi1 = 0.9
    om2 = 0.05
    if init_p.shape[0] == 4:
        mu = init_p[0]
        phi0 = init_p[1]
        phi1 = min(max(init_p[2], -0.999), 0.999)
        om2 = max(init_p[3], 1e-10)
    h = np.full(T, phi0)
    if init_h.shape[0] == T:
        for t in range(T):
            h[t] = init_h[t]
    params = np.empty((keep, 4))
    hout = np.empty((keep, T))
    ones = np.ones(T)
    zeros = np.zeros(T)
    c = np.empty(T)
    Pb = np.empty((2, T))
    acc_h = 0.0
    acc_phi = 0
    acc_grp = 0
    gs1 = 0.2
    gs2 = 0.2
    gb_acc = 0
    gb_n = 0
    gb_i = 0
    total = burn + keep * thin
    for sweep in range(total):
        for t in range(T):
            d = r[t] - mu
            c[t] = d * d
        _ar1_prior_bands(phi1, om2, T, Pb)
        h, a = _draw_h_weighted(h, c, Pb, phi0, False, phi1, 0.0, om2)
        mu = _draw_mu_weighted(r, zeros, h, ones, prior[0], prior[1])
        phi0 = _draw_phi0_ar1(h, phi1, om2, prior[2], prior[3])
        phi1, ap = _draw_phi1_ar1(h, phi0, phi1, om2, prior[4], prior[5])
        om2 = _draw_om2_ar1(h, phi0, phi1, prior[6], prior[7])
        phi0, om2, ag = _group_move_weighted(h, c, phi0, om2, False, phi1, 0.0, prior, gs1, gs2)
        gb_acc += ag
        gb_n += 1
        if sweep < burn and gb_n == 50:
            gb_i += 1
            gain = 1.0 / math.sqrt(gb_i)
            sc = math.exp(gain * (gb_acc / 50.0 - 0.30))
            gs1 = min(max(gs1 * sc, 1e-3), 5.0)
            gs2 = min(max(gs2 * sc, 1e-3), 5.0)
            gb_acc = 0
            gb_n = 0
        if sweep >= burn:
            acc_h += a
            acc_phi += ap
            acc_grp += ag
            k = sweep - burn
            if k % thin == 0:
                idx = k // thin
                params[idx, 0] = mu
                params[idx, 1] = phi0
                params[idx, 2] = phi1
                params[idx, 3] = om2
                for t in range(T):
                    hout[idx, t] = h[t]
    n_post = keep * thin
    diag = np.array([acc_h / n_post, acc_phi / n_post, 1.0, 1.0, acc_grp / n_post])
    return params, hout, diag


# ---------------------------------------------------------------------------
# SV(2)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _draw_phi12_ar2(h, phi0, phi1, phi2, om2):
    """Bivariate regression-proposal MH for the AR(2) coefficients."""
    T = h.shape[0]
    s11 = 0.0
    s12 = 0.0
    s22 = 0.0
    b1 = 0.0
    b2 = 0.0
    for t in range(2, T):
        x1 = h[t - 1] - phi0
        x2 = h[t - 2] - phi0
        y = h[t] - phi0
        s11 += x1 * x1
        s12 += x1 * x2
        s22 += x2 * x2
        b1 += x1 * y
        b2 += x2 * y
    det = s11 * s22 - s12 * s12
    if det <= 0.0:
        return phi1, phi2, 0
    m1 = (s22 * b1 - s12 * b2) / det
    m2 = (s11 * b2 - s12 * b1) / det
    # proposal covariance om2 * [[s11,s12],[s22]]^-1 via Cholesky of the inverse
    c11 = om2 * s22 / det
    c12 = -om2 * s12 / det
    c22 = om2 * s11 / det
    l11 = math.sqrt(c11)
    l21 = c12 / l11
    l22v = c22 - l21 * l21
    if l22v <= 0.0:
        return phi1, phi2, 0
    l22 = math.sqrt(l22v)
    z1 = np.random.standard_normal()
    z2 = np.random.standard_normal()
    p1 = m1 + l11 * z1
    p2 = m2 + l21 * z1 + l22 * z2
    if not _ar2_stationary_ok(p1, p2):
        return phi1, phi2, 0
    x0 = h[0] - phi0
    x1v = h[1] - phi0
    lcur = _init2_logdens(x0, x1v, phi1, phi2, om2)
    lprop = _init2_logdens(x0, x1v, p1, p2, om2)
    if math.log(np.random.random()) < lprop - lcur:
        return p1, p2, 1
    return phi1, phi2, 0


@njit(cache=True)
def _init2_logdens(x0, x1, phi1, phi2, om2):
    m0, m1 = _ar2_stationary(phi1, phi2)
    g0 = om2 * m0
    g1 = om2 * m1
    det = g0 * g0 - g1 * g1
    if det <= 0.0 or g0 <= 0.0:
        return -np.inf
    quad = (g0 * x0 * x0 - 2.0 * g1 * x0 * x1 + g0 * x1 * x1) / det
    return -0.5 * math.log(det) - 0.5 * quad


@njit(cache=True)
def run_sv2(r, prior, burn, keep, thin, seed, init_p, init_h):
    np.random.seed(seed)
    T = r.shape[0]
    mu = 0.0
    for t in range(T):
        mu += r[t]
    mu /= T
    var = 0.0
    for t in range(T):
        var += (r[t] - mu) ** 2
    var /= T
    phi0 = math.log(var + 1e-12)
    phi1 = 0.9
    phi2 = 0.0
    om2 = 0.05
    if init_p.shape[0] == 5:
        mu = init_p[0]
        phi0 = init_p[1]
        if _ar2_stationary_ok(init_p[2], init_p[3]):
            phi1 = init_p[2]
            phi2 = init_p[3]
        om2 = max(init_p[4], 1e-10)
    h = np.full(T, phi0)
    if init_h.shape[0] == T:
        for t in range(T):
            h[t] = init_h[t]
    params = np.empty((keep, 5))
    hout = np.empty((keep, T))
    ones = np.ones(T)
    zeros = np.zeros(T)
    c = np.empty(T)
    Pb = np.empty((3, T))
    acc_h = 0.0
    acc_phi = 0
    acc_grp = 0
    gs1 = 0.2
    gs2 = 0.2
    gb_acc = 0
    gb_n = 0
    gb_i = 0
    total = burn + keep * thin
    for sweep in range(total):
        for t in range(T):
            d = r[t] - mu
            c[t] = d * d
        _ar2_prior_bands(phi1, phi2, om2, T, Pb)
        h, a = _draw_h_weighted(h, c, Pb, phi0, True, phi1, phi2, om2)
        mu = _draw_mu_weighted(r, zeros, h, ones, prior[0], prior[1])
        phi0 = _draw_phi0_ar2(h, phi1, phi2, om2, prior[2], prior[3])
        phi1, phi2, ap = _draw_phi12_ar2(h, phi0, phi1, phi2, om2)
        om2 = _draw_om2_ar2(h, phi0, phi1, phi2, prior[6], prior[7])
        phi0, om2, ag = _group_move_weighted(h, c, phi0, om2, True, phi1, phi2, prior, gs1, gs2)
        gb_acc += ag
        gb_n += 1
        if sweep < burn and gb_n == 50:
            gb_i += 1
            gain = 1.0 / math.sqrt(gb_i)
            sc = math.exp(gain * (gb_acc / 50.0 - 0.30))
            gs1 = min(max(gs1 * sc, 1e-3), 5.0)
            gs2 = min(max(gs2 * sc, 1e-3), 5.0)
            gb_acc = 0
            gb_n = 0
        if sweep >= burn:
            acc_h += a
            acc_phi += ap
            acc_grp += ag
            k = sweep - burn
            if k % thin == 0:
                idx = k // thin
                params[idx, 0] = mu
                params[idx, 1] = phi0
                params[idx, 2] = phi1
                params[idx, 3] = phi2
                params[idx, 4] = om2
                for t in range(T):
                    hout[idx, t] = h[t]
    n_post = keep * thin
    diag = np.array([acc_h / n_post, acc_phi / n_post, 1.0, 1.0, acc_grp / n_post])
    return params, hout, diag


@njit(cache=True)
def _draw_phi0_ar2(h, phi1, phi2, om2, p0_mean, p0_var):
    T = h.shape[0]
    m0, m1 = _ar2_stationary(phi1, phi2)
    g0 = om2 * m0
    g1 = om2 * m1
    det = g0 * g0 - g1 * g1
    i00 = g0 / det
    i01 = -g1 / det
    prec = 1.0 / p0_var + (i00 + i01) * 2.0
    num = p0_mean / p0_var + (i00 + i01) * (h[0] + h[1])
    coef = 1.0 - phi1 - phi2
    for t in range(2, T):
        zt = h[t] - phi1 * h[t - 1] - phi2 * h[t - 2]
        prec += coef * coef / om2
        num += coef * zt / om2
    return num / prec + np.random.standard_normal() / math.sqrt(prec)


@njit(cache=True)
def _draw_om2_ar2(h, phi0, phi1, phi2, om_shape, om_scale):
    T = h.shape[0]
    m0, m1 = _ar2_stationary(phi1, phi2)
    det = m0 * m0 - m1 * m1
    x0 = h[0] - phi0
    x1 = h[1] - phi0
    ssq = (m0 * x0 * x0 - 2.0 * m1 * x0 * x1 + m0 * x1 * x1) / det
    for t in range(2, T):
        e = (h[t] - phi0) - phi1 * (h[t - 1] - phi0) - phi2 * (h[t - 2] - phi0)
        ssq += e * e
    return _draw_invgamma(om_shape + 0.5 * T, om_scale + 0.5 * ssq)


# ---------------------------------------------------------------------------
# SV(1)-t
# ---------------------------------------------------------------------------

@njit(cache=True)
def _log_ig_dens(x, a, b):
    return a * math.log(b) - math.lgamma(a) - (a + 1.0) * math.log(x) - b / x


@njit(cache=True)
def run_sv1t(r, prior, burn, keep, thin, seed, init_p, init_h):
    np.random.seed(seed)
    T = r.shape[0]
    mu = 0.0
    for t in range(T):
        mu += r[t]
    mu /= T
    var = 0.0
    for t in range(T):
        var += (r[t] - mu) ** 2
    var /= T
    phi0 = math.log(var + 1e-12)
    phi1 = 0.9
    om2 = 0.05
    nu = 20.0
    if init_p.shape[0] == 5:
        mu = init_p[0]
        phi0 = init_p[1]
        phi1 = min(max(init_p[2], -0.999), 0.999)
        om2 = max(init_p[3], 1e-10)
        nu = min(max(init_p[4], prior[8] + 1e-6), prior[9] - 1e-6)
    lam = np.ones(T)
    h = np.full(T, phi0)
    if init_h.shape[0] == T:
        for t in range(T):
            h[t] = init_h[t]
    params = np.empty((keep, 5))
    hout = np.empty((keep, T))
    zeros = np.zeros(T)
    c = np.empty(T)
    Pb = np.empty((2, T))
    acc_h = 0.0
    acc_phi = 0
    acc_nu = 0
    acc_grp = 0
    gs1 = 0.2
    gs2 = 0.2
    gb_acc = 0
    gb_n = 0
    gb_i = 0
    nu_step = 4.0
    batch_acc = 0
    batch_n = 0
    batch_i = 0
    total = burn + keep * thin
    for sweep in range(total):
        for t in range(T):
            d = r[t] - mu
            c[t] = d * d / lam[t]
        _ar1_prior_bands(phi1, om2, T, Pb)
        h, a = _draw_h_weighted(h, c, Pb, phi0, False, phi1, 0.0, om2)
        mu = _draw_mu_weighted(r, zeros, h, lam, prior[0], prior[1])
        phi0 = _draw_phi0_ar1(h, phi1, om2, prior[2], prior[3])
        phi1, ap = _draw_phi1_ar1(h, phi0, phi1, om2, prior[4], prior[5])
        om2 = _draw_om2_ar1(h, phi0, phi1, prior[6], prior[7])
        phi0, om2, ag = _group_move_weighted(h, c, phi0, om2, False, phi1, 0.0, prior, gs1, gs2)
        gb_acc += ag
        gb_n += 1
        if sweep < burn and gb_n == 50:
            gb_i += 1
            gain = 1.0 / math.sqrt(gb_i)
            sc = math.exp(gain * (gb_acc / 50.0 - 0.30))
            gs1 = min(max(gs1 * sc, 1e-3), 5.0)
            gs2 = min(max(gs2 * sc, 1e-3), 5.0)
            gb_acc = 0
            gb_n = 0
        # scale mixing: lam_t | rest ~ IG((nu+1)/2, (nu + d^2 e^{-h})/2)
        for t in range(T):
            d = r[t] - mu
            lam[t] = _draw_invgamma(0.5 * (nu + 1.0), 0.5 * (nu + d * d * math.exp(-min(h[t], 700.0))))
        # degrees of freedom: random walk, with an occasional independence
        # proposal from the uniform prior to traverse flat posteriors
        if sweep % 5 == 4:
            nu_prop = prior[8] + (prior[9] - prior[8]) * np.random.random()
        else:
            nu_prop = nu + nu_step * np.random.standard_normal()
        anu = 0
        if prior[8] < nu_prop < prior[9]:
            lcur = 0.0
            lprop = 0.0
            for t in range(T):
                lcur += _log_ig_dens(lam[t], 0.5 * nu, 0.5 * nu)
                lprop += _log_ig_dens(lam[t], 0.5 * nu_prop, 0.5 * nu_prop)
            if math.log(np.random.random()) < lprop - lcur:
                nu = nu_prop
                anu = 1
        batch_acc += anu
        batch_n += 1
        if sweep < burn and batch_n == 50:
            batch_i += 1
            rate = batch_acc / 50.0
            nu_step *= math.exp((rate - 0.44) / math.sqrt(batch_i))
            nu_step = min(max(nu_step, 0.05), 24.0)
            batch_acc = 0
            batch_n = 0
        if sweep >= burn:
            acc_h += a
            acc_phi += ap
            acc_nu += anu
            acc_grp += ag
            k = sweep - burn
            if k % thin == 0:
                idx = k // thin
                params[idx, 0] = mu
                params[idx, 1] = phi0
                params[idx, 2] = phi1
                params[idx, 3] = om2
                params[idx, 4] = nu
                for t in range(T):
                    hout[idx, t] = h[t]
    n_post = keep * thin
    diag = np.array([acc_h / n_post, acc_phi / n_post, 1.0, acc_nu / n_post, acc_grp / n_post])
    return params, hout, diag


# ---------------------------------------------------------------------------
# SV(1)-J
# ---------------------------------------------------------------------------

@njit(cache=True)
def run_sv1j(r, prior, burn, keep, thin, seed, init_p, init_h):
    np.random.seed(seed)
    T = r.shape[0]
    mu = 0.0
    for t in range(T):
        mu += r[t]
    mu /= T
    var = 0.0
    for t in range(T):
        var += (r[t] - mu) ** 2
    var /= T
    phi0 = math.log(var + 1e-12)
    phi1 = 0.9
    om2 = 0.05
    kappa = 0.02
    mu_k = 0.0
    sigk2 = prior[15] / (prior[14] - 1.0) if prior[14] > 1.0 else 0.1
    if init_p.shape[0] == 7:
        mu = init_p[0]
        phi0 = init_p[1]
        phi1 = min(max(init_p[2], -0.999), 0.999)
        om2 = max(init_p[3], 1e-10)
        kappa = min(max(init_p[4], 1e-6), 1.0 - 1e-6)
        mu_k = init_p[5]
        sigk2 = max(init_p[6], 1e-10)
    q = np.zeros(T, dtype=np.int8)
    kjump = np.zeros(T)
    h = np.full(T, phi0)
    if init_h.shape[0] == T:
        for t in range(T):
            h[t] = init_h[t]
    params = np.empty((keep, 7))
    hout = np.empty((keep, T))
    qout = np.empty((keep, T), dtype=np.int8)
    kout = np.empty((keep, T))
    ones = np.ones(T)
    adj = np.empty(T)
    c = np.empty(T)
    Pb = np.empty((2, T))
    acc_h = 0.0
    acc_phi = 0
    acc_grp = 0
    gs1 = 0.2
    gs2 = 0.2
    gb_acc = 0
    gb_n = 0
    gb_i = 0
    total = burn + keep * thin
    for sweep in range(total):
        for t in range(T):
            adj[t] = kjump[t] if q[t] == 1 else 0.0
            d = r[t] - mu - adj[t]
            c[t] = d * d
        _ar1_prior_bands(phi1, om2, T, Pb)
        h, a = _draw_h_weighted(h, c, Pb, phi0, False, phi1, 0.0, om2)
        mu = _draw_mu_weighted(r, adj, h, ones, prior[0], prior[1])
        phi0 = _draw_phi0_ar1(h, phi1, om2, prior[2], prior[3])
        phi1, ap = _draw_phi1_ar1(h, phi0, phi1, om2, prior[4], prior[5])
        om2 = _draw_om2_ar1(h, phi0, phi1, prior[6], prior[7])
        phi0, om2, ag = _group_move_weighted(h, c, phi0, om2, False, phi1, 0.0, prior, gs1, gs2)
        gb_acc += ag
        gb_n += 1
        if sweep < burn and gb_n == 50:
            gb_i += 1
            gain = 1.0 / math.sqrt(gb_i)
            sc = math.exp(gain * (gb_acc / 50.0 - 0.30))
            gs1 = min(max(gs1 * sc, 1e-3), 5.0)
            gs2 = min(max(gs2 * sc, 1e-3), 5.0)
            gb_acc = 0
            gb_n = 0
        # jump indicators and sizes (sizes integrated out of the indicator draw)
        n1 = 0
        for t in range(T):
            s2 = math.exp(min(h[t], 700.0))
            d = r[t] - mu
            l1 = math.log(kappa) - 0.5 * (LOG2PI + math.log(s2 + sigk2)) - 0.5 * (d - mu_k) ** 2 / (s2 + sigk2)
            l0 = math.log(1.0 - kappa) - 0.5 * (LOG2PI + math.log(s2)) - 0.5 * d * d / s2
            m = max(l0, l1)
            p1 = math.exp(l1 - m) / (math.exp(l0 - m) + math.exp(l1 - m))
            if np.random.random() < p1:
                q[t] = 1
                n1 += 1
                prec = 1.0 / sigk2 + 1.0 / s2
                mean = (mu_k / sigk2 + d / s2) / prec
                kjump[t] = mean + np.random.standard_normal() / math.sqrt(prec)
            else:
                q[t] = 0
                kjump[t] = 0.0
        kappa = np.random.beta(prior[10] + n1, prior[11] + (T - n1))
        # jump-size hyperparameters from the active jumps plus their priors
        prec = 1.0 / prior[13] + n1 / sigk2
        num = prior[12] / prior[13]
        for t in range(T):
            if q[t] == 1:
                num += kjump[t] / sigk2
        mu_k = num / prec + np.random.standard_normal() / math.sqrt(prec)
        ssq = 0.0
        for t in range(T):
            if q[t] == 1:
                ssq += (kjump[t] - mu_k) ** 2
        sigk2 = _draw_invgamma(prior[14] + 0.5 * n1, prior[15] + 0.5 * ssq)
        if sweep >= burn:
            acc_h += a
            acc_phi += ap
            acc_grp += ag
            k = sweep - burn
            if k % thin == 0:
                idx = k // thin
                params[idx, 0] = mu
                params[idx, 1] = phi0
                params[idx, 2] = phi1
                params[idx, 3] = om2
                params[idx, 4] = kappa
                params[idx, 5] = mu_k
                params[idx, 6] = sigk2
                for t in range(T):
                    hout[idx, t] = h[t]
                    qout[idx, t] = q[t]
                    kout[idx, t] = kjump[t]
    n_post = keep * thin
    diag = np.array([acc_h / n_post, acc_phi / n_post, 1.0, 1.0, acc_grp / n_post])
    return params, hout, diag, qout, kout


# ---------------------------------------------------------------------------
# SV(1)-L
# ---------------------------------------------------------------------------

@njit(cache=True)
def _leverage_trans_loglik(h, delta, phi0, phi1, om2, rho):
    """Transition plus initial terms (no observation terms), for parameter MH."""
    T = h.shape[0]
    om = math.sqrt(om2)
    tau2 = om2 * (1.0 - rho * rho)
    v1 = om2 / (1.0 - phi1 * phi1)
    x0 = h[0] - phi0
    acc = -0.5 * math.log(v1) - 0.5 * x0 * x0 / v1
    for t in range(T - 1):
        g = (h[t + 1] - phi0) - phi1 * (h[t] - phi0) - rho * om * math.exp(-min(h[t], 700.0) / 2.0) * delta[t]
        acc += -0.5 * math.log(tau2) - 0.5 * g * g / tau2
    return acc


@njit(cache=True)
def run_sv1l(r, prior, burn, keep, thin, seed, init_p, init_h):
    np.random.seed(seed)
    T = r.shape[0]
    mu = 0.0
    for t in range(T):
        mu += r[t]
    mu /= T
    var = 0.0
    for t in range(T):
        var += (r[t] - mu) ** 2
    var /= T
    phi0 = math.log(var + 1e-12)
    phi1 = 0.9
    om2 = 0.05
    rho = 0.0
    if init_p.shape[0] == 5:
        mu = init_p[0]
        phi0 = init_p[1]
        phi1 = min(max(init_p[2], -0.999), 0.999)
        om2 = max(init_p[3], 1e-10)
        rho = min(max(init_p[4], -0.999), 0.999)
    h = np.full(T, phi0)
    if init_h.shape[0] == T:
        for t in range(T):
            h[t] = init_h[t]
    delta = np.empty(T)
    params = np.empty((keep, 5))
    hout = np.empty((keep, T))
    acc_h = 0.0
    acc_phi = 0
    acc_mu = 0
    acc_or = 0
    acc_grp = 0
    gs1 = 0.2
    gs2 = 0.2
    gb_acc = 0
    gb_n = 0
    gb_i = 0
    mu_step = 0.1 * math.sqrt(var / T) * 2.0 + 1e-3
    a_step = 0.5
    u_step = 0.5
    batch_mu = 0
    batch_or = 0
    batch_n = 0
    batch_i = 0
    total = burn + keep * thin
    for sweep in range(total):
        for t in range(T):
            delta[t] = r[t] - mu
        h, a = _draw_h_leverage(h, delta, phi0, phi1, om2, rho)
        # mu: random walk against observation + transition terms
        mu_prop = mu + mu_step * np.random.standard_normal()
        lcur = -0.5 * (mu - prior[0]) ** 2 / prior[1]
        lprop = -0.5 * (mu_prop - prior[0]) ** 2 / prior[1]
        for t in range(T):
            eh = math.exp(-min(h[t], 700.0))
            lcur += -0.5 * (r[t] - mu) ** 2 * eh
            lprop += -0.5 * (r[t] - mu_prop) ** 2 * eh
        om = math.sqrt(om2)
        tau2 = om2 * (1.0 - rho * rho)
        for t in range(T - 1):
            ez = math.exp(-min(h[t], 700.0) / 2.0)
            gc = (h[t + 1] - phi0) - phi1 * (h[t] - phi0) - rho * om * ez * (r[t] - mu)
            gp = (h[t + 1] - phi0) - phi1 * (h[t] - phi0) - rho * om * ez * (r[t] - mu_prop)
            lcur += -0.5 * gc * gc / tau2
            lprop += -0.5 * gp * gp / tau2
        amu = 0
        if math.log(np.random.random()) < lprop - lcur:
            mu = mu_prop
            amu = 1
        for t in range(T):
            delta[t] = r[t] - mu
        # phi0: conjugate given everything else
        p1 = (1.0 - phi1 * phi1) / om2
        prec = 1.0 / prior[3] + p1 + (T - 1) * (1.0 - phi1) ** 2 / tau2
        num = prior[2] / prior[3] + p1 * h[0]
        for t in range(T - 1):
            ez = math.exp(-min(h[t], 700.0) / 2.0)
            y = h[t + 1] - phi1 * h[t] - rho * om * ez * delta[t]
            num += (1.0 - phi1) * y / tau2
        phi0 = num / prec + np.random.standard_normal() / math.sqrt(prec)
        # phi1: regression proposal on transition residuals
        sxx = 0.0
        sxy = 0.0
        for t in range(T - 1):
            x = h[t] - phi0
            ez = math.exp(-min(h[t], 700.0) / 2.0)
            y = (h[t + 1] - phi0) - rho * om * ez * delta[t]
            sxx += x * x
            sxy += x * y
        aphi = 0
        if sxx > 0.0:
            mean_r = sxy / sxx
            sd_r = math.sqrt(tau2 / sxx)
            prop = mean_r + sd_r * np.random.standard_normal()
            if abs(prop) < 1.0 - 1e-10:
                x0 = h[0] - phi0
                lc = _log_beta_prior_phi1(phi1, prior[4], prior[5]) + 0.5 * math.log(1.0 - phi1 * phi1) - 0.5 * x0 * x0 * (1.0 - phi1 * phi1) / om2
                lp = _log_beta_prior_phi1(prop, prior[4], prior[5]) + 0.5 * math.log(1.0 - prop * prop) - 0.5 * x0 * x0 * (1.0 - prop * prop) / om2
                if math.log(np.random.random()) < lp - lc:
                    phi1 = prop
                    aphi = 1
        # (om2, rho): joint random walk on (log om2, atanh rho)
        a_cur = math.log(om2)
        u_cur = math.atanh(rho)
        a_prop = a_cur + a_step * np.random.standard_normal()
        u_prop = u_cur + u_step * np.random.standard_normal()
        om2_prop = math.exp(a_prop)
        rho_prop = math.tanh(u_prop)
        lcur = (
            _leverage_trans_loglik(h, delta, phi0, phi1, om2, rho)
            + _log_ig_dens(om2, prior[6], prior[7])
            + a_cur
            + math.log(1.0 - rho * rho)
        )
        lprop = (
            _leverage_trans_loglik(h, delta, phi0, phi1, om2_prop, rho_prop)
            + _log_ig_dens(om2_prop, prior[6], prior[7])
            + a_prop
            + math.log(1.0 - rho_prop * rho_prop)
        )
        aor = 0
        if math.log(np.random.random()) < lprop - lcur:
            om2 = om2_prop
            rho = rho_prop
            aor = 1
        # occasional independence proposal from the flat prior on rho
        if sweep % 5 == 4:
            rho_ind = -1.0 + 2.0 * np.random.random()
            lcur = _leverage_trans_loglik(h, delta, phi0, phi1, om2, rho)
            lprop = _leverage_trans_loglik(h, delta, phi0, phi1, om2, rho_ind)
            if math.log(np.random.random()) < lprop - lcur:
                rho = rho_ind
        phi0, om2, ag = _group_move_leverage(h, delta, phi0, phi1, om2, rho, prior, gs1, gs2)
        gb_acc += ag
        gb_n += 1
        if sweep < burn and gb_n == 50:
            gb_i += 1
            gain = 1.0 / math.sqrt(gb_i)
            sc = math.exp(gain * (gb_acc / 50.0 - 0.30))
            gs1 = min(max(gs1 * sc, 1e-3), 5.0)
            gs2 = min(max(gs2 * sc, 1e-3), 5.0)
            gb_acc = 0
            gb_n = 0
        batch_mu += amu
        batch_or += aor
        batch_n += 1
        if sweep < burn and batch_n == 50:
            batch_i += 1
            gain = 1.0 / math.sqrt(batch_i)
            mu_step *= math.exp(gain * (batch_mu / 50.0 - 0.44))
            scale = math.exp(gain * (batch_or / 50.0 - 0.30))
            a_step = min(max(a_step * scale, 0.01), 4.0)
            u_step = min(max(u_step * scale, 0.01), 4.0)
            mu_step = min(max(mu_step, 1e-5), 100.0)
            batch_mu = 0
            batch_or = 0
            batch_n = 0
        if sweep >= burn:
            acc_h += a
            acc_phi += aphi
            acc_mu += amu
            acc_or += aor
            acc_grp += ag
            k = sweep - burn
            if k % thin == 0:
                idx = k // thin
                params[idx, 0] = mu
                params[idx, 1] = phi0
                params[idx, 2] = phi1
                params[idx, 3] = om2
                params[idx, 4] = rho
                for t in range(T):
                    hout[idx, t] = h[t]
    n_post = keep * thin
    diag = np.array([acc_h / n_post, acc_phi / n_post, acc_mu / n_post, acc_or / n_post, acc_grp / n_post])
    return params, hout, diag


# ---------------------------------------------------------------------------
# Importance-sampling support: joint latent-and-parameter weights
#
# For a parameter draw theta*, the latent path is proposed from the Laplace
# approximation N(h_mode(theta*), K^-1) of p(h | r, theta*), with the t and
# jump mixing variables integrated out of the observation density, and the
# weight contribution log p(r, h* | theta*) - log q(h* | theta*) returned.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _obs_ll_grad_curv(kind, h, p0, p1, p2, p3):
    """Full observation log density and derivatives w.r.t. h at one period.

    kind 0: normal with squared residual p0
    kind 1: Student-t with squared residual p0, dof p1, log-constant p2
    kind 2: normal/jump mixture with residual p0, kappa p1, mu_k p2, sigk2 p3
    """
    hc = min(h, 700.0)
    if kind == 0:
        w = p0 * math.exp(-hc)
        ll = -0.5 * (LOG2PI + h) - 0.5 * w
        return ll, -0.5 + 0.5 * w, 0.5 * w
    if kind == 1:
        a = p0 * math.exp(-hc) / p1
        ll = p2 - 0.5 * h - 0.5 * (p1 + 1.0) * math.log1p(a)
        grad = -0.5 + 0.5 * (p1 + 1.0) * a / (1.0 + a)
        curv = 0.5 * (p1 + 1.0) * a / ((1.0 + a) * (1.0 + a))
        return ll, grad, curv
    # jump mixture
    s = math.exp(hc)
    v = s + p3
    q = (p0 - p2) * (p0 - p2)
    la = math.log(1.0 - p1) - 0.5 * (LOG2PI + h) - 0.5 * p0 * p0 * math.exp(-hc)
    lb = math.log(p1) - 0.5 * (LOG2PI + math.log(v)) - 0.5 * q / v
    m = la if la > lb else lb
    ea = math.exp(la - m)
    eb = math.exp(lb - m)
    ll = m + math.log(ea + eb)
    wa = ea / (ea + eb)
    wb = 1.0 - wa
    dla = -0.5 + 0.5 * p0 * p0 * math.exp(-hc)
    dlb = s * (-0.5 / v + 0.5 * q / (v * v))
    grad = wa * dla + wb * dlb
    curv_a = 0.5 * p0 * p0 * math.exp(-hc)
    d2lb = s * (-0.5 / v + 0.5 * q / (v * v)) + s * s * (0.5 / (v * v) - q / (v * v * v))
    curv_b = -d2lb
    curv = wa * curv_a + wb * curv_b
    if curv < 0.0:
        curv = 0.0
    return ll, grad, curv


@njit(cache=True)
def _laplace_h_fit(kind, p0, p1, p2, p3, prior_band, phi0, start, K):
    """Newton-Raphson Laplace fit from a fixed start.

    Fills ``K`` with the Cholesky factor of the curvature at the mode and
    returns (mode, logdet, ok).
    """
    T = p0.shape[0]
    bw = prior_band.shape[0] - 1
    mode = np.full(T, start)
    grad = np.empty(T)
    tmp = np.empty(T)
    x = np.empty(T)
    for _ in range(80):
        for t in range(T):
            x[t] = mode[t] - phi0
        _band_matvec(prior_band, x, tmp)
        for k in range(bw + 1):
            for t in range(T):
                K[k, t] = prior_band[k, t]
        for t in range(T):
            _, g, c = _obs_ll_grad_curv(kind, mode[t], p0[t], p1, p2, p3)
            grad[t] = g - tmp[t]
            K[0, t] += c
        if not _chol_band(K):
            return mode, 0.0, False
        step = _solve_band_upper(K, _solve_band_lower(K, grad))
        delta = 0.0
        for t in range(T):
            if step[t] > 50.0:
                step[t] = 50.0
            elif step[t] < -50.0:
                step[t] = -50.0
            mode[t] += step[t]
            if abs(step[t]) > delta:
                delta = abs(step[t])
        if delta < 1e-9:
            break
    for k in range(bw + 1):
        for t in range(T):
            K[k, t] = prior_band[k, t]
    for t in range(T):
        _, _, c = _obs_ll_grad_curv(kind, mode[t], p0[t], p1, p2, p3)
        K[0, t] += c
    if not _chol_band(K):
        return mode, 0.0, False
    return mode, _logdet_chol(K), True


@njit(cache=True)
def _latent_weight_avg(kind, p0, p1, p2, p3, Pb, phi0, start, ar2, phi1, phi2, om2, n_latent):
    """log of the average of n_latent importance ratios p(r,h|th)/q(h|th)."""
    T = p0.shape[0]
    bw = Pb.shape[0] - 1
    K = np.empty((bw + 1, T))
    mode, logdet, ok = _laplace_h_fit(kind, p0, p1, p2, p3, Pb, phi0, start, K)
    if not ok:
        return -np.inf
    best = -np.inf
    vals = np.empty(n_latent)
    for l in range(n_latent):
        z = np.random.standard_normal(T)
        h = mode + _solve_band_upper(K, z)
        zz = 0.0
        for t in range(T):
            zz += z[t] * z[t]
        logq = 0.5 * logdet - 0.5 * T * LOG2PI - 0.5 * zz
        obs = 0.0
        for t in range(T):
            ll, _, _ = _obs_ll_grad_curv(kind, h[t], p0[t], p1, p2, p3)
            obs += ll
        if ar2:
            v = obs + _ar2_logprior_h(h, phi0, phi1, phi2, om2) - logq
        else:
            v = obs + _ar1_logprior_h(h, phi0, phi1, om2) - logq
        vals[l] = v
        if v > best:
            best = v
    if not np.isfinite(best):
        return -np.inf
    acc = 0.0
    for l in range(n_latent):
        acc += math.exp(vals[l] - best)
    return best + math.log(acc / n_latent)


@njit(cache=True)
def is_latent_weights_ar1(kind, r, thetas, extras, seed, n_latent):
    """Latent-path weight contributions for the AR(1)-volatility variants.

    thetas columns: mu, phi0, phi1, om2.  ``extras`` columns depend on kind:
    kind 1 -> nu; kind 2 -> kappa, mu_k, sigk2; ignored for kind 0.
    """
    np.random.seed(seed)
    n = thetas.shape[0]
    T = r.shape[0]
    out = np.empty(n)
    Pb = np.empty((2, T))
    p0 = np.empty(T)
    for i in range(n):
        mu = thetas[i, 0]
        phi0 = thetas[i, 1]
        phi1 = thetas[i, 2]
        om2 = thetas[i, 3]
        if abs(phi1) >= 1.0 - 1e-12 or om2 <= 0.0:
            out[i] = -np.inf
            continue
        p1 = 0.0
        p2 = 0.0
        p3 = 0.0
        if kind == 0:
            for t in range(T):
                d = r[t] - mu
                p0[t] = d * d
        elif kind == 1:
            nu = extras[i, 0]
            if nu <= 2.0:
                out[i] = -np.inf
                continue
            for t in range(T):
                d = r[t] - mu
                p0[t] = d * d
            p1 = nu
            p2 = math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu) - 0.5 * math.log(nu * math.pi)
        else:
            kap = extras[i, 0]
            if not (0.0 < kap < 1.0) or extras[i, 2] <= 0.0:
                out[i] = -np.inf
                continue
            for t in range(T):
                p0[t] = r[t] - mu
            p1 = kap
            p2 = extras[i, 1]
            p3 = extras[i, 2]
        mean_sq = 0.0
        for t in range(T):
            if kind == 2:
                mean_sq += p0[t] * p0[t]
            else:
                mean_sq += p0[t]
        start = math.log(mean_sq / T + 1e-12)
        _ar1_prior_bands(phi1, om2, T, Pb)
        out[i] = _latent_weight_avg(kind, p0, p1, p2, p3, Pb, phi0, start, False, phi1, 0.0, om2, n_latent)
    return out


@njit(cache=True)
def is_latent_weights_ar2(r, thetas, seed, n_latent):
    """Latent weights for the AR(2) variant; thetas: mu, phi0, phi1, phi2, om2."""
    np.random.seed(seed)
    n = thetas.shape[0]
    T = r.shape[0]
    out = np.empty(n)
    Pb = np.empty((3, T))
    p0 = np.empty(T)
    for i in range(n):
        mu = thetas[i, 0]
        phi0 = thetas[i, 1]
        phi1 = thetas[i, 2]
        phi2 = thetas[i, 3]
        om2 = thetas[i, 4]
        if not _ar2_stationary_ok(phi1, phi2) or om2 <= 0.0:
            out[i] = -np.inf
            continue
        mean_sq = 0.0
        for t in range(T):
            d = r[t] - mu
            p0[t] = d * d
            mean_sq += p0[t]
        start = math.log(mean_sq / T + 1e-12)
        _ar2_prior_bands(phi1, phi2, om2, T, Pb)
        out[i] = _latent_weight_avg(0, p0, 0.0, 0.0, 0.0, Pb, phi0, start, True, phi1, phi2, om2, n_latent)
    return out


@njit(cache=True)
def _leverage_laplace_fit(delta, phi0, phi1, om2, rho, K):
    """Laplace fit of h for the leverage joint; returns (mode, logdet, ok)."""
    T = delta.shape[0]
    om = math.sqrt(om2)
    tau2 = om2 * (1.0 - rho * rho)
    v1 = om2 / (1.0 - phi1 * phi1)
    c2 = 0.0
    for t in range(T):
        c2 += delta[t] * delta[t]
    mode = np.full(T, math.log(c2 / T + 1e-12))
    grad = np.empty(T)
    for _ in range(80):
        for t in range(T):
            grad[t] = -0.5 + 0.5 * delta[t] * delta[t] * math.exp(-min(mode[t], 700.0))
            K[0, t] = 0.5 * delta[t] * delta[t] * math.exp(-min(mode[t], 700.0))
            K[1, t] = 0.0
        grad[0] += -(mode[0] - phi0) / v1
        K[0, 0] += 1.0 / v1
        for t in range(T - 1):
            ez = math.exp(-min(mode[t], 700.0) / 2.0) * delta[t]
            g = (mode[t + 1] - phi0) - phi1 * (mode[t] - phi0) - rho * om * ez
            dg_dt = -phi1 + 0.5 * rho * om * ez
            grad[t] += -g * dg_dt / tau2
            grad[t + 1] += -g / tau2
            curv = (dg_dt * dg_dt - g * 0.25 * rho * om * ez) / tau2
            if curv < 1e-12:
                curv = 1e-12
            K[0, t] += curv
            K[0, t + 1] += 1.0 / tau2
            K[1, t] += dg_dt / tau2
        if not _chol_band(K):
            return mode, 0.0, False
        step = _solve_band_upper(K, _solve_band_lower(K, grad))
        delta_max = 0.0
        for t in range(T):
            if step[t] > 50.0:
                step[t] = 50.0
            elif step[t] < -50.0:
                step[t] = -50.0
            mode[t] += step[t]
            if abs(step[t]) > delta_max:
                delta_max = abs(step[t])
        if delta_max < 1e-9:
            break
    for t in range(T):
        K[0, t] = 0.5 * delta[t] * delta[t] * math.exp(-min(mode[t], 700.0)) + 1e-10
        K[1, t] = 0.0
    K[0, 0] += 1.0 / v1
    for t in range(T - 1):
        ez = math.exp(-min(mode[t], 700.0) / 2.0) * delta[t]
        dg_dt = -phi1 + 0.5 * rho * om * ez
        K[0, t] += dg_dt * dg_dt / tau2
        K[0, t + 1] += 1.0 / tau2
        K[1, t] += dg_dt / tau2
    if not _chol_band(K):
        return mode, 0.0, False
    return mode, _logdet_chol(K), True


@njit(cache=True)
def is_latent_weights_leverage(r, thetas, seed, n_latent):
    """Latent weights for the leverage variant; thetas: mu, phi0, phi1, om2, rho."""
    np.random.seed(seed)
    n = thetas.shape[0]
    T = r.shape[0]
    out = np.empty(n)
    delta = np.empty(T)
    for i in range(n):
        mu = thetas[i, 0]
        phi0 = thetas[i, 1]
        phi1 = thetas[i, 2]
        om2 = thetas[i, 3]
        rho = thetas[i, 4]
        if abs(phi1) >= 1.0 - 1e-12 or om2 <= 0.0 or abs(rho) >= 1.0 - 1e-12:
            out[i] = -np.inf
            continue
        for t in range(T):
            delta[t] = r[t] - mu
        K = np.empty((2, T))
        mode, logdet, ok = _leverage_laplace_fit(delta, phi0, phi1, om2, rho, K)
        if not ok:
            out[i] = -np.inf
            continue
        best = -np.inf
        vals = np.empty(n_latent)
        for l in range(n_latent):
            z = np.random.standard_normal(T)
            h = mode + _solve_band_upper(K, z)
            zz = 0.0
            for t in range(T):
                zz += z[t] * z[t]
            logq = 0.5 * logdet - 0.5 * T * LOG2PI - 0.5 * zz
            v = _leverage_logjoint_h(h, delta, phi0, phi1, om2, rho) - logq
            vals[l] = v
            if v > best:
                best = v
        if not np.isfinite(best):
            out[i] = -np.inf
            continue
        acc = 0.0
        for l in range(n_latent):
            acc += math.exp(vals[l] - best)
        out[i] = best + math.log(acc / n_latent)
    return out


# ---------------------------------------------------------------------------
# Interweaving group move
#
# (phi0, omega2) and the latent path are strongly coupled in the centered
# parameterization, which throttles their mixing.  This move proposes
# (phi0*, omega2*) by random walk and maps the path along the fiber
# h* = phi0* + sqrt(omega2*/omega2) (h - phi0), i.e. a random-walk update of
# the location/scale pair holding the standardized path fixed; the Jacobian
# T*log(scale) makes it an exact MH move on the joint.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _group_move_weighted(h, c, phi0, om2, ar2, phi1, phi2, prior, s1, s2):
    T = h.shape[0]
    phi0_p = phi0 + s1 * np.random.standard_normal()
    a_cur = math.log(om2)
    a_p = a_cur + s2 * np.random.standard_normal()
    om2_p = math.exp(a_p)
    scale = math.sqrt(om2_p / om2)
    hp = np.empty(T)
    for t in range(T):
        hp[t] = phi0_p + scale * (h[t] - phi0)
    lr = (
        _obs_loglik_weighted(hp, c)
        - _obs_loglik_weighted(h, c)
        + _prior_logdens_h(hp, phi0_p, ar2, phi1, phi2, om2_p)
        - _prior_logdens_h(h, phi0, ar2, phi1, phi2, om2)
        + T * math.log(scale)
        + (a_p - a_cur)
        - 0.5 * (phi0_p - prior[2]) ** 2 / prior[3]
        + 0.5 * (phi0 - prior[2]) ** 2 / prior[3]
        + _log_ig_dens(om2_p, prior[6], prior[7])
        - _log_ig_dens(om2, prior[6], prior[7])
    )
    if np.isfinite(lr) and math.log(np.random.random()) < lr:
        for t in range(T):
            h[t] = hp[t]
        return phi0_p, om2_p, 1
    return phi0, om2, 0


@njit(cache=True)
def _group_move_leverage(h, delta, phi0, phi1, om2, rho, prior, s1, s2):
    T = h.shape[0]
    phi0_p = phi0 + s1 * np.random.standard_normal()
    a_cur = math.log(om2)
    a_p = a_cur + s2 * np.random.standard_normal()
    om2_p = math.exp(a_p)
    scale = math.sqrt(om2_p / om2)
    hp = np.empty(T)
    for t in range(T):
        hp[t] = phi0_p + scale * (h[t] - phi0)
    lr = (
        _leverage_logjoint_h(hp, delta, phi0_p, phi1, om2_p, rho)
        - _leverage_logjoint_h(h, delta, phi0, phi1, om2, rho)
        + T * math.log(scale)
        + (a_p - a_cur)
        - 0.5 * (phi0_p - prior[2]) ** 2 / prior[3]
        + 0.5 * (phi0 - prior[2]) ** 2 / prior[3]
        + _log_ig_dens(om2_p, prior[6], prior[7])
        - _log_ig_dens(om2, prior[6], prior[7])
    )
    if np.isfinite(lr) and math.log(np.random.random()) < lr:
        for t in range(T):
            h[t] = hp[t]
        return phi0_p, om2_p, 1
    return phi0, om2, 0
