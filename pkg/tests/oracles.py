"""Independent reference implementations used only by the tests."""
import cmath
import math

import mpmath as mp


def arm_leg_weight(parts, eps, a):
    """Fixed-point weight from arms and legs of boxes, with the (-1)^{rn} from the factor i per weight."""
    r = len(parts)
    n = sum(p.size for p in parts)
    det = 1
    for k in range(r):
        for l in range(r):
            lk, ll = parts[k], parts[l]
            ck, cl = lk.conjugate(), ll.conjugate()
            for i, j in lk.cells():
                arm, leg = lk.part(i) - j - 1, cl.part(j) - i - 1
                det *= a[l] - a[k] - eps * (arm + leg + 1)
            for i, j in ll.cells():
                arm, leg = ll.part(i) - j - 1, ck.part(j) - i - 1
                det *= a[l] - a[k] + eps * (arm + leg + 1)
    return (-1) ** (r * n) * det


def log_barnes_gamma2_unit(w):
    """ln Gamma_2(w | 1, -1) through the Barnes G function."""
    w = mp.mpf(w)
    return mp.log(mp.barnesg(1 + w)) - w / 2 * mp.log(2 * mp.pi) - mp.zeta(-1, derivative=1)


def abel_char_G(parts, eps, a, depth=4000):
    """Directly summed generating function for Im eps < 0 (the tail decays)."""
    total = 0j
    for lam, ak in zip(parts, a):
        s = 0j
        for j in range(depth):
            s += cmath.exp(1j * eps * (lam.part(j) - j - 0.5))
        total += cmath.exp(1j * ak) * s
    return total


def arcsine_profile(x, lam):
    """Vershik-Kerov-Logan-Shepp shape of width 4 lam."""
    x = abs(x)
    if x >= 2 * lam:
        return x
    u = x / (2 * lam)
    return (2 / math.pi) * (x * math.asin(u) + 2 * lam * math.sqrt(1 - u * u))


def band_mean_oracle(coeffs, lam_r, lo, hi, endpoints):
    """(1/pi) int_band x |d arccos(P / 2 Lambda^r)| with algebraic endpoint weights."""
    import numpy as np
    from scipy.integrate import quad

    others = [e for e in endpoints if abs(e - lo) > 1e-12 and abs(e - hi) > 1e-12]
    dP = np.polyder(coeffs)

    def f(x):
        rest = abs(np.prod([x - e for e in others])) if others else 1.0
        return x * abs(np.polyval(dP, x)) / math.sqrt(rest)

    val, _ = quad(f, lo, hi, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14, epsrel=1e-13)
    return val / math.pi


def gap_area_oracle(coeffs, lam_r, lo, hi):
    """2 int_gap arccosh(|P| / 2 Lambda^r) dx."""
    import numpy as np
    from scipy.integrate import quad

    f = lambda x: math.acosh(max(1.0, abs(np.polyval(coeffs, x)) / (2 * lam_r)))
    val, _ = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 2 * val
