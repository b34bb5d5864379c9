# independent reference values, frozen into the C++ unit tests
import mpmath as mp
import numpy as np
from scipy.linalg import expm, eigh

mp.mp.dps = 40


def mmn_stationary(n, lam, qmax):
    w = [mp.mpf(1)]
    for q in range(1, qmax + 1):
        w.append(w[-1] * lam / min(q, n))
    return w


def generator(birth, death):
    m = len(birth)
    Q = np.zeros((m, m))
    for i in range(m):
        if i + 1 < m:
            Q[i, i + 1] = birth[i]
        if i > 0:
            Q[i, i - 1] = death[i]
        Q[i, i] = -Q[i].sum()
    return Q


def stationary_of(birth, death):
    w = [1.0]
    for q in range(1, len(birth)):
        w.append(w[-1] * birth[q - 1] / death[q])
    w = np.array(w)
    return w / w.sum()


def gap_of(birth, death):
    nu = stationary_of(birth, death)
    Q = generator(birth, death)
    d = np.sqrt(nu)
    S = (d[:, None] * Q) / d[None, :]
    S = 0.5 * (S + S.T)
    ev = np.sort(np.linalg.eigvalsh(-S))
    return ev[1]


print("== M/M/4 lambda=3 (exact, infinite)")
n, lam = 4, mp.mpf(3)
tail_ratio = lam / n
w = mmn_stationary(n, lam, n)
Z = sum(w[:n]) + w[n] / (1 - tail_ratio)
nu0 = 1 / Z
mean = sum(q * w[q] for q in range(n)) / Z + sum(w[n] * tail_ratio**j * (n + j) for j in range(0, 4000)) / Z
m2 = sum(q * q * w[q] for q in range(n)) / Z + sum(w[n] * tail_ratio**j * (n + j) ** 2 for j in range(0, 4000)) / Z
print("nu0", mp.nstr(nu0, 17), "nu4", mp.nstr(w[n] / Z, 17), "mean", mp.nstr(mean, 17), "var", mp.nstr(m2 - mean**2, 17))
print("chi(delta0) ", mp.nstr(mp.sqrt(1 / nu0 - 1), 17))

print("== custom chain")
b = [1.0, 2.0, 1.5, 0.0]
d = [0.0, 1.0, 3.0, 2.0]
print("nu", repr(stationary_of(b, d).tolist()))
print("gap", repr(gap_of(b, d)))
Q = generator(b, d)
pt = np.array([1.0, 0, 0, 0]) @ expm(0.7 * Q)
print("p(0.7)", repr(pt.tolist()))
nu = stationary_of(b, d)
print("chi2(0.7)", repr(float(((pt - nu) ** 2 / nu).sum())))

print("== M/M/16 lambda=15 truncated at 600, chi from delta0")
qm = 600
bb = [15.0] * qm + [0.0]
dd = [0.0] + [float(min(q, 16)) for q in range(1, qm + 1)]
nu = stationary_of(bb, dd)
Q = generator(bb, dd)
for t in (1.0, 5.0, 20.0):
    p = np.zeros(qm + 1)
    p[0] = 1
    p = p @ expm(t * Q)
    print("t", t, "chi", repr(float(np.sqrt(((p - nu) ** 2 / nu).sum()))))

print("== dense gaps of reflecting truncations")
for (n, lam, qm) in ((4, 3.0, 1500), (1, 0.25, 400)):
    bb = [lam] * qm + [0.0]
    dd = [0.0] + [float(min(q, n)) for q in range(1, qm + 1)]
    print(n, lam, qm, repr(gap_of(bb, dd)))
bb = [4.0] * 80 + [0.0]
dd = [0.0] + [float(q) for q in range(1, 81)]
print("mminf lam=4 qmax=80", repr(gap_of(bb, dd)))
bb = [4.0] * 80 + [0.0]
dd = [0.0] + [2.0 * q for q in range(1, 81)]
print("mminf lam=4 mu=2 qmax=80", repr(gap_of(bb, dd)))

print("== local Poincare constant on K=103..109, n=110 alpha=0.75")
n = 110
lam = n - n**0.25
qm = 400
w = [0.0]
for q in range(1, qm + 1):
    w.append(w[-1] + np.log(lam / min(q, n)))
lo, hi = 103, 109
lw = np.array(w[lo : hi + 1])
m = np.exp(lw - lw.max())
m /= m.sum()
bk = [lam] * (hi - lo) + [0.0]
dk = [0.0] + [lam * m[i] / m[i + 1] for i in range(hi - lo)]
print("1/gap_K", repr(1.0 / gap_of(bk, dk)))

print("== MGF M/M/65 alpha=1 delta=1, center 65")
n, lam = 65, mp.mpf(64)
eps = mp.mpf(1) / 65
theta = eps / 2
w = mmn_stationary(n, lam, n)
r = lam / n
Z = sum(w[:n]) + w[n] / (1 - r)
val = sum(w[q] * mp.e ** (theta * (q - n)) for q in range(n)) + w[n] / (1 - r * mp.e**theta)
print("mgf", mp.nstr(val / Z, 17))

print("== closed-form constants")


def c_n(n, a):
    n = mp.mpf(n)
    return 1 / (1 + mp.mpf("3.48") * (384 * n ** (2 - 4 * a) + mp.mpf("395.93") * n ** (3 - 6 * a)))


def consts(n, a):
    n = mp.mpf(n)
    na = n**a
    A = mp.e ** (n * mp.log(1 - 1 / (na - 2) ** 2))
    inner = 1 - 2 / na - 1 / n
    s = mp.sqrt(inner)
    E = mp.e ** (1 / (12 * mp.floor(n - 2 * n / na)))
    two = 2 + na / n
    LK = A * s / (E * two)
    UK = E * s / (2 * A)
    QL = A * (1 - 1 / na) * s / (E * two)
    knee = 1 + 1 / (4 * (na - 1))
    e524 = mp.e ** (mp.mpf(5) / (24 * n))
    U1 = knee * e524 * inner / ((1 - 1 / na) * A * A)
    x = n / na**2 / (1 - 1 / na)
    g1 = U1 / QL
    g2 = (x * mp.e**x) ** 2 / 2 * e524 * inner / (A * A * QL)
    g3 = knee * UK + mp.e**x / (1 - 1 / na) * LK * 2 * n / na**2
    return LK, UK, g1, g2, g3


def h_n(n):
    _, _, g1, g2, g3 = consts(n, mp.mpf(1) / 2)
    g1, g2, g3 = min(g1, 384), min(g2, mp.mpf("395.93")), min(g3, mp.mpf("3.48"))
    return 1 / (4 * (1 + g3 * (g1 + g2)))


def d_n(n, a, integer):
    n = mp.mpf(n)
    e = n ** (1 - a)
    lam = n - e
    g = 1 - n / (e * (e + 1))
    return g if integer else g / (1 + 24 * (lam + 1) ** 2 / lam**2)


for n, a in ((110, 0.6), (500, 0.75), (1e8, 0.75)):
    print("c_n", n, a, mp.nstr(c_n(n, a), 17))
for n in (110, 1e3, 1e6, 1e8):
    print("h_n", n, mp.nstr(h_n(n), 17), "1/h", mp.nstr(1 / h_n(n), 10))
for n, a in ((1000, 0.25), (1e8, 0.25)):
    print("d_n", n, a, mp.nstr(d_n(n, a, False), 17), mp.nstr(d_n(n, a, True), 17))
for n, a in ((110, 0.75), (2000, 0.6)):
    LK, UK, g1, g2, g3 = consts(n, mp.mpf(a))
    print("consts", n, a, *(mp.nstr(v, 17) for v in (LK, UK, g1, g2, g3)))
