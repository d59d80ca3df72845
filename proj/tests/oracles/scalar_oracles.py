"""Extended-precision scalar oracles used to freeze expected values in the C++ tests.

Run: python3 tests/oracles/scalar_oracles.py
Everything here is computed from closed-form spectra or brute-force
enumeration, independently of the library code paths.
"""
import itertools
import math
from mpmath import mp, mpf, log, sqrt, binomial

mp.dps = 40


def log2(x):
    return log(x) / log(2)


def renyi(p, a):
    p = [mpf(x) for x in p if x > 0]
    if a == 1:
        return -sum(x * log2(x) for x in p)
    if a == math.inf:
        return -log2(max(p))
    if a == 0:
        return log2(len(p))
    return log2(sum(x ** a for x in p)) / (1 - a)


def h2(p):
    return renyi([p, 1 - p], 1)


print("matrix_power diag(.9,.1)^1.5:", mpf("0.9") ** 1.5, mpf("0.1") ** 1.5)
print("S_2(.9,.1):", renyi([0.9, 0.1], 2))
print("S_{2/3}(.8,.2):", renyi([0.8, 0.2], mpf(2) / 3), " S_0.5:", renyi([0.8, 0.2], 0.5))
print("H(.8):", h2(mpf("0.8")), " H(.9):", h2(mpf("0.9")))
s09 = renyi([0.8, 0.2], mpf("0.9"))
print("S_0.9(.8,.2):", s09, " concentrate exponent a=1.1 rate .9:", (mpf("0.1") / mpf("2.2")) * (s09 - mpf("0.9")))
s15 = renyi([0.9, 0.1], 1.5)
print("S_1.5(.9,.1):", s15, " schumacher exponent a=.75 R=.3:", (mpf(1) / 6) * (mpf("0.3") - s15))

# Werner p|psi-><psi-| + (1-p) I/4, p = 0.5: spectrum {p + (1-p)/4, (1-p)/4 x3}; marginals I/2.
p = mpf("0.5")
spec = [p + (1 - p) / 4] + [(1 - p) / 4] * 3
sab = renyi(spec, 1)
print("Werner(0.5): S(AB)=", sab, " S(A|B)=", sab - 1, " I(A:B)=", 2 - sab)

# Schumacher mass by brute force over all 2^n strings.
def eta_bruteforce(lam, n, R):
    probs = []
    for s in itertools.product(range(len(lam)), repeat=n):
        pr = mpf(1)
        for c in s:
            pr *= mpf(lam[c])
        probs.append(pr)
    probs.sort(reverse=True)
    L = int(mp.floor(mpf(2) ** (n * mpf(R)) + mpf("1e-30")))
    return sum(probs[:L]), L

eta10, L10 = eta_bruteforce(["0.9", "0.1"], 10, "0.5")
print("eta(.9/.1, n=10, R=.5): L=", L10, " eta=", eta10)
eta4, L4 = eta_bruteforce(["0.9", "0.1"], 4, "0.5")
print("eta(.9/.1, n=4, R=.5): L=", L4, " eta=", eta4, " sqrt:", sqrt(eta4))


def eta_binomial(lam1, n, R):
    lam1 = mpf(lam1)
    lam2 = 1 - lam1
    L = mp.floor(mpf(2) ** (n * mpf(R)))
    classes = sorted(((lam1 ** (n - k) * lam2 ** k, binomial(n, k)) for k in range(n + 1)), reverse=True)
    left = L
    tot = mpf(0)
    for pr, m in classes:
        take = min(m, left)
        tot += take * pr
        left -= take
        if left <= 0:
            break
    return tot

e200 = eta_binomial("0.9", 200, "0.3")
e400 = eta_binomial("0.9", 400, "0.6")
print("sqrt eta n=200 R=.3:", sqrt(e200), " eta:", e200)
print("sqrt eta n=400 R=.6:", sqrt(e400), " eta:", e400)


def conc(lam1, n, logL):
    lam1 = mpf(lam1)
    lam2 = 1 - lam1
    L = mpf(2) ** logL
    avg_f = mpf(0)
    avg_f2 = mpf(0)
    succ = mpf(0)
    for k in range(n + 1):
        m = binomial(n, k)
        pk = m * lam1 ** (n - k) * lam2 ** k
        f = min(mpf(1), sqrt(m / L))
        avg_f += pk * f
        avg_f2 += pk * f * f
        if m >= L:
            succ += pk
    return avg_f, sqrt(avg_f2), succ

f, fs, s = conc("0.8", 200, 180)
print("concentrate .8/.2 n=200 logL=180: F(avg)=", f, " F(state)=", fs, " succ=", s)
f, fs, s = conc("0.8", 500, 300)
print("concentrate .8/.2 n=500 logL=300: F(avg)=", f, " succ=", s)
for n in (10, 20):
    f, fs, s = conc("0.5", n, math.floor(0.9 * n))
    print(f"concentrate flat n={n} logL={math.floor(0.9*n)}: succ=", s, " F=", f)
