"""Independent high-precision oracle for the counterexample parameter family.

Run with `python3 example41_mpmath.py`; the printed values are frozen into
the Rust tests. Uses mpmath at 60 significant digits.
"""
from mpmath import mp, mpf, floor, log

mp.dps = 60


def derive(beta, m):
    eps = 1 - beta
    gamma = max((beta + 1) / 2, 1 - eps / (3 * m))
    nstar = int(floor(log(min(mpf(1) / 2, m * (1 - gamma) / eps)) / log(gamma))) + 1
    base = 1 - 1 / (eps * nstar)
    delta = max((gamma + 1) / 2, base ** (mpf(1) / nstar))
    return eps, gamma, nstar, delta


def g(beta, m, a):
    eps, _, nstar, _ = derive(beta, m)
    return eps * (1 - a**nstar) ** 2 / (1 - a)


def sequence(a1, nmax):
    out = []
    a = mpf(a1)
    for n in range(1, nmax + 1):
        eps, gamma, nstar, delta = derive(a, mpf(n))
        out.append((n, a, eps, gamma, nstar, delta))
        a = delta
    return out


def term(br, a):
    _, _, eps, _, big_n, _ = br
    return eps * (1 - a**big_n) ** 2 / (1 - a)


def sup_terms(seq, a):
    return max(term(b, a) for b in seq)


if __name__ == "__main__":
    print("derive(0.5,1):", derive(mpf("0.5"), mpf(1)))
    print("g_{0.5,1}(5/6):", g(mpf("0.5"), mpf(1), mpf(5) / 6))
    seq = sequence(mpf("0.5"), 3)
    for b in seq:
        print("branch", b)
    for b in seq:
        n, a, _, gam, _, _ = b
        print("n", n, "u_gamma(0)", sup_terms(seq, gam), "u_alpha(0)", sup_terms(seq, a))
        ma = 1 / (1 - a) - sup_terms(seq, a)
        print("   m_alpha", ma, "(1-a)m-1", (1 - a) * ma - 1)
    print("m_0.5:", 2 - sup_terms(seq, mpf("0.5")))
