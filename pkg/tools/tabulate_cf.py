"""Regenerate the high-precision residue/pole tables embedded in
``layerdiff.laplace``.

Runs the Caratheodory-Fejer construction for the best rational approximation
to exp(z) on the negative real axis in 40-digit arithmetic (mpmath) and prints
one Python literal per order. Takes roughly ten seconds per order.

    python tools/tabulate_cf.py 12 14 16
"""
import sys

import mpmath as mp

mp.mp.dps = 40

K = 75      # Chebyshev coefficients kept
NF = 1024   # sample points on the unit circle
SCALE = 9   # transplant scale factor


def cf_table(n):
    w = [mp.expjpi(mp.mpf(2 * j) / NF) for j in range(NF)]
    winv = [mp.conj(x) for x in w]
    t = [x.real for x in w]
    f_samples = [mp.exp(SCALE * (tt - 1) / (tt + 1)) if tt > -1 + mp.mpf(10) ** -30
                 else mp.mpf(0) for tt in t]
    c = [mp.fsum(f_samples[j] * w[(j * k) % NF].real for j in range(NF)) / NF
         for k in range(K + 1)]

    hank = mp.matrix(K, K)
    for i in range(K):
        for j in range(K):
            hank[i, j] = c[1 + i + j] if i + j + 1 <= K else 0
    evals, evecs = mp.eigsy(hank)
    order = sorted(range(K), key=lambda i: -abs(evals[i]))
    idx = order[n]
    sigma = abs(evals[idx])
    v = [evecs[i, idx] for i in range(K)]
    u = [x if evals[idx] > 0 else -x for x in v]

    f_analytic = [mp.polyval(c[K::-1], x) for x in w]
    blaschke = [mp.polyval(u[::-1], wi) / mp.polyval(v[::-1], wi) for wi in winv]
    rt = [f_analytic[j] - sigma * w[j] ** K * blaschke[j] for j in range(NF)]

    roots = mp.polyroots(v, maxsteps=400, extraprec=200)
    qk = [z for z in roots if abs(z) > 1]
    if len(qk) != n:
        raise RuntimeError(f"expected {n} exterior roots, found {len(qk)}")
    qc = [mp.mpc(1)]
    for q in qk:
        qc = [a - q * b for a, b in zip(qc + [0], [0] + qc)]
    pt = [rt[j] * mp.polyval(qc, w[j]) for j in range(NF)]
    ptc = [mp.re(mp.fsum(pt[j] * winv[(j * k) % NF] for j in range(NF))) / NF
           for k in range(n + 1)][::-1]

    out = []
    for k, q in enumerate(qk):
        denom = mp.mpc(1)
        for i, other in enumerate(qk):
            if i != k:
                denom *= q - other
        res = mp.polyval(ptc, q) / denom
        z = SCALE * (q - 1) ** 2 / (q + 1) ** 2
        out.append((z, 4 * res * z / (q ** 2 - 1)))
    return sorted([p for p in out if p[0].imag > 0], key=lambda p: p[0].real)


def main(orders):
    for n in orders:
        print(f"    {n}: (")
        for z, r in cf_table(n):
            print(f'        ("{mp.nstr(z.real, 25)}", "{mp.nstr(z.imag, 25)}", '
                  f'"{mp.nstr(r.real, 25)}", "{mp.nstr(r.imag, 25)}"),')
        print("    ),")


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [12, 14, 16])
