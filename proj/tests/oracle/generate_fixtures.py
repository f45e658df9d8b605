"""Independent oracles for the statistics and BLEU fixtures.

Everything here is computed with mpmath at high precision or exact rationals,
without reference to the C++ sources. The output is a C++ header of frozen
inputs and expected values: tests/oracle_fixtures.hpp.

    python3 tests/oracle/generate_fixtures.py > tests/oracle_fixtures.hpp
"""

import random
from collections import Counter
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 50


# Densities and survival functions by quadrature.

def t_density(x, nu):
    nu = mp.mpf(nu)
    c = mp.exp(mp.loggamma((nu + 1) / 2) - mp.loggamma(nu / 2)) / mp.sqrt(nu * mp.pi)
    return c * mp.power(1 + x * x / nu, -(nu + 1) / 2)


def t_sf(t, nu):
    t = mp.mpf(t)
    if t < 0:
        return 1 - t_sf(-t, nu)
    pts = [t] + [t + d for d in (0.5, 1, 2, 4, 8, 16, 64, 256)] + [mp.inf]
    return mp.quad(lambda x: t_density(x, nu), pts)


def chi2_density(x, k):
    k = mp.mpf(k)
    if x <= 0:
        return mp.mpf(0)
    return mp.exp((k / 2 - 1) * mp.log(x) - x / 2 - (k / 2) * mp.log(2) - mp.loggamma(k / 2))


def chi2_sf(x, k):
    x = mp.mpf(x)
    if x <= 0:
        return mp.mpf(1)
    s = mp.sqrt(2 * mp.mpf(k))
    mode = max(mp.mpf(k) - 2, 0)
    if x < mode:
        lower = [mp.mpf(0)] + [x * f for f in (0.25, 0.5, 0.75)] + [x]
        return 1 - mp.quad(lambda u: chi2_density(u, k), lower)
    pts = [x] + [x + j * s for j in (0.25, 0.5, 1, 2, 4, 8, 16, 32, 64)] + [mp.inf]
    return mp.quad(lambda u: chi2_density(u, k), pts)


def check_against_closed_forms():
    for t, nu in [(2.0, 10), (0.3, 1), (5.0, 30), (3.0, 1e6)]:
        closed = mp.betainc(mp.mpf(nu) / 2, mp.mpf(0.5), 0, nu / (nu + mp.mpf(t) ** 2), regularized=True) / 2
        assert abs(t_sf(t, nu) - closed) < mp.mpf(10) ** -30 * closed, (t, nu)
    for x, k in [(4.605, 2), (0.5, 1), (40, 1), (1e6 + 2000, 1e6), (1e6 - 1000, 1e6)]:
        closed = mp.gammainc(mp.mpf(k) / 2, mp.mpf(x) / 2, mp.inf, regularized=True)
        assert abs(chi2_sf(x, k) - closed) < mp.mpf(10) ** -30 * closed, (x, k)


# Tests and measures, computed by hand.

def paired_t(a, b):
    d = [mp.mpf(x) - mp.mpf(y) for x, y in zip(a, b)]
    n = len(d)
    m = mp.fsum(d) / n
    sd = mp.sqrt(mp.fsum((v - m) ** 2 for v in d) / (n - 1))
    t = m / (sd / mp.sqrt(n))
    nu = n - 1
    greater = t_sf(t, nu)
    less = t_sf(-t, nu)
    two = 2 * t_sf(abs(t), nu)
    return t, nu, two, greater, less


def chi2_table(ca, cb):
    cols = [(x, y) for x, y in zip(ca, cb) if x + y > 0]
    na = sum(x for x, _ in cols)
    nb = sum(y for _, y in cols)
    n = na + nb
    stat = Fraction(0)
    for x, y in cols:
        col = x + y
        for obs, row in ((x, na), (y, nb)):
            e = Fraction(row * col, n)
            stat += (obs - e) ** 2 / e
    df = len(cols) - 1
    return mp.mpf(stat.numerator) / stat.denominator, df, chi2_sf(mp.mpf(stat.numerator) / stat.denominator, df)


def wasserstein_cdf(a, b):
    fa = [Fraction(x) for x in a]
    fb = [Fraction(x) for x in b]
    pts = sorted(set(fa) | set(fb))
    total = Fraction(0)
    for lo, hi in zip(pts, pts[1:]):
        F = Fraction(sum(1 for x in fa if x <= lo), len(fa))
        G = Fraction(sum(1 for x in fb if x <= lo), len(fb))
        total += abs(F - G) * (hi - lo)
    return total


def pearson(x, y):
    x = [mp.mpf(v) for v in x]
    y = [mp.mpf(v) for v in y]
    n = len(x)
    mx = mp.fsum(x) / n
    my = mp.fsum(y) / n
    sxy = mp.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = mp.fsum((a - mx) ** 2 for a in x)
    syy = mp.fsum((b - my) ** 2 for b in y)
    return sxy / mp.sqrt(sxx * syy)


def normal_equations(x, y):
    x = [mp.mpf(v) for v in x]
    y = [mp.mpf(v) for v in y]
    n = len(x)
    sx, sy = mp.fsum(x), mp.fsum(y)
    sxx = mp.fsum(v * v for v in x)
    sxy = mp.fsum(a * b for a, b in zip(x, y))
    det = n * sxx - sx * sx
    slope = (n * sxy - sx * sy) / det
    intercept = (sxx * sy - sx * sxy) / det
    return slope, intercept


def ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hyps, refs):
    matches = [0] * 4
    totals = [0] * 4
    c = r = 0
    for h, ref in zip(hyps, refs):
        h, ref = h.split(), ref.split()
        c += len(h)
        r += len(ref)
        for n in range(1, 5):
            hc, rc = ngrams(h, n), ngrams(ref, n)
            matches[n - 1] += sum(min(k, rc[g]) for g, k in hc.items())
            totals[n - 1] += max(len(h) - n + 1, 0)
    if c == 0 or any(m == 0 for m in matches):
        return mp.mpf(0)
    logp = mp.fsum(mp.log(mp.mpf(m) / t) for m, t in zip(matches, totals)) / 4
    bp = mp.mpf(1) if c > r else mp.exp(1 - mp.mpf(r) / c)
    return 100 * bp * mp.exp(logp)


# Fixtures.

def probs(rng, n):
    return [round(rng.random(), 6) for _ in range(n)]


def make_ttest(rng):
    out = [([0.1, 0.4, 0.35, 0.9], [0.2, 0.3, 0.4, 0.5])]
    for i in range(23):
        n = rng.choice([2, 3, 5, 8, 13, 30, 60, 200])
        a = probs(rng, n)
        shift = rng.choice([0.0, 0.01, 0.05, -0.03, 0.2])
        b = [min(1.0, max(0.0, round(x + shift + rng.gauss(0, 0.05), 6))) for x in a]
        out.append((a, b))
    return out


def make_chi2(rng):
    out = [(["pos", "neg"], [20, 0], [0, 20]), (["pos", "neg", "neu"], [10, 10, 10], [10, 10, 10]),
           (["pos", "neg", "neu"], [12, 0, 7], [5, 0, 9])]
    for i in range(21):
        k = rng.randint(2, 5)
        labels = ["l%d" % j for j in range(k)]
        ca = [rng.randint(0, 60) for _ in range(k)]
        cb = [rng.randint(0, 60) for _ in range(k)]
        if rng.random() < 0.3:
            z = rng.randrange(k)
            ca[z] = cb[z] = 0
        if sum(1 for x, y in zip(ca, cb) if x + y) < 2 or sum(ca) == 0 or sum(cb) == 0:
            ca, cb = [3] + ca[1:], [0] + [v + 1 for v in cb[1:]]
        out.append((labels, ca, cb))
    return out


def make_wd(rng):
    out = [([0.1, 0.7, 0.3], [0.25, 0.9, 0.05, 0.5, 0.3]), ([0.2], [0.7])]
    for i in range(22):
        a = probs(rng, rng.randint(1, 40))
        b = probs(rng, rng.randint(1, 40))
        if i % 5 == 0:
            b = b + a[: len(a) // 2]
        out.append((a, b))
    return out


def make_pearson(rng):
    out = [([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], [2.1, 3.9, 6.2, 7.8, 10.1, 12.2])]
    for i in range(23):
        n = rng.randint(3, 50)
        x = probs(rng, n)
        slope = rng.uniform(-2, 2)
        y = [round(slope * v + rng.gauss(0, 0.3), 6) for v in x]
        out.append((x, y))
    return out


def make_ols(rng):
    out = []
    for i in range(24):
        n = 20 if i < 4 else rng.randint(3, 40)
        x = [round(rng.uniform(-10, 10), 6) for _ in range(n)]
        y = [round(rng.uniform(-3, 3) * v + rng.uniform(-5, 5) + rng.gauss(0, 1), 6) for v in x]
        out.append((x, y))
    return out


WORDS = "the cat sat on a mat and dog ran to park in sun".split()


def sentence(rng, n):
    return " ".join(rng.choice(WORDS) for _ in range(n))


def make_bleu(rng):
    out = [(["the cat sat on the mat", "a dog ran in the park today"],
            ["the cat sat on a mat", "the dog ran to the park today"])]
    while len(out) < 24:
        k = rng.randint(1, 6)
        refs = [sentence(rng, rng.randint(4, 14)) for _ in range(k)]
        hyps = []
        for r in refs:
            toks = r.split()
            toks = [w if rng.random() < 0.75 else rng.choice(WORDS) for w in toks]
            if rng.random() < 0.5:
                toks = toks[: max(1, len(toks) - rng.randint(0, 3))]
            else:
                toks = toks + [rng.choice(WORDS) for _ in range(rng.randint(0, 3))]
            hyps.append(" ".join(toks))
        if bleu(hyps, refs) > 0:
            out.append((hyps, refs))
    return out


T_GRID = [0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, -0.7, -2.5]
DFS = [1, 2, 5, 30, 1e6]


def chi2_grid():
    pts = []
    for k in DFS:
        s = (2 * k) ** 0.5
        xs = [k + c * s for c in (-0.9, -0.3, 0.0, 1.0, 2.0, 4.0)]
        if k < 100:
            xs += [0.05, 0.5, 3.84, 40.0]
        pts += [(round(x, 6), k) for x in xs if x > 0]
    return pts


def fmt(v):
    return repr(float(v))


def vec(v):
    return "{" + ", ".join(fmt(x) for x in v) + "}"


def strvec(v):
    return "{" + ", ".join('"%s"' % s for s in v) + "}"


def ivec(v):
    return "{" + ", ".join(str(x) for x in v) + "}"


def main():
    check_against_closed_forms()
    rng = random.Random(20240917)
    print("// Generated by tests/oracle/generate_fixtures.py. Do not edit.")
    print("#pragma once\n")
    print("#include <string>\n#include <vector>\n")
    print("namespace oracle {\n")

    print("struct SfPoint { double x; double df; double sf; };\n")
    print("inline const std::vector<SfPoint> kStudentT = {")
    for nu in DFS:
        for t in T_GRID:
            print("    {%s, %s, %s}," % (fmt(t), fmt(nu), fmt(t_sf(t, nu))))
    print("};\n")
    print("inline const std::vector<SfPoint> kChiSquare = {")
    for x, k in chi2_grid():
        print("    {%s, %s, %s}," % (fmt(x), fmt(k), fmt(chi2_sf(x, k))))
    print("};\n")

    print("struct TTestCase { std::vector<double> a, b; double t, df, p_two, p_greater, p_less; };\n")
    print("inline const std::vector<TTestCase> kTTest = {")
    for a, b in make_ttest(rng):
        t, nu, two, g, l = paired_t(a, b)
        print("    {%s,\n     %s,\n     %s, %s, %s, %s, %s}," % (vec(a), vec(b), fmt(t), fmt(nu), fmt(two), fmt(g), fmt(l)))
    print("};\n")

    print("struct ChiCase { std::vector<std::string> labels; std::vector<long long> a, b; double stat, df, p; };\n")
    print("inline const std::vector<ChiCase> kChiSquareTable = {")
    for labels, ca, cb in make_chi2(rng):
        stat, df, p = chi2_table(ca, cb)
        print("    {%s, %s, %s, %s, %s, %s}," % (strvec(labels), ivec(ca), ivec(cb), fmt(stat), fmt(df), fmt(p)))
    print("};\n")

    print("struct PairCase { std::vector<double> a, b; std::vector<double> expected; };\n")
    print("inline const std::vector<PairCase> kWasserstein = {")
    for a, b in make_wd(rng):
        w = wasserstein_cdf(a, b)
        print("    {%s,\n     %s,\n     {%s}}," % (vec(a), vec(b), fmt(mp.mpf(w.numerator) / w.denominator)))
    print("};\n")

    print("inline const std::vector<PairCase> kPearson = {")
    for x, y in make_pearson(rng):
        print("    {%s,\n     %s,\n     {%s}}," % (vec(x), vec(y), fmt(pearson(x, y))))
    print("};\n")

    print("// expected = {slope, intercept, r}")
    print("inline const std::vector<PairCase> kOls = {")
    for x, y in make_ols(rng):
        s, i = normal_equations(x, y)
        print("    {%s,\n     %s,\n     {%s, %s, %s}}," % (vec(x), vec(y), fmt(s), fmt(i), fmt(pearson(x, y))))
    print("};\n")

    print("struct BleuCase { std::vector<std::string> hyps, refs; double score; };\n")
    print("inline const std::vector<BleuCase> kBleu = {")
    for hyps, refs in make_bleu(rng):
        print("    {%s,\n     %s,\n     %s}," % (strvec(hyps), strvec(refs), fmt(bleu(hyps, refs))))
    print("};\n")

    print("} // namespace oracle")


if __name__ == "__main__":
    main()
