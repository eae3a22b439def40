"""Writes tests/unit/scale_c_reference.inc: scale_c cases solved with
exact rationals (fractions.Fraction)."""
import random
from fractions import Fraction
from math import ceil


def scale_c(c, n, f, i, x_char):
    if c == 0:
        return 0, 1 << f
    mag = abs(Fraction(c))
    maxval = Fraction((1 << (n - 1)) - 1, 1 << f)
    s = min(max(Fraction(1, 1 << f),
                mag * Fraction(x_char) ** i / (1 << (n - f - 1)),
                mag / maxval), Fraction(1))
    s_m = ceil(s * (1 << f))
    q = Fraction(c) / Fraction(s_m, 1 << f) * (1 << f)
    c_m = int(q)  # toward zero
    lim = (1 << (n - 1)) - 1
    return max(-lim, min(lim, c_m)), s_m


def main():
    rng = random.Random(20240611)
    cases = [(3.7e-16, 96, 48, 2, 1.0), (1.0, 96, 48, 3, 2.0),
             (-1.0435e-11, 96, 48, 7, 100.0), (0.0, 96, 48, 4, 3.0),
             (0.5, 16, 8, 0, 1.0), (-123.456, 32, 16, 2, 10.0)]
    formats = [(96, 48), (64, 32), (32, 16), (128, 64), (48, 20), (16, 8)]
    while len(cases) < 80:
        n, f = rng.choice(formats)
        c = rng.choice([-1, 1]) * 10 ** rng.uniform(-18, 4)
        i = rng.randint(0, 10)
        x_char = 10 ** rng.uniform(-3, 2)
        cases.append((c, n, f, i, x_char))
    with open("tests/unit/scale_c_reference.inc", "w") as out:
        out.write("// generated by tools/oracles/scale_c_table.py\n")
        out.write("// {c, n, f, i, x_char, c_hat mantissa, s_hat mantissa}\n")
        for c, n, f, i, x in cases:
            cm, sm = scale_c(c, n, f, i, x)
            out.write(f'{{{c!r}, {n}, {f}, {i}, {x!r}, "{cm}", "{sm}"}},\n')


if __name__ == "__main__":
    main()
