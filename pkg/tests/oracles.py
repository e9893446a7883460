"""Second implementations used as ground truth by the tests.

Written from the definitions with plain loops; they share nothing with the
package except field multiplication and inversion (tested on their own
against a schoolbook oracle)."""

from trex.gf2e import field


def lagrange_basis(ctx, h, a, x):
    """L_a(x) over nodes 0..h-1, from the product formula."""
    num, den = 1, 1
    for b in range(h):
        if b != a:
            num = ctx.mul(num, x ^ b)
            den = ctx.mul(den, a ^ b)
    return ctx.mul(num, ctx.inv(den))


def lde_value(bits, n, s, d, h, point):
    """sum_i f_i prod_c L_{digit_c(i)}(x_c) with digits of i in base h."""
    ctx = field(s)
    acc = 0
    for i in range(n):
        if not bits[i]:
            continue
        term = 1
        rest = i
        for c in range(d):
            term = ctx.mul(term, lagrange_basis(ctx, h, rest % h, point[c]))
            rest //= h
        acc ^= term
    return acc


def codeword_bit(bits, n, s, d, h, j):
    q = 1 << s
    mask = j % q
    pidx = j // q
    point = [(pidx >> (s * c)) & (q - 1) for c in range(d)]
    v = lde_value(bits, n, s, d, h, point)
    return bin(v & mask).count("1") % 2


def seed_slice(y_bits, indices):
    """Integer whose bit a is y at the a-th smallest index."""
    return sum(y_bits[e] << a for a, e in enumerate(sorted(indices)))


def trevisan_output(f_bits, y_bits, sets, n, s, d, h):
    return [codeword_bit(f_bits, n, s, d, h, seed_slice(y_bits, S)) for S in sets]
