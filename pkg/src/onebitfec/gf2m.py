"""Arithmetic in GF(2^m) and polynomials over GF(2).

Field elements are integers in ``[0, 2^m)`` whose bits are the coefficients
of a polynomial in the primitive element ``alpha``.  GF(2) polynomials are
plain Python integers as well: bit ``i`` is the coefficient of ``x^i``.
"""
from __future__ import annotations

import numpy as np

# Default primitive polynomials, one per extension degree.
DEFAULT_PRIM_POLY = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


class NonPrimitivePolynomial(ValueError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


class FiniteField:
    """GF(2^m) realised with exp/log tables.

    ``exp_table`` has length ``2 * order`` so that products can index it
    with ``log[a] + log[b]`` without a modulo.
    """

    def __init__(self, m: int, prim_poly: int | None = None):
        if not 2 <= m <= 16:
            raise ValueError(f"extension degree must be in [2, 16], got {m}")
        if prim_poly is None:
            prim_poly = DEFAULT_PRIM_POLY[m]
        if prim_poly.bit_length() - 1 != m:
            raise ValueError(f"polynomial {prim_poly:#b} does not have degree {m}")
        self.m = m
        self.prim_poly = prim_poly
        self.size = 1 << m
        self.order = self.size - 1

        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.full(self.size, -1, dtype=np.int64)
        a = 1
        for i in range(self.order):
            if i > 0 and a == 1:
                raise NonPrimitivePolynomial(
                    f"{prim_poly:#b}: alpha has order {i}, expected {self.order}")
            exp[i] = a
            log[a] = i
            a <<= 1
            if a & self.size:
                a ^= prim_poly
        if a != 1:
            # alpha^order must close the cycle; anything else means x is not a unit
            raise NonPrimitivePolynomial(f"{prim_poly:#b} is not primitive")
        exp[self.order:] = exp[:self.order]
        exp.flags.writeable = False
        log.flags.writeable = False
        self.exp_table = exp
        self.log_table = log

    def __repr__(self):
        return f"FiniteField(m={self.m}, prim_poly={self.prim_poly:#x})"

    def alpha_pow(self, i: int) -> int:
        return int(self.exp_table[i % self.order])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("0 has no inverse in GF(2^m)")
        return int(self.exp_table[(self.order - self.log_table[a]) % self.order])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self.exp_table[(self.log_table[a] * e) % self.order])

    def conjugacy_class(self, i: int) -> list[int]:
        """Cyclotomic coset ``{i * 2^j mod n}`` in order of discovery."""
        n = self.order
        i %= n
        coset = [i]
        j = (2 * i) % n
        while j != i:
            coset.append(j)
            j = (2 * j) % n
        return coset

    def minimal_polynomial(self, i: int) -> int:
        """Minimal polynomial of ``alpha^i`` over GF(2), as a bitmask."""
        # coefficients live in GF(2^m) while multiplying out the linear factors
        coeffs = [1]
        for c in self.conjugacy_class(i):
            root = self.alpha_pow(c)
            nxt = [0] * (len(coeffs) + 1)
            for k, a in enumerate(coeffs):
                nxt[k + 1] ^= a
                nxt[k] ^= self.mul(a, root)
            coeffs = nxt
        poly = 0
        for k, a in enumerate(coeffs):
            if a not in (0, 1):
                raise ArithmeticError("minimal polynomial has a non-binary coefficient")
            poly |= a << k
        return poly

    def eval_poly(self, poly: int, x: int) -> int:
        """Evaluate a GF(2) polynomial at a field element (Horner)."""
        acc = 0
        for k in range(poly.bit_length() - 1, -1, -1):
            acc = self.mul(acc, x) ^ ((poly >> k) & 1)
        return acc


def field_new(m: int, prim_poly: int | None = None) -> FiniteField:
    return FiniteField(m, prim_poly)


def gf_mul(f: FiniteField, a: int, b: int) -> int:
    return f.mul(a, b)


def gf_inv(f: FiniteField, a: int) -> int:
    return f.inv(a)


def minimal_polynomial(f: FiniteField, i: int) -> int:
    return f.minimal_polynomial(i)


# --- GF(2)[x] helpers -------------------------------------------------------

def poly_degree(p: int) -> int:
    """Degree of ``p``; -1 for the zero polynomial."""
    return p.bit_length() - 1


def poly_mul(a: int, b: int) -> int:
    res = 0
    while b:
        if b & 1:
            res ^= a
        a <<= 1
        b >>= 1
    return res


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise DivisionByZero("polynomial division by zero")
    db = b.bit_length() - 1
    q = 0
    while a and a.bit_length() - 1 >= db:
        shift = a.bit_length() - 1 - db
        q |= 1 << shift
        a ^= b << shift
    return q, a


def poly_mod(a: int, b: int) -> int:
    return poly_divmod(a, b)[1]


def poly_to_bits(p: int, length: int | None = None) -> np.ndarray:
    """Coefficient vector, lowest degree first."""
    if length is None:
        length = max(p.bit_length(), 1)
    return np.array([(p >> i) & 1 for i in range(length)], dtype=np.uint8)


def bits_to_poly(bits) -> int:
    p = 0
    for i, b in enumerate(bits):
        if b:
            p |= 1 << i
    return p


def poly_str(p: int) -> str:
    if p == 0:
        return "0"
    terms = []
    for k in range(p.bit_length() - 1, -1, -1):
        if (p >> k) & 1:
            terms.append("1" if k == 0 else "x" if k == 1 else f"x^{k}")
    return " + ".join(terms)
