"""Finite-field arithmetic GF(p^n) for small prime powers (p^n <= 64).

Elements are encoded as integers 0..q-1 whose base-p digits are the
coefficients of the residue polynomial (little-endian: digit i multiplies
x^i). All arithmetic is table-driven, built once per field from a monic
irreducible polynomial over Z_p.
"""

from __future__ import annotations

from .linalg import InvalidInputError

MAX_FIELD_SIZE = 64


class UnsupportedSizeError(InvalidInputError):
    """Field size outside the supported range."""


def factor_prime_power(q: int) -> tuple[int, int] | None:
    """Return (p, n) with q = p^n and p prime, or None."""
    if q < 2:
        return None
    p = 2
    while p * p <= q:
        if q % p == 0:
            n = 0
            m = q
            while m % p == 0:
                m //= p
                n += 1
            return (p, n) if m == 1 else None
        p += 1
    return (q, 1)


def _poly_mul_mod(a: list[int], b: list[int], modulus: list[int], p: int) -> list[int]:
    """Product of coefficient vectors a, b reduced mod (modulus, p)."""
    n = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # reduce by the monic modulus
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for j in range(n):
                prod[k - n + j] = (prod[k - n + j] - c * modulus[j]) % p
    out = prod[:n]
    return out + [0] * (n - len(out))


def _is_irreducible(poly: list[int], p: int) -> bool:
    """Exhaustive trial division of a monic polynomial over Z_p."""
    n = len(poly) - 1
    if n < 1 or poly[-1] != 1:
        return False
    if n == 1:
        return True
    # root check covers all degree-1 factors
    for x in range(p):
        acc = 0
        for c in reversed(poly):
            acc = (acc * x + c) % p
        if acc == 0:
            return False
    # trial division by monic polynomials of degree 2..n//2
    for deg in range(2, n // 2 + 1):
        for code in range(p**deg):
            div = [(code // p**i) % p for i in range(deg)] + [1]
            if _poly_divides(div, poly, p):
                return False
    return True


def _poly_divides(div: list[int], poly: list[int], p: int) -> bool:
    rem = list(poly)
    dn = len(div) - 1
    while len(rem) - 1 >= dn:
        lead = rem[-1]
        if lead:
            for j in range(dn + 1):
                rem[len(rem) - 1 - dn + j] = (rem[len(rem) - 1 - dn + j] - lead * div[j]) % p
        rem.pop()
    return all(c == 0 for c in rem)


def smallest_irreducible(p: int, n: int) -> list[int]:
    """Lexicographically smallest monic irreducible of degree n over Z_p."""
    if n == 1:
        return [0, 1]
    for code in range(p**n):
        poly = [(code // p**i) % p for i in range(n)] + [1]
        if _is_irreducible(poly, p):
            return poly
    raise RuntimeError(f"no irreducible polynomial of degree {n} over Z_{p}")


class GaloisField:
    """GF(p^n) handle with add/mul/inv/trace on integer-encoded elements."""

    def __init__(self, q: int, modulus: list[int] | None = None):
        pn = factor_prime_power(q)
        if pn is None:
            raise InvalidInputError(f"{q} is not a prime power")
        if q > MAX_FIELD_SIZE:
            raise UnsupportedSizeError(f"field size {q} exceeds {MAX_FIELD_SIZE}")
        self.p, self.n = pn
        self.q = q
        if modulus is None:
            modulus = smallest_irreducible(self.p, self.n)
        else:
            modulus = [c % self.p for c in modulus]
            if len(modulus) != self.n + 1 or not _is_irreducible(modulus, self.p):
                raise InvalidInputError("modulus is not a monic irreducible of the right degree")
        self.modulus = tuple(modulus)
        self._build_tables()

    def coeffs(self, a: int) -> tuple[int, ...]:
        """Base-p digit vector of an element (little-endian)."""
        return tuple((a // self.p**i) % self.p for i in range(self.n))

    def _encode(self, coeffs: list[int]) -> int:
        return sum(c * self.p**i for i, c in enumerate(coeffs))

    def _build_tables(self) -> None:
        p, q, mod = self.p, self.q, list(self.modulus)
        self._mul = [[0] * q for _ in range(q)]
        for a in range(q):
            ca = list(self.coeffs(a))
            for b in range(a, q):
                v = self._encode(_poly_mul_mod(ca, list(self.coeffs(b)), mod, p))
                self._mul[a][b] = v
                self._mul[b][a] = v
        self._inv = [0] * q
        for a in range(1, q):
            x = 1
            e = q - 2
            base = a
            while e:
                if e & 1:
                    x = self._mul[x][base]
                base = self._mul[base][base]
                e >>= 1
            self._inv[a] = x
        # trace map tr(x) = x + x^p + ... + x^(p^(n-1)), lands in Z_p
        self._trace = [0] * q
        for a in range(q):
            t = 0
            frob = a
            for _ in range(self.n):
                t = self.add(t, frob)
                frob = self._pow(frob, p)
            digits = self.coeffs(t)
            assert all(c == 0 for c in digits[1:]), "trace escaped the prime subfield"
            self._trace[a] = digits[0]

    def _pow(self, a: int, e: int) -> int:
        x = 1
        while e:
            if e & 1:
                x = self._mul[x][a]
            a = self._mul[a][a]
            e >>= 1
        return x

    def add(self, a: int, b: int) -> int:
        return self._encode(
            [(x + y) % self.p for x, y in zip(self.coeffs(a), self.coeffs(b))]
        )

    def neg(self, a: int) -> int:
        return self._encode([(-x) % self.p for x in self.coeffs(a)])

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self._inv[a]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self._pow(self.inv(a), -e)
        return self._pow(a, e)

    def trace(self, a: int) -> int:
        """Field trace to Z_p, returned as an integer in [0, p)."""
        return self._trace[a]

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 is not in the multiplicative group")
        x, k = a, 1
        while x != 1:
            x = self._mul[x][a]
            k += 1
        return k

    def find_generator(self) -> int:
        """A generator of the (cyclic) multiplicative group, by exhaustion."""
        for a in range(1, self.q):
            if self.multiplicative_order(a) == self.q - 1:
                return a
        raise RuntimeError("multiplicative group is not cyclic; field tables corrupt")
