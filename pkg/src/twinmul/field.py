"""Prime field arithmetic.

Every label, matrix entry and accumulated sum in the package lives in a
prime field F_p.  Values are plain ints in [0, p) on hot paths; the
``FieldElem`` wrapper exists for the public API and carries its modulus
so that mixing fields is caught early.
"""

from __future__ import annotations

from dataclasses import dataclass


class FieldError(ValueError):
    """Base class for field errors."""


class ModulusMismatch(FieldError):
    pass


class DivisionByZero(FieldError, ZeroDivisionError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _prime_power_base(n: int) -> int | None:
    """Return the prime base if n is a proper prime power, else None."""
    for b in range(2, int(n ** 0.5) + 2):
        if n % b == 0:
            m = n
            while m % b == 0:
                m //= b
            return b if m == 1 and is_prime(b) else None
    return None


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise FieldError(f"modulus must be an int, got {self.p!r}")
        if not is_prime(self.p):
            base = _prime_power_base(self.p) if self.p > 3 else None
            if base is not None:
                raise FieldError(
                    f"GF({self.p}) is an extension field of F_{base}; only prime fields are supported")
            raise FieldError(f"modulus {self.p} is not prime")

    @property
    def binary(self) -> bool:
        return self.p == 2

    def __call__(self, value: int) -> "FieldElem":
        return FieldElem(value % self.p, self.p)

    # raw int helpers used by the algorithms
    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        s = a + b
        return s - self.p if s >= self.p else s

    def sub(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def mul(self, a: int, b: int) -> int:
        if self.p == 2:
            return a & b
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in F_{self.p}")
        return _egcd_inverse(a, self.p)

    def elements(self) -> range:
        return range(self.p)


def _egcd_inverse(a: int, m: int) -> int:
    old_r, r = a, m
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    # old_r is gcd(a, m) and equals 1 for prime m and a != 0
    return old_s % m


@dataclass(frozen=True)
class FieldElem:
    value: int
    p: int

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            raise FieldError(f"{self.value} is not a residue mod {self.p}")

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


def _check(F: PrimeField, *xs: FieldElem) -> None:
    for x in xs:
        if x.p != F.p:
            raise ModulusMismatch(f"operand mod {x.p} used in F_{F.p}")


def fe_add(a: FieldElem, b: FieldElem, F: PrimeField) -> FieldElem:
    _check(F, a, b)
    return FieldElem(F.add(a.value, b.value), F.p)


def fe_mul(a: FieldElem, b: FieldElem, F: PrimeField) -> FieldElem:
    _check(F, a, b)
    return FieldElem(F.mul(a.value, b.value), F.p)


def fe_inv(a: FieldElem, F: PrimeField) -> FieldElem:
    _check(F, a)
    return FieldElem(F.inv(a.value), F.p)
