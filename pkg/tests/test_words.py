import random

import pytest

from tfgen.words import (NonInvertible, Word, WordError, WidthMismatch,
                         apply_primitive, bit_reverse, delta, inv_odd, mask,
                         pow_2adic, shift_rotate, uinv, unot, upow, urev,
                         urotl1, ushl, ushr)


def test_logical_agreements():
    # 2 = 1 xor 3 = 2 and 7, and the complement of 13 mod 8 is 2
    assert apply_primitive("xor", Word(1, 4), Word(3, 4)).value == 2
    assert apply_primitive("and", Word(2, 4), Word(7, 4)).value == 2
    assert apply_primitive("not", Word(13, 3)).value == 2


def test_width_mismatch_rejected():
    with pytest.raises(WidthMismatch):
        apply_primitive("add", Word(1, 4), Word(1, 5))


def test_inverse_of_three_mod_16():
    assert inv_odd(Word(3, 4)).value == 11


def test_inverse_identity():
    for n in (1, 2, 5, 12, 64):
        assert inv_odd(Word(1, n)).value == 1


def test_inverse_of_five_mod_8():
    # 5*5 = 25 = 1 mod 8
    assert inv_odd(Word(5, 3)).value == 5
    assert (5 * 5) % 8 == 1


def test_even_divisor_rejected():
    with pytest.raises(NonInvertible):
        inv_odd(Word(6, 4))


def test_inverse_involution_property():
    for n in range(1, 13):
        for a in range(1, 1 << n, 2):
            assert (a * uinv(a, n)) & mask(n) == 1


def test_power_negative_exponent():
    assert pow_2adic(Word(3, 4), -5).value == 11


def test_power_zero_exponent():
    for a in (1, 3, 5, 7):
        assert pow_2adic(Word(a, 4), 0).value == 1


def test_power_word_exponent():
    # 3^11 = 3^-5 = 11 mod 16
    assert pow_2adic(Word(3, 4), Word(11, 4)).value == 11


def test_power_literal_even_base_ok():
    assert pow_2adic(Word(6, 5), 2).value == 36 % 32


def test_power_even_base_rejected_for_word_exponent():
    with pytest.raises(NonInvertible):
        pow_2adic(Word(6, 5), Word(3, 5))


def test_exponent_periodicity():
    # a^(e + 2^(n-2)) = a^e for odd a, exhaustive to width 10
    for n in range(3, 11):
        period = 1 << (n - 2)
        for a in range(1, 1 << n, 2):
            for e in range(period):
                assert upow(a, e + period, n) == upow(a, e, n, literal=True)


def test_bit_reverse_examples():
    assert bit_reverse(Word(1, 4)).value == 8
    assert bit_reverse(Word(3, 4)).value == 12
    for n in (1, 3, 8):
        assert bit_reverse(Word(0, n)).value == 0


def test_bit_reverse_involution():
    for n in (1, 2, 5, 9):
        for x in range(1 << n):
            assert urev(urev(x, n), n) == x


def test_shifts():
    assert shift_rotate("shl", Word(3, 4), 1).value == 6
    assert shift_rotate("shr", Word(13, 4), 2).value == 3
    # 9 = 1001 in digit order; rotating up gives 0011 = 3
    assert shift_rotate("rotl1", Word(9, 4)).value == 3
    with pytest.raises(WordError):
        shift_rotate("shl", Word(1, 4), 4)


def test_delta_digits():
    w = Word(6, 3)
    assert [delta(j, w) for j in range(3)] == [0, 1, 1]
    with pytest.raises(WordError):
        delta(3, w)


def _flip_compatible(op, n):
    # congruent inputs must give congruent outputs; single high-bit
    # flips generate all congruent pairs
    for j in range(1, n):
        low = mask(j)
        for a in range(1 << n):
            b = (a * 0x9E37 + 0x79B9) & mask(n)  # deterministic partner
            fa = op(a, b)
            if (fa ^ op(a ^ (1 << j), b)) & low:
                return False
            if (fa ^ op(a, b ^ (1 << j))) & low:
                return False
    return True


def test_compatibility_of_arithmetic_and_logic_exhaustive():
    ops = {
        "add": lambda a, b: a + b,
        "sub": lambda a, b: a - b,
        "mul": lambda a, b: a * b,
        "and": lambda a, b: a & b,
        "or": lambda a, b: a | b,
        "xor": lambda a, b: a ^ b,
    }
    for name, op in ops.items():
        for n in range(1, 9):
            assert _flip_compatible(op, n), name


def test_compatibility_of_div_and_pow():
    # flipping a bit at or above position j never disturbs bits below j
    rng = random.Random(77)
    for n in (4, 8, 12):
        for _ in range(300):
            a = rng.randrange(1 << n)
            b = rng.randrange(1, 1 << n, 2)
            j = rng.randrange(1, n)
            low = mask(j)
            da = a * uinv(b, n)
            assert (da ^ ((a ^ (1 << j)) * uinv(b, n))) & low == 0
            assert (da ^ (a * uinv(b ^ (1 << j), n))) & low == 0
            e = rng.randrange(1 << n)
            pa = upow(b, e, n)
            assert (pa ^ upow(b, e ^ (1 << j), n)) & low == 0
            assert (pa ^ upow(b ^ (1 << j), e, n)) & low == 0


def test_not_is_complement_within_width():
    for n in (1, 4, 7):
        for x in range(1 << n):
            assert unot(x, n) == mask(n) - x


def test_shr_and_rotl1_are_not_compatible():
    # witnesses at width 2: inputs congruent mod 2, outputs differ mod 2
    assert ushr(0, 1, 2) & 1 != ushr(2, 1, 2) & 1
    assert urotl1(0, 2) & 1 != urotl1(2, 2) & 1
