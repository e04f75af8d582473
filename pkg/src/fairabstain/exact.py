from fractions import Fraction


def as_fraction(x) -> Fraction:
    """Exact rational for a user-supplied number.

    Floats go through ``repr`` so ``0.05`` becomes ``1/20`` rather than the
    nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


def fraction_str(x) -> str:
    return str(as_fraction(x))
