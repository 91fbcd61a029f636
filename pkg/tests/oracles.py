"""Reference computations that share no code with the package."""

import itertools
import math
from fractions import Fraction


def enumerate_paths(n):
    """Law of X_n by summing over all 0/1 increment histories."""
    law = {}
    for history in itertools.product((0, 1), repeat=n):
        prob = Fraction(1)
        state = 0
        for y in history:
            up = Fraction(1, 1 + state)
            prob *= up if y else 1 - up
            if prob == 0:
                break
            state += y
        if prob:
            law[state] = law.get(state, 0) + prob
    return law


def poly_expand_partial_fractions(k):
    """A[i,k] by solving the residue condition directly: evaluate the product at its root."""
    out = {}
    for i in range(1, k + 1):
        x = Fraction(i + 1, i)  # root of 1 - i x/(i+1) in the reciprocal variable
        val = Fraction(1)
        for h in range(1, k + 1):
            if h != i:
                val *= 1 - Fraction(h, h + 1) * x
        out[i] = 1 / val
    return out


def poisson_mixture(k, t, rows):
    """sum_n e^-t t^n / n! * rows[n][k] with the rows supplied by the caller."""
    return math.fsum(math.exp(-t) * t**n / math.factorial(n) * float(rows[n].get(k, 0)) for n in range(len(rows)))
