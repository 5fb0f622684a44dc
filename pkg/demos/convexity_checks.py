"""
Checking matrix convexity numerically
=====================================

The two-step sampling cost is convex in the relaxed sampling weights. The
argument composes a few matrix maps whose convexity and monotonicity (in the
positive semidefinite order) are checked here on random inputs. Each check
prints the worst slack: the smallest eigenvalue of the gap matrix, which
must be nonnegative for the property to hold.
"""

import numpy as np

from gstrack.convexity import (
    check_matrix_convex_midpoint,
    check_matrix_monotone,
    congruence_inverse,
    neg_congruence_inverse,
    neg_trace_inverse,
    random_ordered_pair,
    random_pieces,
    random_spd,
    trace_inverse,
)

TRIALS = 200


def worst(check):
    return min(check(np.random.default_rng(k)).slack for k in range(TRIALS))


def neg_pair(rng):
    hi, lo = random_ordered_pair(4, rng)
    return -lo, -hi


checks = {
    "tr(X^-1) convex on X > 0":
        lambda r: check_matrix_convex_midpoint(trace_inverse, random_spd(4, r), random_spd(4, r)),
    "tr(X^-1) nonincreasing on X > 0":
        lambda r: check_matrix_monotone(trace_inverse, *random_ordered_pair(4, r), increasing=False),
    "-tr(X^-1) convex on X < 0":
        lambda r: check_matrix_convex_midpoint(neg_trace_inverse, -random_spd(4, r), -random_spd(4, r)),
    "-tr(X^-1) nonincreasing on X < 0":
        lambda r: check_matrix_monotone(neg_trace_inverse, *neg_pair(r), increasing=False),
    "-tr(X^-1) nondecreasing on X < 0":
        lambda r: check_matrix_monotone(neg_trace_inverse, *neg_pair(r), increasing=True),
    "-A'X^-1A - B concave on X > 0":
        lambda r: check_matrix_convex_midpoint(neg_congruence_inverse(random_spd(4, r), random_spd(4, r)),
                                               random_spd(4, r), random_spd(4, r), concave=True),
    "A'X^-1A + B nondecreasing on X < 0":
        lambda r: check_matrix_monotone(congruence_inverse(-random_spd(4, r), -random_spd(4, r)),
                                        *neg_pair(r), increasing=True),
    "A'X^-1A + B nonincreasing on X < 0":
        lambda r: check_matrix_monotone(congruence_inverse(-random_spd(4, r), -random_spd(4, r)),
                                        *neg_pair(r), increasing=False),
}

# %%
# Building blocks
# ---------------
# Note the sign flips on negative definite inputs: a larger (less negative)
# X has a larger inverse magnitude, so -tr(X^-1) grows with X.

for label, check in checks.items():
    w = worst(check)
    print(f"{label:38s} worst slack {w:+.3e}  {'holds' if w >= -1e-9 else 'FAILS'}")

# %%
# The chain through the filter
# ----------------------------
# z1 is minus the next prior covariance, z2 minus the next posterior
# information. z1 is concave; z1^-1 and z2 turn out convex, and the second
# cost term tr((-z2)^-1) is convex, so the whole cost is convex.


def piece_check(attr, dim, concave):
    def check(r):
        p = random_pieces(5, r)
        return check_matrix_convex_midpoint(getattr(p, attr), r.uniform(0, 1, dim), r.uniform(0, 1, dim),
                                            concave=concave)
    return check


for label, attr, dim in [("z1", "z1", 5), ("z1^-1", "z1_inverse", 5), ("z2", "z2", 10),
                         ("second cost term", "second_term", 10)]:
    cvx, ccv = worst(piece_check(attr, dim, False)), worst(piece_check(attr, dim, True))
    print(f"{label:18s} convex slack {cvx:+.3e}   concave slack {ccv:+.3e}")
