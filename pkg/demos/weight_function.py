# %% The weight function on a minimal section
#
# SO(n), SU(n) and Sp(n) act on stacks of k column vectors by left
# multiplication.  Every orbit meets the set of matrices whose bottom
# block vanishes, and integration against the ambient measure reduces
# to integration over that section against a weight.  This script
# evaluates the weight two independent ways: from the Gram determinant
# of Killing-field images, and from the closed form
# 2^(-dk(n-k)/2) |det B|^(d(n-k)).

import numpy as np

from sectint import (
    DirectSumAction,
    ScalarField,
    delta_e_closed_form,
    delta_e_generic,
    embed_section,
    random_regular_section_point,
    section_coordinate,
    weight_value,
)

rng = np.random.default_rng(0)

print("action                  | generic       | closed form   | rel dev")
print("-" * 68)
for field, n, k in [
    (ScalarField.REAL, 3, 2),
    (ScalarField.REAL, 5, 3),
    (ScalarField.COMPLEX, 4, 2),
    (ScalarField.QUATERNION, 3, 2),
]:
    action = DirectSumAction(field, n, k)
    s = random_regular_section_point(action, rng)
    generic = delta_e_generic(action, s)
    closed = delta_e_closed_form(field, n, k, section_coordinate(action, s))
    print(f"{str(action):23s} | {generic:13.8f} | {closed:13.8f} | {abs(generic-closed)/closed:.1e}")

# %% The weight vanishes exactly on the singular set and is continuous
# across it: follow the path B(t) = diag(t, 1).

action = DirectSumAction(ScalarField.REAL, 3, 2)
print("\n  t      weight   class")
for t in [0.0, 0.05, 0.2, 0.5, 1.0]:
    s = embed_section(action, np.diag([t, 1.0]))
    wv = weight_value(action, s)
    print(f"  {t:4.2f}  {wv.delta_e:8.5f}  {wv.regularity.value}")

# %% A worked value: at the identity coordinate of the SO(3) action on
# two stacked vectors the weight is exactly 1/2.

s = embed_section(action, np.eye(2))
print(f"\nweight at B = I for SO(3), k=2: {delta_e_generic(action, s):.12f}")
