"""Built-in experiment configs whose results are checked against scenario ground truth."""
from __future__ import annotations

FIXTURE_CONFIGS: dict[str, str] = {
    "rotation": """
[scenario]
name = rotation

[run.1]
op = folner_average
function = one, cos1, cos_sq
grid = 8

[run.2]
op = expectation_field
function = cos1
grid = 32

[run.3]
op = stability_probe
eps = 0.1, 0.5
grid = 2
trials = 100

[run.4]
op = almost_periodicity_test
function = cos1
eps = 0.2
points = circle(0.1)

[run.5]
op = invariant_measure
subset = arc
start = 0.0
length = 0.25
a0_length = 0.5
points = circle(0.1)
""",
    "rational_rotation": """
[scenario]
name = rational_rotation
alpha = 1/7

[run.1]
op = census
sample_size = 40

[run.2]
op = classify_module
sample_size = 40
""",
    "spiral_two_circles": """
[scenario]
name = spiral_two_circles

[run.1]
op = expectation_field
function = z
grid = 60
n_max = 2^22

[run.2]
op = stability_probe
eps = 1.0
points = Sigma(0.0), S+(0.25)
trials = 100

[run.3]
op = almost_periodicity_test
function = z
eps = 0.4
points = Sigma(0.5)
""",
    "spiral_identified": """
[scenario]
name = spiral_identified

[run.1]
op = expectation_field
function = abs_z
grid = 40
""",
    "varying_angle_cylinder": """
[scenario]
name = varying_angle_cylinder

[run.1]
op = expectation_field
function = cos1
grid = 32

[run.2]
op = stability_probe
eps = 0.5
points = limit(0.0, 0.25)
trials = 100
""",
    "triple_cone": """
[scenario]
name = triple_cone

[run.1]
op = classify_module
sample_size = 60
""",
    "dyadic_product": """
[scenario]
name = dyadic_product

[run.1]
op = classify_module
sample_size = 60

[run.2]
op = folner_average
function = dyadic_value, bit1
points = J3(0.3333333333333333, 5), J0(0.0, 12345)

[run.3]
op = invariant_measure
subset = cylinder
prefix = 1, 1
points = J0(0.0, 5)
""",
}
