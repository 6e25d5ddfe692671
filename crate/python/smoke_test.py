"""Smoke test for the pyabelfree extension module.

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
    python python/smoke_test.py
"""

import pyabelfree as af

dekking = af.Morphism(["1123", "133", "223"])
assert dekking.m == 3
assert dekking.images == [[1, 1, 2, 3], [1, 3, 3], [2, 2, 3]]
assert dekking.apply("12") == [1, 1, 2, 3, 1, 3, 3]
assert dekking.fixed_point_prefix(8) == [1, 1, 2, 3, 1, 1, 2, 3]
assert af.parikh([1, 1, 2, 3], 3) == [2, 1, 1]

assert dekking.frequency_matrix() == [[2, 1, 1], [1, 0, 2], [0, 2, 1]]
assert dekking.det() == -7
assert dekking.minors() == [4, 12, 8]
assert dekking.inverse_norm_lt_one()
assert abs(dekking.inverse_norm_estimate() - 0.8589) < 1e-3
assert dekking.preconditions() == []

anc = dekking.ancestors(3)
assert anc["count"] == 1294 and anc["generations"] == [1, 1293, 0] and anc["delta"] == 2

report = dekking.decide(3)
assert report["status"] == "free", report
assert report["scan_bound"] == 46 and report["short_bound"] == 25
assert dekking.decide(3, bound="short")["status"] == "free"
assert af.find_abelian_power(dekking.fixed_point_prefix(2000), 3) is None

control = af.Morphism.parse("alphabet: 2\n1 -> 1 1 2 1\n2 -> 2 2 1\n")
report = control.decide(2)
assert report["status"] == "contains", report
pos, ell = report["witness_position"], report["witness_block_length"]
assert af.find_abelian_power(control.fixed_point_prefix(pos + 2 * ell), 2) is not None

assert af.Morphism([[1, 2], [2, 1]]).decide(2)["status"] == "precondition-failed"
assert af.find_abelian_power("123213", 2) == (0, 3)
assert af.power_template(3, 3).startswith("[")

try:
    af.Morphism.parse("alphabet: 2\n1 -> 1 2\n")
except ValueError:
    pass
else:
    raise AssertionError("missing rule accepted")

print("smoke test passed")
