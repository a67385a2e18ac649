"""Smoke test for the shortc2 extension: python python/smoke_test.py"""
import json

import shortc2

h = shortc2.HenonMap.quadratic_standard()
assert h.degree == 2

value, bound, _, escaped = h.green_plus((0j, 0j))
assert value == 0.0 and not escaped

z = (0.5 + 0.25j, 3.0 - 1.0j)
g, e, _, _ = h.green_plus(z)
g1, e1, _, _ = h.green_plus(h.apply(z))
assert abs(g1 - 2 * g) <= e1 + 2 * e, (g, g1)

back = h.apply_inverse(h.apply(z))
assert abs(back[0] - z[0]) < 1e-12 and abs(back[1] - z[1]) < 1e-12

assert h.membership((0j, 3 + 0j), 5.0) == "Omega_prime_interior"
assert sorted(h.affine_group()) == [0, 1, 2]
assert len(shortc2.HenonMap(3).affine_group()) == 8
assert shortc2.HenonMap(2, [1 + 0j]).affine_group() == [0]

assert shortc2.bihol("8", "1", 2) == 3
assert shortc2.bihol("3", "1", 2) is None

path = json.loads(h.connect((0j, 3 + 0j), (0j, -3 + 0.5j), 3.0))
assert len(path) >= 2

zz, zeta = h.deck(1, 0, 0.3 + 0j, 1.5 + 0.2j, 1.0)
assert zz == 0.3 + 0j and zeta == 1.5 + 0.2j

report = json.loads(h.verify("biholo", samples=20))
assert report["pass"], report

try:
    shortc2.bihol("0", "1", 2)
except shortc2.ShortC2Error as exc:
    assert str(exc).startswith("bad-level"), exc
else:
    raise AssertionError("expected an error")

assert json.loads(shortc2.schema())["version"]
print("ok")
