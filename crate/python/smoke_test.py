"""Builds a few cycles through the bindings, fills them and checks the certificates."""

import math
import sys

import pyisochain as iso


def polygon_ratio(n):
    return math.cos(math.pi / n) / (4 * n * math.sin(math.pi / n))


def main():
    t = iso.generate("regular-polygon", n=64)
    assert t.dim == 1 and t.ambient == 2 and len(t) == 64
    assert t.is_cycle() and len(t.boundary()) == 0
    assert abs(t.mass() - 128 * math.sin(math.pi / 64)) < 1e-12

    s, cert = iso.fill(t)
    assert cert.boundary_residual_zero
    assert all(ok for _, ok in cert.self_check())
    assert all(ok for _, ok in iso.verify(t, s, cert))
    assert abs(cert.ratio - polygon_ratio(64)) < 1e-9, cert.ratio
    assert cert.ratio <= cert.d_k

    again = iso.Certificate.parse(cert.to_text())
    assert abs(again.ratio - cert.ratio) < 1e-15
    assert iso.Chain.parse(s.to_text()) == s

    other = iso.generate("regular-polygon", n=7)
    assert not dict(iso.verify(other, s, cert))["boundary"]

    sphere = iso.generate("polyhedral-sphere", level=1)
    s2, cert2 = iso.fill(sphere)
    assert s2.dim == 3 and cert2.ratio <= cert2.d_k
    assert all(ok for _, ok in iso.verify(sphere, s2, cert2))
    assert sphere.to_obj().startswith("# isochain export")

    consts = dict(iso.constants(2, c_prev=200.0))
    assert abs(float(consts["k2.F"]) * 4800 - 1) < 1e-12

    for bad in (lambda: iso.generate("regular-polygon", n=2),
                lambda: iso.constants(2, lam="1/2"),
                lambda: iso.Chain.parse("isochain 9\n")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"smoke test ok: 64-gon ratio {cert.ratio:.9f}, octahedron ratio {cert2.ratio:.4f}")


if __name__ == "__main__":
    sys.exit(main())
