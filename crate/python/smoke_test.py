"""Smoke test for the dhg Python bindings."""

import math

import dhg


def close(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    i = dhg.Quaternion(0, 1, 0, 0)
    j = dhg.Quaternion(0, 0, 1, 0)
    assert close((i * j).components(), [0, 0, 0, 1])
    assert close((j * i).components(), [0, 0, 0, -1])

    torus = dhg.Torus([3, 0], [0, 3])
    assert len(torus) == 9 and len(torus.black) == 9 and len(torus.white) == 9
    vb, bw, wv = torus.derived()
    assert sorted(vb) == list(range(9))

    try:
        dhg.Torus([1, 0], [0, 1])
    except ValueError:
        pass
    else:
        raise AssertionError("degenerate lattice accepted")

    surface = dhg.Surface.random(torus, seed=42)
    spectrum = surface.spectrum(samples=16)
    assert spectrum["generic"] and spectrum["end_count"] == 18
    print("spectrum: lambda degree", spectrum["lambda_degree"], "ends", spectrum["end_count"])

    t = surface.darboux(complex(math.cos(0.7), math.sin(0.7)))
    assert len(t["points"]) == 9
    assert t["max_multiratio_dev"] < 1e-8 and not t["regularity_violations"]
    print("darboux: multi-ratio deviation", t["max_multiratio_dev"])

    pentagon = dhg.Polygon.regular(5)
    sp = pentagon.spectral()
    assert sp["hmax_nilpotent"]
    curves = pentagon.flow(complex(0.3, 0.2), 4)
    assert len(curves) == 5 and all(len(c) == 5 for c in curves)

    poly = dhg.Polygon.random(6, seed=3)
    assert poly.spectral()["h0_kernel_residual"] < 1e-8

    report = dhg.verify(criteria=["multiratio", "four-point"])
    assert len(report["results"]) == 2
    for r in report["results"]:
        print(r["name"], "PASS" if r["passed"] else "FAIL")
        assert r["passed"]
    print("ok")


if __name__ == "__main__":
    main()
