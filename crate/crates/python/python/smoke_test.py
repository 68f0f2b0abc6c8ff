"""Smoke test for the gapcert_py extension: run, inspect, verify."""

import json
import math

import gapcert_py as gc


def main():
    # diag(1, 2), b = 0, x0 = (1, 1): CG finishes in two steps.
    p = gc.Problem([[1.0, 0.0], [0.0, 2.0]], [0.0, 0.0], [1.0, 1.0])
    assert p.n == 2 and p.mu == 1.0 and p.L == 2.0
    assert p.value([1.0, 1.0]) == 1.5
    assert p.gradient([1.0, 1.0]) == [1.0, 2.0]

    cg = gc.run(p, "cg")
    assert cg.iterations == 2, cg
    y1 = cg.y(1)
    assert abs(y1[0] - 4 / 9) < 1e-12 and abs(y1[1] + 1 / 9) < 1e-12

    nest = gc.run(p, "nesterov", iters=10)
    assert abs(nest.column("G_anchored")[0] - 0.875) < 1e-12
    assert gc.verify(nest)["pass"]

    q = gc.Problem.generate("n=40,profile=geometric,kappa=100,seed=1")
    for method in ["nesterov", "nemirovski_line", "nemirovski_plane", "cg"]:
        t = gc.run(q, method)
        report = gc.verify(t)
        assert report["pass"], (method, [c for c in report["checks"] if not c["pass"]])
        print(f"{method:18s} iterations={t.iterations:3d} status={t.status} final_gap={t.final_gap:.3e}")

    t = gc.run(q, "nesterov")
    phi = t.column("Phi")
    assert all(b <= a + 1e-9 for a, b in zip(phi, phi[1:]))
    again = gc.Trace.from_json(t.to_json())
    assert again.column("f_y") == t.column("f_y")
    assert t.to_csv().splitlines()[0].startswith("iter,")

    gd = gc.verify(gc.run(q, "gradient_descent"))
    assert any(c["status"] == "not_claimed" for c in gd["checks"])

    assert gc.Problem.from_json(q.to_json()).f_star == q.f_star
    json.loads(q.to_json())

    bound = gc.theorem_bound(10, 0.0, 1.0, 1.0)
    assert math.isclose(bound, 4 / (11 * 12) * 0.5)
    sched = gc.schedule(0.0, 1.0, 3)
    assert sched[0] == (1.0, 1.0)

    try:
        gc.run(q, "no_such_method")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
