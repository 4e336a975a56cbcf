"""Smoke test for the salem Python extension.

Build and install with `pip install --no-build-isolation ./crates/salem-py`.
"""

import salem


def main():
    a = salem.EValue("1", "2", 1, 2)  # 1 + sqrt(2)
    b = salem.EValue("2414/1000")
    assert a.compare(b) == "GT"
    assert salem.EValue("0", "4", 1, 4).compare(salem.EValue("0", "2", 1, 2)) == "EQ"
    lo, hi = a.refine(40)
    assert lo != hi

    c3 = salem.cantor_level(3)
    assert len(c3) == 8
    assert c3.contains("2/9") and not c3.contains("1/2")
    assert c3.is_subset_of(salem.IntervalUnion.unit())
    assert salem.IntervalUnion.from_json(c3.to_json()) == c3
    assert salem.hausdorff(salem.IntervalUnion.unit(), salem.IntervalUnion([("0", "0")])) == ("1/2", "1/2")

    mode = salem.Mode("demo")
    s1 = salem.s_level("1", 1, mode)
    assert len(s1) > 0
    t = salem.t_level("1", 2, mode)
    assert t["k"] == 2 and len(t["parent_map"]) == len(t["level"]["intervals"])
    try:
        salem.s_level("1", 9, salem.Mode("certified"))
        raise AssertionError("expected infeasibility")
    except salem.Infeasible:
        pass

    g = salem.g_level("1/2", [1, 1], 2, mode)
    assert len(g) == 1
    trace = salem.g_trace("1/2", [1, 1, 1], 3, mode)
    assert salem.verify_cover_sum(trace)["pass"]

    v = salem.weihrauch_encode([1, 0, 1], 1)
    assert salem.weihrauch_decode(v, 3, 1) == [1, 0, 1]
    try:
        salem.weihrauch_decode("1/4", 1, 1)
        raise AssertionError("expected a guard violation")
    except salem.NonCodeword:
        pass

    verdict = salem.cover_check([{"center": ["1/2"], "radius": "2"}])
    assert verdict["tag"] == "Covers"
    verdict = salem.cover_check([{"center": ["0", "1"], "radius": "1/4"}])
    assert verdict["tag"] == "NotCovers" and verdict["witness"] is None

    code = salem.stick_breaking(6, 7)
    assert salem.validate_tree_code(code)["valid"]
    code["pi"]["0"] = "3/4"
    assert not salem.validate_tree_code(code)["valid"]

    fit = salem.cantor_box_fit(10)
    assert abs(fit["slope"] - 0.6309) < 0.05
    assert salem.verify_vanishing_window(10, "1/100")["pass"]

    print("salem smoke test ok")


if __name__ == "__main__":
    main()
