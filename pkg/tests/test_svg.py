import xml.etree.ElementTree as ET

import numpy as np

from apk.generators import gen_ammann_beenker
from apk.patternspace import Region
from apk.stripe import StripeSpec, matched_set
from apk.svg import points_svg, stripe_svg

NS = "{http://www.w3.org/2000/svg}"


def test_points_svg_is_valid_and_stable(fib_small):
    a = points_svg(fib_small, (-20,), (20,))
    assert a == points_svg(fib_small, (-20,), (20,))
    root = ET.fromstring(a)
    assert root.get("version") == "1.1"
    inside = np.sum(np.abs(fib_small.coords[:, 0]) <= 20)
    assert len(root.findall(f"{NS}circle")) == inside


def test_stripe_svg_1d(ints_small):
    spec = StripeSpec((1,), 2 ** 0.5, 0.1, 2)
    ys = matched_set(ints_small, (0,), 2).coords
    svg = stripe_svg(ints_small, spec, (0,), ys, lo=(-5,), hi=(5,), title="a < b & c")
    root = ET.fromstring(svg)
    rects = root.findall(f"{NS}rect")[1:]
    assert 6 <= len(rects) <= 9
    assert root.find(f"{NS}text").text == "a < b & c"


def test_stripe_svg_2d():
    D = gen_ammann_beenker(Region((-5, -5), (5, 5)))
    spec = StripeSpec((1, 1), 1.5, 0.2, 2)
    svg = stripe_svg(D, spec, (0, 0), D.coords[:3], lo=(-5, -5), hi=(5, 5))
    root = ET.fromstring(svg)
    assert len(root.findall(f"{NS}polygon")) >= 6
    assert svg == stripe_svg(D, spec, (0, 0), D.coords[:3], lo=(-5, -5), hi=(5, 5))
