import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexlens.render.composite import (
    ALPHA_CUTOFF,
    CapacityError,
    FragmentBuffer,
    composite_pixel,
    sort_and_composite,
    to_uint8,
)

BLACK = (0.0, 0.0, 0.0)


def test_single_fragment_on_black():
    rgb = composite_pixel([(0.5, (1.0, 0.0, 0.0), 0.5, 0)], BLACK)
    assert np.allclose(rgb, (0.5, 0.0, 0.0))


def test_two_layer_closed_form():
    frags = [
        (0.2, (1.0, 0.0, 0.0), 0.5, 0),   # front, red
        (0.8, (0.0, 0.0, 1.0), 1.0, 0),   # back, opaque blue
    ]
    rgb = composite_pixel(frags, BLACK)
    assert np.allclose(rgb, (0.5, 0.0, 0.5))
    # order of submission must not matter for distinct depths
    rgb2 = composite_pixel(frags[::-1], BLACK)
    assert np.array_equal(rgb, rgb2)


def test_background_fill():
    rgb = composite_pixel([(0.5, (1.0, 0.0, 0.0), 0.25, 0)], (1.0, 1.0, 1.0))
    assert np.allclose(rgb, (0.25 + 0.75, 0.75, 0.75))


def _oracle(fragments, background):
    """Back-to-front full-sort oracle (stable in submission order)."""
    order = sorted(range(len(fragments)), key=lambda i: (fragments[i][0], i))
    rgb = np.asarray(background, dtype=np.float64).copy()
    for i in reversed(order):
        depth, color, alpha, kind = fragments[i]
        rgb = alpha * np.asarray(color) + (1.0 - alpha) * rgb
    return rgb


def test_permutation_invariance_1000_trials():
    rng = np.random.default_rng(99)
    for trial in range(1000):
        n = int(rng.integers(1, 40)) if trial < 900 else int(rng.integers(200, 257))
        depths = rng.random(n)
        frags = [
            (float(depths[i]),
             tuple(rng.random(3)),
             float(rng.uniform(0.0, 0.6)),     # below cutoff -> no early out
             0)
            for i in range(n)
        ]
        base = composite_pixel(frags, BLACK)
        perm = rng.permutation(n)
        shuffled = [frags[i] for i in perm]
        assert np.array_equal(base, composite_pixel(shuffled, BLACK))
        # oracle agreement: exact below the early-out cutoff, bounded by
        # the residual transmittance (<= 1 - cutoff) above it
        coverage = 1.0 - np.prod([1.0 - f[2] for f in frags])
        tol = 1e-9 if coverage <= ALPHA_CUTOFF else (1.0 - ALPHA_CUTOFF) + 1e-9
        assert np.abs(base - _oracle(frags, BLACK)).max() < tol


def test_depth_ties_stable_in_submission_order():
    a = (0.5, (1.0, 0.0, 0.0), 1.0, 0)
    b = (0.5, (0.0, 1.0, 0.0), 1.0, 0)
    assert np.allclose(composite_pixel([a, b], BLACK), (1, 0, 0))
    assert np.allclose(composite_pixel([b, a], BLACK), (0, 1, 0))


def test_early_out_behind_opaque():
    frags = [
        (0.1, (1.0, 0.0, 0.0), 1.0, 0),
        (0.9, (0.0, 1.0, 0.0), 1.0, 0),
    ]
    assert np.allclose(composite_pixel(frags, BLACK), (1, 0, 0))


def test_buffer_discards_transparent():
    buf = FragmentBuffer(2, 2)
    buf.add(0, 0, 0.5, (1, 0, 0), 0.0, 0)
    buf.add(0, 0, 0.5, (1, 0, 0), -0.1, 0)
    assert buf.total == 0
    buf.add(1, 1, 0.5, (1, 0, 0), 0.5, 0)
    assert buf.total == 1
    assert buf.max_list_length() == 1


def test_sort_and_composite_image():
    buf = FragmentBuffer(2, 1)
    buf.add(0, 0, 0.3, (1.0, 0.0, 0.0), 0.5, 0)
    img = sort_and_composite(buf, background="white")
    assert img.shape == (1, 2, 4)
    assert np.allclose(img[0, 0, :3], (1.0, 0.5, 0.5))
    assert np.allclose(img[0, 1, :3], (1.0, 1.0, 1.0))
    assert (img[..., 3] == 1.0).all()


def test_capacity_error_reports_required():
    buf = FragmentBuffer(1, 1)
    for i in range(7):
        buf.add(0, 0, i / 10.0, (1, 1, 1), 0.1, 0)
    with pytest.raises(CapacityError) as exc:
        sort_and_composite(buf, capacity=3)
    assert exc.value.required == 7
    assert exc.value.capacity == 3
    assert "required capacity is 7" in str(exc.value)
    # large enough capacity passes
    sort_and_composite(buf, capacity=7)


def test_to_uint8_rounding():
    img = np.array([[[0.0, 0.5, 1.0, 1.0]]])
    out = to_uint8(img)
    assert out.dtype == np.uint8
    assert list(out[0, 0]) == [0, 128, 255, 255]


@settings(max_examples=200, deadline=None)
@given(st.lists(
    st.tuples(
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        st.floats(min_value=0.0, max_value=0.9, allow_nan=False),
    ),
    min_size=1, max_size=30,
))
def test_alpha_accumulation_bounded(entries):
    frags = [(d, (0.5, 0.5, 0.5), a, 0) for d, a in entries]
    rgb = composite_pixel(frags, BLACK)
    assert (rgb >= 0).all() and (rgb <= 1.0 + 1e-12).all()
