import json
from fractions import Fraction

import pytest

from cantorforge.cantor1d import Interval, canonical_json, middle_thirds
from cantorforge.nested_rd import (
    CertificateNotFound,
    DegeneratePair,
    ProductGeometry,
    RotationMatrix,
    build_nested_rep,
    components_at,
    d_min,
    default_candidates,
    dk_sequence,
    image_separations,
    kappa_ratios,
    rotation_search,
    und_certificate,
    verify_certificate,
)


def test_geometry_hull_and_dim():
    geom = ProductGeometry([middle_thirds(4), middle_thirds(4)])
    assert geom.dim == 2
    hull = geom.exact_hull_box()
    assert [(iv.lo, iv.hi) for iv in hull] == [(0, 1), (0, 1)]


def test_point_factor_flattens_an_axis():
    geom = ProductGeometry([middle_thirds(4), Fraction(1, 2)])
    hull = geom.exact_hull_box()
    assert (hull[1].lo, hull[1].hi) == (Fraction(1, 2), Fraction(1, 2))


def test_component_counts_on_the_square():
    geom = ProductGeometry([middle_thirds(6), middle_thirds(6)])
    rep = build_nested_rep(geom, 2, 4, refine_step=2)
    assert len(components_at(rep, 0)) == 1
    # at cube side 1/16 the four corner squares of each thirds-square split
    assert len(components_at(rep, 1)) == 16


def test_components_nest_inside_parents():
    geom = ProductGeometry([middle_thirds(6), middle_thirds(6)])
    rep = build_nested_rep(geom, 2, 4, refine_step=2)
    for parent in components_at(rep, 0):
        for child in parent.children():
            for ax in range(2):
                assert parent.bbox[ax].lo <= child.bbox[ax].lo
                assert child.bbox[ax].hi <= parent.bbox[ax].hi


def test_certificate_shape_and_exact_separations(square_cert):
    cert, _rep = square_cert
    assert cert.dimension == 2
    assert cert.depth == 3
    assert dk_sequence(cert) == (Fraction(1, 9), Fraction(1, 81), Fraction(1, 729))
    assert len(cert.nodes_at_level(1)) == 1
    assert len(cert.nodes_at_level(2)) == 3
    assert len(cert.nodes_at_level(3)) == 9
    for k in (1, 2, 3):
        for node in cert.nodes_at_level(k):
            assert len(node.components) == 3


def test_certificate_ratio_bounds_within_kappa(square_cert):
    cert, _rep = square_cert
    bounds = cert.all_ratio_bounds()
    assert bounds
    for lo, hi in bounds:
        assert Fraction(1, 9) <= lo <= hi <= 9


def test_min_dmin_matches_direct_recomputation(square_cert):
    cert, _rep = square_cert
    node = cert.root
    comps = node.components
    direct = min(
        d_min(comps[i], comps[j])
        for i in range(len(comps))
        for j in range(i + 1, len(comps))
    )
    assert node.min_dmin() == direct


def test_kappa_ratios_are_ordered_and_positive(square_cert):
    cert, _rep = square_cert
    a, b = cert.root.components[0], cert.root.components[1]
    lo, hi = kappa_ratios(a, b)
    assert 0 < lo <= hi


def test_kappa_ratios_reject_overlapping_pair(square_cert):
    cert, _rep = square_cert
    a = cert.root.components[0]
    with pytest.raises(DegeneratePair):
        kappa_ratios(a, a)


def test_exported_certificate_verifies(square_cert):
    cert, _rep = square_cert
    obj = json.loads(cert.to_json())
    ok, problems = verify_certificate(obj)
    assert ok, problems
    # serialize -> parse -> serialize is the identity on the wire form
    assert canonical_json(obj) == cert.to_json()


def test_tampered_certificate_is_rejected(square_cert):
    cert, _rep = square_cert
    obj = json.loads(cert.to_json())
    key, pair = next(iter(obj["root"]["dmin"].items()))
    obj["root"]["dmin"][key] = [pair[0] * 3, pair[1]]  # inflate a separation claim
    ok, problems = verify_certificate(obj)
    assert not ok
    assert any("exceeds recomputed" in p for p in problems)


def test_tampered_bbox_is_rejected(square_cert):
    cert, _rep = square_cert
    obj = json.loads(cert.to_json())
    box = obj["root"]["components"][0]["bbox"]
    box[0][1] = [box[0][1][0], box[0][1][1] * 2]  # shrink the upper endpoint
    ok, problems = verify_certificate(obj)
    assert not ok


def test_flat_geometry_fails_with_axis_diagnosis():
    geom = ProductGeometry([middle_thirds(8), Fraction(0)])
    rep = build_nested_rep(geom, 2, 10, refine_step=2)
    with pytest.raises(CertificateNotFound) as exc:
        und_certificate(rep, max_k=8, depth=1)
    assert "axis 1" in str(exc.value)


def test_rotation_search_fixes_the_flat_line():
    geom = ProductGeometry([middle_thirds(8), Fraction(0)])
    result = rotation_search(
        geom,
        kappa=Fraction(11, 10),
        max_k=4,
        depth=2,
        m0=2,
        max_level=10,
        refine_step=2,
    )
    assert result.matrix.name == "axis-mixing"
    assert result.failures and result.failures[0][0] == "identity"
    eps = Fraction(1, 10**9)
    for lo, hi in result.certificate.all_ratio_bounds():
        assert 1 - eps <= lo <= hi <= 1 + eps


def test_default_candidates_start_with_identity_then_mixing():
    cands = default_candidates(2, seed=0)
    names = [c.name for c in cands]
    assert names[0] == "identity"
    assert names[1] == "axis-mixing"
    assert len(names) == 5


def test_rotation_matrix_round_trip():
    m = RotationMatrix.axis_mixing(3)
    again = RotationMatrix.from_json_obj(m.to_json_obj())
    assert again.rows == m.rows
    assert again.name == m.name


def test_identity_map_reproduces_certified_separations(square_cert):
    cert, _rep = square_cert
    rows = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    shift = (Fraction(0), Fraction(0))
    assert image_separations(cert, rows, shift) == dk_sequence(cert)


def test_near_identity_map_keeps_most_separation(square_cert):
    cert, _rep = square_cert
    eps = Fraction(1, 256)
    rows = ((1 + eps, eps), (-eps, 1 - eps))
    shift = (Fraction(3, 64), Fraction(-1, 32))
    base = dk_sequence(cert)
    moved = image_separations(cert, rows, shift)
    for b, a in zip(moved, base):
        assert b >= Fraction(4, 5) * a


def test_dropping_cells_changes_no_separation(square_cert):
    cert, rep = square_cert
    lean = und_certificate(rep, kappa=Fraction(9), max_k=2, depth=3, keep_cells=False)
    assert dk_sequence(lean) == dk_sequence(cert)
    from cantorforge.nested_rd import InvalidCertificate

    with pytest.raises(InvalidCertificate):
        lean.to_json_obj()
