import math

import numpy as np
import pytest

from gamacro.codegen import verify_block
from gamacro.oracle import NumMultivector, num_product, num_reverse, num_versor_inverse
from gamacro.stdlib import binding_point, fixture, fixtures, load_stdlib
from helpers import ev, generated, run_fixture, up, vec_of

P = load_stdlib()
CGA5 = P.frames["cga5d"]
E3F = P.frames["e3d"]
NAMES = [fx.name for fx in fixtures()]
RNG = np.random.default_rng(2024)
N = 200


def num(frame, d):
    """NumMultivector from ``{blade_name: values}`` with values of shape (N,)."""
    size = max(np.size(v) for v in d.values())
    return NumMultivector.from_coeffs(
        frame,
        {frame.parse_blade(k): np.broadcast_to(np.asarray(v, dtype=float), (size,)) for k, v in d.items()},
        size,
    )


def named(frame, mv):
    return {frame.blade_name(b): mv.data[b] for b in range(frame.size)}


def sandwich(V, X):
    return num_product("gp", num_product("gp", V, X), num_versor_inverse(V))


def euclid(p):
    """Euclidean position of a (possibly unnormalized) conformal point."""
    return vec_of(p) / np.asarray(p["e0"])


def unit(v):
    return v / np.linalg.norm(v, axis=0)


# ---------------------------------------------------------------------------
# manifest and generation
# ---------------------------------------------------------------------------


def test_every_macro_has_a_fixture():
    assert {fx.macro for fx in fixtures()} == set(P.macros)
    assert len(NAMES) == len(set(NAMES))


@pytest.mark.parametrize("name", [fx.name for fx in fixtures() if fx.golden])
def test_golden_text(name):
    assert generated(name).text == fixture(name).golden


@pytest.mark.parametrize("name", NAMES)
def test_fixture_matches_oracle(name):
    fx = fixture(name)
    g = generated(name)
    rep = verify_block(P, binding_point(fx), g.text, samples=N, rng=np.random.default_rng(7), tol=fx.tolerance)
    assert rep.ok, rep.failures[:3]


@pytest.mark.parametrize("name", NAMES)
def test_optimization_never_costs_operations(name):
    g = generated(name)
    assert g.sequence.op_count() <= g.raw.op_count()
    g.sequence.validate()


# ---------------------------------------------------------------------------
# conformal objects
# ---------------------------------------------------------------------------


def random_points(k, n=N, scale=3.0):
    return [RNG.uniform(-scale, scale, (3, n)) for _ in range(k)]


def test_points_are_null_and_normalized():
    (x,) = random_points(1)
    p = num(CGA5, run_fixture("cga_point", x=ev(x))["p"])
    assert np.allclose(num_product("gp", p, p).data[0], 0, atol=1e-12)
    einf = num(CGA5, {"einf": 1.0})
    assert np.allclose(num_product("lcp", p, einf).data[0], -1, atol=1e-12)


def test_distance_formula():
    x, y = random_points(2)
    d2 = run_fixture("point_distance2", p=up(x), q=up(y))["d2"]["1"]
    assert np.allclose(d2, ((x - y) ** 2).sum(axis=0), rtol=1e-10)


def test_sphere_through_four_points():
    c = RNG.uniform(-2, 2, (3, N))
    r = RNG.uniform(0.5, 3, N)
    pts = [c + r * unit(RNG.normal(size=(3, N))) for _ in range(4)]
    s = run_fixture("sphere_through_4_points", **{f"p{i+1}": up(p) for i, p in enumerate(pts)})["s"]
    cen = euclid(s)
    r2 = (cen * cen).sum(axis=0) - 2 * s["einf"] / s["e0"]
    assert np.allclose(cen, c, atol=1e-9)
    assert np.allclose(np.sqrt(r2), r, atol=1e-9)


def test_plane_through_three_points_contains_them():
    a, b, c = random_points(3)
    w = num(CGA5, run_fixture("plane_through_3_points", p1=up(a), p2=up(b), p3=up(c))["w"])
    for x in (a, b, c, 0.3 * a + 0.7 * b, 2 * c - b):
        assert np.allclose(num_product("sp", w, num(CGA5, up(x))).data[0], 0, atol=1e-9)
    off = a + unit(np.cross(b - a, c - a, axis=0))
    assert not np.allclose(num_product("sp", w, num(CGA5, up(off))).data[0], 0, atol=1e-6)


def test_line_and_circle_contain_their_points():
    a, b, c = random_points(3)
    L = num(CGA5, run_fixture("line_through_2_points", p1=up(a), p2=up(b))["L"])
    on = num(CGA5, up(a + 0.4 * (b - a)))
    assert np.allclose(num_product("op", L, on).data, 0, atol=1e-8)
    C = num(CGA5, run_fixture("circle_through_3_points", p1=up(a), p2=up(b), p3=up(c))["C"])
    for x in (a, b, c):
        assert np.allclose(num_product("op", C, num(CGA5, up(x))).data, 0, atol=1e-8)


def test_point_pair_and_direction():
    a, b = random_points(2)
    P2 = num(CGA5, run_fixture("point_pair", p1=up(a), p2=up(b))["P"])
    assert np.allclose(num_product("op", P2, num(CGA5, up(a))).data, 0, atol=1e-9)
    v = RNG.normal(size=(3, N))
    d = run_fixture("direction_vector", v=ev(v))["d"]
    assert np.allclose(vec_of(d, ("e1^einf", "e2^einf", "e3^einf")), v)


def test_euclidean_part_inverts_point_embedding():
    (x,) = random_points(1)
    k = RNG.uniform(0.5, 4, N)
    p = {b: k * v for b, v in up(x).items()}
    assert np.allclose(vec_of(run_fixture("euclidean_part", p=p)["x"]), x)


def test_tangent_vector_is_tangent_at_point():
    (x,) = random_points(1)
    v = RNG.normal(size=(3, N))
    t = num(CGA5, run_fixture("tangent_vector", p=up(x), v=ev(v))["t"])
    assert np.allclose(num_product("op", t, num(CGA5, up(x))).data, 0, atol=1e-9)
    assert np.abs(t.data).max() > 0


# ---------------------------------------------------------------------------
# versors
# ---------------------------------------------------------------------------


def moved(V, x):
    y = run_fixture("apply_versor_to_point", V=V, X=up(x))["Y"]
    return euclid(y)


def test_translator_moves_points():
    x, t = random_points(2)
    V = run_fixture("translator", t=ev(t))["V"]
    assert np.allclose(moved(V, x), x + t, atol=1e-10)


def test_rotor_rotates_in_plane():
    phi = RNG.uniform(-3, 3, N)
    (x,) = random_points(1)
    V = run_fixture("rotor", B={"e1^e2": 2.5}, phi=phi)["V"]
    y = moved(V, x)
    c, s = np.cos(phi), np.sin(phi)
    assert np.allclose(y, [c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]], atol=1e-10)


def test_scaler_scales_about_origin():
    g = RNG.uniform(-1, 1, N)
    (x,) = random_points(1)
    V = run_fixture("scaler", g=g)["V"]
    assert np.allclose(moved(V, x), np.exp(2 * g) * x, atol=1e-10)


def test_general_rotation_about_offset_center():
    c, x = random_points(2)
    phi = RNG.uniform(-3, 3, N)
    V = run_fixture("general_rotation", c=ev(c), B={"e1^e2": 1.0}, phi=phi)["V"]
    d = x - c
    co, s = np.cos(phi), np.sin(phi)
    want = c + np.array([co * d[0] - s * d[1], s * d[0] + co * d[1], d[2]])
    assert np.allclose(moved(V, x), want, atol=1e-10)


def rodrigues(x, axis, phi):
    k = unit(axis)
    return (
        x * np.cos(phi)
        + np.cross(k, x, axis=0) * np.sin(phi)
        + k * (k * x).sum(axis=0) * (1 - np.cos(phi))
    )


def test_twist_is_screw_motion():
    p, v, x = random_points(3)
    phi = RNG.uniform(-3, 3, N)
    d = RNG.uniform(-2, 2, N)
    V = run_fixture("twist", p=ev(p), v=ev(v), phi=phi, d=d)["V"]
    want = p + rodrigues(x - p, v, phi) + d * unit(v)
    assert np.allclose(moved(V, x), want, atol=1e-9)


def test_versor_inverse():
    V = random_versor()
    W = run_fixture("versor_inverse", V=named(CGA5, V))["W"]
    prod = num_product("gp", V, num(CGA5, W))
    assert np.allclose(prod.data[0], 1)
    assert np.allclose(prod.data[1:], 0, atol=1e-9)


def test_general_versor_application_agrees_with_point_version():
    t, x = random_points(2)
    V = run_fixture("translator", t=ev(t))["V"]
    a = run_fixture("apply_versor", V=V, X=up(x))["Y"]
    b = run_fixture("apply_versor_to_point", V=V, X=up(x))["Y"]
    for k in b:
        assert np.allclose(a[k], b[k])


def random_versor(n=N):
    t = RNG.normal(size=(3, n))
    B = {"e1^e2": RNG.normal(size=n), "e1^e3": RNG.normal(size=n), "e2^e3": RNG.normal(size=n)}
    T = num(CGA5, run_fixture("translator", t=ev(t))["V"])
    R = num(CGA5, run_fixture("rotor", B=B, phi=RNG.uniform(-3, 3, n))["V"])
    S = num(CGA5, run_fixture("scaler", g=RNG.uniform(-0.5, 0.5, n))["V"])
    return num_product("gp", S, num_product("gp", T, R))


COVARIANT = {
    "sphere_through_4_points": ("s", 4),
    "plane_through_3_points": ("w", 3),
    "line_through_2_points": ("L", 2),
    "point_pair": ("P", 2),
    "circle_through_3_points": ("C", 3),
}


@pytest.mark.parametrize("name", sorted(COVARIANT))
def test_objects_are_versor_covariant(name):
    out, k = COVARIANT[name]
    V = random_versor()
    pts = [num(CGA5, up(x)) for x in random_points(k)]
    moved_pts = [sandwich(V, p) for p in pts]
    args = {f"p{i+1}": named(CGA5, p) for i, p in enumerate(pts)}
    margs = {f"p{i+1}": named(CGA5, p) for i, p in enumerate(moved_pts)}
    obj = num(CGA5, run_fixture(name, **args)[out])
    want = sandwich(V, obj).data
    got = num(CGA5, run_fixture(name, **margs)[out]).data
    # objects built with einf pick up the scaler's weight, so compare up to a
    # scalar factor per sample
    k = (got * want).sum(axis=0) / (want * want).sum(axis=0)
    scale = np.maximum(1, np.abs(got).max(axis=0))
    assert np.all(np.abs(got - k * want) / scale < 1e-9)


# ---------------------------------------------------------------------------
# parametric curves and surfaces
# ---------------------------------------------------------------------------


def test_circle_closed_form():
    c = RNG.normal(size=(3, N))
    r = RNG.uniform(0.1, 3, N)
    t = RNG.uniform(0, 1, N)
    u = vec_of(run_fixture("ggpr_circle", c=ev(c), r=r, t=t)["u"])
    a = 2 * math.pi * t
    want = c + np.array([r * np.cos(a), r * np.sin(a), 0 * a])
    assert np.allclose(u, want, atol=1e-12, rtol=1e-12)


def test_helix_closed_form():
    r, k, t = RNG.uniform(0.1, 3, N), RNG.uniform(-2, 2, N), RNG.uniform(-1, 1, N)
    u = vec_of(run_fixture("ggpr_helix", r=r, k=k, t=t)["u"])
    a = 2 * math.pi * k * t
    assert np.allclose(u, [r * np.cos(a), r * np.sin(a), t], atol=1e-12)


def sphere_closed_form(c, r, u, v):
    return c + r * np.array(
        [np.sin(np.pi * u) * np.sin(2 * np.pi * v), np.sin(np.pi * u) * np.cos(2 * np.pi * v), np.cos(np.pi * u)]
    )


def test_sphere_closed_form_and_normal():
    c = RNG.normal(size=(3, N))
    r = RNG.uniform(0.1, 3, N)
    u, v = RNG.uniform(0.05, 0.95, N), RNG.uniform(0, 1, N)
    s = vec_of(run_fixture("ggpr_sphere", c=ev(c), r=r, u=u, v=v)["s"])
    assert np.allclose(s, sphere_closed_form(c, r, u, v), atol=1e-12)
    n = vec_of(run_fixture("ggpr_sphere_normal", c=ev(c), r=r, u=u, v=v)["N"])
    radial = unit(s - c)
    assert np.allclose(np.abs((unit(n) * radial).sum(axis=0)), 1, atol=1e-9)


def test_cylinder_algorithms_agree():
    r, k = RNG.uniform(0.1, 3, N), RNG.uniform(-2, 2, N)
    u, v = RNG.uniform(-1, 1, N), RNG.uniform(0, 1, N)
    a = vec_of(run_fixture("ggpr_cylinder_a", r=r, k=k, u=u, v=v)["s"])
    b = vec_of(run_fixture("ggpr_cylinder_b", r=r, u=k * u + v, v=u)["s"])
    assert np.allclose(a, b, atol=1e-12)
    assert np.allclose(np.hypot(a[0], a[1]), r)


def test_twist_library_point_transform():
    x, axis, p = random_points(3)
    ct, ft, cr, fr = (RNG.uniform(-1, 1, N) for _ in range(4))
    y = vec_of(run_fixture("apply_twist_to_point_3d", x=ev(x), r=ev(axis), p=ev(p), ct=ct, ft=ft, cr=cr, fr=fr)["y"])
    want = p + rodrigues(x - p, axis, cr * fr) + ct * ft * axis
    assert np.allclose(y, want, atol=1e-9)


# ---------------------------------------------------------------------------
# Euclidean rotors and graphics expressions
# ---------------------------------------------------------------------------


def rotor_matrix(R):
    m = run_fixture("rotor_to_matrix", R=R)
    return np.stack([vec_of(m[c]) for c in ("c1", "c2", "c3")], axis=1)  # (3 rows, 3 cols, N)


def test_axis_angle_and_composition():
    vx, vy = RNG.normal(size=(2, 3, N))
    px, py = RNG.uniform(-3, 3, (2, N))
    Rx = run_fixture("axis_angle_rotor", v=ev(vx), phi=px)["R"]
    M = rotor_matrix(Rx)
    e1 = np.array([1.0, 0, 0])[:, None] * np.ones(N)
    assert np.allclose(M[:, 0], rodrigues(e1, vx, px), atol=1e-12)
    R = run_fixture("compose_axis_angle_rotors", vx=ev(vx), px=px, vy=ev(vy), py=py)["R"]
    x = RNG.normal(size=(3, N))
    got = np.einsum("ijn,jn->in", rotor_matrix(R), x)
    assert np.allclose(got, rodrigues(rodrigues(x, vx, px), vy, py), atol=1e-10)


def test_rotor_between_vectors():
    a, b = unit(RNG.normal(size=(3, N))), unit(RNG.normal(size=(3, N)))
    R = run_fixture("rotor_between_vectors", a=ev(a), b=ev(b))["R"]
    assert np.allclose(rotor_matrix(R)[:, 0] * 0 + np.einsum("ijn,jn->in", rotor_matrix(R), a), b, atol=1e-10)


def test_hidden_surface_signed_area():
    v1, v2, v3 = RNG.normal(size=(3, 2, N))
    B = run_fixture("hidden_surface", v1=dict(e1=v1[0], e2=v1[1]), v2=dict(e1=v2[0], e2=v2[1]), v3=dict(e1=v3[0], e2=v3[1]))["B"]
    a, b = v3 - v1, v2 - v1
    assert np.allclose(B["e1^e2"], a[0] * b[1] - a[1] * b[0], atol=1e-12)


@pytest.mark.parametrize("name", ["gram_schmidt_a", "gram_schmidt_b"])
def test_gram_schmidt_orthogonal(name):
    v1, v2, v3 = RNG.normal(size=(3, 3, N))
    out = run_fixture(name, v1=ev(v1), v2=ev(v2), v3=ev(v3))
    w = [vec_of(out[k]) for k in ("w1", "w2", "w3")]
    for i in range(3):
        for j in range(i):
            cos = (w[i] * w[j]).sum(axis=0) / (np.linalg.norm(w[i], axis=0) * np.linalg.norm(w[j], axis=0))
            assert np.allclose(cos, 0, atol=1e-10)
    assert np.allclose(np.abs(np.cross(unit(w[0]), unit(v1), axis=0)).max(axis=0), 0, atol=1e-12)


def test_rotor_to_matrix_is_rotation():
    q = unit(RNG.normal(size=(4, N)))
    M = rotor_matrix({"1": q[0], "e1^e2": q[1], "e1^e3": q[2], "e2^e3": q[3]})
    MtM = np.einsum("kin,kjn->ijn", M, M)
    assert np.allclose(MtM, np.eye(3)[:, :, None], atol=1e-10)
    assert np.allclose(np.linalg.det(np.moveaxis(M, 2, 0)), 1, atol=1e-10)


def test_julia_maps_are_complex_powers():
    x, c = RNG.uniform(-1, 1, (2, 2, N))
    z, zc = x[0] + 1j * x[1], c[0] + 1j * c[1]
    for name, k in (("julia3", 3), ("julia5", 5)):
        y = run_fixture(name, x=dict(e1=x[0], e2=x[1]), c=dict(e1=c[0], e2=c[1]))["y"]
        w = np.conj(z) ** k + zc
        got = y["e1"] + 1j * y["e2"]
        assert np.allclose(got, w, atol=1e-12) or np.allclose(got, z**k + zc, atol=1e-12)


def test_rotor_exp_log_round_trip():
    B = {k: RNG.uniform(-0.9, 0.9, N) for k in ("e1^e2", "e1^e3", "e2^e3")}
    R = run_fixture("rotor_exp", B=B)["R"]
    n2 = sum(np.asarray(v) ** 2 for v in R.values())
    assert np.allclose(n2, 1)
    back = run_fixture("rotor_log", R=R)["B"]
    for k in B:
        assert np.allclose(back[k], B[k], atol=1e-10)


def test_rotor_interpolation_endpoints():
    B1 = {k: RNG.uniform(-0.7, 0.7, N) for k in ("e1^e2", "e1^e3", "e2^e3")}
    B2 = {k: RNG.uniform(-0.7, 0.7, N) for k in ("e1^e2", "e1^e3", "e2^e3")}
    R1 = run_fixture("rotor_exp", B=B1)["R"]
    R2 = run_fixture("rotor_exp", B=B2)["R"]
    for alpha, want in ((0.0, R1), (1.0, R2)):
        got = run_fixture("rotor_interp", R1=R1, R2=R2, alpha=alpha)["R"]
        # R and -R are the same rotation; the log picks the shorter arc
        diff = np.stack([np.asarray(got[k]) - want[k] for k in want])
        summ = np.stack([np.asarray(got[k]) + want[k] for k in want])
        err = np.minimum(np.abs(diff).max(axis=0), np.abs(summ).max(axis=0))
        assert np.all(err < 1e-10)
    mid = run_fixture("rotor_interp", R1=R1, R2=R2, alpha=0.5)["R"]
    assert np.allclose(sum(np.asarray(v) ** 2 for v in mid.values()), 1)


def test_skew_lines_closest_points():
    P1, D1, P2, D2 = RNG.normal(size=(4, 3, N))
    out = run_fixture("skew_lines", P1=ev(P1), D1=ev(D1), P2=ev(P2), D2=ev(D2))
    t1, t2 = out["t1"]["1"], out["t2"]["1"]
    gap = (P1 + t1 * D1) - (P2 + t2 * D2)
    assert np.allclose((gap * D1).sum(axis=0), 0, atol=1e-8)
    assert np.allclose((gap * D2).sum(axis=0), 0, atol=1e-8)


def test_circ3_formula():
    p = RNG.normal(size=(3, N))
    v = vec_of(run_fixture("circ3", p=ev(p))["v"])
    k = 4 * (p[0] ** 2 + p[1] ** 2 - 1)
    assert np.allclose(v, [k * p[0], k * p[1], 2 * p[2]])


def test_vortex_splits_into_axial_and_swirl_parts():
    p, a = RNG.normal(size=(2, 3, N))
    omega, gamma = RNG.uniform(-2, 2, (2, N))
    v = vec_of(run_fixture("vortex_s", p=ev(p), a=ev(a), omega=omega, gamma=gamma)["v"])
    ahat = unit(a)
    axial = (p * ahat).sum(axis=0) * ahat
    rej = p - axial
    swirl = np.cross(ahat, rej, axis=0)
    got_axial = (v * ahat).sum(axis=0) * ahat
    assert np.allclose(got_axial, omega * axial, atol=1e-10)
    rest = v - got_axial
    # the swirl term is perpendicular to both the axis and the radial offset
    # and scales with |a| |rej|
    assert np.allclose((rest * ahat).sum(axis=0), 0, atol=1e-10)
    assert np.allclose((rest * rej).sum(axis=0), 0, atol=1e-10)
    want = np.abs(gamma) * np.linalg.norm(a, axis=0) * np.linalg.norm(swirl, axis=0)
    assert np.allclose(np.linalg.norm(rest, axis=0), want, atol=1e-10)


def test_cross_product_fixture():
    u, w = RNG.normal(size=(2, 3, N))
    got = vec_of(run_fixture("cross_product", u=ev(u), v=ev(w))["w"])
    assert np.allclose(got, np.cross(u, w, axis=0), rtol=1e-12, atol=1e-15)
