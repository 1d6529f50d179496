import numpy as np

from interface_surrogates.geometry import DomainMap, InterfaceModel, kink_hyperplane
from interface_surrogates.mesh import build_square_mesh
from interface_surrogates.pde import EllipticProblem, probe_kink, spike_stats


def synthetic_probe(qs, t_star):
    ts = np.linspace(0, 1, len(qs))
    h = ts[1] - ts[0]
    return {
        "ts": ts,
        "qs": qs,
        "d1": (qs[2:] - qs[:-2]) / (2 * h),
        "d2": (qs[2:] - 2 * qs[1:-1] + qs[:-2]) / h**2,
        "t_star": t_star,
    }


def test_spike_stats_detects_slope_jump():
    ts = np.linspace(0, 1, 41)
    qs = np.abs(ts - 0.512) + 0.3 * ts + 0.05 * ts**2
    st = spike_stats(synthetic_probe(qs, 0.512))
    inside, outside = st["d1"]
    assert inside / outside >= 5


def test_spike_stats_curvature_jump_only():
    ts = np.linspace(0, 1, 41)
    # C1 profile: curvature jumps at the crossing, slope continuous
    qs = 0.3 * ts + np.where(ts > 0.512, 2.0, 0.5) * (ts - 0.512) ** 2
    st = spike_stats(synthetic_probe(qs, 0.512))
    d1_in, d1_out = st["d1"]
    d2_in, d2_out = st["d2"]
    assert d2_in / d2_out >= 5
    # slope-jump statistic stays at the smooth-background level
    assert d1_in <= 5 * max(d1_out, 1e-15)


def test_spike_stats_no_crossing():
    ts = np.linspace(0, 1, 21)
    qs = np.sin(ts)
    st = spike_stats(synthetic_probe(qs, None))
    assert st["d1"][0] is None and st["d1"][1] > 0


def segment_through(dm, x0, rng, lo=0.55, hi=0.45, scale=0.3):
    normal, offset = kink_hyperplane(dm, x0)
    n_hat = normal / np.linalg.norm(normal)
    y_c = offset * normal / (normal @ normal)
    tang = rng.uniform(-0.25, 0.25, dm.model.d)
    tang -= (tang @ n_hat) * n_hat
    y_a = y_c - lo * scale * n_hat + tang
    y_b = y_c + hi * scale * n_hat + tang
    assert max(np.abs(y_a).max(), np.abs(y_b).max()) < 1.0
    return y_a, y_b


def test_elliptic_probe_slope_jump_at_crossing():
    model = InterfaceModel(r0=0.5, d=8, p=3, c=0.08)
    dm = DomainMap(model)
    x0 = np.array([0.505, 0.08])
    rng = np.random.default_rng(3)
    y_a, y_b = segment_through(dm, x0, rng, lo=0.5625, hi=0.4375)

    mesh = build_square_mesh(dm.r0, dm.r_inner, dm.r_outer, 0.03, 0.08)
    prob = EllipticProblem(mesh, dm, alpha_i=100.0)
    res = probe_kink(prob, y_a, y_b, x0, n_steps=21, kind="value")
    assert abs(res["t_star"] - 0.5625) <= 1e-12
    st = spike_stats(res)
    inside, outside = st["d1"]
    assert inside / outside >= 5

    # control: same length segment fully on one side
    shift = 0.65 * (y_b - y_a)
    res2 = probe_kink(prob, y_a + shift, y_b + shift, x0, n_steps=11, kind="value")
    assert res2["t_star"] is None
    assert np.abs(np.diff(res2["qs"], 2)).max() <= 0.2 * inside
