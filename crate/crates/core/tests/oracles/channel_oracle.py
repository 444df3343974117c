"""Independent reference values for the channel tests.

Vectorized numpy evaluation of line-of-sight and single-bounce gains in the
default 8 x 4 x 3 m room, plus an mpmath root for the two-path bandwidth.
Run with `python3 channel_oracle.py`; the printed numbers are frozen into
tests/oracle_values.rs.
"""

import numpy as np
import mpmath as mp

L, W, H = 8.0, 4.0, 3.0
RHO = {"floor": 0.3, "ceiling": 0.8, "wall": 0.8}
AREA = 2e-5


def unit(el, az):
    el, az = np.radians(el), np.radians(az)
    return np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])


def tiles(size):
    """Centers, normals, areas and reflectivities of every surface tile."""
    out = []
    nx, ny, nz = round(L / size), round(W / size), round(H / size)
    cx = (np.arange(nx) + 0.5) * size
    cy = (np.arange(ny) + 0.5) * size
    cz = (np.arange(nz) + 0.5) * size
    a = size * size
    X, Y = np.meshgrid(cx, cy, indexing="ij")
    for z, n, r in [(0.0, (0, 0, 1), RHO["floor"]), (H, (0, 0, -1), RHO["ceiling"])]:
        c = np.stack([X.ravel(), Y.ravel(), np.full(X.size, z)], 1)
        out.append((c, np.tile(n, (len(c), 1)), r))
    X, Z = np.meshgrid(cx, cz, indexing="ij")
    for y, n in [(0.0, (0, 1, 0)), (W, (0, -1, 0))]:
        c = np.stack([X.ravel(), np.full(X.size, y), Z.ravel()], 1)
        out.append((c, np.tile(n, (len(c), 1)), RHO["wall"]))
    Y, Z = np.meshgrid(cy, cz, indexing="ij")
    for x, n in [(0.0, (1, 0, 0)), (L, (-1, 0, 0))]:
        c = np.stack([np.full(Y.size, x), Y.ravel(), Z.ravel()], 1)
        out.append((c, np.tile(n, (len(c), 1)), RHO["wall"]))
    c = np.concatenate([t[0] for t in out])
    n = np.concatenate([t[1] for t in out]).astype(float)
    r = np.concatenate([np.full(len(t[0]), t[2]) for t in out])
    return c, n, np.full(len(c), a), r


def los(ap, rx, normal, fov_deg, m=1.0):
    v = rx - ap
    d = np.linalg.norm(v)
    cos_phi = -v[2] / d
    cos_psi = np.dot(normal, -v) / d
    if cos_phi <= 0 or cos_psi <= 0 or cos_psi < np.cos(np.radians(fov_deg)):
        return 0.0
    return AREA * (m + 1) / (2 * np.pi * d * d) * cos_phi**m * cos_psi


def first_order(ap, rx, normal, fov_deg, size):
    c, n, a, r = tiles(size)
    v1 = c - ap
    d1 = np.linalg.norm(v1, axis=1)
    cos_emit = -v1[:, 2] / d1
    cos_in1 = -np.einsum("ij,ij->i", n, v1) / d1
    v2 = rx - c
    d2 = np.linalg.norm(v2, axis=1)
    cos_out = np.einsum("ij,ij->i", n, v2) / d2
    cos_in2 = -(v2 @ normal) / d2
    ok = (cos_emit > 0) & (cos_in1 > 0) & (cos_out > 0) & (cos_in2 > 0)
    ok &= cos_in2 >= np.cos(np.radians(fov_deg))
    g = (2 / (2 * np.pi * d1**2)) * cos_emit * cos_in1 * a * r
    g *= (2 / (2 * np.pi * d2**2)) * cos_out * cos_in2 * AREA
    return float(np.sum(np.where(ok, g, 0.0)))


APS = [np.array([1.0, 1.0, 3.0]), np.array([1.0, 3.0, 3.0])]
USERS = [np.array(p) for p in [(0.5, 0.5, 1.0), (0.5, 1.5, 1.0), (1.5, 2.5, 1.0), (1.5, 3.5, 1.0)]]
UP = np.array([0.0, 0.0, 1.0])

if __name__ == "__main__":
    print("wide LOS (user, ap)")
    for u, p in enumerate(USERS):
        for a, ap in enumerate(APS):
            print(u, a, repr(float(los(ap, p, UP, 85.0))))
    print("ADR LOS, branch az 45/135/225/315 at el 70, fov 25 (user 0, ap 0)")
    for az in [45, 135, 225, 315]:
        print(az, repr(float(los(APS[0], USERS[0], unit(70, az), 25.0))))
    print("wide first order, 5 cm tiles (user, ap)")
    for u, p in enumerate(USERS):
        for a, ap in enumerate(APS):
            print(u, a, repr(first_order(ap, p, UP, 85.0, 0.05)))
    print("ADR first order, 5 cm tiles (user, ap, azimuth)")
    for u, p in enumerate(USERS):
        for a, ap in enumerate(APS):
            for az in [45, 135, 225, 315]:
                print(u, a, az, repr(first_order(ap, p, unit(70, az), 25.0, 0.05)))
    mp.mp.dps = 40
    # two unit paths 1 ns apart: |H(f)| = |cos(pi f tau)|, half power at f = 1/(4 tau)
    tau = mp.mpf("1e-9")
    f = mp.findroot(lambda f: mp.cos(mp.pi * f * tau) ** 2 - mp.mpf(1) / 2, 2e8)
    print("two-path bandwidth, tau = 1 ns:", mp.nstr(f, 20))
