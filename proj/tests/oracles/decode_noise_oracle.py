"""Independent Monte-Carlo estimate of decode errors under field noise.

Re-implements the six-face encoder and least-squares decoder in numpy and
reports median rotation (deg), translation (mm) and size (mm) errors for
256 interior points, 5 mm Gaussian noise on every vector component, boxes
with edges U(0.05, 0.4) m. The C++ suite stores these medians as regression
bounds for its own seeded 200-trial run.
"""

import numpy as np
from scipy.spatial.transform import Rotation


def encode(points, R, t, s):
    local = (points - t) @ R  # canonical coordinates
    field = np.zeros((len(points), 6, 3))
    for a in range(3):
        for k, sign in enumerate((1.0, -1.0)):
            m = s[a] / 2 - sign * local[:, a]
            field[:, 2 * a + k] = m[:, None] * (sign * R[:, a])[None, :]
    return field


def decode(field, points):
    dirs = np.stack([(field[:, 2 * a] - field[:, 2 * a + 1]).sum(0) for a in range(3)], axis=1)
    U, _, Vt = np.linalg.svd(dirs)
    D = np.diag([1, 1, np.sign(np.linalg.det(U @ Vt))])
    R = U @ D @ Vt
    size, proj = np.zeros(3), np.zeros(3)
    for a in range(3):
        mp = field[:, 2 * a] @ R[:, a]
        mm = -(field[:, 2 * a + 1] @ R[:, a])
        size[a] = np.mean(mp + mm)
        proj[a] = np.mean(points @ R[:, a] - (mm - mp) / 2)
    return R, R @ proj, size


def main(trials=20000, seed=2024):
    rng = np.random.default_rng(seed)
    rot, trans, size = [], [], []
    for _ in range(trials):
        R = Rotation.random(random_state=rng).as_matrix()
        t = np.array([rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 1 + rng.uniform(-0.5, 0.5)])
        s = rng.uniform(0.05, 0.4, 3)
        pts = (rng.uniform(-0.49, 0.49, (256, 3)) * s) @ R.T + t
        f = encode(pts, R, t, s) + rng.normal(0, 0.005, (256, 6, 3))
        Rd, td, sd = decode(f, pts)
        c = np.clip((np.trace(Rd.T @ R) - 1) / 2, -1, 1)
        rot.append(np.degrees(np.arccos(c)))
        trans.append(1e3 * np.linalg.norm(td - t))
        size.append(1e3 * np.linalg.norm(sd - s))
    for name, v in (("rotation_deg", rot), ("translation_mm", trans), ("size_mm", size)):
        v = np.asarray(v)
        boot = [np.median(rng.choice(v, 200)) for _ in range(2000)]
        print(f"{name}: median {np.median(v):.6g}  200-trial median 99% band [{np.quantile(boot, .005):.6g}, {np.quantile(boot, .995):.6g}]")


if __name__ == "__main__":
    main()
