"""Slow, obviously-correct reference implementations used as test oracles."""

import numpy as np


def brute_force_render(positions, colors, camera, radius, n, cutoff=3.0, ceiling=0.9999,
                       near=0.01, background=(0.0, 0.0, 0.0)):
    """All-points, all-pixels compositor written with plain loops."""
    W, H = camera.width, camera.height
    s = 0.5 * min(W, H)
    proj = []
    for i, P in enumerate(positions):
        X = camera.rotation @ P + camera.translation
        if X[2] <= near:
            continue
        h = camera.intrinsics @ X
        ndc = ((h[0] / h[2] - W / 2) / s, (h[1] / h[2] - H / 2) / s)
        proj.append((i, X[2], ndc))
    img = np.zeros((H, W, 3))
    weights = np.zeros((H, W))
    for j in range(H):
        for i in range(W):
            u = ((i - W / 2) / s, (j - H / 2) / s)
            cands = []
            for idx, z, p in proj:
                d2 = (p[0] - u[0]) ** 2 + (p[1] - u[1]) ** 2
                if d2 <= (cutoff * radius) ** 2:
                    a = min(ceiling, np.exp(-d2 / (2 * radius ** 2)) / np.sqrt(2 * np.pi * radius ** 2))
                    cands.append((z, d2, idx, a))
            cands.sort()
            T = 1.0
            col = np.zeros(3)
            for z, d2, idx, a in cands[:n]:
                col += T * a * colors[idx]
                weights[j, i] += T * a
                T *= 1 - a
            img[j, i] = col + T * np.asarray(background)
    return img, weights


def brute_knn(points, queries, k, exclude_self=False):
    d = np.linalg.norm(queries[:, None, :] - points[None, :, :], axis=-1)
    if exclude_self:
        np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")[:, :k]
    return np.take_along_axis(d, order, axis=1), order


def brute_chamfer(a, b):
    d = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    return d.min(axis=1).mean() + d.min(axis=0).mean()
