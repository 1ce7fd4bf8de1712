"""Smoke test for the pottsrf extension module (plain asserts, no framework)."""

import numpy as np

import pottsrf


def test_project_simplex():
    p = pottsrf.project_simplex(np.array([0.3, 0.9, -0.2]))
    assert p.shape == (3,)
    assert abs(p.sum() - 1.0) < 1e-12
    assert (p >= 0).all()
    exact = pottsrf.project_simplex(np.array([0.0, 0.0, 1.0]))
    assert np.allclose(exact, [0.0, 0.0, 1.0], atol=1e-12)


def test_three_circles():
    pts, labels = pottsrf.three_circles(seed=3, n=200, dim=5, noise_std=0.0)
    assert pts.shape == (200, 5)
    assert labels.shape == (200,)
    radii = np.hypot(pts[:, 0], pts[:, 1])
    assert np.allclose(radii, labels + 1.0)
    pts2, labels2 = pottsrf.three_circles(seed=3, n=200, dim=5, noise_std=0.0)
    assert (pts == pts2).all() and (labels == labels2).all()


def test_solve_graph():
    # two nodes, unit edge: labeling (0, 0) is optimal with energy 0.5
    edges = np.array([[0, 1, 1.0]])
    f = np.array([[0.0, 3.0], [0.5, 0.0]])
    res = pottsrf.solve_graph(edges, 2, f, alpha=1.0, epsilon=1e-8, max_iter=20000)
    assert list(res["labels"]) == [0, 0]
    assert abs(res["report"]["primal_energy"] - 0.5) < 1e-5
    assert res["report"]["termination"] == "gap"
    assert res["phi"].shape == (2, 2)
    rows = res["phi"].sum(axis=1)
    assert np.allclose(rows, 1.0, atol=1e-9)

    res_admm = pottsrf.solve_graph(edges, 2, f, alpha=1.0, algorithm="admm",
                                   epsilon=1e-8, max_iter=20000)
    assert list(res_admm["labels"]) == [0, 0]


def test_segment():
    side = 16
    img = np.zeros((side, side))
    means = [0.15, 0.4, 0.65, 0.9]
    truth = np.zeros((side, side), dtype=int)
    for y in range(side):
        for x in range(side):
            q = (0 if y < side // 2 else 2) + (0 if x < side // 2 else 1)
            img[y, x] = means[q]
            truth[y, x] = q
    res = pottsrf.segment(img, k=4, alpha=0.2, sigma=0.05, seed=5, max_iter=5000)
    labels = res["labels"]
    assert labels.shape == (side, side)
    assert res["centroids"].shape == (4, 1)
    # each quadrant is constant and the four quadrants use four distinct ids
    ids = {labels[0, 0], labels[0, -1], labels[-1, 0], labels[-1, -1]}
    assert len(ids) == 4
    for y in range(side):
        for x in range(side):
            corner = labels[0 if y < side // 2 else -1, 0 if x < side // 2 else -1]
            assert labels[y, x] == corner


def test_cluster_trials():
    rng = np.random.default_rng(8)
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    pts = np.vstack([c + 0.3 * rng.standard_normal((20, 2)) for c in centers])
    labels = np.repeat(np.arange(3), 20)
    res = pottsrf.cluster_trials(pts, labels, alpha=1.0, s=5, n_trials=2, n_seeds=3,
                                 seed=1, max_iter=2000)
    assert len(res["trials"]) == 2
    assert res["mean_accuracy"] > 0.9
    for trial in res["trials"]:
        assert trial["report"]["iterations"] >= 1
        assert len(trial["labels"]) == 60


def main():
    test_project_simplex()
    test_three_circles()
    test_solve_graph()
    test_segment()
    test_cluster_trials()
    print("python smoke: all checks passed")


if __name__ == "__main__":
    main()
