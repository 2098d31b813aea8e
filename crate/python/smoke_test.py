"""Smoke test for the Python bindings.

Build and install the extension first:

    pip install maturin
    maturin develop --release -m crates/py/Cargo.toml

then run `python python/smoke_test.py`.
"""

import math
import os
import tempfile

import motifhash


def check_calibration():
    delta2 = motifhash.sensitivity_bound(10, 1.0, 0.1)
    assert math.isclose(delta2, 4 * 10 + 2 * 0.1), delta2
    sigma = motifhash.calibrate_noise(delta2, 1.0, 1e-5, 100)
    expected = 2.0 * delta2 * math.sqrt(100 * math.log(1e5)) / 1.0
    assert math.isclose(sigma, expected, rel_tol=1e-12), (sigma, expected)
    values, lost = motifhash.rectified_log_normalize([-1.0, 0.0, 3.0])
    assert not lost and max(values) == 1.0 and min(values) >= 0.0


def check_stages(tmp):
    data = motifhash.generate_dataset(
        {"synthetic": {"n_items": 240, "n_communities": 4, "seed": 3}, "query_fraction": 0.1}
    )
    train, query = data["train"], data["query"]
    assert not set(train["ids"]) & set(query["ids"])

    features = [a + b for a, b in zip(train["images"], train["texts"])]
    graph = motifhash.ClippedGraph.from_features(features, 8)
    assert graph.n_nodes == len(features)
    assert graph.max_degree() <= 8
    assert len(graph.triangle_mass()) == graph.n_edges

    path = os.path.join(tmp, "clipped.tsv")
    graph.save(path)
    assert motifhash.ClippedGraph.load(path).edges() == graph.edges()

    sanitized = motifhash.synthesize(graph, {"epsilon": 2.0, "delta": 1e-5, "t_steps": 50})
    receipt = sanitized.receipt
    assert receipt["epsilon"] == 2.0 and receipt["sigma"] > 0.0

    model = motifhash.HashModel.train(
        train["images"], train["texts"], sanitized, {"k_bits": 16, "epochs": 3}
    )
    assert model.k_bits == 16 and len(model.loss_trace) == 3
    q = model.encode(query["images"], "image")
    db = model.encode(train["texts"], "text")
    assert all(v in (-1, 1) for row in q for v in row)
    score = motifhash.map_at_k(q, db, query["labels"], train["labels"], 50)
    assert 0.0 <= score <= 1.0

    model_path = os.path.join(tmp, "model.json")
    model.save(model_path)
    assert motifhash.HashModel.load(model_path).encode(query["images"], "image") == q

    report = motifhash.audit_sensitivity(
        motifhash.ClippedGraph.from_features(features[:10], 3)
    )
    assert report["pass"], report

    try:
        motifhash.synthesize(graph, {"epsilon": 0.0})
    except ValueError:
        pass
    else:
        raise AssertionError("epsilon = 0 must be rejected")


def check_pipeline():
    report = motifhash.run_pipeline(
        {
            "data": {"synthetic": {"n_items": 200, "n_communities": 4}},
            "graph": {"d_max": 8},
            "synthesis": {"t_steps": 50},
            "distill": {"epochs": 2},
        }
    )
    assert 0.0 <= report["map_avg"] <= 1.0, report


if __name__ == "__main__":
    check_calibration()
    with tempfile.TemporaryDirectory() as tmp:
        check_stages(tmp)
    check_pipeline()
    print("smoke test passed")
