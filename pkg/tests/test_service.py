import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

import _fixtures
from mca.correlation import pearson
from mca.data import round12
from mca.engine import build_grid, cell_to_dict
from mca.render import RenderOptions, render_mca
from mca.sde import SamplingPlan, activation_model, inhibition_model, make_mixture, simulate
from mca.service import create_server


@pytest.fixture(scope="module")
def server():
    srv = create_server(port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


@pytest.fixture(scope="module")
def base(server):
    host, port = server.server_address[:2]
    return f"http://{host}:{port}"


def _request(method, url, payload=None, content_type="application/json"):
    data = None
    if payload is not None:
        data = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
    req = urllib.request.Request(url, data=data, method=method,
                                 headers={"Content-Type": content_type})
    with urllib.request.urlopen(req, timeout=10) as resp:
        body = resp.read()
        ctype = resp.headers.get("Content-Type", "")
        return resp.status, ctype, body


def get_json(url):
    status, _, body = _request("GET", url)
    assert status == 200
    return json.loads(body)


def post_json(url, payload):
    status, _, body = _request("POST", url, payload)
    assert status == 200
    return json.loads(body)


def expect_error(method, url, payload=None, content_type="application/json"):
    try:
        _request(method, url, payload, content_type)
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())
    raise AssertionError(f"{method} {url} unexpectedly succeeded")


@pytest.fixture(scope="module")
def mixture():
    a = simulate(activation_model(), SamplingPlan(samples=200, seed=1))
    b = simulate(inhibition_model(), SamplingPlan(samples=200, seed=1001))
    return make_mixture(a, b, labels=("activation", "inhibition"))


@pytest.fixture(scope="module")
def dataset(base, mixture):
    from mca.data import load_csv

    body = mixture.to_csv().encode()
    meta = post_json(f"{base}/datasets", body)
    # keep the 12-digit parsed matrix: it is exactly what the server holds
    return meta["dataset_id"], load_csv(body)


def test_upload_metadata(dataset, mixture):
    dataset_id, _ = dataset
    assert dataset_id.startswith("d")


def test_dataset_listing_and_meta(base, dataset):
    dataset_id, mixture = dataset
    listing = get_json(f"{base}/datasets")
    entry = next(e for e in listing if e["dataset_id"] == dataset_id)
    assert entry["n_observations"] == 400
    assert entry["variables"] == ["X", "Y", "Z"]
    meta = get_json(f"{base}/datasets/{dataset_id}")
    assert meta["excluded_variables"] == []


def test_upload_validation(base):
    assert expect_error("POST", f"{base}/datasets", b"", "text/csv")[0] == 400
    assert expect_error("POST", f"{base}/datasets", b"A,A\n1,2\n", "text/csv")[0] == 400
    assert expect_error("POST", f"{base}/datasets", b"A,B\n1,zap\n", "text/csv")[0] == 400


def test_upload_size_limit():
    srv = create_server(port=0, max_upload=64)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    try:
        host, port = srv.server_address[:2]
        code, _ = expect_error(
            "POST", f"http://{host}:{port}/datasets", b"A,B\n" + b"1,2\n" * 200, "text/csv"
        )
        assert code == 413
    finally:
        srv.shutdown()
        srv.server_close()


def test_mca_matches_engine(base, dataset):
    dataset_id, mixture = dataset
    cells = get_json(f"{base}/datasets/{dataset_id}/mca?sort=Z&x=X&y=Y&r=5")
    grid = build_grid(mixture, "Z", "X", "Y", 5)
    assert cells == [cell_to_dict(c) for c in grid.cells]


def test_mca_full_population_cell_consistency(base, dataset):
    dataset_id, mixture = dataset
    cells = get_json(f"{base}/datasets/{dataset_id}/mca?sort=Z&x=X&y=Y&r=2")
    assert len(cells) == 1
    whole = pearson(mixture.column("X"), mixture.column("Y"))
    assert cells[0]["r"] == round12(whole.r)
    assert cells[0]["n"] == 400


def test_mca_parameter_validation(base, dataset):
    dataset_id, _ = dataset
    root = f"{base}/datasets/{dataset_id}/mca"
    assert expect_error("GET", f"{root}?sort=Z&x=X&y=Y")[0] == 422
    assert expect_error("GET", f"{root}?sort=Z&x=X&y=Y&r=abc")[0] == 422
    assert expect_error("GET", f"{root}?sort=Z&x=X&y=Q&r=5")[0] == 422
    assert expect_error("GET", f"{root}?sort=Z&x=X&y=Y&r=100000")[0] == 422
    assert expect_error("GET", f"{root}?sort=Z&x=X&y=Y&r=5&method=kendall")[0] == 422
    assert expect_error("GET", f"{base}/datasets/zzz/mca?sort=Z&x=X&y=Y&r=5")[0] == 404


def test_subpopulation_windows(base, dataset):
    dataset_id, mixture = dataset
    root = f"{base}/datasets/{dataset_id}/subpopulation"
    full = get_json(f"{root}?sort=Z&alpha=0.5&beta=0.5")
    assert full["n"] == 400
    assert full["indices"] == list(range(400))
    low = get_json(f"{root}?sort=Z&alpha=0.15&beta=0.15")
    assert low["n"] == 120
    order = np.argsort(mixture.column("Z"), kind="stable")
    assert sorted(int(i) for i in order[:120]) == low["indices"]
    assert expect_error("GET", f"{root}?sort=Z&alpha=0.9&beta=0.5")[0] == 422


def test_sessions_exclusion_flow(base, dataset):
    dataset_id, _ = dataset
    ses = post_json(f"{base}/datasets/{dataset_id}/sessions", {"excluded": [0, 5]})
    sid = ses["session_id"]
    assert ses["excluded"] == [0, 5]
    sub = get_json(
        f"{base}/datasets/{dataset_id}/subpopulation?sort=Z&alpha=0.5&beta=0.5&session={sid}"
    )
    assert sub["n"] == 398
    assert 0 not in sub["indices"] and 5 not in sub["indices"]
    status, _, body = _request(
        "PATCH", f"{base}/datasets/{dataset_id}/sessions/{sid}", {"excluded": [7]}
    )
    assert status == 200 and json.loads(body)["excluded"] == [7]
    sub2 = get_json(
        f"{base}/datasets/{dataset_id}/subpopulation?sort=Z&alpha=0.5&beta=0.5&session={sid}"
    )
    assert sub2["n"] == 399
    assert 7 not in sub2["indices"] and 0 in sub2["indices"]
    meta = get_json(f"{base}/datasets/{dataset_id}/sessions/{sid}")
    assert meta["excluded"] == [7]


def test_session_validation(base, dataset):
    dataset_id, _ = dataset
    assert expect_error("POST", f"{base}/datasets/{dataset_id}/sessions",
                        {"excluded": [99999]})[0] == 422
    assert expect_error("POST", f"{base}/datasets/{dataset_id}/sessions",
                        {"excluded": "all"})[0] == 422
    assert expect_error("POST", f"{base}/datasets/zzz/sessions", {"excluded": []})[0] == 404
    assert expect_error("PATCH", f"{base}/datasets/{dataset_id}/sessions/s999",
                        {"excluded": []})[0] == 404
    ses = post_json(f"{base}/datasets/{dataset_id}/sessions", {})
    assert ses["excluded"] == []
    assert expect_error("PATCH", f"{base}/datasets/{dataset_id}/sessions/{ses['session_id']}",
                        {"other": 1})[0] == 422


def test_empty_session_equals_dataset(base, dataset):
    dataset_id, _ = dataset
    ses = post_json(f"{base}/datasets/{dataset_id}/sessions", {"excluded": []})
    plain = get_json(f"{base}/datasets/{dataset_id}/mca?sort=Z&x=X&y=Y&r=5")
    via = get_json(
        f"{base}/datasets/{dataset_id}/mca?sort=Z&x=X&y=Y&r=5&session={ses['session_id']}"
    )
    assert plain == via


def test_sessions_are_isolated(base, dataset):
    dataset_id, mixture = dataset
    s1 = post_json(f"{base}/datasets/{dataset_id}/sessions", {"excluded": [1, 2, 3]})
    s2 = post_json(f"{base}/datasets/{dataset_id}/sessions", {"excluded": [300]})
    m1 = get_json(f"{base}/datasets/{dataset_id}/mca?sort=Z&x=X&y=Y&r=4&session={s1['session_id']}")
    m2 = get_json(f"{base}/datasets/{dataset_id}/mca?sort=Z&x=X&y=Y&r=4&session={s2['session_id']}")
    active1 = [i for i in range(400) if i not in (1, 2, 3)]
    active2 = [i for i in range(400) if i != 300]
    g1 = build_grid(mixture, "Z", "X", "Y", 4, active=active1)
    g2 = build_grid(mixture, "Z", "X", "Y", 4, active=active2)
    assert m1 == [cell_to_dict(c) for c in g1.cells]
    assert m2 == [cell_to_dict(c) for c in g2.cells]


def test_outlier_exclusion_flips_significance(base):
    matrix, outlier = _fixtures.outlier_matrix(seed=11)
    meta = post_json(f"{base}/datasets", matrix.to_csv().encode())
    did = meta["dataset_id"]
    cells = get_json(f"{base}/datasets/{did}/mca?sort=s&x=x&y=y&r=3")
    with_point = [c for c in cells if c["alpha"] + c["beta"] >= 1.0 - 1e-9]
    assert with_point and all(c["significant"] and c["r"] > 0 for c in with_point)
    ses = post_json(f"{base}/datasets/{did}/sessions", {"excluded": [outlier]})
    after = get_json(f"{base}/datasets/{did}/mca?sort=s&x=x&y=y&r=3&session={ses['session_id']}")
    assert not any(c["significant"] for c in after)


def test_scatter_points(base, dataset):
    dataset_id, mixture = dataset
    ses = post_json(f"{base}/datasets/{dataset_id}/sessions", {"excluded": [0]})
    plain = get_json(f"{base}/datasets/{dataset_id}/scatter?x=X&y=Y")
    assert plain["n"] == 400
    assert plain["points"][0] == {
        "index": 0,
        "x": round12(float(mixture.column("X")[0])),
        "y": round12(float(mixture.column("Y")[0])),
    }
    filtered = get_json(
        f"{base}/datasets/{dataset_id}/scatter?x=X&y=Y&session={ses['session_id']}"
    )
    assert filtered["n"] == 399
    assert all(p["index"] != 0 for p in filtered["points"])
    assert expect_error("GET", f"{base}/datasets/{dataset_id}/scatter?x=X&y=Q")[0] == 422


def test_svg_endpoint_matches_renderer(base, dataset):
    dataset_id, mixture = dataset
    status, ctype, body = _request(
        "GET", f"{base}/datasets/{dataset_id}/mca.svg?sort=Z&x=X&y=Y&r=5"
    )
    assert status == 200
    assert ctype.startswith("image/svg+xml")
    expected = render_mca(build_grid(mixture, "Z", "X", "Y", 5), RenderOptions())
    assert body == expected.encode()


def test_unknown_route(base):
    assert expect_error("GET", f"{base}/nope")[0] == 404


def test_concurrent_session_updates_are_atomic(base, dataset):
    dataset_id, _ = dataset
    ses = post_json(f"{base}/datasets/{dataset_id}/sessions", {"excluded": [0]})
    sid = ses["session_id"]
    stop = threading.Event()
    errors = []

    def flipper():
        sets = [[0], [0, 1, 2, 3, 4]]
        k = 0
        while not stop.is_set():
            _request("PATCH", f"{base}/datasets/{dataset_id}/sessions/{sid}",
                     {"excluded": sets[k % 2]})
            k += 1

    worker = threading.Thread(target=flipper)
    worker.start()
    try:
        for _ in range(30):
            sub = get_json(
                f"{base}/datasets/{dataset_id}/subpopulation?sort=Z&alpha=0.5&beta=0.5&session={sid}"
            )
            if sub["n"] not in (399, 395):
                errors.append(sub["n"])
    finally:
        stop.set()
        worker.join()
    assert not errors
