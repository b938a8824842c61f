import pytest
from fastapi.testclient import TestClient

from ltree.server import ApiSession, create_app


@pytest.fixture()
def client(tmp_path):
    session = ApiSession(seed=0, log_path=str(tmp_path / "events.log"))
    return TestClient(create_app(session))


def post_event(client, type, actor="user", **args):
    return client.post("/events", json={"actor": actor, "type": type,
                                        "args": args})


def test_fresh_state(client):
    r = client.get("/state")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == {"branches": 1, "posts": 0, "friends": 0}
    assert body["posts"] == [] and body["friends"] == []


def test_add_post(client):
    r = post_event(client, "AddPost")
    assert r.status_code == 200
    assert r.json()["status"] == {"branches": 2, "posts": 1, "friends": 0}
    assert r.json()["seq"] == 0


def test_state_after_like_all(client):
    post_event(client, "AddPost")
    post_event(client, "LikeAll")
    (post,) = client.get("/state").json()["posts"]
    assert post["likes"] == 1 and post["views"] == 1


def test_state_stable_across_reads(client):
    post_event(client, "AddPost")
    assert client.get("/state").json() == client.get("/state").json()
    assert client.get("/geometry").json() == client.get("/geometry").json()


def test_random_comment_without_posts_409(client):
    r = post_event(client, "AddComment", post="RANDOM")
    assert r.status_code == 409


def test_unknown_post_422(client):
    post_event(client, "AddPost")
    r = post_event(client, "Like", post=999)
    assert r.status_code == 422


def test_malformed_400(client):
    assert client.post("/events", json={"type": "Dance"}).status_code == 400
    assert client.post("/events", json={"type": "Prune",
                                        "args": {"threshold": -1}}).status_code == 400
    assert client.post(
        "/events", content=b"not json",
        headers={"content-type": "application/json"},
    ).status_code == 400


def test_content_type_enforced(client):
    r = client.post("/events", content=b"{}",
                    headers={"content-type": "text/plain"})
    assert r.status_code == 415


def test_prune_returns_ids(client):
    post_event(client, "AddPost")
    r = post_event(client, "Prune", threshold=50)
    assert r.status_code == 200
    assert r.json()["prunedIds"] == []
    for _ in range(51):
        post_event(client, "View", post=1)
    r = post_event(client, "Prune", threshold=50)
    assert r.json()["prunedIds"] == [1]
    assert r.json()["status"]["posts"] == 0


def test_geometry_markers_match_state(client):
    post_event(client, "AddFriend")
    post_event(client, "AddPost")
    post_event(client, "AddComment", post="RANDOM")
    post_event(client, "AddShare", post=2)
    geo = client.get("/geometry").json()
    state = client.get("/state").json()
    kinds = [m["kind"] for m in geo["markers"]]
    assert kinds.count("friend") == len(state["friends"])
    assert kinds.count("comment") == sum(p["comments"] for p in state["posts"])
    assert kinds.count("share") == sum(p["shares"] for p in state["posts"])
    assert "bounds" in geo and "segments" in geo


def test_every_mutation_appends_one_record(client):
    seqs = []
    seqs.append(post_event(client, "AddPost").json()["seq"])
    seqs.append(post_event(client, "AddFriend").json()["seq"])
    # rejected events must not append
    post_event(client, "Like", post=12345)
    seqs.append(post_event(client, "ViewAll").json()["seq"])
    assert seqs == [0, 1, 2]
    records = client.get("/log").json()["records"]
    assert [r["seq"] for r in records] == [0, 1, 2]


def test_verify_endpoint(client):
    post_event(client, "AddPost")
    r = client.post("/verify")
    assert r.json() == {"ok": True, "firstBadSeq": None}


def test_log_survives_restart(tmp_path):
    path = str(tmp_path / "events.log")
    session = ApiSession(seed=5, log_path=path)
    c = TestClient(create_app(session))
    post_event(c, "AddPost")
    post_event(c, "AddComment", post="RANDOM")
    state = c.get("/state").json()
    geometry = c.get("/geometry").json()
    # new process, same log + seed: identical state and geometry
    session2 = ApiSession(seed=5, log_path=path)
    c2 = TestClient(create_app(session2))
    assert c2.get("/state").json() == state
    assert c2.get("/geometry").json() == geometry


def test_index_page(client):
    r = client.get("/")
    assert r.status_code == 200
    assert "<html" in r.text or "<!doctype" in r.text.lower()
