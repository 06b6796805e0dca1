import json

import pytest

import disco


def page(host, body, links=()):
    anchors = "".join(f'<a href="{u}">x</a>' for u in links)
    return f"http://{host}/", f"<html><title>{host}</title><body><p>{body}</p>{anchors}</body></html>"


def test_tokenize_and_site_key():
    assert disco.tokenize("The Quick, brown FOX") == ["quick", "brown", "fox"]
    assert disco.normalize_site_key("https://www.Example.com:8080/a?b") == "example.com"


def test_parse_page_resolves_links():
    url, html = page("a.test", "hello world", ["/next", "http://b.test/x"])
    doc = disco.parse_page(url, html)
    assert doc["site_key"] == "a.test"
    assert doc["outlinks"] == ["http://a.test/next", "http://b.test/x"]


def test_rank_puts_similar_page_first():
    seeds = [page("s1.test", "violin cello viola bow strings"),
             page("s2.test", "cello bow rosin strings orchestra")]
    cands = [page("c1.test", "football goal stadium referee"),
             page("c2.test", "viola cello strings bow rosin"),
             page("c3.test", "pasta tomato basil garlic")]
    for ranker in ["jaccard", "cosine", "bs", "oneclass"]:
        ranked = disco.rank(cands, seeds, ranker=ranker)
        assert ranked[0][0] == "c2.test"
        assert sorted(k for k, _ in ranked) == ["c1.test", "c2.test", "c3.test"]


def test_rank_rejects_unknown_ranker():
    seeds = [page("s1.test", "alpha")]
    with pytest.raises(ValueError):
        disco.rank([page("c.test", "beta")], seeds, ranker="nope")


def test_ensemble_and_metrics():
    fused = disco.ensemble_rank([["a", "b", "c"], ["b", "a", "c"], ["a", "c", "b"]])
    assert [k for k, _ in fused] == ["a", "b", "c"]
    assert disco.precision_at_k(["a", "b", "c", "d"], ["a", "d"], 2) == 0.5
    assert disco.mean_rank(["a", "b", "c", "d"], ["a", "d"]) == 1.5
    assert disco.median_rank(["a", "b", "c"], ["c"]) == 2.0
    assert disco.harvest_rate(["a", "b"], ["a"]) == 0.5
    assert disco.coverage(["a"], ["a", "b", "c", "d"]) == 0.25
    with pytest.raises(disco.MetricError):
        disco.precision_at_k(["a"], ["a"], 5)


def test_select_operator_plays_untried_arm_first():
    assert disco.select_operator([(0.9, 10, 2), (0.0, 0, 0), (0.5, 3, 1), (0.1, 2, 1)]) == "BACKWARD"
    assert disco.select_operator([(0.9, 10, 2), (0.1, 10, 2), (0.1, 10, 2), (0.1, 10, 2)]) == "FORWARD"


def test_sim_discovery_bandit_beats_single_operator():
    spec = json.dumps({"seed": 3, "n_relevant": 60, "n_irrelevant": 600, "near_junk": 80})
    web = disco.SimWeb.generate(spec)
    assert len(web) == 660
    universe = set(web.coverage_universe())
    relevant = web.relevant_sites()
    bandit = disco.discover(web, operator="bandit", seed=1, page_budget=2000)
    forward = disco.discover(web, operator="forward", seed=1, page_budget=2000)
    assert bandit["ranked"]
    cov_b = disco.coverage(bandit["sites"], list(universe))
    cov_f = disco.coverage(forward["sites"], list(universe))
    assert cov_b > cov_f
    assert disco.harvest_rate(bandit["sites"], relevant) > 0
    again = disco.SimWeb.from_json(web.to_json())
    assert again.seed_urls() == web.seed_urls()


def test_bad_spec_raises():
    with pytest.raises(disco.SpecError):
        disco.SimWeb.generate('{"no_such_field": 1}')


def test_cli_in_process(tmp_path):
    out = tmp_path / "sim"
    code, stdout, _ = disco.run_cli(["gen-sim", "--out", str(out), "--seed", "2"])
    assert code == 0
    assert "pages 2000" in stdout
    code, _, stderr = disco.run_cli(["gen-sim", "--out", str(out)])
    assert code == 3 and stderr
    code, _, _ = disco.run_cli(["rank", "--corpus", str(tmp_path), "--seeds", "x", "--ranker", "bad"])
    assert code == 2
