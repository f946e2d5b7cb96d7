import threading

import pytest

from speechqc.core import DimensionId, Preference, TaskKind
from speechqc.cot import IncompleteDims
from speechqc.judge import (
    JudgeClient,
    JudgeConfig,
    MockJudge,
    TransportError,
    UnparseableVerdict,
    extract_rubric_score,
    make_transport,
)
from speechqc.prompts import Message, PromptBundle
from speechqc.reward import RewardDimension


def client(mock=None, retries=2, parallelism=4, seed=0):
    config = JudgeConfig(
        endpoint=f"mock://{seed}", model="mock-judge",
        max_retries=retries, parallelism=parallelism,
    )
    mock = mock if mock is not None else MockJudge(seed=seed)
    return JudgeClient(config, transport=mock, sleeper=lambda _s: None), mock


def test_extract_rubric_score_rules():
    assert extract_rubric_score("Score: 7") == 7
    assert extract_rubric_score("quality is 8/10. Score: 8") == 8
    assert extract_rubric_score("band 0-2 applies... final 11 overall: 3") == 3
    assert extract_rubric_score("excellent") is None
    assert extract_rubric_score("I rate it 12 or 47") is None  # out of range


def test_score_dimension_extracts():
    judge, mock = client()
    mock.push_script("The answer is solid. Score: 7")
    verdict = judge.score_dimension(TaskKind.ASSESSMENT, RewardDimension.HELPFULNESS, "p", "y", "g")
    assert verdict.score == 7
    assert verdict.attempts == 1


def test_score_dimension_retries_unparseable_then_succeeds():
    judge, mock = client(retries=2)
    mock.push_script("excellent", "Score: 4")
    verdict = judge.score_dimension(TaskKind.SUGGESTION, RewardDimension.DETAIL, "p", "y", "g")
    assert verdict.score == 4
    assert verdict.attempts == 2


def test_score_dimension_unparseable_exhausts():
    judge, mock = client(retries=2)
    mock.push_script("excellent", "excellent", "excellent")
    with pytest.raises(UnparseableVerdict):
        judge.score_dimension(TaskKind.ASSESSMENT, RewardDimension.ACCURACY, "p", "y", "g")
    assert mock.calls == 3  # initial attempt plus both retries


def test_score_dimension_transport_exhausts():
    judge, mock = client(retries=1)
    mock.push_script(TransportError("boom"), TransportError("boom"))
    with pytest.raises(TransportError):
        judge.score_dimension(TaskKind.ASSESSMENT, RewardDimension.RELEVANCE, "p", "y", "g")


def test_retry_is_idempotent_on_final_verdict():
    sequences = [
        ["Score: 6"],
        [TransportError("flaky"), "Score: 6"],
        ["garbage", TransportError("flaky"), "Score: 6"],
    ]
    results = []
    for script in sequences:
        judge, mock = client(retries=3)
        mock.push_script(*script)
        verdict = judge.score_dimension(
            TaskKind.COMPARISON, RewardDimension.HELPFULNESS, "p", "y", "g"
        )
        results.append(verdict.score)
    assert results == [6, 6, 6]


def test_mock_judge_deterministic():
    judge_a, _ = client(seed=5)
    judge_b, _ = client(seed=5)
    verdict_a = judge_a.score_dimension(TaskKind.ASSESSMENT, RewardDimension.DETAIL, "p", "y", "g")
    verdict_b = judge_b.score_dimension(TaskKind.ASSESSMENT, RewardDimension.DETAIL, "p", "y", "g")
    assert verdict_a.raw == verdict_b.raw
    assert verdict_a.score == verdict_b.score
    assert 0 <= verdict_a.score <= 10


def test_mock_seed_changes_replies():
    judge_a, _ = client(seed=1)
    judge_b, _ = client(seed=2)
    a = judge_a.score_dimension(TaskKind.ASSESSMENT, RewardDimension.DETAIL, "p", "y", "g")
    b = judge_b.score_dimension(TaskKind.ASSESSMENT, RewardDimension.DETAIL, "p", "y", "g")
    assert a.raw != b.raw


def test_mock_marker_failure_paths():
    judge, _ = client(retries=0)
    with pytest.raises(UnparseableVerdict):
        judge.score_dimension(
            TaskKind.ASSESSMENT, RewardDimension.DETAIL, "[[MOCK:UNPARSEABLE]]", "y", "g"
        )
    with pytest.raises(TransportError):
        judge.score_dimension(
            TaskKind.ASSESSMENT, RewardDimension.DETAIL, "[[MOCK:TRANSPORT]]", "y", "g"
        )
    with pytest.raises(TransportError):
        judge.score_dimension(
            TaskKind.ASSESSMENT, RewardDimension.DETAIL, "[[MOCK:SLOW:0.01]]", "y", "g"
        )


def test_extract_dimensions_assessment():
    judge, _ = client()
    verdict = judge.extract_dimensions(TaskKind.ASSESSMENT, "a muffled but warm voice")
    assert len(verdict.scores) == 8
    assert {s.dimension for s in verdict.scores} == set(DimensionId)
    assert all(1 <= s.value <= 5 for s in verdict.scores)


def test_extract_dimensions_comparison():
    judge, _ = client()
    verdict = judge.extract_dimensions(TaskKind.COMPARISON, "B is cleaner than A")
    assert len(verdict.preferences) == 8
    assert all(p.preference in set(Preference) for p in verdict.preferences)


def test_extract_dimensions_reply_via_cot_parser():
    judge, mock = client()
    lines = [f"{d.display_name}: 3/5" for d in DimensionId if d is not DimensionId.SPEECH_RATE]
    lines.insert(3, "Speech Rate: Appropriate")
    mock.push_script("\n".join(lines))
    verdict = judge.extract_dimensions(TaskKind.ASSESSMENT, "desc")
    by_dim = {s.dimension: s.value for s in verdict.scores}
    assert by_dim[DimensionId.SPEECH_RATE] == 3


def test_extract_dimensions_incomplete_raises():
    judge, mock = client(retries=0)
    lines = [f"{d.display_name}: 2/5" for d in list(DimensionId)[:-1]]
    mock.push_script("\n".join(lines))
    with pytest.raises(IncompleteDims):
        judge.extract_dimensions(TaskKind.ASSESSMENT, "desc")


def test_extract_dimensions_comparison_phrase():
    judge, mock = client()
    lines = [f"{d.display_name}: A and B are similar" for d in DimensionId]
    lines[5] = "Emotional Impact: B is better than A"
    mock.push_script("\n".join(lines))
    verdict = judge.extract_dimensions(TaskKind.COMPARISON, "desc")
    prefs = {p.dimension: p.preference for p in verdict.preferences}
    assert prefs[DimensionId.EMOTIONAL_IMPACT] is Preference.B_BETTER


def test_parallelism_cap_enforced():
    mock = MockJudge(seed=0, hold_seconds=0.02)
    judge, _ = client(mock=mock, parallelism=3)
    bundle = PromptBundle(task=TaskKind.ASSESSMENT, messages=(Message("user", "hello"),))
    threads = [threading.Thread(target=lambda: judge.complete(bundle)) for _ in range(12)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert mock.calls == 12
    assert mock.max_in_flight <= 3


def test_verdict_never_fabricated():
    judge, mock = client(retries=0)
    mock.push_script("no digits here")
    with pytest.raises(UnparseableVerdict):
        judge.score_dimension(TaskKind.ASSESSMENT, RewardDimension.HELPFULNESS, "p", "y", "g")


def test_make_transport_mock_scheme():
    transport = make_transport(JudgeConfig(endpoint="mock://9", model="m"))
    assert isinstance(transport, MockJudge)
    assert transport.seed == 9


def test_config_env_override(monkeypatch):
    monkeypatch.setenv("JUDGE_ENDPOINT", "https://judge.example/api")
    monkeypatch.setenv("JUDGE_API_KEY", "sekrit")
    config = JudgeConfig.from_dict({"endpoint": "mock://0", "model": "m"})
    assert config.endpoint == "https://judge.example/api"
    assert config.api_key == "sekrit"


def test_config_validation():
    with pytest.raises(ValueError):
        JudgeConfig(endpoint="mock://0", model="m", parallelism=0)
    with pytest.raises(ValueError):
        JudgeConfig(endpoint="mock://0", model="m", max_retries=-1)


def test_http_transport_against_mock_server():
    import httpx

    from speechqc.judge import HttpTransport

    def handler(request: httpx.Request) -> httpx.Response:
        body = request.read().decode("utf-8")
        assert "messages" in body
        if "fail-me" in body:
            return httpx.Response(500, json={"error": "boom"})
        return httpx.Response(200, json={"text": "Score: 9"})

    config = JudgeConfig(endpoint="https://judge.test/v1", model="m", api_key="k")
    transport = HttpTransport(config)
    transport._client = httpx.Client(
        transport=httpx.MockTransport(handler), headers={"Authorization": "Bearer k"}
    )
    reply = transport({"model": "m", "messages": [{"role": "user", "content": "hi"}]})
    assert reply == "Score: 9"
    with pytest.raises(TransportError):
        transport({"model": "m", "messages": [{"role": "user", "content": "fail-me"}]})
