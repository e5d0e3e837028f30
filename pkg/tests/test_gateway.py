from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import httpx
import pytest

from crypticproof.gateway import (
    HANDOVER,
    ConfigError,
    FixtureMiss,
    FixtureMode,
    Gateway,
    GatewayError,
    HTTPBackend,
    MalformedResponse,
    ModelEndpoint,
    PromptBundle,
    RateLimited,
    RecordingBackend,
    ScriptedBackend,
    Timeout,
    answer_messages,
    clue_text,
    extract_code,
    fingerprint,
    formalise_messages,
    generate_answers,
    generate_wordplays,
    parse_wordplay,
    rewrite_messages,
    wordplay_messages,
)

OK_BODY = {"choices": [{"message": {"role": "assistant", "content": "HERON"}}]}


def endpoint(**kw) -> ModelEndpoint:
    return ModelEndpoint(base_url="http://model.test/v1", model_name="m", backoff=0.0, **kw)


def mock_backend(responses, seen=None, **kw) -> HTTPBackend:
    queue = list(responses)

    def handler(request: httpx.Request) -> httpx.Response:
        if seen is not None:
            seen.append(request)
        item = queue.pop(0)
        if isinstance(item, Exception):
            raise item
        status, body = item
        return httpx.Response(status, json=body) if isinstance(body, dict) else httpx.Response(status, text=body)

    return HTTPBackend(endpoint(**kw), client=httpx.Client(transport=httpx.MockTransport(handler)))


class TestHTTPBackend:
    def test_payload_and_auth(self, monkeypatch):
        monkeypatch.setenv("TEST_KEY", "sekrit")
        seen = []
        backend = mock_backend([(200, OK_BODY)], seen, api_key_env="TEST_KEY")
        assert backend.chat([("user", "hi")], temperature=0.5) == "HERON"
        req = seen[0]
        assert req.url == "http://model.test/v1/chat/completions"
        assert req.headers["Authorization"] == "Bearer sekrit"
        body = json.loads(req.content)
        assert body["messages"] == [{"role": "user", "content": "hi"}]
        assert body["temperature"] == 0.5 and body["model"] == "m"

    def test_retries_transient_errors(self):
        backend = mock_backend([(503, "busy"), (429, "slow down"), (200, OK_BODY)])
        assert backend.chat([("user", "hi")]) == "HERON"

    def test_gives_up_after_retries(self):
        backend = mock_backend([(429, "x")] * 3, max_retries=2)
        with pytest.raises(RateLimited) as err:
            backend.chat([("user", "hi")])
        assert err.value.fingerprint == fingerprint([("user", "hi")])

    def test_timeout(self):
        backend = mock_backend([httpx.ReadTimeout("slow")] * 2, max_retries=1)
        with pytest.raises(Timeout):
            backend.chat([("user", "hi")])

    def test_client_error_not_retried(self):
        backend = mock_backend([(400, "bad request"), (200, OK_BODY)])
        with pytest.raises(GatewayError, match="400"):
            backend.chat([("user", "hi")])

    def test_malformed_body(self):
        backend = mock_backend([(200, {"choices": []})])
        with pytest.raises(MalformedResponse):
            backend.chat([("user", "hi")])

    def test_empty_messages(self):
        with pytest.raises(ValueError):
            mock_backend([]).chat([])

    def test_invalid_endpoint(self):
        with pytest.raises(ConfigError):
            endpoint(temperature=-1)

    def test_real_socket_server(self):
        calls = []

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                calls.append(body)
                status = 503 if len(calls) == 1 else 200
                payload = json.dumps(OK_BODY if status == 200 else {}).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            ep = ModelEndpoint(base_url=f"http://127.0.0.1:{server.server_port}/v1",
                               model_name="local", backoff=0.0, request_timeout=5)
            assert HTTPBackend(ep).chat([("user", "wader")]) == "HERON"
            assert len(calls) == 2
        finally:
            server.shutdown()


class TestScripted:
    def test_by_sequence(self):
        backend = ScriptedBackend.from_responses(["a", "b"])
        assert backend.mode is FixtureMode.BY_SEQUENCE
        assert [backend.chat([("user", "x")]), backend.chat([("user", "y")])] == ["a", "b"]
        with pytest.raises(FixtureMiss):
            backend.chat([("user", "z")])

    def test_by_hash_queues(self):
        m = [("user", "q")]
        backend = ScriptedBackend([(fingerprint(m), "1"), (fingerprint(m), "2")])
        assert backend.chat(m) == "1" and backend.chat(m) == "2"
        with pytest.raises(FixtureMiss) as err:
            backend.chat(m)
        assert err.value.fingerprint == fingerprint(m)
        with pytest.raises(FixtureMiss):
            backend.chat([("user", "other")])

    def test_from_file(self, tmp_path):
        m = [("user", "q")]
        path = tmp_path / "f.json"
        path.write_text(json.dumps([{"match": fingerprint(m), "response": "r"}]))
        assert ScriptedBackend.from_file(path).chat(m) == "r"
        path.write_text(json.dumps({"match": 1}))
        with pytest.raises(ConfigError):
            ScriptedBackend.from_file(path)

    def test_recording_round_trip(self, tmp_path):
        rec = RecordingBackend(ScriptedBackend.from_responses(["one", "two"]))
        rec.chat([("user", "a")])
        rec.chat([("user", "b")])
        replay = ScriptedBackend.from_file(rec.dump(tmp_path / "r.json"))
        assert replay.chat([("user", "b")]) == "two"

    def test_fingerprint_depends_on_roles(self):
        assert fingerprint([("user", "a")]) != fingerprint([("system", "a")])
        assert fingerprint([("user", "ab")]) != fingerprint([("user", "a"), ("user", "b")])


class TestPrompts:
    def test_bundle_contents(self, bundle):
        bundle.check(rewrite=True)
        assert bundle.shot_counts == {"wordplay": 20, "formalisation": 6}
        answers = {s.split('answer="', 1)[1].split('"', 1)[0] for s in bundle.formalisation_shots}
        assert {"ONCE", "DECIMAL", "SUPERMARKET"} <= answers
        assert all("HERON" not in s for s in bundle.wordplay_shots)

    def test_missing_rewrite_instruction(self, tmp_path, bundle):
        for name, text in (("rubric.txt", bundle.rubric), ("dsl.txt", bundle.dsl_rubric),
                           ("instruction.txt", bundle.instruction)):
            (tmp_path / name).write_text(text)
        (tmp_path / "shots").mkdir()
        (tmp_path / "shots" / "wordplay_01.txt").write_text(bundle.wordplay_shots[0])
        (tmp_path / "shots" / "proof_01.txt").write_text(bundle.formalisation_shots[0])
        partial = PromptBundle.load(tmp_path)
        partial.check()
        with pytest.raises(ConfigError, match="rewrite_instruction"):
            partial.check(rewrite=True)
        with pytest.raises(ConfigError):
            rewrite_messages("x", "y", partial)

    def test_formalise_prompt_is_deterministic_and_ends_with_handover(self, bundle):
        a = formalise_messages("wader woman has on (5)", "heron", "{wader} woman has on",
                               "woman (HER) has on (ON)", bundle)
        b = formalise_messages("wader woman has on (5)", "HERON", "{wader} woman has on",
                               "woman (HER) has on (ON)", PromptBundle.load())
        assert a == b and len(a) == 1
        text = a[0][1]
        assert text.endswith(HANDOVER)
        assert 'clue: "wader woman has on"\ndefinition: {wader} woman has on\nanswer: HERON' in text
        assert text.index("def proof(answer=\"ONCE\"") < text.index("wader woman")

    def test_rewrite_prompt(self, bundle):
        feedback = "AssertionError: assert x :\n  hint\n\n" + bundle.rewrite_instruction + "\n\n" + HANDOVER
        (role, text), = rewrite_messages('```python\ndef proof(answer="X", clue="c", pattern=\'1\'):\n  pass\n```',
                                         feedback, bundle)
        assert "# SOLUTION:\n```python\ndef proof(answer=\"X\"" in text
        assert text.count(bundle.rewrite_instruction) == 1
        assert text.endswith(HANDOVER)

    def test_answer_and_wordplay_messages(self):
        assert answer_messages("wader woman has on (5)", "5", "D")[1][1] == \
            'clue: "wader woman has on"\npattern: 5\nad: down'
        assert wordplay_messages("wader woman has on (5)", "heron")[1][1].endswith("answer: HERON ~ heron")

    def test_clue_text(self):
        assert clue_text("Not seeing window covering (5,5)") == "Not seeing window covering"
        assert clue_text("no enumeration") == "no enumeration"


class TestParsing:
    def test_extract_code_fenced(self):
        assert extract_code("text\n```python\ndef proof(answer='A'):\n  pass\n```\nmore") == \
            "def proof(answer='A'):\n  pass\n"

    def test_extract_code_continuation(self):
        assert extract_code('"HERON", clue="x", pattern=\'5\'):\n  assert True\n```').startswith(
            'def proof(answer="HERON"')

    def test_parse_wordplay(self):
        s = parse_wordplay("definition: {wader} woman has on\nwordplay: HER + ON\nextra")
        assert (s.definition, s.wordplay) == ("{wader} woman has on", "HER + ON")
        assert parse_wordplay("wordplay: only") is None

    def test_generate_answers(self):
        backend = ScriptedBackend.from_responses(["answer: heron ~ heron", "Egret.", "\n\nHERON\nbecause"])
        assert generate_answers("c", "5", "A", 3, backend) == ["HERON", "EGRET", "HERON"]
        with pytest.raises(ValueError):
            generate_answers("c", "5", "A", 0, backend)

    def test_wordplays_resample_malformed(self):
        backend = ScriptedBackend.from_responses(
            ["junk", "definition: d\nwordplay: w1", "junk", "definition: d\nwordplay: w2"])
        out = generate_wordplays("c", "A", 2, backend)
        assert [s.wordplay for s in out] == ["w1", "w2"]

    def test_wordplays_partial_then_malformed(self):
        backend = ScriptedBackend.from_responses(["definition: d\nwordplay: w1"] + ["junk"] * 3)
        assert len(generate_wordplays("c", "A", 3, backend, retry_budget=2)) == 1
        backend = ScriptedBackend.from_responses(["junk"] * 4)
        with pytest.raises(MalformedResponse):
            generate_wordplays("c", "A", 3, backend, retry_budget=2)

    def test_gateway_temperatures(self, bundle):
        temps = []

        class Probe:
            def chat(self, messages, *, temperature=None):
                temps.append(temperature)
                return "definition: d\nwordplay: w"

        g = Gateway(Probe(), bundle)
        g.answers("c", "1", "A", 1)
        g.wordplays("c", "A", 1)
        g.formalise("c", "A", "d", "w")
        assert temps == [1.0, 1.0, 0.2]
        with pytest.raises(ValueError):
            g.formalise("c", "A", "d", "  ")
