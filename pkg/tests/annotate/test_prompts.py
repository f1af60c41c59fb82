import json

from lapa.annotate import prompts
from lapa.models.annotation import ActionSegment


def _segments(note):
    return [
        ActionSegment(
            action_id=i + 1, start=entry.timestamp, end=entry.timestamp, description=entry.text, source_span=(i, i)
        )
        for i, entry in enumerate(note.entries)
    ]


def test_build_segment_request__payload_lists_indexed_entries(mock_note_builder):
    note = mock_note_builder(["Ran nmap sweep", "Deployed a web shell"])

    request = prompts.build_segment_request(note, "gpt-4o")

    assert request.stage == prompts.SEGMENT_STAGE
    assert request.payload["participant_id"] == "p001"
    assert [e["index"] for e in request.payload["entries"]] == [0, 1]
    assert request.payload["entries"][1]["timestamp"] == "2024-06-01 09:10:00"
    assert request.prompt_version == prompts.PROMPT_VERSION


def test_build_classify_request__context_window(mock_note_builder):
    note = mock_note_builder([f"action {i}" for i in range(6)])
    segments = _segments(note)

    request = prompts.build_classify_request(segments, 3, note, ["Create Account"], 2, "gpt-4o")

    payload = request.payload
    assert payload["target"]["action_id"] == 4
    assert payload["target"]["notes"] == ["action 3"]
    assert [c["action_id"] for c in payload["context_before"]] == [2, 3]
    assert [c["action_id"] for c in payload["context_after"]] == [5, 6]
    assert payload["techniques"] == ["Create Account"]


def test_build_classify_request__context_window_clipped_at_edges(mock_note_builder):
    note = mock_note_builder(["first", "second"])

    request = prompts.build_classify_request(_segments(note), 0, note, [], 3, "gpt-4o")

    assert request.payload["context_before"] == []
    assert [c["action_id"] for c in request.payload["context_after"]] == [2]


class TestBackendRequest:
    def test_cache_key__stable_for_equal_requests(self, mock_note_builder):
        note = mock_note_builder(["Ran nmap sweep"])

        first = prompts.build_segment_request(note, "gpt-4o")
        second = prompts.build_segment_request(note, "gpt-4o")

        assert first.cache_key == second.cache_key
        assert len(first.cache_key) == 64

    def test_cache_key__depends_on_model_and_prompt_version(self, mock_note_builder):
        note = mock_note_builder(["Ran nmap sweep"])
        request = prompts.build_segment_request(note, "gpt-4o")
        other_model = prompts.build_segment_request(note, "other-model")
        other_version = prompts.BackendRequest(**{**request.to_dict(), "prompt_version": "v0"})

        assert len({request.cache_key, other_model.cache_key, other_version.cache_key}) == 3

    def test_classification_schema__reasoning_before_label(self):
        properties = list(prompts.CLASSIFICATION_SCHEMA["properties"])

        assert properties.index("reasoning") < properties.index("technique_label")


def test_build_repair_request__embeds_invalid_output_and_error(mock_note_builder):
    request = prompts.build_segment_request(mock_note_builder(), "gpt-4o")

    repair = prompts.build_repair_request(request, "not json", "Invalid JSON")

    assert repair.stage == "segment_repair"
    assert repair.payload["invalid_output"] == "not json"
    assert repair.payload["validation_error"] == "Invalid JSON"
    assert repair.payload["original_request"] == json.loads(request.user_payload)
    assert repair.cache_key != request.cache_key
