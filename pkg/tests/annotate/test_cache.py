from lapa.annotate import prompts
from lapa.annotate.cache import ResponseCache
from lapa.annotate.prompts import BackendResponse


def test_response_cache__put_then_get(tmp_path, mock_note_builder):
    cache = ResponseCache(tmp_path / "cache")
    request = prompts.build_segment_request(mock_note_builder(), "gpt-4o")
    response = BackendResponse(text='{"segments": []}', backend_id="api:gpt-4o", usage={"total_tokens": 12})

    path = cache.put(request, response)

    assert path == tmp_path / "cache" / f"{request.cache_key}.json"
    assert cache.get(request) == response


def test_response_cache__miss(tmp_path, mock_note_builder):
    cache = ResponseCache(tmp_path / "cache")

    assert cache.get(prompts.build_segment_request(mock_note_builder(), "gpt-4o")) is None
