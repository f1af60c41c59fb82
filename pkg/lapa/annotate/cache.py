import json
import logging
from pathlib import Path

from lapa.annotate.prompts import BackendRequest, BackendResponse
from lapa.utils import write_json

logger = logging.getLogger(__name__)


class ResponseCache:
    """One JSON file per request hash. Writes are atomic; concurrent writers of one key are last-writer-wins."""

    def __init__(self, directory: Path) -> None:
        self.directory = directory

    def path_for(self, request: BackendRequest) -> Path:
        return self.directory / f"{request.cache_key}.json"

    def get(self, request: BackendRequest) -> BackendResponse | None:
        path = self.path_for(request)
        if not path.exists():
            logger.debug(f"Cache miss: stage={request.stage} key={request.cache_key}")
            return None

        logger.debug(f"Cache hit: stage={request.stage} key={request.cache_key}")
        data = json.loads(path.read_text(encoding="utf-8"))
        return BackendResponse.from_dict(data["response"])

    def put(self, request: BackendRequest, response: BackendResponse) -> Path:
        return write_json(self.path_for(request), {"request": request.to_dict(), "response": response.to_dict()})
