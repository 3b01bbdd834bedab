"""Provider wire protocol v1.

Requests and responses travel as line-delimited JSON over HTTP POST to the
/wsd, /ner and /absa endpoints. Every request carries an ``id`` the response
must echo, a ``protocol`` tag, the sentence ``tokens`` and the target
``span`` [start, end); /wsd requests additionally carry ``candidates`` (sense
display names). Responses carry ``sense`` (or null) for /wsd and ``label``
for /ner and /absa, plus a ``confidence`` in [0, 1].

The JSON Schema for both sides ships at ``data/protocol_v1.schema.json``.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass

import requests

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = "v1"

NER_LABELS = ("organization", "person", "other")
ABSA_LABELS = ("positive", "negative", "neutral")


class ProviderError(Exception):
    """Transport failure or protocol violation from an external provider."""


@dataclass
class BridgeClient:
    """NDJSON-over-HTTP client with a bounded retry policy.

    ``post_batch`` sends one line per request object and returns responses
    keyed back into request order via the echoed ids.
    """

    base_url: str
    timeout: float = 10.0
    retries: int = 2
    backoff: float = 0.2

    def endpoint(self, name: str) -> str:
        return self.base_url.rstrip("/") + "/" + name.lstrip("/")

    def post_batch(self, path: str, request_objs: list[dict]) -> list[dict]:
        if not request_objs:
            return []
        body = "\n".join(json.dumps(obj, sort_keys=True) for obj in request_objs) + "\n"
        url = self.endpoint(path)
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = requests.post(
                    url, data=body.encode("utf-8"),
                    headers={"Content-Type": "application/x-ndjson"},
                    timeout=self.timeout)
                response.raise_for_status()
                return self._collate(request_objs, response.text)
            except (requests.RequestException, ProviderError) as err:
                last_error = err
                if attempt < self.retries:
                    time.sleep(self.backoff * (attempt + 1))
        raise ProviderError(f"{url}: {last_error}")

    def health(self) -> dict:
        try:
            response = requests.get(self.endpoint("health"), timeout=self.timeout)
            response.raise_for_status()
            return response.json()
        except (requests.RequestException, ValueError) as err:
            raise ProviderError(f"health check failed: {err}")

    @staticmethod
    def _collate(request_objs: list[dict], text: str) -> list[dict]:
        by_id: dict[str, dict] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except ValueError:
                raise ProviderError(f"malformed response line: {line[:80]!r}")
            if obj.get("protocol") != PROTOCOL_VERSION:
                raise ProviderError(f"unexpected protocol tag {obj.get('protocol')!r}")
            by_id[obj.get("id")] = obj
        ordered = []
        for req in request_objs:
            obj = by_id.get(req["id"])
            if obj is None:
                raise ProviderError(f"response missing for request id {req['id']!r}")
            ordered.append(obj)
        return ordered


def wsd_request(req_id: str, tokens: list[str], span: tuple[int, int],
                candidates: list[str]) -> dict:
    return {"id": req_id, "protocol": PROTOCOL_VERSION, "tokens": list(tokens),
            "span": [span[0], span[1]], "candidates": list(candidates)}


def ner_request(req_id: str, tokens: list[str], span: tuple[int, int]) -> dict:
    return {"id": req_id, "protocol": PROTOCOL_VERSION, "tokens": list(tokens),
            "span": [span[0], span[1]]}


absa_request = ner_request


def check_confidence(obj: dict) -> float:
    confidence = obj.get("confidence")
    if not isinstance(confidence, (int, float)) or not 0.0 <= confidence <= 1.0:
        raise ProviderError(f"confidence out of range: {confidence!r}")
    return float(confidence)
