"""HTTP surface over the consultation service."""
from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import (
    IcdhError,
    NotFoundError,
    ParseError,
    ProviderUnavailableError,
    ValidationError,
)
from .features import attributes_from_document
from .service import AppService, consultation_response

_STATUS = {
    ParseError: 400,
    NotFoundError: 404,
    ValidationError: 422,
    ProviderUnavailableError: 502,
}


def create_app(service: AppService) -> FastAPI:
    app = FastAPI(title="icdh", version="0.1.0")
    # the web UI is served separately from the API
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(IcdhError)
    async def _icdh_error(_request: Request, exc: IcdhError):
        status = next((code for klass, code in _STATUS.items() if isinstance(exc, klass)), 409)
        return JSONResponse(status_code=status, content={"error": type(exc).__name__, "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "model_version": service.model_version()}

    @app.get("/model")
    def model_info():
        return service.describe()

    @app.post("/consult")
    def consult(body: dict):
        try:
            image_bytes = base64.b64decode(body["image_b64"], validate=True)
        except KeyError:
            raise ParseError("consult request missing image_b64")
        except binascii.Error as exc:
            raise ParseError(f"image_b64 is not valid base64: {exc}")
        attrs, prefs = attributes_from_document(body.get("attributes", {}))
        result = service.consult(
            image_bytes,
            attrs,
            prefs,
            detections_doc=body.get("detections"),
            detections_endpoint=body.get("detections_endpoint"),
            image_content_type=body.get("image_content_type", "image/png"),
        )
        return consultation_response(result, service.palette)

    @app.get("/consultations/{consultation_id}")
    def get_consultation(consultation_id: str):
        return service.get_consultation(consultation_id)

    @app.post("/feedback")
    def feedback(body: dict):
        if "consultation_id" not in body or "outcome" not in body:
            raise ParseError("feedback request needs consultation_id and outcome")
        family_id = body.get("family_id")
        return service.record_feedback(
            body["consultation_id"], body["outcome"], None if family_id is None else int(family_id)
        )

    @app.post("/retrain")
    def retrain(body: dict | None = None):
        seed = None if not body else body.get("seed")
        version = service.retrain(None if seed is None else int(seed))
        return {"model_version": version}

    return app
