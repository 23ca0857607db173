"""HTTP API around rulebase compilation and questionnaire sessions.

Sessions live in memory with idle expiry; per-session mutations are serialized
with a lock, compiled artifacts are shared read-only across sessions. All
errors use the envelope ``{"code": ..., "message": ..., "detail": ...}``.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Callable

import yaml
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import __version__
from .catalog import Catalog, Code, load_catalog, most_general_code
from .display import DisplayRuleSet, Order, compile_display_rules
from .dsl import parse_rulebase
from .engine import (
    NotDisplayedError,
    QuestionnaireDiff,
    QuestionnaireView,
    Recommendation,
    Session,
    create_session,
)
from .errors import RuleformError
from .ordering import (
    OptimizerConfig,
    OrderingInstance,
    condition_frequency_order,
    optimize_order,
)
from .rules import PatientState, RuleBase

ORDERING_MODES = ("frequency", "optimize", "file")


class ServiceError(RuleformError):
    """Invalid service configuration."""


@dataclass
class ServiceConfig:
    catalog_path: Path
    rulebase_paths: dict[str, Path]
    host: str = "127.0.0.1"
    port: int = 8000
    ordering_mode: str = "frequency"
    order_paths: dict[str, Path] = dataclass_field(default_factory=dict)
    optimizer_seed: int = 0
    patient_specific: bool = False
    session_expiry_seconds: float = 3600.0
    cors_origins: tuple[str, ...] = ()

    def validate(self) -> None:
        if self.session_expiry_seconds <= 0:
            raise ServiceError("session expiry must be positive")
        if self.ordering_mode not in ORDERING_MODES:
            raise ServiceError(
                f"ordering mode must be one of {', '.join(ORDERING_MODES)}"
            )
        if self.ordering_mode == "file":
            missing = set(self.rulebase_paths) - set(self.order_paths)
            if missing:
                raise ServiceError(
                    f"ordering mode 'file' needs an order file for: {', '.join(sorted(missing))}"
                )
        if self.patient_specific and self.ordering_mode != "optimize":
            raise ServiceError("patient-specific ordering requires mode 'optimize'")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(message)


@dataclass(frozen=True)
class LoadedRulebase:
    id: str
    rulebase: RuleBase
    order: Order
    display_rules: DisplayRuleSet


@dataclass
class StoredSession:
    session: Session
    lock: threading.Lock
    last_access: float


class SessionStore:
    """In-memory sessions with idle expiry, swept on every access."""

    def __init__(self, expiry_seconds: float, clock: Callable[[], float]):
        self.expiry_seconds = expiry_seconds
        self.clock = clock
        self.entries: dict[str, StoredSession] = {}
        self._lock = threading.Lock()

    def _sweep(self, now: float) -> None:
        expired = [
            sid
            for sid, stored in self.entries.items()
            if now - stored.last_access > self.expiry_seconds
        ]
        for sid in expired:
            del self.entries[sid]

    def add(self, session: Session) -> StoredSession:
        with self._lock:
            now = self.clock()
            self._sweep(now)
            stored = StoredSession(session, threading.Lock(), now)
            self.entries[session.id] = stored
            return stored

    def get(self, session_id: str) -> StoredSession:
        with self._lock:
            now = self.clock()
            self._sweep(now)
            stored = self.entries.get(session_id)
            if stored is None:
                raise ApiError(404, "unknown_session", f"no session {session_id!r}")
            stored.last_access = now
            return stored

    def delete(self, session_id: str) -> None:
        with self._lock:
            self._sweep(self.clock())
            self.entries.pop(session_id, None)


# -- wire format ------------------------------------------------------------ #

def _code_json(code: Code) -> dict:
    return {
        "system": code.system,
        "value": code.value,
        "label": code.label,
        "general": code.is_general,
    }


def _view_json(view: QuestionnaireView) -> dict:
    return {
        "panels": [
            {
                "category": panel.category,
                "color": panel.color,
                "items": [
                    {
                        "conditionId": item.condition_id,
                        "label": item.label,
                        "checked": item.checked,
                        "chosenCode": _code_json(item.chosen_code) if item.chosen_code else None,
                        "availableCodes": [_code_json(c) for c in item.available_codes],
                        "isNew": item.is_new,
                        "hasStar": item.has_star,
                    }
                    for item in panel.items
                ],
            }
            for panel in view.panels
        ]
    }


def _diff_json(diff: QuestionnaireDiff) -> dict:
    return {
        "appeared": sorted(diff.appeared),
        "disappeared": sorted(diff.disappeared),
        "unchanged": sorted(diff.unchanged),
    }


def _recommendations_json(recommendations: list[Recommendation]) -> list[dict]:
    return [
        {
            "ruleId": r.rule_id,
            "action": {
                "verb": r.action_verb,
                "target": r.action_target,
                "text": r.action_text,
            },
            "triggeringConditions": sorted(r.triggering_conditions),
        }
        for r in recommendations
    ]


# -- request bodies ---------------------------------------------------------- #

class CodeRef(BaseModel):
    system: str
    value: str


class AssertedEntry(BaseModel):
    conditionId: str
    code: CodeRef | None = None


class CreateSessionBody(BaseModel):
    rulebaseId: str
    drugs: list[str] = []
    asserted: list[AssertedEntry] | None = None


class AnswerBody(BaseModel):
    conditionId: str
    checked: bool
    code: CodeRef | None = None


class DrugsBody(BaseModel):
    drugs: list[str]


# -- loading ------------------------------------------------------------------ #

def _load_order_file(path: Path, catalog: Catalog) -> Order:
    doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(doc, list) or not all(isinstance(x, str) for x in doc):
        raise ServiceError(f"order file {path} must be a list of condition ids")
    order = Order(tuple(doc))
    for cond_id in catalog.clinical_ids():
        if cond_id not in order:
            raise ServiceError(f"order file {path} is missing condition {cond_id!r}")
    return order


def load_rulebases(config: ServiceConfig) -> tuple[Catalog, dict[str, LoadedRulebase]]:
    """Read and compile everything the config references; raises on any error."""
    config.validate()
    catalog = load_catalog(config.catalog_path.read_text(encoding="utf-8"))
    loaded: dict[str, LoadedRulebase] = {}
    for rb_id, path in config.rulebase_paths.items():
        rb = parse_rulebase(path.read_text(encoding="utf-8"), catalog)
        if config.ordering_mode == "optimize":
            order = optimize_order(
                OrderingInstance(rb), OptimizerConfig(seed=config.optimizer_seed)
            )
        elif config.ordering_mode == "file":
            order = _load_order_file(config.order_paths[rb_id], catalog)
        else:
            order = condition_frequency_order(rb)
        loaded[rb_id] = LoadedRulebase(rb_id, rb, order, compile_display_rules(rb, order))
    return catalog, loaded


# -- application --------------------------------------------------------------- #

def create_app(config: ServiceConfig, clock: Callable[[], float] | None = None) -> FastAPI:
    catalog, rulebases = load_rulebases(config)
    store = SessionStore(config.session_expiry_seconds, clock or time.monotonic)
    app = FastAPI(title="ruleform", version=__version__)

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    def handle_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "invalid_request",
                "message": "request body failed validation",
                "detail": exc.errors(),
            },
        )

    def get_rulebase(rb_id: str) -> LoadedRulebase:
        loaded = rulebases.get(rb_id)
        if loaded is None:
            raise ApiError(404, "unknown_rulebase", f"no rulebase {rb_id!r}")
        return loaded

    def resolve_clinical(condition_id: str):
        if condition_id not in catalog:
            raise ApiError(404, "unknown_condition", f"no condition {condition_id!r}")
        cond = catalog.condition(condition_id)
        if not cond.is_clinical:
            raise ApiError(
                400,
                "kind_mismatch",
                f"condition {condition_id!r} is {cond.kind.value}, expected clinical",
            )
        return cond

    def resolve_drugs(drugs: list[str]) -> set[str]:
        for drug_id in drugs:
            if drug_id not in catalog:
                raise ApiError(404, "unknown_condition", f"no condition {drug_id!r}")
            if catalog.condition(drug_id).is_clinical:
                raise ApiError(
                    400,
                    "kind_mismatch",
                    f"condition {drug_id!r} is clinical, expected a drug or lab",
                )
        return set(drugs)

    def resolve_code(cond, ref: CodeRef | None) -> Code | None:
        if ref is None:
            return None
        for code in cond.codes:
            if code.system == ref.system and code.value == ref.value:
                return code
        raise ApiError(
            400,
            "unknown_code",
            f"code {ref.system}:{ref.value} does not belong to {cond.id!r}",
        )

    def session_payload(session: Session, diff: QuestionnaireDiff | None = None) -> dict:
        payload = {
            "view": _view_json(session.view()),
            "recommendations": _recommendations_json(session.recommendations()),
        }
        if diff is not None:
            payload["diff"] = _diff_json(diff)
        return payload

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.get("/rulebases")
    def list_rulebases():
        return [
            {
                "id": loaded.id,
                "ruleCount": len(loaded.rulebase.rules),
                "clinicalConditionCount": len(loaded.rulebase.referenced_clinical_ids()),
            }
            for loaded in rulebases.values()
        ]

    @app.get("/rulebases/{rb_id}/full")
    def full_questionnaire(rb_id: str):
        loaded = get_rulebase(rb_id)
        referenced = loaded.rulebase.referenced_clinical_ids()
        panels = []
        for category in catalog.categories:
            members = sorted(
                (c for c in referenced if catalog.condition(c).category == category.name),
                key=lambda c: (catalog.condition(c).label, c),
            )
            if not members:
                continue
            panels.append(
                {
                    "category": category.name,
                    "color": category.color,
                    "items": [
                        {
                            "conditionId": cond_id,
                            "label": catalog.condition(cond_id).label,
                            "availableCodes": [
                                _code_json(code)
                                for code in catalog.condition(cond_id).codes
                            ],
                        }
                        for cond_id in members
                    ],
                }
            )
        return {"id": rb_id, "panels": panels}

    @app.post("/sessions", status_code=201)
    def create_session_endpoint(body: CreateSessionBody):
        loaded = get_rulebase(body.rulebaseId)
        patient = PatientState(present_nonclinical=resolve_drugs(body.drugs))
        for entry in body.asserted or []:
            cond = resolve_clinical(entry.conditionId)
            code = resolve_code(cond, entry.code)
            patient.asserted_clinical[entry.conditionId] = (
                code if code is not None else most_general_code(cond)
            )
        order, display_rules = loaded.order, loaded.display_rules
        if config.patient_specific:
            order = optimize_order(
                OrderingInstance(loaded.rulebase, frozenset(patient.present_nonclinical)),
                OptimizerConfig(seed=config.optimizer_seed),
            )
            display_rules = compile_display_rules(loaded.rulebase, order)
        session = create_session(
            loaded.rulebase, order, patient, display_rules=display_rules
        )
        store.add(session)
        return {"sessionId": session.id, "view": _view_json(session.view())}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        stored = store.get(session_id)
        with stored.lock:
            return session_payload(stored.session)

    @app.post("/sessions/{session_id}/answers")
    def post_answer(session_id: str, body: AnswerBody):
        stored = store.get(session_id)
        cond = resolve_clinical(body.conditionId)
        code = resolve_code(cond, body.code)
        with stored.lock:
            try:
                diff = stored.session.set_condition(body.conditionId, body.checked, code)
            except NotDisplayedError as exc:
                raise ApiError(409, "not_displayed", str(exc)) from exc
            return session_payload(stored.session, diff)

    @app.put("/sessions/{session_id}/drugs")
    def put_drugs(session_id: str, body: DrugsBody):
        stored = store.get(session_id)
        drugs = resolve_drugs(body.drugs)
        with stored.lock:
            session = stored.session
            if config.patient_specific:
                order = optimize_order(
                    OrderingInstance(session.rulebase, frozenset(drugs)),
                    OptimizerConfig(seed=config.optimizer_seed),
                )
                session.order = order
                session.display_rules = compile_display_rules(session.rulebase, order)
            diff = session.set_drugs(drugs)
            return session_payload(session, diff)

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        store.delete(session_id)
        return Response(status_code=204)

    return app


def serve(config: ServiceConfig) -> None:
    """Compile everything (failing fast), then run the HTTP server until stopped."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)
