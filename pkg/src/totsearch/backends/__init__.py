from .base import (
    Backend,
    BackendError,
    BackendReply,
    Completion,
    ContextOverflowError,
    EvaluationReply,
    GenerationRequest,
    HTTPStatusError,
    Judgement,
    MalformedReplyError,
    TransportError,
    Usage,
)
from .http import HTTPBackend
from .mock import MockBackend
from .oracle import OracleBackend, ScriptedOracle
from .replay import RecordingBackend, ReplayBackend, ReplayError
